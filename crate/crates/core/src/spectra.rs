//! Nontrivial kernel spectra and their moments.
//!
//! A standard kernel on `n` objects has one trivial eigenpair (eigenvalue 0,
//! eigenvector `sqrt(f)`); the remaining `n-1` eigenvalues drive everything
//! downstream. Moments are normalized by `n-1`, so that the raw moment of
//! order `q` equals the normalized trace `Tr(K^q)/(n-1)`.

use crate::error::{Error, Result};
use crate::geometry::{nontrivial_eigenpairs, StandardKernel};

/// The `n-1` nontrivial eigenvalues of a standard kernel, decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct NontrivialSpectrum {
    lambdas: Vec<f64>,
    n: usize,
}

impl NontrivialSpectrum {
    /// Wraps an eigenvalue list (length `n-1`, nonnegative); sorts decreasing.
    pub fn new(mut lambdas: Vec<f64>, n: usize) -> Result<Self> {
        if n < 2 || lambdas.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n.saturating_sub(1),
                found: lambdas.len(),
            });
        }
        if lambdas.iter().any(|l| *l < 0.0 || !l.is_finite()) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be nonnegative and finite".into(),
            ));
        }
        lambdas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        Ok(Self { lambdas, n })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n - 1
    }

    /// Mean eigenvalue.
    pub fn mean(&self) -> f64 {
        self.lambdas.iter().sum::<f64>() / self.dim() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.lambdas.iter().all(|l| *l == 0.0)
    }
}

/// Extracts the nontrivial spectrum of a standard kernel, discarding the
/// eigenpair aligned with `sqrt(f)` after checking its eigenvalue is null
/// within tolerance.
pub fn nontrivial_spectrum(kernel: &StandardKernel) -> Result<NontrivialSpectrum> {
    let (_, values) = nontrivial_eigenpairs(kernel)?;
    NontrivialSpectrum::new(values, kernel.len())
}

/// Raw spectral moment of order `q >= 1`: the average `q`-th power of the
/// nontrivial eigenvalues, equal to the normalized trace of `K^q`.
pub fn spectral_moment(s: &NontrivialSpectrum, q: u32) -> Result<f64> {
    if q < 1 {
        return Err(Error::UnsupportedOrder { q: q as usize });
    }
    Ok(s.lambdas.iter().map(|l| l.powi(q as i32)).sum::<f64>() / s.dim() as f64)
}

/// Centered spectral moment of order `q` in {2, 3, 4}: average `q`-th power
/// of the deviations from the mean eigenvalue.
pub fn centered_spectral_moment(s: &NontrivialSpectrum, q: u32) -> Result<f64> {
    if !(2..=4).contains(&q) {
        return Err(Error::UnsupportedOrder { q: q as usize });
    }
    let mean = s.mean();
    Ok(s.lambdas
        .iter()
        .map(|l| (l - mean).powi(q as i32))
        .sum::<f64>()
        / s.dim() as f64)
}

/// Effective dimensionality `nu = Tr^2(K) / Tr(K^2)`, a sphericity measure
/// in `[1, n-1]`: 1 for univariate configurations, `n-1` for flat spectra.
pub fn effective_dimensionality(s: &NontrivialSpectrum) -> Result<f64> {
    if s.is_zero() {
        return Err(Error::ZeroSpectrum);
    }
    let sum: f64 = s.lambdas.iter().sum();
    let sum_sq: f64 = s.lambdas.iter().map(|l| l * l).sum();
    Ok(sum * sum / sum_sq)
}

/// Spectral skewness `a = m3 / m2^{3/2}` of the centered spectral moments.
/// Undefined (error) on near-flat spectra where the variance vanishes.
pub fn spectral_skewness(s: &NontrivialSpectrum) -> Result<f64> {
    let mean = s.mean();
    let m2 = centered_spectral_moment(s, 2)?;
    if m2 <= 1e-14 * mean * mean {
        return Err(Error::FlatSpectrum);
    }
    let m3 = centered_spectral_moment(s, 3)?;
    Ok(m3 / m2.powf(1.5))
}

/// Normalized trace `Tr(K^q)/(n-1)` by repeated matrix multiplication,
/// independent of any eigendecomposition.
pub fn normalized_trace_power(kernel: &StandardKernel, q: u32) -> Result<f64> {
    if !(1..=4).contains(&q) {
        return Err(Error::UnsupportedOrder { q: q as usize });
    }
    let k = kernel.as_matrix();
    let mut power = k.clone();
    for _ in 1..q {
        power = &power * k;
    }
    Ok(power.trace() / (kernel.len() - 1) as f64)
}

/// Raw and centered moments, effective dimensionality and skewness of one
/// spectrum, bundled for reporting.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub n: usize,
    pub mean: f64,
    /// Raw moments of orders 1..=4.
    pub raw_moments: [f64; 4],
    /// Centered moments of orders 2..=4.
    pub centered_moments: [f64; 3],
    pub nu: f64,
    /// `None` when the spectrum is flat (skewness undefined).
    pub skewness: Option<f64>,
}

impl SpectralSummary {
    pub fn from_spectrum(s: &NontrivialSpectrum) -> Result<Self> {
        if s.is_zero() {
            return Err(Error::ZeroSpectrum);
        }
        let raw = [
            spectral_moment(s, 1)?,
            spectral_moment(s, 2)?,
            spectral_moment(s, 3)?,
            spectral_moment(s, 4)?,
        ];
        let centered = [
            centered_spectral_moment(s, 2)?,
            centered_spectral_moment(s, 3)?,
            centered_spectral_moment(s, 4)?,
        ];
        Ok(Self {
            n: s.n(),
            mean: s.mean(),
            raw_moments: raw,
            centered_moments: centered,
            nu: effective_dimensionality(s)?,
            skewness: spectral_skewness(s).ok(),
        })
    }
}
