//! RV/CV coefficients, their exact null moments under invariant orthogonal
//! integration, and the skewness/kurtosis-corrected significance test.
//!
//! The null model averages the relative orientation of the two
//! configurations over the Haar measure on the orthogonal group of the
//! nontrivial eigenspace. The first four moments of `CV = Tr(K_X K_Y)` then
//! have closed forms in the centered spectral moments of the two kernels,
//! with coefficients rational in `n`; the RV cumulants follow by dividing
//! out the fixed normalization `(n-1) sqrt(m2(lambda) m2(mu))`.

pub mod normal;

use num::{BigInt, Zero};

use crate::error::{Error, Result};
use crate::geometry::{build_kernel, ObjectWeights, StandardKernel, WeightedConfiguration};
use crate::spectra::{
    centered_spectral_moment, effective_dimensionality, nontrivial_spectrum, spectral_skewness,
    NontrivialSpectrum, SpectralSummary,
};
use crate::weingarten::Rational;

/// Componentwise tolerance for the shared-weights precondition.
const WEIGHT_EQ_TOL: f64 = 1e-12;

fn check_compatible(kx: &StandardKernel, ky: &StandardKernel) -> Result<()> {
    if kx.len() != ky.len() {
        return Err(Error::DimensionMismatch {
            expected: kx.len(),
            found: ky.len(),
        });
    }
    if !kx.weights().approx_eq(ky.weights(), WEIGHT_EQ_TOL) {
        return Err(Error::WeightMismatch);
    }
    Ok(())
}

/// Cross inertia `CV = Tr(K_X K_Y)`, nonnegative up to rounding since both
/// kernels are positive semi-definite.
pub fn cv_coefficient(kx: &StandardKernel, ky: &StandardKernel) -> Result<f64> {
    check_compatible(kx, ky)?;
    let a = kx.as_matrix();
    let b = ky.as_matrix();
    // Both symmetric, so Tr(AB) is the entrywise scalar product.
    Ok(a.zip_fold(b, 0.0, |acc, x, y| acc + x * y))
}

/// RV coefficient: cosine similarity between the vectorized kernels,
/// in `[0, 1]` with `RV(K, K) = 1`.
pub fn rv_coefficient(kx: &StandardKernel, ky: &StandardKernel) -> Result<f64> {
    let cv = cv_coefficient(kx, ky)?;
    let nx = kx.as_matrix().norm_squared();
    let ny = ky.as_matrix().norm_squared();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroKernel);
    }
    Ok(cv / (nx * ny).sqrt())
}

/// RV coefficient in feature space, from weighted cross-covariances:
/// `Tr(S_XY S_YX) / sqrt(Tr(S_XX^2) Tr(S_YY^2))` with `S_XY = X_c^T Pi Y_c`.
pub fn rv_from_covariances(
    x: &nalgebra::DMatrix<f64>,
    y: &nalgebra::DMatrix<f64>,
    weights: &ObjectWeights,
) -> Result<f64> {
    let n = weights.len();
    if x.nrows() != n || y.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if x.nrows() != n { x.nrows() } else { y.nrows() },
        });
    }
    let f = weights.as_vector();
    let center = |m: &nalgebra::DMatrix<f64>| -> nalgebra::DMatrix<f64> {
        let means = m.transpose() * f;
        let mut out = m.clone();
        for i in 0..n {
            for (c, mu) in means.iter().enumerate() {
                out[(i, c)] -= mu;
            }
        }
        out
    };
    let xc = center(x);
    let yc = center(y);
    let weigh = |m: &nalgebra::DMatrix<f64>| -> nalgebra::DMatrix<f64> {
        let mut out = m.clone();
        for i in 0..n {
            for c in 0..out.ncols() {
                out[(i, c)] *= f[i];
            }
        }
        out
    };
    let sxx = xc.transpose() * weigh(&xc);
    let syy = yc.transpose() * weigh(&yc);
    let sxy = xc.transpose() * weigh(&yc);
    let denom_x = sxx.norm_squared();
    let denom_y = syy.norm_squared();
    if denom_x == 0.0 || denom_y == 0.0 {
        return Err(Error::ZeroKernel);
    }
    // Tr(S_XY S_YX) = ||S_XY||_F^2 since S_YX = S_XY^T.
    Ok(sxy.norm_squared() / (denom_x * denom_y).sqrt())
}

/// Exact null moments of `CV`: the expectation and the centered moments of
/// order 2, 3 and 4. A centered moment is present only when `n` is large
/// enough for its denominator factors `(n-2), (n-3), (n-4)` to be positive.
#[derive(Debug, Clone, Copy)]
pub struct CvMoments {
    pub n: usize,
    pub mean: f64,
    pub central2: Option<f64>,
    pub central3: Option<f64>,
    pub central4: Option<f64>,
}

/// Closed-form null moments of `CV` from the two nontrivial spectra.
pub fn cv_null_moments(sx: &NontrivialSpectrum, sy: &NontrivialSpectrum) -> Result<CvMoments> {
    if sx.n() != sy.n() {
        return Err(Error::DimensionMismatch {
            expected: sx.n(),
            found: sy.n(),
        });
    }
    let n = sx.n();
    let nf = n as f64;
    let d = nf - 1.0;

    let mean = d * sx.mean() * sy.mean();

    let central2 = (n >= 3).then(|| {
        let l2 = centered_spectral_moment(sx, 2).expect("order 2 in range");
        let m2 = centered_spectral_moment(sy, 2).expect("order 2 in range");
        2.0 * d * d / ((nf - 2.0) * (nf + 1.0)) * l2 * m2
    });

    let central3 = (n >= 4).then(|| {
        let l3 = centered_spectral_moment(sx, 3).expect("order 3 in range");
        let m3 = centered_spectral_moment(sy, 3).expect("order 3 in range");
        8.0 * d.powi(3) / ((nf - 3.0) * (nf - 2.0) * (nf + 1.0) * (nf + 3.0)) * l3 * m3
    });

    let central4 = (n >= 5).then(|| {
        let l2 = centered_spectral_moment(sx, 2).expect("order 2 in range");
        let m2 = centered_spectral_moment(sy, 2).expect("order 2 in range");
        let l4 = centered_spectral_moment(sx, 4).expect("order 4 in range");
        let m4 = centered_spectral_moment(sy, 4).expect("order 4 in range");
        let prefactor = 12.0 * d.powi(3)
            / ((nf - 4.0) * (nf - 3.0) * (nf - 2.0) * nf * (nf + 1.0) * (nf + 3.0) * (nf + 5.0));
        prefactor
            * (4.0 * (nf * nf - nf + 2.0) * l4 * m4
                + (nf.powi(4) + nf.powi(3) - 15.0 * nf * nf - 13.0 * nf + 98.0) * l2 * l2 * m2 * m2
                - 4.0 * (2.0 * nf * nf - nf - 7.0) * (l4 * m2 * m2 + l2 * l2 * m4))
    });

    Ok(CvMoments {
        n,
        mean,
        central2,
        central3,
        central4,
    })
}

/// Exact rational null moments of `CV` for rational spectra; the second path
/// of the dual-route check against the Weingarten assembly.
#[derive(Debug, Clone)]
pub struct RationalCvMoments {
    pub n: usize,
    pub mean: Rational,
    pub central2: Option<Rational>,
    pub central3: Option<Rational>,
    pub central4: Option<Rational>,
}

pub fn cv_null_moments_rational(
    lambdas: &[Rational],
    mus: &[Rational],
    n: usize,
) -> Result<RationalCvMoments> {
    if n < 2 || lambdas.len() != n - 1 || mus.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1),
            found: lambdas.len().min(mus.len()),
        });
    }
    let int = |v: i64| Rational::from_integer(BigInt::from(v));
    let nr = n as i64;
    let d = int(nr - 1);

    let mean_of = |values: &[Rational]| -> Rational {
        values.iter().fold(Rational::zero(), |a, v| a + v) / &d
    };
    let centered = |values: &[Rational], order: usize| -> Rational {
        let mean = mean_of(values);
        values
            .iter()
            .fold(Rational::zero(), |a, v| a + num::pow::pow(v - &mean, order))
            / &d
    };

    let mean = &d * mean_of(lambdas) * mean_of(mus);

    let central2 = (n >= 3).then(|| {
        int(2) * &d * &d / (int(nr - 2) * int(nr + 1)) * centered(lambdas, 2) * centered(mus, 2)
    });
    let central3 = (n >= 4).then(|| {
        int(8) * num::pow::pow(d.clone(), 3)
            / (int(nr - 3) * int(nr - 2) * int(nr + 1) * int(nr + 3))
            * centered(lambdas, 3)
            * centered(mus, 3)
    });
    let central4 = (n >= 5).then(|| {
        let l2 = centered(lambdas, 2);
        let m2 = centered(mus, 2);
        let l4 = centered(lambdas, 4);
        let m4 = centered(mus, 4);
        let prefactor = int(12) * num::pow::pow(d.clone(), 3)
            / (int(nr - 4)
                * int(nr - 3)
                * int(nr - 2)
                * int(nr)
                * int(nr + 1)
                * int(nr + 3)
                * int(nr + 5));
        prefactor
            * (int(4) * int(nr * nr - nr + 2) * &l4 * &m4
                + int(nr.pow(4) + nr.pow(3) - 15 * nr * nr - 13 * nr + 98) * &l2 * &l2 * &m2 * &m2
                - int(4) * int(2 * nr * nr - nr - 7) * (&l4 * &m2 * &m2 + &l2 * &l2 * &m4))
    });

    Ok(RationalCvMoments {
        n,
        mean,
        central2,
        central3,
        central4,
    })
}

/// Null cumulants of the RV coefficient. Skewness and excess kurtosis are
/// `None` when `n` is too small for their closed forms or when a spectrum is
/// flat (the RV distribution is then degenerate and they are undefined).
#[derive(Debug, Clone, Copy)]
pub struct RvCumulants {
    pub n: usize,
    pub mean: f64,
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Closed-form null cumulants of RV from the two nontrivial spectra.
pub fn rv_null_cumulants(sx: &NontrivialSpectrum, sy: &NontrivialSpectrum) -> Result<RvCumulants> {
    if sx.n() != sy.n() {
        return Err(Error::DimensionMismatch {
            expected: sx.n(),
            found: sy.n(),
        });
    }
    if sx.is_zero() || sy.is_zero() {
        return Err(Error::ZeroSpectrum);
    }
    let n = sx.n();
    let nf = n as f64;
    let d = nf - 1.0;
    let nu_x = effective_dimensionality(sx)?;
    let nu_y = effective_dimensionality(sy)?;

    let mean = (nu_x * nu_y).sqrt() / d;

    // nu <= n-1 mathematically; snap the rounding excess to zero so that
    // flat spectra give an exactly zero variance.
    let gap = |nu: f64| -> f64 {
        let g = d - nu;
        if g <= 1e-12 * d {
            0.0
        } else {
            g
        }
    };
    let variance =
        (n >= 3).then(|| 2.0 * gap(nu_x) * gap(nu_y) / ((nf - 2.0) * d * d * (nf + 1.0)));

    let skewness = match (spectral_skewness(sx).ok(), spectral_skewness(sy).ok()) {
        (Some(ax), Some(ay)) if n >= 4 => {
            Some((8.0 * (nf - 2.0) * (nf + 1.0)).sqrt() / ((nf - 3.0) * (nf + 3.0)) * ax * ay)
        }
        _ => None,
    };

    let moments = cv_null_moments(sx, sy)?;
    let excess_kurtosis = match (moments.central2, moments.central4) {
        (Some(c2), Some(c4)) if c2 > 0.0 => Some(c4 / (c2 * c2) - 3.0),
        _ => None,
    };

    Ok(RvCumulants {
        n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

/// Decision of the one-tailed corrected significance test.
#[derive(Debug, Clone, Copy)]
pub struct SignificanceReport {
    pub rv_observed: f64,
    pub z_score: f64,
    /// Cornish-Fisher-corrected quantile the z-score is compared against.
    pub corrected_threshold: f64,
    pub alpha: f64,
    pub significant: bool,
    /// First-order inverse Cornish-Fisher p-value; approximate by
    /// construction and reported for convenience only.
    pub p_approx: f64,
}

/// One-tailed test of the observed RV against the null cumulants: the
/// z-score must exceed the normal quantile `u_{1-alpha}` corrected by the
/// skewness and excess-kurtosis terms of the Cornish-Fisher expansion.
pub fn significance_test(
    rv_observed: f64,
    cumulants: &RvCumulants,
    alpha: f64,
) -> Result<SignificanceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let variance = cumulants.variance.ok_or(Error::SmallN {
        n: cumulants.n,
        min: 3,
        what: "null variance",
    })?;
    if variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let skew = cumulants.skewness.unwrap_or(0.0);
    let kurt = cumulants.excess_kurtosis.unwrap_or(0.0);

    let z = (rv_observed - cumulants.mean) / variance.sqrt();
    let u = normal::quantile(1.0 - alpha);
    let corrected_threshold = u + skew / 6.0 * (u * u - 1.0) + kurt / 24.0 * (u.powi(3) - 3.0 * u)
        - skew * skew / 36.0 * (2.0 * u.powi(3) - 5.0 * u);

    // First-order inversion: undo the correction at the observed z-score,
    // then read the normal tail.
    let u_star = z
        - (skew / 6.0 * (z * z - 1.0) + kurt / 24.0 * (z.powi(3) - 3.0 * z)
            - skew * skew / 36.0 * (2.0 * z.powi(3) - 5.0 * z));
    let p_approx = (1.0 - normal::cdf(u_star)).clamp(0.0, 1.0);

    Ok(SignificanceReport {
        rv_observed,
        z_score: z,
        corrected_threshold,
        alpha,
        significant: z > corrected_threshold,
        p_approx,
    })
}

/// Everything the end-to-end test produces.
#[derive(Debug, Clone)]
pub struct FullTestOutcome {
    pub rv: f64,
    pub cumulants: RvCumulants,
    pub report: SignificanceReport,
    pub spectrum_x: SpectralSummary,
    pub spectrum_y: SpectralSummary,
    pub warnings: Vec<String>,
}

/// End-to-end pipeline on two standard kernels sharing the same weights.
pub fn full_test_kernels(
    kx: &StandardKernel,
    ky: &StandardKernel,
    alpha: f64,
) -> Result<FullTestOutcome> {
    let n = kx.len();
    if n < 3 {
        return Err(Error::SmallN {
            n,
            min: 3,
            what: "full significance test",
        });
    }
    check_compatible(kx, ky)?;
    let rv = rv_coefficient(kx, ky)?;
    let sx = nontrivial_spectrum(kx)?;
    let sy = nontrivial_spectrum(ky)?;
    let cumulants = rv_null_cumulants(&sx, &sy)?;
    let report = significance_test(rv, &cumulants, alpha)?;
    let mut warnings = Vec::new();
    if n < 5 {
        warnings.push(format!(
            "n = {n}: skewness and kurtosis corrections are unavailable, \
             the threshold is the uncorrected normal quantile"
        ));
    }
    Ok(FullTestOutcome {
        rv,
        cumulants,
        report,
        spectrum_x: SpectralSummary::from_spectrum(&sx)?,
        spectrum_y: SpectralSummary::from_spectrum(&sy)?,
        warnings,
    })
}

/// End-to-end pipeline on two weighted configurations.
pub fn full_test(
    config_x: &WeightedConfiguration,
    config_y: &WeightedConfiguration,
    alpha: f64,
) -> Result<FullTestOutcome> {
    if !config_x.weights.approx_eq(&config_y.weights, WEIGHT_EQ_TOL) {
        return Err(Error::WeightMismatch);
    }
    let kx = build_kernel(config_x)?;
    let ky = build_kernel(config_y)?;
    full_test_kernels(&kx, &ky, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        dissimilarities_from_kernel, kernel_from_features, neutral_kernel, DissimilarityMatrix,
    };
    use crate::weingarten::cv_centered_moment_via_weingarten;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_weights(n: usize, rng: &mut ChaCha8Rng) -> ObjectWeights {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.1).collect();
        let sum: f64 = raw.iter().sum();
        ObjectWeights::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
    }

    fn random_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(n, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn cv_of_neutral_kernels_is_n_minus_one() {
        let w = ObjectWeights::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let k0 = neutral_kernel(&w);
        assert_relative_eq!(cv_coefficient(&k0, &k0).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn cv_with_zero_kernel_is_zero() {
        let w = ObjectWeights::uniform(4).unwrap();
        let k0 = neutral_kernel(&w);
        let zero = kernel_from_features(&DMatrix::from_element(4, 2, 1.0), &w).unwrap();
        assert_eq!(cv_coefficient(&k0, &zero).unwrap(), 0.0);
        assert!(matches!(rv_coefficient(&k0, &zero), Err(Error::ZeroKernel)));
    }

    #[test]
    fn cv_matches_eigenvector_overlap_route() {
        // Oracle: CV = sum_ab lambda_a mu_b P_ab with P from full eigenbases.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_weights(6, &mut rng);
        let kx = kernel_from_features(&random_matrix(6, 3, &mut rng), &w).unwrap();
        let ky = kernel_from_features(&random_matrix(6, 2, &mut rng), &w).unwrap();
        let ex = nalgebra::SymmetricEigen::new(kx.as_matrix().clone());
        let ey = nalgebra::SymmetricEigen::new(ky.as_matrix().clone());
        let mut oracle = 0.0;
        for a in 0..6 {
            for b in 0..6 {
                let overlap: f64 = ex.eigenvectors.column(a).dot(&ey.eigenvectors.column(b));
                oracle += ex.eigenvalues[a] * ey.eigenvalues[b] * overlap * overlap;
            }
        }
        assert_relative_eq!(
            cv_coefficient(&kx, &ky).unwrap(),
            oracle,
            max_relative = 1e-10
        );
    }

    #[test]
    fn rv_is_one_on_self_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_weights(7, &mut rng);
        let x = random_matrix(7, 3, &mut rng);
        let kx = kernel_from_features(&x, &w).unwrap();
        assert_relative_eq!(rv_coefficient(&kx, &kx).unwrap(), 1.0, epsilon = 1e-12);
        let scaled = kernel_from_features(&(&x * 2.5), &w).unwrap();
        let ky = kernel_from_features(&random_matrix(7, 2, &mut rng), &w).unwrap();
        assert_relative_eq!(
            rv_coefficient(&kx, &ky).unwrap(),
            rv_coefficient(&scaled, &ky).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rv_zero_on_orthogonal_supports() {
        let w = ObjectWeights::uniform(4).unwrap();
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 1.0, -1.0, -1.0]);
        let y = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let kx = kernel_from_features(&x, &w).unwrap();
        let ky = kernel_from_features(&y, &w).unwrap();
        assert!(rv_coefficient(&kx, &ky).unwrap().abs() < 1e-14);
    }

    #[test]
    fn rv_swap_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = random_weights(6, &mut rng);
        let kx = kernel_from_features(&random_matrix(6, 2, &mut rng), &w).unwrap();
        let ky = kernel_from_features(&random_matrix(6, 4, &mut rng), &w).unwrap();
        assert_relative_eq!(
            rv_coefficient(&kx, &ky).unwrap(),
            rv_coefficient(&ky, &kx).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn covariance_route_equals_kernel_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.gen_range(5..20);
            let p = rng.gen_range(1..5);
            let q = rng.gen_range(1..5);
            let w = random_weights(n, &mut rng);
            let x = random_matrix(n, p, &mut rng);
            let y = random_matrix(n, q, &mut rng);
            let kx = kernel_from_features(&x, &w).unwrap();
            let ky = kernel_from_features(&y, &w).unwrap();
            let via_kernel = rv_coefficient(&kx, &ky).unwrap();
            let via_cov = rv_from_covariances(&x, &y, &w).unwrap();
            assert_relative_eq!(via_kernel, via_cov, max_relative = 1e-10);
        }
    }

    #[test]
    fn covariance_route_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = random_weights(5, &mut rng);
        let x = random_matrix(5, 2, &mut rng);
        assert_relative_eq!(
            rv_from_covariances(&x, &x, &w).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let scaled = &x * -3.0;
        assert_relative_eq!(
            rv_from_covariances(&x, &scaled, &w).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let constant = DMatrix::from_element(5, 2, 4.0);
        assert!(rv_from_covariances(&x, &constant, &w).is_err());
    }

    #[test]
    fn cv_moments_flat_spectra() {
        let flat = NontrivialSpectrum::new(vec![1.0; 5], 6).unwrap();
        let m = cv_null_moments(&flat, &flat).unwrap();
        assert_relative_eq!(m.mean, 5.0, epsilon = 1e-12);
        assert_eq!(m.central2, Some(0.0));
        assert_eq!(m.central3, Some(0.0));
        assert_eq!(m.central4, Some(0.0));
    }

    #[test]
    fn cv_mean_is_product_of_means() {
        let sx = NontrivialSpectrum::new(vec![5.0, 3.0, 1.0, 1.0, 0.0], 6).unwrap();
        let sy = NontrivialSpectrum::new(vec![4.0, 2.0, 2.0, 1.0, 1.0], 6).unwrap();
        let m = cv_null_moments(&sx, &sy).unwrap();
        assert_relative_eq!(m.mean, 5.0 * 2.0 * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cv_moments_gate_on_n() {
        let sx = NontrivialSpectrum::new(vec![2.0, 1.0, 0.5], 4).unwrap();
        let m = cv_null_moments(&sx, &sx).unwrap();
        assert!(m.central2.is_some());
        assert!(m.central3.is_some());
        assert!(m.central4.is_none());
        let sx = NontrivialSpectrum::new(vec![2.0, 1.0], 3).unwrap();
        let m = cv_null_moments(&sx, &sx).unwrap();
        assert!(m.central2.is_some());
        assert!(m.central3.is_none());
    }

    #[test]
    fn cv_moments_match_weingarten_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [6usize, 9] {
            let lambdas: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>() * 4.0).collect();
            let mus: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>() * 4.0).collect();
            let sx = NontrivialSpectrum::new(lambdas, n).unwrap();
            let sy = NontrivialSpectrum::new(mus, n).unwrap();
            let closed = cv_null_moments(&sx, &sy).unwrap();
            for (q, expected) in [
                (2, closed.central2.unwrap()),
                (3, closed.central3.unwrap()),
                (4, closed.central4.unwrap()),
            ] {
                let assembled = cv_centered_moment_via_weingarten(q, &sx, &sy).unwrap();
                assert_relative_eq!(assembled, expected, max_relative = 1e-9, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn rv_cumulants_univariate_fixed_point() {
        // Single nonzero eigenvalue on both sides, n = 5: mean = 1/4 and
        // variance = 2*3*3/(3*16*6) = 1/16.
        let s = NontrivialSpectrum::new(vec![2.0, 0.0, 0.0, 0.0], 5).unwrap();
        let c = rv_null_cumulants(&s, &s).unwrap();
        assert_relative_eq!(c.mean, 0.25, epsilon = 1e-12);
        assert_relative_eq!(c.variance.unwrap(), 1.0 / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn rv_cumulants_flat_spectrum_degenerate() {
        let flat = NontrivialSpectrum::new(vec![2.0; 5], 6).unwrap();
        let other = NontrivialSpectrum::new(vec![4.0, 1.0, 0.5, 0.25, 0.0], 6).unwrap();
        let c = rv_null_cumulants(&flat, &other).unwrap();
        assert_eq!(c.variance, Some(0.0));
        let nu_y = effective_dimensionality(&other).unwrap();
        assert_relative_eq!(c.mean, (nu_y / 5.0).sqrt(), epsilon = 1e-12);
        assert!(c.skewness.is_none());
        assert!(c.excess_kurtosis.is_none());
    }

    #[test]
    fn rv_cumulants_positive_skewness() {
        let sx = NontrivialSpectrum::new(vec![5.0, 2.0, 1.0, 0.5, 0.25], 6).unwrap();
        let sy = NontrivialSpectrum::new(vec![7.0, 2.0, 1.0, 1.0, 0.5], 6).unwrap();
        let c = rv_null_cumulants(&sx, &sy).unwrap();
        assert!(c.skewness.unwrap() > 0.0);
    }

    #[test]
    fn rv_mean_reproduces_trace_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let w = random_weights(8, &mut rng);
        let kx = kernel_from_features(&random_matrix(8, 3, &mut rng), &w).unwrap();
        let ky = kernel_from_features(&random_matrix(8, 2, &mut rng), &w).unwrap();
        let sx = nontrivial_spectrum(&kx).unwrap();
        let sy = nontrivial_spectrum(&ky).unwrap();
        let c = rv_null_cumulants(&sx, &sy).unwrap();
        let trace_form = kx.as_matrix().trace() * ky.as_matrix().trace()
            / (7.0 * (kx.as_matrix().norm_squared() * ky.as_matrix().norm_squared()).sqrt());
        assert_relative_eq!(c.mean, trace_form, max_relative = 1e-12);
    }

    #[test]
    fn cumulants_scale_invariance_and_symmetry() {
        let sx = NontrivialSpectrum::new(vec![5.0, 2.0, 1.0, 0.5, 0.25], 6).unwrap();
        let sy = NontrivialSpectrum::new(vec![7.0, 2.0, 1.0, 1.0, 0.5], 6).unwrap();
        let sx_scaled =
            NontrivialSpectrum::new(sx.lambdas().iter().map(|l| l * 3.5).collect(), 6).unwrap();
        let a = rv_null_cumulants(&sx, &sy).unwrap();
        let b = rv_null_cumulants(&sx_scaled, &sy).unwrap();
        let c = rv_null_cumulants(&sy, &sx).unwrap();
        assert_relative_eq!(a.mean, b.mean, max_relative = 1e-12);
        assert_relative_eq!(
            a.variance.unwrap(),
            b.variance.unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            a.skewness.unwrap(),
            b.skewness.unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(a.mean, c.mean, max_relative = 1e-12);
        assert_relative_eq!(
            a.excess_kurtosis.unwrap(),
            c.excess_kurtosis.unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn significance_normal_case_threshold() {
        let cumulants = RvCumulants {
            n: 30,
            mean: 0.2,
            variance: Some(0.01),
            skewness: Some(0.0),
            excess_kurtosis: Some(0.0),
        };
        let report = significance_test(0.5, &cumulants, 0.05).unwrap();
        assert_relative_eq!(
            report.corrected_threshold,
            1.6448536269514722,
            epsilon = 1e-6
        );
        assert_relative_eq!(report.z_score, 3.0, epsilon = 1e-12);
        assert!(report.significant);
        assert!(report.p_approx < 0.05);
    }

    #[test]
    fn significance_skewness_raises_threshold() {
        let base = RvCumulants {
            n: 30,
            mean: 0.2,
            variance: Some(0.01),
            skewness: Some(0.0),
            excess_kurtosis: Some(0.0),
        };
        let skewed = RvCumulants {
            skewness: Some(0.4),
            ..base
        };
        let t0 = significance_test(0.3, &base, 0.05)
            .unwrap()
            .corrected_threshold;
        let t1 = significance_test(0.3, &skewed, 0.05)
            .unwrap()
            .corrected_threshold;
        assert!(t1 > t0);
    }

    #[test]
    fn significance_corrected_threshold_fixed_value() {
        // alpha = 0.05, skewness 0.6, excess kurtosis 0.5; reference value
        // computed with 30-digit arithmetic.
        let cumulants = RvCumulants {
            n: 30,
            mean: 0.0,
            variance: Some(1.0),
            skewness: Some(0.6),
            excess_kurtosis: Some(0.5),
        };
        let report = significance_test(0.0, &cumulants, 0.05).unwrap();
        assert_relative_eq!(report.corrected_threshold, 1.79855582116024, epsilon = 1e-9);
        // Independent re-evaluation of the same expression.
        let u = normal::quantile(0.95);
        let oracle = u + 0.6 / 6.0 * (u * u - 1.0) + 0.5 / 24.0 * (u.powi(3) - 3.0 * u)
            - 0.36 / 36.0 * (2.0 * u.powi(3) - 5.0 * u);
        assert_relative_eq!(report.corrected_threshold, oracle, epsilon = 1e-12);
    }

    #[test]
    fn significance_rejects_bad_alpha_and_zero_variance() {
        let cumulants = RvCumulants {
            n: 10,
            mean: 0.5,
            variance: Some(0.0),
            skewness: None,
            excess_kurtosis: None,
        };
        assert!(matches!(
            significance_test(0.7, &cumulants, 0.05),
            Err(Error::ZeroVariance)
        ));
        let ok = RvCumulants {
            variance: Some(0.1),
            ..cumulants
        };
        assert!(significance_test(0.7, &ok, 0.0).is_err());
        assert!(significance_test(0.7, &ok, 1.0).is_err());
    }

    #[test]
    fn full_test_identical_configurations() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let w = random_weights(10, &mut rng);
        let x = random_matrix(10, 3, &mut rng);
        let k = kernel_from_features(&x, &w).unwrap();
        let d = dissimilarities_from_kernel(&k);
        let config = WeightedConfiguration::new(w, d).unwrap();
        let outcome = full_test(&config, &config, 0.05).unwrap();
        assert_relative_eq!(outcome.rv, 1.0, epsilon = 1e-10);
        assert!(outcome.report.significant);
        assert!(outcome.warnings.is_empty());
    }

    #[test]
    fn full_test_neutral_configuration_degenerates() {
        let w = ObjectWeights::uniform(6).unwrap();
        let d0 = DissimilarityMatrix::discrete(&w);
        let config_x = WeightedConfiguration::new(w.clone(), d0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let y = random_matrix(6, 2, &mut rng);
        let ky = kernel_from_features(&y, &w).unwrap();
        let config_y = WeightedConfiguration::new(w, dissimilarities_from_kernel(&ky)).unwrap();
        assert!(matches!(
            full_test(&config_x, &config_y, 0.05),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn full_test_small_n_degrades_gracefully() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let w = ObjectWeights::uniform(4).unwrap();
        let x = random_matrix(4, 2, &mut rng);
        let y = random_matrix(4, 2, &mut rng);
        let cx =
            WeightedConfiguration::new(w.clone(), DissimilarityMatrix::from_points(&x)).unwrap();
        let cy = WeightedConfiguration::new(w, DissimilarityMatrix::from_points(&y)).unwrap();
        let outcome = full_test(&cx, &cy, 0.05).unwrap();
        assert!(outcome.cumulants.excess_kurtosis.is_none());
        assert!(!outcome.warnings.is_empty());
    }
}
