//! Monte Carlo verification engine: Haar sampling on the orthogonal group,
//! rotated cross-inertia moments, empirical overlap matrices, empirical
//! orthogonal coefficients and a permutation-null baseline.
//!
//! All randomized estimators draw through `ChaCha8` streams split by chunk
//! index: chunk `c` of a run seeded with `s` uses the generator
//! `ChaCha8Rng::seed_from_u64(s)` on stream `c`, chunks are 10^4 draws and
//! are combined in chunk order with compensated summation, so a run is
//! bit-reproducible for a fixed `(seed, samples)` regardless of threading.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{nontrivial_eigenpairs, StandardKernel};

/// Draws per deterministic chunk; part of the reproducibility contract.
const CHUNK_SIZE: u64 = 10_000;

/// Element of the orthogonal group, `||T^T T - I||_max <= 1e-10`.
#[derive(Debug, Clone)]
pub struct OrthogonalMatrix {
    t: DMatrix<f64>,
}

impl OrthogonalMatrix {
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::InvalidArgument(format!(
                "orthogonal matrix must be square, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        let gram = t.transpose() * &t;
        let defect = (&gram - DMatrix::identity(t.nrows(), t.ncols())).amax();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthogonal: ||T^T T - I||_max = {defect:.3e}"
            )));
        }
        Ok(Self { t })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            t: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.t
    }
}

/// Haar-distributed orthogonal matrix: QR factorization of a Gaussian
/// matrix, each column of Q flipped to the sign of the matching diagonal
/// entry of R (zero counts as positive).
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> OrthogonalMatrix {
    assert!(d >= 1, "dimension must be positive");
    let gaussian = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    OrthogonalMatrix { t: q }
}

/// Nontrivial eigenbases of two standard kernels on the same weights,
/// together with their spectra and the cross-overlap matrix `U^T V`.
#[derive(Debug, Clone)]
pub struct EigenbasisPair {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    lambdas: Vec<f64>,
    mus: Vec<f64>,
    cross: DMatrix<f64>,
    n: usize,
}

impl EigenbasisPair {
    pub fn from_kernels(kx: &StandardKernel, ky: &StandardKernel) -> Result<Self> {
        if kx.len() != ky.len() {
            return Err(Error::DimensionMismatch {
                expected: kx.len(),
                found: ky.len(),
            });
        }
        if !kx.weights().approx_eq(ky.weights(), 1e-12) {
            return Err(Error::WeightMismatch);
        }
        let n = kx.len();
        let (u, lambdas) = nontrivial_eigenpairs(kx)?;
        let (v, mus) = nontrivial_eigenpairs(ky)?;
        let sf = kx.weights().sqrt_vector();
        let d = n - 1;
        let residual_u = (u.transpose() * sf).amax();
        let residual_v = (v.transpose() * sf).amax();
        if residual_u > 1e-10 || residual_v > 1e-10 {
            return Err(Error::NotStandardKernel(format!(
                "eigenbasis not orthogonal to sqrt(f): residuals {residual_u:.3e}, {residual_v:.3e}"
            )));
        }
        let cross = u.transpose() * &v;
        // Joint orthogonality: V^T U U^T V = I on the nontrivial eigenspace.
        let joint = cross.transpose() * &cross;
        let defect = (&joint - DMatrix::identity(d, d)).amax();
        if defect > 1e-9 {
            return Err(Error::NotStandardKernel(format!(
                "joint orthogonality defect {defect:.3e}"
            )));
        }
        Ok(Self {
            u,
            v,
            lambdas,
            mus,
            cross,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the nontrivial eigenspace, `n - 1`.
    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn basis_x(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn basis_y(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// The overlap matrix `U^T V`.
    pub fn cross_overlap(&self) -> &DMatrix<f64> {
        &self.cross
    }
}

/// Cross inertia after rotating the first configuration by `T`:
/// `CV(T) = sum_ab lambda_a mu_b ((T^T U^T V)_ab)^2`; at `T = I` this is
/// `Tr(K_X K_Y)`.
pub fn rotated_cv(basis: &EigenbasisPair, t: &OrthogonalMatrix) -> f64 {
    let c = t.as_matrix().transpose() * &basis.cross;
    let d = basis.dim();
    let mut acc = 0.0;
    for a in 0..d {
        for b in 0..d {
            let overlap = c[(a, b)];
            acc += basis.lambdas[a] * basis.mus[b] * overlap * overlap;
        }
    }
    acc
}

/// Squared-overlap matrix `P(T)`: nonnegative and doubly stochastic.
pub fn empirical_p_matrix(basis: &EigenbasisPair, t: &OrthogonalMatrix) -> DMatrix<f64> {
    let c = t.as_matrix().transpose() * &basis.cross;
    c.map(|v| v * v)
}

/// One Monte Carlo estimate: point value, standard error, and the sampling
/// contract that reproduces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Estimates of the mean and the centered moments of order 2..4.
#[derive(Debug, Clone, Copy)]
pub struct CvMomentEstimates {
    pub mean: MonteCarloEstimate,
    pub central2: MonteCarloEstimate,
    pub central3: MonteCarloEstimate,
    pub central4: MonteCarloEstimate,
}

/// Neumaier compensated summation.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let t = sum + v;
        compensation += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + compensation
}

/// Draws `samples` values through deterministic per-chunk generators and
/// returns them in chunk order.
fn chunked_draws<F>(samples: u64, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            (0..count).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Sample central moments up to order 8 around the compensated mean.
fn central_moments(values: &[f64]) -> (f64, [f64; 9]) {
    let count = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / count;
    let mut moments = [0.0; 9];
    for (order, slot) in moments.iter_mut().enumerate().skip(2) {
        *slot = compensated_sum(values.iter().map(|v| (v - mean).powi(order as i32))) / count;
    }
    (mean, moments)
}

/// First-order (delta method) standard errors of the sample mean and the
/// sample central moments of order 2..4, from central moments up to 8.
fn moment_standard_errors(moments: &[f64; 9], count: f64) -> [f64; 5] {
    let m = moments;
    let var_mean = m[2];
    let var_m2 = m[4] - m[2] * m[2];
    let var_m3 = m[6] - m[3] * m[3] - 6.0 * m[2] * m[4] + 9.0 * m[2].powi(3);
    let var_m4 = m[8] - m[4] * m[4] - 8.0 * m[3] * m[5] + 16.0 * m[2] * m[3] * m[3];
    let se = |v: f64| (v.max(0.0) / count).sqrt();
    [0.0, se(var_mean), se(var_m2), se(var_m3), se(var_m4)]
}

/// Monte Carlo estimates of the null moments of `CV` by Haar sampling the
/// relative orientation of the two eigenbases.
pub fn monte_carlo_cv_moments(
    basis: &EigenbasisPair,
    samples: u64,
    seed: u64,
) -> Result<CvMomentEstimates> {
    if samples < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let d = basis.dim();
    let values = chunked_draws(samples, seed, |rng| {
        let t = sample_haar_orthogonal(d, rng);
        rotated_cv(basis, &t)
    });
    let (mean, moments) = central_moments(&values);
    let se = moment_standard_errors(&moments, values.len() as f64);
    let estimate = |value: f64, std_error: f64| MonteCarloEstimate {
        value,
        std_error,
        samples,
        seed,
    };
    Ok(CvMomentEstimates {
        mean: estimate(mean, se[1]),
        central2: estimate(moments[2], se[2]),
        central3: estimate(moments[3], se[3]),
        central4: estimate(moments[4], se[4]),
    })
}

/// Monte Carlo estimate of an orthogonal coefficient: the sample mean of
/// the monomial `prod_k t[sub_k, sup_k]` over Haar draws in dimension `d`.
pub fn monte_carlo_orthogonal_coefficient(
    sub: &[usize],
    sup: &[usize],
    d: usize,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if sub.len() != sup.len() {
        return Err(Error::DimensionMismatch {
            expected: sub.len(),
            found: sup.len(),
        });
    }
    if sub.is_empty() || sub.len() > 8 {
        return Err(Error::InvalidArgument(format!(
            "multi-index length must be in [1, 8], got {}",
            sub.len()
        )));
    }
    if let Some(bad) = sub.iter().chain(sup).find(|v| **v >= d) {
        return Err(Error::InvalidArgument(format!(
            "index value {bad} out of range for dimension {d}"
        )));
    }
    if samples < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let values = chunked_draws(samples, seed, |rng| {
        let t = sample_haar_orthogonal(d, rng);
        sub.iter()
            .zip(sup)
            .map(|(&a, &w)| t.as_matrix()[(a, w)])
            .product()
    });
    let (mean, moments) = central_moments(&values);
    Ok(MonteCarloEstimate {
        value: mean,
        std_error: (moments[2] / values.len() as f64).sqrt(),
        samples,
        seed,
    })
}

/// Empirical permutation-null moments of RV, for comparison with the
/// orthogonal-integration null.
#[derive(Debug, Clone, Copy)]
pub struct PermutationBaseline {
    pub mean: MonteCarloEstimate,
    pub variance: MonteCarloEstimate,
    /// Permutations ignore the object weights; with nonuniform weights the
    /// permuted matrix is no longer a standard kernel for `f` and the
    /// exchangeability assumption behind this baseline breaks down.
    pub weights_uniform: bool,
}

/// Distribution of `RV(K_X, P K_Y P^T)` over uniformly random object
/// permutations `P`.
pub fn permutation_null_baseline(
    kx: &StandardKernel,
    ky: &StandardKernel,
    permutations: u64,
    seed: u64,
) -> Result<PermutationBaseline> {
    if kx.len() != ky.len() {
        return Err(Error::DimensionMismatch {
            expected: kx.len(),
            found: ky.len(),
        });
    }
    if permutations < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 permutations, got {permutations}"
        )));
    }
    let n = kx.len();
    let denom = (kx.as_matrix().norm_squared() * ky.as_matrix().norm_squared()).sqrt();
    if denom == 0.0 {
        return Err(Error::ZeroKernel);
    }
    let a = kx.as_matrix().clone();
    let b = ky.as_matrix().clone();
    let values = chunked_draws(permutations, seed, |rng| {
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates.
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let mut cv = 0.0;
        for i in 0..n {
            for j in 0..n {
                cv += a[(i, j)] * b[(perm[i], perm[j])];
            }
        }
        cv / denom
    });
    let (mean, moments) = central_moments(&values);
    let se = moment_standard_errors(&moments, values.len() as f64);
    let f = kx.weights().as_vector();
    let weights_uniform = f.iter().all(|w| (w - 1.0 / n as f64).abs() <= 1e-12);
    Ok(PermutationBaseline {
        mean: MonteCarloEstimate {
            value: mean,
            std_error: se[1],
            samples: permutations,
            seed,
        },
        variance: MonteCarloEstimate {
            value: moments[2],
            std_error: se[2],
            samples: permutations,
            seed,
        },
        weights_uniform,
    })
}
