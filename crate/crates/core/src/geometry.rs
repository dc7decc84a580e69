//! Weighted configurations, standard kernels and weighted multidimensional
//! scaling.
//!
//! A weighted configuration is a pair `(f, D)` of positive object weights
//! summing to one and squared-Euclidean dissimilarities. Its standard kernel
//! is the matrix of weighted centered scalar products
//! `K = sqrt(Pi) * (-1/2 H D H^T) * sqrt(Pi)` with `H = I - 1 f^T` and
//! `Pi = diag(f)`. Standard kernels are symmetric, positive semi-definite and
//! annihilate `sqrt(f)`; the correspondence `(f, D) <-> K` is bijective and
//! both directions are implemented here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative PSD tolerance: eigensolver noise scale for double precision.
pub const PSD_TOL: f64 = 1e-8;

/// Tolerance on `|sum(f) - 1|` below which weights are silently renormalized.
const WEIGHT_SUM_TOL: f64 = 1e-6;

/// Positive object weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectWeights {
    f: DVector<f64>,
    sqrt_f: DVector<f64>,
}

impl ObjectWeights {
    /// Validates and normalizes a weight vector. Sums within `1e-6` of one
    /// are renormalized; larger deviations are rejected as user mistakes.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least 2 objects, got {n}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| **w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!(
                "weights must be positive and finite, got {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let f = DVector::from_iterator(n, weights.iter().map(|w| w / sum));
        let sqrt_f = f.map(f64::sqrt);
        Ok(Self { f, sqrt_f })
    }

    /// Uniform weights `f_i = 1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.f
    }

    /// Componentwise square roots of the weights (the trivial eigenvector).
    pub fn sqrt_vector(&self) -> &DVector<f64> {
        &self.sqrt_f
    }

    /// Whether two weight vectors agree within `tol` componentwise.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .f
                .iter()
                .zip(other.f.iter())
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Symmetric, hollow, nonnegative matrix of squared dissimilarities.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    d: DMatrix<f64>,
}

impl DissimilarityMatrix {
    pub fn new(d: DMatrix<f64>) -> Result<Self> {
        if !d.is_square() {
            return Err(Error::InvalidDissimilarity(format!(
                "matrix is {}x{}, expected square",
                d.nrows(),
                d.ncols()
            )));
        }
        let n = d.nrows();
        let scale = d.amax().max(1.0);
        for i in 0..n {
            if d[(i, i)].abs() > 1e-10 * scale {
                return Err(Error::InvalidDissimilarity(format!(
                    "diagonal entry ({i},{i}) = {} is not zero",
                    d[(i, i)]
                )));
            }
            for j in 0..i {
                if (d[(i, j)] - d[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::InvalidDissimilarity(format!(
                        "asymmetric at ({i},{j}): {} vs {}",
                        d[(i, j)],
                        d[(j, i)]
                    )));
                }
                if d[(i, j)] < -1e-12 * scale {
                    return Err(Error::InvalidDissimilarity(format!(
                        "negative entry at ({i},{j}): {}",
                        d[(i, j)]
                    )));
                }
            }
        }
        // Normalize away the representation noise tolerated above.
        let mut clean = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let v = (0.5 * (d[(i, j)] + d[(j, i)])).max(0.0);
                clean[(i, j)] = v;
                clean[(j, i)] = v;
            }
        }
        Ok(Self { d: clean })
    }

    /// Squared Euclidean distances of a point cloud (one row per object).
    pub fn from_points(points: &DMatrix<f64>) -> Self {
        let n = points.nrows();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let diff = points.row(i) - points.row(j);
                let v = diff.norm_squared();
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        Self { d }
    }

    /// Weighted discrete distances `D0_ij = 1/f_i + 1/f_j` off the diagonal.
    pub fn discrete(weights: &ObjectWeights) -> Self {
        let f = weights.as_vector();
        let n = f.len();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[(i, j)] = 1.0 / f[i] + 1.0 / f[j];
                }
            }
        }
        Self { d }
    }

    pub fn len(&self) -> usize {
        self.d.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.d.nrows() == 0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.d
    }
}

/// Object weights together with their pairwise squared dissimilarities.
#[derive(Debug, Clone)]
pub struct WeightedConfiguration {
    pub weights: ObjectWeights,
    pub dissimilarities: DissimilarityMatrix,
}

impl WeightedConfiguration {
    pub fn new(weights: ObjectWeights, dissimilarities: DissimilarityMatrix) -> Result<Self> {
        if weights.len() != dissimilarities.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: dissimilarities.len(),
            });
        }
        Ok(Self {
            weights,
            dissimilarities,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Symmetric PSD matrix of weighted centered scalar products with
/// `K sqrt(f) = 0`.
#[derive(Debug, Clone)]
pub struct StandardKernel {
    k: DMatrix<f64>,
    weights: ObjectWeights,
}

impl StandardKernel {
    /// Wraps a matrix after checking symmetry and `K sqrt(f) = 0`.
    /// Positive semi-definiteness is checked where eigenvalues are needed
    /// (see [`is_squared_euclidean`] and the spectral routines).
    pub fn new(k: DMatrix<f64>, weights: ObjectWeights) -> Result<Self> {
        if k.nrows() != weights.len() || !k.is_square() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: k.nrows(),
            });
        }
        let scale = k.amax().max(f64::MIN_POSITIVE);
        for i in 0..k.nrows() {
            for j in 0..i {
                if (k[(i, j)] - k[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::NotStandardKernel(format!(
                        "asymmetric at ({i},{j}): {} vs {}",
                        k[(i, j)],
                        k[(j, i)]
                    )));
                }
            }
        }
        let sym = 0.5 * (&k + k.transpose());
        let residual = (&sym * weights.sqrt_vector()).norm();
        if residual > 1e-10 * sym.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NotStandardKernel(format!(
                "K sqrt(f) has norm {residual:.3e}, expected 0"
            )));
        }
        Ok(Self { k: sym, weights })
    }

    pub fn len(&self) -> usize {
        self.k.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.k.nrows() == 0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn weights(&self) -> &ObjectWeights {
        &self.weights
    }
}

/// Factorial coordinates from weighted MDS: `n x (n-1)`, columns ordered by
/// decreasing eigenvalue, weighted column means zero.
#[derive(Debug, Clone)]
pub struct FactorialCoordinates {
    coords: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl FactorialCoordinates {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.coords
    }

    /// Eigenvalues matching the columns, decreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Squared distances reconstructed from the coordinates.
    pub fn reconstruct_dissimilarities(&self) -> DissimilarityMatrix {
        DissimilarityMatrix::from_points(&self.coords)
    }
}

/// Builds the standard kernel of a weighted configuration by weighted double
/// centering: `K = sqrt(Pi) (-1/2 H D H^T) sqrt(Pi)` with `H = I - 1 f^T`.
pub fn build_kernel(config: &WeightedConfiguration) -> Result<StandardKernel> {
    let f = config.weights.as_vector();
    let sf = config.weights.sqrt_vector();
    let d = config.dissimilarities.as_matrix();
    let n = config.len();

    // B = -1/2 H D H^T expanded entrywise: B_ij = -1/2 (D_ij - r_i - r_j + s)
    // with r_i = sum_k f_k D_ik and s = sum_kl f_k f_l D_kl.
    let r = d * f;
    let s = f.dot(&r);
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let b = -0.5 * (d[(i, j)] - r[i] - r[j] + s);
            let v = sf[i] * sf[j] * b;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    StandardKernel::new(k, config.weights.clone())
}

/// Standard kernel of multivariate features (one row per object):
/// `K = sqrt(Pi) X_c X_c^T sqrt(Pi)` with `X_c = H X`.
pub fn kernel_from_features(
    features: &DMatrix<f64>,
    weights: &ObjectWeights,
) -> Result<StandardKernel> {
    let n = weights.len();
    if features.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: features.nrows(),
        });
    }
    let f = weights.as_vector();
    let sf = weights.sqrt_vector();
    // Weighted column means, subtracted from every row.
    let means = features.transpose() * f;
    let mut centered = features.clone();
    for i in 0..n {
        for (c, m) in means.iter().enumerate() {
            centered[(i, c)] -= m;
        }
    }
    let mut k = &centered * centered.transpose();
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] *= sf[i] * sf[j];
        }
    }
    StandardKernel::new(k, weights.clone())
}

/// Recovers the unique dissimilarities of a standard kernel:
/// `B = Pi^{-1/2} K Pi^{-1/2}`, `D_ij = B_ii + B_jj - 2 B_ij`.
pub fn dissimilarities_from_kernel(kernel: &StandardKernel) -> DissimilarityMatrix {
    let k = kernel.as_matrix();
    let sf = kernel.weights().sqrt_vector();
    let n = kernel.len();
    let b = |i: usize, j: usize| k[(i, j)] / (sf[i] * sf[j]);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = (b(i, i) + b(j, j) - 2.0 * b(i, j)).max(0.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DissimilarityMatrix { d }
}

/// The neutral kernel `K0 = I - sqrt(f) sqrt(f)^T`, identity element on
/// standard kernels sharing the same weights.
pub fn neutral_kernel(weights: &ObjectWeights) -> StandardKernel {
    let sf = weights.sqrt_vector();
    let n = weights.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - sf[i] * sf[j]
    });
    StandardKernel {
        k,
        weights: weights.clone(),
    }
}

/// Total inertia `Delta = Tr(K) = 1/2 sum_ij f_i f_j D_ij`.
pub fn inertia(kernel: &StandardKernel) -> f64 {
    kernel.as_matrix().trace()
}

/// Outcome of the squared-Euclidean test of a dissimilarity matrix.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanCheck {
    pub is_euclidean: bool,
    /// Most negative eigenvalue of the built kernel (diagnostic).
    pub min_eigenvalue: f64,
}

/// Tests whether `D` is squared Euclidean for the given weights by checking
/// positive semi-definiteness of the built kernel:
/// `lambda_min(K) >= -tol * max(1, lambda_max(K))`.
pub fn is_squared_euclidean(
    d: &DissimilarityMatrix,
    weights: &ObjectWeights,
    tol: f64,
) -> Result<EuclideanCheck> {
    let config = WeightedConfiguration::new(weights.clone(), d.clone())?;
    let kernel = build_kernel(&config)?;
    let eig = nalgebra::SymmetricEigen::new(kernel.k);
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    Ok(EuclideanCheck {
        is_euclidean: min >= -tol * max.max(1.0),
        min_eigenvalue: min,
    })
}

/// Spectral decomposition of a standard kernel with the trivial eigenpair
/// identified and removed.
///
/// Returns the `n x (n-1)` matrix of nontrivial eigenvectors (columns sorted
/// by decreasing eigenvalue) and the matching eigenvalues. Eigenvalues in
/// `[-tol*scale, 0)` are clipped to zero; more negative ones are an error, as
/// is a trivial eigenvalue exceeding the tolerance.
///
/// The trivial direction is `sqrt(f)` itself. When the kernel is rank
/// deficient the eigensolver returns an arbitrary basis of the null space in
/// which `sqrt(f)` is spread over several vectors, so the null eigenspace is
/// rotated (one Householder reflection) until one basis vector aligns with
/// `sqrt(f)` exactly; that vector is discarded and the rest stay orthogonal
/// to it.
pub(crate) fn nontrivial_eigenpairs(kernel: &StandardKernel) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = kernel.len();
    let sf = kernel.weights().sqrt_vector();
    let eig = nalgebra::SymmetricEigen::new(kernel.k.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    let tol = PSD_TOL * scale;

    // Rayleigh quotient of sqrt(f): the eigenvalue of the trivial direction.
    let rayleigh = sf.dot(&(&kernel.k * sf));
    if rayleigh.abs() > tol {
        return Err(Error::NotStandardKernel(format!(
            "trivial eigenvalue {rayleigh} exceeds tolerance {tol:.3e}"
        )));
    }

    let mut null_idx = Vec::new();
    let mut positive_idx = Vec::new();
    for j in 0..n {
        let lambda = eig.eigenvalues[j];
        if lambda < -tol {
            return Err(Error::NotEuclidean {
                min_eigenvalue: eig.eigenvalues.min(),
            });
        }
        if lambda.abs() <= tol {
            null_idx.push(j);
        } else {
            positive_idx.push(j);
        }
    }
    positive_idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });

    // Overlap of sqrt(f) with the numerically-null eigenspace; must be all
    // of it for a standard kernel.
    let k = null_idx.len();
    let mut overlap = DVector::zeros(k);
    for (c, &j) in null_idx.iter().enumerate() {
        overlap[c] = eig.eigenvectors.column(j).dot(sf);
    }
    let norm = overlap.norm();
    if norm < 0.5 {
        return Err(Error::NotStandardKernel(format!(
            "sqrt(f) has overlap {norm:.3} with the null eigenspace, expected 1"
        )));
    }
    overlap /= norm;

    // Householder vector sending the overlap direction to -sign(g0) e_0.
    let sign = if overlap[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut reflector = overlap;
    reflector[0] += sign;
    let denom = reflector.norm_squared();

    let mut values = Vec::with_capacity(n - 1);
    let mut vectors = DMatrix::zeros(n, n - 1);
    let mut col = 0;
    for &j in &positive_idx {
        values.push(eig.eigenvalues[j]);
        vectors.set_column(col, &eig.eigenvectors.column(j));
        col += 1;
    }
    // Rotated null basis, skipping the column aligned with sqrt(f).
    for c in 1..k {
        let mut rotated = DVector::zeros(n);
        for (r, &j) in null_idx.iter().enumerate() {
            let identity = if r == c { 1.0 } else { 0.0 };
            let coeff = identity - 2.0 * reflector[r] * reflector[c] / denom;
            rotated += coeff * eig.eigenvectors.column(j);
        }
        values.push(0.0);
        vectors.set_column(col, &rotated);
        col += 1;
    }
    debug_assert_eq!(col, n - 1);
    Ok((vectors, values))
}

/// Weighted multidimensional scaling: factorial coordinates
/// `X = Pi^{-1/2} U Lambda^{1/2}` reproducing the dissimilarities.
pub fn weighted_mds(config: &WeightedConfiguration) -> Result<FactorialCoordinates> {
    let kernel = build_kernel(config)?;
    let sf = config.weights.sqrt_vector();
    let (vectors, values) = nontrivial_eigenpairs(&kernel)?;
    let n = config.len();
    let mut coords = DMatrix::zeros(n, n - 1);
    for (col, lambda) in values.iter().enumerate() {
        let root = lambda.sqrt();
        for i in 0..n {
            coords[(i, col)] = vectors[(i, col)] * root / sf[i];
        }
    }
    Ok(FactorialCoordinates {
        coords,
        eigenvalues: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    fn random_weights(n: usize, seed: u64) -> ObjectWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.1).collect();
        let sum: f64 = raw.iter().sum();
        ObjectWeights::new(raw.into_iter().map(|w| w / sum).collect()).unwrap()
    }

    #[test]
    fn weights_renormalize_small_deviation() {
        let w = ObjectWeights::new(vec![0.5000001, 0.5]).unwrap();
        assert_relative_eq!(w.as_vector().sum(), 1.0, epsilon = 1e-12);
        assert!(ObjectWeights::new(vec![0.6, 0.5]).is_err());
        assert!(ObjectWeights::new(vec![1.0]).is_err());
        assert!(ObjectWeights::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn discrete_distances_give_neutral_kernel() {
        let w = ObjectWeights::new(vec![0.5, 0.3, 0.2]).unwrap();
        let d = DissimilarityMatrix::discrete(&w);
        let config = WeightedConfiguration::new(w.clone(), d).unwrap();
        let k = build_kernel(&config).unwrap();
        let k0 = neutral_kernel(&w);
        assert!((k.as_matrix() - k0.as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn zero_distances_give_zero_kernel() {
        let w = ObjectWeights::uniform(4).unwrap();
        let d = DissimilarityMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        let config = WeightedConfiguration::new(w, d).unwrap();
        let k = build_kernel(&config).unwrap();
        assert_eq!(k.as_matrix().amax(), 0.0);
    }

    #[test]
    fn kernel_routes_agree_on_point_cloud() {
        let w = ObjectWeights::uniform(6).unwrap();
        let x = random_points(6, 3, 7);
        let via_features = kernel_from_features(&x, &w).unwrap();
        let d = DissimilarityMatrix::from_points(&x);
        let config = WeightedConfiguration::new(w, d).unwrap();
        let via_distances = build_kernel(&config).unwrap();
        assert!((via_features.as_matrix() - via_distances.as_matrix()).amax() < 1e-10);
    }

    #[test]
    fn constant_features_center_to_zero() {
        let w = random_weights(5, 3);
        let x = DMatrix::from_element(5, 2, 3.7);
        let k = kernel_from_features(&x, &w).unwrap();
        assert!(k.as_matrix().amax() < 1e-12);
    }

    #[test]
    fn two_point_indicator_kernel_by_hand() {
        // f uniform, X = (1, 0)^T: X_c = (1/2, -1/2)^T, so
        // K = sqrt(Pi) X_c X_c^T sqrt(Pi) = 1/8 [[1, -1], [-1, 1]].
        let w = ObjectWeights::uniform(2).unwrap();
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let k = kernel_from_features(&x, &w).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.125, -0.125, -0.125, 0.125]);
        assert!((k.as_matrix() - expected).amax() < 1e-15);
    }

    #[test]
    fn trace_equals_inertia_double_sum() {
        let w = random_weights(7, 11);
        let x = random_points(7, 4, 13);
        let k = kernel_from_features(&x, &w).unwrap();
        let d = dissimilarities_from_kernel(&k);
        let f = w.as_vector();
        let mut double_sum = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                double_sum += f[i] * f[j] * d.as_matrix()[(i, j)];
            }
        }
        assert_relative_eq!(inertia(&k), 0.5 * double_sum, max_relative = 1e-10);
    }

    #[test]
    fn neutral_kernel_two_points() {
        let w = ObjectWeights::uniform(2).unwrap();
        let k0 = neutral_kernel(&w);
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((k0.as_matrix() - expected).amax() < 1e-15);
    }

    #[test]
    fn neutral_kernel_acts_as_identity() {
        let w = random_weights(6, 17);
        let x = random_points(6, 3, 19);
        let k = kernel_from_features(&x, &w).unwrap();
        let k0 = neutral_kernel(&w);
        let left = k0.as_matrix() * k.as_matrix();
        let right = k.as_matrix() * k0.as_matrix();
        let scale = k.as_matrix().norm();
        assert!((&left - k.as_matrix()).norm() <= 1e-12 * scale);
        assert!((&right - k.as_matrix()).norm() <= 1e-12 * scale);
    }

    #[test]
    fn neutral_distances_roundtrip() {
        let w = ObjectWeights::new(vec![0.4, 0.35, 0.15, 0.1]).unwrap();
        let k0 = neutral_kernel(&w);
        let d = dissimilarities_from_kernel(&k0);
        let d0 = DissimilarityMatrix::discrete(&w);
        assert!((d.as_matrix() - d0.as_matrix()).amax() < 1e-9);
    }

    #[test]
    fn kernel_dissimilarity_roundtrip() {
        let w = random_weights(8, 23);
        let x = random_points(8, 3, 29);
        let k = kernel_from_features(&x, &w).unwrap();
        let d = dissimilarities_from_kernel(&k);
        let config = WeightedConfiguration::new(w, d).unwrap();
        let k2 = build_kernel(&config).unwrap();
        let scale = k.as_matrix().amax();
        assert!((k.as_matrix() - k2.as_matrix()).amax() <= 1e-10 * scale);
    }

    #[test]
    fn mds_reconstructs_planar_configuration() {
        let w = ObjectWeights::uniform(4).unwrap();
        let x = random_points(4, 2, 31);
        let d = DissimilarityMatrix::from_points(&x);
        let config = WeightedConfiguration::new(w, d.clone()).unwrap();
        let coords = weighted_mds(&config).unwrap();
        let rebuilt = coords.reconstruct_dissimilarities();
        let scale = d.as_matrix().amax();
        assert!((rebuilt.as_matrix() - d.as_matrix()).amax() <= 1e-8 * scale);
        // Weighted column means vanish.
        let f = config.weights.as_vector();
        for c in 0..3 {
            let mean: f64 = (0..4).map(|i| f[i] * coords.as_matrix()[(i, c)]).sum();
            assert!(mean.abs() < 1e-10);
        }
    }

    #[test]
    fn mds_on_neutral_configuration() {
        let w = ObjectWeights::uniform(5).unwrap();
        let d0 = DissimilarityMatrix::discrete(&w);
        let config = WeightedConfiguration::new(w, d0.clone()).unwrap();
        let coords = weighted_mds(&config).unwrap();
        for lambda in coords.eigenvalues() {
            assert_relative_eq!(*lambda, 1.0, epsilon = 1e-10);
        }
        let rebuilt = coords.reconstruct_dissimilarities();
        assert!((rebuilt.as_matrix() - d0.as_matrix()).amax() < 1e-8);
    }

    #[test]
    fn collinear_points_have_rank_one() {
        let w = ObjectWeights::uniform(5).unwrap();
        let x = DMatrix::from_column_slice(5, 1, &[0.0, 1.0, 2.5, 3.0, 7.0]);
        let d = DissimilarityMatrix::from_points(&x);
        let config = WeightedConfiguration::new(w, d).unwrap();
        let coords = weighted_mds(&config).unwrap();
        let positive = coords.eigenvalues().iter().filter(|l| **l > 1e-10).count();
        assert_eq!(positive, 1);
    }

    #[test]
    fn euclidean_check_accepts_point_distances() {
        let w = random_weights(6, 37);
        let x = random_points(6, 3, 41);
        let d = DissimilarityMatrix::from_points(&x);
        let check = is_squared_euclidean(&d, &w, PSD_TOL).unwrap();
        assert!(check.is_euclidean);
    }

    #[test]
    fn euclidean_check_rejects_violating_triple() {
        let w = ObjectWeights::uniform(3).unwrap();
        let mut d = DMatrix::zeros(3, 3);
        d[(0, 1)] = 100.0;
        d[(1, 0)] = 100.0;
        d[(0, 2)] = 1.0;
        d[(2, 0)] = 1.0;
        d[(1, 2)] = 1.0;
        d[(2, 1)] = 1.0;
        let d = DissimilarityMatrix::new(d).unwrap();
        let check = is_squared_euclidean(&d, &w, PSD_TOL).unwrap();
        assert!(!check.is_euclidean);
        assert!(check.min_eigenvalue < 0.0);
    }

    #[test]
    fn discrete_distances_are_euclidean_for_any_weights() {
        let w = random_weights(7, 43);
        let d0 = DissimilarityMatrix::discrete(&w);
        let check = is_squared_euclidean(&d0, &w, PSD_TOL).unwrap();
        assert!(check.is_euclidean);
    }

    #[test]
    fn feature_translation_invariance() {
        let w = random_weights(5, 47);
        let x = random_points(5, 2, 53);
        let mut shifted = x.clone();
        for i in 0..5 {
            shifted[(i, 0)] += 11.0;
            shifted[(i, 1)] -= 4.5;
        }
        let k1 = kernel_from_features(&x, &w).unwrap();
        let k2 = kernel_from_features(&shifted, &w).unwrap();
        assert!((k1.as_matrix() - k2.as_matrix()).amax() < 1e-9);
    }

    #[test]
    fn inertia_of_neutral_kernel_is_n_minus_one() {
        let w = random_weights(9, 59);
        let k0 = neutral_kernel(&w);
        assert_relative_eq!(inertia(&k0), 8.0, epsilon = 1e-12);
    }
}
