//! Property tests for the structural invariants of kernels, spectra and the
//! RV statistics.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rvhaar_core::geometry::{
    build_kernel, dissimilarities_from_kernel, inertia, kernel_from_features, neutral_kernel,
    DissimilarityMatrix, ObjectWeights, WeightedConfiguration,
};
use rvhaar_core::rvstats::{cv_null_moments, rv_coefficient, rv_null_cumulants};
use rvhaar_core::spectra::{
    effective_dimensionality, nontrivial_spectrum, spectral_moment, NontrivialSpectrum,
};

fn weights_strategy(n: usize) -> impl Strategy<Value = ObjectWeights> {
    proptest::collection::vec(0.05f64..1.0, n).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        ObjectWeights::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
    })
}

fn points_strategy(n: usize, p: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-10.0f64..10.0, n * p)
        .prop_map(move |flat| DMatrix::from_vec(n, p, flat))
}

fn configuration_strategy() -> impl Strategy<Value = (WeightedConfiguration, DMatrix<f64>)> {
    (4usize..10, 1usize..4).prop_flat_map(|(n, p)| {
        (weights_strategy(n), points_strategy(n, p)).prop_map(|(w, x)| {
            let d = DissimilarityMatrix::from_points(&x);
            (WeightedConfiguration::new(w, d).unwrap(), x)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_dissimilarity_roundtrip((config, _) in configuration_strategy()) {
        let k = build_kernel(&config).unwrap();
        let d = dissimilarities_from_kernel(&k);
        let scale = config.dissimilarities.as_matrix().amax().max(1e-30);
        let gap = (d.as_matrix() - config.dissimilarities.as_matrix()).amax();
        prop_assert!(gap <= 1e-10 * scale.max(1.0), "round-trip gap {gap}");
        let config2 = WeightedConfiguration::new(config.weights.clone(), d).unwrap();
        let k2 = build_kernel(&config2).unwrap();
        let kgap = (k2.as_matrix() - k.as_matrix()).amax();
        prop_assert!(kgap <= 1e-10 * k.as_matrix().amax().max(1.0));
    }

    #[test]
    fn kernels_annihilate_sqrt_weights((config, _) in configuration_strategy()) {
        let k = build_kernel(&config).unwrap();
        let residual = (k.as_matrix() * config.weights.sqrt_vector()).norm();
        prop_assert!(residual <= 1e-10 * k.as_matrix().norm().max(1e-300));
    }

    #[test]
    fn trace_equals_weighted_double_sum((config, _) in configuration_strategy()) {
        let k = build_kernel(&config).unwrap();
        let f = config.weights.as_vector();
        let d = config.dissimilarities.as_matrix();
        let n = config.len();
        let mut double_sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                double_sum += f[i] * f[j] * d[(i, j)];
            }
        }
        let delta = inertia(&k);
        prop_assert!((delta - 0.5 * double_sum).abs() <= 1e-10 * delta.abs().max(1.0));
    }

    #[test]
    fn neutral_kernel_is_identity_element((config, _) in configuration_strategy()) {
        let k = build_kernel(&config).unwrap();
        let k0 = neutral_kernel(&config.weights);
        let scale = k.as_matrix().norm().max(1e-300);
        let left = (k0.as_matrix() * k.as_matrix() - k.as_matrix()).norm();
        let right = (k.as_matrix() * k0.as_matrix() - k.as_matrix()).norm();
        prop_assert!(left <= 1e-12 * scale && right <= 1e-12 * scale);
    }

    #[test]
    fn feature_kernel_translation_invariance(
        (n, p) in (4usize..9, 1usize..4),
        shift in -100.0f64..100.0,
    ) {
        let seeds: Vec<f64> = (0..n * p).map(|i| ((i * 2654435761) % 1000) as f64 / 50.0).collect();
        let x = DMatrix::from_vec(n, p, seeds);
        let shifted = x.map(|v| v + shift);
        let w = ObjectWeights::uniform(n).unwrap();
        let k1 = kernel_from_features(&x, &w).unwrap();
        let k2 = kernel_from_features(&shifted, &w).unwrap();
        let gap = (k1.as_matrix() - k2.as_matrix()).amax();
        prop_assert!(gap <= 1e-8 * k1.as_matrix().amax().max(1.0));
    }

    #[test]
    fn spectral_moment_scale_equivariance(
        lambdas in proptest::collection::vec(0.0f64..10.0, 4),
        c in 0.1f64..10.0,
    ) {
        let s = NontrivialSpectrum::new(lambdas.clone(), 5).unwrap();
        let scaled = NontrivialSpectrum::new(lambdas.iter().map(|l| l * c).collect(), 5).unwrap();
        for q in 1..=4u32 {
            let a = spectral_moment(&scaled, q).unwrap();
            let b = c.powi(q as i32) * spectral_moment(&s, q).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-12));
        }
        if !s.is_zero() {
            let nu = effective_dimensionality(&s).unwrap();
            let nu_scaled = effective_dimensionality(&scaled).unwrap();
            prop_assert!((nu - nu_scaled).abs() <= 1e-9 * nu);
            prop_assert!((1.0 - 1e-9..=4.0 + 1e-9).contains(&nu));
        }
    }

    #[test]
    fn rv_is_bounded_and_symmetric(
        n in 5usize..9,
        flat_x in proptest::collection::vec(-5.0f64..5.0, 16),
        flat_y in proptest::collection::vec(-5.0f64..5.0, 16),
    ) {
        let x = DMatrix::from_fn(n, 2, |i, j| flat_x[(i * 2 + j) % flat_x.len()]);
        let y = DMatrix::from_fn(n, 2, |i, j| flat_y[(i * 2 + j) % flat_y.len()]);
        let w = ObjectWeights::uniform(n).unwrap();
        let kx = kernel_from_features(&x, &w).unwrap();
        let ky = kernel_from_features(&y, &w).unwrap();
        if let (Ok(a), Ok(b)) = (rv_coefficient(&kx, &ky), rv_coefficient(&ky, &kx)) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn null_statistics_symmetric_under_swap(
        lambdas in proptest::collection::vec(0.01f64..10.0, 6),
        mus in proptest::collection::vec(0.01f64..10.0, 6),
    ) {
        let sx = NontrivialSpectrum::new(lambdas, 7).unwrap();
        let sy = NontrivialSpectrum::new(mus, 7).unwrap();
        let ab = cv_null_moments(&sx, &sy).unwrap();
        let ba = cv_null_moments(&sy, &sx).unwrap();
        prop_assert!((ab.mean - ba.mean).abs() <= 1e-11 * ab.mean.abs().max(1.0));
        for (a, b) in [
            (ab.central2, ba.central2),
            (ab.central3, ba.central3),
            (ab.central4, ba.central4),
        ] {
            let (a, b) = (a.unwrap(), b.unwrap());
            prop_assert!((a - b).abs() <= 1e-11 * a.abs().max(1e-12));
        }
        let ca = rv_null_cumulants(&sx, &sy).unwrap();
        let cb = rv_null_cumulants(&sy, &sx).unwrap();
        prop_assert!((ca.mean - cb.mean).abs() <= 1e-12);
        prop_assert!((ca.variance.unwrap() - cb.variance.unwrap()).abs() <= 1e-14);
    }

    #[test]
    fn spectrum_sum_matches_kernel_trace((config, _) in configuration_strategy()) {
        let k = build_kernel(&config).unwrap();
        let s = nontrivial_spectrum(&k).unwrap();
        let total: f64 = s.lambdas().iter().sum();
        let trace = k.as_matrix().trace();
        prop_assert!((total - trace).abs() <= 1e-10 * trace.abs().max(1.0));
    }
}
