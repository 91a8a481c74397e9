use lsilab::ascent::AscentOptions;
use lsilab::bounds::{gaussian_convolution_lsi_bound, subgaussian_bounds};
use lsilab::spectral1d::build_grid_density;
use lsilab::variational::{lsi_quotient, maximize_lsi_quotient_with};
use lsilab::{AtomicMixingMeasure1D, TestFunction1D};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quotient_is_homogeneous(
        r in 0.0f64..2.0,
        t in 0.2f64..2.0,
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..5),
    ) {
        let mu = if r == 0.0 { AtomicMixingMeasure1D::dirac(0.0) } else { AtomicMixingMeasure1D::symmetric_pair(r) }.unwrap();
        let grid = build_grid_density(&mu, t, 801, 8.0).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|y| 1.0 + coeffs.iter().enumerate().map(|(k, a)| a * (y * (k + 1) as f64).cos()).sum::<f64>()).collect();
        let Ok(f) = TestFunction1D::new(f) else { return Ok(()) };
        let Ok(q) = lsi_quotient(&grid, &f) else { return Ok(()) };
        for c in [-1.0, 0.5, 3.0] {
            let qc = lsi_quotient(&grid, &f.scaled(c).unwrap()).unwrap();
            prop_assert!((qc - q).abs() <= 1e-12 * q);
        }
    }

    #[test]
    fn certificates_are_consistent_and_below_upper_bounds(r in 0.2f64..1.5, t in 0.3f64..2.0, seed in 0u64..1000) {
        let mu = AtomicMixingMeasure1D::symmetric_pair(r).unwrap();
        let grid = build_grid_density(&mu, t, 801, 8.0).unwrap();
        let opts = AscentOptions { restarts: 4, max_iters: 200, seed, ..AscentOptions::default() };
        let cert = maximize_lsi_quotient_with(&grid, &opts).unwrap();
        let again = lsi_quotient(&grid, &cert.witness).unwrap();
        prop_assert!((again - cert.value).abs() <= 1e-12 * cert.value);
        let margin = cert.quadrature_error_estimate;
        prop_assert!(cert.value <= gaussian_convolution_lsi_bound(r, t).unwrap().value() + margin);
        let sigma2 = mu.spread().powi(2);
        let (_, lsi) = subgaussian_bounds(sigma2, mu.subgaussian_constant(sigma2).unwrap(), 2.0 * sigma2).unwrap();
        let wide = build_grid_density(&mu, 2.0 * sigma2, 801, 8.0).unwrap();
        let cert2 = maximize_lsi_quotient_with(&wide, &opts).unwrap();
        prop_assert!(cert2.value <= lsi.value() + cert2.quadrature_error_estimate);
    }
}

#[test]
fn ascent_never_ends_below_its_starts() {
    for (r, t) in [(1.0, 0.3), (0.5, 1.0), (1.5, 0.6)] {
        let mu = AtomicMixingMeasure1D::symmetric_pair(r).unwrap();
        let grid = build_grid_density(&mu, t, 801, 8.0).unwrap();
        let cert = maximize_lsi_quotient_with(&grid, &AscentOptions { restarts: 3, max_iters: 300, ..AscentOptions::default() }).unwrap();
        assert_eq!(cert.restart_values.len(), 3);
        let best = cert.restart_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, cert.value);

        let nodes = grid.nodes();
        let mean = nodes.iter().zip(grid.mass_weights()).map(|(y, w)| y * w).sum::<f64>() / grid.total_mass;
        let exp_start: Vec<f64> = nodes.iter().map(|y| ((y - mean) / (2.0 * t.sqrt())).exp()).collect();
        let linear: Vec<f64> = nodes.iter().map(|y| y - mean).collect();
        for start in [exp_start, linear] {
            let q0 = lsi_quotient(&grid, &TestFunction1D::new(start).unwrap()).unwrap();
            assert!(cert.value >= q0 * (1.0 - 1e-12), "r={r} t={t}: {} < {q0}", cert.value);
        }
    }
}
