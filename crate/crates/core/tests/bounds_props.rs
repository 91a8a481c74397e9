use lsilab::bounds::*;
use lsilab::ExtendedReal;
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = DualExponent> {
    prop_oneof![
        (1.05f64..20.0).prop_map(|p| DualExponent::finite(p).unwrap()),
        Just(DualExponent::infinity()),
    ]
}

proptest! {
    #[test]
    fn mixture_bounds_grow_with_their_inputs(
        k_ls in 0.01f64..10.0, dk in 0.0f64..5.0,
        k_p in 1.0f64..50.0, dp in 0.0f64..5.0,
        e in exponent(),
    ) {
        let at = |a: f64, b: f64| {
            let inp = MixtureBoundInputs::new(a, b, e);
            (poincare_mixture_bound(&inp).unwrap().value(), lsi_mixture_bound(&inp).unwrap().value())
        };
        let base = at(k_ls, k_p);
        let more_ls = at(k_ls + dk, k_p);
        let more_p = at(k_ls, k_p + dp);
        prop_assert!(more_ls.0 >= base.0 && more_ls.1 >= base.1);
        prop_assert!(more_p.0 >= base.0 && more_p.1 >= base.1);
    }

    #[test]
    fn subgaussian_bounds_grow_with_c_sg(sigma2 in 0.01f64..5.0, ratio in 1.01f64..10.0, c in 1.0f64..100.0, dc in 0.0f64..10.0) {
        let t = ratio * sigma2;
        let (a, b) = subgaussian_bounds(sigma2, c, t).unwrap();
        let (a2, b2) = subgaussian_bounds(sigma2, c + dc, t).unwrap();
        prop_assert!(a2.value() >= a.value() && b2.value() >= b.value());
    }

    #[test]
    fn product_bounds_grow_with_component_constants(
        k_ls in 0.01f64..5.0, dk in 0.0f64..2.0,
        k_chi2 in 0.0f64..10.0, dc in 0.0f64..5.0,
        k in 1u32..8,
        c0 in 0.01f64..5.0, c1 in 0.01f64..5.0,
        k_inf in 1.0f64..50.0, di in 0.0f64..10.0,
    ) {
        let h = |a, b| hypercube_lsi_bound(a, b, k).unwrap().value();
        prop_assert!(h(k_ls + dk, k_chi2) >= h(k_ls, k_chi2));
        prop_assert!(h(k_ls, k_chi2 + dc) >= h(k_ls, k_chi2));
        let m = |x| two_mixture_lsi_bound(c0, c1, x).unwrap().value();
        prop_assert!(m(k_chi2 + dc) >= m(k_chi2));
        let d = |x| diffusion_lsi_bound(0.5, 1.0, x).unwrap().value();
        prop_assert!(d(k_inf + di) >= d(k_inf));
    }

    #[test]
    fn gaussian_bound_matches_direct_evaluation(r in 0.0f64..3.0, t in 0.1f64..10.0) {
        let direct = 6.0 * (4.0 * r * r + t) * (4.0 * r * r / t).exp();
        let got = gaussian_convolution_lsi_bound(r, t).unwrap().value();
        prop_assert!(((got - direct) / direct).abs() <= 1e-12);
    }

    #[test]
    fn c_loc_tends_to_2t(kappa in -1e-8f64..1e-8, t in 0.01f64..100.0) {
        prop_assert!((c_loc(kappa, t) - 2.0 * t).abs() <= 1e-6 * 2.0 * t);
    }

    #[test]
    fn tightening_is_affine(c in 0.0f64..10.0, d in 0.0f64..10.0, cp in 0.0f64..10.0, h in 0.0f64..5.0) {
        prop_assert_eq!(tighten_defective_lsi(0.0, 0.0, cp), cp);
        let base = tighten_defective_lsi(c, d, cp);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        prop_assert!(close(tighten_defective_lsi(c + h, d, cp) - base, h));
        prop_assert!(close(tighten_defective_lsi(c, d + h, cp) - base, cp * h / 2.0));
        prop_assert!(close(tighten_defective_lsi(c, d, cp + h) - base, h * (d / 2.0 + 1.0)));
    }

    #[test]
    fn tensorized_chi2_multiplies(
        a in prop::collection::vec(0.0f64..3.0, 0..5),
        b in prop::collection::vec(0.0f64..3.0, 0..5),
    ) {
        let wrap = |v: &[f64]| v.iter().map(|x| ExtendedReal::Finite(*x)).collect::<Vec<_>>();
        let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
        let lhs = chi2_tensorize(&wrap(&joined)).to_f64() + 1.0;
        let rhs = (chi2_tensorize(&wrap(&a)).to_f64() + 1.0) * (chi2_tensorize(&wrap(&b)).to_f64() + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
}

#[test]
fn bernoulli_constants_are_monotone_in_p() {
    let grid: Vec<f64> = (1..=9).map(|i| 0.05 * i as f64).collect();
    let vals: Vec<(f64, f64)> = grid.iter().map(|p| bernoulli_pi_constants(*p).unwrap()).collect();
    assert!(vals.iter().all(|v| v.0 > 0.0));
    for w in vals.windows(2) {
        assert!(w[1].0 > w[0].0, "K_LS should increase towards ½");
        assert!(w[1].1 < w[0].1, "K_χ² should decrease towards ½");
    }
}
