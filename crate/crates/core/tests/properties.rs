use proptest::prelude::*;

use starcalc_core::additions::{
    defining_residual, lp_radial_sum, orlicz_sum, radial_minkowski_comb, SumSpec,
};
use starcalc_core::functionals::{dual_mixed_volume_i, orlicz_dual_mixed_volume, volume};
use starcalc_core::phi::{OrliczFunction1, OrliczFunctionM};
use starcalc_core::starbody::{radial_hausdorff, SphereRule, StarBody};

fn rule() -> SphereRule {
    SphereRule::new(2, 128).unwrap()
}

prop_compose! {
    fn trig_body()(a0 in 0.6..1.8f64, c in prop::collection::vec(-0.15..0.15f64, 1..5), s in prop::collection::vec(-0.15..0.15f64, 0..4)) -> StarBody {
        let cos = c.iter().map(|x| x * a0).collect();
        let sin = s.iter().map(|x| x * a0).collect();
        StarBody::radial_trig_poly(a0, cos, sin).unwrap()
    }
}

prop_compose! {
    fn lp_body()(p in 0.8..4.0f64, scale in 0.6..1.6f64) -> StarBody {
        StarBody::lp_ball(2, p, scale).unwrap()
    }
}

fn body() -> impl Strategy<Value = StarBody> {
    prop_oneof![
        trig_body(),
        lp_body(),
        (0.5..2.0f64).prop_map(|r| StarBody::ball(2, r).unwrap())
    ]
}

fn sum(k: &StarBody, l: &StarBody, q: f64) -> StarBody {
    orlicz_sum(
        SumSpec::unit(
            vec![k.clone(), l.clone()],
            OrliczFunctionM::power_sum(q, 2).unwrap(),
        )
        .unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_vanishes(k in body(), l in body(), q in 1.0..3.0f64, k0 in 0.5..2.0f64, k1 in 0.5..2.0f64, k2 in 0.5..2.0f64) {
        let r = rule();
        let spec = SumSpec::new(vec![k.clone(), l.clone()], OrliczFunctionM::power_sum(q, 2).unwrap(), k0, vec![k1, k2]).unwrap();
        let s = orlicz_sum(spec.clone()).samples(&r).unwrap();
        let (a, b) = (k.samples(&r).unwrap(), l.samples(&r).unwrap());
        for i in 0..r.len() {
            prop_assert!(defining_residual(&spec, &[a[i], b[i]], s[i] * s[i]).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn power_sum_is_lp_radial_sum(k in body(), l in body(), p in 2.0..6.0f64) {
        let r = rule();
        let s = sum(&k, &l, p / 2.0);
        let d = radial_hausdorff(&s, &lp_radial_sum(&k, &l, p).unwrap(), &r).unwrap();
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn sum_is_symmetric_and_homogeneous(k in body(), l in body(), q in 1.0..3.0f64, c in 0.3..3.0f64) {
        let r = rule();
        let s = sum(&k, &l, q);
        prop_assert!(radial_hausdorff(&s, &sum(&l, &k, q), &r).unwrap() <= 1e-11);
        let scaled = sum(&k.dilate(c).unwrap(), &l.dilate(c).unwrap(), q);
        prop_assert!(radial_hausdorff(&scaled, &s.dilate(c).unwrap(), &r).unwrap() <= 1e-10 * c.max(1.0));
    }

    #[test]
    fn sum_contains_summands(k in body(), l in body(), q in 1.0..3.0f64) {
        let r = rule();
        let s = sum(&k, &l, q).samples(&r).unwrap();
        let (a, b) = (k.samples(&r).unwrap(), l.samples(&r).unwrap());
        for i in 0..r.len() {
            prop_assert!(s[i] >= a[i].max(b[i]) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn sum_is_monotone(k in body(), l in body(), bump in body(), t in 0.01..0.5f64, q in 1.0..3.0f64) {
        let r = rule();
        let bigger = radial_minkowski_comb(&k, &bump, 1.0, t).unwrap();
        let small = sum(&k, &l, q).samples(&r).unwrap();
        let large = sum(&bigger, &l, q).samples(&r).unwrap();
        for i in 0..r.len() {
            prop_assert!(large[i] >= small[i] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn radial_metric_axioms(a in body(), b in body(), c in body()) {
        let r = rule();
        let ab = radial_hausdorff(&a, &b, &r).unwrap();
        prop_assert_eq!(ab, radial_hausdorff(&b, &a, &r).unwrap());
        prop_assert_eq!(radial_hausdorff(&a, &a, &r).unwrap(), 0.0);
        let ac = radial_hausdorff(&a, &c, &r).unwrap();
        let cb = radial_hausdorff(&c, &b, &r).unwrap();
        prop_assert!(ab <= ac + cb + 1e-15);
    }

    #[test]
    fn volume_scales_with_power_n(k in body(), c in 0.2..4.0f64) {
        let r = rule();
        let v = volume(&k, &r).unwrap();
        let vc = volume(&k.dilate(c).unwrap(), &r).unwrap();
        prop_assert!((vc - c * c * v).abs() <= 1e-12 * vc);
    }

    #[test]
    fn dual_mixed_volumes_are_symmetric(k in body(), l in body()) {
        let r = rule();
        for i in 0..=2 {
            let a = dual_mixed_volume_i(&k, &l, i, &r).unwrap();
            let b = dual_mixed_volume_i(&l, &k, 2 - i, &r).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn orlicz_dual_minkowski_bound(k in body(), l in body(), q in 1.0..3.0f64, k1 in 0.5..2.0f64, k2 in 0.5..2.0f64) {
        let r = rule();
        let phi = OrliczFunction1::power(q).unwrap();
        let lhs = orlicz_dual_mixed_volume(&k, &l, &phi, k1, k2, &r).unwrap();
        let vk = volume(&k, &r).unwrap();
        let rhs = vk * phi.eval(k2 * volume(&l, &r).unwrap() / (k1 * vk)).unwrap();
        prop_assert!(lhs >= rhs - 1e-9 * vk);
    }

    #[test]
    fn dual_minkowski_is_tight_on_dilates(k in body(), c in 0.3..3.0f64, q in 1.0..3.0f64) {
        let r = rule();
        let phi = OrliczFunction1::power(q).unwrap();
        let l = k.dilate(c).unwrap();
        let lhs = orlicz_dual_mixed_volume(&k, &l, &phi, 1.0, 1.0, &r).unwrap();
        let vk = volume(&k, &r).unwrap();
        let rhs = vk * phi.eval(volume(&l, &r).unwrap() / vk).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
    }
}
