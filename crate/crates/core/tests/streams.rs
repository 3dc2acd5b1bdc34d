//! Laminar streams and the σ, κ diagnostics against closed forms and an
//! independent quadrature of the flow-force integrand.

use proptest::prelude::*;
use vortwave::diagnostics::{kappa, kappa_derivative, sigma, sigma_derivative};
use vortwave::laminar::{self, StreamFamily};
use vortwave::VorticityModel;

mod common;
use common::{bernoulli_by_quadrature, flow_force_by_quadrature, MODELS};

fn admissible_r(family: &StreamFamily, t: f64) -> f64 {
    let rc = family.regime();
    let upper = rc.r_0.min(rc.r_c + 3.0);
    rc.r_c + t * (upper - rc.r_c)
}

#[test]
fn irrotational_closed_forms() {
    let m = VorticityModel::irrotational();
    for k in 0..=94 {
        let s = 0.3 + 0.05 * k as f64;
        assert!((laminar::depth(&m, s).unwrap() - 1.0 / s).abs() < 1e-10);
        assert!((laminar::bernoulli_of_slip(&m, s).unwrap() - (0.5 * s * s + 1.0 / s)).abs() < 1e-10);
        let lff = s + 1.0 / (2.0 * s * s);
        assert!((vortwave::diagnostics::laminar_flow_force(&m, s).unwrap() - lff).abs() < 1e-10);
        for r in [1.6, 2.0, 3.5] {
            let closed = s / 2.0 - 1.0 / (2.0 * s * s) + r / s;
            assert!((sigma(&m, s, r).unwrap() - closed).abs() < 1e-10);
        }
    }
    let rc = laminar::regime_constants(&m).unwrap();
    assert!((rc.s_c - 1.0).abs() < 1e-10);
    assert!((rc.r_c - 1.5).abs() < 1e-10);
    assert!(rc.d_0.is_infinite() && rc.r_0.is_infinite());
}

#[test]
fn constant_vorticity_closed_forms() {
    for b in [0.5, 1.0, 2.0] {
        let m = VorticityModel::constant(-b).unwrap();
        for s in [0.1, 0.4, 1.0, 3.0] {
            let d = ((s * s + 2.0 * b).sqrt() - s) / b;
            assert!((laminar::depth(&m, s).unwrap() - d).abs() < 1e-10);
        }
        let rc = laminar::regime_constants(&m).unwrap();
        let s = rc.s_c;
        let residual = (1.0 / s - 1.0 / (s * s + 2.0 * b).sqrt()) / b - 1.0;
        assert!(residual.abs() < 1e-10, "b = {b}: {residual}");
        assert_eq!(rc.s_0, 0.0);
        assert!(rc.d_0.is_finite());
    }
    let rc = laminar::regime_constants(&VorticityModel::constant(-1.0).unwrap()).unwrap();
    assert!((rc.d_0 - 2f64.sqrt()).abs() < 1e-10);
    assert!((rc.r_0 - (1.0 + 2f64.sqrt())).abs() < 1e-10);
}

#[test]
fn conjugates_of_the_irrotational_family() {
    let pair = laminar::conjugate_streams(&VorticityModel::irrotational(), 2.0).unwrap();
    assert!((pair.s_minus - 0.5392).abs() < 1e-4);
    assert!((pair.s_plus - 1.6751).abs() < 1e-4);
    assert!((pair.d_plus - 1.0 / pair.s_minus).abs() < 1e-10);
    assert!((pair.d_minus - 1.0 / pair.s_plus).abs() < 1e-10);
}

#[test]
fn bernoulli_matches_independent_quadrature() {
    for m in MODELS {
        let model = m.build();
        for s in [0.3, 0.8, 1.7] {
            let r = laminar::bernoulli_of_slip(&model, s).unwrap();
            assert!((r - bernoulli_by_quadrature(m, s)).abs() < 1e-9, "{m:?} s = {s}");
        }
    }
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    // Open interval: endpoints excluded.
    (1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect()
}

fn check_monotone(values: &[f64], increasing: bool, label: &str) {
    for (k, w) in values.windows(2).enumerate() {
        let step = if increasing { w[1] - w[0] } else { w[0] - w[1] };
        assert!(step > -1e-10, "{label}: step {k} is {step}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn conjugate_pairs_are_consistent(t in 0.01f64..0.99, which in 0usize..3) {
        let m = MODELS[which];
        let family = StreamFamily::new(m.build()).unwrap();
        let r = admissible_r(&family, t);
        let pair = family.conjugate(r).unwrap();
        let model = family.model();
        prop_assert!((laminar::bernoulli_of_slip(model, pair.s_minus).unwrap() - r).abs() < 1e-10);
        prop_assert!((laminar::bernoulli_of_slip(model, pair.s_plus).unwrap() - r).abs() < 1e-10);
        prop_assert!(pair.s_minus < pair.s_plus);
        prop_assert!(pair.d_minus < pair.d_plus);
        // FF_+ belongs to the deeper stream s_-, FF_- to the shallower s_+.
        let ff_plus = flow_force_by_quadrature(m, pair.s_minus, r);
        let ff_minus = flow_force_by_quadrature(m, pair.s_plus, r);
        prop_assert!((pair.ff_plus - ff_plus).abs() < 1e-10, "{} vs {}", pair.ff_plus, ff_plus);
        prop_assert!((pair.ff_minus - ff_minus).abs() < 1e-10, "{} vs {}", pair.ff_minus, ff_minus);
        prop_assert!(pair.ff_minus < pair.ff_plus);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sigma_and_kappa_follow_the_three_branch_pattern(
        t in 0.05f64..0.95,
        which in 0usize..3,
        ff in -2.0f64..2.0,
    ) {
        let family = StreamFamily::new(MODELS[which].build()).unwrap();
        let model = family.model();
        let r = admissible_r(&family, t);
        let pair = family.conjugate(r).unwrap();
        let s0 = family.regime().s_0;
        let branches = [
            (grid(s0 + 1e-3 * (pair.s_minus - s0), pair.s_minus, 64), true),
            (grid(pair.s_minus, pair.s_plus, 64), false),
            (grid(pair.s_plus, pair.s_plus + 3.0, 64), true),
        ];
        for (k, (samples, sigma_up)) in branches.iter().enumerate() {
            let sg: Vec<f64> = samples.iter().map(|&s| sigma(model, s, r).unwrap()).collect();
            let kp: Vec<f64> = samples.iter().map(|&s| kappa(model, s, r, ff).unwrap()).collect();
            check_monotone(&sg, *sigma_up, &format!("sigma branch {k}"));
            check_monotone(&kp, !*sigma_up, &format!("kappa branch {k}"));
        }
    }

    #[test]
    fn derivative_formulas_match_central_differences(
        t in 0.05f64..0.95,
        which in 0usize..3,
        x in 0.05f64..0.95,
    ) {
        let family = StreamFamily::new(MODELS[which].build()).unwrap();
        let model = family.model();
        let r = admissible_r(&family, t);
        let pair = family.conjugate(r).unwrap();
        let s = pair.s_minus + x * (pair.s_plus + 1.0 - pair.s_minus);
        let h = 1e-4 * s;
        let ds = (sigma(model, s + h, r).unwrap() - sigma(model, s - h, r).unwrap()) / (2.0 * h);
        let dk = (kappa(model, s + h, r, 0.0).unwrap() - kappa(model, s - h, r, 0.0).unwrap()) / (2.0 * h);
        prop_assert!((ds - sigma_derivative(model, s, r).unwrap()).abs() < 1e-6);
        prop_assert!((dk - kappa_derivative(model, s, r).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn kappa_vanishes_at_the_supercritical_conjugate_with_ff_minus() {
    for m in MODELS {
        let family = StreamFamily::new(m.build()).unwrap();
        let r = admissible_r(&family, 0.4);
        let pair = family.conjugate(r).unwrap();
        let k = kappa(family.model(), pair.s_plus, r, pair.ff_minus).unwrap();
        assert!(k.abs() < 1e-12, "{m:?}: {k}");
        let k = kappa(family.model(), pair.s_minus, r, pair.ff_plus).unwrap();
        assert!(k.abs() < 1e-12, "{m:?}: {k}");
    }
}
