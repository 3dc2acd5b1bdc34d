use std::f64::consts::PI;

use vortwave::laminar;
use vortwave::verifier::{
    full_report, full_report_with, verify_benjamin_lighthill, verify_decay_rate, verify_flux_min_kappa,
    verify_profile_bounds, verify_w_sign, ReportOptions, Status,
};
use vortwave::wavesolver::{continue_in_amplitude, exact_laminar, WaveGrid, WaveSolution};
use vortwave::{dispersion, VorticityModel};

fn branch(model: &VorticityModel, s: f64, n_q: usize, n_p: usize, a: f64, steps: usize) -> Vec<WaveSolution> {
    let k = dispersion::bifurcation_wavenumber(model, s).unwrap();
    let grid = WaveGrid::new(2.0 * PI / k, n_q, n_p).unwrap();
    let b = continue_in_amplitude(model, s, &grid, a, steps).unwrap();
    assert!(b.stop_reason.is_none());
    b.solutions
}

fn status_of(report: &vortwave::verifier::VerificationReport, name: &str) -> Status {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check {name}"))
        .status
}

#[test]
fn subcritical_laminar_flow_sits_on_the_upper_bound() {
    let m = VorticityModel::constant(-1.0).unwrap();
    let grid = WaveGrid::new(5.0, 32, 64).unwrap();
    let sol = exact_laminar(&m, &grid, 0.36).unwrap();
    let blc = verify_benjamin_lighthill(&sol).unwrap();
    assert!(blc.iter().all(|c| c.status == Status::Pass));
    assert!(blc[1].margin.abs() < 1e-12);
    assert!(blc[1].note.contains("equality"));
    assert!(blc[0].strict);
    let profile = verify_profile_bounds(&sol).unwrap();
    assert!(profile.iter().all(|c| c.status == Status::Pass));
    assert!(profile[1].note.contains("d_+"));
    let report = full_report(&sol).unwrap();
    assert!(!report.has_failure(), "{}", report.to_text());
}

#[test]
fn supercritical_laminar_flow_sits_on_the_lower_bound() {
    let m = VorticityModel::irrotational();
    let pair = laminar::conjugate_streams(&m, 2.0).unwrap();
    let grid = WaveGrid::new(5.0, 32, 32).unwrap();
    let sol = exact_laminar(&m, &grid, pair.s_plus).unwrap();
    let blc = verify_benjamin_lighthill(&sol).unwrap();
    assert_eq!(blc[0].status, Status::Pass);
    assert!(blc[0].note.contains("equality"));
    let profile = verify_profile_bounds(&sol).unwrap();
    assert_eq!(profile[0].status, Status::Pass);
    assert_eq!(profile[1].status, Status::Inconclusive);
    assert_eq!(profile[2].status, Status::Inconclusive);
    assert!(!full_report(&sol).unwrap().has_failure());
}

#[test]
fn branch_members_pass_with_strict_margins() {
    for (m, s) in [
        (VorticityModel::irrotational(), 0.9),
        (VorticityModel::constant(-1.0).unwrap(), 0.36),
    ] {
        let members = branch(&m, s, 64, 64, 0.04, 2);
        let mut margins = Vec::new();
        for sol in &members[1..] {
            let report = full_report(sol).unwrap();
            assert!(!report.has_failure(), "{}", report.to_text());
            for name in ["blc_lower", "blc_upper", "profile_min_above_d_minus", "profile_max_above_d_plus"] {
                let c = report.checks.iter().find(|c| c.name == name).unwrap();
                assert!(c.strict, "{name}: {}", c.margin);
            }
            margins.push((report.checks[0].margin, report.checks[1].margin));
            assert_eq!(verify_w_sign(sol).unwrap().status, Status::Pass);
        }
        // The upper margin grows with amplitude.
        assert!(margins[1].1 > margins[0].1);
    }
}

#[test]
fn flux_minimum_matches_kappa_or_is_inconclusive() {
    let m = VorticityModel::irrotational();
    let sol = branch(&m, 0.9, 64, 32, 0.04, 2).pop().unwrap();
    let pair = laminar::conjugate_streams(&m, sol.r).unwrap();

    let at_minus = verify_flux_min_kappa(&sol, pair.s_minus).unwrap();
    assert_eq!(at_minus.len(), 2);
    assert_eq!(at_minus[0].status, Status::Pass);
    assert!(at_minus[0].lhs <= 0.0);
    assert!((at_minus[0].lhs - at_minus[0].rhs).abs() < 1e-6);
    assert_eq!(at_minus[1].status, Status::Pass);

    let at_plus = verify_flux_min_kappa(&sol, pair.s_plus).unwrap();
    assert_eq!(at_plus.len(), 1);
    assert_eq!(at_plus[0].status, Status::Inconclusive);
    assert!(at_plus[0].lhs > 0.0);

    assert!(verify_flux_min_kappa(&sol, 0.0).is_err());
    assert!(verify_flux_min_kappa(&sol, -1.0).is_err());
}

#[test]
fn laminar_flow_with_a_foreign_bernoulli_constant_fails() {
    let m = VorticityModel::irrotational();
    let grid = WaveGrid::new(5.0, 32, 32).unwrap();
    let mut sol = exact_laminar(&m, &grid, 0.7).unwrap();
    sol.r += 0.05;
    let report = full_report(&sol).unwrap();
    assert!(report.has_failure());
    assert_eq!(status_of(&report, "profile_min_below_d_plus"), Status::Pass);
    assert_eq!(status_of(&report, "profile_max_above_d_plus"), Status::Fail);
}

#[test]
fn perturbed_node_breaks_flow_force_invariance() {
    let m = VorticityModel::irrotational();
    let mut sol = branch(&m, 0.9, 64, 32, 0.04, 2).pop().unwrap();
    sol.h[[10, 20]] += 1e-3;
    let report = full_report(&sol).unwrap();
    assert_eq!(status_of(&report, "flow_force_column_deviation"), Status::Fail);
    assert!(report.count(Status::Fail) >= 1);
}

#[test]
fn decay_rate_needs_a_near_solitary_wave() {
    let m = VorticityModel::irrotational();
    let sol = branch(&m, 0.9, 64, 32, 0.04, 2).pop().unwrap();
    assert!(!sol.near_solitary);
    assert_eq!(verify_decay_rate(&sol).unwrap().status, Status::Inconclusive);
}

#[test]
fn report_options() {
    let m = VorticityModel::irrotational();
    let sol = branch(&m, 0.9, 64, 32, 0.02, 1).pop().unwrap();
    let probes = ReportOptions {
        tol_scale: 1.0,
        s_probes: Some(vec![0.95, 1.05]),
    };
    let report = full_report_with(&sol, &probes).unwrap();
    assert!(report.checks.iter().any(|c| c.name == "boundary_identity_probe0"));
    assert!(report.checks.iter().any(|c| c.name == "boundary_identity_probe1"));
    let bad = ReportOptions {
        tol_scale: 0.0,
        s_probes: None,
    };
    assert!(full_report_with(&sol, &bad).is_err());

    let text = report.to_text();
    assert_eq!(text.lines().count(), report.checks.len() + 1);
    assert!(text.starts_with("# name status lhs rhs margin tolerance"));
}
