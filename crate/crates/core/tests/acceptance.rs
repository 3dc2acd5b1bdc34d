//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortwave::diagnostics::{self, kappa, kappa_derivative, sigma, sigma_derivative};
use vortwave::flowforce::{self, flux_function, flux_gradient_check};
use vortwave::laminar::{self, StreamFamily};
use vortwave::verifier::{self, Status, VerificationReport};
use vortwave::wavesolver::{continue_in_amplitude, forced_solve, WaveGrid, WaveSolution};
use vortwave::{dispersion, VorticityModel};

mod common;
use common::{flow_force_by_quadrature, Manufactured, MODELS};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn max_abs_diff(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn slips(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn irrotational_closed_forms() -> Outcome {
    let m = VorticityModel::irrotational();
    let mut err = 0.0f64;
    for s in slips(0.3, 5.0, 200) {
        err = err.max(max_abs_diff([
            (laminar::depth(&m, s).unwrap(), 1.0 / s),
            (laminar::bernoulli_of_slip(&m, s).unwrap(), 0.5 * s * s + 1.0 / s),
            (diagnostics::laminar_flow_force(&m, s).unwrap(), s + 1.0 / (2.0 * s * s)),
        ]));
        for r in [1.6, 2.0, 4.0] {
            let closed = s / 2.0 - 1.0 / (2.0 * s * s) + r / s;
            err = err.max((sigma(&m, s, r).unwrap() - closed).abs());
        }
    }
    let rc = laminar::regime_constants(&m).unwrap();
    err = err.max(max_abs_diff([(rc.s_c, 1.0), (rc.r_c, 1.5)]));
    Outcome::new(err < 1e-10, format!("max abs error {err:.2e} (tol 1e-10)"))
}

fn constant_vorticity_closed_forms() -> Outcome {
    let mut depth_err = 0.0f64;
    let mut sc_residual = 0.0f64;
    for b in [0.5, 1.0, 2.0] {
        let m = VorticityModel::constant(-b).unwrap();
        for s in slips(0.05, 5.0, 100) {
            let closed = ((s * s + 2.0 * b).sqrt() - s) / b;
            depth_err = depth_err.max((laminar::depth(&m, s).unwrap() - closed).abs());
        }
        let s = laminar::critical_slip(&m).unwrap();
        sc_residual = sc_residual.max(((1.0 / s - 1.0 / (s * s + 2.0 * b).sqrt()) / b - 1.0).abs());
    }
    let rc = laminar::regime_constants(&VorticityModel::constant(-1.0).unwrap()).unwrap();
    let d0_err = (rc.d_0 - 2f64.sqrt()).abs();
    let pass = depth_err < 1e-10 && sc_residual < 1e-10 && rc.s_0 == 0.0 && d0_err < 1e-10;
    Outcome::new(
        pass,
        format!(
            "depth error {depth_err:.2e}, s_c residual {sc_residual:.2e}, b=1: s_0 = {}, |d_0 - sqrt 2| = {d0_err:.2e}",
            rc.s_0
        ),
    )
}

fn admissible_r(family: &StreamFamily, t: f64) -> f64 {
    let rc = family.regime();
    rc.r_c + t * (rc.r_0.min(rc.r_c + 3.0) - rc.r_c)
}

fn conjugate_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut r_err, mut ff_err) = (0.0f64, 0.0f64);
    let mut ordered = true;
    for m in MODELS {
        let family = StreamFamily::new(m.build()).unwrap();
        for _ in 0..20 {
            let r = admissible_r(&family, rng.gen_range(0.005..0.995));
            let pair = family.conjugate(r).unwrap();
            let model = family.model();
            r_err = r_err.max(max_abs_diff([
                (laminar::bernoulli_of_slip(model, pair.s_minus).unwrap(), r),
                (laminar::bernoulli_of_slip(model, pair.s_plus).unwrap(), r),
            ]));
            ff_err = ff_err.max(max_abs_diff([
                (sigma(model, pair.s_minus, r).unwrap(), flow_force_by_quadrature(m, pair.s_minus, r)),
                (sigma(model, pair.s_plus, r).unwrap(), flow_force_by_quadrature(m, pair.s_plus, r)),
                (pair.ff_plus, flow_force_by_quadrature(m, pair.s_minus, r)),
                (pair.ff_minus, flow_force_by_quadrature(m, pair.s_plus, r)),
            ]));
            ordered &= pair.d_minus < pair.d_plus;
        }
    }
    Outcome::new(
        r_err < 1e-10 && ff_err < 1e-10 && ordered,
        format!("3 models x 20 r: |R(s) - r| {r_err:.2e}, flow force vs quadrature {ff_err:.2e}, d_- < d_+: {ordered}"),
    )
}

fn monotone(values: &[f64], increasing: bool) -> f64 {
    values
        .windows(2)
        .map(|w| if increasing { w[1] - w[0] } else { w[0] - w[1] })
        .fold(f64::INFINITY, f64::min)
}

fn open_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect()
}

fn sigma_kappa_monotonicity() -> Outcome {
    let mut worst_step = f64::INFINITY;
    for m in MODELS {
        let family = StreamFamily::new(m.build()).unwrap();
        let model = family.model();
        let s0 = family.regime().s_0;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let r = admissible_r(&family, t);
            let pair = family.conjugate(r).unwrap();
            let branches = [
                (open_grid(s0 + 1e-3 * (pair.s_minus - s0), pair.s_minus, 64), true),
                (open_grid(pair.s_minus, pair.s_plus, 64), false),
                (open_grid(pair.s_plus, pair.s_plus + 3.0, 64), true),
            ];
            for (samples, sigma_up) in &branches {
                let sg: Vec<f64> = samples.iter().map(|&s| sigma(model, s, r).unwrap()).collect();
                let kp: Vec<f64> = samples.iter().map(|&s| kappa(model, s, r, pair.ff_minus).unwrap()).collect();
                worst_step = worst_step.min(monotone(&sg, *sigma_up)).min(monotone(&kp, !*sigma_up));
            }
        }
    }

    // Close to s_0 the functions blow up like powers of 1/(s - s_0) and a
    // difference quotient loses every digit, so the derivative samples start
    // a tenth of the way from s_0 to s_-.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut deriv_err = 0.0f64;
    for _ in 0..60 {
        let m = MODELS[rng.gen_range(0..MODELS.len())];
        let family = StreamFamily::new(m.build()).unwrap();
        let model = family.model();
        let s0 = family.regime().s_0;
        let r = admissible_r(&family, rng.gen_range(0.05..0.95));
        let pair = family.conjugate(r).unwrap();
        let lo = s0 + 0.1 * (pair.s_minus - s0);
        let s = rng.gen_range(lo..pair.s_plus + 3.0);
        let h = 1e-5 * s;
        let ds = (sigma(model, s + h, r).unwrap() - sigma(model, s - h, r).unwrap()) / (2.0 * h);
        let dk = (kappa(model, s + h, r, 0.0).unwrap() - kappa(model, s - h, r, 0.0).unwrap()) / (2.0 * h);
        for (fd, exact) in [
            (ds, sigma_derivative(model, s, r).unwrap()),
            (dk, kappa_derivative(model, s, r).unwrap()),
        ] {
            deriv_err = deriv_err.max((fd - exact).abs() / exact.abs().max(1.0));
        }
    }
    Outcome::new(
        worst_step > -1e-10 && deriv_err < 1e-6,
        format!(
            "worst signed step {worst_step:.2e} (slack 1e-10), derivative error {deriv_err:.2e} \
             relative to max(1, |f'|) (tol 1e-6)"
        ),
    )
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if (f(c) > 0.0) == (fa > 0.0) {
            a = c;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

fn dispersion_oracle() -> Outcome {
    let m = VorticityModel::irrotational();
    let mut rel = 0.0f64;
    for s in [0.5, 0.7, 0.9, 0.97, 1.03, 1.2, 1.6, 2.5] {
        let mu = dispersion::principal_eigenpair(&m, s, 129).unwrap().mu;
        let s3 = s * s * s;
        let theta = if s < 1.0 {
            bisect(|t| t.tanh() - t * s3, 1e-9, 1.0 / s3)
        } else {
            bisect(|t| t.tan() - t * s3, 1e-9, PI / 2.0 - 1e-12)
        };
        let oracle = if s < 1.0 { -(theta * s).powi(2) } else { (theta * s).powi(2) };
        rel = rel.max((mu - oracle).abs() / oracle.abs());
    }
    let below = dispersion::principal_eigenpair(&m, 0.995, 129).unwrap().mu;
    let above = dispersion::principal_eigenpair(&m, 1.005, 129).unwrap().mu;
    Outcome::new(
        rel < 1e-6 && below < 0.0 && above > 0.0,
        format!("max relative error {rel:.2e} (tol 1e-6); mu(0.995) = {below:.3e}, mu(1.005) = {above:.3e}"),
    )
}

fn solver_order() -> Outcome {
    let mf = Manufactured {
        model: VorticityModel::affine(-1.0, 0.5).unwrap(),
        s: 1.5,
        eps: 0.01,
        period: 2.0 * PI,
    };
    let r = laminar::bernoulli_of_slip(&mf.model, mf.s).unwrap();
    let mut errors = Vec::new();
    for n in [16usize, 32, 64, 128] {
        let grid = WaveGrid::new(mf.period, n, n + 1).unwrap();
        let exact = mf.exact(&grid);
        let sol = forced_solve(&mf.model, &grid, &exact, r, &mf.forcing(&grid, r)).unwrap();
        errors.push((&sol.h - &exact).iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let orders_ok = orders.iter().all(|o| (1.8..=2.2).contains(o));

    // Newton: residual ratios on a finite-amplitude wave.
    let m = VorticityModel::irrotational();
    let k = dispersion::bifurcation_wavenumber(&m, 0.9).unwrap();
    let grid = WaveGrid::new(2.0 * PI / k, 64, 32).unwrap();
    let branch = continue_in_amplitude(&m, 0.9, &grid, 0.05, 1).unwrap();
    let hist = &branch.solutions.last().unwrap().residual_history;
    let rates: Vec<f64> = hist
        .windows(3)
        .filter(|w| w[2] > 1e-13)
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect();
    let quadratic = rates.last().is_some_and(|&p| p > 1.6);
    Outcome::new(
        orders_ok && quadratic,
        format!(
            "observed orders {orders:.3?}; Newton residuals [{}], last rate {:.2?}",
            hist.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(", "),
            rates.last()
        ),
    )
}

struct BranchRun {
    label: &'static str,
    members: Vec<WaveSolution>,
    reports: Vec<VerificationReport>,
}

fn build_branch(label: &'static str, model: &VorticityModel, s: f64, n_q: usize, n_p: usize) -> Vec<WaveSolution> {
    let k = dispersion::bifurcation_wavenumber(model, s).unwrap();
    let grid = WaveGrid::new(2.0 * PI / k, n_q, n_p).unwrap();
    let branch = continue_in_amplitude(model, s, &grid, 0.05, 5).unwrap();
    assert!(branch.stop_reason.is_none(), "{label}: {:?}", branch.stop_reason);
    branch.solutions
}

fn desk_branches() -> Vec<BranchRun> {
    [
        ("irrotational s=0.9", VorticityModel::irrotational(), 0.9),
        ("constant vorticity b=1 s=0.36", VorticityModel::constant(-1.0).unwrap(), 0.36),
    ]
    .into_iter()
    .map(|(label, m, s)| {
        let members = build_branch(label, &m, s, 128, 64);
        let reports = members.iter().map(|sol| verifier::full_report(sol).unwrap()).collect();
        BranchRun {
            label,
            members,
            reports,
        }
    })
    .collect()
}

fn check<'a>(report: &'a VerificationReport, name: &str) -> &'a verifier::Check {
    report.checks.iter().find(|c| c.name == name).unwrap()
}

fn branch_bounds(branches: &[BranchRun]) -> Outcome {
    let names = [
        "blc_lower",
        "blc_upper",
        "profile_min_above_d_minus",
        "profile_min_below_d_plus",
        "profile_max_above_d_plus",
    ];
    let mut fails = 0;
    let mut non_strict = Vec::new();
    let mut details = Vec::new();
    for b in branches {
        let mut min_margin = [f64::INFINITY; 2];
        for (sol, report) in b.members.iter().zip(&b.reports) {
            for name in names {
                let c = check(report, name);
                fails += usize::from(c.status == Status::Fail);
                if sol.amplitude.value > 0.0 && !c.strict {
                    non_strict.push(format!("{} a={} {name}", b.label, sol.amplitude.value));
                }
            }
            if sol.amplitude.value > 0.0 {
                min_margin[0] = min_margin[0].min(check(report, "blc_lower").margin);
                min_margin[1] = min_margin[1].min(check(report, "blc_upper").margin);
            }
        }
        details.push(format!(
            "{}: min FF - FF_- {:.2e}, min FF_+ - FF {:.2e}",
            b.label, min_margin[0], min_margin[1]
        ));
    }
    Outcome::new(
        fails == 0 && non_strict.is_empty(),
        format!("{} fails, non-strict for a>0: {non_strict:?}; {}", fails, details.join("; ")),
    )
}

fn flow_force_invariance(branches: &[BranchRun]) -> Outcome {
    let (mut dev, mut gap) = (0.0f64, 0.0f64);
    for b in branches {
        for sol in &b.members {
            let ff = flowforce::flow_force(sol).unwrap();
            dev = dev.max(ff.max_column_deviation / ff.ff.abs());
            gap = gap.max((flowforce::flow_force_physical(sol).unwrap() - ff.ff).abs());
        }
    }
    Outcome::new(
        dev < 1e-6 && gap < 1e-6,
        format!("max relative column deviation {dev:.2e}, hodograph vs physical {gap:.2e} (tol 1e-6)"),
    )
}

/// Gradient errors of Φ at the three probes of the 128-grid member, on square
/// grids of side 64, 128 and 256.
fn gradient_orders() -> (f64, usize, usize) {
    let mut worst = f64::INFINITY;
    let (mut compared, mut exact) = (0, 0);
    for (m, s) in [
        (VorticityModel::irrotational(), 0.9),
        (VorticityModel::constant(-1.0).unwrap(), 0.36),
    ] {
        let grids: Vec<Vec<WaveSolution>> =
            [64usize, 128, 256].iter().map(|&n| build_branch("square", &m, s, n, n)).collect();
        for k in 0..grids[0].len() {
            let pair = laminar::conjugate_streams(&m, grids[1][k].r).unwrap();
            for probe in [pair.s_minus, 0.5 * (pair.s_minus + pair.s_plus), pair.s_plus] {
                let errs: Vec<(f64, f64)> = grids
                    .iter()
                    .map(|g| {
                        let e = flux_gradient_check(&flux_function(&g[k], probe).unwrap(), &g[k]);
                        (e.max_err_q, e.max_err_p)
                    })
                    .collect();
                for (coarse, fine) in [(errs[1].0, errs[2].0), (errs[1].1, errs[2].1)] {
                    if coarse < verifier::GRADIENT_FLOOR && fine < verifier::GRADIENT_FLOOR {
                        exact += 1;
                        continue;
                    }
                    compared += 1;
                    let order = (coarse / fine).log2();
                    // The laminar member carries only the O(grid^2) defect of the
                    // discrete stream, which enters the flux quadratically, so its
                    // order may exceed 2. Waves must sit inside [1.8, 2.2].
                    let score = if k == 0 { order - 1.8 } else { (order - 1.8).min(2.2 - order) };
                    worst = worst.min(score);
                }
            }
        }
    }
    (worst, compared, exact)
}

fn flux_identities(branches: &[BranchRun]) -> Outcome {
    let mut identity = 0.0f64;
    let (mut kappa_pass, mut kappa_fail, mut kappa_skip) = (0, 0, 0);
    for b in branches {
        for report in &b.reports {
            for c in &report.checks {
                if c.name.starts_with("boundary_identity_") {
                    identity = identity.max(c.lhs);
                }
                if c.name.starts_with("flux_min_kappa_") || c.name.starts_with("flux_argmin_w_") {
                    match c.status {
                        Status::Pass => kappa_pass += 1,
                        Status::Fail => kappa_fail += 1,
                        Status::Inconclusive => kappa_skip += 1,
                    }
                }
            }
        }
    }
    let (worst, compared, exact) = gradient_orders();
    let pass = identity < 1e-6 && kappa_fail == 0 && kappa_pass > 0 && worst >= 0.0;
    Outcome::new(
        pass,
        format!(
            "identity residual {identity:.2e} (tol 1e-6); kappa checks {kappa_pass} pass, {kappa_fail} fail, \
             {kappa_skip} inconclusive (inf > 0); gradient orders on 128^2 -> 256^2: {compared} compared, \
             {exact} exact, worst shortfall {:.3} (waves in [1.8, 2.2], laminar member >= 1.8)",
            (-worst).max(0.0)
        ),
    )
}

fn near_solitary(l: f64) -> WaveSolution {
    let m = VorticityModel::irrotational();
    let s = dispersion::stream_for_wavenumber(&m, 2.0 * PI / l, None).unwrap();
    let n_q = ((l / 0.155 / 2.0).round() as usize) * 2;
    let grid = WaveGrid::new(l, n_q, 32).unwrap();
    let branch = continue_in_amplitude(&m, s, &grid, 0.2, 20).unwrap();
    assert!(branch.stop_reason.is_none(), "{:?}", branch.stop_reason);
    branch.solutions.last().unwrap().clone()
}

fn decay_of(sol: &WaveSolution) -> f64 {
    let pair = laminar::conjugate_streams(&sol.model, sol.r).unwrap();
    dispersion::decay_rate(&sol.model, pair.s_plus).unwrap()
}

fn solitary_asymptotics() -> Outcome {
    // λ₁ depends on r and so on L; one fixed-point pass per period.
    let mut lambda = decay_of(&near_solitary(20.0));
    let mut gaps = Vec::new();
    let mut last = None;
    for c in [30.0, 45.0, 60.0] {
        let mut sol = near_solitary(c / lambda);
        lambda = decay_of(&sol);
        sol = near_solitary(c / lambda);
        lambda = decay_of(&sol);
        let pair = laminar::conjugate_streams(&sol.model, sol.r).unwrap();
        gaps.push(flowforce::flow_force(&sol).unwrap().ff - pair.ff_minus);
        last = Some(sol);
    }
    let sol = last.unwrap();
    let decay = verifier::verify_decay_rate(&sol).unwrap();
    let blc = verifier::verify_benjamin_lighthill(&sol).unwrap();
    let shrinking = gaps.windows(2).all(|w| w[1].abs() < w[0].abs());
    let pass = decay.status == Status::Pass && shrinking && blc.iter().all(|c| c.status != Status::Fail);
    Outcome::new(
        pass,
        format!(
            "L lambda = 60: fitted decay {:.4} vs lambda {:.4} (tol 10%); FF - FF_- at L lambda = 30/45/60: {:.3e} / {:.3e} / {:.3e}",
            decay.lhs, decay.rhs, gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, title: &str, run: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{tag} {n:>2} {title}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
    };
    report(1, "irrotational closed forms", &irrotational_closed_forms);
    report(2, "constant-vorticity closed forms", &constant_vorticity_closed_forms);
    report(3, "conjugate-pair consistency", &conjugate_consistency);
    report(4, "sigma/kappa monotonicity", &sigma_kappa_monotonicity);
    report(5, "dispersion oracle", &dispersion_oracle);
    report(6, "solver order and Newton rate", &solver_order);
    let branches = desk_branches();
    report(7, "flow-force and profile bounds along branches", &|| branch_bounds(&branches));
    report(8, "flow-force invariance", &|| flow_force_invariance(&branches));
    report(9, "flux identities", &|| flux_identities(&branches));
    report(10, "solitary asymptotics", &solitary_asymptotics);
    println!(
        "acceptance: {} of 10 criteria passed [{:.1}s]",
        10 - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
