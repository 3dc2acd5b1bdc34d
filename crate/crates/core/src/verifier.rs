//! Numeric checks of the flow-force bounds and their corollaries on a
//! converged wave, assembled into a report.
//!
//! Every check carries its raw values, a signed margin (positive means the
//! bound holds) and the tolerance it was judged against. A check fails only
//! when the margin is below `-tolerance`, i.e. when the numbers contradict
//! the bound rather than merely failing to show it strictly.

use serde::{Deserialize, Serialize};

use crate::diagnostics;
use crate::dispersion;
use crate::error::{Error, Result};
use crate::flowforce::{self, FlowForce, FluxField};
use crate::laminar::{self, ConjugatePair};
use crate::wavesolver::{self, WaveSolution};

/// Floor of the flow-force and profile tolerances.
pub const BOUND_FLOOR: f64 = 1e-8;
/// Multiple of the column deviation used as flow-force tolerance.
pub const COLUMN_FACTOR: f64 = 10.0;
/// Tolerance on the sign of `w` for the supercritical stream.
pub const W_SIGN_TOLERANCE: f64 = 1e-8;
/// Floor of the κ tolerance.
pub const KAPPA_FLOOR: f64 = 1e-6;
/// Multiple of the boundary-identity residual used as κ tolerance.
pub const KAPPA_FACTOR: f64 = 10.0;
/// Tolerance of the surface flux identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;
/// Minimum order of the gradient errors between difference strides 2 and 1.
pub const GRADIENT_MIN_ORDER: f64 = 1.5;
/// Gradient errors below this are treated as exact.
pub const GRADIENT_FLOOR: f64 = 1e-10;
/// Flux minima below this count as non-positive.
pub const KAPPA_ROUNDOFF: f64 = 1e-12;
/// Relative tolerance between the two flow-force evaluations.
pub const INVARIANCE_TOLERANCE: f64 = 1e-6;
/// Relative tolerance of the fitted decay rate.
pub const DECAY_RELATIVE: f64 = 0.1;
/// Tail samples must exceed this multiple of the solver tolerance.
pub const DECAY_SIGNAL_FACTOR: f64 = 1e3;
const DECAY_MIN_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed; positive when the bound holds.
    pub margin: f64,
    pub tolerance: f64,
    /// `margin > tolerance`: the inequality holds strictly beyond noise.
    pub strict: bool,
    pub note: String,
}

impl Check {
    fn judged(name: &str, lhs: f64, rhs: f64, margin: f64, tolerance: f64, note: String) -> Self {
        let status = if margin.is_nan() {
            Status::Inconclusive
        } else if margin >= -tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name: name.to_string(),
            status,
            lhs,
            rhs,
            margin,
            tolerance,
            strict: margin > tolerance,
            note,
        }
    }

    fn inconclusive(name: &str, note: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Inconclusive,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            tolerance: f64::NAN,
            strict: false,
            note: note.into(),
        }
    }

    fn with_values(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self
    }
}

/// Quantities of the solution the checks refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub r: f64,
    pub ff: f64,
    pub max_column_deviation: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub residual_norm: f64,
    pub s_minus: Option<f64>,
    pub s_plus: Option<f64>,
    pub d_minus: Option<f64>,
    pub d_plus: Option<f64>,
    pub ff_minus: Option<f64>,
    pub ff_plus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub summary: SolutionSummary,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    /// One line per check: name, status, lhs, rhs, margin, tolerance, note.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# name status lhs rhs margin tolerance note\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{} {} {:e} {:e} {:e} {:e} {}\n",
                c.name,
                c.status.as_str(),
                c.lhs,
                c.rhs,
                c.margin,
                c.tolerance,
                c.note
            ));
        }
        out
    }
}

/// Shared per-solution work, computed once per report.
struct Context<'a> {
    sol: &'a WaveSolution,
    ff: FlowForce,
    pair: std::result::Result<ConjugatePair, Error>,
    eta_min: f64,
    eta_max: f64,
    tol_scale: f64,
}

impl<'a> Context<'a> {
    fn new(sol: &'a WaveSolution, tol_scale: f64) -> Result<Self> {
        let ff = flowforce::flow_force(sol)?;
        let profile = wavesolver::surface_profile(sol);
        Ok(Self {
            sol,
            ff,
            pair: laminar::conjugate_streams(&sol.model, sol.r),
            eta_min: profile.min,
            eta_max: profile.max,
            tol_scale,
        })
    }

    fn bound_tolerance(&self) -> f64 {
        self.tol_scale * BOUND_FLOOR.max(COLUMN_FACTOR * self.ff.max_column_deviation)
    }

    fn pair(&self) -> std::result::Result<&ConjugatePair, String> {
        self.pair.as_ref().map_err(|e| format!("no conjugate streams: {e}"))
    }

    fn is_laminar(&self) -> bool {
        self.eta_max - self.eta_min <= self.bound_tolerance()
    }
}

fn blc_checks(cx: &Context) -> Vec<Check> {
    let pair = match cx.pair() {
        Ok(p) => p,
        Err(note) => {
            return vec![
                Check::inconclusive("blc_lower", note.clone()),
                Check::inconclusive("blc_upper", note),
            ]
        }
    };
    let tau = cx.bound_tolerance();
    let ff = cx.ff.ff;
    let lower = ff - pair.ff_minus;
    let upper = pair.ff_plus - ff;
    let note = |margin: f64, equality: &str| {
        if margin.abs() <= tau {
            format!("equality within tolerance ({equality})")
        } else {
            String::new()
        }
    };
    vec![
        Check::judged(
            "blc_lower",
            ff,
            pair.ff_minus,
            lower,
            tau,
            note(lower, "supercritical laminar or solitary limit"),
        ),
        Check::judged(
            "blc_upper",
            ff,
            pair.ff_plus,
            upper,
            tau,
            note(upper, "subcritical laminar"),
        ),
    ]
}

/// `FF_-(r) <= FF <= FF_+(r)` as a lower and an upper check.
pub fn verify_benjamin_lighthill(sol: &WaveSolution) -> Result<Vec<Check>> {
    Ok(blc_checks(&Context::new(sol, 1.0)?))
}

fn profile_checks(cx: &Context) -> Vec<Check> {
    let names = ["profile_min_above_d_minus", "profile_min_below_d_plus", "profile_max_above_d_plus"];
    let pair = match cx.pair() {
        Ok(p) => p,
        Err(note) => return names.iter().map(|n| Check::inconclusive(n, note.clone())).collect(),
    };
    let tau = cx.bound_tolerance();
    let (lo, hi) = (cx.eta_min, cx.eta_max);
    let mut checks = vec![
        Check::judged(names[0], lo, pair.d_minus, lo - pair.d_minus, tau, String::new()),
        Check::judged(names[1], lo, pair.d_plus, pair.d_plus - lo, tau, String::new()),
        Check::judged(names[2], hi, pair.d_plus, hi - pair.d_plus, tau, String::new()),
    ];
    if cx.is_laminar() {
        if (lo - pair.d_plus).abs() <= tau {
            for c in &mut checks[1..] {
                c.note = "laminar: min = max = d_+(r)".into();
            }
        } else if (lo - pair.d_minus).abs() <= tau {
            checks[0].note = "laminar: min = max = d_-(r)".into();
            for c in &mut checks[1..] {
                let (lhs, rhs) = (c.lhs, c.rhs);
                *c = Check::inconclusive(&c.name, "not applicable to the supercritical laminar flow")
                    .with_values(lhs, rhs);
            }
        }
    }
    checks
}

/// `d_-(r) < min η <= d_+(r) <= max η`.
pub fn verify_profile_bounds(sol: &WaveSolution) -> Result<Vec<Check>> {
    Ok(profile_checks(&Context::new(sol, 1.0)?))
}

/// Parabolic refinement of the discrete minimum of a periodic trace.
/// Returns the minimum value and its fractional index.
fn refined_minimum(trace: &[f64]) -> (f64, f64) {
    let n = trace.len();
    let (i, m) = trace
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let (a, c) = (trace[(i + n - 1) % n], trace[(i + 1) % n]);
    let curvature = a - 2.0 * m + c;
    if curvature > 0.0 {
        let shift = 0.5 * (a - c) / curvature;
        (m - (c - a) * (c - a) / (8.0 * curvature), i as f64 + shift)
    } else {
        (m, i as f64)
    }
}

fn periodic_linear(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let base = x.floor();
    let t = x - base;
    let i = (base as isize).rem_euclid(n as isize) as usize;
    (1.0 - t) * values[i] + t * values[(i + 1) % n]
}

fn kappa_check(sol: &WaveSolution, flux: &FluxField, identity: f64, tol_scale: f64) -> Result<Vec<Check>> {
    let s = flux.s;
    let name = "flux_min_kappa";
    let (m, x) = refined_minimum(&flux.top_trace);
    let n = sol.grid.n_q;
    let column = (x.round() as isize).rem_euclid(n as isize) as usize;
    if m > KAPPA_ROUNDOFF {
        let kappa = diagnostics::kappa(&sol.model, s, sol.r, flux.ff)?;
        return Ok(vec![Check::inconclusive(
            name,
            format!("s = {s}: min of the surface trace is positive, hypothesis inf <= 0 fails"),
        )
        .with_values(m, kappa)]);
    }
    let kappa = diagnostics::kappa(&sol.model, s, sol.r, flux.ff_columns[column])?;
    let tau = tol_scale * KAPPA_FLOOR.max(KAPPA_FACTOR * identity);
    let note = format!("s = {s}, argmin q = {:.6}", x * sol.grid.dq());
    let main = Check::judged(name, m, kappa, -(m - kappa).abs(), tau, note.clone());

    let top = sol.grid.n_p - 1;
    let w_top: Vec<f64> = (0..n).map(|i| flux.w[[i, top]]).collect();
    let w_star = periodic_linear(&w_top, x);
    let target = sol.r - laminar::bernoulli_of_slip(&sol.model, s)?;
    let w_tol = 2.0 * tau.sqrt();
    let gap = (w_star - target).abs();
    let argmin = Check::judged("flux_argmin_w", w_star, target, -gap, w_tol, note);
    Ok(vec![main, argmin])
}

/// Minimum of the surface trace of Φ^(s) against κ(s; r, FF).
///
/// When the minimum is positive the hypothesis of the comparison fails and
/// the check is inconclusive. Otherwise κ is evaluated with the flow force of
/// the minimizing column, and a second check compares `w(q*, 1)` with
/// `r - R(s)`.
pub fn verify_flux_min_kappa(sol: &WaveSolution, s: f64) -> Result<Vec<Check>> {
    if s <= sol.model.slip_lower_bound() {
        return Err(Error::Domain(format!(
            "s = {s} must exceed s_0 = {}",
            sol.model.slip_lower_bound()
        )));
    }
    let flux = flowforce::flux_function(sol, s)?;
    let identity = flowforce::boundary_identity_residual(sol, &flux)?;
    kappa_check(sol, &flux, identity, 1.0)
}

fn w_sign_check(cx: &Context) -> Check {
    let name = "w_sign_supercritical";
    let pair = match cx.pair() {
        Ok(p) => p,
        Err(note) => return Check::inconclusive(name, note),
    };
    match flowforce::w_field(cx.sol, pair.s_plus) {
        Ok(w) => {
            let min = w.iter().copied().fold(f64::INFINITY, f64::min);
            Check::judged(
                name,
                min,
                0.0,
                min,
                cx.tol_scale * W_SIGN_TOLERANCE,
                format!("s_+ = {}", pair.s_plus),
            )
        }
        Err(e) => Check::inconclusive(name, e.to_string()),
    }
}

/// `w^(s_+) >= 0` at every node.
pub fn verify_w_sign(sol: &WaveSolution) -> Result<Check> {
    Ok(w_sign_check(&Context::new(sol, 1.0)?))
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fitted exponential decay of `η - d_-(r)` away from the crest, against
/// λ₁ of the supercritical stream.
///
/// The fit uses offsets from the crest in `[L/8, 3L/8]` on both sides,
/// keeping samples with `|η - d_-| > 1e3 × solver tolerance`.
pub fn verify_decay_rate(sol: &WaveSolution) -> Result<Check> {
    let name = "decay_rate";
    if !sol.near_solitary {
        return Ok(Check::inconclusive(name, "solution is not flagged near-solitary"));
    }
    let pair = match laminar::conjugate_streams(&sol.model, sol.r) {
        Ok(p) => p,
        Err(e) => return Ok(Check::inconclusive(name, format!("no conjugate streams: {e}"))),
    };
    let lambda = dispersion::decay_rate(&sol.model, pair.s_plus)?;
    let profile = wavesolver::surface_profile(sol);
    let n = sol.grid.n_q;
    let crest = profile
        .eta
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    let floor = DECAY_SIGNAL_FACTOR * wavesolver::TOLERANCE;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in n / 8..=3 * n / 8 {
        for i in [(crest + k) % n, (crest + n - k) % n] {
            let gap = (profile.eta[i] - pair.d_minus).abs();
            if gap > floor {
                xs.push(k as f64 * sol.grid.dq());
                ys.push(gap.ln());
            }
        }
    }
    if xs.len() < 2 * DECAY_MIN_POINTS {
        return Ok(Check::inconclusive(
            name,
            format!("only {} tail samples above {floor:e}", xs.len()),
        )
        .with_values(f64::NAN, lambda));
    }
    let rate = -slope(&xs, &ys);
    let tol = DECAY_RELATIVE * lambda;
    Ok(Check::judged(
        name,
        rate,
        lambda,
        -(rate - lambda).abs(),
        tol,
        format!("L lambda = {:.2}, {} samples", sol.grid.period * lambda, xs.len()),
    ))
}

fn identity_checks(cx: &Context, probes: Option<&[f64]>) -> Vec<Check> {
    let mut checks = Vec::new();
    let probes: Vec<(String, f64)> = match probes {
        Some(list) => list.iter().enumerate().map(|(k, &s)| (format!("probe{k}"), s)).collect(),
        None => match cx.pair() {
            Ok(p) => vec![
                ("s_minus".into(), p.s_minus),
                ("midpoint".into(), 0.5 * (p.s_minus + p.s_plus)),
                ("s_plus".into(), p.s_plus),
            ],
            Err(note) => {
                checks.push(Check::inconclusive("flux_identities", note));
                return checks;
            }
        },
    };
    for (label, s) in probes {
        let flux = match flowforce::flux_function(cx.sol, s) {
            Ok(f) => f,
            Err(e) => {
                checks.push(Check::inconclusive(&format!("flux_{label}"), e.to_string()));
                continue;
            }
        };
        let note = format!("s = {s}");
        match flowforce::boundary_identity_residual(cx.sol, &flux) {
            Ok(res) => {
                let tol = cx.tol_scale * IDENTITY_TOLERANCE;
                checks.push(Check::judged(
                    &format!("boundary_identity_{label}"),
                    res,
                    0.0,
                    -res,
                    tol,
                    note.clone(),
                ));
                match kappa_check(cx.sol, &flux, res, cx.tol_scale) {
                    Ok(ks) => checks.extend(ks.into_iter().map(|mut c| {
                        c.name = format!("{}_{label}", c.name);
                        c
                    })),
                    Err(e) => checks.push(Check::inconclusive(&format!("flux_min_kappa_{label}"), e.to_string())),
                }
            }
            Err(e) => checks.push(Check::inconclusive(&format!("boundary_identity_{label}"), e.to_string())),
        }
        checks.push(gradient_check(&flux, cx.sol, &format!("gradient_identity_{label}"), &note));
    }
    checks
}

/// Observed order of the gradient errors between strides 2 and 1 on the
/// same field; margin is `order - GRADIENT_MIN_ORDER`.
fn gradient_check(flux: &FluxField, sol: &WaveSolution, name: &str, note: &str) -> Check {
    let fine = flowforce::flux_gradient_check(flux, sol);
    let coarse = flowforce::flux_gradient_check_strided(flux, sol, 2);
    let pairs = [(fine.max_err_q, coarse.max_err_q), (fine.max_err_p, coarse.max_err_p)];
    let order = pairs
        .iter()
        .filter(|(f, _)| *f > GRADIENT_FLOOR)
        .map(|(f, c)| (c / f).log2())
        .fold(f64::INFINITY, f64::min);
    let note = format!("{note}, q error {:e}, p error {:e}", fine.max_err_q, fine.max_err_p);
    if order.is_infinite() {
        return Check::judged(name, fine.max_err_q.max(fine.max_err_p), 0.0, 0.0, GRADIENT_FLOOR, note);
    }
    Check::judged(name, order, 2.0, order - GRADIENT_MIN_ORDER, 0.0, note)
}

fn invariance_check(cx: &Context) -> Check {
    let name = "flow_force_coordinate_invariance";
    match flowforce::flow_force_physical(cx.sol) {
        Ok(phys) => {
            let gap = (phys - cx.ff.ff).abs();
            Check::judged(
                name,
                cx.ff.ff,
                phys,
                -gap,
                cx.tol_scale * INVARIANCE_TOLERANCE * cx.ff.ff.abs().max(1.0),
                String::new(),
            )
        }
        Err(e) => Check::inconclusive(name, e.to_string()),
    }
}

fn column_check(cx: &Context) -> Check {
    let dev = cx.ff.max_column_deviation;
    let rel = dev / cx.ff.ff.abs().max(f64::MIN_POSITIVE);
    Check::judged(
        "flow_force_column_deviation",
        rel,
        0.0,
        -rel,
        cx.tol_scale * INVARIANCE_TOLERANCE,
        format!("absolute {dev:e}"),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    /// Slips at which the flux identities are probed; `None` means
    /// `s_-(r)`, `s_+(r)` and their midpoint.
    pub s_probes: Option<Vec<f64>>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            tol_scale: 1.0,
            s_probes: None,
        }
    }
}

/// All checks. Errors inside individual checks become inconclusive entries.
pub fn full_report_with(sol: &WaveSolution, options: &ReportOptions) -> Result<VerificationReport> {
    let tol_scale = options.tol_scale;
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Error::Invalid(format!("tolerance scale must be positive, got {tol_scale}")));
    }
    let cx = Context::new(sol, tol_scale)?;
    let mut checks = Vec::new();
    checks.extend(blc_checks(&cx));
    checks.extend(profile_checks(&cx));
    checks.push(w_sign_check(&cx));
    checks.extend(identity_checks(&cx, options.s_probes.as_deref()));
    checks.push(invariance_check(&cx));
    checks.push(column_check(&cx));
    checks.push(match verify_decay_rate(sol) {
        Ok(c) if c.status != Status::Inconclusive => {
            Check::judged(&c.name, c.lhs, c.rhs, c.margin, c.tolerance * tol_scale, c.note)
        }
        Ok(c) => c,
        Err(e) => Check::inconclusive("decay_rate", e.to_string()),
    });

    let pair = cx.pair.as_ref().ok();
    Ok(VerificationReport {
        summary: SolutionSummary {
            r: sol.r,
            ff: cx.ff.ff,
            max_column_deviation: cx.ff.max_column_deviation,
            eta_min: cx.eta_min,
            eta_max: cx.eta_max,
            residual_norm: sol.residual_norm,
            s_minus: pair.map(|p| p.s_minus),
            s_plus: pair.map(|p| p.s_plus),
            d_minus: pair.map(|p| p.d_minus),
            d_plus: pair.map(|p| p.d_plus),
            ff_minus: pair.map(|p| p.ff_minus),
            ff_plus: pair.map(|p| p.ff_plus),
        },
        checks,
    })
}

pub fn full_report(sol: &WaveSolution) -> Result<VerificationReport> {
    full_report_with(sol, &ReportOptions::default())
}
