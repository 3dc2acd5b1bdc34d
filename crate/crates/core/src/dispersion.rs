//! Principal eigenpair of the Sturm–Liouville problem
//!
//! ```text
//! -(φ_p / H_p³)_p = μ φ / H_p,   φ(0) = 0,   φ_p(1) = H_p³(1) φ(1)
//! ```
//!
//! on the stream H(·; s). A positive μ₁ (supercritical stream) gives the decay
//! rate `λ₁ = sqrt(μ₁)` of solitary tails; a negative μ₁ (subcritical stream)
//! gives the wavenumber `k = sqrt(-μ₁)` of small periodic waves.
//!
//! The operator is discretized in flux form: the coefficient `H_p⁻³` sits on
//! half-nodes, the weight `H_p⁻¹` is lumped onto nodes (half a cell at the
//! surface), and the Robin condition enters the last row through the weak
//! form. The discrete problem is symmetric tridiagonal after scaling by the
//! lumped mass.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laminar::{self, check_slip, radicand};
use crate::numerics::roots::brent;
use crate::vorticity::VorticityModel;

/// Smallest accepted number of nodes.
pub const MIN_NODES: usize = 64;
/// Node counts tried, in order, by [`converged_eigenpair`].
pub const REFINEMENT_LADDER: [usize; 5] = [129, 257, 513, 1025, 2049];

const RICHARDSON_RTOL: f64 = 1e-6;
const RICHARDSON_ATOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub s: f64,
    /// Principal eigenvalue, Richardson-extrapolated from `n` and `2n - 1`
    /// nodes.
    pub mu: f64,
    pub p_grid: Vec<f64>,
    /// Principal eigenfunction on `p_grid`.
    pub phi: Vec<f64>,
    pub lambda: Option<f64>,
    pub wavenumber: Option<f64>,
    pub n_nodes: usize,
    /// |Richardson(n, 2n) - Richardson(2n, 4n)|.
    pub richardson_gap: f64,
}

/// Symmetric tridiagonal pencil reduced to standard form `A = M^(-1/2) K M^(-1/2)`.
struct Pencil {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// sqrt of the lumped mass, to map eigenvectors back.
    mass_sqrt: Vec<f64>,
}

fn assemble(model: &VorticityModel, s: f64, intervals: usize) -> Pencil {
    let dp = 1.0 / intervals as f64;
    let n = intervals;
    // Unknowns are nodes 1..=N.
    let coef = |p: f64| {
        let rad = radicand(model, s, p);
        rad * rad.sqrt()
    };
    let weight = |p: f64| radicand(model, s, p).sqrt();
    let half: Vec<f64> = (0..n).map(|j| coef((j as f64 + 0.5) * dp)).collect();
    let mut k_diag = vec![0.0; n];
    let mut k_off = vec![0.0; n.saturating_sub(1)];
    let mut mass = vec![0.0; n];
    for m in 0..n {
        let j = m + 1;
        let p = j as f64 * dp;
        if j < n {
            k_diag[m] = (half[j - 1] + half[j]) / dp;
            k_off[m] = -half[j] / dp;
            mass[m] = weight(p) * dp;
        } else {
            k_diag[m] = half[j - 1] / dp - 1.0;
            mass[m] = 0.5 * weight(p) * dp;
        }
    }
    let mass_sqrt: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
    let diag = k_diag
        .iter()
        .zip(&mass)
        .map(|(k, m)| k / m)
        .collect();
    let off = k_off
        .iter()
        .enumerate()
        .map(|(m, k)| k / (mass_sqrt[m] * mass_sqrt[m + 1]))
        .collect();
    Pencil {
        diag,
        off,
        mass_sqrt,
    }
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        d = diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue (0-based) by Sturm bisection.
fn bisect_eigenvalue(diag: &[f64], off: &[f64], index: usize) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse iteration with a shift just below the smallest eigenvalue, so the
/// shifted matrix is positive definite and the Thomas algorithm is stable.
fn principal_vector(diag: &[f64], off: &[f64], mu: f64) -> Vec<f64> {
    let n = diag.len();
    let spread = diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let shift = mu - 1e-9 * spread.max(1.0);
    let mut x = vec![1.0; n];
    for _ in 0..4 {
        // Thomas algorithm on (A - shift I) y = x.
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut denom = diag[0] - shift;
        c[0] = if n > 1 { off[0] / denom } else { 0.0 };
        y[0] = x[0] / denom;
        for i in 1..n {
            denom = diag[i] - shift - off[i - 1] * c[i - 1];
            if i + 1 < n {
                c[i] = off[i] / denom;
            }
            y[i] = (x[i] - off[i - 1] * y[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    x
}

fn smallest_eigenvalue(model: &VorticityModel, s: f64, intervals: usize) -> f64 {
    let pencil = assemble(model, s, intervals);
    bisect_eigenvalue(&pencil.diag, &pencil.off, 0)
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Principal eigenpair on `n_nodes` uniform nodes, with the eigenvalue
/// extrapolated from `n_nodes` and `2 n_nodes - 1` nodes and checked against
/// one further refinement.
pub fn principal_eigenpair(model: &VorticityModel, s: f64, n_nodes: usize) -> Result<EigenResult> {
    check_slip(model, s)?;
    if n_nodes < MIN_NODES {
        return Err(Error::Invalid(format!(
            "eigenproblem needs at least {MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    let intervals = n_nodes - 1;
    let pencil = assemble(model, s, intervals);
    let mu_n = bisect_eigenvalue(&pencil.diag, &pencil.off, 0);
    let mu_2n = smallest_eigenvalue(model, s, 2 * intervals);
    let mu_4n = smallest_eigenvalue(model, s, 4 * intervals);
    let mu = richardson(mu_n, mu_2n);
    let check = richardson(mu_2n, mu_4n);
    let gap = (mu - check).abs();
    if !(gap <= RICHARDSON_RTOL * check.abs() + RICHARDSON_ATOL) {
        return Err(Error::Convergence(format!(
            "principal eigenvalue at s = {s} not converged: {mu} vs {check} on refinement"
        )));
    }

    let x = principal_vector(&pencil.diag, &pencil.off, mu_n);
    let mut phi = Vec::with_capacity(n_nodes);
    phi.push(0.0);
    phi.extend(x.iter().zip(&pencil.mass_sqrt).map(|(v, m)| v / m));
    let top = phi[n_nodes - 1];
    let scale = if top.abs() > 1e-8 {
        top
    } else {
        let peak = phi.iter().fold(0.0f64, |a, v| if v.abs() > a.abs() { *v } else { a });
        peak
    };
    for v in phi.iter_mut() {
        *v /= scale;
    }
    let p_grid = (0..n_nodes).map(|j| j as f64 / intervals as f64).collect();
    Ok(EigenResult {
        s,
        mu,
        p_grid,
        phi,
        lambda: (mu > 0.0).then(|| mu.sqrt()),
        wavenumber: (mu < 0.0).then(|| (-mu).sqrt()),
        n_nodes,
        richardson_gap: gap,
    })
}

/// The `count` smallest eigenvalues on `n_nodes` nodes (no extrapolation).
pub fn leading_eigenvalues(
    model: &VorticityModel,
    s: f64,
    n_nodes: usize,
    count: usize,
) -> Result<Vec<f64>> {
    check_slip(model, s)?;
    if n_nodes < MIN_NODES {
        return Err(Error::Invalid(format!(
            "eigenproblem needs at least {MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    let pencil = assemble(model, s, n_nodes - 1);
    Ok((0..count.min(n_nodes - 1))
        .map(|i| bisect_eigenvalue(&pencil.diag, &pencil.off, i))
        .collect())
}

/// [`principal_eigenpair`] on the first grid of [`REFINEMENT_LADDER`] that
/// passes the refinement check.
pub fn converged_eigenpair(model: &VorticityModel, s: f64) -> Result<EigenResult> {
    let mut last = None;
    for n in REFINEMENT_LADDER {
        match principal_eigenpair(model, s, n) {
            Ok(e) => return Ok(e),
            Err(e @ Error::Convergence(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("ladder is not empty"))
}

/// Decay rate `λ₁ = sqrt(μ₁)` of a supercritical stream.
pub fn decay_rate(model: &VorticityModel, s: f64) -> Result<f64> {
    let e = converged_eigenpair(model, s)?;
    e.lambda.ok_or_else(|| {
        Error::Regime(format!(
            "stream s = {s} is critical or subcritical (μ₁ = {}); no decay rate",
            e.mu
        ))
    })
}

/// Wavenumber `k = sqrt(-μ₁)` of linear periodic waves on a subcritical stream.
pub fn bifurcation_wavenumber(model: &VorticityModel, s: f64) -> Result<f64> {
    let e = converged_eigenpair(model, s)?;
    e.wavenumber.ok_or_else(|| {
        Error::Regime(format!(
            "stream s = {s} is critical or supercritical (μ₁ = {}); no periodic wavenumber",
            e.mu
        ))
    })
}

fn extrapolated_mu(model: &VorticityModel, s: f64) -> f64 {
    converged_eigenpair(model, s).map(|e| e.mu).unwrap_or(f64::NAN)
}

/// The subcritical slip whose linear wavenumber is `k`.
///
/// `r_hint`, when it admits a conjugate pair, supplies `s_-(r_hint)` as an
/// extra bracketing candidate.
pub fn stream_for_wavenumber(model: &VorticityModel, k: f64, r_hint: Option<f64>) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Invalid(format!("wavenumber must be positive, got {k}")));
    }
    let family = laminar::StreamFamily::new(model.clone())?;
    let rc = family.regime();
    let target = -k * k;
    let g = |s: f64| extrapolated_mu(model, s) - target;

    // g > 0 near s_c; walk toward s_0 until g < 0.
    let mut hi = rc.s_c;
    let mut lo = None;
    if let Some(r) = r_hint {
        if let Ok(pair) = family.conjugate(r) {
            if g(pair.s_minus) < 0.0 {
                lo = Some(pair.s_minus);
            } else {
                hi = pair.s_minus;
            }
        }
    }
    if lo.is_none() {
        let width = hi - rc.s_0;
        for j in 1..=60 {
            let s = rc.s_0 + width * 0.5f64.powi(j);
            if s <= rc.s_0 {
                break;
            }
            if g(s) < 0.0 {
                lo = Some(s);
                break;
            }
            hi = s;
        }
    }
    let lo = lo.ok_or_else(|| {
        Error::NoRoot(format!(
            "wavenumber {k} exceeds the wavenumbers attainable on (s_0, s_c) = ({}, {})",
            rc.s_0, rc.s_c
        ))
    })?;
    brent(g, lo, hi, 1e-12, 200)
}
