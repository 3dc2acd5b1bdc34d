//! Laminar (stream) solutions H(p; s) and the maps s -> d(s), s -> R(s).
//!
//! A stream solution is parameterized by its relative speed `s` at the bottom.
//! It exists for `s > s_0`, has depth
//!
//! ```text
//! d(s) = ∫₀¹ (s² - 2Ω(p))^(-1/2) dp
//! ```
//!
//! and Bernoulli constant `R(s) = s²/2 - Ω(1) + d(s)`. `R` decreases from
//! `R_0` to `R_c = R(s_c)` on `(s_0, s_c)` and increases to infinity beyond
//! the critical slip `s_c`, defined by `∫₀¹ (s² - 2Ω)^(-3/2) = 1`. For
//! `R_c < r < R_0` the equation `R(s) = r` has exactly two roots
//! `s_- < s_c < s_+`, the conjugate streams.

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_default;
use crate::numerics::roots::brent;
use crate::vorticity::VorticityModel;

/// Values above this are treated as divergent when they are still growing.
pub const INFINITY_THRESHOLD: f64 = 1e8;

/// Default number of nodes of a [`StreamSolution`].
pub const DEFAULT_PROFILE_NODES: usize = 257;

const ROOT_XTOL: f64 = 1e-14;
const ROOT_MAX_ITER: usize = 200;
const MAX_HALVINGS: i32 = 64;

/// A laminar flow sampled on a uniform `p` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSolution {
    pub s: f64,
    pub p_grid: Vec<f64>,
    /// H(p_j; s)
    pub h: Vec<f64>,
    /// H_p(p_j; s) = (s² - 2Ω(p_j))^(-1/2)
    pub h_p: Vec<f64>,
    pub depth: f64,
    pub bernoulli: f64,
}

/// Constants that organize the family of stream solutions. `d_0` and `R_0`
/// may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeConstants {
    pub s_0: f64,
    pub s_c: f64,
    pub r_c: f64,
    pub d_0: f64,
    pub r_0: f64,
}

/// The two laminar flows sharing a Bernoulli constant `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePair {
    pub r: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    /// Supercritical depth d(s_plus).
    pub d_minus: f64,
    /// Subcritical depth d(s_minus).
    pub d_plus: f64,
    /// Flow force of the supercritical stream, σ(s_plus; r).
    pub ff_minus: f64,
    /// Flow force of the subcritical stream, σ(s_minus; r).
    pub ff_plus: f64,
    pub regime: RegimeConstants,
}

pub(crate) fn check_slip(model: &VorticityModel, s: f64) -> Result<()> {
    let s0 = model.slip_lower_bound();
    if s.is_finite() && s > s0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "slip s = {s} must exceed s_0 = {s0} (unidirectionality)"
        )))
    }
}

/// `s² - 2Ω(p)`, the squared relative speed along the streamline `p`.
pub(crate) fn radicand(model: &VorticityModel, s: f64, p: f64) -> f64 {
    s * s - 2.0 * model.big_omega_at(p)
}

/// H_p(p; s) at a point known to lie in `[0, 1]`.
pub(crate) fn stream_hp(model: &VorticityModel, s: f64, p: f64) -> f64 {
    1.0 / radicand(model, s, p).sqrt()
}

/// ∫ₐᵇ f(s² - 2Ω(p), p) dp, split at the maximizer of Ω where the integrand
/// concentrates as `s -> s_0`.
pub(crate) fn slip_integral<F>(model: &VorticityModel, s: f64, a: f64, b: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let g = |p: f64| {
        let rad = radicand(model, s, p);
        if rad > 0.0 {
            f(rad, p)
        } else {
            f64::NAN
        }
    };
    let p_star = model.peak().p_star;
    let result = if p_star > a && p_star < b {
        integrate_default(g, a, p_star).and_then(|l| Ok(l + integrate_default(g, p_star, b)?))
    } else {
        integrate_default(g, a, b)
    };
    result.map_err(|e| match e {
        Error::Quadrature { .. } => Error::Domain(format!(
            "stream integrand at s = {s} is not resolvable on [{a}, {b}] ({e})"
        )),
        other => other,
    })
}

/// d(s), the depth of the stream with bottom slip `s`.
pub fn depth(model: &VorticityModel, s: f64) -> Result<f64> {
    check_slip(model, s)?;
    slip_integral(model, s, 0.0, 1.0, |rad, _| 1.0 / rad.sqrt())
}

/// ∫₀¹ H_p³ dp = ∫₀¹ (s² - 2Ω)^(-3/2) dp; equals one at the critical slip.
pub fn cubic_moment(model: &VorticityModel, s: f64) -> Result<f64> {
    check_slip(model, s)?;
    slip_integral(model, s, 0.0, 1.0, |rad, _| 1.0 / (rad * rad.sqrt()))
}

/// H(p; s) for a single `p`.
pub fn stream_height(model: &VorticityModel, s: f64, p: f64) -> Result<f64> {
    check_slip(model, s)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    slip_integral(model, s, 0.0, p, |rad, _| 1.0 / rad.sqrt())
}

/// H(p; s) on `n_nodes` uniform nodes, accumulated cell by cell so every
/// node value has quadrature accuracy.
pub fn stream_profile(model: &VorticityModel, s: f64, n_nodes: usize) -> Result<StreamSolution> {
    check_slip(model, s)?;
    if n_nodes < 3 {
        return Err(Error::Invalid(format!(
            "stream profile needs at least 3 nodes, got {n_nodes}"
        )));
    }
    let p_grid: Vec<f64> = (0..n_nodes)
        .map(|j| j as f64 / (n_nodes - 1) as f64)
        .collect();
    let h = cumulative_heights(model, s, &p_grid)?;
    let h_p = p_grid.iter().map(|&p| stream_hp(model, s, p)).collect();
    let depth = *h.last().unwrap();
    let bernoulli = 0.5 * s * s - model.big_omega_at(1.0) + depth;
    Ok(StreamSolution {
        s,
        p_grid,
        h,
        h_p,
        depth,
        bernoulli,
    })
}

/// H(p_j; s) at increasing nodes starting from `p = 0`.
pub(crate) fn cumulative_heights(model: &VorticityModel, s: f64, p: &[f64]) -> Result<Vec<f64>> {
    let mut h = Vec::with_capacity(p.len());
    let mut acc = slip_integral(model, s, 0.0, p[0], |rad, _| 1.0 / rad.sqrt())?;
    h.push(acc);
    for w in p.windows(2) {
        acc += slip_integral(model, s, w[0], w[1], |rad, _| 1.0 / rad.sqrt())?;
        h.push(acc);
    }
    Ok(h)
}

/// R(s) = s²/2 - Ω(1) + d(s).
pub fn bernoulli_of_slip(model: &VorticityModel, s: f64) -> Result<f64> {
    Ok(0.5 * s * s - model.big_omega_at(1.0) + depth(model, s)?)
}

/// The critical slip `s_c`, root of `∫₀¹ (s² - 2Ω)^(-3/2) = 1`.
pub fn critical_slip(model: &VorticityModel) -> Result<f64> {
    let s0 = model.slip_lower_bound();
    let scale = s0.max(1.0);
    let g = |s: f64| cubic_moment(model, s).map(|v| v - 1.0);

    let mut lo = s0 + scale;
    let mut hi = lo;
    if g(lo)? > 0.0 {
        let mut width = scale;
        loop {
            width *= 2.0;
            hi = s0 + width;
            if g(hi)? < 0.0 {
                break;
            }
            if !hi.is_finite() || width > 1e12 {
                return Err(Error::NoRoot("critical slip: moment never drops below one".into()));
            }
        }
    } else {
        let mut found = false;
        for k in 1..=MAX_HALVINGS {
            let s = s0 + scale * 0.5f64.powi(k);
            if s <= s0 {
                break;
            }
            match g(s) {
                Ok(v) if v > 0.0 => {
                    lo = s;
                    found = true;
                    break;
                }
                Ok(_) => hi = s,
                Err(_) => break,
            }
        }
        if !found {
            return Err(Error::NoRoot(format!(
                "critical slip: ∫(s² - 2Ω)^(-3/2) stays below one on (s_0, s_0 + {scale}]; \
                 R(s) is monotone and there is no subcritical regime"
            )));
        }
    }
    brent(
        |s| g(s).unwrap_or(f64::NAN),
        lo,
        hi,
        ROOT_XTOL,
        ROOT_MAX_ITER,
    )
}

/// Limit as `s -> s_0+` of `f(s)`, along `s_0 + scale 2^(-k)`.
///
/// Divergence is declared when values exceed [`INFINITY_THRESHOLD`] while
/// growing over three refinements, or when increments stop shrinking
/// (logarithmic growth). Convergent sequences are closed with a geometric
/// tail estimate.
pub(crate) fn limit_at_s0<F>(model: &VorticityModel, f: F) -> f64
where
    F: Fn(f64) -> Result<f64>,
{
    let s0 = model.slip_lower_bound();
    let scale = s0.max(1.0);
    let mut values: Vec<f64> = Vec::new();
    for k in 1..=MAX_HALVINGS {
        let s = s0 + scale * 0.5f64.powi(k);
        if s <= s0 {
            break;
        }
        let Ok(v) = f(s) else { break };
        values.push(v);
        let n = values.len();
        if n >= 4 {
            let growing = values[n - 4..].windows(2).all(|w| w[1] > w[0]);
            if v > INFINITY_THRESHOLD && growing {
                return f64::INFINITY;
            }
            let d1 = values[n - 1] - values[n - 2];
            let d2 = values[n - 2] - values[n - 3];
            if d1.abs() <= 1e-15 * v.abs().max(1.0) && d2.abs() <= 1e-13 * v.abs().max(1.0) {
                return v;
            }
        }
    }
    let n = values.len();
    if n < 4 {
        return values.last().copied().unwrap_or(f64::NAN);
    }
    let d1 = values[n - 1] - values[n - 2];
    let d2 = values[n - 2] - values[n - 3];
    let d3 = values[n - 3] - values[n - 4];
    let last = values[n - 1];
    if d1.abs() <= 1e-14 * last.abs().max(1.0) {
        return last;
    }
    let rho1 = d1 / d2;
    let rho2 = d2 / d3;
    if rho1 >= 0.95 && rho2 >= 0.95 && d1 > 0.0 {
        // Increments no longer shrink: logarithmic divergence.
        return f64::INFINITY;
    }
    if rho1 > 0.0 && rho1 < 0.95 {
        last + d1 * rho1 / (1.0 - rho1)
    } else {
        last
    }
}

/// `s_0`, `s_c`, `R_c`, and the limits `d_0`, `R_0` as `s -> s_0`.
pub fn regime_constants(model: &VorticityModel) -> Result<RegimeConstants> {
    let s_0 = model.slip_lower_bound();
    let s_c = critical_slip(model)?;
    let r_c = bernoulli_of_slip(model, s_c)?;
    let d_0 = limit_at_s0(model, |s| depth(model, s));
    let r_0 = if d_0.is_finite() {
        0.5 * s_0 * s_0 - model.big_omega_at(1.0) + d_0
    } else {
        f64::INFINITY
    };
    Ok(RegimeConstants {
        s_0,
        s_c,
        r_c,
        d_0,
        r_0,
    })
}

/// A vorticity model together with its regime constants, computed once.
#[derive(Debug, Clone)]
pub struct StreamFamily {
    model: VorticityModel,
    regime: RegimeConstants,
}

impl StreamFamily {
    pub fn new(model: VorticityModel) -> Result<Self> {
        let regime = regime_constants(&model)?;
        Ok(Self { model, regime })
    }

    pub fn model(&self) -> &VorticityModel {
        &self.model
    }

    pub fn regime(&self) -> RegimeConstants {
        self.regime
    }

    pub fn depth(&self, s: f64) -> Result<f64> {
        depth(&self.model, s)
    }

    pub fn bernoulli(&self, s: f64) -> Result<f64> {
        bernoulli_of_slip(&self.model, s)
    }

    /// Conjugate streams for the Bernoulli constant `r`.
    pub fn conjugate(&self, r: f64) -> Result<ConjugatePair> {
        let RegimeConstants {
            s_0,
            s_c,
            r_c,
            r_0,
            ..
        } = self.regime;
        if !(r > r_c && r < r_0) {
            return Err(Error::OutOfRange { r, r_c, r_0 });
        }
        let g = |s: f64| bernoulli_of_slip(&self.model, s).map(|v| v - r);

        // Subcritical root in (s_0, s_c): R decreases from R_0 to R_c.
        let mut lo = None;
        for k in 1..=MAX_HALVINGS {
            let s = s_0 + (s_c - s_0) * 0.5f64.powi(k);
            if s <= s_0 {
                break;
            }
            match g(s) {
                Ok(v) if v > 0.0 => {
                    lo = Some(s);
                    break;
                }
                Ok(_) => {}
                Err(_) => break,
            }
        }
        let lo = lo.ok_or_else(|| {
            Error::NoRoot(format!("no subcritical stream with R(s) = {r} near s_0"))
        })?;
        let s_minus = brent(
            |s| g(s).unwrap_or(f64::NAN),
            lo,
            s_c,
            ROOT_XTOL,
            ROOT_MAX_ITER,
        )?;

        // Supercritical root: widen from s_c until R exceeds r.
        let mut width = s_c.max(1.0);
        let mut hi = s_c + width;
        while g(hi)? < 0.0 {
            width *= 2.0;
            hi = s_c + width;
            if width > 1e12 {
                return Err(Error::NoRoot(format!("no supercritical stream with R(s) = {r}")));
            }
        }
        let s_plus = brent(
            |s| g(s).unwrap_or(f64::NAN),
            s_c,
            hi,
            ROOT_XTOL,
            ROOT_MAX_ITER,
        )?;

        Ok(ConjugatePair {
            r,
            s_minus,
            s_plus,
            d_minus: depth(&self.model, s_plus)?,
            d_plus: depth(&self.model, s_minus)?,
            ff_minus: diagnostics::sigma(&self.model, s_plus, r)?,
            ff_plus: diagnostics::sigma(&self.model, s_minus, r)?,
            regime: self.regime,
        })
    }
}

/// Conjugate streams for `r`; recomputes the regime constants.
pub fn conjugate_streams(model: &VorticityModel, r: f64) -> Result<ConjugatePair> {
    StreamFamily::new(model.clone())?.conjugate(r)
}
