//! Flow force of a wave and the flow force flux function Φ^(s).
//!
//! In height variables the flow force of a column is
//!
//! ```text
//! FF = ∫₀¹ ( (1 - h_q²)/(2h_p²) - h - Ω + Ω(1) + r ) h_p dp,
//! ```
//!
//! constant in `q` for exact solutions. With `w = h - H(·; s)` the flux
//! function
//!
//! ```text
//! Φ^(s)(q, p) = ∫₀^p ( w_p²/(h_p H_p²) - w_q²/h_p ) dp'
//! ```
//!
//! vanishes on the bed and equals `2(FF - σ(s; r)) - 2(r - R(s)) w + w²` on
//! the surface.
//!
//! Derivatives and column integrals here use sixth-order stencils on the
//! converged grid field, so that post-processing error stays well below the
//! solver's own discretization error.

use ndarray::Array2;
use serde::Serialize;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::laminar::{self, check_slip};
use crate::numerics::roots;
use crate::numerics::stencil::{CellQuadrature, PeriodicDerivative, UniformDerivative};
use crate::wavesolver::{WaveSolution, EPS_UNI};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowForce {
    /// Mean over columns.
    pub ff: f64,
    pub max_column_deviation: f64,
    pub columns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub s: f64,
    pub phi: Array2<f64>,
    pub w: Array2<f64>,
    pub top_trace: Vec<f64>,
    /// Flow force of the solution (column mean).
    pub ff: f64,
    /// Flow force of each column.
    pub ff_columns: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientErrors {
    pub max_err_q: f64,
    pub max_err_p: f64,
    /// Largest closed-form gradient component.
    pub scale: f64,
}

/// Derivatives at every node, with `h_p = H_p + D(h - H)` for a reference
/// stream H so that stencils only see the smoother remainder.
struct Fields {
    hp: Array2<f64>,
    hq: Array2<f64>,
    stream: laminar::StreamSolution,
}

fn fields(sol: &WaveSolution, s_ref: f64) -> Result<Fields> {
    let grid = sol.grid;
    let (n_q, n_p) = (grid.n_q, grid.n_p);
    let stream = laminar::stream_profile(&sol.model, s_ref, n_p)?;
    let dp_op = UniformDerivative::new(n_p, grid.dp());
    let dq_op = PeriodicDerivative::new(grid.dq());
    let mut hp = Array2::zeros((n_q, n_p));
    let mut hq = Array2::zeros((n_q, n_p));
    for i in 0..n_q {
        let w: Vec<f64> = (0..n_p).map(|j| sol.h[[i, j]] - stream.h[j]).collect();
        for j in 0..n_p {
            let v = stream.h_p[j] + dp_op.at(&w, j);
            if !(v > EPS_UNI) {
                return Err(Error::Degenerate {
                    i,
                    j,
                    value: v,
                    threshold: EPS_UNI,
                });
            }
            hp[[i, j]] = v;
            hq[[i, j]] = dq_op.at(n_q, i, |m| sol.h[[m, j]]);
        }
    }
    Ok(Fields { hp, hq, stream })
}

/// Slip of the stream whose depth matches the mean surface height, or the
/// nearest admissible slip when no stream is that deep.
pub(crate) fn reference_slip(sol: &WaveSolution) -> Result<f64> {
    let top = sol.grid.n_p - 1;
    let target = sol.h.column(top).mean().unwrap_or(0.0);
    let s_0 = sol.model.slip_lower_bound();
    let lo = s_0 + 1e-6 * s_0.max(1.0);
    let f = |s: f64| laminar::depth(&sol.model, s).map(|d| d - target);
    if !(f(lo)? > 0.0) {
        return Ok(lo);
    }
    let mut hi = (2.0 * s_0).max(1.0);
    while f(hi)? > 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Invalid(format!("no stream of depth {target}")));
        }
    }
    roots::brent(|s| f(s).unwrap_or(f64::NAN), lo, hi, 1e-14, 200)
}

fn big_omega_nodes(sol: &WaveSolution) -> Vec<f64> {
    (0..sol.grid.n_p).map(|j| sol.model.big_omega_at(sol.grid.p(j))).collect()
}

fn summarize(columns: Vec<f64>) -> FlowForce {
    let ff = columns.iter().sum::<f64>() / columns.len() as f64;
    let max_column_deviation = columns.iter().fold(0.0f64, |a, c| a.max((c - ff).abs()));
    FlowForce {
        ff,
        max_column_deviation,
        columns,
    }
}

/// Column flow forces as σ(s_ref; r), the flow force of the reference
/// stream, plus the quadrature of the integrand difference.
fn column_flow_forces(sol: &WaveSolution, f: &Fields) -> Result<Vec<f64>> {
    let grid = sol.grid;
    let big_omega = big_omega_nodes(sol);
    let omega_top = big_omega[grid.n_p - 1];
    let quad = CellQuadrature::new(grid.n_p, grid.dp());
    let base = diagnostics::sigma(&sol.model, f.stream.s, sol.r)?;
    let integrand = |hp: f64, hq: f64, h: f64, j: usize| {
        ((1.0 - hq * hq) / (2.0 * hp * hp) - h - big_omega[j] + omega_top + sol.r) * hp
    };
    Ok((0..grid.n_q)
        .map(|i| {
            let g: Vec<f64> = (0..grid.n_p)
                .map(|j| {
                    integrand(f.hp[[i, j]], f.hq[[i, j]], sol.h[[i, j]], j)
                        - integrand(f.stream.h_p[j], 0.0, f.stream.h[j], j)
                })
                .collect();
            base + quad.total(&g)
        })
        .collect())
}

/// Flow force of every column in height variables.
pub fn flow_force(sol: &WaveSolution) -> Result<FlowForce> {
    let f = fields(sol, reference_slip(sol)?)?;
    Ok(summarize(column_flow_forces(sol, &f)?))
}

/// Flow force from pressure and horizontal velocity, `∫₀^η (P - P_atm + (u - c)²) dy`,
/// mean over columns.
pub fn flow_force_physical(sol: &WaveSolution) -> Result<f64> {
    let f = fields(sol, reference_slip(sol)?)?;
    let grid = sol.grid;
    let big_omega = big_omega_nodes(sol);
    let omega_top = big_omega[grid.n_p - 1];
    let quad = CellQuadrature::new(grid.n_p, grid.dp());
    let base = diagnostics::laminar_flow_force(&sol.model, f.stream.s)?
        + (sol.r - f.stream.bernoulli) * f.stream.depth;
    let momentum = |hp: f64, hq: f64, h: f64, j: usize| {
        let pressure = sol.r - h - (1.0 + hq * hq) / (2.0 * hp * hp) - (big_omega[j] - omega_top);
        let horizontal = 1.0 / hp;
        (pressure + horizontal * horizontal) * hp
    };
    let mut total = 0.0;
    for i in 0..grid.n_q {
        let g: Vec<f64> = (0..grid.n_p)
            .map(|j| {
                momentum(f.hp[[i, j]], f.hq[[i, j]], sol.h[[i, j]], j)
                    - momentum(f.stream.h_p[j], 0.0, f.stream.h[j], j)
            })
            .collect();
        total += base + quad.total(&g);
    }
    Ok(total / grid.n_q as f64)
}

/// `w^(s) = h - H(·; s)` at every node.
pub fn w_field(sol: &WaveSolution, s: f64) -> Result<Array2<f64>> {
    let stream = laminar::stream_profile(&sol.model, s, sol.grid.n_p)?;
    Ok(Array2::from_shape_fn(sol.h.dim(), |(i, j)| sol.h[[i, j]] - stream.h[j]))
}

fn stream_hp_nodes(sol: &WaveSolution, s: f64) -> Vec<f64> {
    (0..sol.grid.n_p)
        .map(|j| laminar::stream_hp(&sol.model, s, sol.grid.p(j)))
        .collect()
}

/// Φ^(s) by cumulative column quadrature. The integrand is split into its
/// value on the reference stream of the solution, integrated adaptively
/// cell by cell, and a grid remainder.
pub fn flux_function(sol: &WaveSolution, s: f64) -> Result<FluxField> {
    check_slip(&sol.model, s)?;
    let f = fields(sol, reference_slip(sol)?)?;
    let grid = sol.grid;
    let model = &sol.model;
    let stream = laminar::stream_profile(model, s, grid.n_p)?;
    let w = Array2::from_shape_fn(sol.h.dim(), |(i, j)| sol.h[[i, j]] - stream.h[j]);
    let integrand = |hp: f64, hq: f64, big: f64| {
        let wp = hp - big;
        wp * wp / (hp * big * big) - hq * hq / hp
    };
    let s_ref = f.stream.s;
    let mut base = vec![0.0; grid.n_p];
    for j in 1..grid.n_p {
        let cell = laminar::slip_integral(model, s_ref, grid.p(j - 1), grid.p(j), |rad, p| {
            integrand(1.0 / rad.sqrt(), 0.0, laminar::stream_hp(model, s, p))
        })?;
        base[j] = base[j - 1] + cell;
    }
    let quad = CellQuadrature::new(grid.n_p, grid.dp());
    let mut phi = Array2::zeros(sol.h.dim());
    for i in 0..grid.n_q {
        let g: Vec<f64> = (0..grid.n_p)
            .map(|j| {
                integrand(f.hp[[i, j]], f.hq[[i, j]], stream.h_p[j])
                    - integrand(f.stream.h_p[j], 0.0, stream.h_p[j])
            })
            .collect();
        for (j, v) in quad.cumulative(&g).into_iter().enumerate() {
            phi[[i, j]] = base[j] + v;
        }
    }
    let top = grid.n_p - 1;
    let ff = summarize(column_flow_forces(sol, &f)?);
    Ok(FluxField {
        s,
        top_trace: (0..grid.n_q).map(|i| phi[[i, top]]).collect(),
        phi,
        w,
        ff: ff.ff,
        ff_columns: ff.columns,
    })
}

/// Second-order finite differences of Φ against
///
/// ```text
/// Φ_q = -w_q ((1 + w_q²)/h_p² - 1/H_p²),   Φ_p = w_p²/(h_p H_p²) - w_q²/h_p.
/// ```
///
/// Field derivatives on the right are the same second-order differences.
pub fn flux_gradient_check(flux: &FluxField, sol: &WaveSolution) -> GradientErrors {
    flux_gradient_check_strided(flux, sol, 1)
}

/// [`flux_gradient_check`] with differences over `stride` grid spacings,
/// one-sided within `2 stride` nodes of the bed and the surface.
pub fn flux_gradient_check_strided(flux: &FluxField, sol: &WaveSolution, stride: usize) -> GradientErrors {
    let grid = sol.grid;
    let (n_q, n_p) = (grid.n_q, grid.n_p);
    let k = stride.max(1);
    let (dq, dp) = (k as f64 * grid.dq(), k as f64 * grid.dp());
    let big_hp = stream_hp_nodes(sol, flux.s);
    let h = &sol.h;
    let phi = &flux.phi;
    let d_p = |f: &Array2<f64>, i: usize, j: usize| {
        if j < k {
            (-3.0 * f[[i, j]] + 4.0 * f[[i, j + k]] - f[[i, j + 2 * k]]) / (2.0 * dp)
        } else if j + k > n_p - 1 {
            (3.0 * f[[i, j]] - 4.0 * f[[i, j - k]] + f[[i, j - 2 * k]]) / (2.0 * dp)
        } else {
            (f[[i, j + k]] - f[[i, j - k]]) / (2.0 * dp)
        }
    };
    let d_q = |f: &Array2<f64>, i: usize, j: usize| {
        (f[[(i + k) % n_q, j]] - f[[(i + n_q - k) % n_q, j]]) / (2.0 * dq)
    };
    let mut errors = GradientErrors {
        max_err_q: 0.0,
        max_err_p: 0.0,
        scale: 0.0,
    };
    for i in 0..n_q {
        for j in 0..n_p {
            let hp = d_p(h, i, j);
            let wq = d_q(h, i, j);
            let wp = hp - big_hp[j];
            let big = big_hp[j];
            let phi_q = -wq * ((1.0 + wq * wq) / (hp * hp) - 1.0 / (big * big));
            let phi_p = wp * wp / (hp * big * big) - wq * wq / hp;
            errors.scale = errors.scale.max(phi_q.abs()).max(phi_p.abs());
            errors.max_err_q = errors.max_err_q.max((d_q(phi, i, j) - phi_q).abs());
            errors.max_err_p = errors.max_err_p.max((d_p(phi, i, j) - phi_p).abs());
        }
    }
    errors
}

/// max over q of `|Φ(q, 1) - [2(FF(q) - σ(s; r)) - 2(r - R(s)) w(q, 1) + w(q, 1)²]|`
/// with FF(q) the flow force of column q.
pub fn flux_boundary_identity(sol: &WaveSolution, s: f64) -> Result<f64> {
    let flux = flux_function(sol, s)?;
    boundary_identity_residual(sol, &flux)
}

pub(crate) fn boundary_identity_residual(sol: &WaveSolution, flux: &FluxField) -> Result<f64> {
    let s = flux.s;
    let sigma = diagnostics::sigma(&sol.model, s, sol.r)?;
    let big_r = laminar::bernoulli_of_slip(&sol.model, s)?;
    let top = sol.grid.n_p - 1;
    Ok((0..sol.grid.n_q)
        .map(|i| {
            let w = flux.w[[i, top]];
            let rhs = 2.0 * (flux.ff_columns[i] - sigma) - 2.0 * (sol.r - big_r) * w + w * w;
            (flux.top_trace[i] - rhs).abs()
        })
        .fold(0.0, f64::max))
}
