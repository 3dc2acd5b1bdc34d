//! Periodic steady waves as solutions of the height-function problem on one
//! period `0 <= q < L`, `0 <= p <= 1`.
//!
//! The unknown is the height `h(q, p)` of the streamline `p` above the bed.
//! Waves are computed by Newton's method with the Bernoulli constant `r`
//! solved for alongside `h`, one amplitude condition closing the system, and
//! continuation in amplitude starting from a laminar flow.

mod discrete;
mod newton;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dispersion;
use crate::error::{Error, Result};
use crate::laminar;
use crate::vorticity::VorticityModel;

pub use discrete::EPS_UNI;
pub use newton::{MAX_ITERATIONS, TOLERANCE};

use discrete::Discretization;
use newton::Mode;

/// Periods with `L λ₁ >= NEAR_SOLITARY` (λ₁ the supercritical decay rate)
/// are flagged as near-solitary.
pub const NEAR_SOLITARY: f64 = 40.0;

/// Uniform grid over one period: `q_i = i L / n_q`, `p_j = j / (n_p - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveGrid {
    pub period: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl WaveGrid {
    pub fn new(period: f64, n_q: usize, n_p: usize) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Invalid(format!("period must be positive, got {period}")));
        }
        if n_q < 16 || n_q % 2 != 0 {
            return Err(Error::Invalid(format!("n_q must be even and at least 16, got {n_q}")));
        }
        if n_p < 16 {
            return Err(Error::Invalid(format!("n_p must be at least 16, got {n_p}")));
        }
        Ok(Self { period, n_q, n_p })
    }

    pub fn dq(&self) -> f64 {
        self.period / self.n_q as f64
    }

    pub fn dp(&self) -> f64 {
        1.0 / (self.n_p - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        j as f64 * self.dp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "kebab-case")]
pub enum AmplitudeMeasure {
    /// η(0) - η(L/2).
    CrestTrough,
    /// η(0) - reference depth.
    CrestOffset { reference_depth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeConstraint {
    pub measure: AmplitudeMeasure,
    pub value: f64,
}

impl AmplitudeConstraint {
    pub fn crest_trough(value: f64) -> Self {
        Self {
            measure: AmplitudeMeasure::CrestTrough,
            value,
        }
    }

    pub fn crest_offset(value: f64, reference_depth: f64) -> Self {
        Self {
            measure: AmplitudeMeasure::CrestOffset { reference_depth },
            value,
        }
    }

    /// The measure evaluated on a surface trace of `n_q` points.
    pub fn evaluate<F: Fn(usize) -> f64>(&self, n_q: usize, eta: F) -> f64 {
        self.weights(n_q)
            .iter()
            .map(|&(i, w)| w * eta(i))
            .sum::<f64>()
            - match self.measure {
                AmplitudeMeasure::CrestTrough => 0.0,
                AmplitudeMeasure::CrestOffset { reference_depth } => reference_depth,
            }
    }

    pub(crate) fn weights(&self, n_q: usize) -> Vec<(usize, f64)> {
        match self.measure {
            AmplitudeMeasure::CrestTrough => vec![(0, 1.0), (n_q / 2, -1.0)],
            AmplitudeMeasure::CrestOffset { .. } => vec![(0, 1.0)],
        }
    }
}

/// A converged wave.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSolution {
    pub grid: WaveGrid,
    /// h(q_i, p_j), shape `(n_q, n_p)`.
    pub h: Array2<f64>,
    pub r: f64,
    pub model: VorticityModel,
    pub amplitude: AmplitudeConstraint,
    /// Max-norm of the discrete residual (interior and top rows).
    pub residual_norm: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub near_solitary: bool,
    /// Slip of the laminar flow the computation started from, if any.
    pub seed_slip: Option<f64>,
}

/// Surface trace η(q) = h(q, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceProfile {
    pub q: Vec<f64>,
    pub eta: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Physical fields at every node, in the frame moving with the wave.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFields {
    pub y: Array2<f64>,
    pub psi: Array2<f64>,
    /// c - u = 1/h_p.
    pub relative_speed: Array2<f64>,
    /// v = -h_q/h_p.
    pub vertical_velocity: Array2<f64>,
    /// P - P_atm.
    pub pressure: Array2<f64>,
}

fn check_shape(grid: &WaveGrid, h: &Array2<f64>) -> Result<()> {
    if h.dim() != (grid.n_q, grid.n_p) {
        return Err(Error::Invalid(format!(
            "field has shape {:?}, grid expects ({}, {})",
            h.dim(),
            grid.n_q,
            grid.n_p
        )));
    }
    Ok(())
}

/// Discrete residual field of `h` at Bernoulli constant `r`.
pub fn residual(model: &VorticityModel, grid: &WaveGrid, h: &Array2<f64>, r: f64) -> Result<Array2<f64>> {
    check_shape(grid, h)?;
    Discretization::new(model, *grid).residual(h, r)
}

/// Non-divergence form `(1 + h_q²) h_pp - 2 h_q h_p h_qp + h_p² h_qq - ω h_p³`
/// at interior nodes (zero on the boundary rows). On smooth fields it equals
/// `-h_p³` times the divergence-form residual up to discretization error.
pub fn nondivergence_residual(model: &VorticityModel, grid: &WaveGrid, h: &Array2<f64>) -> Result<Array2<f64>> {
    check_shape(grid, h)?;
    Ok(Discretization::new(model, *grid).nondivergence(h))
}

fn interior_top_norm(res: &Array2<f64>) -> f64 {
    res.indexed_iter()
        .filter(|((_, j), _)| *j > 0)
        .fold(0.0f64, |a, (_, v)| a.max(v.abs()))
}

/// Odd direction used to unfold the translation symmetry.
fn odd_direction(grid: &WaveGrid, h: &Array2<f64>) -> Vec<f64> {
    let n = grid.n_q;
    let top = grid.n_p - 1;
    let mut psi: Vec<f64> = (0..n)
        .map(|i| h[[(i + 1) % n, top]] - h[[(i + n - 1) % n, top]])
        .collect();
    let scale = psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale > 1e-12 {
        psi.iter_mut().for_each(|v| *v /= scale);
    } else {
        psi = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * grid.q(i) / grid.period).sin())
            .collect();
    }
    psi
}

/// Whether a period is long compared with the supercritical decay length.
pub fn is_near_solitary(model: &VorticityModel, period: f64, r: f64) -> bool {
    let Ok(pair) = laminar::conjugate_streams(model, r) else {
        return false;
    };
    dispersion::decay_rate(model, pair.s_plus)
        .map(|lambda| period * lambda >= NEAR_SOLITARY)
        .unwrap_or(false)
}

/// Newton solve for `(h, r)` with one amplitude condition.
///
/// With `value == 0` the laminar family makes the amplitude-parameterized
/// system singular; `r` is then held at `r_init` and only `h` is solved for.
pub fn newton_solve(
    model: &VorticityModel,
    grid: &WaveGrid,
    h_init: &Array2<f64>,
    r_init: f64,
    constraint: AmplitudeConstraint,
) -> Result<WaveSolution> {
    check_shape(grid, h_init)?;
    let disc = Discretization::new(model, *grid);
    let mut h0 = h_init.clone();
    h0.column_mut(0).fill(0.0);
    disc.residual(&h0, r_init)?;

    let mode = if constraint.value == 0.0 {
        Mode::FixedR
    } else {
        Mode::Constrained {
            constraint,
            psi: odd_direction(grid, &h0),
        }
    };
    let out = newton::solve(&disc, h0, r_init, &mode)?;
    let residual_norm = interior_top_norm(&disc.residual(&out.h, out.r)?);
    if residual_norm >= TOLERANCE {
        return Err(Error::Convergence(format!(
            "converged system leaves residual {residual_norm:e}; unfolding parameter {:e} \
             indicates no even solution near the initial guess",
            out.nu
        )));
    }
    Ok(WaveSolution {
        grid: *grid,
        near_solitary: is_near_solitary(model, grid.period, out.r),
        h: out.h,
        r: out.r,
        model: model.clone(),
        amplitude: constraint,
        residual_norm,
        iterations: out.iterations,
        residual_history: out.history,
        seed_slip: None,
    })
}

/// Result of [`forced_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForcedSolution {
    pub h: Array2<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

/// Solves `residual(h, r) = forcing` on interior and top rows with `r` fixed
/// (manufactured solutions).
pub fn forced_solve(
    model: &VorticityModel,
    grid: &WaveGrid,
    h_init: &Array2<f64>,
    r: f64,
    forcing: &Array2<f64>,
) -> Result<ForcedSolution> {
    check_shape(grid, h_init)?;
    check_shape(grid, forcing)?;
    let disc = Discretization::new(model, *grid);
    let mut h0 = h_init.clone();
    h0.column_mut(0).fill(0.0);
    let out = newton::solve(&disc, h0, r, &Mode::Forced { forcing })?;
    let res = disc.residual(&out.h, r)? - forcing;
    Ok(ForcedSolution {
        residual_norm: interior_top_norm(&res),
        h: out.h,
        iterations: out.iterations,
        residual_history: out.history,
    })
}

/// The discrete laminar flow near H(·; s) with `r = R(s)`: a q-independent
/// solution of the discrete system.
pub fn discrete_laminar(model: &VorticityModel, grid: &WaveGrid, s: f64) -> Result<WaveSolution> {
    let stream = laminar::stream_profile(model, s, grid.n_p)?;
    let disc = Discretization::new(model, *grid);
    let (column, iterations, history) = newton::solve_column(&disc, &stream.h, stream.bernoulli)?;
    let h = Array2::from_shape_fn((grid.n_q, grid.n_p), |(_, j)| column[j]);
    let residual_norm = interior_top_norm(&disc.residual(&h, stream.bernoulli)?);
    Ok(WaveSolution {
        grid: *grid,
        near_solitary: is_near_solitary(model, grid.period, stream.bernoulli),
        h,
        r: stream.bernoulli,
        model: model.clone(),
        amplitude: AmplitudeConstraint::crest_trough(0.0),
        residual_norm,
        iterations,
        residual_history: history,
        seed_slip: Some(s),
    })
}

/// The stream H(·; s) sampled on the grid, with `r = R(s)` from quadrature.
/// Its residual is the truncation error of the scheme on H (zero for
/// irrotational flow, second order otherwise).
pub fn exact_laminar(model: &VorticityModel, grid: &WaveGrid, s: f64) -> Result<WaveSolution> {
    let stream = laminar::stream_profile(model, s, grid.n_p)?;
    let h = Array2::from_shape_fn((grid.n_q, grid.n_p), |(_, j)| stream.h[j]);
    let residual_norm = interior_top_norm(&Discretization::new(model, *grid).residual(&h, stream.bernoulli)?);
    Ok(WaveSolution {
        grid: *grid,
        near_solitary: is_near_solitary(model, grid.period, stream.bernoulli),
        h,
        r: stream.bernoulli,
        model: model.clone(),
        amplitude: AmplitudeConstraint::crest_trough(0.0),
        residual_norm,
        iterations: 0,
        residual_history: vec![residual_norm],
        seed_slip: Some(s),
    })
}

/// Principal eigenfunction of the stream `s` sampled on the `n_p` grid.
pub fn eigenfunction_on_grid(model: &VorticityModel, s: f64, n_p: usize) -> Result<Vec<f64>> {
    let intervals = n_p - 1;
    let mut factor = 128usize.div_ceil(intervals).max(1);
    let mut last = None;
    for _ in 0..5 {
        match dispersion::principal_eigenpair(model, s, intervals * factor + 1) {
            Ok(e) => return Ok((0..n_p).map(|j| e.phi[j * factor]).collect()),
            Err(e @ Error::Convergence(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
        factor *= 2;
    }
    Err(last.expect("at least one attempt"))
}

/// A continuation run: converged members in order of amplitude and the
/// reason for stopping early, if any.
#[derive(Debug, Clone)]
pub struct Branch {
    pub s: f64,
    pub wavenumber: f64,
    pub solutions: Vec<WaveSolution>,
    pub stop_reason: Option<String>,
}

/// Continuation in the crest-trough amplitude from the laminar flow `s`.
///
/// The first member is [`exact_laminar`]. Amplitudes are `a_max k / n_steps` for `k = 0..=n_steps`; the first wave
/// is seeded with `(a/2) φ₁(p) cos(m 2π q / L)`, later ones by secant
/// extrapolation of the previous two members.
pub fn continue_in_amplitude(
    model: &VorticityModel,
    s: f64,
    grid: &WaveGrid,
    a_max: f64,
    n_steps: usize,
) -> Result<Branch> {
    if !(a_max >= 0.0 && a_max.is_finite()) {
        return Err(Error::Invalid(format!("a_max must be non-negative, got {a_max}")));
    }
    let k = dispersion::bifurcation_wavenumber(model, s)?;
    let base = exact_laminar(model, grid, s)?;
    let mut branch = Branch {
        s,
        wavenumber: k,
        solutions: vec![base],
        stop_reason: None,
    };
    if a_max == 0.0 || n_steps == 0 {
        return Ok(branch);
    }

    let m = (grid.period * k / (2.0 * std::f64::consts::PI)).round().max(1.0);
    let phi = eigenfunction_on_grid(model, s, grid.n_p)?;
    for step in 1..=n_steps {
        let a = a_max * step as f64 / n_steps as f64;
        let n = branch.solutions.len();
        let prev = &branch.solutions[n - 1];
        let (h_init, r_init) = if n == 1 {
            let h = Array2::from_shape_fn((grid.n_q, grid.n_p), |(i, j)| {
                let q = grid.q(i);
                prev.h[[i, j]]
                    + 0.5 * a * phi[j] * (m * 2.0 * std::f64::consts::PI * q / grid.period).cos()
            });
            (h, prev.r)
        } else {
            let older = &branch.solutions[n - 2];
            let t = (a - prev.amplitude.value) / (prev.amplitude.value - older.amplitude.value);
            let h = &prev.h + &((&prev.h - &older.h) * t);
            (h, prev.r + t * (prev.r - older.r))
        };
        match newton_solve(model, grid, &h_init, r_init, AmplitudeConstraint::crest_trough(a)) {
            Ok(mut sol) => {
                sol.seed_slip = Some(s);
                branch.solutions.push(sol);
            }
            Err(e) => {
                branch.stop_reason = Some(format!("step {step} (a = {a}): {e}"));
                break;
            }
        }
    }
    Ok(branch)
}

/// The top row of `h`.
pub fn surface_profile(sol: &WaveSolution) -> SurfaceProfile {
    let top = sol.grid.n_p - 1;
    let eta: Vec<f64> = (0..sol.grid.n_q).map(|i| sol.h[[i, top]]).collect();
    let min = eta.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = eta.iter().sum::<f64>() / eta.len() as f64;
    SurfaceProfile {
        q: (0..sol.grid.n_q).map(|i| sol.grid.q(i)).collect(),
        eta,
        min,
        max,
        mean,
    }
}

/// Velocity and pressure from the height function, with the solver's own
/// second-order stencils (one-sided in p at the bed and the surface).
pub fn reconstruct_physical(sol: &WaveSolution) -> Result<PhysicalFields> {
    let grid = sol.grid;
    let disc = Discretization::new(&sol.model, grid);
    let (n_q, n_p) = (grid.n_q, grid.n_p);
    let (dq, dp) = (grid.dq(), grid.dp());
    let h = &sol.h;
    let omega_top = disc.big_omega_node[n_p - 1];
    let mut rel = Array2::zeros((n_q, n_p));
    let mut v = Array2::zeros((n_q, n_p));
    let mut pressure = Array2::zeros((n_q, n_p));
    for i in 0..n_q {
        let (im, ip) = (disc.wrap(i, -1), disc.wrap(i, 1));
        for j in 0..n_p {
            let hp = if j == 0 {
                (-3.0 * h[[i, 0]] + 4.0 * h[[i, 1]] - h[[i, 2]]) / (2.0 * dp)
            } else if j == n_p - 1 {
                (3.0 * h[[i, j]] - 4.0 * h[[i, j - 1]] + h[[i, j - 2]]) / (2.0 * dp)
            } else {
                (h[[i, j + 1]] - h[[i, j - 1]]) / (2.0 * dp)
            };
            if !(hp > EPS_UNI) {
                return Err(Error::Degenerate {
                    i,
                    j,
                    value: hp,
                    threshold: EPS_UNI,
                });
            }
            let hq = (h[[ip, j]] - h[[im, j]]) / (2.0 * dq);
            rel[[i, j]] = 1.0 / hp;
            v[[i, j]] = -hq / hp;
            pressure[[i, j]] = sol.r
                - h[[i, j]]
                - (1.0 + hq * hq) / (2.0 * hp * hp)
                - (disc.big_omega_node[j] - omega_top);
        }
    }
    Ok(PhysicalFields {
        y: h.clone(),
        psi: Array2::from_shape_fn((n_q, n_p), |(_, j)| grid.p(j)),
        relative_speed: rel,
        vertical_velocity: v,
        pressure,
    })
}
