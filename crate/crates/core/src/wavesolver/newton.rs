//! Damped Newton iteration on the discrete height-function system with
//! exact Jacobians from dual-number stencil evaluation.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::numerics::dual::{Dual, Scalar};

use super::discrete::{Degeneracy, Discretization};
use super::AmplitudeConstraint;

pub const MAX_ITERATIONS: usize = 50;
pub const TOLERANCE: f64 = 1e-10;
pub const MAX_HALVINGS: usize = 20;

/// Stencil slots: di in -1..=1, dj in -2..=1.
const SLOTS: usize = 12;
type D = Dual<SLOTS>;

fn slot(di: isize, dj: isize) -> usize {
    ((di + 1) * 4 + (dj + 2)) as usize
}

fn unslot(s: usize) -> (isize, isize) {
    (s as isize / 4 - 1, s as isize % 4 - 2)
}

pub(crate) enum Mode<'a> {
    /// Unknowns h, r and an unfolding parameter ν; rows add the amplitude
    /// constraint and a phase condition.
    Constrained {
        constraint: AmplitudeConstraint,
        psi: Vec<f64>,
    },
    /// Unknowns h only, r held fixed.
    FixedR,
    /// Unknowns h only, residual minus a prescribed forcing.
    Forced { forcing: &'a Array2<f64> },
}

pub(crate) struct Outcome {
    pub h: Array2<f64>,
    pub r: f64,
    pub nu: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

struct Layout {
    n_q: usize,
    top: usize,
    n_h: usize,
    n: usize,
}

impl Layout {
    fn new(disc: &Discretization, mode: &Mode) -> Self {
        let n_q = disc.grid.n_q;
        let top = disc.top();
        let n_h = n_q * top;
        let n = n_h + if matches!(mode, Mode::Constrained { .. }) { 2 } else { 0 };
        Self { n_q, top, n_h, n }
    }

    fn col(&self, i: usize, j: usize) -> usize {
        i * self.top + j - 1
    }
}

fn degenerate(disc: &Discretization, i: usize, j: usize) -> impl Fn(Degeneracy) -> Error + '_ {
    move |d| disc.degenerate(i, j, d)
}

/// Residual vector in unknown order, optionally with Jacobian triplets.
fn system(
    disc: &Discretization,
    lay: &Layout,
    h: &Array2<f64>,
    r: f64,
    nu: f64,
    mode: &Mode,
    jacobian: Option<&mut Vec<Triplet<usize, usize, f64>>>,
) -> Result<Vec<f64>> {
    let mut res = vec![0.0; lay.n];
    let top = lay.top;
    let forcing = match mode {
        Mode::Forced { forcing } => Some(*forcing),
        _ => None,
    };
    match jacobian {
        None => {
            for i in 0..lay.n_q {
                for j in 1..=top {
                    let at = |di: isize, dj: isize| h[[disc.wrap(i, di), (j as isize + dj) as usize]];
                    let mut v = if j < top {
                        disc.interior::<f64, _>(j, at).map_err(degenerate(disc, i, j))?
                    } else {
                        disc.top_row::<f64, _>(at).map_err(degenerate(disc, i, j))? - r
                    };
                    if let Some(f) = forcing {
                        v -= f[[i, j]];
                    }
                    if j == top {
                        if let Mode::Constrained { psi, .. } = mode {
                            v += nu * psi[i];
                        }
                    }
                    res[lay.col(i, j)] = v;
                }
            }
        }
        Some(trips) => {
            trips.clear();
            for i in 0..lay.n_q {
                for j in 1..=top {
                    let at = |di: isize, dj: isize| {
                        let jj = (j as isize + dj) as usize;
                        let v = h[[disc.wrap(i, di), jj]];
                        if jj == 0 {
                            D::constant(v)
                        } else {
                            D::variable(v, slot(di, dj))
                        }
                    };
                    let row = lay.col(i, j);
                    let mut v = if j < top {
                        disc.interior::<D, _>(j, at).map_err(degenerate(disc, i, j))?
                    } else {
                        disc.top_row::<D, _>(at).map_err(degenerate(disc, i, j))? - r
                    };
                    if let Some(f) = forcing {
                        v = v - f[[i, j]];
                    }
                    for (s, &d) in v.d.iter().enumerate() {
                        if d != 0.0 {
                            let (di, dj) = unslot(s);
                            let jj = (j as isize + dj) as usize;
                            trips.push(Triplet::new(row, lay.col(disc.wrap(i, di), jj), d));
                        }
                    }
                    let mut value = v.v;
                    if j == top {
                        if let Mode::Constrained { psi, .. } = mode {
                            value += nu * psi[i];
                            trips.push(Triplet::new(row, lay.n_h, -1.0));
                            trips.push(Triplet::new(row, lay.n_h + 1, psi[i]));
                        }
                    }
                    res[row] = value;
                }
            }
            if let Mode::Constrained { constraint, .. } = mode {
                for (col, w) in constraint.weights(lay.n_q) {
                    trips.push(Triplet::new(lay.n_h, lay.col(col, top), w));
                }
                trips.push(Triplet::new(lay.n_h + 1, lay.col(1, top), 1.0));
                trips.push(Triplet::new(lay.n_h + 1, lay.col(lay.n_q - 1, top), -1.0));
            }
        }
    }
    if let Mode::Constrained { constraint, .. } = mode {
        res[lay.n_h] = constraint.evaluate(lay.n_q, |i| h[[i, top]]) - constraint.value;
        res[lay.n_h + 1] = h[[1, top]] - h[[lay.n_q - 1, top]];
    }
    Ok(res)
}

pub(crate) fn sparse_solve(
    n: usize,
    trips: &[Triplet<usize, usize, f64>],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, trips)
        .map_err(|e| Error::Linear(format!("jacobian assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Linear(format!("sparse LU failed: {e:?}")))?;
    let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    lu.solve_in_place(b.as_mut());
    let x: Vec<f64> = (0..n).map(|i| b[(i, 0)]).collect();
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Linear("singular Jacobian".into()))
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub(crate) fn solve(
    disc: &Discretization,
    h0: Array2<f64>,
    r0: f64,
    mode: &Mode,
) -> Result<Outcome> {
    let lay = Layout::new(disc, mode);
    let top = lay.top;
    let mut h = h0;
    let mut r = r0;
    let mut nu = 0.0;
    let mut trips = Vec::new();
    let mut history = Vec::new();

    for iteration in 0..=MAX_ITERATIONS {
        let res = system(disc, &lay, &h, r, nu, mode, Some(&mut trips))?;
        let norm = max_norm(&res);
        history.push(norm);
        if norm < TOLERANCE {
            return Ok(Outcome {
                h,
                r,
                nu,
                iterations: iteration,
                history,
            });
        }
        if iteration == MAX_ITERATIONS {
            break;
        }
        if !norm.is_finite() {
            return Err(Error::Convergence("residual is not finite".into()));
        }
        let rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        let delta = sparse_solve(lay.n, &trips, &rhs)?;

        let mut lambda = 1.0;
        let mut accepted = false;
        let mut last_err = None;
        for _ in 0..=MAX_HALVINGS {
            let mut h_try = h.clone();
            for i in 0..lay.n_q {
                for j in 1..=top {
                    h_try[[i, j]] += lambda * delta[lay.col(i, j)];
                }
            }
            let (r_try, nu_try) = if matches!(mode, Mode::Constrained { .. }) {
                (r + lambda * delta[lay.n_h], nu + lambda * delta[lay.n_h + 1])
            } else {
                (r, nu)
            };
            match system(disc, &lay, &h_try, r_try, nu_try, mode, None) {
                Ok(v) if max_norm(&v) < norm => {
                    h = h_try;
                    r = r_try;
                    nu = nu_try;
                    accepted = true;
                    break;
                }
                Ok(_) => {}
                Err(e) => last_err = Some(e),
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(last_err.unwrap_or_else(|| {
                Error::Convergence(format!(
                    "no decrease after {MAX_HALVINGS} step halvings at iteration {iteration}, residual {norm:e}"
                ))
            }));
        }
    }
    Err(Error::Convergence(format!(
        "no convergence in {MAX_ITERATIONS} iterations, residual history {:?}",
        history.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
    )))
}

/// Newton on a q-independent column with r fixed.
pub(crate) fn solve_column(disc: &Discretization, h0: &[f64], r: f64) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let top = disc.top();
    let mut h = h0.to_vec();
    let mut history = Vec::new();
    let eval = |h: &[f64], jac: Option<&mut Vec<Triplet<usize, usize, f64>>>| -> Result<Vec<f64>> {
        let mut res = vec![0.0; top];
        match jac {
            None => {
                for j in 1..=top {
                    let at = |_: isize, dj: isize| h[(j as isize + dj) as usize];
                    res[j - 1] = if j < top {
                        disc.interior::<f64, _>(j, at).map_err(degenerate(disc, 0, j))?
                    } else {
                        disc.top_row::<f64, _>(at).map_err(degenerate(disc, 0, j))? - r
                    };
                }
            }
            Some(trips) => {
                trips.clear();
                for j in 1..=top {
                    let at = |_: isize, dj: isize| {
                        let jj = (j as isize + dj) as usize;
                        if jj == 0 {
                            Dual::<4>::constant(h[jj])
                        } else {
                            Dual::<4>::variable(h[jj], (dj + 2) as usize)
                        }
                    };
                    let v = if j < top {
                        disc.interior::<Dual<4>, _>(j, at).map_err(degenerate(disc, 0, j))?
                    } else {
                        disc.top_row::<Dual<4>, _>(at).map_err(degenerate(disc, 0, j))? - r
                    };
                    for (s, &d) in v.d.iter().enumerate() {
                        let jj = j as isize + s as isize - 2;
                        if d != 0.0 && jj >= 1 {
                            trips.push(Triplet::new(j - 1, jj as usize - 1, d));
                        }
                    }
                    res[j - 1] = v.v;
                }
            }
        }
        Ok(res)
    };
    let mut trips = Vec::new();
    for iteration in 0..=MAX_ITERATIONS {
        let res = eval(&h, Some(&mut trips))?;
        let norm = max_norm(&res);
        history.push(norm);
        if norm < TOLERANCE {
            return Ok((h, iteration, history));
        }
        if iteration == MAX_ITERATIONS {
            break;
        }
        let rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        let delta = sparse_solve(top, &trips, &rhs)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let h_try: Vec<f64> = h
                .iter()
                .enumerate()
                .map(|(j, v)| if j == 0 { *v } else { v + lambda * delta[j - 1] })
                .collect();
            if let Ok(v) = eval(&h_try, None) {
                if max_norm(&v) < norm {
                    h = h_try;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence(format!(
                "laminar column: no decrease at iteration {iteration}, residual {norm:e}"
            )));
        }
    }
    Err(Error::Convergence(format!(
        "laminar column: no convergence in {MAX_ITERATIONS} iterations"
    )))
}
