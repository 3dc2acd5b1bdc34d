//! Discrete residuals of the height-function problem.
//!
//! Interior nodes carry the divergence form
//!
//! ```text
//! ((1 + h_q²)/(2h_p²) + Ω)_p - (h_q/h_p)_q = 0
//! ```
//!
//! differenced between half-node fluxes; top nodes carry the Bernoulli
//! condition `(1 + h_q²)/(2h_p²) + h - r = 0`. Stencils are generic over
//! [`Scalar`] so the same code yields residuals and exact Jacobian entries.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::numerics::dual::Scalar;
use crate::vorticity::VorticityModel;

use super::WaveGrid;

/// Unidirectionality threshold on discrete `h_p`.
pub const EPS_UNI: f64 = 1e-6;

/// A stencil read `(di, dj)` relative to the centre node.
pub(crate) type Offset = (isize, isize);

/// A failed unidirectionality test: node offset and the offending `h_p`.
pub(crate) struct Degeneracy {
    pub offset: Offset,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub grid: WaveGrid,
    pub dq: f64,
    pub dp: f64,
    /// Ω at the half nodes p_{j+1/2}, j = 0..n_p-1.
    pub omega_half: Vec<f64>,
    /// ω at the nodes.
    pub omega_node: Vec<f64>,
    /// Ω at the nodes.
    pub big_omega_node: Vec<f64>,
}

impl Discretization {
    pub fn new(model: &VorticityModel, grid: WaveGrid) -> Self {
        let dp = grid.dp();
        let omega_half = (0..grid.n_p - 1)
            .map(|j| model.big_omega_at((j as f64 + 0.5) * dp))
            .collect();
        let omega_node = (0..grid.n_p).map(|j| model.omega_at(grid.p(j))).collect();
        let big_omega_node = (0..grid.n_p).map(|j| model.big_omega_at(grid.p(j))).collect();
        Self {
            grid,
            dq: grid.dq(),
            dp,
            omega_half,
            omega_node,
            big_omega_node,
        }
    }

    pub fn top(&self) -> usize {
        self.grid.n_p - 1
    }

    /// Interior residual at row `j`, 1 <= j < n_p - 1.
    pub fn interior<T, G>(&self, j: usize, h: G) -> std::result::Result<T, Degeneracy>
    where
        T: Scalar,
        G: Fn(isize, isize) -> T,
    {
        let (dq, dp) = (self.dq, self.dp);
        let vertical = |lo: isize| -> std::result::Result<T, Degeneracy> {
            let hp = (h(0, lo + 1) - h(0, lo)) / dp;
            if !(hp.value() > EPS_UNI) {
                return Err(Degeneracy {
                    offset: (0, lo + 1),
                    value: hp.value(),
                });
            }
            let hq = (h(1, lo) - h(-1, lo) + h(1, lo + 1) - h(-1, lo + 1)) / (4.0 * dq);
            let omega = self.omega_half[(j as isize + lo) as usize];
            Ok((hq * hq + 1.0) / (hp * hp * 2.0) + omega)
        };
        let horizontal = |left: isize| -> T {
            let hq = (h(left + 1, 0) - h(left, 0)) / dq;
            let hp = (h(left, 1) - h(left, -1) + h(left + 1, 1) - h(left + 1, -1)) / (4.0 * dp);
            hq / hp
        };
        let a_up = vertical(0)?;
        let a_dn = vertical(-1)?;
        let b_r = horizontal(0);
        let b_l = horizontal(-1);
        Ok((a_up - a_dn) / dp - (b_r - b_l) / dq)
    }

    /// Bernoulli residual at the top node of a column, without `- r`.
    pub fn top_row<T, G>(&self, h: G) -> std::result::Result<T, Degeneracy>
    where
        T: Scalar,
        G: Fn(isize, isize) -> T,
    {
        let hp = (h(0, 0) * 3.0 - h(0, -1) * 4.0 + h(0, -2)) / (2.0 * self.dp);
        if !(hp.value() > EPS_UNI) {
            return Err(Degeneracy {
                offset: (0, 0),
                value: hp.value(),
            });
        }
        let hq = (h(1, 0) - h(-1, 0)) / (2.0 * self.dq);
        Ok((hq * hq + 1.0) / (hp * hp * 2.0) + h(0, 0))
    }

    pub fn wrap(&self, i: usize, di: isize) -> usize {
        let n = self.grid.n_q as isize;
        ((i as isize + di).rem_euclid(n)) as usize
    }

    pub fn degenerate(&self, i: usize, j: usize, d: Degeneracy) -> Error {
        Error::Degenerate {
            i: self.wrap(i, d.offset.0),
            j: (j as isize + d.offset.1) as usize,
            value: d.value,
            threshold: EPS_UNI,
        }
    }

    /// Full residual field: bottom rows hold `h`, interior rows the
    /// divergence form, top rows the Bernoulli condition.
    pub fn residual(&self, h: &Array2<f64>, r: f64) -> Result<Array2<f64>> {
        let (n_q, n_p) = (self.grid.n_q, self.grid.n_p);
        let mut out = Array2::zeros((n_q, n_p));
        for i in 0..n_q {
            out[[i, 0]] = h[[i, 0]];
            for j in 1..n_p - 1 {
                let at = |di: isize, dj: isize| h[[self.wrap(i, di), (j as isize + dj) as usize]];
                out[[i, j]] = self
                    .interior::<f64, _>(j, at)
                    .map_err(|d| self.degenerate(i, j, d))?;
            }
            let top = self.top();
            let at = |di: isize, dj: isize| h[[self.wrap(i, di), (top as isize + dj) as usize]];
            out[[i, top]] = self.top_row::<f64, _>(at).map_err(|d| self.degenerate(i, top, d))? - r;
        }
        Ok(out)
    }

    /// `(1 + h_q²) h_pp - 2 h_q h_p h_qp + h_p² h_qq - ω h_p³` at interior
    /// nodes with centred second-order differences; zero elsewhere.
    pub fn nondivergence(&self, h: &Array2<f64>) -> Array2<f64> {
        let (n_q, n_p) = (self.grid.n_q, self.grid.n_p);
        let (dq, dp) = (self.dq, self.dp);
        let mut out = Array2::zeros((n_q, n_p));
        for i in 0..n_q {
            let (im, ip) = (self.wrap(i, -1), self.wrap(i, 1));
            for j in 1..n_p - 1 {
                let hq = (h[[ip, j]] - h[[im, j]]) / (2.0 * dq);
                let hp = (h[[i, j + 1]] - h[[i, j - 1]]) / (2.0 * dp);
                let hqq = (h[[ip, j]] - 2.0 * h[[i, j]] + h[[im, j]]) / (dq * dq);
                let hpp = (h[[i, j + 1]] - 2.0 * h[[i, j]] + h[[i, j - 1]]) / (dp * dp);
                let hqp = (h[[ip, j + 1]] - h[[ip, j - 1]] - h[[im, j + 1]] + h[[im, j - 1]])
                    / (4.0 * dq * dp);
                out[[i, j]] = (1.0 + hq * hq) * hpp - 2.0 * hq * hp * hqp + hp * hp * hqq
                    - self.omega_node[j] * hp * hp * hp;
            }
        }
        out
    }
}
