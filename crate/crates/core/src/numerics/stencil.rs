//! High-order finite-difference and quadrature weights on uniform grids.
//!
//! These operators are used for post-processing converged fields (flow
//! force, flux functions), where derivatives of the discrete solution must be
//! evaluated well below the discretization error of the solver itself.

/// Fornberg's algorithm: weights `w[k][m]` such that
/// `f^{(k)}(z) ~ sum_m w[k][m] f(x[m])` for `k = 0..=max_order`.
pub fn fornberg(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Number of points in the non-periodic stencils (sixth order for the first
/// derivative, exact quadrature for degree-six polynomials).
pub const WIDTH: usize = 7;

fn window(center: usize, n: usize, width: usize) -> usize {
    let half = width / 2;
    center.saturating_sub(half).min(n - width)
}

/// First derivative on a uniform grid `x_j = j h`, `j = 0..n`, with centred
/// stencils in the interior and shifted one-sided stencils near the ends.
#[derive(Debug, Clone)]
pub struct UniformDerivative {
    starts: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl UniformDerivative {
    pub fn new(n: usize, h: f64) -> Self {
        assert!(n >= WIDTH, "grid too small for the derivative stencil");
        let mut starts = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            let s = window(j, n, WIDTH);
            let nodes: Vec<f64> = (s..s + WIDTH).map(|m| (m as f64 - j as f64) * h).collect();
            let w = fornberg(0.0, &nodes, 1);
            starts.push(s);
            weights.push(w[1].clone());
        }
        Self { starts, weights }
    }

    pub fn at(&self, values: &[f64], j: usize) -> f64 {
        let s = self.starts[j];
        self.weights[j]
            .iter()
            .zip(&values[s..s + WIDTH])
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        (0..values.len()).map(|j| self.at(values, j)).collect()
    }
}

/// Sixth-order centred first derivative on a periodic uniform grid.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicDerivative {
    h: f64,
}

const PERIODIC_WEIGHTS: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

impl PeriodicDerivative {
    pub fn new(h: f64) -> Self {
        Self { h }
    }

    /// Derivative at index `i` of a periodic sequence accessed through `get`.
    pub fn at<F: Fn(usize) -> f64>(&self, n: usize, i: usize, get: F) -> f64 {
        let mut acc = 0.0;
        for (k, w) in PERIODIC_WEIGHTS.iter().enumerate() {
            let m = k + 1;
            acc += w * (get((i + m) % n) - get((i + n - m) % n));
        }
        acc / self.h
    }
}

/// Integration weights for each cell `[x_j, x_{j+1}]` of a uniform grid,
/// from exact integration of the local degree-six interpolant.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    starts: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

impl CellQuadrature {
    pub fn new(n: usize, h: f64) -> Self {
        assert!(n >= WIDTH, "grid too small for the quadrature stencil");
        let mut starts = Vec::with_capacity(n - 1);
        let mut weights = Vec::with_capacity(n - 1);
        for j in 0..n - 1 {
            // Window centred on the cell midpoint.
            let s = (j + 1).saturating_sub(WIDTH / 2).min(n - WIDTH);
            let nodes: Vec<f64> = (s..s + WIDTH).map(|m| (m as f64 - j as f64) * h).collect();
            let mut w = vec![0.0; WIDTH];
            // Four-point Gauss-Legendre is exact for the degree-six basis.
            for (t, gw) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                let z = 0.5 * h * (1.0 + t);
                let interp = fornberg(z, &nodes, 0);
                for (acc, l) in w.iter_mut().zip(&interp[0]) {
                    *acc += 0.5 * h * gw * l;
                }
            }
            starts.push(s);
            weights.push(w);
        }
        Self { starts, weights }
    }

    pub fn cell(&self, values: &[f64], j: usize) -> f64 {
        let s = self.starts[j];
        self.weights[j]
            .iter()
            .zip(&values[s..s + WIDTH])
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Running integral from `x_0` to every node.
    pub fn cumulative(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for j in 0..values.len() - 1 {
            acc += self.cell(values, j);
            out.push(acc);
        }
        out
    }

    pub fn total(&self, values: &[f64]) -> f64 {
        (0..values.len() - 1).map(|j| self.cell(values, j)).sum()
    }
}
