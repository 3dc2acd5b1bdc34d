//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use ndarray::Array2;
use vortwave::laminar;
use vortwave::wavesolver::WaveGrid;
use vortwave::VorticityModel;

/// Ω(p) for the models below, written out independently of the library.
#[derive(Debug, Clone, Copy)]
pub enum Model {
    Irrotational,
    /// ω ≡ -1.
    NegativeUnit,
    /// ω = -1 - p.
    Affine,
}

impl Model {
    pub fn build(self) -> VorticityModel {
        match self {
            Model::Irrotational => VorticityModel::irrotational(),
            Model::NegativeUnit => VorticityModel::constant(-1.0).unwrap(),
            Model::Affine => VorticityModel::affine(-1.0, -1.0).unwrap(),
        }
    }

    pub fn big_omega(self, p: f64) -> f64 {
        match self {
            Model::Irrotational => 0.0,
            Model::NegativeUnit => -p,
            Model::Affine => -p - 0.5 * p * p,
        }
    }
}

pub const MODELS: [Model; 3] = [Model::Irrotational, Model::NegativeUnit, Model::Affine];

/// Composite Simpson in u with p = u², which absorbs the 1/sqrt(p) growth of
/// H_p at p = 0 when s is close to s_0 = 0.
pub fn integrate(f: impl Fn(f64) -> f64) -> f64 {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let g = |u: f64| 2.0 * u * f(u * u);
    let mut acc = g(0.0) + g(1.0);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    acc * h / 3.0
}

/// FF of the stream `s` at Bernoulli constant `r`, from the height-variable
/// integrand with h_q = 0. The term ∫ H H_p is d²/2 exactly.
pub fn flow_force_by_quadrature(m: Model, s: f64, r: f64) -> f64 {
    let om1 = m.big_omega(1.0);
    let hp = |p: f64| 1.0 / (s * s - 2.0 * m.big_omega(p)).sqrt();
    let d = integrate(hp);
    integrate(|p| {
        let v = hp(p);
        (0.5 / (v * v) + r + om1 - m.big_omega(p)) * v
    }) - 0.5 * d * d
}

pub fn bernoulli_by_quadrature(m: Model, s: f64) -> f64 {
    let d = integrate(|p| 1.0 / (s * s - 2.0 * m.big_omega(p)).sqrt());
    0.5 * s * s - m.big_omega(1.0) + d
}

/// h* = H(p; s) + ε sin(2πq/L) p².
pub struct Manufactured {
    pub model: VorticityModel,
    pub s: f64,
    pub eps: f64,
    pub period: f64,
}

impl Manufactured {
    pub fn exact(&self, grid: &WaveGrid) -> Array2<f64> {
        let st = laminar::stream_profile(&self.model, self.s, grid.n_p).unwrap();
        Array2::from_shape_fn((grid.n_q, grid.n_p), |(i, j)| {
            let (q, p) = (grid.q(i), grid.p(j));
            st.h[j] + self.eps * (2.0 * PI * q / self.period).sin() * p * p
        })
    }

    /// Continuous operator applied to h*: interior divergence form and the
    /// top Bernoulli expression minus r.
    pub fn forcing(&self, grid: &WaveGrid, r: f64) -> Array2<f64> {
        let st = laminar::stream_profile(&self.model, self.s, grid.n_p).unwrap();
        let kq = 2.0 * PI / self.period;
        Array2::from_shape_fn((grid.n_q, grid.n_p), |(i, j)| {
            let (q, p) = (grid.q(i), grid.p(j));
            let rad = self.s * self.s - 2.0 * self.model.big_omega(p).unwrap();
            let w = self.model.omega(p).unwrap();
            let (sn, cs) = ((kq * q).sin(), (kq * q).cos());
            let hp = rad.powf(-0.5) + 2.0 * self.eps * sn * p;
            let hpp = w * rad.powf(-1.5) + 2.0 * self.eps * sn;
            let hq = self.eps * kq * cs * p * p;
            let hqq = -self.eps * kq * kq * sn * p * p;
            let hqp = 2.0 * self.eps * kq * cs * p;
            if j == 0 {
                0.0
            } else if j + 1 < grid.n_p {
                let n = (1.0 + hq * hq) / (hp * hp) * hpp - 2.0 * hq / hp * hqp + hqq - w * hp;
                -n / hp
            } else {
                (1.0 + hq * hq) / (2.0 * hp * hp) + st.h[j] + self.eps * sn * p * p - r
            }
        })
    }
}

