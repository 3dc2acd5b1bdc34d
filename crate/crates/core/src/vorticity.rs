//! Vorticity distributions ω(p) and their primitives Ω(p) = ∫₀ᵖ ω.
//!
//! Three concrete families are supported: a constant, an affine function of
//! the stream-function value, and a tabulated distribution interpolated by a
//! monotone piecewise cubic (Fritsch-Carlson slopes). Each has a closed-form
//! primitive, so Ω is exact up to rounding.
//!
//! The maximum of Ω over `[0, 1]` is located once, at construction, by dense
//! sampling plus golden-section refinement. It fixes the lower bound `s_0` on
//! admissible bottom slips and the point where stream integrands become
//! singular as `s -> s_0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::golden_max;

/// Number of equispaced samples used to locate the maximum of Ω.
pub const PEAK_SAMPLES: usize = 1025;

/// Declarative form of a vorticity model, as found in configuration and
/// solution files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VorticitySpec {
    /// ω(p) = b
    Constant { b: f64 },
    /// ω(p) = a + b p
    Affine { a: f64, b: f64 },
    /// Samples `[p, ω(p)]` with strictly increasing `p`, first at 0 and last at 1.
    Tabulated { samples: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant { b: f64 },
    Affine { a: f64, b: f64 },
    Tabulated(MonotoneCubic),
}

/// Location and value of `max_{[0,1]} Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaPeak {
    pub p_star: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityModel {
    spec: VorticitySpec,
    kind: Kind,
    peak: OmegaPeak,
}

impl VorticityModel {
    pub fn constant(b: f64) -> Result<Self> {
        Self::from_spec(VorticitySpec::Constant { b })
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::from_spec(VorticitySpec::Affine { a, b })
    }

    pub fn tabulated(samples: Vec<[f64; 2]>) -> Result<Self> {
        Self::from_spec(VorticitySpec::Tabulated { samples })
    }

    /// Irrotational flow, ω ≡ 0.
    pub fn irrotational() -> Self {
        Self::constant(0.0).expect("zero vorticity is valid")
    }

    pub fn from_spec(spec: VorticitySpec) -> Result<Self> {
        let kind = match &spec {
            VorticitySpec::Constant { b } => {
                check_finite(&[*b])?;
                Kind::Constant { b: *b }
            }
            VorticitySpec::Affine { a, b } => {
                check_finite(&[*a, *b])?;
                Kind::Affine { a: *a, b: *b }
            }
            VorticitySpec::Tabulated { samples } => {
                Kind::Tabulated(MonotoneCubic::new(samples)?)
            }
        };
        let mut model = Self {
            spec,
            kind,
            peak: OmegaPeak {
                p_star: 0.0,
                value: 0.0,
            },
        };
        model.peak = model.locate_peak();
        Ok(model)
    }

    pub fn spec(&self) -> &VorticitySpec {
        &self.spec
    }

    /// ω(p); domain error outside `[0, 1]`.
    pub fn omega(&self, p: f64) -> Result<f64> {
        check_unit(p)?;
        Ok(self.omega_at(p))
    }

    /// Ω(p) = ∫₀ᵖ ω; domain error outside `[0, 1]`.
    pub fn big_omega(&self, p: f64) -> Result<f64> {
        check_unit(p)?;
        Ok(self.big_omega_at(p))
    }

    /// Unchecked ω for internal loops over points known to lie in `[0, 1]`.
    pub(crate) fn omega_at(&self, p: f64) -> f64 {
        match &self.kind {
            Kind::Constant { b } => *b,
            Kind::Affine { a, b } => a + b * p,
            Kind::Tabulated(c) => c.eval(p),
        }
    }

    pub(crate) fn big_omega_at(&self, p: f64) -> f64 {
        match &self.kind {
            Kind::Constant { b } => b * p,
            Kind::Affine { a, b } => a * p + 0.5 * b * p * p,
            Kind::Tabulated(c) => c.integral(p),
        }
    }

    pub fn peak(&self) -> OmegaPeak {
        self.peak
    }

    /// `s_0 = sqrt(max 2Ω)`, the infimum of admissible bottom slips.
    pub fn slip_lower_bound(&self) -> f64 {
        (2.0 * self.peak.value.max(0.0)).sqrt()
    }

    fn locate_peak(&self) -> OmegaPeak {
        let n = PEAK_SAMPLES;
        let step = 1.0 / (n - 1) as f64;
        let mut best = (0usize, self.big_omega_at(0.0));
        for k in 1..n {
            let p = if k == n - 1 { 1.0 } else { k as f64 * step };
            let v = self.big_omega_at(p);
            if v > best.1 {
                best = (k, v);
            }
        }
        let k = best.0;
        let lo = k.saturating_sub(1) as f64 * step;
        let hi = ((k + 1).min(n - 1) as f64 * step).min(1.0);
        let (p_ref, v_ref) = golden_max(|p| self.big_omega_at(p), lo, hi, 1e-12);
        let sample_p = if k == n - 1 { 1.0 } else { k as f64 * step };
        if v_ref > best.1 {
            OmegaPeak {
                p_star: p_ref,
                value: v_ref,
            }
        } else {
            OmegaPeak {
                p_star: sample_p,
                value: best.1,
            }
        }
    }
}

pub fn eval_omega(model: &VorticityModel, p: f64) -> Result<f64> {
    model.omega(p)
}

pub fn eval_big_omega(model: &VorticityModel, p: f64) -> Result<f64> {
    model.big_omega(p)
}

pub fn slip_lower_bound(model: &VorticityModel) -> f64 {
    model.slip_lower_bound()
}

fn check_unit(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("p = {p} outside [0, 1]")))
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invalid("vorticity parameters must be finite".into()))
    }
}

/// Monotone piecewise cubic Hermite interpolant with exact running integral.
#[derive(Debug, Clone, PartialEq)]
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MonotoneCubic {
    fn new(samples: &[[f64; 2]]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Invalid(
                "tabulated vorticity needs at least two samples".into(),
            ));
        }
        let x: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        let y: Vec<f64> = samples.iter().map(|s| s[1]).collect();
        check_finite(&x)?;
        check_finite(&y)?;
        if x[0] != 0.0 || *x.last().unwrap() != 1.0 {
            return Err(Error::Invalid(
                "tabulated vorticity samples must start at p = 0 and end at p = 1".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(
                "tabulated vorticity sample points must be strictly increasing".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        let mut cumulative = vec![0.0; n];
        for k in 0..n - 1 {
            cumulative[k + 1] = cumulative[k]
                + h[k] * (y[k] + y[k + 1]) / 2.0
                + h[k] * h[k] * (slopes[k] - slopes[k + 1]) / 12.0;
        }
        Ok(Self {
            x,
            y,
            slopes,
            cumulative,
        })
    }

    fn segment(&self, p: f64) -> usize {
        let k = self.x.partition_point(|&xi| xi <= p);
        k.saturating_sub(1).min(self.x.len() - 2)
    }

    fn coefficients(&self, k: usize) -> (f64, f64, f64, f64, f64) {
        let h = self.x[k + 1] - self.x[k];
        let d = (self.y[k + 1] - self.y[k]) / h;
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        let c2 = (3.0 * d - 2.0 * m0 - m1) / h;
        let c3 = (m0 + m1 - 2.0 * d) / (h * h);
        (self.y[k], m0, c2, c3, self.x[k])
    }

    fn eval(&self, p: f64) -> f64 {
        let (c0, c1, c2, c3, x0) = self.coefficients(self.segment(p));
        let u = p - x0;
        c0 + u * (c1 + u * (c2 + u * c3))
    }

    fn integral(&self, p: f64) -> f64 {
        let k = self.segment(p);
        let (c0, c1, c2, c3, x0) = self.coefficients(k);
        let u = p - x0;
        self.cumulative[k] + u * (c0 + u * (c1 / 2.0 + u * (c2 / 3.0 + u * c3 / 4.0)))
    }
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
