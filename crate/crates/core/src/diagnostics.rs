//! The auxiliary functions σ(s; r) and κ(s; r, FF).
//!
//! σ(s; r) is the flow force of the stream H(·; s) evaluated with a foreign
//! Bernoulli constant `r`:
//!
//! ```text
//! σ(s; r) = ∫₀¹ ( 1/(2H_p²) - H - Ω + Ω(1) + r ) H_p dp
//! ```
//!
//! and κ(s; r, FF) = 2(FF - σ(s; r)) - (r - R(s))². At the conjugate slips
//! σ(s_∓(r); r) = FF_±(r).

use serde::Serialize;

use crate::error::Result;
use crate::laminar::{self, check_slip, slip_integral};
use crate::vorticity::VorticityModel;

/// σ(s; r).
pub fn sigma(model: &VorticityModel, s: f64, r: f64) -> Result<f64> {
    check_slip(model, s)?;
    // Expanding the integrand: (s²/2 + Ω(1) + r) d - 2∫Ω H_p - d²/2.
    let d = laminar::depth(model, s)?;
    let omega_moment = slip_integral(model, s, 0.0, 1.0, |rad, p| {
        model.big_omega_at(p) / rad.sqrt()
    })?;
    Ok((0.5 * s * s + model.big_omega_at(1.0) + r) * d - 2.0 * omega_moment - 0.5 * d * d)
}

/// ∂σ/∂s = -s (r - R(s)) ∫₀¹ H_p³ dp.
pub fn sigma_derivative(model: &VorticityModel, s: f64, r: f64) -> Result<f64> {
    let big_r = laminar::bernoulli_of_slip(model, s)?;
    Ok(-s * (r - big_r) * laminar::cubic_moment(model, s)?)
}

/// κ(s; r, FF) = 2(FF - σ(s; r)) - (r - R(s))².
pub fn kappa(model: &VorticityModel, s: f64, r: f64, ff: f64) -> Result<f64> {
    let big_r = laminar::bernoulli_of_slip(model, s)?;
    Ok(2.0 * (ff - sigma(model, s, r)?) - (r - big_r).powi(2))
}

/// ∂κ/∂s = 2s (r - R(s)), independent of FF.
pub fn kappa_derivative(model: &VorticityModel, s: f64, r: f64) -> Result<f64> {
    let big_r = laminar::bernoulli_of_slip(model, s)?;
    Ok(2.0 * s * (r - big_r))
}

/// Flow force of the stream H(·; s) itself, σ(s; R(s)).
pub fn laminar_flow_force(model: &VorticityModel, s: f64) -> Result<f64> {
    sigma(model, s, laminar::bernoulli_of_slip(model, s)?)
}

/// σ, κ and ∂σ/∂s sampled over a set of slips.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticCurve {
    pub r: f64,
    pub ff: f64,
    pub s_samples: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub kappa_values: Vec<f64>,
    pub derivative_values: Vec<f64>,
}

pub fn diagnostic_curve(
    model: &VorticityModel,
    r: f64,
    ff: f64,
    s_samples: &[f64],
) -> Result<DiagnosticCurve> {
    let mut sigma_values = Vec::with_capacity(s_samples.len());
    let mut kappa_values = Vec::with_capacity(s_samples.len());
    let mut derivative_values = Vec::with_capacity(s_samples.len());
    for &s in s_samples {
        let sg = sigma(model, s, r)?;
        let big_r = laminar::bernoulli_of_slip(model, s)?;
        sigma_values.push(sg);
        kappa_values.push(2.0 * (ff - sg) - (r - big_r).powi(2));
        derivative_values.push(sigma_derivative(model, s, r)?);
    }
    Ok(DiagnosticCurve {
        r,
        ff,
        s_samples: s_samples.to_vec(),
        sigma_values,
        kappa_values,
        derivative_values,
    })
}
