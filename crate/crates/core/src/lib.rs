//! Steady periodic water waves with vorticity in height-function form.
//!
//! Units are chosen so that the mass flux and gravity are both one. The
//! stream-function coordinate `p` runs over `[0, 1]` from the bottom to the
//! free surface.

pub mod diagnostics;
pub mod dispersion;
pub mod error;
pub mod flowforce;
pub mod laminar;
pub mod numerics;
pub mod verifier;
pub mod vorticity;
pub mod wavesolver;

pub use error::{Error, Result};
pub use vorticity::{VorticityModel, VorticitySpec};
