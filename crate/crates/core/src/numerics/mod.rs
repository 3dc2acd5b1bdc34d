//! General numerical building blocks: quadrature, scalar roots, stencils and
//! dual numbers.

pub mod dual;
pub mod quadrature;
pub mod roots;
pub mod stencil;
