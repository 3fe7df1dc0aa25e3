//! Zero modes of massless Dirac and Weyl–Dirac operators: closed-form
//! families, the integral equation they satisfy, and numerical verification
//! of the limit of `r² f(rω)` as `r → ∞`.

pub mod asymptotics;
pub mod cli;
pub mod clifford;
pub mod integral_operator;
pub mod quadrature;
pub mod sampling;
pub mod zero_modes;
