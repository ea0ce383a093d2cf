//! Dirac-Bergmann constraint analysis for quadratic field theories in one
//! space dimension, with a floating-point verifier.

pub mod dirac;
pub mod frontend;
pub mod legendre;
pub mod symkernel;
pub mod verifier;
