//! Scattering resonances of even asymptotically hyperbolic surfaces.
//!
//! Per Fourier mode the conjugated resolvent family is a linear pencil
//! `P(lambda) = A + lambda B` on an interval crossing the boundary at
//! infinity; its finite eigenvalues are the resonances.

pub mod assembly;
pub mod chebyshev;
pub mod cli;
pub mod eig;
pub mod geometry;
pub mod oracle;
pub mod resonance;
pub mod ultraspherical;
