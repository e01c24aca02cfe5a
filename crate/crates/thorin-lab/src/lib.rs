//! Numerical machinery for generalized gamma convolutions (GGC) on the positive
//! half-line and their Dirichlet-mean counterparts.
//!
//! A GGC subordinator is determined by a Bernstein exponent of the form
//! `psi(l) = integral log(1 + l/z) mu(dz)` for a Thorin measure `mu`. This crate
//! provides:
//!
//! * a catalog of mixing laws `G` whose associated exponents
//!   `psi_G(l) = E log(1 + l/G)` have closed forms ([`mixing_laws`], [`bernstein`]);
//! * exact and discretized samplers for the subordinator values `Gamma_t(G)` and
//!   the normalized means `D_t(G)` ([`samplers`]);
//! * density evaluation through duality and Hankel-kernel Monte Carlo as well as
//!   closed integral forms ([`densities`]);
//! * recovery of the mixing cdf from the law of its Dirichlet mean
//!   ([`thorin_recovery`]);
//! * Monte-Carlo/quadrature cross-validation helpers ([`verify`]).
//!
//! Everything is deterministic given a [`samplers::RandomStream`] seed.

pub mod bernstein;
pub mod densities;
pub mod error;
pub mod mixing_laws;
pub mod quad;
pub mod samplers;
pub mod special_fn;
pub mod thorin_recovery;
pub mod verify;

pub use error::{Error, Result};
