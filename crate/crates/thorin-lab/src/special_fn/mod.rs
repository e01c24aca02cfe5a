//! Hand-rolled special functions tuned for the parameter ranges this crate
//! actually hits. Nothing here aims for full double precision over the whole
//! real line; each routine documents the window it is accurate on.

mod bessel;
mod gamma_fn;
mod hyp2f1;
mod lambda_t;
mod stable;

pub use bessel::{bessel_i0, bessel_i1, bessel_ik, bessel_ik_scaled, bessel_j, bessel_k0, bessel_k1};
pub use gamma_fn::{digamma, gamma, inc_gamma_p, inc_gamma_q, ln_beta, ln_gamma};
pub use hyp2f1::hyp2f1;
pub use lambda_t::{lambda_t, lambda_t_inv};
pub use stable::{stable_cdf, stable_pdf, stable_quantile};
pub(crate) use stable::ln_big_a;
