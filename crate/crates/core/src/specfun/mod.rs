//! Special functions.

pub mod bessel;
pub mod gamma;
pub mod meijer;

pub use bessel::{bessel_k, bessel_k_integer_series, bessel_k_scaled, ln_bessel_k, BesselKTable};
pub use gamma::{
    beta, digamma, gamma, ln_beta, ln_gamma, ln_gamma_complex, regularized_lower_gamma, regularized_upper_gamma,
    upper_incomplete_gamma, EULER_GAMMA,
};
pub use meijer::{meijer_g, MeijerG};
