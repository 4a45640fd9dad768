//! Special functions and log-domain arithmetic.
//!
//! Everything here is a pure function; shapes up to about 1e5 are supported.

mod beta;
mod gamma;
mod lambert;
mod log_scalar;
mod normal;

pub use beta::reg_beta_cdf_sym;
pub use gamma::{reg_gamma_cdf, reg_gamma_cdf_inv, reg_gamma_sf, reg_gamma_sf_inv};
pub use lambert::{lambert_w0, lambert_w0_of_exp};
pub use log_scalar::{signed_log_sum, LogScalar};
pub use normal::{std_normal_cdf, std_normal_quantile};

pub(crate) use beta::{beta_sym_centered, reg_beta};
pub(crate) use gamma::{gamma_quantile, gamma_tails, ln_gamma_pdf};
