//! Numerical foundations: special functions, adaptive quadrature,
//! derivative-free optimization, and finite-difference calculus.

pub mod diff;
pub mod optim;
pub mod quad;
pub mod special;

pub use diff::{cholesky, default_step, derivative_central, hessian_fd, inverse_pd, logdet_pd, solve_pd};
pub use optim::{minimize, OptimConfig, OptimResult};
pub use quad::{integrate_line, QuadResult, QuadratureConfig};
pub use special::{
    log_normal_cdf, log_sum_exp, ln_gamma, normal_cdf, normal_pdf, normal_pdf_cdf,
    normal_quantile,
};
