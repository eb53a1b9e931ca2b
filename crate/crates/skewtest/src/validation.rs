//! Brute-force quadrature reference implementations of the marginal
//! likelihoods. Orders of magnitude slower than the production paths; used
//! by the test suites to certify the closed-form null marginal and the
//! integrated Laplace approximation, and available for ad-hoc validation.

use crate::error::{Error, Result};
use crate::evidence::{fit_mle_alt, loglik_null, loglik_skew, Dataset, FitOptions};
use crate::kernels::Baseline;
use crate::numerics::diff::inverse_pd;
use crate::numerics::optim::{minimize, OptimConfig};
use crate::numerics::quad::{integrate_line, QuadratureConfig};
use crate::priors::PriorSpec;
use std::cell::RefCell;

/// Tuning for the brute-force marginals.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Relative tolerance of the inner (location-scale) quadrature.
    pub inner_rel: f64,
    /// Relative tolerance of the outer (shape) quadrature.
    pub outer_rel: f64,
    /// Half-width of the central shape interval.
    pub lambda_box: f64,
    /// Shape value at which the tail substitution is truncated.
    pub tail_limit: f64,
    /// Inner integration box half-width in conditional-mode standard
    /// deviations, floored at `min_halfwidth`.
    pub span_sds: f64,
    pub min_halfwidth: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            inner_rel: 3e-7,
            outer_rel: 1e-6,
            lambda_box: 60.0,
            tail_limit: 1e6,
            span_sds: 12.0,
            min_halfwidth: 2.0,
        }
    }
}

fn quad_cfg(rel: f64, max_subdivisions: usize) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: rel,
        abs_tol: 1e-15,
        max_subdivisions,
        truncation_mass: 1e-12,
    }
}

/// Two-dimensional quadrature of the normal null marginal under the
/// 1/sigma prior, in (mu, t = ln sigma) coordinates where the prior cancels
/// the Jacobian. Reference for `log_marginal_null_closed`.
pub fn log_marginal_null_quadrature(data: &Dataset) -> Result<f64> {
    let n = data.len() as f64;
    let a = data.centered_sum_squares();
    if !(a > 0.0) {
        return Err(Error::DegenerateData(
            "zero sample variance: the null marginal diverges".into(),
        ));
    }
    let mu_hat = data.mean();
    let sigma_hat = (a / n).sqrt();
    let t_hat = sigma_hat.ln();
    let m = loglik_null(data, mu_hat, sigma_hat)?;
    let sd_t = (2.0 * n).sqrt().recip();
    let w_t = (16.0 * sd_t).max(2.0);
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let outer = integrate_line(
        |t| {
            let sigma = t.exp();
            let w_mu = 16.0 * sigma / n.sqrt();
            let inner = integrate_line(
                |mu| match loglik_null(data, mu, sigma) {
                    Ok(ll) => (ll - m).exp(),
                    Err(_) => f64::NAN,
                },
                mu_hat - w_mu,
                mu_hat + w_mu,
                &[mu_hat],
                &quad_cfg(1e-9, 200),
            );
            match inner {
                Ok(r) => r.value,
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    f64::NAN
                }
            }
        },
        t_hat - w_t,
        t_hat + w_t,
        &[t_hat],
        &quad_cfg(1e-9, 200),
    )
    .map_err(|e| err.borrow_mut().take().unwrap_or(e))?;
    Ok(m + outer.value.ln())
}

/// Inner 2D quadrature of the likelihood over (mu, t) at fixed shape,
/// with a warm-started conditional mode and a curvature-scaled box.
struct InnerIntegrator<'a> {
    data: &'a Dataset,
    baseline: Baseline,
    opts: &'a OracleOptions,
    optim: OptimConfig,
    /// (shape, conditional mode) pairs already computed, for warm starts.
    modes: RefCell<Vec<(f64, [f64; 2])>>,
}

impl<'a> InnerIntegrator<'a> {
    fn new(data: &'a Dataset, baseline: Baseline, opts: &'a OracleOptions, start: [f64; 2]) -> Self {
        InnerIntegrator {
            data,
            baseline,
            opts,
            optim: OptimConfig {
                tol: 1e-9,
                max_iterations: 600,
                initial_step: 0.1,
            },
            modes: RefCell::new(vec![(0.0, start)]),
        }
    }

    fn warm_start(&self, lambda: f64) -> [f64; 2] {
        let modes = self.modes.borrow();
        modes
            .iter()
            .min_by(|a, b| {
                (a.0 - lambda)
                    .abs()
                    .partial_cmp(&(b.0 - lambda).abs())
                    .unwrap()
            })
            .map(|(_, m)| *m)
            .unwrap()
    }

    /// log of integral exp{loglik(mu, e^t, lambda)} d mu d t.
    fn log_profile(&self, lambda: f64) -> Result<f64> {
        let obj = |x: &[f64]| {
            if !x[1].is_finite() || x[1].abs() > 300.0 {
                return f64::NAN;
            }
            match loglik_skew(self.data, self.baseline, x[0], x[1].exp(), lambda) {
                Ok(v) => -v,
                Err(_) => f64::NAN,
            }
        };
        let warm = self.warm_start(lambda);
        let fit = minimize(obj, &warm, &self.optim)?;
        let mode = [fit.argmin[0], fit.argmin[1]];
        self.modes.borrow_mut().push((lambda, mode));
        let m = -fit.value;
        // Box from the conditional curvature, floored for robustness.
        let hess = crate::numerics::diff::hessian_fd(obj, &mode)?;
        let sds = inverse_pd(&hess)
            .ok()
            .map(|inv| {
                [
                    inv[0][0].abs().sqrt().clamp(0.02, 10.0),
                    inv[1][1].abs().sqrt().clamp(0.02, 10.0),
                ]
            })
            .unwrap_or([1.0, 1.0]);
        let w_mu = (self.opts.span_sds * sds[0]).max(self.opts.min_halfwidth);
        let w_t = (self.opts.span_sds * sds[1]).max(self.opts.min_halfwidth);
        let err: RefCell<Option<Error>> = RefCell::new(None);
        let outer = integrate_line(
            |t| {
                let inner = integrate_line(
                    |mu| match loglik_skew(self.data, self.baseline, mu, t.exp(), lambda) {
                        Ok(ll) => (ll - m).exp(),
                        Err(_) => f64::NAN,
                    },
                    mode[0] - w_mu,
                    mode[0] + w_mu,
                    &[mode[0]],
                    &quad_cfg(self.opts.inner_rel, 120),
                );
                match inner {
                    Ok(r) => r.value,
                    Err(e) => {
                        *err.borrow_mut() = Some(e);
                        f64::NAN
                    }
                }
            },
            mode[1] - w_t,
            mode[1] + w_t,
            &[mode[1]],
            &quad_cfg(self.opts.inner_rel, 120),
        )
        .map_err(|e| err.borrow_mut().take().unwrap_or(e))?;
        Ok(m + outer.value.ln())
    }
}

/// log of the exact (quadrature) integral of the likelihood over
/// (mu, log sigma) at one fixed shape value. Reference for the per-node
/// Laplace profile inside the integrated approximation; useful for
/// diagnosing where the Laplace step loses accuracy.
pub fn log_profile_quadrature(
    data: &Dataset,
    baseline: Baseline,
    lambda: f64,
    opts: &OracleOptions,
) -> Result<f64> {
    let mle = fit_mle_alt(data, baseline, &FitOptions::default())?;
    let inner = InnerIntegrator::new(data, baseline, opts, [mle.params[0], mle.params[1].ln()]);
    inner.log_profile(lambda)
}

/// Full 3D quadrature of the alternative's marginal: exact (quadrature)
/// integration over (mu, sigma) at each shape node, adaptive quadrature
/// over the shape across [-lambda_box, lambda_box], and substituted tail
/// integrals out to `tail_limit` for polynomially-tailed priors. Reference
/// for `ila_log_marginal`; slow by design.
pub fn log_marginal_alt_quadrature(
    data: &Dataset,
    baseline: Baseline,
    prior: &PriorSpec,
    opts: &OracleOptions,
) -> Result<f64> {
    let mle = fit_mle_alt(data, baseline, &FitOptions::default())?;
    let lambda_hat = mle.params[2].clamp(-opts.lambda_box, opts.lambda_box);
    let start = [mle.params[0], mle.params[1].ln()];
    let inner = InnerIntegrator::new(data, baseline, opts, start);

    // Scout for the peak of g = log profile + log prior on a coarse grid so
    // that the integrand can be exponentiated safely.
    let sd = inverse_pd(&mle.hessian)
        .ok()
        .and_then(|inv| {
            let v = inv[2][2];
            if v.is_finite() && v > 0.0 {
                Some(v.sqrt())
            } else {
                None
            }
        })
        .unwrap_or(2.0)
        .clamp(0.05, 10.0);
    let mut scout: Vec<f64> = (0..41)
        .map(|i| lambda_hat - 12.0 * sd + (24.0 * sd) * i as f64 / 40.0)
        .filter(|l| l.abs() <= opts.lambda_box)
        .collect();
    scout.extend(prior.central_nodes());
    let mut g_star = f64::NEG_INFINITY;
    for l in scout {
        let lp = prior.log_density(l)?;
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let g = inner.log_profile(l)? + lp;
        if g > g_star {
            g_star = g;
        }
    }
    if !g_star.is_finite() {
        return Err(Error::EvaluationFailed(
            "could not locate the integrand's peak for the brute-force marginal".into(),
        ));
    }

    let err: RefCell<Option<Error>> = RefCell::new(None);
    let mut eval_g = |lambda: f64| -> f64 {
        let lp = match prior.log_density(lambda) {
            Ok(v) => v,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                return f64::NAN;
            }
        };
        if lp == f64::NEG_INFINITY {
            return 0.0;
        }
        match inner.log_profile(lambda) {
            Ok(l) => (l + lp - g_star).exp(),
            Err(e) => {
                *err.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };

    let central = integrate_line(
        &mut eval_g,
        -opts.lambda_box,
        opts.lambda_box,
        &[0.0, lambda_hat],
        &quad_cfg(opts.outer_rel, 240),
    )
    .map_err(|e| err.borrow_mut().take().unwrap_or(e))?
    .value;

    // Tail pieces via w = lambda^{-1/2}: d lambda = 2 w^{-3} dw maps
    // [box, tail_limit] to a finite w-interval on which the integrand of a
    // polynomially-tailed prior stays bounded.
    let w_hi = opts.lambda_box.powf(-0.5);
    let w_lo = opts.tail_limit.powf(-0.5);
    let mut tails = 0.0;
    for sign in [1.0f64, -1.0] {
        let t = integrate_line(
            |w| {
                let lambda = sign / (w * w);
                eval_g(lambda) * 2.0 / (w * w * w)
            },
            w_lo,
            w_hi,
            &[],
            &quad_cfg(opts.outer_rel, 120),
        )
        .map_err(|e| err.borrow_mut().take().unwrap_or(e))?;
        tails += t.value;
    }

    Ok(g_star + (central + tails).ln())
}
