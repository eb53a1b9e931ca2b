//! The overlap discrepancy between two densities, the minimum-discrepancy
//! curve over location and scale, and its signed version.
//!
//! For densities f1, f2 the discrepancy is d(f1, f2) = integral of
//! f1^2 / (f1 + f2); it equals 1/2 exactly when f1 = f2 and approaches 1 as
//! the supports separate. D_min(lambda) minimizes d over the location and
//! scale of the symmetric model against the skewed model at shape lambda,
//! and M(lambda) = sign(lambda) (D_min(lambda) - 1/2) is the signed curve
//! whose derivative drives the prior construction.

use crate::error::{Error, Result};
use crate::kernels::{Baseline, Density, SkewSymmetricModel, TwoPieceModel};
use crate::numerics::diff::{hessian_fd, solve_pd};
use crate::numerics::optim::{minimize, OptimConfig};
use crate::numerics::quad::{integrate_line, QuadratureConfig};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;

/// Which asymmetric family the curve is built against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SkewSymmetric,
    TwoPiece,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SkewSymmetric => "skew-symmetric",
            Family::TwoPiece => "two-piece",
        }
    }
}

/// Location/scale pair minimizing the discrepancy at one shape value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoTrue {
    pub mu: f64,
    pub sigma: f64,
}

/// Result of a single minimum-discrepancy evaluation.
#[derive(Debug, Clone, Copy)]
pub struct DminPoint {
    pub value: f64,
    pub mu_star: f64,
    pub sigma_star: f64,
}

/// Tuning for the inner optimization of `d_min`.
#[derive(Debug, Clone)]
pub struct DminOptions {
    pub quad: QuadratureConfig,
    pub optim: OptimConfig,
    /// Newton refinement steps after the simplex search (0 disables).
    pub polish_steps: usize,
}

impl Default for DminOptions {
    fn default() -> Self {
        DminOptions {
            quad: QuadratureConfig::discrepancy_default(),
            optim: OptimConfig {
                tol: 1e-10,
                max_iterations: 600,
                initial_step: 0.1,
            },
            polish_steps: 2,
        }
    }
}

impl DminOptions {
    /// Settings tight enough that the optimized value can feed a central
    /// finite difference in lambda.
    pub fn tight() -> Self {
        DminOptions {
            quad: QuadratureConfig::tight(),
            optim: OptimConfig {
                tol: 1e-12,
                max_iterations: 1200,
                initial_step: 0.05,
            },
            polish_steps: 3,
        }
    }
}

/// The discrepancy d(f1, f2) = integral f1^2 / (f1 + f2).
///
/// Both densities must be normalized. The integrand is bounded by f1, so the
/// domain is truncated where f1's support bounds leave `truncation_mass`
/// outside; the (harmless) zero-density regions of f2 need no widening.
pub fn discrepancy<A: Density, B: Density>(
    f1: &A,
    f2: &B,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (lo, hi) = f1.support_bounds(cfg.truncation_mass);
    let (lo2, hi2) = f2.support_bounds(0.5);
    let splits = [0.5 * (lo + hi), 0.5 * (lo2 + hi2)];
    let r = integrate_line(
        |x| {
            let a = f1.pdf(x);
            if a <= 0.0 {
                0.0
            } else {
                a * a / (a + f2.pdf(x))
            }
        },
        lo,
        hi,
        &splits,
        cfg,
    )?;
    Ok(r.value)
}

/// The shape-lambda skewed reference density fixed at location 0, scale 1.
enum Reference {
    Skew(SkewSymmetricModel),
    TwoPiece(TwoPieceModel),
}

impl Reference {
    fn build(family: Family, baseline: Baseline, lambda: f64) -> Result<Reference> {
        Ok(match family {
            Family::SkewSymmetric => {
                Reference::Skew(SkewSymmetricModel::new(baseline, 0.0, 1.0, lambda)?)
            }
            Family::TwoPiece => {
                Reference::TwoPiece(TwoPieceModel::new(baseline, 0.0, 1.0, lambda)?)
            }
        })
    }

    fn pdf(&self, x: f64) -> f64 {
        match self {
            Reference::Skew(m) => m.pdf(x),
            Reference::TwoPiece(m) => m.pdf(x),
        }
    }
}

/// Discrepancy between the location-scale symmetric baseline at (mu, sigma)
/// and the fixed skewed reference, as a function of (mu, sigma).
fn discrepancy_objective(
    baseline: Baseline,
    reference: &Reference,
    mu: f64,
    sigma: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let q = baseline.quantile(0.5 * quad.truncation_mass)?;
    let (lo, hi) = (mu + sigma * q, mu - sigma * q);
    let r = integrate_line(
        |x| {
            let a = baseline.pdf((x - mu) / sigma) / sigma;
            if a <= 0.0 {
                0.0
            } else {
                a * a / (a + reference.pdf(x))
            }
        },
        lo,
        hi,
        &[mu, 0.0],
        quad,
    )?;
    Ok(r.value)
}

/// Minimum discrepancy at one shape value, optimizing over location and
/// log-scale. Returns the value and the minimizing (pseudo-true) pair.
pub fn d_min(
    family: Family,
    baseline: Baseline,
    lambda: f64,
    warm_start: Option<(f64, f64)>,
    opts: &DminOptions,
) -> Result<DminPoint> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shape value must be finite, got {lambda}"
        )));
    }
    let reference = Reference::build(family, baseline, lambda)?;
    let (mu0, sigma0) = warm_start.unwrap_or((0.0, 1.0));
    if !(sigma0.is_finite() && sigma0 > 0.0 && mu0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "warm start must have finite location and positive scale, got ({mu0}, {sigma0})"
        )));
    }

    // Work in (mu, log sigma) so the scale stays positive without bounds.
    let last_err: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |p: &[f64]| -> f64 {
        match discrepancy_objective(baseline, &reference, p[0], p[1].exp(), &opts.quad) {
            Ok(v) => v,
            Err(e) => {
                *last_err.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };

    let start = [mu0, sigma0.ln()];
    let nm = minimize(&objective, &start, &opts.optim).map_err(|e| {
        let detail = last_err
            .borrow_mut()
            .take()
            .map(|inner| format!("; inner failure: {inner}"))
            .unwrap_or_default();
        Error::OptimizationFailed(format!(
            "minimum-discrepancy search failed at shape {lambda}: {e}{detail}"
        ))
    })?;

    // Newton polish: a couple of full steps sharpen the simplex result to
    // near quadrature precision. Any irregularity (non-PD curvature, failed
    // evaluation, no improvement) silently keeps the simplex answer.
    let mut best = nm.argmin.clone();
    let mut best_val = nm.value;
    // Difference step sized to the quadrature noise floor: the objective is
    // only reproducible to ~max(abs_tol, rel_tol * value), and the optimal
    // central-difference step grows like the cube root of that noise.
    let noise = opts
        .quad
        .abs_tol
        .max(opts.quad.rel_tol * best_val.abs())
        .max(f64::EPSILON);
    let grad_step = |x: f64| crate::numerics::diff::default_step(x).max(noise.cbrt() * x.abs().max(1.0));
    for _ in 0..opts.polish_steps {
        let grad = {
            let h0 = grad_step(best[0]);
            let h1 = grad_step(best[1]);
            let g0 = (objective(&[best[0] + h0, best[1]]) - objective(&[best[0] - h0, best[1]]))
                / (2.0 * h0);
            let g1 = (objective(&[best[0], best[1] + h1]) - objective(&[best[0], best[1] - h1]))
                / (2.0 * h1);
            [g0, g1]
        };
        if !(grad[0].is_finite() && grad[1].is_finite()) {
            break;
        }
        let hess = match hessian_fd(&objective, &best) {
            Ok(h) => h,
            Err(_) => break,
        };
        let step = match solve_pd(&hess, &[grad[0], grad[1]]) {
            Ok(s) => s,
            Err(_) => break,
        };
        let cand = [best[0] - step[0], best[1] - step[1]];
        let cand_val = objective(&cand);
        if cand_val.is_finite() && cand_val < best_val {
            best = cand.to_vec();
            best_val = cand_val;
        } else {
            break;
        }
    }

    Ok(DminPoint {
        value: best_val,
        mu_star: best[0],
        sigma_star: best[1].exp(),
    })
}

/// Minimum-discrepancy curve over a shape grid, with the signed transform
/// and the pseudo-true parameter path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancyCurve {
    pub family: Family,
    pub baseline: Baseline,
    pub lambdas: Vec<f64>,
    pub d_min: Vec<f64>,
    pub signed: Vec<f64>,
    pub pseudo_true: Vec<PseudoTrue>,
    /// Extrapolated large-shape limit of d_min, available when the grid
    /// reaches far enough; the curve converges to it only at O(1/lambda), so
    /// the endpoint value itself sits visibly below the limit.
    pub limit_estimate: Option<f64>,
}

fn sign_of(lambda: f64) -> f64 {
    if lambda > 0.0 {
        1.0
    } else if lambda < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lagrange extrapolation of (u_i, y_i) to u = 0.
fn extrapolate_to_zero(us: &[f64], ys: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..us.len() {
        let mut w = 1.0;
        for j in 0..us.len() {
            if j != i {
                w *= -us[j] / (us[i] - us[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

/// Smallest shape magnitude from which the 1/lambda extrapolation of the
/// curve limit is trusted.
const LIMIT_EXTRAPOLATION_MIN_SHAPE: f64 = 10.0;

fn side_limit(lambdas: &[f64], values: &[f64], positive: bool) -> Option<f64> {
    let mut nodes: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(values)
        .filter(|(l, _)| if positive { **l > 0.0 } else { **l < 0.0 })
        .map(|(l, v)| (l.abs(), *v))
        .collect();
    nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if nodes.len() < 3 || nodes.last().unwrap().0 < LIMIT_EXTRAPOLATION_MIN_SHAPE {
        return None;
    }
    let outer = &nodes[nodes.len() - 3..];
    let us: Vec<f64> = outer.iter().map(|(l, _)| 1.0 / l).collect();
    let ys: Vec<f64> = outer.iter().map(|(_, v)| *v).collect();
    Some(extrapolate_to_zero(&us, &ys))
}

impl DiscrepancyCurve {
    /// Signed-curve plateau from the raw endpoints: max signed value.
    pub fn endpoint_c(&self) -> f64 {
        self.signed.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pseudo-true (mu, sigma) at an off-grid shape value by linear
    /// interpolation, clamped to the grid ends.
    pub fn pseudo_true_at(&self, lambda: f64) -> Option<(f64, f64)> {
        if self.lambdas.is_empty() {
            return None;
        }
        let n = self.lambdas.len();
        if lambda <= self.lambdas[0] {
            let p = &self.pseudo_true[0];
            return Some((p.mu, p.sigma));
        }
        if lambda >= self.lambdas[n - 1] {
            let p = &self.pseudo_true[n - 1];
            return Some((p.mu, p.sigma));
        }
        let idx = self
            .lambdas
            .partition_point(|&l| l <= lambda)
            .saturating_sub(1);
        let (l0, l1) = (self.lambdas[idx], self.lambdas[idx + 1]);
        let t = if l1 > l0 { (lambda - l0) / (l1 - l0) } else { 0.0 };
        let (a, b) = (&self.pseudo_true[idx], &self.pseudo_true[idx + 1]);
        Some((
            a.mu * (1.0 - t) + b.mu * t,
            a.sigma * (1.0 - t) + b.sigma * t,
        ))
    }

    /// Write the curve as CSV with columns
    /// lambda,d_min,signed,mu_star,sigma_star.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["lambda", "d_min", "signed", "mu_star", "sigma_star"])?;
        for i in 0..self.lambdas.len() {
            wtr.serialize((
                self.lambdas[i],
                self.d_min[i],
                self.signed[i],
                self.pseudo_true[i].mu,
                self.pseudo_true[i].sigma,
            ))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Default shape grid for skew-symmetric curves: 241 nodes on [-30, 30].
pub fn default_skew_grid() -> Vec<f64> {
    (0..241).map(|i| -30.0 + 0.25 * i as f64).collect()
}

/// Default asymmetry grid for two-piece curves: 121 nodes on [-3, 3].
pub fn default_two_piece_grid() -> Vec<f64> {
    (0..121).map(|i| -3.0 + 0.05 * i as f64).collect()
}

/// Build the full minimum-discrepancy curve over `grid`.
///
/// The grid must be sorted and contain 0. Optimizations run outward from
/// lambda = 0 in both directions, warm-started by continuation from the
/// neighboring node's pseudo-true parameters.
pub fn build_curve(
    family: Family,
    baseline: Baseline,
    grid: &[f64],
    opts: &DminOptions,
) -> Result<DiscrepancyCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("shape grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "shape grid must be strictly increasing".into(),
        ));
    }
    if grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("shape grid must be finite".into()));
    }
    let zero_idx = match grid.iter().position(|&l| l == 0.0) {
        Some(i) => i,
        None => {
            return Err(Error::InvalidArgument(
                "shape grid must contain 0".into(),
            ))
        }
    };

    let n = grid.len();
    let mut d_vals = vec![0.0f64; n];
    let mut pseudo = vec![PseudoTrue { mu: 0.0, sigma: 1.0 }; n];

    let center = d_min(family, baseline, 0.0, Some((0.0, 1.0)), opts)?;
    d_vals[zero_idx] = center.value;
    pseudo[zero_idx] = PseudoTrue {
        mu: center.mu_star,
        sigma: center.sigma_star,
    };

    // Continuation outward on each side.
    let mut warm = (center.mu_star, center.sigma_star);
    for i in (zero_idx + 1)..n {
        let p = d_min(family, baseline, grid[i], Some(warm), opts)?;
        d_vals[i] = p.value;
        pseudo[i] = PseudoTrue {
            mu: p.mu_star,
            sigma: p.sigma_star,
        };
        warm = (p.mu_star, p.sigma_star);
    }
    warm = (center.mu_star, center.sigma_star);
    for i in (0..zero_idx).rev() {
        let p = d_min(family, baseline, grid[i], Some(warm), opts)?;
        d_vals[i] = p.value;
        pseudo[i] = PseudoTrue {
            mu: p.mu_star,
            sigma: p.sigma_star,
        };
        warm = (p.mu_star, p.sigma_star);
    }

    let signed: Vec<f64> = grid
        .iter()
        .zip(&d_vals)
        .map(|(&l, &d)| sign_of(l) * (d - 0.5))
        .collect();

    let sides: Vec<f64> = [
        side_limit(grid, &d_vals, true),
        side_limit(grid, &d_vals, false),
    ]
    .into_iter()
    .flatten()
    .collect();
    let limit_estimate = if sides.is_empty() {
        None
    } else {
        Some(sides.iter().sum::<f64>() / sides.len() as f64)
    };

    Ok(DiscrepancyCurve {
        family,
        baseline,
        lambdas: grid.to_vec(),
        d_min: d_vals,
        signed,
        pseudo_true: pseudo,
        limit_estimate,
    })
}
