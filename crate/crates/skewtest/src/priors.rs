//! Prior densities on the shape parameter: the exact minimum-discrepancy
//! prior (proportional to the derivative of the signed discrepancy curve),
//! its Student-t-like closed-form approximation, the discrepancy-informed
//! moment prior, and the heavy-tailed local Student-t reference prior; plus
//! the least-squares fit of the vanishing rate near zero.

use crate::discrepancy::{d_min, DiscrepancyCurve, DminOptions, Family};
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_line, QuadratureConfig};
use crate::numerics::special::{ln_gamma, SQRT_2PI};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;

/// Defaults for the closed-form approximate prior |l|^k / (M (1+a l^2)^m).
pub const DEFAULT_MOOMIN_K: f64 = 4.0;
pub const DEFAULT_MOOMIN_M: f64 = 3.0;
pub const DEFAULT_MOOMIN_A: f64 = 0.28;
/// Default scale of the discrepancy-informed moment prior.
pub const DEFAULT_DIMOM_SIGMA: f64 = 1.69;
/// Default Student-t reference prior: 1/2 degrees of freedom, scale pi/2.
pub const DEFAULT_JEFFREYS_DF: f64 = 0.5;
pub const DEFAULT_JEFFREYS_SCALE: f64 = PI / 2.0;

/// Default neighborhood for the vanishing-rate fit.
pub const DEFAULT_RATE_HALFWIDTH: f64 = 0.5;
const RATE_FIT_NODES: usize = 25;
const RATE_FIT_EXCLUSION: f64 = 0.02;

/// How the exact prior's unnormalized value is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoominMethod {
    /// Stationarity-based integral at the pseudo-true location/scale.
    Envelope,
    /// Richardson-extrapolated central difference of the signed curve,
    /// re-minimizing at the stencil points.
    CurveDerivative,
}

/// Tuning for exact-prior evaluations.
#[derive(Debug, Clone)]
pub struct MoominEvalOptions {
    /// Quadrature for the envelope integral.
    pub quad: QuadratureConfig,
    /// Inner minimization settings (pseudo-true refinement, stencil points).
    pub dmin: DminOptions,
    /// Re-minimize from the interpolated pseudo-true warm start before
    /// evaluating the envelope. Needed for high relative accuracy; the
    /// plain interpolation is accurate enough for marginal-likelihood use.
    pub refine_pseudo_true: bool,
    /// Base step for the curve-derivative stencil.
    pub derivative_step: f64,
}

impl Default for MoominEvalOptions {
    fn default() -> Self {
        MoominEvalOptions {
            quad: QuadratureConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-13,
                max_subdivisions: 2000,
                truncation_mass: 1e-12,
            },
            dmin: DminOptions::tight(),
            refine_pseudo_true: true,
            derivative_step: 0.05,
        }
    }
}

impl MoominEvalOptions {
    /// Cheap settings for bulk density evaluation: moderate quadrature and
    /// the default (non-tight) refinement of the pseudo-true point.
    ///
    /// Refinement stays on even here: the envelope value's error is
    /// first-order in the pseudo-true error and does not shrink with the
    /// shape, so plain interpolation of the stored path floods the region
    /// near zero with optimizer noise and erases the vanishing structure.
    pub fn fast() -> Self {
        MoominEvalOptions {
            quad: QuadratureConfig {
                rel_tol: 1e-8,
                abs_tol: 1e-12,
                max_subdivisions: 800,
                truncation_mass: 1e-11,
            },
            dmin: DminOptions::default(),
            refine_pseudo_true: true,
            derivative_step: 0.05,
        }
    }
}

fn require_skew_curve(curve: &DiscrepancyCurve) -> Result<()> {
    if curve.family != Family::SkewSymmetric {
        return Err(Error::InvalidArgument(
            "the exact shape prior is defined for the skew-symmetric family only".into(),
        ));
    }
    if curve.lambdas.len() < 2 {
        return Err(Error::InvalidArgument(
            "curve must have at least two grid nodes".into(),
        ));
    }
    Ok(())
}

fn curve_span(curve: &DiscrepancyCurve) -> (f64, f64) {
    (curve.lambdas[0], *curve.lambdas.last().unwrap())
}

/// Envelope integrand value at one x: with f1 the symmetric model density at
/// the pseudo-true (mu, sigma) and s the skewed reference at shape lambda,
/// the integrand is f1^2 * (d s / d lambda) / (f1 + s)^2.
fn envelope_integral(
    curve: &DiscrepancyCurve,
    lambda: f64,
    mu: f64,
    sigma: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let b = curve.baseline;
    let mass = (quad.truncation_mass * 1e-3).max(1e-200);
    let q = b.quantile(0.5 * mass)?;
    let lo = (mu + sigma * q).min(q);
    let hi = (mu - sigma * q).max(-q);
    let w = 8.0 / lambda.abs().max(1.0);
    let splits = [0.0, mu, -w, w];
    let r = integrate_line(
        |x| {
            let f1 = b.pdf((x - mu) / sigma) / sigma;
            let fx = b.pdf(x);
            let arg = lambda * b.omega(x);
            let sref = 2.0 * fx * b.skewing_cdf(arg);
            let den = f1 + sref;
            if den <= 0.0 {
                return 0.0;
            }
            let num = f1 * f1 * 2.0 * b.omega(x) * fx * b.skewing_pdf(arg);
            num / (den * den)
        },
        lo,
        hi,
        &splits,
        quad,
    )?;
    Ok(r.value.abs())
}

fn pseudo_true_for(
    curve: &DiscrepancyCurve,
    lambda: f64,
    opts: &MoominEvalOptions,
) -> Result<(f64, f64)> {
    let warm = curve
        .pseudo_true_at(lambda)
        .ok_or_else(|| Error::InvalidArgument("curve has no pseudo-true path".into()))?;
    if !opts.refine_pseudo_true {
        return Ok(warm);
    }
    let p = d_min(curve.family, curve.baseline, lambda, Some(warm), &opts.dmin)?;
    Ok((p.mu_star, p.sigma_star))
}

/// Unnormalized exact prior value at `lambda`, by either method.
///
/// `lambda` must lie within the curve's grid span. The two methods agree
/// within 1e-4 relative away from zero; the envelope method is the primary
/// evaluator and the curve-derivative method is its independent cross-check.
pub fn moomin_exact_unnorm(
    curve: &DiscrepancyCurve,
    lambda: f64,
    method: MoominMethod,
    opts: &MoominEvalOptions,
) -> Result<f64> {
    require_skew_curve(curve)?;
    let (lo, hi) = curve_span(curve);
    if !lambda.is_finite() || lambda < lo || lambda > hi {
        return Err(Error::OutOfDomain(format!(
            "shape {lambda} outside the curve span [{lo}, {hi}]"
        )));
    }
    match method {
        MoominMethod::Envelope => {
            // The pseudo-true path is odd in location and even in scale
            // (reflection symmetry of the family), so the minimizer is
            // computed once on the positive side and reflected; evaluations
            // at mirrored shapes then agree to quadrature precision instead
            // of optimizer precision.
            let (mu_pos, sigma) = pseudo_true_for(curve, lambda.abs(), opts)?;
            let mu = if lambda < 0.0 { -mu_pos } else { mu_pos };
            envelope_integral(curve, lambda, mu, sigma, &opts.quad)
        }
        MoominMethod::CurveDerivative => {
            let h = opts.derivative_step * lambda.abs().max(1.0);
            let signed_at = |l: f64| -> Result<f64> {
                let warm = curve.pseudo_true_at(l);
                let p = d_min(curve.family, curve.baseline, l, warm, &opts.dmin)?;
                let sign = if l > 0.0 {
                    1.0
                } else if l < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                Ok(sign * (p.value - 0.5))
            };
            // Richardson extrapolation of the central difference: step h and
            // h/2 combine to cancel the O(h^2) truncation term.
            let coarse = (signed_at(lambda + h)? - signed_at(lambda - h)?) / (2.0 * h);
            let fine =
                (signed_at(lambda + 0.5 * h)? - signed_at(lambda - 0.5 * h)?) / h;
            Ok(((4.0 * fine - coarse) / 3.0).abs())
        }
    }
}

/// A prior density on the shape parameter.
///
/// Construction validates parameters and fills in analytic normalization
/// constants; the exact kind additionally needs `normalize()` to integrate
/// its curve before density evaluations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    MoominExact {
        curve: DiscrepancyCurve,
        norm_const: Option<f64>,
        /// Coefficient c of the c/lambda^2 tail law beyond the grid span,
        /// matched at the endpoints during normalization.
        tail_coefficient: Option<f64>,
    },
    MoominApprox {
        k: f64,
        m: f64,
        a: f64,
        norm_const: f64,
    },
    Dimom {
        sigma_m: f64,
    },
    JeffreysT {
        df: f64,
        scale: f64,
    },
}

/// Closed-form normalizing constant of |l|^k / (1 + a l^2)^m:
/// a^{-(k+1)/2} Gamma((k+1)/2) Gamma(m - (k+1)/2) / Gamma(m).
fn approx_norm_const(k: f64, m: f64, a: f64) -> f64 {
    (-0.5 * (k + 1.0) * a.ln() + ln_gamma(0.5 * (k + 1.0)) + ln_gamma(m - 0.5 * (k + 1.0))
        - ln_gamma(m))
    .exp()
}

impl PriorSpec {
    pub fn moomin_exact(curve: DiscrepancyCurve) -> Result<PriorSpec> {
        require_skew_curve(&curve)?;
        let (lo, hi) = curve_span(&curve);
        if (lo + hi).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "exact prior needs a grid symmetric around 0, got [{lo}, {hi}]"
            )));
        }
        Ok(PriorSpec::MoominExact {
            curve,
            norm_const: None,
            tail_coefficient: None,
        })
    }

    pub fn moomin_approx(k: f64, m: f64, a: f64) -> Result<PriorSpec> {
        if !(k > 0.0 && k.is_finite() && a > 0.0 && a.is_finite() && m.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "approximate prior needs k > 0, a > 0, finite m; got k={k}, m={m}, a={a}"
            )));
        }
        if m <= 0.5 * (k + 1.0) {
            return Err(Error::InvalidArgument(format!(
                "approximate prior integrability needs m > (k+1)/2; got k={k}, m={m}"
            )));
        }
        Ok(PriorSpec::MoominApprox {
            k,
            m,
            a,
            norm_const: approx_norm_const(k, m, a),
        })
    }

    pub fn dimom(sigma_m: f64) -> Result<PriorSpec> {
        if !(sigma_m > 0.0 && sigma_m.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "moment prior scale must be positive, got {sigma_m}"
            )));
        }
        Ok(PriorSpec::Dimom { sigma_m })
    }

    pub fn jeffreys_t(df: f64, scale: f64) -> Result<PriorSpec> {
        if !(df > 0.0 && df.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Student-t prior needs positive df and scale, got df={df}, scale={scale}"
            )));
        }
        Ok(PriorSpec::JeffreysT { df, scale })
    }

    pub fn default_moomin_approx() -> PriorSpec {
        PriorSpec::moomin_approx(DEFAULT_MOOMIN_K, DEFAULT_MOOMIN_M, DEFAULT_MOOMIN_A)
            .expect("default parameters are valid")
    }

    pub fn default_dimom() -> PriorSpec {
        PriorSpec::dimom(DEFAULT_DIMOM_SIGMA).expect("default parameters are valid")
    }

    pub fn default_jeffreys() -> PriorSpec {
        PriorSpec::jeffreys_t(DEFAULT_JEFFREYS_DF, DEFAULT_JEFFREYS_SCALE)
            .expect("default parameters are valid")
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PriorSpec::MoominExact { .. } => "moomin_exact",
            PriorSpec::MoominApprox { .. } => "moomin_approx",
            PriorSpec::Dimom { .. } => "dimom",
            PriorSpec::JeffreysT { .. } => "jeffreys_t",
        }
    }

    pub fn is_normalized(&self) -> bool {
        match self {
            PriorSpec::MoominExact { norm_const, .. } => norm_const.is_some(),
            _ => true,
        }
    }

    /// Fill in the numerical normalization for the exact kind; the other
    /// kinds carry analytic constants and pass through unchanged.
    ///
    /// The exact prior integrates the envelope values over the grid span and
    /// attaches c/lambda^2 tails matched at the endpoints, so the normalized
    /// density is proper on all of the real line.
    pub fn normalize(self) -> Result<PriorSpec> {
        match self {
            PriorSpec::MoominExact { curve, .. } => {
                let opts = MoominEvalOptions::fast();
                let span = curve_span(&curve).1;
                let last_err: RefCell<Option<Error>> = RefCell::new(None);
                let r = integrate_line(
                    |l| match moomin_exact_unnorm(&curve, l, MoominMethod::Envelope, &opts) {
                        Ok(v) => v,
                        Err(e) => {
                            *last_err.borrow_mut() = Some(e);
                            f64::NAN
                        }
                    },
                    -span,
                    span,
                    &[-2.0, 0.0, 2.0],
                    &QuadratureConfig {
                        rel_tol: 1e-7,
                        abs_tol: 1e-12,
                        max_subdivisions: 400,
                        truncation_mass: 1e-11,
                    },
                )
                .map_err(|e| match last_err.borrow_mut().take() {
                    Some(inner) => inner,
                    None => e,
                })?;
                let u_hi = moomin_exact_unnorm(&curve, span, MoominMethod::Envelope, &opts)?;
                let u_lo = moomin_exact_unnorm(&curve, -span, MoominMethod::Envelope, &opts)?;
                let c = 0.5 * (u_hi + u_lo) * span * span;
                let z = r.value + 2.0 * c / span;
                if !(z.is_finite() && z > 0.0) {
                    return Err(Error::EvaluationFailed(format!(
                        "exact prior normalization is not positive: {z}"
                    )));
                }
                Ok(PriorSpec::MoominExact {
                    curve,
                    norm_const: Some(z),
                    tail_coefficient: Some(c),
                })
            }
            other => Ok(other),
        }
    }

    /// Normalized density at `lambda`.
    pub fn density(&self, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shape value must be finite, got {lambda}"
            )));
        }
        match self {
            PriorSpec::MoominExact {
                curve,
                norm_const,
                tail_coefficient,
            } => {
                let z = norm_const.ok_or_else(|| {
                    Error::InvalidArgument("exact prior must be normalized first".into())
                })?;
                let c = tail_coefficient.ok_or_else(|| {
                    Error::InvalidArgument("exact prior must be normalized first".into())
                })?;
                // At the symmetry point the envelope integrand is odd and
                // the value is exactly zero; skip the numerical evaluation,
                // which would return optimizer-noise residue instead.
                if lambda == 0.0 {
                    return Ok(0.0);
                }
                let span = curve_span(curve).1;
                if lambda.abs() <= span {
                    let u = moomin_exact_unnorm(
                        curve,
                        lambda,
                        MoominMethod::Envelope,
                        &MoominEvalOptions::fast(),
                    )?;
                    Ok(u / z)
                } else {
                    Ok(c / (lambda * lambda) / z)
                }
            }
            PriorSpec::MoominApprox { k, m, a, norm_const } => {
                Ok(lambda.abs().powf(*k) / (norm_const * (1.0 + a * lambda * lambda).powf(*m)))
            }
            PriorSpec::Dimom { sigma_m } => {
                let s2 = sigma_m * sigma_m;
                Ok(lambda * lambda * (-0.5 * lambda * lambda / s2).exp()
                    / (SQRT_2PI * s2 * sigma_m))
            }
            PriorSpec::JeffreysT { .. } => Ok(self.log_density(lambda)?.exp()),
        }
    }

    /// log density; -infinity at the exact zeros of the non-local kinds.
    pub fn log_density(&self, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shape value must be finite, got {lambda}"
            )));
        }
        match self {
            PriorSpec::MoominExact { .. } => {
                let d = self.density(lambda)?;
                Ok(d.ln())
            }
            PriorSpec::MoominApprox { k, m, a, norm_const } => {
                Ok(k * lambda.abs().ln() - m * (a * lambda * lambda).ln_1p() - norm_const.ln())
            }
            PriorSpec::Dimom { sigma_m } => {
                let s2 = sigma_m * sigma_m;
                Ok(2.0 * lambda.abs().ln()
                    - 0.5 * lambda * lambda / s2
                    - (SQRT_2PI.ln() + 3.0 * sigma_m.ln()))
            }
            PriorSpec::JeffreysT { df, scale } => {
                let t = lambda / scale;
                Ok(ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * (df * PI).ln()
                    - scale.ln()
                    - 0.5 * (df + 1.0) * (t * t / df).ln_1p())
            }
        }
    }

    /// Characteristic scale of the prior's structure, for grid placement.
    pub fn characteristic_scale(&self) -> f64 {
        match self {
            PriorSpec::MoominExact { .. } => 2.0,
            PriorSpec::MoominApprox { a, .. } => a.sqrt().recip(),
            PriorSpec::Dimom { sigma_m } => std::f64::consts::SQRT_2 * sigma_m,
            PriorSpec::JeffreysT { scale, .. } => *scale,
        }
    }

    /// Shape values where the prior has structure (the zero at the origin,
    /// the rise, the mode); marginal-likelihood grids include these so that
    /// narrow or non-local priors are resolved.
    pub fn central_nodes(&self) -> Vec<f64> {
        let s = self.characteristic_scale();
        let mut nodes = vec![0.0];
        for mult in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0] {
            nodes.push(mult * s);
            nodes.push(-mult * s);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes
    }

    /// Write the density on `grid` as CSV with columns lambda,density.
    pub fn write_density_csv<W: std::io::Write>(&self, grid: &[f64], w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["lambda", "density"])?;
        for &l in grid {
            wtr.serialize((l, self.density(l)?))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Result of a log-log least-squares rate fit near zero.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    /// OLS slope of log density against log |shape|.
    pub slope: f64,
    /// The even integer closest to the slope.
    pub even_power: i64,
}

/// Least-squares slope of log f against log |x| on a symmetric grid of
/// `nodes` points over [-halfwidth, halfwidth], excluding |x| < `exclusion`
/// and non-positive values. Fewer than 5 usable nodes is an error.
pub fn fit_rate_of<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    halfwidth: f64,
    nodes: usize,
    exclusion: f64,
) -> Result<RateFit> {
    if !(halfwidth > 0.0 && halfwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "halfwidth must be positive, got {halfwidth}"
        )));
    }
    if nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 2 grid nodes, got {nodes}"
        )));
    }
    let step = 2.0 * halfwidth / (nodes - 1) as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..nodes {
        let l = -halfwidth + step * i as f64;
        if l.abs() < exclusion {
            continue;
        }
        let v = f(l)?;
        if v > 0.0 && v.is_finite() {
            xs.push(l.abs().ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 5 usable nodes, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::FittingFailed(
            "rate fit grid has no spread in log |shape|".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        even_power: 2 * (0.5 * slope).round() as i64,
    })
}

/// Vanishing rate of the exact prior near zero: log-log least squares of the
/// envelope values over a symmetric neighborhood (25 nodes, |shape| >= 0.02).
pub fn fit_vanishing_rate(curve: &DiscrepancyCurve, halfwidth: f64) -> Result<RateFit> {
    require_skew_curve(curve)?;
    let opts = MoominEvalOptions::default();
    fit_rate_of(
        |l| moomin_exact_unnorm(curve, l, MoominMethod::Envelope, &opts),
        halfwidth,
        RATE_FIT_NODES,
        RATE_FIT_EXCLUSION,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::{build_curve, default_skew_grid};
    use crate::kernels::Baseline;
    use std::sync::OnceLock;

    /// Frozen independently computed unnormalized envelope values (normal
    /// baseline), accurate to ~1e-6 relative.
    const ENVELOPE_REFS: [(f64, f64); 5] = [
        (0.5, 1.313390e-4),
        (1.0, 1.622450e-3),
        (2.0, 5.044872e-3),
        (5.0, 3.364779e-3),
        (9.0, 1.428806e-3),
    ];
    const ENVELOPE_REF_TOL: f64 = 5e-4;
    const APPROX_NORM_REF: f64 = 28.3978893109947;
    const DIMOM_UNIT_MASS_REF: f64 = 0.0496592;
    const CROSS_METHOD_TOL: f64 = 1e-4;

    fn shared_curve() -> &'static DiscrepancyCurve {
        static CURVE: OnceLock<DiscrepancyCurve> = OnceLock::new();
        CURVE.get_or_init(|| {
            build_curve(
                Family::SkewSymmetric,
                Baseline::Normal,
                &default_skew_grid(),
                &DminOptions::default(),
            )
            .unwrap()
        })
    }

    fn quad_cfg(rel: f64) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: rel,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
            truncation_mass: 1e-12,
        }
    }

    #[test]
    fn envelope_matches_frozen_references() {
        let curve = shared_curve();
        let opts = MoominEvalOptions::default();
        for (lambda, want) in ENVELOPE_REFS {
            let got =
                moomin_exact_unnorm(curve, lambda, MoominMethod::Envelope, &opts).unwrap();
            assert!(
                (got - want).abs() <= ENVELOPE_REF_TOL * want,
                "shape {lambda}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn envelope_vanishes_at_zero_and_is_symmetric() {
        let curve = shared_curve();
        let opts = MoominEvalOptions::default();
        let at_zero =
            moomin_exact_unnorm(curve, 0.0, MoominMethod::Envelope, &opts).unwrap();
        assert!(at_zero.abs() < 1e-8, "value at 0: {at_zero}");
        for lambda in [0.7, 2.0, 9.0] {
            let pos =
                moomin_exact_unnorm(curve, lambda, MoominMethod::Envelope, &opts).unwrap();
            let neg =
                moomin_exact_unnorm(curve, -lambda, MoominMethod::Envelope, &opts).unwrap();
            assert!(
                (pos - neg).abs() <= 1e-6 * pos.max(neg),
                "shape {lambda}: {pos} vs {neg}"
            );
        }
    }

    #[test]
    fn envelope_and_curve_derivative_agree() {
        let curve = shared_curve();
        let opts = MoominEvalOptions::default();
        for lambda in [1.0, 3.0] {
            let env =
                moomin_exact_unnorm(curve, lambda, MoominMethod::Envelope, &opts).unwrap();
            let der =
                moomin_exact_unnorm(curve, lambda, MoominMethod::CurveDerivative, &opts)
                    .unwrap();
            assert!(
                (env - der).abs() <= CROSS_METHOD_TOL * env.abs().max(der.abs()),
                "shape {lambda}: envelope {env} vs derivative {der}"
            );
        }
    }

    #[test]
    fn envelope_rejects_out_of_span_values() {
        let curve = shared_curve();
        let opts = MoominEvalOptions::default();
        match moomin_exact_unnorm(curve, 31.0, MoominMethod::Envelope, &opts) {
            Err(Error::OutOfDomain(_)) => {}
            other => panic!("expected OutOfDomain, got {other:?}"),
        }
    }

    #[test]
    fn approx_norm_constant_matches_closed_form_and_quadrature() {
        let got = approx_norm_const(4.0, 3.0, 0.28);
        assert!(
            (got - APPROX_NORM_REF).abs() < 1e-9 * APPROX_NORM_REF,
            "norm const {got}"
        );
        // Quadrature of the normalized density: body plus exact tails via
        // the 1/lambda substitution (v = 1/lambda maps [L, inf) to (0, 1/L]).
        let p = PriorSpec::default_moomin_approx();
        let body = integrate_line(
            |l| p.density(l).unwrap(),
            -100.0,
            100.0,
            &[-2.0, 0.0, 2.0],
            &quad_cfg(1e-11),
        )
        .unwrap()
        .value;
        let tail = integrate_line(
            |v| p.density(1.0 / v).unwrap() / (v * v),
            1e-9,
            0.01,
            &[],
            &quad_cfg(1e-11),
        )
        .unwrap()
        .value;
        let total = body + 2.0 * tail;
        assert!((total - 1.0).abs() < 1e-8, "total mass {total}");
    }

    #[test]
    fn dimom_normalization_and_unit_mass() {
        let sigma = DEFAULT_DIMOM_SIGMA;
        // The moment integral: lambda^2 exp(-lambda^2/(2 s^2)) integrates to
        // sqrt(2 pi) s^3.
        let raw = integrate_line(
            |l: f64| l * l * (-0.5 * l * l / (sigma * sigma)).exp(),
            -40.0,
            40.0,
            &[0.0],
            &quad_cfg(1e-12),
        )
        .unwrap()
        .value;
        let want = SQRT_2PI * sigma * sigma * sigma;
        assert!((raw - want).abs() < 1e-10 * want);

        let p = PriorSpec::default_dimom();
        let unit_mass = integrate_line(
            |l| p.density(l).unwrap(),
            -1.0,
            1.0,
            &[0.0],
            &quad_cfg(1e-12),
        )
        .unwrap()
        .value;
        assert!(
            (unit_mass - DIMOM_UNIT_MASS_REF).abs() < 1e-6,
            "mass on |shape| <= 1: {unit_mass}"
        );
        assert!((unit_mass - 0.05).abs() < 0.01);
    }

    #[test]
    fn dimom_mode_sits_at_sqrt_two_sigma() {
        let p = PriorSpec::default_dimom();
        let mut best = (0.0, f64::NEG_INFINITY);
        let mut l = 0.0;
        while l <= 6.0 {
            let v = p.density(l).unwrap();
            if v > best.1 {
                best = (l, v);
            }
            l += 0.001;
        }
        let want = std::f64::consts::SQRT_2 * DEFAULT_DIMOM_SIGMA;
        assert!((best.0 - want).abs() < 0.002, "mode at {}", best.0);
    }

    #[test]
    fn jeffreys_prior_is_proper_and_positive_at_zero() {
        let p = PriorSpec::default_jeffreys();
        assert!(p.density(0.0).unwrap() > 0.0);
        let body = integrate_line(
            |l| p.density(l).unwrap(),
            -1000.0,
            1000.0,
            &[0.0],
            &quad_cfg(1e-10),
        )
        .unwrap()
        .value;
        // Tail lambda^{-(df+1)} = lambda^{-3/2}: substitute w = 1/sqrt(l).
        let tail = integrate_line(
            |w: f64| {
                let l = 1.0 / (w * w);
                p.density(l).unwrap() * 2.0 / (w * w * w)
            },
            1e-9,
            1000f64.powf(-0.5),
            &[],
            &quad_cfg(1e-10),
        )
        .unwrap()
        .value;
        let total = body + 2.0 * tail;
        assert!((total - 1.0).abs() < 1e-6, "total mass {total}");
    }

    #[test]
    fn densities_are_symmetric_and_logs_match() {
        let priors = [
            PriorSpec::default_moomin_approx(),
            PriorSpec::default_dimom(),
            PriorSpec::default_jeffreys(),
        ];
        for p in &priors {
            for l in [0.3, 1.1, 2.7, 8.0, 40.0] {
                let a = p.density(l).unwrap();
                let b = p.density(-l).unwrap();
                assert!((a - b).abs() <= 1e-14 * a.max(b), "{} at {l}", p.kind_name());
                let lg = p.log_density(l).unwrap();
                assert!(
                    (lg - a.ln()).abs() < 1e-10,
                    "{} log mismatch at {l}",
                    p.kind_name()
                );
            }
            // Non-local kinds vanish at zero; the local kind does not.
            let at0 = p.density(0.0).unwrap();
            match p {
                PriorSpec::JeffreysT { .. } => assert!(at0 > 0.0),
                _ => {
                    assert_eq!(at0, 0.0);
                    assert_eq!(p.log_density(0.0).unwrap(), f64::NEG_INFINITY);
                }
            }
        }
    }

    #[test]
    fn approx_log_density_has_polynomial_core() {
        let p = PriorSpec::default_moomin_approx();
        let l = 1e-3;
        let got = p.log_density(l).unwrap();
        let want = 4.0 * l.ln() - APPROX_NORM_REF.ln();
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn approx_tail_exponent_is_k_minus_two_m() {
        let p = PriorSpec::default_moomin_approx();
        // OLS slope of log density vs log shape across [100, 1000].
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..10 {
            let l = 100.0 * 10f64.powf(i as f64 / 9.0);
            xs.push(l.ln());
            ys.push(p.log_density(l).unwrap());
        }
        let n = xs.len() as f64;
        let xbar = xs.iter().sum::<f64>() / n;
        let ybar = ys.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xbar) * (y - ybar))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xbar) * (x - xbar)).sum::<f64>();
        assert!(
            (slope - (DEFAULT_MOOMIN_K - 2.0 * DEFAULT_MOOMIN_M)).abs() < 0.05,
            "tail slope {slope}"
        );
    }

    #[test]
    fn exact_prior_normalizes_properly() {
        let p = PriorSpec::moomin_exact(shared_curve().clone())
            .unwrap()
            .normalize()
            .unwrap();
        assert!(p.is_normalized());
        let (z, c) = match &p {
            PriorSpec::MoominExact {
                norm_const,
                tail_coefficient,
                ..
            } => (norm_const.unwrap(), tail_coefficient.unwrap()),
            _ => unreachable!(),
        };
        assert!(z > 0.0 && c > 0.0);
        assert_eq!(p.density(0.0).unwrap(), 0.0);

        // Density is continuous across the span boundary.
        let inside = p.density(30.0 - 1e-9).unwrap();
        let outside = p.density(30.0 + 1e-9).unwrap();
        assert!(
            (inside - outside).abs() < 1e-3 * inside,
            "boundary jump: {inside} vs {outside}"
        );

        // Total mass: quadrature over the span plus the analytic tails.
        let body = integrate_line(
            |l| p.density(l).unwrap(),
            -30.0,
            30.0,
            &[-2.0, 0.0, 2.0],
            &QuadratureConfig {
                rel_tol: 1e-7,
                abs_tol: 1e-12,
                max_subdivisions: 400,
                truncation_mass: 1e-11,
            },
        )
        .unwrap()
        .value;
        let tails = 2.0 * (c / 30.0) / z;
        assert!(
            (body + tails - 1.0).abs() < 1e-6,
            "total mass {}",
            body + tails
        );
    }

    #[test]
    fn exact_prior_requires_normalization_before_density() {
        let p = PriorSpec::moomin_exact(shared_curve().clone()).unwrap();
        assert!(!p.is_normalized());
        assert!(p.density(1.0).is_err());
    }

    #[test]
    fn rate_fit_recovers_polynomial_powers() {
        let two = fit_rate_of(|l: f64| Ok(l * l), 0.5, 25, 0.02).unwrap();
        assert!((two.slope - 2.0).abs() < 1e-6, "slope {}", two.slope);
        assert_eq!(two.even_power, 2);
        let four = fit_rate_of(|l: f64| Ok(l.powi(4)), 0.5, 25, 0.02).unwrap();
        assert!((four.slope - 4.0).abs() < 1e-6);
        assert_eq!(four.even_power, 4);
    }

    #[test]
    fn rate_fit_rejects_starved_grids() {
        assert!(fit_rate_of(|l: f64| Ok(l * l), 0.01, 25, 0.02).is_err());
        assert!(fit_rate_of(|l: f64| Ok(l * l), -1.0, 25, 0.02).is_err());
    }

    #[test]
    fn vanishing_rate_rounds_to_four() {
        let fit = fit_vanishing_rate(shared_curve(), DEFAULT_RATE_HALFWIDTH).unwrap();
        assert_eq!(fit.even_power, 4, "slope was {}", fit.slope);
        // The raw slope on this neighborhood sits between the asymptotic
        // power and the next even integer; keep a wide sanity band.
        assert!(fit.slope > 3.0 && fit.slope < 6.0, "slope {}", fit.slope);
    }

    #[test]
    fn logistic_baseline_rate_is_positive() {
        let grid: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
        let curve = build_curve(
            Family::SkewSymmetric,
            Baseline::Logistic,
            &grid,
            &DminOptions::default(),
        )
        .unwrap();
        let fit = fit_vanishing_rate(&curve, DEFAULT_RATE_HALFWIDTH).unwrap();
        assert!(
            fit.slope.is_finite() && fit.slope > 0.0,
            "slope {}",
            fit.slope
        );
    }

    #[test]
    fn prior_spec_serializes_round_trip() {
        let p = PriorSpec::default_dimom();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"kind\":\"dimom\""));
        let back: PriorSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.kind_name(), "dimom");
        let j = serde_json::to_string(&PriorSpec::default_jeffreys()).unwrap();
        let back: PriorSpec = serde_json::from_str(&j).unwrap();
        assert!((back.density(1.0).unwrap() - PriorSpec::default_jeffreys().density(1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn density_csv_export_round_trips() {
        let p = PriorSpec::default_moomin_approx();
        let mut buf = Vec::new();
        p.write_density_csv(&[-1.0, 0.0, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lambda,density");
        assert_eq!(lines.len(), 4);
        let mid: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(mid[1].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(PriorSpec::moomin_approx(4.0, 2.0, 0.28).is_err()); // m <= (k+1)/2
        assert!(PriorSpec::moomin_approx(-1.0, 3.0, 0.28).is_err());
        assert!(PriorSpec::dimom(0.0).is_err());
        assert!(PriorSpec::jeffreys_t(0.5, -1.0).is_err());
    }

    #[test]
    fn central_nodes_cover_the_structure() {
        for p in [
            PriorSpec::default_moomin_approx(),
            PriorSpec::default_dimom(),
            PriorSpec::default_jeffreys(),
        ] {
            let nodes = p.central_nodes();
            assert!(nodes.contains(&0.0));
            assert!(nodes.len() >= 9);
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
