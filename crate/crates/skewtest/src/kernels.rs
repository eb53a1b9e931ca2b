//! Symmetric baseline densities, the skew-symmetric family they generate,
//! the two-piece asymmetric family, and exact samplers.
//!
//! A skew-symmetric density is s(x | mu, sigma, lambda) =
//! (2/sigma) f(z) G(lambda * omega(z)) with z = (x - mu)/sigma, where f is a
//! symmetric baseline pdf, G a skewing cdf with G(x) + G(-x) = 1, and omega
//! an odd function (identity here). All three shipped baselines pair f with
//! its own cdf as G.

use crate::error::{Error, Result};
use crate::numerics::special::{log_normal_cdf, normal_cdf, normal_pdf, normal_quantile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// ln(2/pi), used by the sech skewing cdf in its deep left tail.
const LN_2_OVER_PI: f64 = -0.45158270528945486;
/// ln(sqrt(2 pi)).
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// The symmetric baseline pdf/cdf pairs. Each pairs a symmetric density f
/// with its own cumulative function as the skewing cdf G (so g = f), and
/// uses the identity skewing function omega(x) = x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Normal,
    Logistic,
    Sech,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::Normal, Baseline::Logistic, Baseline::Sech];

    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Normal => "normal",
            Baseline::Logistic => "logistic",
            Baseline::Sech => "sech",
        }
    }

    /// The symmetric pdf f.
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Baseline::Normal => normal_pdf(x),
            Baseline::Logistic => {
                let t = (-x.abs()).exp();
                t / ((1.0 + t) * (1.0 + t))
            }
            Baseline::Sech => {
                // (1/2) sech(pi x / 2) = t / (1 + t^2), t = exp(-pi|x|/2).
                let t = (-FRAC_PI_2 * x.abs()).exp();
                t / (1.0 + t * t)
            }
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match self {
            Baseline::Normal => -0.5 * x * x - LN_SQRT_2PI,
            Baseline::Logistic => {
                let a = x.abs();
                -a - 2.0 * (-a).exp().ln_1p()
            }
            Baseline::Sech => {
                let a = FRAC_PI_2 * x.abs();
                -a - (-2.0 * a).exp().ln_1p()
            }
        }
    }

    /// The cumulative function F of f.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Baseline::Normal => normal_cdf(x),
            Baseline::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let t = x.exp();
                    t / (1.0 + t)
                }
            }
            Baseline::Sech => {
                if x > 0.0 {
                    // 1 - F(-x) keeps precision near 1.
                    1.0 - self.cdf(-x)
                } else {
                    let t = (FRAC_PI_2 * x).exp();
                    (2.0 / PI) * t.atan()
                }
            }
        }
    }

    /// Inverse of `cdf` on (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile requires p in (0,1), got {p}"
            )));
        }
        match self {
            Baseline::Normal => normal_quantile(p),
            Baseline::Logistic => Ok(p.ln() - (-p).ln_1p()),
            Baseline::Sech => {
                // G(x) = (2/pi) atan(exp(pi x / 2)); invert on the lower half
                // and reflect for p > 1/2 to avoid tan near its pole.
                if p <= 0.5 {
                    Ok((2.0 / PI) * (FRAC_PI_2 * p).tan().ln())
                } else {
                    Ok(-(2.0 / PI) * (FRAC_PI_2 * (1.0 - p)).tan().ln())
                }
            }
        }
    }

    /// The skewing cdf G. For all shipped pairs this is the baseline cdf.
    pub fn skewing_cdf(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    /// The density g of G; equals f for the shipped pairs.
    pub fn skewing_pdf(&self, x: f64) -> f64 {
        self.pdf(x)
    }

    /// log G(x), stable into both tails.
    pub fn log_skewing_cdf(&self, x: f64) -> f64 {
        match self {
            Baseline::Normal => log_normal_cdf(x),
            Baseline::Logistic => {
                if x >= 0.0 {
                    -(-x).exp().ln_1p()
                } else {
                    x - x.exp().ln_1p()
                }
            }
            Baseline::Sech => {
                if x > 0.0 {
                    (-self.cdf(-x)).ln_1p()
                } else {
                    let t = (FRAC_PI_2 * x).exp();
                    if t < 1e-8 {
                        // atan(t) = t + O(t^3): the cubic term is below 1e-16
                        // relative here.
                        LN_2_OVER_PI + FRAC_PI_2 * x
                    } else {
                        ((2.0 / PI) * t.atan()).ln()
                    }
                }
            }
        }
    }

    /// The odd skewing function omega; identity for all shipped models.
    pub fn omega(&self, x: f64) -> f64 {
        x
    }
}

fn check_location_scale(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "location must be finite, got {mu}"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// Common interface for the model families: pointwise density and an
/// interval capturing all but `mass` of the probability, for quadrature
/// truncation.
pub trait Density {
    fn pdf(&self, x: f64) -> f64;
    fn log_pdf(&self, x: f64) -> f64;
    /// Interval whose complement carries at most `mass` of probability.
    fn support_bounds(&self, mass: f64) -> (f64, f64);
}

/// Location-scale skew-symmetric model (2/sigma) f(z) G(lambda omega(z)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewSymmetricModel {
    pub baseline: Baseline,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl SkewSymmetricModel {
    pub fn new(baseline: Baseline, mu: f64, sigma: f64, lambda: f64) -> Result<Self> {
        check_location_scale(mu, sigma)?;
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shape must be finite, got {lambda}"
            )));
        }
        Ok(SkewSymmetricModel {
            baseline,
            mu,
            sigma,
            lambda,
        })
    }

    /// Standardized residual (x - mu)/sigma.
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }
}

impl Density for SkewSymmetricModel {
    fn pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        let b = self.baseline;
        (2.0 / self.sigma) * b.pdf(z) * b.skewing_cdf(self.lambda * b.omega(z))
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        let b = self.baseline;
        std::f64::consts::LN_2 - self.sigma.ln()
            + b.log_pdf(z)
            + b.log_skewing_cdf(self.lambda * b.omega(z))
    }

    fn support_bounds(&self, mass: f64) -> (f64, f64) {
        // s(x) <= (2/sigma) f(z), so each standardized tail beyond the
        // baseline (mass/4)-quantile carries at most mass/2.
        let q = self
            .baseline
            .quantile(0.25 * mass)
            .expect("mass quantile in (0,1)");
        (self.mu + self.sigma * q, self.mu - self.sigma * q)
    }
}

/// Evaluate the skew-symmetric density, validating the evaluation point.
pub fn skew_pdf(model: &SkewSymmetricModel, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evaluation point must be finite, got {x}"
        )));
    }
    Ok(model.pdf(x))
}

/// Two-piece asymmetric model: scale sigma1 = sigma (1 + tanh eps) left of
/// mu, sigma2 = sigma (1 - tanh eps) right of mu, continuously joined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPieceModel {
    pub baseline: Baseline,
    pub mu: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl TwoPieceModel {
    pub fn new(baseline: Baseline, mu: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        check_location_scale(mu, sigma)?;
        if !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "asymmetry must be finite, got {epsilon}"
            )));
        }
        Ok(TwoPieceModel {
            baseline,
            mu,
            sigma,
            epsilon,
        })
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma * (1.0 + self.epsilon.tanh())
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * (1.0 - self.epsilon.tanh())
    }
}

impl Density for TwoPieceModel {
    fn pdf(&self, x: f64) -> f64 {
        let (s1, s2) = (self.sigma1(), self.sigma2());
        let scale = 2.0 / (s1 + s2);
        let side = if x < self.mu { s1 } else { s2 };
        scale * self.baseline.pdf((x - self.mu) / side)
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let (s1, s2) = (self.sigma1(), self.sigma2());
        let side = if x < self.mu { s1 } else { s2 };
        std::f64::consts::LN_2 - (s1 + s2).ln() + self.baseline.log_pdf((x - self.mu) / side)
    }

    fn support_bounds(&self, mass: f64) -> (f64, f64) {
        // Each branch is bounded by twice a location-scale baseline density
        // with its own side scale.
        let q = self
            .baseline
            .quantile(0.25 * mass)
            .expect("mass quantile in (0,1)");
        (self.mu + self.sigma1() * q, self.mu - self.sigma2() * q)
    }
}

/// Evaluate the two-piece density, validating the evaluation point.
pub fn two_piece_pdf(model: &TwoPieceModel, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evaluation point must be finite, got {x}"
        )));
    }
    Ok(model.pdf(x))
}

/// One step of the splitmix64 generator; used to expand integer seeds into
/// stream keys and to derive independent per-task seeds.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn chacha_from_seed(seed: u64) -> ChaCha12Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Exact sampler for a skew-symmetric model.
///
/// Each draw takes Z from the baseline f and an independent uniform U, then
/// emits mu + sigma Z if U <= G(lambda omega(Z)) and mu - sigma Z otherwise.
/// The sequence is a pure function of the seed.
pub struct SkewSampler {
    model: SkewSymmetricModel,
    rng: ChaCha12Rng,
}

impl SkewSampler {
    pub fn new(model: SkewSymmetricModel, seed: u64) -> Self {
        SkewSampler {
            model,
            rng: chacha_from_seed(seed),
        }
    }

    fn draw_baseline(&mut self) -> f64 {
        match self.model.baseline {
            Baseline::Normal => {
                // Box-Muller; 1 - r keeps the log argument in (0, 1].
                let u1 = 1.0 - self.rng.random::<f64>();
                let u2 = self.rng.random::<f64>();
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            }
            b => {
                let p = loop {
                    let r = self.rng.random::<f64>();
                    if r > 0.0 {
                        break r;
                    }
                };
                b.quantile(p).expect("p in (0,1)")
            }
        }
    }

    pub fn sample(&mut self) -> f64 {
        let z = self.draw_baseline();
        let u = self.rng.random::<f64>();
        let b = self.model.baseline;
        let kept = if u <= b.skewing_cdf(self.model.lambda * b.omega(z)) {
            z
        } else {
            -z
        };
        self.model.mu + self.model.sigma * kept
    }

    pub fn sample_n(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample()).collect()
    }
}

/// Draw `n` i.i.d. values from the model, deterministically in the seed.
pub fn sample_skew(model: &SkewSymmetricModel, n: usize, seed: u64) -> Vec<f64> {
    SkewSampler::new(*model, seed).sample_n(n)
}
