//! Derivative-free minimization via the Nelder–Mead simplex method with the
//! standard reflection/expansion/contraction/shrink coefficients.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct OptimConfig {
    pub tol: f64,
    pub max_iterations: usize,
    /// Relative size of the initial simplex around the starting point.
    pub initial_step: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            tol: 1e-10,
            max_iterations: 2000,
            initial_step: 0.1,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

fn build_simplex<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    step: f64,
) -> Option<Vec<Vertex>> {
    let n = x0.len();
    let mut simplex = Vec::with_capacity(n + 1);
    let f0 = f(x0);
    if !f0.is_finite() {
        return None;
    }
    simplex.push(Vertex {
        x: x0.to_vec(),
        f: f0,
    });
    for i in 0..n {
        let mut xi = x0.to_vec();
        let h = if xi[i].abs() > 1e-12 {
            step * xi[i].abs()
        } else {
            step
        };
        xi[i] += h;
        let fi = f(&xi);
        if !fi.is_finite() {
            return None;
        }
        simplex.push(Vertex { x: xi, f: fi });
    }
    Some(simplex)
}

fn run_nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    mut simplex: Vec<Vertex>,
    cfg: &OptimConfig,
) -> Option<OptimResult> {
    let n = simplex[0].x.len();
    let mut iterations = 0usize;

    loop {
        simplex.sort_by(|a, b| a.f.partial_cmp(&b.f).unwrap());

        // Convergence: simplex diameter and value spread both small.
        let best = &simplex[0];
        let worst = &simplex[n];
        let mut diameter = 0.0f64;
        for v in &simplex[1..] {
            let d: f64 = v
                .x
                .iter()
                .zip(&best.x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            diameter = diameter.max(d);
        }
        let spread = (worst.f - best.f).abs();
        let scale = 1.0 + best.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if diameter <= cfg.tol * scale && spread <= cfg.tol * (1.0 + best.f.abs()) {
            return Some(OptimResult {
                argmin: simplex[0].x.clone(),
                value: simplex[0].f,
                converged: true,
                iterations,
            });
        }
        if iterations >= cfg.max_iterations {
            return Some(OptimResult {
                argmin: simplex[0].x.clone(),
                value: simplex[0].f,
                converged: false,
                iterations,
            });
        }
        iterations += 1;

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0f64; n];
        for v in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(&v.x) {
                *c += xi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let point_along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].x)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = point_along(REFLECT);
        let fr = f(&xr);
        if !fr.is_finite() {
            return None;
        }

        if fr < simplex[0].f {
            let xe = point_along(EXPAND);
            let fe = f(&xe);
            if !fe.is_finite() {
                return None;
            }
            simplex[n] = if fe < fr {
                Vertex { x: xe, f: fe }
            } else {
                Vertex { x: xr, f: fr }
            };
            continue;
        }
        if fr < simplex[n - 1].f {
            simplex[n] = Vertex { x: xr, f: fr };
            continue;
        }

        // Contraction, outside or inside depending on the reflected value.
        let (xc, fc) = if fr < simplex[n].f {
            let xc = point_along(CONTRACT);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = point_along(-CONTRACT);
            let fc = f(&xc);
            (xc, fc)
        };
        if !fc.is_finite() {
            return None;
        }
        if fc < simplex[n].f.min(fr) {
            simplex[n] = Vertex { x: xc, f: fc };
            continue;
        }

        // Shrink toward the best vertex.
        let best_x = simplex[0].x.clone();
        for v in simplex.iter_mut().skip(1) {
            for (xi, bi) in v.x.iter_mut().zip(&best_x) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            v.f = f(&v.x);
            if !v.f.is_finite() {
                return None;
            }
        }
    }
}

/// Minimize `f` starting from `x0`.
///
/// A non-finite objective value aborts the current run; one retry is made
/// from a perturbed starting point before giving up with
/// `OptimizationFailed`. The returned point is never worse than the starting
/// point.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    if x0.is_empty() {
        return Err(Error::InvalidArgument(
            "minimize requires at least one coordinate".into(),
        ));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "starting point must be finite, got {x0:?}"
        )));
    }

    let f0 = f(x0);
    let starts: [Vec<f64>; 2] = [
        x0.to_vec(),
        x0.iter()
            .map(|v| v + 0.25 * (1.0 + v.abs()))
            .collect::<Vec<f64>>(),
    ];
    for (attempt, start) in starts.iter().enumerate() {
        let simplex = match build_simplex(&mut f, start, cfg.initial_step) {
            Some(s) => s,
            None => continue,
        };
        if let Some(mut res) = run_nelder_mead(&mut f, simplex, cfg) {
            if attempt == 0 || (f0.is_finite() && res.value <= f0) || !f0.is_finite() {
                if f0.is_finite() && res.value > f0 {
                    res.argmin = x0.to_vec();
                    res.value = f0;
                }
                return Ok(res);
            }
            // Restart landed somewhere worse than the initial point: keep
            // the contract by reporting the initial point.
            res.argmin = x0.to_vec();
            res.value = f0;
            return Ok(res);
        }
    }
    Err(Error::OptimizationFailed(format!(
        "objective not finite near starting point {x0:?}"
    )))
}
