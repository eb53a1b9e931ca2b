//! Finite-difference derivatives and the small dense symmetric linear
//! algebra (Cholesky, log-determinant) used by the Laplace approximations.

use crate::error::{Error, Result};

/// Step size h = eps^(1/3) * max(1, |x|), balancing truncation and rounding
/// error for central differences.
pub fn default_step(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 3.0) * x.abs().max(1.0)
}

/// Central first derivative with the default step.
pub fn derivative_central<F: FnMut(f64) -> f64>(mut f: F, x: f64) -> f64 {
    let h = default_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Finite-difference Hessian of a scalar function of several variables.
///
/// Diagonal entries use the standard three-point second difference; off
/// diagonals use the four-point cross difference. The result is symmetrized.
/// Any non-finite function value yields `InvalidArgument`.
pub fn hessian_fd<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "hessian_fd requires at least one coordinate".into(),
        ));
    }
    let f0 = f(x);
    if !f0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "objective is not finite at the expansion point {x:?}"
        )));
    }
    let h: Vec<f64> = x.iter().map(|&xi| default_step(xi)).collect();
    let mut work = x.to_vec();
    let mut hess = vec![vec![0.0f64; n]; n];

    let mut eval = |w: &mut Vec<f64>, deltas: &[(usize, f64)]| -> Result<f64> {
        for &(i, d) in deltas {
            w[i] += d;
        }
        let v = f(w);
        for &(i, d) in deltas {
            w[i] -= d;
        }
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "objective is not finite near the expansion point {x:?}"
            )));
        }
        Ok(v)
    };

    for i in 0..n {
        let fp = eval(&mut work, &[(i, h[i])])?;
        let fm = eval(&mut work, &[(i, -h[i])])?;
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            let fpp = eval(&mut work, &[(i, h[i]), (j, h[j])])?;
            let fpm = eval(&mut work, &[(i, h[i]), (j, -h[j])])?;
            let fmp = eval(&mut work, &[(i, -h[i]), (j, h[j])])?;
            let fmm = eval(&mut work, &[(i, -h[i]), (j, -h[j])])?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(hess)
}

/// Cholesky factor L (lower triangular, A = L L^T) of a symmetric matrix, or
/// `None` if the matrix is not positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return None;
    }
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for (x, y) in l[i][..j].iter().zip(&l[j][..j]) {
                s -= x * y;
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// log det A for a symmetric positive definite matrix, via Cholesky.
pub fn logdet_pd(a: &[Vec<f64>]) -> Result<f64> {
    let l = cholesky(a).ok_or_else(|| {
        Error::CurvatureError("matrix is not positive definite".into())
    })?;
    Ok(2.0 * l.iter().enumerate().map(|(i, row)| row[i].ln()).sum::<f64>())
}

/// Solve A x = b for symmetric positive definite A, via Cholesky.
pub fn solve_pd(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a).ok_or_else(|| {
        Error::CurvatureError("matrix is not positive definite".into())
    })?;
    let n = b.len();
    // Forward substitution L y = b.
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    // Back substitution L^T x = y.
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Ok(x)
}

/// Inverse of a symmetric positive definite matrix, via Cholesky solves.
pub fn inverse_pd(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0f64; n]; n];
    for j in 0..n {
        let mut e = vec![0.0f64; n];
        e[j] = 1.0;
        let col = solve_pd(a, &e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Ok(inv)
}
