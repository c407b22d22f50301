//! Fixed-size linear algebra and log-domain helpers.
//!
//! The kinematic state is `[px, vx, py, vy]` and the extent lives in the
//! plane, so every matrix in the filter has a compile-time shape.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};
use rand::Rng;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Dimension of the extent matrix and of a measurement.
pub const EXTENT_DIM: usize = 2;

pub type StateVec = Vector4<f64>;
pub type StateCov = Matrix4<f64>;
pub type Point = Vector2<f64>;
pub type Extent = Matrix2<f64>;
pub type MeasMatrix = Matrix2x4<f64>;

/// Position selector for `[px, vx, py, vy]`.
pub fn position_selector() -> MeasMatrix {
    MeasMatrix::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)
}

pub fn symmetrize2(a: &Extent) -> Extent {
    (a + a.transpose()) * 0.5
}

pub fn symmetrize4(a: &StateCov) -> StateCov {
    (a + a.transpose()) * 0.5
}

/// Principal square root of a symmetric positive-definite 2x2 matrix.
///
/// Uses the closed form `sqrt(A) = (A + s I) / sqrt(tr A + 2 s)` with
/// `s = sqrt(det A)`. Returns `None` when `A` is not positive definite.
pub fn sqrtm_spd2(a: &Extent) -> Option<Extent> {
    let a = symmetrize2(a);
    let det = a.determinant();
    let tr = a.trace();
    if !(det > 0.0) || !(tr > 0.0) {
        return None;
    }
    let s = det.sqrt();
    let t = (tr + 2.0 * s).sqrt();
    Some((a + Extent::identity() * s) / t)
}

/// Log-determinant via Cholesky; `None` when not positive definite.
pub fn ln_det_spd2(a: &Extent) -> Option<f64> {
    let chol = a.cholesky()?;
    let l = chol.l_dirty();
    Some(2.0 * (l[(0, 0)].ln() + l[(1, 1)].ln()))
}

/// Log of the multivariate gamma function `Γ_p(a)`.
pub fn ln_multigamma(p: usize, a: f64) -> f64 {
    let pf = p as f64;
    let mut acc = pf * (pf - 1.0) / 4.0 * PI.ln();
    for j in 1..=p {
        acc += ln_gamma(a + (1.0 - j as f64) / 2.0);
    }
    acc
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log density of a bivariate normal `N(z; mean, cov)`.
pub fn ln_normal2(z: &Point, mean: &Point, cov: &Extent) -> f64 {
    let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(1, 0)];
    if !(det > 0.0) {
        return f64::NEG_INFINITY;
    }
    let dx = z[0] - mean[0];
    let dy = z[1] - mean[1];
    // inverse of [[a, b], [b, c]] is [[c, -b], [-b, a]] / det
    let maha = (cov[(1, 1)] * dx * dx - (cov[(0, 1)] + cov[(1, 0)]) * dx * dy
        + cov[(0, 0)] * dy * dy)
        / det;
    -(2.0 * PI).ln() - 0.5 * det.ln() - 0.5 * maha
}

/// Log density of a four-dimensional normal; `-inf` for a singular covariance.
pub fn ln_normal4(x: &StateVec, mean: &StateVec, cov: &StateCov) -> f64 {
    let Some(chol) = cov.cholesky() else {
        return f64::NEG_INFINITY;
    };
    let diff = x - mean;
    let l = chol.l_dirty();
    let mut ln_det = 0.0;
    for i in 0..4 {
        ln_det += 2.0 * l[(i, i)].ln();
    }
    let sol = chol.solve(&diff);
    -2.0 * (2.0 * PI).ln() - 0.5 * ln_det - 0.5 * diff.dot(&sol)
}

/// Draws an index from a categorical distribution given unnormalised log
/// weights. Returns `None` if every weight is zero (or NaN).
pub fn sample_log_categorical<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Option<usize> {
    let max = log_weights
        .iter()
        .copied()
        .filter(|w| !w.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut total = 0.0;
    let probs: Vec<f64> = log_weights
        .iter()
        .map(|w| {
            let p = if w.is_nan() { 0.0 } else { (w - max).exp() };
            total += p;
            p
        })
        .collect();
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            if u < *p {
                return Some(i);
            }
            u -= p;
            last = Some(i);
        }
    }
    last
}
