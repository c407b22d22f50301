//! Gamma Gaussian inverse-Wishart (GGIW) single-object model.
//!
//! A GGIW density is `G(γ; α, β) N(ξ; x̄, P) IW(X; v, V)` where the
//! inverse-Wishart uses the parameterisation with mean `V / (v - d - 1)`.
//! Each object emits a Poisson number of measurements with rate `γ`, each
//! drawn from `N(H ξ, X)`.

use crate::error::{Error, Result};
use crate::linalg::{
    ln_det_spd2, ln_multigamma, ln_normal2, ln_normal4, sqrtm_spd2, symmetrize2, symmetrize4,
    Extent, MeasMatrix, Point, StateCov, StateVec, EXTENT_DIM,
};
use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

const D: f64 = EXTENT_DIM as f64;
const DOF_TOLERANCE: f64 = 1e-9;

/// Parameters of one GGIW density.
#[derive(Debug, Clone, PartialEq)]
pub struct GgiwParams {
    /// Gamma shape.
    pub alpha: f64,
    /// Gamma inverse scale.
    pub beta: f64,
    /// Kinematic mean `[px, vx, py, vy]`.
    pub mean: StateVec,
    /// Kinematic covariance.
    pub cov: StateCov,
    /// Inverse-Wishart degrees of freedom.
    pub dof: f64,
    /// Inverse-Wishart scale matrix.
    pub scale: Extent,
}

/// A single object state `(γ, ξ, X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    /// Expected number of measurements per scan.
    pub rate: f64,
    pub kinematics: StateVec,
    pub extent: Extent,
}

impl ObjectState {
    /// `ln(γ ℓ(z | x))` for one point measurement.
    pub fn ln_point_intensity(&self, z: &Point, h: &MeasMatrix) -> f64 {
        self.rate.ln() + ln_normal2(z, &(h * self.kinematics), &self.extent)
    }
}

/// Kinematic and shape dynamics shared by all objects.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub transition: StateCov,
    pub process_noise: StateCov,
    /// Forgetting factor for the measurement rate (η ≥ 1).
    pub rate_forgetting: f64,
    /// Extent time constant τ in seconds; `f64::INFINITY` freezes the extent.
    pub extent_time_constant: f64,
    /// Sampling interval in seconds.
    pub sampling_interval: f64,
    /// Constant survival probability.
    pub survival_prob: f64,
}

impl MotionModel {
    /// Nearly-constant-velocity model on `[px, vx, py, vy]`.
    pub fn constant_velocity(
        sampling_interval: f64,
        sigma_q: f64,
        rate_forgetting: f64,
        extent_time_constant: f64,
        survival_prob: f64,
    ) -> Self {
        let t = sampling_interval;
        let mut transition = StateCov::identity();
        transition[(0, 1)] = t;
        transition[(2, 3)] = t;
        let q = sigma_q * sigma_q;
        let mut process_noise = StateCov::zeros();
        for b in [0, 2] {
            process_noise[(b, b)] = q * t.powi(3) / 3.0;
            process_noise[(b, b + 1)] = q * t.powi(2) / 2.0;
            process_noise[(b + 1, b)] = q * t.powi(2) / 2.0;
            process_noise[(b + 1, b + 1)] = q * t;
        }
        Self {
            transition,
            process_noise,
            rate_forgetting,
            extent_time_constant,
            sampling_interval,
            survival_prob,
        }
    }

    /// Motion model that leaves every GGIW density unchanged.
    pub fn identity() -> Self {
        Self {
            transition: StateCov::identity(),
            process_noise: StateCov::zeros(),
            rate_forgetting: 1.0,
            extent_time_constant: f64::INFINITY,
            sampling_interval: 1.0,
            survival_prob: 1.0,
        }
    }

    pub fn extent_decay(&self) -> f64 {
        (-self.sampling_interval / self.extent_time_constant).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_forgetting >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rate forgetting factor {} must be >= 1",
                self.rate_forgetting
            )));
        }
        if !(self.extent_time_constant > 0.0) || !(self.sampling_interval > 0.0) {
            return Err(Error::InvalidParameter(
                "time constants must be positive".into(),
            ));
        }
        if !(self.survival_prob > 0.0 && self.survival_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "survival probability {} outside (0, 1]",
                self.survival_prob
            )));
        }
        Ok(())
    }
}

impl GgiwParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma parameters must be positive (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        if !(self.dof > D + 1.0) {
            return Err(Error::DegenerateExtent {
                dof: self.dof,
                min: D + 1.0,
            });
        }
        if self.scale.cholesky().is_none() {
            return Err(Error::NotPositiveDefinite("inverse-Wishart scale"));
        }
        Ok(())
    }

    /// Expected extent `V / (v - d - 1)`.
    pub fn extent_mean(&self) -> Extent {
        self.scale / (self.dof - D - 1.0)
    }

    /// Expected measurement rate `α / β`.
    pub fn rate_mean(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Posterior-mean point estimate.
    pub fn mean_state(&self) -> ObjectState {
        ObjectState {
            rate: self.rate_mean(),
            kinematics: self.mean,
            extent: self.extent_mean(),
        }
    }

    /// Log density of the GGIW at a state.
    pub fn ln_pdf(&self, x: &ObjectState) -> f64 {
        if !(x.rate > 0.0) {
            return f64::NEG_INFINITY;
        }
        let ln_gamma_pdf = self.alpha * self.beta.ln() - ln_gamma(self.alpha)
            + (self.alpha - 1.0) * x.rate.ln()
            - self.beta * x.rate;
        ln_gamma_pdf + ln_normal4(&x.kinematics, &self.mean, &self.cov) + self.ln_iw_pdf(&x.extent)
    }

    fn ln_iw_pdf(&self, x: &Extent) -> f64 {
        let (Some(ln_det_v), Some(ln_det_x)) = (ln_det_spd2(&self.scale), ln_det_spd2(x)) else {
            return f64::NEG_INFINITY;
        };
        let Some(x_inv) = x.try_inverse() else {
            return f64::NEG_INFINITY;
        };
        let v = self.dof;
        0.5 * v * ln_det_v
            - 0.5 * v * D * 2f64.ln()
            - ln_multigamma(EXTENT_DIM, 0.5 * v)
            - 0.5 * (v + D + 1.0) * ln_det_x
            - 0.5 * (self.scale * x_inv).trace()
    }
}

/// Time update of a GGIW density.
pub fn predict(z: &GgiwParams, m: &MotionModel) -> Result<GgiwParams> {
    let decay = m.extent_decay();
    let dof = D + 1.0 + decay * (z.dof - D - 1.0);
    if dof <= D + 1.0 + DOF_TOLERANCE {
        return Err(Error::DegenerateExtent { dof, min: D + 1.0 });
    }
    let f = &m.transition;
    Ok(GgiwParams {
        alpha: z.alpha / m.rate_forgetting,
        beta: z.beta / m.rate_forgetting,
        mean: f * z.mean,
        cov: symmetrize4(&(f * z.cov * f.transpose() + m.process_noise)),
        dof,
        scale: symmetrize2(&(z.scale * decay)),
    })
}

/// Measurement update with a non-empty set of point measurements.
///
/// Returns the posterior parameters together with the natural log of the
/// predicted likelihood of the whole set.
pub fn update(z: &GgiwParams, w: &[Point], h: &MeasMatrix) -> Result<(GgiwParams, f64)> {
    if w.is_empty() {
        return Err(Error::EmptyMeasurementSet);
    }
    let n = w.len() as f64;
    let zbar = w.iter().fold(Point::zeros(), |acc, p| acc + p) / n;
    let scatter = w.iter().fold(Extent::zeros(), |acc, p| {
        let e = p - zbar;
        acc + e * e.transpose()
    });

    let x_hat = z.extent_mean();
    let innov = zbar - h * z.mean;
    let s = symmetrize2(&(h * z.cov * h.transpose() + x_hat / n));
    let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
    let ln_det_s = ln_det_spd2(&s).ok_or(Error::SingularInnovation)?;
    let gain = z.cov * h.transpose() * s_inv;

    let x_hat_sqrt = sqrtm_spd2(&x_hat).ok_or(Error::NotPositiveDefinite("extent mean"))?;
    let s_sqrt = sqrtm_spd2(&s).ok_or(Error::SingularInnovation)?;
    let s_inv_sqrt = s_sqrt.try_inverse().ok_or(Error::SingularInnovation)?;
    let u = x_hat_sqrt * s_inv_sqrt * innov;
    let spread = u * u.transpose();

    let post = GgiwParams {
        alpha: z.alpha + n,
        beta: z.beta + 1.0,
        mean: z.mean + gain * innov,
        cov: symmetrize4(&(z.cov - gain * h * z.cov)),
        dof: z.dof + n,
        scale: symmetrize2(&(z.scale + spread + scatter)),
    };

    let ln_det_v =
        ln_det_spd2(&z.scale).ok_or(Error::NotPositiveDefinite("inverse-Wishart scale"))?;
    let ln_det_v_post = ln_det_spd2(&post.scale).ok_or(Error::NotPositiveDefinite(
        "posterior inverse-Wishart scale",
    ))?;
    let ln_det_x_hat = ln_det_spd2(&x_hat).ok_or(Error::NotPositiveDefinite("extent mean"))?;

    let ln_lik = -0.5 * D * (n * PI.ln() + n.ln()) + 0.5 * z.dof * ln_det_v
        - 0.5 * post.dof * ln_det_v_post
        + ln_multigamma(EXTENT_DIM, 0.5 * post.dof)
        - ln_multigamma(EXTENT_DIM, 0.5 * z.dof)
        + 0.5 * ln_det_x_hat
        - 0.5 * ln_det_s
        + ln_rate_evidence(z.alpha, z.beta, n);

    Ok((post, ln_lik))
}

/// Log of `∫ G(γ; α, β) e^{-γ} γ^n dγ`, the rate factor of the predicted likelihood.
pub fn ln_rate_evidence(alpha: f64, beta: f64, n: f64) -> f64 {
    ln_gamma(alpha + n) - ln_gamma(alpha) + alpha * beta.ln() - (alpha + n) * (beta + 1.0).ln()
}

/// Probability that an object drawn from the density produces no measurement.
pub fn missed_detection_likelihood(z: &GgiwParams) -> f64 {
    ln_missed_detection_likelihood(z).exp()
}

pub fn ln_missed_detection_likelihood(z: &GgiwParams) -> f64 {
    z.alpha * (z.beta / (z.beta + 1.0)).ln()
}

/// Conjugate update for an empty measurement set (`e^{-γ}` thinning).
pub fn missed_detection_update(z: &GgiwParams) -> GgiwParams {
    GgiwParams {
        beta: z.beta + 1.0,
        ..z.clone()
    }
}

/// Draws a state from the density.
///
/// The extent is obtained by drawing a Wishart matrix with the Bartlett
/// decomposition and inverting it.
pub fn sample<R: Rng + ?Sized>(z: &GgiwParams, rng: &mut R) -> Result<ObjectState> {
    let rate = Gamma::new(z.alpha, 1.0 / z.beta)
        .map_err(|e| Error::InvalidParameter(format!("gamma: {e}")))?
        .sample(rng);

    let mut noise = StateVec::zeros();
    for i in 0..4 {
        noise[i] = rng.sample(StandardNormal);
    }
    let kinematics = match z.cov.cholesky() {
        Some(chol) => z.mean + chol.l() * noise,
        None => {
            // positive semi-definite: fall back to a clamped eigen square root
            let eig = symmetrize4(&z.cov).symmetric_eigen();
            let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
            let root = eig.eigenvectors * StateCov::from_diagonal(&sqrt_vals);
            z.mean + root * noise
        }
    };

    let extent = sample_inverse_wishart(z.dof, &z.scale, rng)?;
    Ok(ObjectState {
        rate,
        kinematics,
        extent,
    })
}

/// Inverse-Wishart draw with mean `scale / (dof - d - 1)`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    dof: f64,
    scale: &Extent,
    rng: &mut R,
) -> Result<Extent> {
    let precision = scale
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite("inverse-Wishart scale"))?;
    let l = symmetrize2(&precision)
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("inverse-Wishart scale"))?
        .l();
    let mut a = Matrix2::zeros();
    for i in 0..EXTENT_DIM {
        let chi = ChiSquared::new(dof - i as f64)
            .map_err(|e| Error::InvalidParameter(format!("chi-squared: {e}")))?;
        a[(i, i)] = chi.sample(rng).sqrt();
    }
    a[(1, 0)] = rng.sample(StandardNormal);
    let la = l * a;
    let wishart = la * la.transpose();
    let x = wishart
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite("Wishart draw"))?;
    Ok(symmetrize2(&x))
}

/// Merges a weighted mixture into one GGIW by moment matching.
///
/// The Gaussian part matches mean and covariance, the gamma part matches the
/// mean and variance of the rate, and the inverse-Wishart part matches the
/// mean extent with the weighted-average degrees of freedom.
pub fn merge_mixture(components: &[(f64, GgiwParams)]) -> Result<GgiwParams> {
    if components.is_empty() {
        return Err(Error::EmptyMixture);
    }
    if components.len() == 1 {
        return Ok(components[0].1.clone());
    }
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    if !(total > 0.0) || components.iter().any(|(w, _)| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter(
            "mixture weights must be non-negative with positive sum".into(),
        ));
    }

    let mut mean = StateVec::zeros();
    let mut rate_mean = 0.0;
    let mut rate_sq = 0.0;
    let mut dof = 0.0;
    for (w, c) in components {
        let w = w / total;
        mean += c.mean * w;
        rate_mean += w * c.alpha / c.beta;
        rate_sq += w * c.alpha * (c.alpha + 1.0) / (c.beta * c.beta);
        dof += w * c.dof;
    }
    let mut cov = StateCov::zeros();
    let mut extent = Extent::zeros();
    for (w, c) in components {
        let w = w / total;
        let e = c.mean - mean;
        cov += (c.cov + e * e.transpose()) * w;
        extent += c.extent_mean() * w;
    }
    let rate_var = rate_sq - rate_mean * rate_mean;
    let (alpha, beta) = if rate_var > 0.0 {
        (rate_mean * rate_mean / rate_var, rate_mean / rate_var)
    } else {
        let c = &components[0].1;
        (c.alpha, c.beta)
    };
    Ok(GgiwParams {
        alpha,
        beta,
        mean,
        cov: symmetrize4(&cov),
        dof,
        scale: symmetrize2(&(extent * (dof - D - 1.0))),
    })
}
