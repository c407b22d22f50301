//! Ground-truth scenario and synthetic measurement generation.
//!
//! Objects are born on a circle around the origin heading inwards, move
//! with the nearly-constant-velocity model and keep a constant extent and
//! measurement rate. Every random stream is a `ChaCha8Rng` seeded from
//! [`derive_seed`], so a seed fixes truth and frames bit for bit.

use crate::error::{Error, Result};
use crate::ggiw::{sample_inverse_wishart, MotionModel, ObjectState};
use crate::linalg::{Extent, Point, StateVec};
use crate::metrics::Ellipse;
use crate::pmbm::Region;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub region: Region,
    pub n_objects: usize,
    pub radius_m: f64,
    pub speed_mps: f64,
    /// First step at which each object exists; objects born after
    /// `n_steps` never appear.
    pub birth_steps: Vec<usize>,
    /// First step at which each object no longer exists.
    pub death_steps: Vec<usize>,
    pub n_steps: usize,
    pub ts: f64,
    pub sigma_q: f64,
    pub extent_dof: f64,
    /// Diagonal of the mean extent.
    pub extent_mean: f64,
    pub rate_shape: f64,
    /// Mean measurement rate of an object.
    pub gamma: f64,
    pub clutter_rate: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            region: Region::square(150.0),
            n_objects: 10,
            radius_m: 125.0,
            speed_mps: 12.5,
            birth_steps: vec![3, 3, 6, 6, 9, 9, 12, 12, 15, 15],
            death_steps: vec![83, 83, 86, 86, 89, 89, 92, 92, 95, 95],
            n_steps: 100,
            ts: 0.2,
            sigma_q: 0.8,
            extent_dof: 100.0,
            extent_mean: 5.0,
            rate_shape: 100.0,
            gamma: 5.0,
            clutter_rate: 10.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Four objects over 40 steps, small enough for quick Monte-Carlo runs.
    pub fn desk() -> Self {
        Self {
            n_objects: 4,
            birth_steps: vec![3, 3, 6, 6],
            death_steps: vec![33, 33, 36, 36],
            n_steps: 40,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.birth_steps.len() != self.n_objects || self.death_steps.len() != self.n_objects {
            return Err(Error::InvalidParameter(format!(
                "{} objects need as many birth and death steps (got {} and {})",
                self.n_objects,
                self.birth_steps.len(),
                self.death_steps.len()
            )));
        }
        for (i, (&b, &d)) in self.birth_steps.iter().zip(&self.death_steps).enumerate() {
            if b == 0 || b >= d {
                return Err(Error::InvalidParameter(format!(
                    "object {i}: birth {b} / death {d} out of order or range"
                )));
            }
        }
        if !(self.extent_dof > 3.0) || !(self.extent_mean > 0.0) {
            return Err(Error::InvalidParameter(
                "extent prior needs dof > 3 and a positive mean".into(),
            ));
        }
        if !(self.rate_shape > 0.0) || !(self.gamma > 0.0) || !(self.clutter_rate >= 0.0) {
            return Err(Error::InvalidParameter("rates must be positive".into()));
        }
        if !(self.ts > 0.0) || !(self.sigma_q >= 0.0) || !(self.region.area() > 0.0) {
            return Err(Error::InvalidParameter(
                "invalid sampling interval, noise or region".into(),
            ));
        }
        Ok(())
    }

    /// Truth dynamics: nearly constant velocity, no shape or rate change.
    pub fn motion(&self) -> MotionModel {
        MotionModel::constant_velocity(self.ts, self.sigma_q, 1.0, f64::INFINITY, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthObject {
    pub id: usize,
    pub birth_step: usize,
    pub death_step: usize,
    /// State at steps `birth_step..death_step`.
    pub states: Vec<ObjectState>,
}

impl TruthObject {
    pub fn state_at(&self, step: usize) -> Option<&ObjectState> {
        if step < self.birth_step || step >= self.death_step {
            return None;
        }
        self.states.get(step - self.birth_step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub n_steps: usize,
    pub objects: Vec<TruthObject>,
}

impl GroundTruth {
    pub fn alive_at(&self, step: usize) -> Vec<(usize, &ObjectState)> {
        self.objects
            .iter()
            .filter_map(|o| o.state_at(step).map(|s| (o.id, s)))
            .collect()
    }

    pub fn ellipses_at(&self, step: usize) -> Vec<Ellipse> {
        self.alive_at(step)
            .into_iter()
            .map(|(_, s)| Ellipse {
                center: Point::new(s.kinematics[0], s.kinematics[2]),
                extent: s.extent,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    pub step: usize,
    pub points: Vec<Point>,
}

/// SplitMix64 mixing of a base seed with a stream index.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn generate_truth<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<GroundTruth> {
    cfg.validate()?;
    let motion = cfg.motion();
    let scale = Extent::identity() * (cfg.extent_mean * (cfg.extent_dof - 3.0));
    let rate_dist = Gamma::new(cfg.rate_shape, cfg.gamma / cfg.rate_shape)
        .map_err(|e| Error::InvalidParameter(format!("gamma: {e}")))?;
    let noise_root = motion.process_noise.cholesky().map(|c| c.l());
    let mut objects = Vec::with_capacity(cfg.n_objects);
    for id in 0..cfg.n_objects {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let (s, c) = theta.sin_cos();
        let mut x = StateVec::new(
            cfg.radius_m * c,
            -cfg.speed_mps * c,
            cfg.radius_m * s,
            -cfg.speed_mps * s,
        );
        let extent = sample_inverse_wishart(cfg.extent_dof, &scale, rng)?;
        let rate = rate_dist.sample(rng);
        let (birth, death) = (cfg.birth_steps[id], cfg.death_steps[id]);
        let mut states = Vec::with_capacity(death - birth);
        for _ in birth..death {
            states.push(ObjectState {
                rate,
                kinematics: x,
                extent,
            });
            x = motion.transition * x;
            if let Some(l) = &noise_root {
                let w = StateVec::from_fn(|_, _| rng.sample(StandardNormal));
                x += l * w;
            }
        }
        objects.push(TruthObject {
            id,
            birth_step: birth,
            death_step: death,
            states,
        });
    }
    Ok(GroundTruth {
        n_steps: cfg.n_steps,
        objects,
    })
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean)
        .map(|p| p.sample(rng) as usize)
        .unwrap_or(0)
}

/// Object measurements plus uniform clutter, in random order.
pub fn generate_frame<R: Rng + ?Sized>(
    truth: &GroundTruth,
    step: usize,
    clutter_rate: f64,
    region: &Region,
    rng: &mut R,
) -> Result<MeasurementFrame> {
    let mut points = Vec::new();
    for (_, s) in truth.alive_at(step) {
        let l = s
            .extent
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("object extent"))?
            .l();
        let center = Point::new(s.kinematics[0], s.kinematics[2]);
        for _ in 0..poisson_count(s.rate, rng) {
            let w = Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            points.push(center + l * w);
        }
    }
    for _ in 0..poisson_count(clutter_rate, rng) {
        let x = region.x_min + rng.random::<f64>() * (region.x_max - region.x_min);
        let y = region.y_min + rng.random::<f64>() * (region.y_max - region.y_min);
        points.push(Point::new(x, y));
    }
    points.shuffle(rng);
    Ok(MeasurementFrame { step, points })
}

/// Truth and frames for steps `1..=n_steps`; the truth uses stream 0 of
/// `cfg.seed` and frame `k` uses stream `k`.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(GroundTruth, Vec<MeasurementFrame>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0));
    let truth = generate_truth(cfg, &mut rng)?;
    let frames = (1..=cfg.n_steps)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, k as u64));
            generate_frame(&truth, k, cfg.clutter_rate, &cfg.region, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((truth, frames))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_positions_on_circle() {
        let cfg = ScenarioConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth = generate_truth(&cfg, &mut rng).unwrap();
        for o in &truth.objects {
            let x = o.states[0].kinematics;
            assert!(((x[0] * x[0] + x[2] * x[2]).sqrt() - 125.0).abs() < 1e-9);
            assert!(((x[1] * x[1] + x[3] * x[3]).sqrt() - 12.5).abs() < 1e-9);
            // heading to the origin
            assert!(x[0] * x[1] + x[2] * x[3] < 0.0);
        }
    }

    #[test]
    fn alive_counts_follow_schedule() {
        let cfg = ScenarioConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth = generate_truth(&cfg, &mut rng).unwrap();
        assert_eq!(truth.alive_at(50).len(), 10);
        assert_eq!(truth.alive_at(100).len(), 0);
        assert_eq!(truth.alive_at(3).len(), 2);
        assert_eq!(truth.alive_at(2).len(), 0);
    }

    #[test]
    fn no_process_noise_gives_straight_lines() {
        let cfg = ScenarioConfig {
            sigma_q: 0.0,
            ..ScenarioConfig::desk()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let truth = generate_truth(&cfg, &mut rng).unwrap();
        for o in &truth.objects {
            let x0 = o.states[0].kinematics;
            for (k, s) in o.states.iter().enumerate() {
                let t = k as f64 * cfg.ts;
                assert!((s.kinematics[0] - (x0[0] + t * x0[1])).abs() < 1e-9);
                assert!((s.kinematics[2] - (x0[2] + t * x0[3])).abs() < 1e-9);
                assert_eq!(s.kinematics[1], x0[1]);
                assert_eq!(s.extent, o.states[0].extent);
            }
        }
    }

    #[test]
    fn empty_frame_without_objects_or_clutter() {
        let truth = GroundTruth {
            n_steps: 5,
            objects: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = generate_frame(&truth, 2, 0.0, &Region::square(150.0), &mut rng).unwrap();
        assert!(f.points.is_empty());
    }

    #[test]
    fn rejects_inconsistent_schedule() {
        let cfg = ScenarioConfig {
            death_steps: vec![3; 10],
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = ScenarioConfig {
            seed: 17,
            ..ScenarioConfig::desk()
        };
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let other = ScenarioConfig {
            seed: 18,
            ..cfg.clone()
        };
        assert_ne!(simulate(&cfg).unwrap().1, simulate(&other).unwrap().1);
    }
}
