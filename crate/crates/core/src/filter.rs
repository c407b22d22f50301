//! Recursive PMBM filter: predict, sampling-based update, reduce, extract.

use crate::error::Result;
use crate::ggiw::{GgiwParams, MotionModel, ObjectState};
use crate::gibbs::{self, GibbsConfig};
use crate::linalg::{Extent, Point, StateCov, StateVec};
use crate::pmbm::{self, BirthModel, PmbmDensity, Region, SensorModel};
use crate::reduction::{self, ReductionConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub motion: MotionModel,
    pub sensor: SensorModel,
    pub birth: BirthModel,
    pub gibbs: GibbsConfig,
    pub reduction: ReductionConfig,
}

impl FilterConfig {
    /// Default models for objects with mean measurement rate `gamma` in
    /// `region` with `clutter_rate` clutter measurements per scan.
    pub fn standard(gamma: f64, clutter_rate: f64, region: Region) -> Result<Self> {
        let ts = 0.2;
        let birth_params = GgiwParams {
            alpha: 100.0 * gamma,
            beta: 100.0,
            mean: StateVec::zeros(),
            cov: StateCov::from_diagonal(&StateVec::new(
                150.0 * 150.0,
                225.0,
                150.0 * 150.0,
                225.0,
            )),
            dof: 4.0,
            scale: Extent::identity() * 5.0,
        };
        Ok(Self {
            motion: MotionModel::constant_velocity(ts, 0.8, 1.01, 100.0 * ts, 0.99),
            sensor: SensorModel::new(clutter_rate, region)?,
            birth: BirthModel::single(0.01, birth_params),
            gibbs: GibbsConfig::default(),
            reduction: ReductionConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.motion.validate()?;
        self.gibbs.validate()?;
        self.reduction.validate()?;
        for c in &self.birth.components {
            c.params.validate()?;
        }
        Ok(())
    }
}

pub struct PmbmFilter {
    config: FilterConfig,
    density: PmbmDensity,
    rng: ChaCha8Rng,
}

impl PmbmFilter {
    /// Filter with an empty prior; the sampler stream is seeded from
    /// `config.gibbs.seed`.
    pub fn new(config: FilterConfig) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.gibbs.seed);
        Ok(Self {
            config,
            density: PmbmDensity::new(),
            rng,
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn density(&self) -> &PmbmDensity {
        &self.density
    }

    /// Processes the measurements of the next time step and returns the
    /// object estimates.
    pub fn step(&mut self, meas: &[Point]) -> Result<Vec<ObjectState>> {
        let cfg = &self.config;
        let pred = pmbm::predict(&self.density, &cfg.motion, &cfg.birth)?;
        let post = gibbs::run_update(&pred, meas, &cfg.sensor, &cfg.gibbs, &mut self.rng)?;
        self.density = reduction::reduce(&post, &cfg.reduction);
        Ok(pmbm::extract_estimates(&self.density))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_a_static_object() {
        let mut cfg = FilterConfig::standard(8.0, 1.0, Region::square(150.0)).unwrap();
        cfg.gibbs.n_iter = 50;
        let mut f = PmbmFilter::new(cfg).unwrap();
        let cloud: Vec<Point> = (0..8)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 8.0;
                Point::new(20.0 + 2.0 * a.cos(), -10.0 + 2.0 * a.sin())
            })
            .collect();
        let mut est = Vec::new();
        for _ in 0..10 {
            est = f.step(&cloud).unwrap();
        }
        assert_eq!(est.len(), 1);
        assert!((est[0].kinematics[0] - 20.0).abs() < 1.0);
        assert!((est[0].kinematics[2] + 10.0).abs() < 1.0);
        assert!((f.density().global_weight_sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_estimates_without_measurements() {
        let mut f =
            PmbmFilter::new(FilterConfig::standard(5.0, 10.0, Region::square(150.0)).unwrap())
                .unwrap();
        for _ in 0..5 {
            assert!(f.step(&[]).unwrap().is_empty());
        }
    }
}
