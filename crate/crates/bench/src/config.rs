//! TOML experiment configuration.
//!
//! Every key has a default, so an empty file selects the standard
//! ten-object scenario. Unknown keys are rejected with their name.

use anyhow::{bail, Context, Result};
use eot_pmbm::filter::FilterConfig;
use eot_pmbm::gibbs::{GibbsConfig, InitMode, Variant};
use eot_pmbm::linalg::{Extent, StateCov, StateVec};
use eot_pmbm::pmbm::{BirthModel, Region, SensorModel};
use eot_pmbm::reduction::ReductionConfig;
use eot_pmbm::simulator::ScenarioConfig;
use eot_pmbm::{GgiwParams, MotionModel};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    Full,
    Collapsed,
}

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum InitName {
    Simple,
    Cluster,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::Full => Variant::Full,
            VariantName::Collapsed => Variant::Collapsed,
        }
    }
}

impl From<InitName> for InitMode {
    fn from(v: InitName) -> Self {
        match v {
            InitName::Simple => InitMode::Simple,
            InitName::Cluster => InitMode::Cluster,
        }
    }
}

impl std::fmt::Display for VariantName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VariantName::Full => "full",
            VariantName::Collapsed => "collapsed",
        })
    }
}

impl std::fmt::Display for InitName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitName::Simple => "simple",
            InitName::Cluster => "cluster",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub name: String,
    pub runs: usize,
    pub seed: u64,
    pub region_half_width: f64,
    pub n_objects: usize,
    pub radius_m: f64,
    pub speed_mps: f64,
    pub birth_steps: Vec<usize>,
    pub death_steps: Vec<usize>,
    pub n_steps: usize,
    pub ts: f64,
    pub sigma_q: f64,
    pub extent_dof: f64,
    pub extent_mean: f64,
    pub rate_shape: f64,
    pub gamma: f64,
    pub clutter_rate: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = ScenarioConfig::default();
        Self {
            name: "standard".into(),
            runs: 1,
            seed: 0,
            region_half_width: s.region.x_max,
            n_objects: s.n_objects,
            radius_m: s.radius_m,
            speed_mps: s.speed_mps,
            birth_steps: s.birth_steps,
            death_steps: s.death_steps,
            n_steps: s.n_steps,
            ts: s.ts,
            sigma_q: s.sigma_q,
            extent_dof: s.extent_dof,
            extent_mean: s.extent_mean,
            rate_shape: s.rate_shape,
            gamma: s.gamma,
            clutter_rate: s.clutter_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub survival_prob: f64,
    pub rate_forgetting: f64,
    /// Extent time constant in units of the sampling interval.
    pub extent_time_constant_steps: f64,
    pub sigma_q: f64,
    pub birth_rate: f64,
    /// Birth gamma shape per unit of the object rate.
    pub birth_alpha_per_gamma: f64,
    pub birth_beta: f64,
    pub birth_position_var: f64,
    pub birth_velocity_var: f64,
    pub birth_dof: f64,
    pub birth_extent_scale: f64,
    pub gospa_c: f64,
    pub gospa_p: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            survival_prob: 0.99,
            rate_forgetting: 1.01,
            extent_time_constant_steps: 100.0,
            sigma_q: 0.8,
            birth_rate: 0.01,
            birth_alpha_per_gamma: 100.0,
            birth_beta: 100.0,
            birth_position_var: 150.0 * 150.0,
            birth_velocity_var: 225.0,
            birth_dof: 4.0,
            birth_extent_scale: 5.0,
            gospa_c: 20.0,
            gospa_p: 1.0,
        }
    }
}

/// One cell of a comparison grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub variant: VariantName,
    pub init: InitName,
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsSection {
    pub variant: VariantName,
    pub init: InitName,
    pub iters: usize,
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    /// Cells run by `compare_variants`; empty means the single cell above.
    pub grid: Vec<GridCell>,
}

impl Default for GibbsSection {
    fn default() -> Self {
        let g = GibbsConfig::default();
        Self {
            variant: VariantName::Collapsed,
            init: InitName::Cluster,
            iters: g.n_iter,
            dbscan_eps: g.dbscan_eps,
            dbscan_min_pts: g.dbscan_min_pts,
            grid: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReductionSection {
    pub global_weight_threshold: f64,
    pub existence_threshold: f64,
    pub ppp_weight_threshold: f64,
    pub max_globals: usize,
}

impl Default for ReductionSection {
    fn default() -> Self {
        let r = ReductionConfig::default();
        Self {
            global_weight_threshold: r.global_weight_threshold,
            existence_threshold: r.existence_threshold,
            ppp_weight_threshold: r.ppp_weight_threshold,
            max_globals: r.max_globals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub write_estimates: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "results".into(),
            write_estimates: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub filter: FilterSection,
    pub gibbs: GibbsSection,
    pub reduction: ReductionSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Four objects over 40 steps with 20 Monte-Carlo runs.
    pub fn desk() -> Self {
        let s = ScenarioConfig::desk();
        let mut cfg = Self::default();
        cfg.scenario.name = "desk".into();
        cfg.scenario.runs = 20;
        cfg.scenario.n_objects = s.n_objects;
        cfg.scenario.birth_steps = s.birth_steps;
        cfg.scenario.death_steps = s.death_steps;
        cfg.scenario.n_steps = s.n_steps;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.runs == 0 {
            bail!("scenario.runs must be at least 1");
        }
        self.scenario_config(0).validate()?;
        self.filter_config(0)?.validate()?;
        if !(self.filter.gospa_c > 0.0) || !(self.filter.gospa_p >= 1.0) {
            bail!("GOSPA needs c > 0 and p >= 1");
        }
        for cell in &self.gibbs.grid {
            if cell.iters == 0 {
                bail!("grid cell {cell:?} has zero iterations");
            }
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        Region::square(self.scenario.region_half_width)
    }

    pub fn scenario_config(&self, seed: u64) -> ScenarioConfig {
        let s = &self.scenario;
        ScenarioConfig {
            region: self.region(),
            n_objects: s.n_objects,
            radius_m: s.radius_m,
            speed_mps: s.speed_mps,
            birth_steps: s.birth_steps.clone(),
            death_steps: s.death_steps.clone(),
            n_steps: s.n_steps,
            ts: s.ts,
            sigma_q: s.sigma_q,
            extent_dof: s.extent_dof,
            extent_mean: s.extent_mean,
            rate_shape: s.rate_shape,
            gamma: s.gamma,
            clutter_rate: s.clutter_rate,
            seed,
        }
    }

    pub fn filter_config(&self, gibbs_seed: u64) -> Result<FilterConfig> {
        let f = &self.filter;
        let ts = self.scenario.ts;
        let birth = GgiwParams {
            alpha: f.birth_alpha_per_gamma * self.scenario.gamma,
            beta: f.birth_beta,
            mean: StateVec::zeros(),
            cov: StateCov::from_diagonal(&StateVec::new(
                f.birth_position_var,
                f.birth_velocity_var,
                f.birth_position_var,
                f.birth_velocity_var,
            )),
            dof: f.birth_dof,
            scale: Extent::identity() * f.birth_extent_scale,
        };
        let g = &self.gibbs;
        let r = &self.reduction;
        Ok(FilterConfig {
            motion: MotionModel::constant_velocity(
                ts,
                f.sigma_q,
                f.rate_forgetting,
                f.extent_time_constant_steps * ts,
                f.survival_prob,
            ),
            sensor: SensorModel::new(self.scenario.clutter_rate, self.region())?,
            birth: BirthModel::single(f.birth_rate, birth),
            gibbs: GibbsConfig {
                n_iter: g.iters,
                variant: g.variant.into(),
                init: g.init.into(),
                dbscan_eps: g.dbscan_eps,
                dbscan_min_pts: g.dbscan_min_pts,
                seed: gibbs_seed,
            },
            reduction: ReductionConfig {
                global_weight_threshold: r.global_weight_threshold,
                existence_threshold: r.existence_threshold,
                ppp_weight_threshold: r.ppp_weight_threshold,
                max_globals: r.max_globals,
            },
        })
    }

    /// Grid cells sorted by (variant, init, iters).
    pub fn grid(&self) -> Vec<GridCell> {
        let mut cells = if self.gibbs.grid.is_empty() {
            vec![GridCell {
                variant: self.gibbs.variant,
                init: self.gibbs.init,
                iters: self.gibbs.iters,
            }]
        } else {
            self.gibbs.grid.clone()
        };
        cells.sort();
        cells.dedup();
        cells
    }

    pub fn with_cell(&self, cell: GridCell) -> Self {
        let mut cfg = self.clone();
        cfg.gibbs.variant = cell.variant;
        cfg.gibbs.init = cell.init;
        cfg.gibbs.iters = cell.iters;
        cfg.gibbs.grid.clear();
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_toml("[gibbs]\nitres = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("itres"), "{err:#}");
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::desk();
        cfg.gibbs.grid = vec![GridCell {
            variant: VariantName::Full,
            init: InitName::Simple,
            iters: 5,
        }];
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn grid_is_sorted() {
        let mut cfg = ExperimentConfig::default();
        cfg.gibbs.grid = vec![
            GridCell {
                variant: VariantName::Collapsed,
                init: InitName::Cluster,
                iters: 20,
            },
            GridCell {
                variant: VariantName::Full,
                init: InitName::Simple,
                iters: 500,
            },
            GridCell {
                variant: VariantName::Collapsed,
                init: InitName::Cluster,
                iters: 5,
            },
        ];
        let g = cfg.grid();
        assert_eq!(g[0].variant, VariantName::Full);
        assert_eq!((g[1].iters, g[2].iters), (5, 20));
    }
}
