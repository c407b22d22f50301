//! Monte-Carlo experiments for the extended-object PMBM filters.
//!
//! A run simulates one scenario realisation, filters it and scores every
//! step with GOSPA. Runs execute in parallel on derived seeds and are
//! collected in run order, so outputs depend only on the configuration.

pub mod config;
pub mod output;

use anyhow::Result;
use config::{ExperimentConfig, GridCell, InitName, VariantName};
use eot_pmbm::filter::PmbmFilter;
use eot_pmbm::metrics::{gospa, Ellipse, GospaResult};
use eot_pmbm::simulator::{derive_seed, simulate, GroundTruth, MeasurementFrame};
use eot_pmbm::{ObjectState, Point};
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GospaRow {
    pub run: usize,
    pub step: usize,
    pub total: f64,
    pub loc: f64,
    pub miss: f64,
    #[serde(rename = "false")]
    pub false_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub run: usize,
    pub step: usize,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
    pub x11: f64,
    pub x12: f64,
    pub x22: f64,
    pub rate: f64,
}

impl EstimateRow {
    pub fn new(run: usize, step: usize, s: &ObjectState) -> Self {
        let k = &s.kinematics;
        Self {
            run,
            step,
            px: k[0],
            py: k[2],
            vx: k[1],
            vy: k[3],
            x11: s.extent[(0, 0)],
            x12: s.extent[(0, 1)],
            x22: s.extent[(1, 1)],
            rate: s.rate,
        }
    }

    pub fn ellipse(&self) -> Ellipse {
        Ellipse {
            center: Point::new(self.px, self.py),
            extent: eot_pmbm::Extent::new(self.x11, self.x12, self.x12, self.x22),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GospaSummary {
    pub total: f64,
    pub loc: f64,
    pub miss: f64,
    #[serde(rename = "false")]
    pub false_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedRun {
    pub run: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub variant: VariantName,
    pub init: InitName,
    pub iters: usize,
    pub runs: usize,
    /// Mean over every (run, step) row of `gospa.csv`.
    pub gospa: GospaSummary,
    pub runtime_s_per_run: f64,
    pub seed: u64,
    /// True when at least one run failed; its rows stop at the failure.
    pub partial: bool,
    pub failed_runs: Vec<FailedRun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub gospa: Vec<GospaRow>,
    pub estimates: Vec<EstimateRow>,
    pub summary: Summary,
}

struct RunOutput {
    gospa: Vec<GospaRow>,
    estimates: Vec<EstimateRow>,
    seconds: f64,
    error: Option<String>,
}

/// Seed of the scenario realisation of Monte-Carlo run `run`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    derive_seed(base, run as u64)
}

/// Seed of the sampler of run `run`.
pub fn sampler_seed(base: u64, run: usize) -> u64 {
    derive_seed(run_seed(base, run), u64::MAX)
}

/// Per-step GOSPA of estimates against the truth.
pub fn score_step(
    run: usize,
    step: usize,
    estimates: &[Ellipse],
    truth: &GroundTruth,
    c: f64,
    p: f64,
) -> Result<GospaRow> {
    let GospaResult {
        total,
        localization,
        missed,
        false_det,
    } = gospa(estimates, &truth.ellipses_at(step), c, p)?;
    Ok(GospaRow {
        run,
        step,
        total,
        loc: localization,
        miss: missed,
        false_det,
    })
}

/// Filters `frames` and scores each step; on failure returns the rows
/// produced so far with the error.
fn filter_run(
    cfg: &ExperimentConfig,
    run: usize,
    truth: &GroundTruth,
    frames: &[MeasurementFrame],
) -> RunOutput {
    let mut out = RunOutput {
        gospa: Vec::new(),
        estimates: Vec::new(),
        seconds: 0.0,
        error: None,
    };
    let mut filter = match cfg
        .filter_config(sampler_seed(cfg.scenario.seed, run))
        .and_then(|f| Ok(PmbmFilter::new(f)?))
    {
        Ok(f) => f,
        Err(e) => {
            out.error = Some(format!("{e:#}"));
            return out;
        }
    };
    for frame in frames {
        let start = Instant::now();
        let est = filter.step(&frame.points);
        out.seconds += start.elapsed().as_secs_f64();
        let est = match est {
            Ok(e) => e,
            Err(e) => {
                out.error = Some(format!("step {}: {e}", frame.step));
                return out;
            }
        };
        let rows: Vec<EstimateRow> = est
            .iter()
            .map(|s| EstimateRow::new(run, frame.step, s))
            .collect();
        let ellipses: Vec<Ellipse> = rows.iter().map(EstimateRow::ellipse).collect();
        match score_step(
            run,
            frame.step,
            &ellipses,
            truth,
            cfg.filter.gospa_c,
            cfg.filter.gospa_p,
        ) {
            Ok(row) => out.gospa.push(row),
            Err(e) => {
                out.error = Some(format!("step {}: {e}", frame.step));
                return out;
            }
        }
        out.estimates.extend(rows);
    }
    out
}

fn one_run(cfg: &ExperimentConfig, run: usize) -> RunOutput {
    match simulate(&cfg.scenario_config(run_seed(cfg.scenario.seed, run))) {
        Ok((truth, frames)) => filter_run(cfg, run, &truth, &frames),
        Err(e) => RunOutput {
            gospa: Vec::new(),
            estimates: Vec::new(),
            seconds: 0.0,
            error: Some(format!("simulation: {e}")),
        },
    }
}

pub fn mean_gospa(rows: &[GospaRow]) -> GospaSummary {
    if rows.is_empty() {
        return GospaSummary::default();
    }
    let n = rows.len() as f64;
    let mut s = GospaSummary::default();
    for r in rows {
        s.total += r.total;
        s.loc += r.loc;
        s.miss += r.miss;
        s.false_det += r.false_det;
    }
    GospaSummary {
        total: s.total / n,
        loc: s.loc / n,
        miss: s.miss / n,
        false_det: s.false_det / n,
    }
}

/// Runs every Monte-Carlo realisation of the configured cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let outputs: Vec<RunOutput> = (0..cfg.scenario.runs)
        .into_par_iter()
        .map(|run| one_run(cfg, run))
        .collect();
    let mut gospa_rows = Vec::new();
    let mut estimates = Vec::new();
    let mut failed_runs = Vec::new();
    let mut seconds = 0.0;
    for (run, out) in outputs.into_iter().enumerate() {
        gospa_rows.extend(out.gospa);
        estimates.extend(out.estimates);
        seconds += out.seconds;
        if let Some(error) = out.error {
            failed_runs.push(FailedRun { run, error });
        }
    }
    let summary = Summary {
        scenario: cfg.scenario.name.clone(),
        variant: cfg.gibbs.variant,
        init: cfg.gibbs.init,
        iters: cfg.gibbs.iters,
        runs: cfg.scenario.runs,
        gospa: mean_gospa(&gospa_rows),
        runtime_s_per_run: seconds / cfg.scenario.runs as f64,
        seed: cfg.scenario.seed,
        partial: !failed_runs.is_empty(),
        failed_runs,
    };
    Ok(ExperimentResult {
        gospa: gospa_rows,
        estimates,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub variant: VariantName,
    pub init: InitName,
    pub iters: usize,
    pub total: f64,
    pub loc: f64,
    pub miss: f64,
    #[serde(rename = "false")]
    pub false_det: f64,
    pub runtime_s_per_run: f64,
    /// Wall-clock seconds for the whole cell, simulation included.
    pub cell_seconds: f64,
    pub partial: bool,
}

/// Runs every grid cell on the same realisations; rows are sorted by
/// (variant, init, iters).
pub fn compare_variants(cfg: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    cfg.grid()
        .into_iter()
        .map(|cell: GridCell| {
            let start = Instant::now();
            let res = run_experiment(&cfg.with_cell(cell))?;
            let s = res.summary;
            Ok(CompareRow {
                variant: cell.variant,
                init: cell.init,
                iters: cell.iters,
                total: s.gospa.total,
                loc: s.gospa.loc,
                miss: s.gospa.miss,
                false_det: s.gospa.false_det,
                runtime_s_per_run: s.runtime_s_per_run,
                cell_seconds: start.elapsed().as_secs_f64(),
                partial: s.partial,
            })
        })
        .collect()
}
