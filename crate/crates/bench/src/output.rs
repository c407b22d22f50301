//! CSV and JSON artifacts.

use crate::config::ExperimentConfig;
use crate::{CompareRow, ExperimentResult, GospaRow};
use anyhow::{Context, Result};
use eot_pmbm::metrics::{gospa, Ellipse};
use eot_pmbm::simulator::{GroundTruth, MeasurementFrame};
use eot_pmbm::{Extent, Point};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub const GOSPA_HEADER: [&str; 6] = ["run", "step", "total", "loc", "miss", "false"];
pub const ESTIMATE_HEADER: [&str; 10] = [
    "run", "step", "px", "py", "vx", "vy", "x11", "x12", "x22", "rate",
];
pub const TRUTH_HEADER: [&str; 10] = [
    "step", "obj_id", "px", "py", "vx", "vy", "x11", "x12", "x22", "rate",
];
pub const MEAS_HEADER: [&str; 3] = ["step", "mx", "my"];
pub const COMPARE_HEADER: [&str; 10] = [
    "variant",
    "init",
    "iters",
    "total",
    "loc",
    "miss",
    "false",
    "runtime_s_per_run",
    "cell_seconds",
    "partial",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub step: usize,
    pub obj_id: usize,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
    pub x11: f64,
    pub x12: f64,
    pub x22: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasRow {
    pub step: usize,
    pub mx: f64,
    pub my: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct EstimateRecord {
    run: usize,
    step: usize,
    px: f64,
    py: f64,
    #[allow(dead_code)]
    vx: f64,
    #[allow(dead_code)]
    vy: f64,
    x11: f64,
    x12: f64,
    x22: f64,
    #[allow(dead_code)]
    rate: f64,
}

/// Writes `rows` after an explicit header, so empty tables keep it.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .map(|row| row.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

pub fn truth_rows(truth: &GroundTruth) -> Vec<TruthRow> {
    let mut rows = Vec::new();
    for step in 1..=truth.n_steps {
        for (id, s) in truth.alive_at(step) {
            let k = &s.kinematics;
            rows.push(TruthRow {
                step,
                obj_id: id,
                px: k[0],
                py: k[2],
                vx: k[1],
                vy: k[3],
                x11: s.extent[(0, 0)],
                x12: s.extent[(0, 1)],
                x22: s.extent[(1, 1)],
                rate: s.rate,
            });
        }
    }
    rows
}

pub fn meas_rows(frames: &[MeasurementFrame]) -> Vec<MeasRow> {
    frames
        .iter()
        .flat_map(|f| {
            f.points.iter().map(|p| MeasRow {
                step: f.step,
                mx: p[0],
                my: p[1],
            })
        })
        .collect()
}

/// Writes `gospa.csv`, `estimates.csv`, `summary.json` and `config.toml`.
pub fn write_experiment(
    dir: &Path,
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join("gospa.csv"), &GOSPA_HEADER, &result.gospa)?;
    if cfg.output.write_estimates {
        write_csv(
            &dir.join("estimates.csv"),
            &ESTIMATE_HEADER,
            &result.estimates,
        )?;
    }
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&result.summary)? + "\n",
    )?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

pub fn write_compare(dir: &Path, cfg: &ExperimentConfig, rows: &[CompareRow]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join("compare.csv"), &COMPARE_HEADER, rows)?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

/// Scores estimates against truth read back from CSV, for steps
/// `1..=n_steps` of every run present in the estimates (run 0 if none).
pub fn evaluate_files(
    truth: &Path,
    estimates: &Path,
    n_steps: usize,
    c: f64,
    p: f64,
) -> Result<Vec<GospaRow>> {
    let truth_rows: Vec<TruthRow> = read_csv(truth)?;
    let est_rows: Vec<EstimateRecord> = read_csv(estimates)?;
    let mut truth_by_step: BTreeMap<usize, Vec<Ellipse>> = BTreeMap::new();
    for t in &truth_rows {
        truth_by_step.entry(t.step).or_default().push(Ellipse {
            center: Point::new(t.px, t.py),
            extent: Extent::new(t.x11, t.x12, t.x12, t.x22),
        });
    }
    let mut est: BTreeMap<(usize, usize), Vec<Ellipse>> = BTreeMap::new();
    let mut runs: Vec<usize> = est_rows.iter().map(|e| e.run).collect();
    for e in &est_rows {
        est.entry((e.run, e.step)).or_default().push(Ellipse {
            center: Point::new(e.px, e.py),
            extent: Extent::new(e.x11, e.x12, e.x12, e.x22),
        });
    }
    runs.sort_unstable();
    runs.dedup();
    if runs.is_empty() {
        runs.push(0);
    }
    let empty = Vec::new();
    let mut rows = Vec::new();
    for run in runs {
        for step in 1..=n_steps {
            let e = est.get(&(run, step)).unwrap_or(&empty);
            let t = truth_by_step.get(&step).unwrap_or(&empty);
            let g = gospa(e, t, c, p)?;
            rows.push(GospaRow {
                run,
                step,
                total: g.total,
                loc: g.localization,
                miss: g.missed,
                false_det: g.false_det,
            });
        }
    }
    Ok(rows)
}
