use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use eot_bench::config::{ExperimentConfig, InitName, VariantName};
use eot_bench::output::{self, MeasRow, ESTIMATE_HEADER, GOSPA_HEADER, MEAS_HEADER, TRUTH_HEADER};
use eot_bench::{compare_variants, run_experiment, run_seed, sampler_seed, EstimateRow};
use eot_pmbm::filter::PmbmFilter;
use eot_pmbm::simulator::simulate;
use eot_pmbm::Point;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "eot-bench",
    version,
    about = "Extended-object PMBM tracking experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one realisation and write truth.csv and meas.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Monte-Carlo run index whose realisation is written.
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Filter a meas.csv file and write estimates.csv.
    Track {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        meas: PathBuf,
    },
    /// Score estimates.csv against truth.csv and write gospa.csv.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        estimates: PathBuf,
    },
    /// Monte-Carlo benchmark; with a grid in the config (or --compare),
    /// runs every cell and writes compare.csv.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        compare: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    variant: Option<VariantName>,
    #[arg(long, value_enum)]
    init: Option<InitName>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.variant {
            cfg.gibbs.variant = v;
        }
        if let Some(i) = self.init {
            cfg.gibbs.init = i;
        }
        if let Some(n) = self.iters {
            cfg.gibbs.iters = n;
        }
        if let Some(r) = self.runs {
            cfg.scenario.runs = r;
        }
        if let Some(s) = self.seed {
            cfg.scenario.seed = s;
        }
        if let Some(k) = self.steps {
            cfg.scenario.n_steps = k;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.display().to_string();
        }
        cfg.validate()?;
        let dir = PathBuf::from(&cfg.output.dir);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok((cfg, dir))
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { common, run } => {
            let (cfg, dir) = common.resolve()?;
            let (truth, frames) = simulate(&cfg.scenario_config(run_seed(cfg.scenario.seed, run)))?;
            output::write_csv(
                &dir.join("truth.csv"),
                &TRUTH_HEADER,
                &output::truth_rows(&truth),
            )?;
            output::write_csv(
                &dir.join("meas.csv"),
                &MEAS_HEADER,
                &output::meas_rows(&frames),
            )?;
        }
        Command::Track { common, meas } => {
            let (cfg, dir) = common.resolve()?;
            let rows: Vec<MeasRow> = output::read_csv(&meas)?;
            let mut by_step: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
            for r in rows {
                by_step
                    .entry(r.step)
                    .or_default()
                    .push(Point::new(r.mx, r.my));
            }
            let mut filter =
                PmbmFilter::new(cfg.filter_config(sampler_seed(cfg.scenario.seed, 0))?)?;
            let mut estimates = Vec::new();
            for step in 1..=cfg.scenario.n_steps {
                let points = by_step.remove(&step).unwrap_or_default();
                let est = filter
                    .step(&points)
                    .with_context(|| format!("step {step}"))?;
                estimates.extend(est.iter().map(|s| EstimateRow::new(0, step, s)));
            }
            output::write_csv(&dir.join("estimates.csv"), &ESTIMATE_HEADER, &estimates)?;
        }
        Command::Evaluate {
            common,
            truth,
            estimates,
        } => {
            let (cfg, dir) = common.resolve()?;
            let rows = output::evaluate_files(
                &truth,
                &estimates,
                cfg.scenario.n_steps,
                cfg.filter.gospa_c,
                cfg.filter.gospa_p,
            )?;
            output::write_csv(&dir.join("gospa.csv"), &GOSPA_HEADER, &rows)?;
        }
        Command::Bench { common, compare } => {
            let (cfg, dir) = common.resolve()?;
            if compare || !cfg.gibbs.grid.is_empty() {
                let rows = compare_variants(&cfg)?;
                output::write_compare(&dir, &cfg, &rows)?;
                for r in &rows {
                    println!(
                        "{:<9} {:<7} {:>5} iters  gospa {:.3} (loc {:.3}, miss {:.3}, false {:.3})  {:.3} s/run",
                        r.variant, r.init, r.iters, r.total, r.loc, r.miss, r.false_det, r.runtime_s_per_run
                    );
                }
            } else {
                let result = run_experiment(&cfg)?;
                output::write_experiment(&dir, &cfg, &result)?;
                let s = &result.summary;
                println!(
                    "{} {} {} iters, {} runs: gospa {:.3} (loc {:.3}, miss {:.3}, false {:.3}), {:.3} s/run{}",
                    s.variant,
                    s.init,
                    s.iters,
                    s.runs,
                    s.gospa.total,
                    s.gospa.loc,
                    s.gospa.miss,
                    s.gospa.false_det,
                    s.runtime_s_per_run,
                    if s.partial { " (partial)" } else { "" }
                );
            }
        }
    }
    Ok(())
}
