//! Batch front-end for `moea-core`: single runs, archiver comparisons,
//! complexity sweeps and the lattice oracle check.
//!
//! Exit codes: 0 on success, 1 when a run-time check fails, 2 for usage or
//! configuration errors.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use moea_core::archive::{ArchiveConfig, ArchiveKind};
use moea_core::engine::{run, Preset, RunConfig, RunResult};
use moea_core::metrics::{complexity_sweep, coverage};
use moea_core::problems::{brute_force_front, Lattice};
use moea_core::{nondominated_filter, Counters, MoeaError, ObjectiveVector, Solution};
use serde::Serialize;

pub use config::{CompareFile, ConfigFile, Variant};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<MoeaError> for CliError {
    fn from(e: MoeaError) -> Self {
        if e.is_config() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "moea", version, about = "Archive-centred multi-objective evolutionary runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration, once per repeat.
    Run(RunArgs),
    /// Run several archiver variants on the same problem and seeds.
    Compare(CompareArgs),
    /// Measure dominance comparisons per insertion against archive size.
    Sweep(SweepArgs),
    /// Feed every lattice point to each archiver and check the result.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repeats: Option<usize>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    match s {
        "class2" => Ok(Preset::Class2),
        "class3" => Ok(Preset::Class3),
        "class4" => Ok(Preset::Class4),
        other => Err(format!("unknown preset `{other}` (class2, class3, class4)")),
    }
}

/// Options named after `RunConfig` fields; each one replaces the value from
/// the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunOverrides {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub max_evaluations: Option<u64>,
    /// Archiver kind; other archive parameters reset to their defaults
    /// unless the kind is unchanged.
    #[arg(long)]
    pub archive: Option<ArchiveKind>,
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub replacement_count: Option<usize>,
    #[arg(long)]
    pub checkpoint_interval: Option<u64>,
}

impl RunOverrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.problem {
            cfg.problem = p.clone();
        }
        if let Some(n) = self.population_size {
            cfg.population_size = n;
        }
        if let Some(n) = self.max_evaluations {
            cfg.max_evaluations = n;
        }
        if let Some(kind) = self.archive {
            if cfg.archive.kind() != kind {
                cfg.archive = ArchiveConfig::default_for(kind);
            }
        }
        if let Some(p) = self.preset {
            cfg.preset = Some(p);
        }
        if let Some(n) = self.replacement_count {
            cfg.replacement_count = n;
        }
        if let Some(n) = self.checkpoint_interval {
            cfg.checkpoint_interval = n;
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub overrides: RunOverrides,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub archive: ArchiveKind,
    /// Comma-separated archive sizes, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "moea-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Lattice side; k² must not exceed 10 000.
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn execute(command: &Command, log: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run(a) => cmd_run(a, log).map(drop),
        Command::Compare(a) => cmd_compare(a, log).map(drop),
        Command::Sweep(a) => cmd_sweep(a, log).map(drop),
        Command::OracleCheck(a) => cmd_oracle_check(a, log).map(drop),
    }
}

fn say(log: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(log, "{line}").map_err(|e| CliError::Runtime(e.to_string()))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn objectives(front: &[Solution]) -> Vec<ObjectiveVector> {
    front.iter().filter_map(|s| s.objectives.clone()).collect()
}

/// Runs once and re-checks the reported front against the filter oracle.
fn checked_run(cfg: &RunConfig) -> Result<RunResult, CliError> {
    let result = run(cfg)?;
    if nondominated_filter(&result.front)?.len() != result.front.len() {
        return Err(CliError::Runtime(format!(
            "seed {}: reported front contains dominated points",
            cfg.seed
        )));
    }
    Ok(result)
}

/// Files written for one repeat of `run`.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub seed: u64,
    pub front: PathBuf,
    pub stats: PathBuf,
    pub summary: PathBuf,
}

/// Executes the configured run once per repeat with seeds `seed + r`,
/// writing `front_r.csv`, `stats_r.jsonl` and `summary_r.json` into the
/// output directory.
pub fn cmd_run(args: &RunArgs, log: &mut dyn Write) -> Result<Vec<RunFiles>, CliError> {
    let mut file = ConfigFile::load(&args.common.config)?;
    args.overrides.apply(&mut file.run);
    if let Some(s) = args.common.seed {
        file.run.seed = s;
    }
    if let Some(r) = args.common.repeats {
        file.repeats = r;
    }
    let out_dir = args.common.out.clone().unwrap_or(file.out_dir.clone());
    file.validate()?;
    ensure_dir(&out_dir)?;
    let mut written = Vec::with_capacity(file.repeats);
    for r in 0..file.repeats {
        let mut cfg = file.run.clone();
        cfg.seed = file.run.seed.wrapping_add(r as u64);
        let result = checked_run(&cfg)?;
        let files = RunFiles {
            seed: cfg.seed,
            front: out_dir.join(format!("front_{r}.csv")),
            stats: out_dir.join(format!("stats_{r}.jsonl")),
            summary: out_dir.join(format!("summary_{r}.json")),
        };
        output::write_front_csv(&files.front, &result.front)?;
        output::write_stats_jsonl(&files.stats, &result.stats)?;
        output::write_json(&files.summary, &result.summary)?;
        let mut line = format!(
            "repeat {r} seed {}: {} front points, {} evaluations",
            cfg.seed,
            result.front.len(),
            result.summary.evaluations
        );
        for (k, v) in &result.summary.metrics {
            let _ = write!(line, ", {k} {v:.6}");
        }
        say(log, &line)?;
        written.push(files);
    }
    say(
        log,
        &format!("wrote {} repeat(s) to {}", written.len(), out_dir.display()),
    )?;
    Ok(written)
}

/// One row of the comparison table; numeric fields are means over repeats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub variant: String,
    pub archiver: ArchiveKind,
    pub preset: Preset,
    pub repeats: usize,
    pub front_size: f64,
    pub gd: Option<f64>,
    pub spacing: Option<f64>,
    pub deterioration_events: f64,
    pub dominance_comparisons: f64,
    pub cell_lookups: f64,
    /// Summed over repeats; ray archiver only.
    pub monotonicity_violations: Option<usize>,
    /// Mean fraction of each variant's front weakly dominated by this one.
    pub coverage: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub problem: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
}

fn mean_opt(values: &[Option<f64>]) -> Option<f64> {
    let all: Option<Vec<f64>> = values.iter().copied().collect();
    all.map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

fn opt_cell(v: Option<impl std::fmt::Display>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn compare_csv(report: &CompareReport) -> String {
    let names: Vec<&str> = report.rows.iter().map(|r| r.variant.as_str()).collect();
    let mut out = String::from(
        "variant,archiver,preset,repeats,front_size,gd,spacing,deterioration_events,dominance_comparisons,cell_lookups,monotonicity_violations",
    );
    for n in &names {
        let _ = write!(out, ",coverage_of_{n}");
    }
    out.push('\n');
    for r in &report.rows {
        let preset = serde_json::to_value(r.preset)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.variant,
            r.archiver,
            preset,
            r.repeats,
            r.front_size,
            opt_cell(r.gd),
            opt_cell(r.spacing),
            r.deterioration_events,
            r.dominance_comparisons,
            r.cell_lookups,
            opt_cell(r.monotonicity_violations)
        );
        for n in &names {
            let _ = write!(out, ",{}", r.coverage[*n]);
        }
        out.push('\n');
    }
    out
}

/// Runs every variant with seeds `seed + r` and writes `compare.csv` and
/// `compare.json` into the output directory.
pub fn cmd_compare(args: &CompareArgs, log: &mut dyn Write) -> Result<CompareReport, CliError> {
    let mut file = CompareFile::load(&args.common.config)?;
    if let Some(s) = args.common.seed {
        file.run.seed = s;
    }
    if let Some(r) = args.common.repeats {
        file.repeats = r;
    }
    let out_dir = args.common.out.clone().unwrap_or(file.out_dir.clone());
    let variants = file.variant_configs()?;
    ensure_dir(&out_dir)?;
    let seeds: Vec<u64> = (0..file.repeats as u64)
        .map(|r| file.run.seed.wrapping_add(r))
        .collect();

    let mut results: Vec<Vec<RunResult>> = Vec::with_capacity(variants.len());
    for (name, base) in &variants {
        let mut per_seed = Vec::with_capacity(seeds.len());
        for &seed in &seeds {
            let mut cfg = base.clone();
            cfg.seed = seed;
            per_seed.push(checked_run(&cfg).map_err(|e| match e {
                CliError::Runtime(m) => CliError::Runtime(format!("variant `{name}`: {m}")),
                other => other,
            })?);
        }
        results.push(per_seed);
    }

    let n = seeds.len() as f64;
    let mut rows = Vec::with_capacity(variants.len());
    for (i, ((name, cfg), runs)) in variants.iter().zip(&results).enumerate() {
        let mean = |f: &dyn Fn(&RunResult) -> f64| runs.iter().map(f).sum::<f64>() / n;
        let mut cov = BTreeMap::new();
        for (j, (other, _)) in variants.iter().enumerate() {
            let c = (0..seeds.len())
                .map(|s| coverage(&objectives(&results[i][s].front), &objectives(&results[j][s].front)))
                .collect::<Result<Vec<f64>, _>>()?;
            cov.insert(other.clone(), c.iter().sum::<f64>() / n);
        }
        let metric =
            |key: &str| -> Vec<Option<f64>> { runs.iter().map(|r| r.summary.metrics.get(key).copied()).collect() };
        let violations: Option<Vec<usize>> = runs.iter().map(|r| r.summary.monotonicity_violations).collect();
        rows.push(CompareRow {
            variant: name.clone(),
            archiver: cfg.archive.kind(),
            preset: cfg.preset(),
            repeats: runs.len(),
            front_size: mean(&|r| r.front.len() as f64),
            gd: mean_opt(&metric(moea_core::metrics::GD)),
            spacing: mean_opt(&metric(moea_core::metrics::SPACING)),
            deterioration_events: mean(&|r| r.summary.deterioration_events as f64),
            dominance_comparisons: mean(&|r| r.counters.dominance_comparisons as f64),
            cell_lookups: mean(&|r| r.counters.cell_lookups as f64),
            monotonicity_violations: violations.map(|v| v.iter().sum()),
            coverage: cov,
        });
    }
    let report = CompareReport {
        problem: file.run.problem.clone(),
        seeds,
        rows,
    };
    let csv = compare_csv(&report);
    std::fs::write(out_dir.join("compare.csv"), &csv)
        .map_err(|e| CliError::Runtime(format!("cannot write compare.csv: {e}")))?;
    output::write_json(&out_dir.join("compare.json"), &report)?;
    log.write_all(csv.as_bytes())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(report)
}

/// Writes `sweep_<kind>.json` (the full report) and `sweep_<kind>.csv`
/// (`n,mean_comparisons`).
pub fn cmd_sweep(args: &SweepArgs, log: &mut dyn Write) -> Result<moea_core::metrics::ComplexityReport, CliError> {
    let report = complexity_sweep(args.archive, &args.sizes, args.seed)?;
    ensure_dir(&args.out)?;
    output::write_json(&args.out.join(format!("sweep_{}.json", args.archive)), &report)?;
    let mut csv = String::from("n,mean_comparisons\n");
    for p in &report.points {
        let _ = writeln!(csv, "{},{}", p.size, p.mean_comparisons);
    }
    std::fs::write(args.out.join(format!("sweep_{}.csv", args.archive)), csv)
        .map_err(|e| CliError::Runtime(format!("cannot write sweep CSV: {e}")))?;
    let ci = report
        .slope_ci
        .map(|[lo, hi]| format!(" (95% CI {lo:.4} to {hi:.4})"))
        .unwrap_or_default();
    say(log, &format!("{}: log-log slope {:.4}{ci}", args.archive, report.slope))?;
    Ok(report)
}

/// Per-archiver result of the lattice oracle check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleLine {
    pub archiver: ArchiveKind,
    pub front_size: usize,
    pub oracle_size: usize,
    /// Reported points that are not on the oracle front.
    pub outside: usize,
    pub retained_fraction: f64,
}

pub fn cmd_oracle_check(args: &OracleArgs, log: &mut dyn Write) -> Result<Vec<OracleLine>, CliError> {
    let lattice = Lattice::seeded(args.k, args.seed)?;
    let oracle = brute_force_front(&lattice)?;
    let mut lines = Vec::with_capacity(ArchiveKind::ALL.len());
    for kind in ArchiveKind::ALL {
        let mut archive = ArchiveConfig::default_for(kind).build(2, &[0.0, 0.0])?;
        let mut counters = Counters::default();
        for (id, (genome, obj)) in lattice.all_points().into_iter().enumerate() {
            archive.try_insert(Solution::evaluated(id as u64, genome, obj), &mut counters)?;
        }
        let front = objectives(&archive.finalize());
        let outside = front.iter().filter(|p| !oracle.contains(p)).count();
        let kept = oracle.iter().filter(|o| front.contains(o)).count();
        let line = OracleLine {
            archiver: kind,
            front_size: front.len(),
            oracle_size: oracle.len(),
            outside,
            retained_fraction: kept as f64 / oracle.len() as f64,
        };
        say(
            log,
            &format!(
                "{}: retained {}/{} oracle points ({:.3}), {} outside",
                kind,
                kept,
                oracle.len(),
                line.retained_fraction,
                outside
            ),
        )?;
        lines.push(line);
    }
    if let Some(bad) = lines.iter().find(|l| l.outside > 0) {
        return Err(CliError::Runtime(format!(
            "{} reported {} point(s) off the oracle front",
            bad.archiver, bad.outside
        )));
    }
    Ok(lines)
}
