//! Batch runs over instances, tours, algorithms and confidence levels, with
//! raw per-run rows and per-cell aggregates.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pwt::{
    pack_iterative, pack_static, pack_surrogate, Bound, Mode, PackOptions, Reward, RewardSpec,
    SolveReport, StochasticSpec, TourContext, Variant,
};

use crate::commands::{hyper_heuristic, load_context, load_instance, HHArgs, TourSource};
use crate::error::{CliError, Result};
use crate::stats::summarize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TourConfig {
    /// Number of randomized tours per instance; tour `t` uses seed `seed + t`.
    #[serde(default = "default_tour_count")]
    pub generate: usize,
    #[serde(default)]
    pub seed: u64,
    /// Tour files used for every instance instead of generated tours.
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

impl Default for TourConfig {
    fn default() -> Self {
        TourConfig {
            generate: default_tour_count(),
            seed: 0,
            files: Vec::new(),
        }
    }
}

fn default_tour_count() -> usize {
    30
}

fn default_alphas() -> Vec<f64> {
    vec![0.9, 0.999]
}

fn default_delta() -> f64 {
    20.0
}

fn default_one() -> usize {
    1
}

fn default_iterations() -> usize {
    1000
}

fn default_mutation() -> f64 {
    0.1
}

/// TOML experiment description. Relative paths are resolved against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub tours: TourConfig,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Confidence levels for chance-constrained algorithms.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub bound: Option<Bound>,
    /// Hyper-heuristic runs per tour, with seeds `seed`, `seed + 1`, ...
    #[serde(default = "default_one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_mutation")]
    pub mutation: f64,
    pub output: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::commands::read_text(path)?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|source| CliError::Config {
                path: path.into(),
                source,
            })?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.instances.iter_mut().for_each(fix);
        self.tours.files.iter_mut().for_each(fix);
        fix(&mut self.output);
    }

    pub fn check(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(CliError::usage("no instances given"));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::usage("no algorithms given"));
        }
        if self.tours.files.is_empty() && self.tours.generate == 0 {
            return Err(CliError::usage("tours.generate must be positive"));
        }
        if self.algorithms.iter().any(AlgorithmSpec::is_chance) && self.alphas.is_empty() {
            return Err(CliError::usage(
                "chance-constrained algorithms need at least one alpha",
            ));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(CliError::usage(format!("alpha {a} outside (0, 1)")));
        }
        if !(self.delta >= 0.0) {
            return Err(CliError::usage("delta must be nonnegative"));
        }
        if self.repetitions == 0 {
            return Err(CliError::usage("repetitions must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mutation) {
            return Err(CliError::usage("mutation must lie in [0, 1]"));
        }
        Ok(())
    }

    fn tour_sources(&self) -> Vec<TourSource> {
        if self.tours.files.is_empty() {
            (0..self.tours.generate)
                .map(|t| TourSource::Seed(self.tours.seed + t as u64))
                .collect()
        } else {
            self.tours
                .files
                .iter()
                .cloned()
                .map(TourSource::File)
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackKind {
    Pack,
    PackIh,
    PackSf,
}

impl PackKind {
    pub fn name(self) -> &'static str {
        match self {
            PackKind::Pack => "pack",
            PackKind::PackIh => "pack_ih",
            PackKind::PackSf => "pack_sf",
        }
    }

    fn accepts(self, reward: Reward) -> bool {
        use Reward::*;
        match self {
            PackKind::Pack => matches!(reward, R1 | R2 | R3),
            PackKind::PackIh => !reward.needs_chance(),
            PackKind::PackSf => matches!(reward, R1 | R6 | R7),
        }
    }
}

/// One algorithm column of an experiment: a greedy algorithm with its
/// reward, or a hyper-heuristic variant.
///
/// Written as `r3` (the matching greedy algorithm), `pack_sf:r1` (explicit
/// algorithm, also `pack`, `pack_ih`, `sf`, `ih`) or `HH2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmSpec {
    Greedy { kind: PackKind, reward: RewardSpec },
    Hyper(Variant),
}

impl AlgorithmSpec {
    pub fn is_chance(&self) -> bool {
        match self {
            AlgorithmSpec::Greedy { kind, .. } => *kind == PackKind::PackSf,
            AlgorithmSpec::Hyper(v) => v.requires_chance(),
        }
    }

    fn algorithm(&self) -> &'static str {
        match self {
            AlgorithmSpec::Greedy { kind, .. } => kind.name(),
            AlgorithmSpec::Hyper(_) => "hh",
        }
    }

    fn reward(&self) -> &'static str {
        match self {
            AlgorithmSpec::Greedy { reward, .. } => reward.kind.name(),
            AlgorithmSpec::Hyper(v) => v.name(),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.algorithm(), self.reward())
    }
}

impl FromStr for AlgorithmSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<Variant>() {
            return Ok(AlgorithmSpec::Hyper(v));
        }
        let (kind, reward) = match s.split_once(':') {
            Some((alg, reward)) => {
                let kind = match alg.trim().to_ascii_lowercase().as_str() {
                    "pack" => PackKind::Pack,
                    "pack_ih" | "ih" => PackKind::PackIh,
                    "pack_sf" | "sf" => PackKind::PackSf,
                    "hh" => return Ok(AlgorithmSpec::Hyper(reward.parse()?)),
                    other => return Err(CliError::usage(format!("unknown algorithm {other:?}"))),
                };
                (kind, reward.parse()?)
            }
            None => {
                let reward: Reward = s.parse()?;
                let kind = match reward {
                    Reward::R1 | Reward::R2 | Reward::R3 => PackKind::Pack,
                    Reward::R4 | Reward::R5 => PackKind::PackIh,
                    Reward::R6 | Reward::R7 => PackKind::PackSf,
                };
                (kind, reward)
            }
        };
        if !kind.accepts(reward) {
            return Err(CliError::usage(format!(
                "{} does not take {reward}",
                kind.name()
            )));
        }
        Ok(AlgorithmSpec::Greedy {
            kind,
            reward: reward.into(),
        })
    }
}

impl<'de> Deserialize<'de> for AlgorithmSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One run. Optional fields are empty for failed runs and for settings that
/// do not apply (alpha of a deterministic run, seed of a greedy run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub instance: String,
    pub tour_id: usize,
    pub algorithm: String,
    pub reward: String,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub bound: Option<String>,
    pub seed: Option<u64>,
    pub objective: Option<f64>,
    pub total_weight: Option<f64>,
    pub surrogate_weight: Option<f64>,
    pub items_packed: Option<usize>,
    pub evaluations: Option<u64>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

impl RawRow {
    /// `algorithm:reward`, the aggregate grouping label.
    pub fn label(&self) -> String {
        format!("{}:{}", self.algorithm, self.reward)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub instance: String,
    pub algorithm: String,
    pub alpha: Option<f64>,
    pub runs: usize,
    pub mean_objective: f64,
    pub std_objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResults {
    pub raw: Vec<RawRow>,
    pub aggregate: Vec<AggregateRow>,
}

impl ExperimentResults {
    pub fn failures(&self) -> usize {
        self.raw.iter().filter(|r| r.error.is_some()).count()
    }

    /// Aggregate row for `(instance, algorithm label, alpha)`.
    pub fn find(
        &self,
        instance: &str,
        algorithm: &str,
        alpha: Option<f64>,
    ) -> Option<&AggregateRow> {
        self.aggregate
            .iter()
            .find(|a| a.instance == instance && a.algorithm == algorithm && a.alpha == alpha)
    }
}

struct Cell {
    instance: usize,
    tour_id: usize,
    algorithm: AlgorithmSpec,
    alpha: Option<f64>,
    seed: Option<u64>,
}

/// Runs every instance × tour × algorithm × alpha cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.check()?;
    let tours = cfg.tour_sources();
    let mut contexts: Vec<Vec<TourContext>> = Vec::with_capacity(cfg.instances.len());
    let mut names = Vec::with_capacity(cfg.instances.len());
    for path in &cfg.instances {
        let instance = Arc::new(load_instance(path)?);
        names.push(instance.name.clone());
        let ctxs = tours
            .iter()
            .map(|t| load_context(instance.clone(), t))
            .collect::<Result<Vec<_>>>()?;
        contexts.push(ctxs);
    }

    let mut cells = Vec::new();
    for (i, ctxs) in contexts.iter().enumerate() {
        for tour_id in 0..ctxs.len() {
            for &algorithm in &cfg.algorithms {
                let alphas: Vec<Option<f64>> = if algorithm.is_chance() {
                    cfg.alphas.iter().copied().map(Some).collect()
                } else {
                    vec![None]
                };
                let seeds: Vec<Option<u64>> = match algorithm {
                    AlgorithmSpec::Hyper(_) => (0..cfg.repetitions)
                        .map(|r| Some(cfg.seed + (tour_id * cfg.repetitions + r) as u64))
                        .collect(),
                    AlgorithmSpec::Greedy { .. } => vec![None],
                };
                for &alpha in &alphas {
                    for &seed in &seeds {
                        cells.push(Cell {
                            instance: i,
                            tour_id,
                            algorithm,
                            alpha,
                            seed,
                        });
                    }
                }
            }
        }
    }

    let mut raw: Vec<RawRow> = cells
        .par_iter()
        .map(|cell| {
            run_cell(
                cfg,
                &contexts[cell.instance][cell.tour_id],
                &names[cell.instance],
                cell,
            )
        })
        .collect();
    raw.sort_by(|a, b| {
        a.instance
            .cmp(&b.instance)
            .then_with(|| a.label().cmp(&b.label()))
            .then_with(|| cmp_alpha(a.alpha, b.alpha))
            .then_with(|| a.tour_id.cmp(&b.tour_id))
            .then_with(|| a.seed.cmp(&b.seed))
    });
    let aggregate = aggregate(&raw)?;
    Ok(ExperimentResults { raw, aggregate })
}

fn cmp_alpha(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.is_some().cmp(&b.is_some()),
    }
}

fn run_cell(cfg: &ExperimentConfig, ctx: &TourContext, name: &str, cell: &Cell) -> RawRow {
    let mut row = RawRow {
        instance: name.to_string(),
        tour_id: cell.tour_id,
        algorithm: cell.algorithm.algorithm().to_string(),
        reward: cell.algorithm.reward().to_string(),
        alpha: cell.alpha,
        delta: cell.alpha.map(|_| cfg.delta),
        bound: cell.alpha.map(|a| {
            cfg.bound
                .unwrap_or(Bound::Auto)
                .resolve(a)
                .as_str()
                .to_string()
        }),
        seed: cell.seed,
        objective: None,
        total_weight: None,
        surrogate_weight: None,
        items_packed: None,
        evaluations: None,
        runtime_ms: None,
        error: None,
    };
    match solve_cell(cfg, ctx, cell) {
        Ok(report) => {
            row.objective = Some(report.objective);
            row.total_weight = Some(report.total_weight);
            row.surrogate_weight = report.surrogate_weight;
            row.items_packed = Some(report.items.len());
            row.evaluations = Some(report.evaluations);
            row.runtime_ms = Some(report.runtime_ms);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn solve_cell(cfg: &ExperimentConfig, ctx: &TourContext, cell: &Cell) -> Result<SolveReport> {
    let mode = match cell.alpha {
        Some(alpha) => Mode::Chance(StochasticSpec::uniform(
            ctx.instance(),
            cfg.delta,
            alpha,
            cfg.bound.unwrap_or(Bound::Auto),
        )?),
        None => Mode::Deterministic,
    };
    let opts = PackOptions::default();
    let report = match cell.algorithm {
        AlgorithmSpec::Greedy {
            kind: PackKind::Pack,
            reward,
        } => pack_static(ctx, reward, opts)?.report,
        AlgorithmSpec::Greedy {
            kind: PackKind::PackIh,
            reward,
        } => pack_iterative(ctx, reward, opts)?.report,
        AlgorithmSpec::Greedy {
            kind: PackKind::PackSf,
            reward,
        } => pack_surrogate(ctx, reward, &mode, opts)?.report,
        AlgorithmSpec::Hyper(variant) => {
            let args = HHArgs {
                variant,
                iterations: cfg.iterations,
                mutation: cfg.mutation,
                seed: cell.seed.unwrap_or(cfg.seed),
            };
            hyper_heuristic(ctx, args, mode)?
        }
    };
    Ok(report)
}

/// Mean and sample standard deviation of the successful runs of every
/// `(instance, algorithm, alpha)` group, in raw-row order.
pub fn aggregate(raw: &[RawRow]) -> Result<Vec<AggregateRow>> {
    type Group = ((String, String, Option<f64>), Vec<f64>);
    let mut groups: Vec<Group> = Vec::new();
    let mut index: BTreeMap<(String, String, Option<u64>), usize> = BTreeMap::new();
    for row in raw {
        let Some(z) = row.objective else { continue };
        let key = (
            row.instance.clone(),
            row.label(),
            row.alpha.map(f64::to_bits),
        );
        let at = *index.entry(key).or_insert_with(|| {
            groups.push(((row.instance.clone(), row.label(), row.alpha), Vec::new()));
            groups.len() - 1
        });
        groups[at].1.push(z);
    }
    groups
        .into_iter()
        .map(|((instance, algorithm, alpha), scores)| {
            let (mean_objective, std_objective) = summarize(&scores)?;
            Ok(AggregateRow {
                instance,
                algorithm,
                alpha,
                runs: scores.len(),
                mean_objective,
                std_objective,
            })
        })
        .collect()
}

/// Writes `raw.{csv,json}` and `aggregate.{csv,json}` into the output
/// directory and returns their paths.
pub fn write_results(
    results: &ExperimentResults,
    dir: &Path,
    format: OutputFormat,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let raw_path = dir.join(format!("raw.{ext}"));
    let agg_path = dir.join(format!("aggregate.{ext}"));
    match format {
        OutputFormat::Csv => {
            write_csv(&raw_path, &results.raw)?;
            write_csv(&agg_path, &results.aggregate)?;
        }
        OutputFormat::Json => {
            crate::commands::write_text(&raw_path, &serde_json::to_string_pretty(&results.raw)?)?;
            crate::commands::write_text(
                &agg_path,
                &serde_json::to_string_pretty(&results.aggregate)?,
            )?;
        }
    }
    Ok((raw_path, agg_path))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Loads, runs and writes an experiment; fails after writing if any run
/// failed.
pub fn run_config(path: &Path) -> Result<ExperimentResults> {
    let cfg = ExperimentConfig::load(path)?;
    let results = run_experiment(&cfg)?;
    write_results(&results, &cfg.output, cfg.format)?;
    match results.failures() {
        0 => Ok(results),
        failed => Err(CliError::RunsFailed {
            failed,
            total: results.raw.len(),
        }),
    }
}
