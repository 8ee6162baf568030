//! Experiment configuration, per-trial result rows and aggregation.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{self, BaselineError};
use crate::beep_and_sleep::{random_connected_graph, run_beep_and_sleep_with, run_dominating_set};
use crate::instance::{
    generate_random, generate_scaling_family, read_instance, Density, Instance, InstanceError,
    Solution,
};
use crate::kt0::render_message_log;
use crate::kt0_setcover::{
    run_kt0_setcover_with, stage_boundary_degrees, Kt0Options, Kt0Params, STAGE_ONE, STAGE_TWO,
};
use crate::scalar::{loglog_slope, max, mean, median};

/// Instances with at most this many sets are compared against the exact optimum.
pub const EXACT_REFERENCE_MAX_SETS: usize = 20;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("solution leaves {0} elements uncovered")]
    IncompleteCover(usize),
}

impl HarnessError {
    /// 1 for configuration problems, 2 for everything that fails at runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Instance(InstanceError::InfeasibleParams(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Beep,
    Kt0,
    Dominating,
    Greedy,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// Number of Beep-and-Sleep phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseCount {
    Fixed(usize),
    /// `⌈log₂ Δ⌉` of the instance at hand.
    LogDelta,
}

impl PhaseCount {
    pub fn resolve(self, delta: crate::instance::Delta) -> usize {
        match self {
            PhaseCount::Fixed(k) => k,
            PhaseCount::LogDelta => delta.log2_ceil(),
        }
    }
}

impl FromStr for PhaseCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "log" {
            return Ok(PhaseCount::LogDelta);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(PhaseCount::Fixed(k)),
            _ => Err(format!("expected a positive integer or `log`, got `{s}`")),
        }
    }
}

impl fmt::Display for PhaseCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseCount::Fixed(k) => write!(f, "{k}"),
            PhaseCount::LogDelta => f.write_str("log"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    Random {
        n: usize,
        m: usize,
        edge_prob: f64,
    },
    Scaling {
        delta: usize,
        n: usize,
    },
    /// Random connected graph for the dominating-set variant; `edge_prob`
    /// is the probability of each edge beyond a random spanning tree.
    Graph {
        n: usize,
        edge_prob: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub source: InstanceSource,
    pub k: Option<PhaseCount>,
    pub c: Option<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let config = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        if self.trials == 0 {
            return config("trials must be at least 1");
        }
        match self.algorithm {
            Algorithm::Beep | Algorithm::Dominating if self.k.is_none() => {
                return config("--k is required for beep and dominating")
            }
            Algorithm::Kt0 if self.c.is_none() => return config("--c is required for kt0"),
            _ => {}
        }
        let graph_source = matches!(self.source, InstanceSource::Graph { .. });
        if (self.algorithm == Algorithm::Dominating) != graph_source {
            return config(
                "dominating runs on generated graphs, every other algorithm on set systems",
            );
        }
        Ok(())
    }
}

/// One trial's outcome. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub solution_size: usize,
    pub opt_or_greedy_size: usize,
    pub ratio: f64,
    pub slots_or_rounds: u64,
    pub beeps: u64,
    pub messages_total: u64,
    pub messages_stage1: u64,
    pub messages_stage2: u64,
    pub max_mu: usize,
    pub mean_mu: f64,
    pub mean_eta: f64,
    pub boundary_max_uncovered: usize,
}

impl ResultRow {
    fn base(seed: u64, solution: &Solution, reference: usize) -> Self {
        ResultRow {
            seed,
            solution_size: solution.size(),
            opt_or_greedy_size: reference,
            ratio: if reference == 0 {
                1.0
            } else {
                baselines::approximation_ratio(solution, reference)
            },
            slots_or_rounds: 0,
            beeps: 0,
            messages_total: 0,
            messages_stage1: 0,
            messages_stage2: 0,
            max_mu: 0,
            mean_mu: 0.0,
            mean_eta: 0.0,
            boundary_max_uncovered: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub row: ResultRow,
    /// Slot transcript (beeping algorithms) or message log (kt0), when requested.
    pub transcript: Option<String>,
}

/// Exact optimum for small instances, greedy otherwise.
pub fn reference_size(inst: &Instance) -> Result<usize, HarnessError> {
    if inst.n_sets() <= EXACT_REFERENCE_MAX_SETS {
        Ok(baselines::exact(inst)?.size())
    } else {
        Ok(baselines::greedy(inst).size())
    }
}

pub fn load_instance(source: &InstanceSource, seed: u64) -> Result<Instance, HarnessError> {
    match *source {
        InstanceSource::File(ref path) => Ok(read_instance(path)?),
        InstanceSource::Random { n, m, edge_prob } => {
            Ok(generate_random(n, m, Density::EdgeProb(edge_prob), seed)?)
        }
        InstanceSource::Scaling { delta, n } => Ok(generate_scaling_family(delta, n, seed)?),
        InstanceSource::Graph { .. } => Err(HarnessError::Config(
            "a graph source does not describe a set system".into(),
        )),
    }
}

fn check_cover(inst: &Instance, sol: &Solution) -> Result<(), HarnessError> {
    let missing = sol.verify(inst)?;
    if missing.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::IncompleteCover(missing.len()))
    }
}

/// Runs a single trial with the given seed, used both for the instance
/// generator and the protocol randomness.
pub fn run_trial(
    cfg: &ExperimentConfig,
    seed: u64,
    transcript: bool,
) -> Result<Trial, HarnessError> {
    cfg.validate()?;
    if let InstanceSource::Graph { n, edge_prob } = cfg.source {
        if !(0.0..=1.0).contains(&edge_prob) || n == 0 {
            return Err(HarnessError::Config(
                "graph needs n >= 1 and edge_prob in [0, 1]".into(),
            ));
        }
        let g = random_connected_graph(n, edge_prob, seed);
        let k = cfg
            .k
            .expect("validated")
            .resolve(crate::instance::Delta::new(g.max_degree() + 1));
        let rep = run_dominating_set(&g, k, seed);
        let inst = crate::beep_and_sleep::closed_neighborhood_instance(&g);
        let mut row = ResultRow::base(seed, &rep.solution, reference_size(&inst)?);
        row.slots_or_rounds = rep.metrics.slots;
        row.beeps = rep.metrics.beeps;
        return Ok(Trial {
            row,
            transcript: None,
        });
    }

    let inst = load_instance(&cfg.source, seed)?;
    let reference = |own: &Solution| -> Result<usize, HarnessError> {
        match cfg.algorithm {
            Algorithm::Exact => Ok(own.size()),
            _ => reference_size(&inst),
        }
    };
    match cfg.algorithm {
        Algorithm::Beep => {
            let k = cfg.k.expect("validated").resolve(inst.delta());
            let rep = run_beep_and_sleep_with(&inst, k, seed, transcript);
            check_cover(&inst, &rep.solution)?;
            let mut row = ResultRow::base(seed, &rep.solution, reference(&rep.solution)?);
            row.slots_or_rounds = rep.metrics.slots;
            row.beeps = rep.metrics.beeps;
            row.max_mu = rep.cover.max_mu();
            row.mean_mu = rep.cover.mean_mu();
            row.mean_eta = rep.cover.mean_eta();
            Ok(Trial {
                row,
                transcript: rep.transcript.map(|t| t.render()),
            })
        }
        Algorithm::Kt0 => {
            let params = Kt0Params::for_instance(&inst, cfg.c.expect("validated"))?;
            let opts = Kt0Options {
                record_log: transcript,
                ..Kt0Options::default()
            };
            let rep = run_kt0_setcover_with(&inst, &params, seed, opts);
            check_cover(&inst, &rep.solution)?;
            let mut row = ResultRow::base(seed, &rep.solution, reference(&rep.solution)?);
            row.slots_or_rounds = rep.rounds;
            row.messages_total = rep.messages.total;
            row.messages_stage1 = rep.messages.stage(STAGE_ONE);
            row.messages_stage2 = rep.messages.stage(STAGE_TWO);
            row.max_mu = rep.cover.max_mu();
            row.mean_mu = rep.cover.mean_mu();
            row.mean_eta = rep.cover.mean_eta();
            row.boundary_max_uncovered = stage_boundary_degrees(&inst, &rep);
            Ok(Trial {
                row,
                transcript: rep.log.as_deref().map(render_message_log),
            })
        }
        Algorithm::Greedy => {
            let sol = baselines::greedy(&inst);
            Ok(Trial {
                row: ResultRow::base(seed, &sol, reference(&sol)?),
                transcript: None,
            })
        }
        Algorithm::Exact => {
            let sol = baselines::exact(&inst)?;
            Ok(Trial {
                row: ResultRow::base(seed, &sol, reference(&sol)?),
                transcript: None,
            })
        }
        Algorithm::Dominating => unreachable!("validated"),
    }
}

/// Trials `base_seed .. base_seed + trials`, run in parallel, sorted by seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let mut rows = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, cfg.base_seed + t, false).map(|trial| trial.row))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| r.seed);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub ratio_mean: f64,
    pub ratio_median: f64,
    pub ratio_max: f64,
    pub messages_mean: f64,
    pub messages_median: f64,
    pub messages_max: f64,
}

impl Aggregate {
    pub fn from_rows(rows: &[ResultRow]) -> Option<Self> {
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let msgs: Vec<f64> = rows.iter().map(|r| r.messages_total as f64).collect();
        Some(Aggregate {
            trials: rows.len(),
            ratio_mean: mean(&ratios)?,
            ratio_median: median(&ratios)?,
            ratio_max: max(&ratios)?,
            messages_mean: mean(&msgs)?,
            messages_median: median(&msgs)?,
            messages_max: max(&msgs)?,
        })
    }

    /// `# aggregate key=value ...`, the trailing line of CSV output.
    pub fn csv_line(&self) -> String {
        format!(
            "# aggregate trials={} ratio_mean={} ratio_median={} ratio_max={} messages_mean={} messages_median={} messages_max={}",
            self.trials,
            self.ratio_mean,
            self.ratio_median,
            self.ratio_max,
            self.messages_mean,
            self.messages_median,
            self.messages_max
        )
    }
}

#[derive(Serialize)]
struct AggregateRecord<'a> {
    aggregate: &'a Aggregate,
}

/// Writes rows and, when given, the aggregate. CSV puts the aggregate on a
/// trailing `#` comment line; JSON lines put it in a final
/// `{"aggregate": ...}` object.
pub fn write_rows<W: Write>(
    out: W,
    rows: &[ResultRow],
    aggregate: Option<&Aggregate>,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            let mut out = w.into_inner().map_err(|e| e.into_error())?;
            if let Some(agg) = aggregate {
                writeln!(out, "{}", agg.csv_line())?;
            }
            out.flush()?;
        }
        OutputFormat::Jsonl => {
            let mut out = out;
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            if let Some(agg) = aggregate {
                serde_json::to_writer(&mut out, &AggregateRecord { aggregate: agg })?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads the rows of CSV output, skipping the aggregate comment.
pub fn read_csv_rows<R: io::Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    Ok(reader
        .deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub delta: usize,
    pub mean_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln cost` against `ln Δ`.
    pub alpha: f64,
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "delta,mean_cost")?;
        for p in &self.points {
            writeln!(f, "{},{}", p.delta, p.mean_cost)?;
        }
        writeln!(f, "alpha={:.4}", self.alpha)
    }
}

/// Mean communication cost per `Δ` on the scaling family with `n` elements
/// and sets: messages for kt0, beeps for beep.
pub fn run_scaling(
    cfg: &ExperimentConfig,
    deltas: &[usize],
    n: usize,
) -> Result<ScalingReport, HarnessError> {
    if !matches!(cfg.algorithm, Algorithm::Kt0 | Algorithm::Beep) {
        return Err(HarnessError::Config("scaling supports kt0 and beep".into()));
    }
    if deltas.len() < 2 {
        return Err(HarnessError::Config(
            "scaling needs at least two values of delta".into(),
        ));
    }
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let point_cfg = ExperimentConfig {
            source: InstanceSource::Scaling { delta, n },
            ..cfg.clone()
        };
        let rows = run_experiment(&point_cfg)?;
        let costs: Vec<f64> = rows
            .iter()
            .map(|r| match cfg.algorithm {
                Algorithm::Kt0 => r.messages_total as f64,
                _ => r.beeps as f64,
            })
            .collect();
        points.push(ScalingPoint {
            delta,
            mean_cost: mean(&costs).expect("trials >= 1"),
        });
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.delta as f64, p.mean_cost))
        .collect();
    let alpha = loglog_slope(&xy)
        .ok_or_else(|| HarnessError::Config("scaling needs distinct delta values".into()))?;
    Ok(ScalingReport { points, alpha })
}
