use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use beepcover::harness::{
    run_experiment, run_scaling, run_trial, Aggregate, Algorithm, ExperimentConfig, HarnessError,
    InstanceSource, OutputFormat, PhaseCount,
};
use beepcover::instance::render_instance;
use beepcover::kt0_setcover::Kt0Params;

#[derive(Parser)]
#[command(name = "beepcover", version, about = "Distributed SetCover simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm once and print its result row.
    Run {
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the slot transcript or message log here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sequential greedy cover.
    Greedy {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact minimum cover (small instances only).
    Exact {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded batch of trials plus an aggregate line.
    Experiment {
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit the exponent of communication cost against Δ on the scaling family.
    Scaling {
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        deltas: Vec<usize>,
        /// Elements (and sets) per instance.
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct AlgoArgs {
    #[arg(long, value_enum)]
    algo: Algorithm,
    /// Phase count, or `log` for ⌈log₂ Δ⌉.
    #[arg(long)]
    k: Option<PhaseCount>,
    #[arg(long, default_value_t = Kt0Params::DEFAULT_C)]
    c: f64,
}

#[derive(Args, Clone)]
struct SourceArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Use the Δ-regular scaling family instead of independent edges.
    #[arg(long)]
    delta: Option<usize>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

fn missing(flag: &str) -> HarnessError {
    HarnessError::Config(format!("{flag} is required"))
}

impl SourceArgs {
    fn resolve(&self, algorithm: Algorithm) -> Result<InstanceSource, HarnessError> {
        if let Some(path) = &self.input {
            return Ok(InstanceSource::File(path.clone()));
        }
        let n = self.n.ok_or_else(|| missing("--n (or --in)"))?;
        if algorithm == Algorithm::Dominating {
            return Ok(InstanceSource::Graph {
                n,
                edge_prob: self.edge_prob.unwrap_or(0.1),
            });
        }
        if let Some(delta) = self.delta {
            return Ok(InstanceSource::Scaling { delta, n });
        }
        Ok(InstanceSource::Random {
            n,
            m: self.m.ok_or_else(|| missing("--m"))?,
            edge_prob: self.edge_prob.ok_or_else(|| missing("--edge-prob"))?,
        })
    }
}

fn config(
    algorithm: Algorithm,
    algo: Option<&AlgoArgs>,
    source: InstanceSource,
    trials: usize,
    base_seed: u64,
    output: Option<&OutputArgs>,
) -> ExperimentConfig {
    ExperimentConfig {
        algorithm,
        source,
        k: algo.and_then(|a| a.k),
        c: Some(algo.map_or(Kt0Params::DEFAULT_C, |a| a.c)),
        trials,
        base_seed,
        output: output.and_then(|o| o.out.clone()),
        format: output.map_or(OutputFormat::Csv, |o| o.format),
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn single_run(
    cfg: &ExperimentConfig,
    seed: u64,
    transcript: Option<&PathBuf>,
) -> Result<(), HarnessError> {
    let trial = run_trial(cfg, seed, transcript.is_some())?;
    if let Some(path) = transcript {
        std::fs::write(path, trial.transcript.unwrap_or_default())?;
    }
    let out = open_output(cfg.output.as_ref())?;
    beepcover::harness::write_rows(out, &[trial.row], None, cfg.format)
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Gen { source, seed, out } => {
            let src = source.resolve(Algorithm::Greedy)?;
            if matches!(src, InstanceSource::File(_)) {
                return Err(HarnessError::Config(
                    "gen needs generator flags, not --in".into(),
                ));
            }
            let inst = beepcover::harness::load_instance(&src, seed)?;
            let mut w = open_output(out.as_ref())?;
            w.write_all(render_instance(&inst).as_bytes())?;
            w.flush()?;
            Ok(())
        }
        Command::Run {
            algo,
            source,
            seed,
            transcript,
            output,
        } => {
            let cfg = config(
                algo.algo,
                Some(&algo),
                source.resolve(algo.algo)?,
                1,
                seed,
                Some(&output),
            );
            single_run(&cfg, seed, transcript.as_ref())
        }
        Command::Greedy {
            source,
            seed,
            output,
        } => {
            let cfg = config(
                Algorithm::Greedy,
                None,
                source.resolve(Algorithm::Greedy)?,
                1,
                seed,
                Some(&output),
            );
            single_run(&cfg, seed, None)
        }
        Command::Exact {
            source,
            seed,
            output,
        } => {
            let cfg = config(
                Algorithm::Exact,
                None,
                source.resolve(Algorithm::Exact)?,
                1,
                seed,
                Some(&output),
            );
            single_run(&cfg, seed, None)
        }
        Command::Experiment {
            algo,
            source,
            trials,
            base_seed,
            output,
        } => {
            let cfg = config(
                algo.algo,
                Some(&algo),
                source.resolve(algo.algo)?,
                trials,
                base_seed,
                Some(&output),
            );
            let rows = run_experiment(&cfg)?;
            let agg = Aggregate::from_rows(&rows);
            let out = open_output(cfg.output.as_ref())?;
            beepcover::harness::write_rows(out, &rows, agg.as_ref(), cfg.format)
        }
        Command::Scaling {
            algo,
            deltas,
            n,
            trials,
            base_seed,
            out,
        } => {
            let cfg = config(
                algo.algo,
                Some(&algo),
                InstanceSource::Scaling { delta: 1, n },
                trials,
                base_seed,
                None,
            );
            let report = run_scaling(&cfg, &deltas, n)?;
            let mut w = open_output(out.as_ref())?;
            write!(w, "{report}")?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
