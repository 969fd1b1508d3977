use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cutleak_cli::pipeline::{self, corpus_path};
use cutleak_cli::telemetry::{parse_telemetry, BUNDLED_FIXTURE};
use cutleak_cli::{exit, CliError, RunConfig, Slicing};
use cutleak_core::transcript::Mask;
use cutleak_eval::{Protocol, Task};
use cutleak_learners::ModelKind;

/// Transcript leakage experiments for cut quantum workloads.
///
/// Exit codes: 0 ok, 1 io, 2 usage, 3 config, 4 parse, 5 evaluation.
#[derive(Parser)]
#[command(name = "cutleak", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Values applied on top of the config file.
#[derive(Args)]
struct Overrides {
    /// JSON run configuration; unspecified fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Parent instances per family.
    #[arg(long, global = true)]
    instances: Option<usize>,
    /// Restrict the grid to one learner.
    #[arg(long, global = true)]
    model: Option<ModelKind>,
    /// Comma-separated task list.
    #[arg(long, global = true, value_delimiter = ',')]
    tasks: Option<Vec<Task>>,
    /// Comma-separated feature masks.
    #[arg(long, global = true, value_delimiter = ',')]
    masks: Option<Vec<Mask>>,
    /// Split protocols: id, sh.
    #[arg(long, global = true, value_delimiter = ',')]
    protocols: Option<Vec<String>>,
    /// Bootstrap resamples per metric.
    #[arg(long, global = true)]
    bootstrap: Option<usize>,
    /// Chebyshev caliper for the matched-footprint control.
    #[arg(long, global = true)]
    caliper: Option<f64>,
    /// Trees per forest.
    #[arg(long, global = true)]
    trees: Option<usize>,
    /// Evaluate each backend separately instead of pooling.
    #[arg(long, global = true)]
    per_backend: bool,
    /// Training-set sizes for the sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    sweep_sizes: Option<Vec<usize>>,
    /// Repetitions per sweep size.
    #[arg(long, global = true)]
    sweep_reps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, cut and compile the corpus; writes corpus.jsonl and routing_tax.csv.
    Corpus,
    /// Run the attack grid on a corpus and write every report.
    Attack {
        /// Defaults to <out>/corpus.jsonl.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Check whether QPU time tracks depth; uses the bundled hardware table by default.
    Telemetry { file: Option<PathBuf> },
    /// Compare corpus width/depth distributions against a reference.
    Align {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Corpus file or CSV with columns family,width,depth.
        #[arg(long)]
        reference: PathBuf,
    },
    /// Macro-AUC against training-set size.
    Sweep {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Print the effective configuration as JSON.
    ShowConfig,
}

fn protocol(s: &str) -> Result<Protocol, CliError> {
    match s {
        "instance_disjoint" | "id" => Ok(Protocol::InstanceDisjoint),
        "size_holdout" | "sh" => Ok(Protocol::SizeHoldout),
        other => Err(CliError::config("protocols", format!("unknown protocol '{other}'"))),
    }
}

fn resolve(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = &o.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = o.instances {
        cfg.corpus.instances_per_family = v;
    }
    if let Some(v) = o.model {
        cfg.model = v;
    }
    if let Some(v) = &o.tasks {
        cfg.tasks = v.clone();
    }
    if let Some(v) = &o.masks {
        cfg.masks = v.clone();
    }
    if let Some(v) = &o.protocols {
        cfg.protocols = v.iter().map(|s| protocol(s)).collect::<Result<_, _>>()?;
    }
    if let Some(v) = o.bootstrap {
        cfg.bootstrap = v;
    }
    if let Some(v) = o.caliper {
        cfg.caliper = v;
    }
    if let Some(v) = o.trees {
        cfg.hyperparams.n_trees = v;
    }
    if o.per_backend {
        cfg.slicing = Slicing::PerBackend;
    }
    if let Some(v) = &o.sweep_sizes {
        cfg.sweep.sizes = v.clone();
    }
    if let Some(v) = o.sweep_reps {
        cfg.sweep.reps = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli.overrides)?;
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Corpus => {
            let c = pipeline::cmd_corpus(&cfg)?;
            writeln!(out, "{} records, {} jobs -> {}", c.corpus.records.len(), c.jobs.len(), cfg.output_dir.display())?;
        }
        Command::Attack { corpus } => {
            for b in pipeline::cmd_attack(&cfg, &corpus_path(&cfg, corpus.as_deref()))? {
                write!(out, "{}", pipeline::summary(&b))?;
            }
        }
        Command::Telemetry { file } => {
            let rows = match &file {
                Some(p) => parse_telemetry(std::fs::File::open(p)?, &p.display().to_string())?,
                None => parse_telemetry(BUNDLED_FIXTURE.as_bytes(), "bundled fixture")?,
            };
            let r = pipeline::cmd_telemetry(&cfg, &rows)?;
            writeln!(
                out,
                "qpu range {:.3} s, depth ratio {:.1}, pearson r {}, timing-blind {}",
                r.qpu_range,
                r.depth_ratio,
                r.pearson_r.map_or("undefined".into(), |v| format!("{v:.3}")),
                r.timing_blind
            )?;
        }
        Command::Align { corpus, reference } => {
            for r in pipeline::cmd_align(&cfg, &corpus_path(&cfg, corpus.as_deref()), &reference)? {
                writeln!(out, "{} w1={:?} ks={:?} skipped={}", r.metric, r.w1, r.ks, r.skipped)?;
            }
        }
        Command::Sweep { corpus } => {
            let points = pipeline::cmd_sweep(&cfg, &corpus_path(&cfg, corpus.as_deref()))?;
            writeln!(out, "{} sweep points -> {}", points.len(), cfg.output_dir.join("sweep.csv").display())?;
        }
        Command::ShowConfig => {
            writeln!(out, "{}", serde_json::to_string_pretty(&cfg).expect("config serialises"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed stdout (e.g. piped into head) is not an error
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
