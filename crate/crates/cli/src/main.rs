use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selfpace::config::{GridSpec, Mode, RunConfig};
use selfpace::corpus::{self, SynthConfig};
use selfpace::eval::HistogramFilter;
use selfpace::harness::{self, Checkpoint, TrainOptions};
use selfpace::{Error, Result};

// Output errors (e.g. a closed pipe) are ignored rather than panicking.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! emit {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "selfpace",
    version,
    about = "Self-paced curriculum training for code classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic noisy corpus with splits and a clean-label sidecar.
    GenSynthetic {
        #[command(flatten)]
        common: ConfigArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one run and write checkpoint, trace and test report.
    Train {
        #[command(flatten)]
        common: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Stop after this many epochs in this invocation.
        #[arg(long)]
        halt_after: Option<u64>,
    },
    /// Evaluate a checkpoint on one split, with a threshold sweep.
    Evaluate {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "test")]
        split: SplitName,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated thresholds, e.g. 0.1,0.5,0.9.
        #[arg(long, value_delimiter = ',')]
        tau_grid: Option<Vec<f64>>,
    },
    /// Paired SPL vs NO-SPL runs over several seeds.
    Ablation {
        #[command(flatten)]
        common: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated seeds; defaults to ten seeds starting at --seed (or 0).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Train one run per grid point and pick the best validation F1.
    GridSearch {
        #[command(flatten)]
        common: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Grid file with an [axes] table; the default five-axis grid otherwise.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Difficulty histogram and hardest samples under a checkpoint.
    InspectDifficulty {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "train")]
        split: SplitName,
        #[arg(long, default_value = "all")]
        filter: FilterArg,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config; SELFPACE_<SECTION>__<KEY> variables override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// Corpus directory holding train/validation/test JSONL files.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Spl,
    NoSpl,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitName {
    Train,
    Validation,
    Test,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    All,
    Positives,
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::from_toml_with_env("", std::env::vars())?,
    };
    Ok(cfg)
}

fn run_config(common: &ConfigArgs, run: &RunArgs) -> Result<RunConfig> {
    let mut cfg = load_config(common)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(m) = run.mode {
        cfg.mode = match m {
            ModeArg::Spl => Mode::Spl,
            ModeArg::NoSpl => Mode::NoSpl,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn split_samples(dir: &Path, split: SplitName) -> Result<Vec<selfpace::Sample>> {
    let name = match split {
        SplitName::Train => harness::SPLIT_FILES[0],
        SplitName::Validation => harness::SPLIT_FILES[1],
        SplitName::Test => harness::SPLIT_FILES[2],
    };
    let path = dir.join(name);
    if !path.exists() {
        return Err(Error::Data(format!(
            "missing split file {}",
            path.display()
        )));
    }
    corpus::load_jsonl(&path)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenSynthetic { common, out } => {
            let cfg = load_config(&common)?;
            let mut synth = cfg.synth.unwrap_or_else(SynthConfig::default);
            if let Some(s) = common.seed {
                synth.seed = s;
            }
            let manifest = harness::gen_synthetic(&synth, &out)?;
            say!(
                "wrote {} samples to {} (manifest {})",
                synth.n_samples,
                out.display(),
                manifest.digest
            );
        }
        Command::Train {
            common,
            run,
            resume,
            halt_after,
        } => {
            let cfg = run_config(&common, &run)?;
            let splits = harness::load_splits(&run.corpus)?;
            let resume = resume.as_deref().map(Checkpoint::load).transpose()?;
            let outcome = harness::train_run(
                &cfg,
                &splits,
                TrainOptions {
                    resume,
                    halt_after,
                    out_dir: Some(run.out.clone()),
                },
            )?;
            let st = &outcome.checkpoint.state;
            match &outcome.report {
                Some(r) => say!(
                    "epochs {} best {:?} test f1 {:.4} mcc {:.4} (manifest {})",
                    st.epoch,
                    st.stopper.best_epoch,
                    r.metrics.f1,
                    r.metrics.mcc,
                    outcome.manifest.digest
                ),
                None => say!(
                    "halted after epoch {}; resume with --resume {}",
                    st.epoch,
                    run.out.join(harness::CHECKPOINT_FILE).display()
                ),
            }
        }
        Command::Evaluate {
            common,
            checkpoint,
            corpus,
            split,
            out,
            tau_grid,
        } => {
            let cfg = load_config(&common)?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            let samples = split_samples(&corpus, split)?;
            let mut eval_cfg = cfg.eval.clone();
            if let Some(g) = tau_grid {
                eval_cfg.tau_grid = g;
            }
            let featurizer = common.config.as_ref().map(|_| &cfg.featurizer);
            let report = harness::evaluate_checkpoint(
                &ckpt,
                &samples,
                &eval_cfg,
                featurizer,
                split_label(split),
                out.as_deref(),
            )?;
            say!("{}", to_json(&report.metrics)?);
        }
        Command::Ablation {
            common,
            run,
            seeds,
            jobs,
        } => {
            let cfg = run_config(&common, &run)?;
            let seeds =
                seeds.unwrap_or_else(|| (0..10).map(|i| common.seed.unwrap_or(0) + i).collect());
            let splits = harness::load_splits(&run.corpus)?;
            let report = harness::ablation(&cfg, &splits, &seeds, jobs)?;
            let csv = harness::ablation_csv(&report);
            harness::write_report_pair(&run.out, "ablation", &report.config_digest, &report, &csv)?;
            emit!("{csv}");
            say!(
                "median delta f1 {:+.4}, mean {:+.4}",
                report.median_delta_f1,
                report.mean_delta_f1
            );
        }
        Command::GridSearch {
            common,
            run,
            grid,
            jobs,
        } => {
            let cfg = run_config(&common, &run)?;
            let grid = match grid {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    GridSpec::from_toml_str(&text)?
                }
                None => GridSpec::default(),
            };
            let splits = harness::load_splits(&run.corpus)?;
            let report = harness::grid_search(&grid, &cfg, &splits, jobs)?;
            let csv = harness::grid_csv(&report);
            harness::write_report_pair(&run.out, "grid", &report.config_digest, &report, &csv)?;
            say!("{}", to_json(&report.best)?);
        }
        Command::InspectDifficulty {
            common,
            checkpoint,
            corpus,
            split,
            filter,
            bins,
            out,
        } => {
            let cfg = load_config(&common)?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            let samples = split_samples(&corpus, split)?;
            let filter = match filter {
                FilterArg::All => HistogramFilter::All,
                FilterArg::Positives => HistogramFilter::PositivesOnly,
            };
            let featurizer = common.config.as_ref().map(|_| &cfg.featurizer);
            let report = harness::inspect_difficulty(&ckpt, &samples, filter, bins, featurizer)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                harness::write_json_file(&dir.join("difficulty.json"), &report)?;
            }
            say!("{}", to_json(&report)?);
        }
    }
    Ok(())
}

fn split_label(s: SplitName) -> &'static str {
    match s {
        SplitName::Train => "train",
        SplitName::Validation => "validation",
        SplitName::Test => "test",
    }
}

fn exit_code(category: &str) -> u8 {
    match category {
        "config" => 3,
        "io" => 4,
        "data" => 5,
        "mismatch" => 6,
        "training" => 7,
        _ => 8,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(e.category()))
        }
    }
}
