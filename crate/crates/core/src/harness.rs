//! End-to-end workflows behind the CLI: corpus generation, training with
//! checkpoints, evaluation, ablation, grid search and difficulty inspection.
//!
//! Every file written here embeds (JSON) or is prefixed by (`# manifest ...`
//! comment line, CSV) the digest of the run manifest that produced it.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{self, digest_bytes, GridSpec, Mode, RunConfig};
use crate::corpus::{self, CleanLabel, Splits, SynthConfig};
use crate::difficulty;
use crate::error::{Error, Result};
use crate::eval::{self, Histogram, HistogramFilter, MetricReport, SweepRow, TopNReport};
use crate::features::FeaturizerConfig;
use crate::model::{ModelSpec, ReferenceModel};
use crate::trainer::{self, EncodedSet, EpochReport, TrainSettings, Trainer, TrainerState};
use crate::types::{AgeState, DifficultyRecord, Sample};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CLEAN_LABELS_FILE: &str = "clean_labels.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPLIT_FILES: [&str; 3] = ["train.jsonl", "validation.jsonl", "test.jsonl"];
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const CHECKPOINT_FORMAT: &str = "selfpace-checkpoint/1";

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: e.line(),
        reason: e.to_string(),
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn with_manifest_comment(digest: &str, csv: &str) -> String {
    format!("# manifest {digest}\n{csv}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub kind: String,
    pub digest: String,
    pub config: SynthConfig,
    pub seed: u64,
    pub content_digest: String,
    pub clean_labels_digest: String,
    pub split_sizes: [usize; 3],
    pub hash_note: String,
}

/// Generates a synthetic corpus and its splits into `out_dir`.
pub fn gen_synthetic(config: &SynthConfig, out_dir: &Path) -> Result<CorpusManifest> {
    let corpus = corpus::generate(config)?;
    ensure_dir(out_dir)?;
    let corpus_path = out_dir.join(CORPUS_FILE);
    corpus::write_jsonl(&corpus_path, &corpus.samples)?;
    let labels_path = out_dir.join(CLEAN_LABELS_FILE);
    corpus::write_jsonl(&labels_path, &corpus.truth)?;
    let splits = corpus::split(&corpus.samples, config.split, config.seed)?;
    for (name, part) in SPLIT_FILES
        .iter()
        .zip([&splits.train, &splits.validation, &splits.test])
    {
        corpus::write_jsonl(&out_dir.join(name), part)?;
    }
    let read = |p: &Path| std::fs::read(p).map_err(|e| Error::io(p, e));
    let manifest = CorpusManifest {
        kind: "synthetic-corpus".into(),
        digest: config::digest_json(config),
        config: config.clone(),
        seed: config.seed,
        content_digest: digest_bytes(&read(&corpus_path)?),
        clean_labels_digest: digest_bytes(&read(&labels_path)?),
        split_sizes: [
            splits.train.len(),
            splits.validation.len(),
            splits.test.len(),
        ],
        hash_note: "sha256".into(),
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn load_splits(corpus_dir: &Path) -> Result<Splits> {
    let mut parts = Vec::with_capacity(3);
    for name in SPLIT_FILES {
        let p = corpus_dir.join(name);
        if !p.exists() {
            return Err(Error::Data(format!("missing split file {}", p.display())));
        }
        parts.push(corpus::load_jsonl(&p)?);
    }
    let test = parts.pop().unwrap_or_default();
    let validation = parts.pop().unwrap_or_default();
    let train = parts.pop().unwrap_or_default();
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Data(
            "train and validation splits must be non-empty".into(),
        ));
    }
    Ok(Splits {
        train,
        validation,
        test,
    })
}

/// Digest of the split files' ids and labels, used to bind runs to corpora.
pub fn splits_digest(splits: &Splits) -> String {
    let mut buf = Vec::new();
    for part in [&splits.train, &splits.validation, &splits.test] {
        for s in part {
            buf.extend_from_slice(s.id.as_bytes());
            buf.push(0x1f);
            buf.extend_from_slice(s.code.as_bytes());
            buf.push(0x1f);
            buf.push(s.label);
            buf.push(b'\n');
        }
        buf.push(0x1e);
    }
    digest_bytes(&buf)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub digest: String,
    pub config_digest: String,
    pub corpus_digest: String,
    pub seed: u64,
    pub mode: Mode,
}

impl RunManifest {
    pub fn new(config: &RunConfig, splits: &Splits) -> Self {
        let config_digest = config.digest();
        let corpus_digest = splits_digest(splits);
        RunManifest {
            digest: digest_bytes(format!("{config_digest}:{corpus_digest}").as_bytes()),
            config_digest,
            corpus_digest,
            seed: config.seed,
            mode: config.mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub manifest: RunManifest,
    pub featurizer: FeaturizerConfig,
    pub state: TrainerState,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let c: Checkpoint = read_json(path)?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(Error::Data(format!(
                "{}: unsupported checkpoint format {:?}",
                path.display(),
                c.format
            )));
        }
        Ok(c)
    }

    /// The best-validation-loss model.
    pub fn best_model(&self) -> Result<ReferenceModel> {
        self.state
            .model
            .from_params(self.state.input_dim, self.state.best_params.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub manifest_digest: String,
    pub split: String,
    pub samples: usize,
    pub threshold: f64,
    pub metrics: MetricReport,
    pub top_n: Vec<TopNEntry>,
    pub sweep: Vec<SweepRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopNEntry {
    pub n: usize,
    /// Absent when `n` exceeds the number of evaluated samples.
    pub report: Option<TopNReport>,
}

pub fn evaluate_model(
    model: &ReferenceModel,
    featurizer: &FeaturizerConfig,
    samples: &[Sample],
    eval_cfg: &eval::EvalConfig,
    manifest_digest: &str,
    split: &str,
) -> Result<EvaluationReport> {
    eval_cfg.validate()?;
    let set = EncodedSet::encode(samples, featurizer);
    let p: Vec<f64> = trainer::predict_all(model, &set)?
        .iter()
        .map(|p| p.p_vul)
        .collect();
    let metrics = eval::metrics(eval::confusion(&p, &set.labels, eval_cfg.threshold)?)?;
    let top_n = eval_cfg
        .top_n
        .iter()
        .map(|&n| {
            let report = if n <= set.len() {
                Some(eval::top_n_f1(&p, &set.labels, &set.ids, n)?)
            } else {
                None
            };
            Ok(TopNEntry { n, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let sweep = eval::threshold_sweep(&p, &set.labels, &eval_cfg.tau_grid)?;
    Ok(EvaluationReport {
        manifest_digest: manifest_digest.to_owned(),
        split: split.to_owned(),
        samples: set.len(),
        threshold: eval_cfg.threshold,
        metrics,
        top_n,
        sweep,
    })
}

pub struct TrainOutcome {
    pub manifest: RunManifest,
    pub checkpoint: Checkpoint,
    /// Test-split report; present once training has finished.
    pub report: Option<EvaluationReport>,
    pub validation_f1: Option<f64>,
}

/// Options for [`train_run`] beyond the config itself.
#[derive(Default)]
pub struct TrainOptions {
    pub resume: Option<Checkpoint>,
    /// Stop after this many epochs in this invocation (the checkpoint can resume).
    pub halt_after: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

pub fn train_run(config: &RunConfig, splits: &Splits, opts: TrainOptions) -> Result<TrainOutcome> {
    config.validate()?;
    let manifest = RunManifest::new(config, splits);
    let train_set = EncodedSet::encode(&splits.train, &config.featurizer);
    let val_set = EncodedSet::encode(&splits.validation, &config.featurizer);
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Data(
            "train and validation splits must be non-empty".into(),
        ));
    }
    let mut trainer = match opts.resume {
        Some(ckpt) => {
            if ckpt.manifest.digest != manifest.digest {
                return Err(Error::Data(format!(
                    "checkpoint manifest {} does not match run manifest {}",
                    ckpt.manifest.digest, manifest.digest
                )));
            }
            Trainer::from_state(ckpt.state)?
        }
        None => Trainer::new(
            config.model,
            config.featurizer.dimension,
            TrainSettings {
                mode: config.mode,
                selector: config.selector,
                training: config.training,
            },
            config.seed,
        )?,
    };
    trainer.run(&train_set, &val_set, opts.halt_after)?;

    let checkpoint = Checkpoint {
        format: CHECKPOINT_FORMAT.into(),
        manifest: manifest.clone(),
        featurizer: config.featurizer.clone(),
        state: trainer.snapshot(),
    };

    let (report, validation_f1) = if trainer.is_finished() {
        let best = trainer.best_model()?;
        let val = evaluate_model(
            &best,
            &config.featurizer,
            &splits.validation,
            &config.eval,
            &manifest.digest,
            "validation",
        )?;
        let report = if splits.test.is_empty() {
            None
        } else {
            Some(evaluate_model(
                &best,
                &config.featurizer,
                &splits.test,
                &config.eval,
                &manifest.digest,
                "test",
            )?)
        };
        (report, Some(val.metrics.f1))
    } else {
        (None, None)
    };

    if let Some(dir) = &opts.out_dir {
        ensure_dir(dir)?;
        checkpoint.save(&dir.join(CHECKPOINT_FILE))?;
        write_json(&dir.join("run_manifest.json"), &manifest)?;
        write_file(
            &dir.join("trace.csv"),
            with_manifest_comment(
                &manifest.digest,
                &trainer::trace_csv(&checkpoint.state.reports),
            )
            .as_bytes(),
        )?;
        if let Some(r) = &report {
            write_json(&dir.join("report.json"), r)?;
        }
    }

    Ok(TrainOutcome {
        manifest,
        checkpoint,
        report,
        validation_f1,
    })
}

fn check_featurizer(ckpt: &Checkpoint, expected: Option<&FeaturizerConfig>) -> Result<()> {
    if let Some(f) = expected {
        if f.dimension != ckpt.featurizer.dimension {
            return Err(Error::DimensionMismatch {
                expected: ckpt.featurizer.dimension,
                got: f.dimension,
            });
        }
    }
    if ckpt.featurizer.dimension != ckpt.state.input_dim {
        return Err(Error::DimensionMismatch {
            expected: ckpt.state.input_dim,
            got: ckpt.featurizer.dimension,
        });
    }
    Ok(())
}

/// Evaluates a checkpoint's best model, writing `report.json` and `sweep.csv`
/// when `out_dir` is given.
pub fn evaluate_checkpoint(
    ckpt: &Checkpoint,
    samples: &[Sample],
    eval_cfg: &eval::EvalConfig,
    featurizer: Option<&FeaturizerConfig>,
    split: &str,
    out_dir: Option<&Path>,
) -> Result<EvaluationReport> {
    check_featurizer(ckpt, featurizer)?;
    let model = ckpt.best_model()?;
    let report = evaluate_model(
        &model,
        &ckpt.featurizer,
        samples,
        eval_cfg,
        &ckpt.manifest.digest,
        split,
    )?;
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_json(&dir.join("evaluation.json"), &report)?;
        write_file(
            &dir.join("sweep.csv"),
            with_manifest_comment(&report.manifest_digest, &eval::sweep_csv(&report.sweep))
                .as_bytes(),
        )?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardSample {
    pub id: String,
    pub label: u8,
    pub difficulty: f64,
    pub conf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InspectReport {
    pub manifest_digest: String,
    pub filter: HistogramFilter,
    pub histogram: Histogram,
    pub hardest: Vec<HardSample>,
    pub final_lambda: Option<f64>,
    pub final_age: Option<AgeState>,
}

/// Difficulty records of `samples` under a model, in input order.
pub fn score_difficulties(
    model: &ReferenceModel,
    featurizer: &FeaturizerConfig,
    samples: &[Sample],
) -> Result<Vec<DifficultyRecord>> {
    let set = EncodedSet::encode(samples, featurizer);
    let preds = trainer::predict_all(model, &set)?;
    difficulty::difficulty_batch(&set.ids, &preds, &set.labels)
}

/// Indices of the `k` hardest records, hardest first, ties by id.
pub fn hardest(records: &[DifficultyRecord], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.sort_by(|&a, &b| {
        records[b]
            .difficulty
            .total_cmp(&records[a].difficulty)
            .then_with(|| records[a].sample_id.cmp(&records[b].sample_id))
    });
    idx.truncate(k);
    idx
}

pub fn inspect_difficulty(
    ckpt: &Checkpoint,
    samples: &[Sample],
    filter: HistogramFilter,
    bins: usize,
    featurizer: Option<&FeaturizerConfig>,
) -> Result<InspectReport> {
    check_featurizer(ckpt, featurizer)?;
    let model = ckpt.best_model()?;
    let records = score_difficulties(&model, &ckpt.featurizer, samples)?;
    let histogram = eval::difficulty_histogram(&records, bins, filter)?;
    let pool: Vec<DifficultyRecord> = match filter {
        HistogramFilter::All => records,
        HistogramFilter::PositivesOnly => records.into_iter().filter(|r| r.label == 1).collect(),
    };
    let hardest = hardest(&pool, 10)
        .into_iter()
        .map(|i| HardSample {
            id: pool[i].sample_id.clone(),
            label: pool[i].label,
            difficulty: pool[i].difficulty,
            conf: pool[i].conf,
        })
        .collect();
    Ok(InspectReport {
        manifest_digest: ckpt.manifest.digest.clone(),
        filter,
        histogram,
        hardest,
        final_lambda: ckpt.state.age.map(|a| a.lambda),
        final_age: ckpt.state.age,
    })
}

/// Share of planted mislabels in the hardest `fraction` of `records`, divided
/// by their share overall.
pub fn mislabel_enrichment(
    records: &[DifficultyRecord],
    truth: &[CleanLabel],
    fraction: f64,
) -> Result<f64> {
    let by_id: std::collections::HashMap<&str, &CleanLabel> =
        truth.iter().map(|t| (t.id.as_str(), t)).collect();
    let flags = records
        .iter()
        .map(|r| {
            by_id
                .get(r.sample_id.as_str())
                .map(|t| t.is_mislabeled(r.label))
                .ok_or_else(|| Error::Data(format!("no clean label for {}", r.sample_id)))
        })
        .collect::<Result<Vec<bool>>>()?;
    let base = flags.iter().filter(|&&f| f).count() as f64 / flags.len().max(1) as f64;
    if base == 0.0 {
        return Err(Error::Data("no planted mislabels in the scored set".into()));
    }
    let k = ((records.len() as f64 * fraction).ceil() as usize).max(1);
    let top = hardest(records, k);
    let top_rate = top.iter().filter(|&&i| flags[i]).count() as f64 / k as f64;
    Ok(top_rate / base)
}

fn run_pool<T: Send, F>(jobs: usize, f: F) -> Result<T>
where
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Training(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub f1: f64,
    pub validation_f1: f64,
    pub top_n: Vec<TopNEntry>,
    pub epochs_run: u64,
    pub best_epoch: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub spl: ArmResult,
    pub no_spl: ArmResult,
    pub delta_f1: f64,
    /// `(n, SPL - NO-SPL)` for every `n` both arms could score.
    pub delta_top_n: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub config_digest: String,
    pub corpus_digest: String,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedComparison>,
    pub median_delta_f1: f64,
    pub mean_delta_f1: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let s = crate::stats::sorted(values);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn arm(config: &RunConfig, splits: &Splits, mode: Mode, seed: u64) -> Result<ArmResult> {
    let mut c = config.clone();
    c.mode = mode;
    c.seed = seed;
    let out = train_run(&c, splits, TrainOptions::default())?;
    let report = out
        .report
        .ok_or_else(|| Error::Data("ablation needs a non-empty test split".into()))?;
    let st = &out.checkpoint.state;
    Ok(ArmResult {
        f1: report.metrics.f1,
        validation_f1: out.validation_f1.unwrap_or(f64::NAN),
        top_n: report.top_n,
        epochs_run: st.epoch,
        best_epoch: st.stopper.best_epoch.unwrap_or(0),
    })
}

/// Paired SPL / NO-SPL runs, one pair per seed.
pub fn ablation(
    config: &RunConfig,
    splits: &Splits,
    seeds: &[u64],
    jobs: usize,
) -> Result<AblationReport> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "at least one seed is required"));
    }
    config.validate()?;
    let tasks: Vec<(u64, Mode)> = seeds
        .iter()
        .flat_map(|&s| [(s, Mode::Spl), (s, Mode::NoSpl)])
        .collect();
    let results: Vec<Result<ArmResult>> = run_pool(jobs, || {
        tasks
            .par_iter()
            .map(|&(seed, mode)| arm(config, splits, mode, seed))
            .collect()
    })?;
    let mut results = results.into_iter();
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let spl = results.next().expect("paired result")?;
        let no_spl = results.next().expect("paired result")?;
        let delta_top_n = spl
            .top_n
            .iter()
            .zip(&no_spl.top_n)
            .filter_map(|(a, b)| match (&a.report, &b.report) {
                (Some(x), Some(y)) => Some((a.n, x.f1 - y.f1)),
                _ => None,
            })
            .collect();
        runs.push(SeedComparison {
            seed,
            delta_f1: spl.f1 - no_spl.f1,
            spl,
            no_spl,
            delta_top_n,
        });
    }
    let deltas: Vec<f64> = runs.iter().map(|r| r.delta_f1).collect();
    Ok(AblationReport {
        config_digest: config.digest(),
        corpus_digest: splits_digest(splits),
        seeds: seeds.to_vec(),
        median_delta_f1: median(&deltas),
        mean_delta_f1: deltas.iter().sum::<f64>() / deltas.len() as f64,
        runs,
    })
}

pub fn ablation_csv(report: &AblationReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("seed,f1_spl,f1_no_spl,delta_f1,epochs_spl,epochs_no_spl\n");
    for r in &report.runs {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{},{}",
            r.seed, r.spl.f1, r.no_spl.f1, r.delta_f1, r.spl.epochs_run, r.no_spl.epochs_run
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPointResult {
    pub index: usize,
    pub point: Vec<(String, f64)>,
    pub validation_f1: f64,
    pub test_f1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub config_digest: String,
    pub corpus_digest: String,
    pub best: GridPointResult,
    pub results: Vec<GridPointResult>,
}

/// Trains one run per grid point; the best validation F1 wins and the
/// lexicographically first point wins ties.
pub fn grid_search(
    grid: &GridSpec,
    config: &RunConfig,
    splits: &Splits,
    jobs: usize,
) -> Result<GridReport> {
    config.validate()?;
    grid.validate(&config.selector)?;
    let points = grid.points();
    let results: Vec<Result<GridPointResult>> = run_pool(jobs, || {
        points
            .par_iter()
            .enumerate()
            .map(|(index, point)| {
                let mut c = config.clone();
                for (name, v) in point {
                    config::set_selector_field(&mut c.selector, name, *v)?;
                }
                let out = train_run(&c, splits, TrainOptions::default())?;
                Ok(GridPointResult {
                    index,
                    point: point.clone(),
                    validation_f1: out.validation_f1.unwrap_or(f64::NAN),
                    test_f1: out.report.map(|r| r.metrics.f1),
                })
            })
            .collect()
    })?;
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let best = results
        .iter()
        .fold(None::<&GridPointResult>, |best, r| match best {
            Some(b) if !(r.validation_f1 > b.validation_f1) => Some(b),
            _ => Some(r),
        })
        .cloned()
        .ok_or_else(|| Error::config("grid.axes", "must not be empty"))?;
    Ok(GridReport {
        config_digest: config.digest(),
        corpus_digest: splits_digest(splits),
        best,
        results,
    })
}

pub fn grid_csv(report: &GridReport) -> String {
    use std::fmt::Write as _;
    let names: Vec<&str> = report
        .results
        .first()
        .map(|r| r.point.iter().map(|(n, _)| n.as_str()).collect())
        .unwrap_or_default();
    let mut out = String::from("point,");
    for n in &names {
        out.push_str(n);
        out.push(',');
    }
    out.push_str("validation_f1,test_f1\n");
    for r in &report.results {
        let _ = write!(out, "{},", r.index);
        for (_, v) in &r.point {
            let _ = write!(out, "{v},");
        }
        let test = r.test_f1.map(|t| format!("{t:.6}")).unwrap_or_default();
        let _ = writeln!(out, "{:.6},{}", r.validation_f1, test);
    }
    out
}

/// Writes a JSON report and a CSV with the manifest comment line.
pub fn write_report_pair<T: Serialize>(
    dir: &Path,
    stem: &str,
    digest: &str,
    json: &T,
    csv: &str,
) -> Result<()> {
    ensure_dir(dir)?;
    write_json(&dir.join(format!("{stem}.json")), json)?;
    write_file(
        &dir.join(format!("{stem}.csv")),
        with_manifest_comment(digest, csv).as_bytes(),
    )
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

/// Per-epoch trace rows of a checkpoint.
pub fn checkpoint_trace(ckpt: &Checkpoint) -> &[EpochReport] {
    &ckpt.state.reports
}

pub fn model_spec_of(ckpt: &Checkpoint) -> ModelSpec {
    ckpt.state.model
}
