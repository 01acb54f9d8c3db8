//! Acceptance criteria for the engine. Each check returns a [`Check`] with a
//! verdict and the measured numbers; the `acceptance` test target runs them
//! all and prints one PASS/FAIL line per criterion.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfpace::config::{Mode, RunConfig};
use selfpace::corpus::{self, Splits, SynthConfig};
use selfpace::eval::{self, ConfusionCounts};
use selfpace::features::FeatureVector;
use selfpace::harness::{self, Checkpoint, TrainOptions};
use selfpace::model::{LinearModel, MlpModel, ModelSpec, ProbabilityModel};
use selfpace::optim::{bce_loss, AdamWConfig, OptimizerState};
use selfpace::scheduler::{self, UpdateInputs};
use selfpace::stats;
use selfpace::trainer::{EncodedSet, TrainSettings, Trainer};
use selfpace::{difficulty, AgeState, Prediction, Result, Sample, SelectorConfig};

pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: String) -> Self {
        Check { pass, detail }
    }
}

pub type Criterion = (&'static str, fn() -> Result<Check>);

pub fn criteria() -> Vec<Criterion> {
    vec![
        ("difficulty oracle", difficulty_oracle),
        ("threshold cap", threshold_cap),
        ("monotone age", monotone_age),
        ("adamw oracle", adamw_oracle),
        ("gradient check", gradient_check),
        ("metrics oracle", metrics_oracle),
        ("no-spl equivalence", no_spl_equivalence),
        ("ablation direction", ablation_direction),
        ("hard-sample enrichment", hard_sample_enrichment),
        ("sweep monotonicity", sweep_monotonicity),
        ("determinism", determinism),
    ]
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (
        t < limit,
        format!("{:.2}s (limit {}s)", t.as_secs_f64(), limit.as_secs()),
    )
}

/// Noisy acceptance corpus: 5000 samples, 30% positive, 20% flipped labels,
/// 10% unrelated edits.
pub fn noisy_corpus() -> SynthConfig {
    SynthConfig {
        n_samples: 5000,
        positive_ratio: 0.3,
        label_noise_rate: 0.2,
        unrelated_noise_rate: 0.1,
        seed: 42,
        ..SynthConfig::default()
    }
}

/// Training setup used by the corpus-level criteria.
pub fn acceptance_config(mode: Mode) -> RunConfig {
    let mut c = RunConfig {
        mode,
        model: ModelSpec::Linear,
        ..RunConfig::default()
    };
    c.training.learning_rate = 1e-3;
    c
}

fn materialize(cfg: &SynthConfig, dir: &Path) -> Result<(Splits, Vec<corpus::CleanLabel>)> {
    harness::gen_synthetic(cfg, dir)?;
    let splits = harness::load_splits(dir)?;
    let truth = corpus::load_clean_labels(&dir.join(harness::CLEAN_LABELS_FILE))?;
    Ok((splits, truth))
}

fn tempdir() -> Result<tempfile::TempDir> {
    tempfile::tempdir().map_err(|e| selfpace::Error::io(Path::new("tempdir"), e))
}

fn direct_difficulty(p_vul: f64, y: u8) -> f64 {
    let p_safe = 1.0 - p_vul;
    let predicted = if p_vul >= p_safe { 1 } else { 0 };
    let conf = (p_safe - p_vul).abs();
    if predicted == y {
        (1.0 - conf) / 2.0
    } else {
        (1.0 + conf) / 2.0
    }
}

pub fn difficulty_oracle() -> Result<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p: f64 = rng.gen();
        let y: u8 = rng.gen_range(0..2);
        let got = difficulty::difficulty("x", &Prediction::from_p_vul(p)?, y)?.difficulty;
        worst = worst.max((got - direct_difficulty(p, y)).abs());
    }
    let pair = Prediction {
        p_vul: 0.95,
        p_safe: 0.05,
        predicted_label: 1,
    };
    let easy = difficulty::difficulty("a", &pair, 1)?.difficulty;
    let hard = difficulty::difficulty("b", &pair, 0)?.difficulty;
    let pair_ok = (easy - 0.05).abs() <= 1e-15 && (hard - 0.95).abs() <= 1e-15;
    let (fast, t) = within(start, Duration::from_secs(1));
    Ok(Check::new(
        worst <= 1e-15 && pair_ok && fast,
        format!("max err {worst:.1e}; worked pair {easy} / {hard}; {t}"),
    ))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, AgeState, SelectorConfig) {
    let n = rng.gen_range(1..300);
    // Mix continuous values with a coarse grid so ties occur.
    let d: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                rng.gen_range(0..20) as f64 / 20.0
            } else {
                rng.gen()
            }
        })
        .collect();
    let cfg = SelectorConfig {
        r_init: rng.gen_range(0.01..0.5),
        k: rng.gen_range(0.0..20.0),
        gamma0: rng.gen_range(0.001..0.2),
        alpha: rng.gen_range(0.0..1.0),
        r_max: rng.gen_range(0.01..0.3),
        ..SelectorConfig::default()
    };
    let mu: f64 = rng.gen();
    let state = AgeState {
        lambda: rng.gen(),
        epoch: rng.gen_range(1..50),
        selected_ratio: 0.0,
        mean_difficulty: mu,
        prev_mean_difficulty: mu + rng.gen_range(-0.2..0.2),
    };
    (d, state, cfg)
}

pub fn threshold_cap() -> Result<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut violations, mut capped, mut floored) = (0, 0, 0);
    for _ in 0..1000 {
        let (d, state, cfg) = random_instance(&mut rng);
        let (next, trace) = scheduler::update_lambda(&state, &d, &cfg)?;
        let n = d.len() as f64;
        let count = |t: f64| d.iter().filter(|&&x| x <= t).count() as f64 / n;
        let growth = count(next.lambda) - count(state.lambda);
        if trace.floored {
            floored += 1;
        } else if growth > cfg.r_max + 1.0 / n + 1e-12 {
            violations += 1;
        }
        if trace.capped || trace.floored {
            capped += 1;
            if !d.contains(&next.lambda) {
                violations += 1;
            }
        }
        if !(0.0..=1.0).contains(&next.lambda) {
            violations += 1;
        }
    }
    let (fast, t) = within(start, Duration::from_secs(10));
    Ok(Check::new(
        violations == 0 && fast,
        format!("{violations} violations; {capped} capped/floored, {floored} floored; {t}"),
    ))
}

pub fn monotone_age() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..1000 {
        let (d, state, cfg) = random_instance(&mut rng);
        let sorted = stats::sorted(&d);
        let inputs = UpdateInputs {
            lambda: state.lambda,
            selected_ratio: stats::fraction_at_or_below(&sorted, state.lambda),
            mean_difficulty: state.mean_difficulty,
            prev_mean_difficulty: state.mean_difficulty,
            sigma: rng.gen_range(0.0..1.0),
        };
        let t = scheduler::propose_lambda(inputs, &sorted, &cfg)?;
        if t.lambda_proposed < state.lambda || !(0.0..=1.0).contains(&t.lambda_next) {
            violations += 1;
        }
        let flat = AgeState {
            prev_mean_difficulty: state.mean_difficulty,
            ..state
        };
        let (next, _) = scheduler::update_lambda(&flat, &d, &cfg)?;
        if !(0.0..=1.0).contains(&next.lambda) {
            violations += 1;
        }
    }
    Ok(Check::new(
        violations == 0,
        format!("{violations} violations over 1000 instances"),
    ))
}

pub fn adamw_oracle() -> Result<Check> {
    let cfg = AdamWConfig {
        learning_rate: 0.05,
        ..AdamWConfig::default()
    };
    let mut opt = OptimizerState::new(1, cfg);
    let mut theta = [5.0f64];
    let (mut m, mut v, mut t) = (0.0f64, 0.0f64, 5.0f64);
    let mut worst = 0.0f64;
    for step in 1..=1000 {
        let grad = [2.0 * theta[0]];
        opt.step(&mut theta, &grad)?;
        let g = 2.0 * t;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        let m_hat = m / (1.0 - cfg.beta1.powi(step));
        let v_hat = v / (1.0 - cfg.beta2.powi(step));
        t -= cfg.learning_rate * (m_hat / (v_hat.sqrt() + cfg.epsilon) + cfg.weight_decay * t);
        worst = worst.max((theta[0] - t).abs());
    }
    Ok(Check::new(
        worst <= 1e-12 && theta[0].abs() < 0.1,
        format!("max step err {worst:.1e}; final theta {:.4}", theta[0]),
    ))
}

fn central_difference<M: ProbabilityModel>(
    m: &mut M,
    x: &FeatureVector,
    y: u8,
    i: usize,
) -> Result<f64> {
    let h = 1e-5;
    let orig = m.params()[i];
    m.params_mut()[i] = orig + h;
    let up = bce_loss(m.p_vul(x)?, y);
    m.params_mut()[i] = orig - h;
    let down = bce_loss(m.p_vul(x)?, y);
    m.params_mut()[i] = orig;
    Ok((up - down) / (2.0 * h))
}

fn max_rel_error<M: ProbabilityModel>(m: &mut M, x: &FeatureVector, y: u8) -> Result<f64> {
    let g = m.gradient(x, y)?;
    let mut worst = 0.0f64;
    for (i, &a) in g.iter().enumerate() {
        let b = central_difference(m, x, y, i)?;
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-6));
    }
    Ok(worst)
}

pub fn gradient_check() -> Result<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dim = 16;
    let (mut lin_err, mut mlp_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let mut entries: Vec<(u32, f64)> = (0..8)
            .map(|_| (rng.gen_range(0..dim as u32), rng.gen_range(-1.0..1.0)))
            .collect();
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        let x = FeatureVector::from_entries(dim, entries);
        let y = rng.gen_range(0..2u8);
        lin_err = lin_err.max(max_rel_error(&mut LinearModel::init(dim, &mut rng), &x, y)?);
        mlp_err = mlp_err.max(max_rel_error(&mut MlpModel::init(dim, 8, &mut rng), &x, y)?);
    }
    let (fast, t) = within(start, Duration::from_secs(5));
    Ok(Check::new(
        lin_err <= 1e-4 && mlp_err <= 1e-4 && fast,
        format!("max rel err linear {lin_err:.1e}, mlp {mlp_err:.1e}; {t}"),
    ))
}

fn direct_metrics(c: ConfusionCounts) -> (f64, f64) {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
    let f1 = if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    };
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = if den > 0.0 {
        (tp * tn - fp * fn_) / den
    } else {
        0.0
    };
    (f1, mcc)
}

pub fn metrics_oracle() -> Result<Check> {
    let example = eval::metrics(ConfusionCounts {
        tp: 50,
        fp: 10,
        tn: 100,
        fn_: 20,
    })?;
    let example_ok = (example.f1 - 0.7692).abs() <= 1e-4 && (example.mcc - 0.6447).abs() <= 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut out_of_range) = (0.0f64, 0);
    for _ in 0..1000 {
        let c = ConfusionCounts {
            tp: rng.gen_range(0..500),
            fp: rng.gen_range(0..500),
            tn: rng.gen_range(0..500),
            fn_: rng.gen_range(0..500),
        };
        if c.total() == 0 {
            continue;
        }
        let m = eval::metrics(c)?;
        let (f1, mcc) = direct_metrics(c);
        worst = worst.max((m.f1 - f1).abs()).max((m.mcc - mcc).abs());
        if !(-1.0..=1.0).contains(&m.mcc) {
            out_of_range += 1;
        }
    }
    Ok(Check::new(
        example_ok && worst <= 1e-12 && out_of_range == 0,
        format!(
            "example f1 {:.4} mcc {:.4}; random max err {worst:.1e}; {out_of_range} mcc out of range",
            example.f1, example.mcc
        ),
    ))
}

pub fn no_spl_equivalence() -> Result<Check> {
    let start = Instant::now();
    let dir = tempdir()?;
    let synth = SynthConfig {
        n_samples: 500,
        seed: 7,
        ..noisy_corpus()
    };
    let (splits, _) = materialize(&synth, dir.path())?;
    let cfg = acceptance_config(Mode::Spl);
    let train = EncodedSet::encode(&splits.train, &cfg.featurizer);
    let val = EncodedSet::encode(&splits.validation, &cfg.featurizer);
    let dim = cfg.featurizer.dimension;
    let mut forced = TrainSettings {
        mode: Mode::Spl,
        selector: cfg.selector,
        training: cfg.training,
    };
    forced.training.lambda_override = Some(1.0);
    let plain = TrainSettings {
        mode: Mode::NoSpl,
        selector: cfg.selector,
        training: cfg.training,
    };
    let mut a = Trainer::new(cfg.model, dim, forced, cfg.seed)?;
    let mut b = Trainer::new(cfg.model, dim, plain, cfg.seed)?;
    let mut identical = a.snapshot().params == b.snapshot().params;
    let mut epochs = 0;
    while identical && !(a.is_finished() && b.is_finished()) {
        if a.is_finished() != b.is_finished() {
            identical = false;
            break;
        }
        a.run_epoch(&train, &val)?;
        b.run_epoch(&train, &val)?;
        epochs += 1;
        let (pa, pb) = (a.snapshot().params, b.snapshot().params);
        identical =
            pa.len() == pb.len() && pa.iter().zip(&pb).all(|(x, y)| x.to_bits() == y.to_bits());
    }
    let (fast, t) = within(start, Duration::from_secs(30));
    Ok(Check::new(
        identical && fast,
        format!("{epochs} epochs compared, bit-identical {identical}; {t}"),
    ))
}

pub fn ablation_direction() -> Result<Check> {
    let start = Instant::now();
    let dir = tempdir()?;
    let (splits, _) = materialize(&noisy_corpus(), dir.path())?;
    let cfg = acceptance_config(Mode::Spl);
    let seeds: Vec<u64> = (0..10).collect();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = harness::ablation(&cfg, &splits, &seeds, jobs)?;
    let deltas: Vec<String> = report
        .runs
        .iter()
        .map(|r| format!("{:+.3}", r.delta_f1))
        .collect();
    let (fast, t) = within(start, Duration::from_secs(300));
    Ok(Check::new(
        report.median_delta_f1 >= 0.0 && report.mean_delta_f1 >= 0.005 && fast,
        format!(
            "median dF1 {:+.4}, mean {:+.4} (need >= 0 and >= +0.005); per seed [{}]; {t}",
            report.median_delta_f1,
            report.mean_delta_f1,
            deltas.join(" ")
        ),
    ))
}

pub fn hard_sample_enrichment() -> Result<Check> {
    let start = Instant::now();
    let dir = tempdir()?;
    let (splits, truth) = materialize(&noisy_corpus(), dir.path())?;
    let cfg = acceptance_config(Mode::Spl);
    let out = harness::train_run(&cfg, &splits, TrainOptions::default())?;
    let model = out.checkpoint.best_model()?;
    let records = harness::score_difficulties(&model, &cfg.featurizer, &splits.train)?;
    let ratio = harness::mislabel_enrichment(&records, &truth, 0.1)?;
    let (fast, t) = within(start, Duration::from_secs(60));
    Ok(Check::new(
        ratio >= 2.0 && fast,
        format!("top-decile mislabel rate {ratio:.2}x base (need >= 2); {t}"),
    ))
}

fn sweep_is_monotone(ckpt: &Checkpoint, samples: &[Sample]) -> Result<bool> {
    let eval_cfg = eval::EvalConfig::default();
    let report = harness::evaluate_checkpoint(ckpt, samples, &eval_cfg, None, "check", None)?;
    Ok(report.sweep.windows(2).all(|w| {
        w[1].report.recall <= w[0].report.recall && w[1].report.counts.fp <= w[0].report.counts.fp
    }))
}

pub fn sweep_monotonicity() -> Result<Check> {
    let dir = tempdir()?;
    let synth = SynthConfig {
        n_samples: 2000,
        seed: 8,
        ..noisy_corpus()
    };
    let (splits, _) = materialize(&synth, dir.path())?;
    let mut checked = 0;
    let mut failures = 0;
    for model in [ModelSpec::Linear, ModelSpec::Mlp { hidden: 16 }] {
        for mode in [Mode::Spl, Mode::NoSpl] {
            let mut cfg = acceptance_config(mode);
            cfg.model = model;
            cfg.training.max_epochs = 20;
            let out = harness::train_run(&cfg, &splits, TrainOptions::default())?;
            for part in [&splits.train, &splits.validation, &splits.test] {
                checked += 1;
                if !sweep_is_monotone(&out.checkpoint, part)? {
                    failures += 1;
                }
            }
        }
    }
    Ok(Check::new(
        failures == 0,
        format!("{checked} checkpoint/split sweeps, {failures} non-monotone"),
    ))
}

fn read_all(dir: &Path, files: &[&str]) -> Result<Vec<Vec<u8>>> {
    files
        .iter()
        .map(|f| {
            let p = dir.join(f);
            std::fs::read(&p).map_err(|e| selfpace::Error::io(&p, e))
        })
        .collect()
}

fn end_to_end(root: &Path) -> Result<Vec<Vec<u8>>> {
    let synth = SynthConfig {
        n_samples: 1000,
        seed: 9,
        ..noisy_corpus()
    };
    let corpus_dir = root.join("corpus");
    let (splits, _) = materialize(&synth, &corpus_dir)?;
    let mut cfg = acceptance_config(Mode::Spl);
    cfg.training.max_epochs = 15;
    let run_dir = root.join("run");
    let out = harness::train_run(
        &cfg,
        &splits,
        TrainOptions {
            out_dir: Some(run_dir.clone()),
            ..Default::default()
        },
    )?;
    let eval_dir = root.join("eval");
    harness::evaluate_checkpoint(
        &out.checkpoint,
        &splits.test,
        &cfg.eval,
        None,
        "test",
        Some(&eval_dir),
    )?;
    let mut bytes = read_all(&corpus_dir, &[harness::CORPUS_FILE, harness::MANIFEST_FILE])?;
    bytes.extend(read_all(
        &run_dir,
        &[harness::CHECKPOINT_FILE, "trace.csv", "report.json"],
    )?);
    bytes.extend(read_all(&eval_dir, &["evaluation.json", "sweep.csv"])?);

    let halted = root.join("halted");
    harness::train_run(
        &cfg,
        &splits,
        TrainOptions {
            halt_after: Some(5),
            out_dir: Some(halted.clone()),
            ..Default::default()
        },
    )?;
    let resume = Checkpoint::load(&halted.join(harness::CHECKPOINT_FILE))?;
    harness::train_run(
        &cfg,
        &splits,
        TrainOptions {
            resume: Some(resume),
            out_dir: Some(halted.clone()),
            ..Default::default()
        },
    )?;
    bytes.extend(read_all(
        &halted,
        &[harness::CHECKPOINT_FILE, "report.json"],
    )?);
    Ok(bytes)
}

pub fn determinism() -> Result<Check> {
    let (a, b) = (tempdir()?, tempdir()?);
    let first = end_to_end(a.path())?;
    let second = end_to_end(b.path())?;
    let repeat = first == second;
    // The resumed run (last two artifacts) must match the uninterrupted one.
    let n = first.len();
    let resume = first[n - 2] == first[2] && first[n - 1] == first[4];
    Ok(Check::new(
        repeat && resume,
        format!("repeat runs identical {repeat}; resumed run identical {resume}"),
    ))
}
