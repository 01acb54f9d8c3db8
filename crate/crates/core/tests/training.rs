use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfpace::config::Mode;
use selfpace::features::FeatureVector;
use selfpace::model::ModelSpec;
use selfpace::model::{LinearModel, MlpModel, ProbabilityModel};
use selfpace::optim::{bce_loss, AdamWConfig, OptimizerState};
use selfpace::stats::spearman;
use selfpace::trainer::{self, EncodedSet, TrainSettings};
use selfpace::SelectorConfig;

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, nnz: usize) -> FeatureVector {
    let mut entries: Vec<(u32, f64)> = (0..nnz)
        .map(|_| (rng.gen_range(0..dim as u32), rng.gen_range(-1.0..1.0)))
        .collect();
    entries.sort_by_key(|e| e.0);
    entries.dedup_by_key(|e| e.0);
    FeatureVector::from_entries(dim, entries)
}

fn finite_difference<M: ProbabilityModel>(m: &mut M, x: &FeatureVector, y: u8, i: usize) -> f64 {
    let h = 1e-5;
    let orig = m.params()[i];
    m.params_mut()[i] = orig + h;
    let up = bce_loss(m.p_vul(x).unwrap(), y);
    m.params_mut()[i] = orig - h;
    let down = bce_loss(m.p_vul(x).unwrap(), y);
    m.params_mut()[i] = orig;
    (up - down) / (2.0 * h)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dim = 12;
    for _ in 0..20 {
        let x = random_vector(&mut rng, dim, 6);
        let y = rng.gen_range(0..2u8);
        let mut lin = LinearModel::init(dim, &mut rng);
        let mut mlp = MlpModel::init(dim, 5, &mut rng);
        let gl = lin.gradient(&x, y).unwrap();
        for i in 0..gl.len() {
            assert!(rel_err(gl[i], finite_difference(&mut lin, &x, y, i)) < 1e-4);
        }
        let gm = mlp.gradient(&x, y).unwrap();
        for i in 0..gm.len() {
            assert!(
                rel_err(gm[i], finite_difference(&mut mlp, &x, y, i)) < 1e-4,
                "mlp param {i}"
            );
        }
    }
}

#[test]
fn adamw_matches_hand_transcription() {
    let cfg = AdamWConfig {
        learning_rate: 0.05,
        ..AdamWConfig::default()
    };
    let mut opt = OptimizerState::new(1, cfg);
    let mut theta = [5.0];
    let (mut m, mut v, mut t) = (0.0f64, 0.0f64, 5.0f64);
    for step in 1..=1000 {
        let g = 2.0 * theta[0];
        opt.step(&mut theta, &[g]).unwrap();
        let g2 = 2.0 * t;
        m = 0.9 * m + 0.1 * g2;
        v = 0.999 * v + 0.001 * g2 * g2;
        let mh = m / (1.0 - 0.9f64.powi(step));
        let vh = v / (1.0 - 0.999f64.powi(step));
        t -= 0.05 * (mh / (vh.sqrt() + 1e-8) + 0.01 * t);
        assert!((theta[0] - t).abs() <= 1e-12);
    }
    assert!(theta[0].abs() < 0.1);
}

fn separable(n: usize, seed: u64) -> EncodedSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ids, mut labels, mut feats) = (vec![], vec![], vec![]);
    for i in 0..n {
        let y = (i % 2) as u8;
        let a: f64 = rng.gen_range(0.2..1.0) * if y == 1 { 1.0 } else { -1.0 };
        let b: f64 = rng.gen_range(-1.0..1.0);
        ids.push(format!("t{i:04}"));
        labels.push(y);
        feats.push(FeatureVector::from_entries(2, vec![(0, a), (1, b)]));
    }
    EncodedSet::from_parts(ids, labels, feats).unwrap()
}

fn settings(mode: Mode, epochs: u64, lr: f64) -> TrainSettings {
    let mut s = TrainSettings {
        mode,
        selector: SelectorConfig::default(),
        training: Default::default(),
    };
    s.training.max_epochs = epochs;
    s.training.learning_rate = lr;
    s.training.patience = epochs;
    s
}

fn train_accuracy(params: &[f64], set: &EncodedSet) -> f64 {
    let m = ModelSpec::Linear.from_params(2, params.to_vec()).unwrap();
    let hits = set
        .features
        .iter()
        .zip(&set.labels)
        .filter(|(x, &y)| m.predict(x).unwrap().predicted_label == y)
        .count();
    hits as f64 / set.len() as f64
}

#[test]
fn linear_model_separates_toy_set() {
    let tr = separable(200, 1);
    let va = separable(40, 2);
    let (res, t) = trainer::train(
        ModelSpec::Linear,
        settings(Mode::NoSpl, 500, 1e-2),
        5,
        &tr,
        &va,
    )
    .unwrap();
    assert!(res.epochs_run <= 500);
    assert_eq!(train_accuracy(t.state.params.as_slice(), &tr), 1.0);
}

#[test]
fn both_modes_fit_separable_data() {
    let tr = separable(200, 3);
    let va = separable(40, 4);
    for mode in [Mode::Spl, Mode::NoSpl] {
        let (_, t) =
            trainer::train(ModelSpec::Linear, settings(mode, 200, 1e-2), 9, &tr, &va).unwrap();
        assert_eq!(train_accuracy(&t.state.params, &tr), 1.0, "{mode:?}");
    }
}

#[test]
fn exposure_follows_initial_difficulty() {
    let tr = separable(300, 5);
    let va = separable(40, 6);
    let (res, t) = trainer::train(
        ModelSpec::Linear,
        settings(Mode::Spl, 30, 1e-3),
        2,
        &tr,
        &va,
    )
    .unwrap();
    let never = res.epochs_run as f64;
    let first: Vec<f64> = t
        .state
        .first_selected
        .iter()
        .map(|e| e.map_or(never, |v| v as f64))
        .collect();
    let rho = spearman(&t.state.initial_difficulties, &first).unwrap();
    assert!(rho > 0.0, "spearman {rho}");
}
