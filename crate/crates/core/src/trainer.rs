//! Self-paced training loop.
//!
//! Each epoch: score the full training set with frozen parameters, turn the
//! scores into difficulties, advance the age threshold, keep the samples at or
//! below it, then run shuffled mini-batch AdamW over the kept samples and
//! measure validation loss. NO-SPL mode skips the scoring and trains on
//! everything.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Mode, TrainingConfig};
use crate::difficulty;
use crate::error::{Error, Result};
use crate::features::{featurize, FeatureVector, FeaturizerConfig};
use crate::model::{ModelSpec, ProbabilityModel, ReferenceModel};
use crate::optim::{bce_loss, OptimizerState};
use crate::scheduler::{self, AgeUpdateTrace};
use crate::selector;
use crate::stats;
use crate::types::{AgeState, Label, Prediction, Sample, SelectorConfig};

const STREAM_INIT: u64 = 0x10;
const STREAM_SHUFFLE_BASE: u64 = 0x1000;

/// A featurised split.
#[derive(Clone, Debug)]
pub struct EncodedSet {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub features: Vec<FeatureVector>,
}

impl EncodedSet {
    pub fn encode(samples: &[Sample], config: &FeaturizerConfig) -> Self {
        EncodedSet {
            ids: samples.iter().map(|s| s.id.clone()).collect(),
            labels: samples.iter().map(|s| s.label).collect(),
            features: samples
                .par_iter()
                .map(|s| featurize(&s.code, config))
                .collect(),
        }
    }

    pub fn from_parts(
        ids: Vec<String>,
        labels: Vec<Label>,
        features: Vec<FeatureVector>,
    ) -> Result<Self> {
        if ids.len() != labels.len() || ids.len() != features.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: features.len(),
            });
        }
        Ok(EncodedSet {
            ids,
            labels,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Forward pass over a set; parallel across samples, order preserved.
pub fn predict_all<M: ProbabilityModel + Sync>(
    model: &M,
    set: &EncodedSet,
) -> Result<Vec<Prediction>> {
    set.features.par_iter().map(|x| model.predict(x)).collect()
}

pub fn mean_loss<M: ProbabilityModel + Sync>(model: &M, set: &EncodedSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyInput("loss over an empty set"));
    }
    let preds = predict_all(model, set)?;
    let total: f64 = preds
        .iter()
        .zip(&set.labels)
        .map(|(p, &y)| bce_loss(p.p_vul, y))
        .sum();
    Ok(total / set.len() as f64)
}

/// Validation-loss early stopping with a strict-improvement rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopping {
    pub patience: u64,
    pub min_delta: f64,
    pub best_loss: Option<f64>,
    pub best_epoch: Option<u64>,
    pub epochs_without_improvement: u64,
}

impl EarlyStopping {
    pub fn new(patience: u64, min_delta: f64) -> Self {
        EarlyStopping {
            patience,
            min_delta,
            best_loss: None,
            best_epoch: None,
            epochs_without_improvement: 0,
        }
    }

    /// Records one epoch's loss; returns whether it is a new best.
    pub fn observe(&mut self, epoch: u64, loss: f64) -> bool {
        let improved = match self.best_loss {
            None => true,
            Some(best) => loss < best - self.min_delta,
        };
        if improved {
            self.best_loss = Some(loss);
            self.best_epoch = Some(epoch);
            self.epochs_without_improvement = 0;
        } else {
            self.epochs_without_improvement += 1;
        }
        improved
    }

    pub fn should_stop(&self) -> bool {
        self.epochs_without_improvement >= self.patience
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub mode: Mode,
    pub selector: SelectorConfig,
    pub training: TrainingConfig,
}

/// One row of the per-epoch trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: u64,
    pub lambda: Option<f64>,
    pub selected_ratio: f64,
    pub selected_count: usize,
    pub mean_difficulty: Option<f64>,
    pub sigma: Option<f64>,
    pub update: Option<AgeUpdateTrace>,
    /// Masked objective over fixed-size batches of the difficulty pass.
    pub objective: Option<f64>,
    pub train_loss: f64,
    pub val_loss: f64,
    pub optimizer_steps: u64,
    pub selected_digest: String,
}

/// Everything needed to resume a run exactly where it stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerState {
    pub seed: u64,
    pub settings: TrainSettings,
    pub model: ModelSpec,
    pub input_dim: usize,
    pub params: Vec<f64>,
    pub optimizer: OptimizerState,
    pub age: Option<AgeState>,
    pub epoch: u64,
    pub stopper: EarlyStopping,
    pub best_params: Vec<f64>,
    pub reports: Vec<EpochReport>,
    pub finished: bool,
    /// Difficulties from the first scoring pass, aligned with the training set.
    pub initial_difficulties: Vec<f64>,
    /// Epoch at which each training sample was first selected.
    pub first_selected: Vec<Option<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub best_params: Vec<f64>,
    pub best_epoch: u64,
    pub best_val_loss: f64,
    pub epochs_run: u64,
    pub stopped_early: bool,
    pub reports: Vec<EpochReport>,
    pub final_age: Option<AgeState>,
}

pub struct Trainer {
    pub state: TrainerState,
    model: ReferenceModel,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn selection_digest(ids: &[String], indices: &[usize]) -> String {
    let mut h = Sha256::new();
    for &i in indices {
        h.update(ids[i].as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}

impl Trainer {
    pub fn new(
        model_spec: ModelSpec,
        input_dim: usize,
        settings: TrainSettings,
        seed: u64,
    ) -> Result<Self> {
        settings.selector.validate()?;
        settings.training.validate()?;
        model_spec.validate()?;
        let model = model_spec.init(input_dim, &mut rng_for(seed, STREAM_INIT));
        let params = model.params().to_vec();
        let t = &settings.training;
        Ok(Trainer {
            state: TrainerState {
                seed,
                settings,
                model: model_spec,
                input_dim,
                optimizer: OptimizerState::new(params.len(), t.optimizer()),
                best_params: params.clone(),
                params,
                age: None,
                epoch: 0,
                stopper: EarlyStopping::new(t.patience, t.min_delta),
                reports: Vec::new(),
                finished: false,
                initial_difficulties: Vec::new(),
                first_selected: Vec::new(),
            },
            model,
        })
    }

    pub fn from_state(state: TrainerState) -> Result<Self> {
        let model = state
            .model
            .from_params(state.input_dim, state.params.clone())?;
        Ok(Trainer { state, model })
    }

    /// Current state with parameters synced from the live model.
    pub fn snapshot(&self) -> TrainerState {
        let mut s = self.state.clone();
        s.params = self.model.params().to_vec();
        s
    }

    pub fn model(&self) -> &ReferenceModel {
        &self.model
    }

    pub fn best_model(&self) -> Result<ReferenceModel> {
        self.state
            .model
            .from_params(self.state.input_dim, self.state.best_params.clone())
    }

    pub fn is_finished(&self) -> bool {
        self.state.finished
    }

    /// Scores the training set and advances the threshold. Returns the
    /// threshold for this epoch plus reporting values.
    fn curriculum_step(&mut self, train: &EncodedSet) -> Result<CurriculumStep> {
        let preds = predict_all(&self.model, train)?;
        let records = difficulty::difficulty_batch(&train.ids, &preds, &train.labels)?;
        let diffs = difficulty::difficulties_of(&records);
        let selector_cfg = self.state.settings.selector;

        let (age, update) = match self.state.age {
            None => (scheduler::init_lambda(&diffs, &selector_cfg)?, None),
            Some(prev) => {
                let (next, trace) = scheduler::update_lambda(&prev, &diffs, &selector_cfg)?;
                (next, Some(trace))
            }
        };
        let lambda = self
            .state
            .settings
            .training
            .lambda_override
            .unwrap_or(age.lambda);
        let sigma = match update {
            Some(t) => t.sigma_t,
            None => scheduler::stability_factor(&diffs, lambda, &selector_cfg)?.1,
        };
        if self.state.initial_difficulties.is_empty() {
            self.state.initial_difficulties = diffs.clone();
        }
        self.state.age = Some(age);

        let mask = selector::select(&records, lambda);

        let bs = self.state.settings.training.batch_size;
        let losses: Vec<f64> = preds
            .iter()
            .zip(&train.labels)
            .map(|(p, &y)| bce_loss(p.p_vul, y))
            .collect();
        let mut batch_losses = Vec::new();
        let mut batch_diffs = Vec::new();
        for (l, d) in losses.chunks(bs).zip(diffs.chunks(bs)) {
            batch_losses.push(l.iter().sum::<f64>() / l.len() as f64);
            batch_diffs.push(selector::batch_difficulty(d)?);
        }
        let (objective, _) = selector::spl_objective(&batch_losses, &batch_diffs, lambda)?;

        Ok(CurriculumStep {
            lambda,
            selected: mask.selected_indices(),
            mean_difficulty: stats::mean(&diffs)?,
            sigma,
            update,
            objective,
        })
    }

    /// Runs one epoch of the protocol.
    pub fn run_epoch(
        &mut self,
        train: &EncodedSet,
        validation: &EncodedSet,
    ) -> Result<EpochReport> {
        if train.is_empty() {
            return Err(Error::EmptyInput("training set is empty"));
        }
        if validation.is_empty() {
            return Err(Error::EmptyInput("validation set is empty"));
        }
        let epoch = self.state.epoch;
        if self.state.first_selected.len() != train.len() {
            self.state.first_selected = vec![None; train.len()];
        }

        let step = match self.state.settings.mode {
            Mode::Spl => Some(self.curriculum_step(train)?),
            Mode::NoSpl => None,
        };
        let mut selected: Vec<usize> = match &step {
            Some(s) => s.selected.clone(),
            None => (0..train.len()).collect(),
        };
        if selected.is_empty() {
            return Err(Error::Training(format!(
                "epoch {epoch}: no samples selected after the scheduler floor"
            )));
        }
        for &i in &selected {
            self.state.first_selected[i].get_or_insert(epoch);
        }
        let selected_count = selected.len();
        let selected_digest = selection_digest(&train.ids, &selected);

        selected.shuffle(&mut rng_for(self.state.seed, STREAM_SHUFFLE_BASE + epoch));

        let bs = self.state.settings.training.batch_size;
        let mut grad = vec![0.0; self.model.params().len()];
        let mut loss_sum = 0.0;
        let mut steps = 0;
        for batch in selected.chunks(bs) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let x = &train.features[i];
                let y = train.labels[i];
                loss_sum += bce_loss(self.model.p_vul(x)?, y);
                self.model.accumulate_gradient(x, y, scale, &mut grad)?;
            }
            self.state.optimizer.step(self.model.params_mut(), &grad)?;
            steps += 1;
        }

        let val_loss = mean_loss(&self.model, validation)?;
        if self.state.stopper.observe(epoch, val_loss) {
            self.state.best_params = self.model.params().to_vec();
        }

        let report = EpochReport {
            epoch,
            lambda: step.as_ref().map(|s| s.lambda),
            selected_ratio: selected_count as f64 / train.len() as f64,
            selected_count,
            mean_difficulty: step.as_ref().map(|s| s.mean_difficulty),
            sigma: step.as_ref().map(|s| s.sigma),
            update: step.as_ref().and_then(|s| s.update),
            objective: step.as_ref().map(|s| s.objective),
            train_loss: loss_sum / selected_count as f64,
            val_loss,
            optimizer_steps: steps,
            selected_digest,
        };
        self.state.reports.push(report.clone());
        self.state.epoch += 1;
        if self.state.stopper.should_stop()
            || self.state.epoch >= self.state.settings.training.max_epochs
        {
            self.state.finished = true;
        }
        self.state.params = self.model.params().to_vec();
        Ok(report)
    }

    /// Runs epochs until early stopping, the epoch cap, or `limit` more epochs.
    pub fn run(
        &mut self,
        train: &EncodedSet,
        validation: &EncodedSet,
        limit: Option<u64>,
    ) -> Result<()> {
        let mut done = 0;
        while !self.state.finished && limit.is_none_or(|l| done < l) {
            self.run_epoch(train, validation)?;
            done += 1;
        }
        Ok(())
    }

    pub fn result(&self) -> TrainResult {
        let s = &self.state;
        TrainResult {
            best_params: s.best_params.clone(),
            best_epoch: s.stopper.best_epoch.unwrap_or(0),
            best_val_loss: s.stopper.best_loss.unwrap_or(f64::NAN),
            epochs_run: s.epoch,
            stopped_early: s.stopper.should_stop(),
            reports: s.reports.clone(),
            final_age: s.age,
        }
    }
}

struct CurriculumStep {
    lambda: f64,
    selected: Vec<usize>,
    mean_difficulty: f64,
    sigma: f64,
    update: Option<AgeUpdateTrace>,
    objective: f64,
}

/// Trains a fresh model to completion.
pub fn train(
    model_spec: ModelSpec,
    settings: TrainSettings,
    seed: u64,
    train_set: &EncodedSet,
    validation: &EncodedSet,
) -> Result<(TrainResult, Trainer)> {
    if train_set.is_empty() || validation.is_empty() {
        return Err(Error::EmptyInput(
            "train and validation splits must be non-empty",
        ));
    }
    let dim = train_set.features[0].dimension;
    let mut trainer = Trainer::new(model_spec, dim, settings, seed)?;
    trainer.run(train_set, validation, None)?;
    Ok((trainer.result(), trainer))
}

/// Trace as CSV. Missing values (NO-SPL rows) are left empty.
pub fn trace_csv(reports: &[EpochReport]) -> String {
    use std::fmt::Write as _;
    fn opt(v: Option<f64>) -> String {
        v.map(|x| format!("{x:.9}")).unwrap_or_default()
    }
    let mut out = String::from(
        "epoch,lambda,selected_ratio,selected_count,mean_difficulty,sigma,capped,objective,train_loss,val_loss,selected_digest\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{:.9},{},{},{},{},{},{:.9},{:.9},{}",
            r.epoch,
            opt(r.lambda),
            r.selected_ratio,
            r.selected_count,
            opt(r.mean_difficulty),
            opt(r.sigma),
            r.update.map(|u| u.capped.to_string()).unwrap_or_default(),
            opt(r.objective),
            r.train_loss,
            r.val_loss,
            r.selected_digest
        );
    }
    out
}
