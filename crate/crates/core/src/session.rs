//! Curriculum state for training loops that live outside this crate.
//!
//! A [`Session`] owns one run's scheduler state. The caller passes in the
//! model's positive-class probabilities each epoch and gets back the mask of
//! samples to train on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::set_selector_field;
use crate::difficulty;
use crate::error::{Error, Result};
use crate::scheduler::{self, AgeUpdateTrace};
use crate::selector;
use crate::stats;
use crate::types::{AgeState, Label, Prediction, SelectionMask, SelectorConfig};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochSelection {
    pub mask: SelectionMask,
    pub lambda: f64,
    /// `selected_ratio`, `mean_difficulty`, `epoch` and, after the first call,
    /// the update trace fields.
    pub stats: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    config: SelectorConfig,
    age: Option<AgeState>,
    closed: bool,
}

impl Session {
    pub fn new(config: SelectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Session {
            config,
            age: None,
            closed: false,
        })
    }

    /// Builds a session from `(field, value)` pairs over the defaults.
    pub fn from_pairs<I, K>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<str>,
    {
        let mut config = SelectorConfig::default();
        for (k, v) in pairs {
            set_selector_field(&mut config, k.as_ref(), v)
                .map_err(|_| Error::config(k.as_ref(), "is not a selector field"))?;
        }
        Self::new(config)
    }

    pub fn config(&self) -> &SelectorConfig {
        &self.config
    }

    pub fn age(&self) -> Option<&AgeState> {
        self.age.as_ref()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    fn live(&self) -> Result<()> {
        if self.closed {
            Err(Error::SessionClosed)
        } else {
            Ok(())
        }
    }

    /// Difficulties for the given outputs. Does not touch the scheduler.
    pub fn compute_difficulty(&self, p_vul: &[f64], labels: &[Label]) -> Result<Vec<f64>> {
        self.live()?;
        difficulties(p_vul, labels)
    }

    /// Scores one epoch, advances the threshold and returns the mask.
    pub fn epoch_select(&mut self, p_vul: &[f64], labels: &[Label]) -> Result<EpochSelection> {
        self.live()?;
        let d = difficulties(p_vul, labels)?;
        let (age, trace) = match &self.age {
            None => (scheduler::init_lambda(&d, &self.config)?, None),
            Some(prev) => {
                let (next, t) = scheduler::update_lambda(prev, &d, &self.config)?;
                (next, Some(t))
            }
        };
        let mask = selector::select_values(&d, age.lambda);
        let mut out = BTreeMap::new();
        out.insert("epoch".to_owned(), age.epoch as f64);
        out.insert("selected_ratio".to_owned(), mask.ratio());
        out.insert("mean_difficulty".to_owned(), stats::mean(&d)?);
        if let Some(t) = trace {
            insert_trace(&mut out, &t);
        }
        self.age = Some(age);
        Ok(EpochSelection {
            lambda: age.lambda,
            mask,
            stats: out,
        })
    }
}

fn difficulties(p_vul: &[f64], labels: &[Label]) -> Result<Vec<f64>> {
    if p_vul.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: p_vul.len(),
            right: labels.len(),
        });
    }
    if p_vul.is_empty() {
        return Err(Error::EmptyInput("empty probability array"));
    }
    p_vul
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&p, &y))| {
            if y > 1 {
                return Err(Error::Data(format!("label {y} at index {i} is not 0 or 1")));
            }
            let pred = Prediction::from_p_vul(p)?;
            Ok(difficulty::difficulty("", &pred, y)?.difficulty)
        })
        .collect()
}

fn insert_trace(out: &mut BTreeMap<String, f64>, t: &AgeUpdateTrace) {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    for (k, v) in [
        ("gamma_t", t.gamma_t),
        ("sigma_t", t.sigma_t),
        ("s_t", t.s_t),
        ("delta_mu", t.delta_mu),
        ("lambda_proposed", t.lambda_proposed),
        ("capped", flag(t.capped)),
        ("floored", flag(t.floored)),
    ] {
        out.insert(k.to_owned(), v);
    }
}
