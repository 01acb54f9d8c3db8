//! Domain records shared across the engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label. `1` marks vulnerable code.
pub type Label = u8;

/// One source-code unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub code: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<String>,
}

/// Two-class output of a probability provider.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p_vul: f64,
    pub p_safe: f64,
    pub predicted_label: Label,
}

impl Prediction {
    /// Builds a prediction from the positive-class probability. Ties go to the
    /// vulnerable class.
    pub fn from_p_vul(p_vul: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_vul) {
            return Err(Error::InvalidProbability {
                p_safe: 1.0 - p_vul,
                p_vul,
            });
        }
        let p_safe = 1.0 - p_vul;
        Ok(Prediction {
            p_vul,
            p_safe,
            predicted_label: u8::from(p_vul >= p_safe),
        })
    }

    /// Builds a prediction from an explicit probability pair, validating range and
    /// complementarity.
    pub fn from_pair(p_safe: f64, p_vul: f64) -> Result<Self> {
        validate_pair(p_safe, p_vul)?;
        Ok(Prediction {
            p_vul,
            p_safe,
            predicted_label: u8::from(p_vul >= p_safe),
        })
    }
}

pub(crate) fn validate_pair(p_safe: f64, p_vul: f64) -> Result<()> {
    let in_range = (0.0..=1.0).contains(&p_safe) && (0.0..=1.0).contains(&p_vul);
    if !in_range || ((p_safe + p_vul) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability { p_safe, p_vul });
    }
    Ok(())
}

/// Per-sample difficulty for one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyRecord {
    pub sample_id: String,
    pub label: Label,
    pub conf: f64,
    pub difficulty: f64,
    pub correct: bool,
}

/// Evolving scheduler state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeState {
    pub lambda: f64,
    pub epoch: u64,
    pub selected_ratio: f64,
    pub mean_difficulty: f64,
    pub prev_mean_difficulty: f64,
}

/// Scheduler hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorConfig {
    /// Quantile of the initial difficulty distribution used for the first threshold.
    pub r_init: f64,
    /// Stability coefficient.
    pub k: f64,
    /// Initial growth factor.
    pub gamma0: f64,
    /// Growth-rate coefficient applied to the unselected fraction.
    pub alpha: f64,
    /// Cap on the per-epoch increase of the selected fraction.
    pub r_max: f64,
    /// Half-width, in difficulty units, of the window used for the local std.
    pub local_window: f64,
    /// Floor on the selected fraction when a threshold admits nothing.
    pub min_select_ratio: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            r_init: 0.1,
            k: 10.0,
            gamma0: 0.025,
            alpha: 0.3,
            r_max: 0.1,
            local_window: 0.05,
            min_select_ratio: 0.1,
        }
    }
}

impl SelectorConfig {
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, reason))
            }
        }
        check(
            self.r_init > 0.0 && self.r_init < 1.0,
            "r_init",
            "must be in (0, 1)",
        )?;
        check(self.k >= 0.0 && self.k.is_finite(), "k", "must be ≥ 0")?;
        check(
            self.gamma0 > 0.0 && self.gamma0.is_finite(),
            "gamma0",
            "must be > 0",
        )?;
        check(
            self.alpha >= 0.0 && self.alpha.is_finite(),
            "alpha",
            "must be ≥ 0",
        )?;
        check(
            self.r_max > 0.0 && self.r_max <= 1.0,
            "r_max",
            "must be in (0, 1]",
        )?;
        check(
            self.local_window >= 0.0 && self.local_window.is_finite(),
            "local_window",
            "must be ≥ 0",
        )?;
        check(
            self.min_select_ratio > 0.0 && self.min_select_ratio <= 1.0,
            "min_select_ratio",
            "must be in (0, 1]",
        )
    }
}

/// Per-sample inclusion flags aligned with a difficulty list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionMask {
    pub flags: Vec<bool>,
    pub selected_count: usize,
}

impl SelectionMask {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        let selected_count = flags.iter().filter(|&&f| f).count();
        SelectionMask {
            flags,
            selected_count,
        }
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }

    pub fn ratio(&self) -> f64 {
        if self.flags.is_empty() {
            0.0
        } else {
            self.selected_count as f64 / self.flags.len() as f64
        }
    }
}
