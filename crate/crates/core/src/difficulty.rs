//! Confidence-based curriculum difficulty.
//!
//! A correct prediction scores `(1 - conf) / 2` and a wrong one `(1 + conf) / 2`,
//! where `conf = |p_safe - p_vul|`. Confident hits are easy, confident misses
//! are the hardest samples.

use crate::error::{Error, Result};
use crate::types::{validate_pair, DifficultyRecord, Label, Prediction};

pub fn confidence(p_safe: f64, p_vul: f64) -> Result<f64> {
    validate_pair(p_safe, p_vul)?;
    Ok((p_safe - p_vul).abs())
}

pub fn difficulty(
    sample_id: &str,
    prediction: &Prediction,
    label: Label,
) -> Result<DifficultyRecord> {
    let conf = confidence(prediction.p_safe, prediction.p_vul)?;
    let correct = prediction.predicted_label == label;
    let difficulty = if correct {
        (1.0 - conf) / 2.0
    } else {
        (1.0 + conf) / 2.0
    };
    Ok(DifficultyRecord {
        sample_id: sample_id.to_owned(),
        label,
        conf,
        difficulty,
        correct,
    })
}

/// Element-wise [`difficulty`], order preserved.
pub fn difficulty_batch<S: AsRef<str>>(
    ids: &[S],
    predictions: &[Prediction],
    labels: &[Label],
) -> Result<Vec<DifficultyRecord>> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if ids.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: labels.len(),
        });
    }
    ids.iter()
        .zip(predictions)
        .zip(labels)
        .map(|((id, p), &y)| difficulty(id.as_ref(), p, y))
        .collect()
}

pub fn difficulties_of(records: &[DifficultyRecord]) -> Vec<f64> {
    records.iter().map(|r| r.difficulty).collect()
}
