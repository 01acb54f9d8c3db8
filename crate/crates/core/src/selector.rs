//! Threshold selection and the masked self-paced objective.

use crate::error::{Error, Result};
use crate::types::{DifficultyRecord, SelectionMask};

/// Admits every sample with `difficulty <= lambda`.
pub fn select(records: &[DifficultyRecord], lambda: f64) -> SelectionMask {
    SelectionMask::from_flags(records.iter().map(|r| r.difficulty <= lambda).collect())
}

pub fn select_values(difficulties: &[f64], lambda: f64) -> SelectionMask {
    SelectionMask::from_flags(difficulties.iter().map(|&d| d <= lambda).collect())
}

/// `sum(v_j * L_j) - lambda * sum(v_j)` with `v_j = [d_j <= lambda]`.
pub fn spl_objective(
    batch_losses: &[f64],
    batch_difficulties: &[f64],
    lambda: f64,
) -> Result<(f64, Vec<bool>)> {
    if batch_losses.len() != batch_difficulties.len() {
        return Err(Error::LengthMismatch {
            left: batch_losses.len(),
            right: batch_difficulties.len(),
        });
    }
    let mask: Vec<bool> = batch_difficulties.iter().map(|&d| d <= lambda).collect();
    let (loss_sum, count) = batch_losses
        .iter()
        .zip(&mask)
        .filter(|(_, &v)| v)
        .fold((0.0, 0usize), |(s, c), (l, _)| (s + l, c + 1));
    Ok((loss_sum - lambda * count as f64, mask))
}

/// Mean difficulty of one batch.
pub fn batch_difficulty(sample_difficulties: &[f64]) -> Result<f64> {
    if sample_difficulties.is_empty() {
        return Err(Error::EmptyInput("empty batch"));
    }
    Ok(sample_difficulties.iter().sum::<f64>() / sample_difficulties.len() as f64)
}
