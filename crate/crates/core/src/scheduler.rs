//! Age-parameter scheduler.
//!
//! The threshold `lambda` starts at the `r_init` quantile of the first
//! difficulty distribution and then moves by
//!
//! ```text
//! lambda' = lambda + gamma_t * (1 - r_t) * s_t + (mu_t - mu_{t-1})
//! gamma_t = gamma0 * (1 + alpha * (1 - r_t))
//! s_t     = 1 / (1 + k * sigma_t)
//! ```
//!
//! where `sigma_t` is the std of the difficulties near the current threshold.
//! If the proposal would admit more than `r_max` additional fraction of the
//! data, it is pulled back to the `r_t + r_max` quantile, or to the next lower
//! attained difficulty when ties at that quantile would still overshoot. The
//! result is clipped to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, fraction_at_or_below, nearest_rank_quantile};
use crate::types::{AgeState, SelectorConfig};

/// Intermediate quantities of one update, kept for run reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeUpdateTrace {
    pub gamma_t: f64,
    pub sigma_t: f64,
    pub s_t: f64,
    pub delta_mu: f64,
    pub lambda_proposed: f64,
    pub capped: bool,
    /// Set when the clipped threshold admitted nothing and was re-anchored.
    pub floored: bool,
    pub lambda_next: f64,
}

/// Inputs to a single threshold update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateInputs {
    pub lambda: f64,
    pub selected_ratio: f64,
    pub mean_difficulty: f64,
    pub prev_mean_difficulty: f64,
    pub sigma: f64,
}

pub fn init_lambda(difficulties: &[f64], config: &SelectorConfig) -> Result<AgeState> {
    if difficulties.is_empty() {
        return Err(Error::EmptyDifficulties);
    }
    let sorted = stats::sorted(difficulties);
    let lambda = nearest_rank_quantile(&sorted, config.r_init)?;
    let mu = stats::mean(difficulties)?;
    Ok(AgeState {
        lambda,
        epoch: 0,
        selected_ratio: fraction_at_or_below(&sorted, lambda),
        mean_difficulty: mu,
        prev_mean_difficulty: mu,
    })
}

pub fn growth_factor(config: &SelectorConfig, selected_ratio: f64) -> f64 {
    config.gamma0 * (1.0 + config.alpha * (1.0 - selected_ratio))
}

/// Local std of the difficulties within `local_window` of `lambda`, falling
/// back to the global std when the window holds fewer than two values.
/// Returns `(s_t, sigma_t)`.
pub fn stability_factor(
    difficulties: &[f64],
    lambda: f64,
    config: &SelectorConfig,
) -> Result<(f64, f64)> {
    if difficulties.is_empty() {
        return Err(Error::EmptyDifficulties);
    }
    let w = config.local_window;
    let near: Vec<f64> = difficulties
        .iter()
        .copied()
        .filter(|d| (lambda - w..=lambda + w).contains(d))
        .collect();
    let sigma = if near.len() >= 2 {
        stats::population_std(&near)?
    } else {
        stats::population_std(difficulties)?
    };
    Ok((stability_from_sigma(config.k, sigma), sigma))
}

pub fn stability_from_sigma(k: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + k * sigma)
}

/// The update step given explicit inputs. `sorted_difficulties` is the current
/// epoch's difficulty set, ascending.
pub fn propose_lambda(
    inputs: UpdateInputs,
    sorted_difficulties: &[f64],
    config: &SelectorConfig,
) -> Result<AgeUpdateTrace> {
    if sorted_difficulties.is_empty() {
        return Err(Error::EmptyDifficulties);
    }
    let r_t = inputs.selected_ratio;
    let gamma_t = growth_factor(config, r_t);
    let delta_mu = inputs.mean_difficulty - inputs.prev_mean_difficulty;
    let s_t = stability_from_sigma(config.k, inputs.sigma);
    let lambda_proposed = inputs.lambda + gamma_t * (1.0 - r_t) * s_t + delta_mu;

    let mut lambda = lambda_proposed;
    let mut capped = false;
    let r_new = fraction_at_or_below(sorted_difficulties, lambda);
    if r_new - r_t > config.r_max {
        let target = (r_t + config.r_max).min(1.0);
        lambda = nearest_rank_quantile(sorted_difficulties, target)?;
        let n = sorted_difficulties.len() as f64;
        let limit = (r_t + config.r_max) * n + 1.0;
        if stats::count_at_or_below(sorted_difficulties, lambda) as f64 > limit + 1e-9 {
            let below = sorted_difficulties.partition_point(|&d| d < lambda);
            if below > 0 {
                lambda = sorted_difficulties[below - 1];
            }
        }
        capped = true;
    }
    lambda = lambda.clamp(0.0, 1.0);

    let mut floored = false;
    if stats::count_at_or_below(sorted_difficulties, lambda) == 0 {
        let q = config.r_init.max(config.min_select_ratio);
        lambda = nearest_rank_quantile(sorted_difficulties, q)?;
        floored = true;
    }

    Ok(AgeUpdateTrace {
        gamma_t,
        sigma_t: inputs.sigma,
        s_t,
        delta_mu,
        lambda_proposed,
        capped,
        floored,
        lambda_next: lambda,
    })
}

/// Advances the scheduler by one epoch.
///
/// `r_t` is recomputed against the current difficulties, `mu_t` is their
/// mean and `mu_{t-1}` is the mean stored in `state`.
pub fn update_lambda(
    state: &AgeState,
    difficulties: &[f64],
    config: &SelectorConfig,
) -> Result<(AgeState, AgeUpdateTrace)> {
    if difficulties.is_empty() {
        return Err(Error::EmptyDifficulties);
    }
    let sorted = stats::sorted(difficulties);
    let mu = stats::mean(difficulties)?;
    let (_, sigma) = stability_factor(difficulties, state.lambda, config)?;
    let inputs = UpdateInputs {
        lambda: state.lambda,
        selected_ratio: fraction_at_or_below(&sorted, state.lambda),
        mean_difficulty: mu,
        prev_mean_difficulty: state.mean_difficulty,
        sigma,
    };
    let trace = propose_lambda(inputs, &sorted, config)?;
    let next = AgeState {
        lambda: trace.lambda_next,
        epoch: state.epoch + 1,
        selected_ratio: fraction_at_or_below(&sorted, trace.lambda_next),
        mean_difficulty: mu,
        prev_mean_difficulty: state.mean_difficulty,
    };
    Ok((next, trace))
}
