//! Small deterministic numeric helpers shared by the scheduler and evaluation.

use crate::error::{Error, Result};

// Absorbs float noise in `q * n` (e.g. 0.4 + 0.1 = 0.5000000000000001)
// without ever moving a genuinely fractional rank.
const RANK_EPS: f64 = 1e-9;

/// Returns an ascending copy of `values` (total order, NaN last).
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Nearest-rank (lower) quantile: the element at index `ceil(q * n) - 1`.
///
/// The result is always a member of `sorted_values`, which is what lets the
/// scheduler's cap land on an attained difficulty.
pub fn nearest_rank_quantile(sorted_values: &[f64], q: f64) -> Result<f64> {
    if sorted_values.is_empty() {
        return Err(Error::EmptyDifficulties);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::QuantileOutOfRange(q));
    }
    let n = sorted_values.len();
    let rank = (q * n as f64 - RANK_EPS).ceil().max(1.0) as usize;
    Ok(sorted_values[rank.min(n) - 1])
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("mean of empty sequence"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Population standard deviation (divides by n).
pub fn population_std(values: &[f64]) -> Result<f64> {
    let mu = mean(values)?;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64;
    Ok(var.sqrt())
}

/// Number of elements `<= threshold` in an ascending slice.
pub fn count_at_or_below(sorted_values: &[f64], threshold: f64) -> usize {
    sorted_values.partition_point(|&d| d <= threshold)
}

/// Fraction of elements `<= threshold` in an ascending slice; 0 for an empty slice.
pub fn fraction_at_or_below(sorted_values: &[f64], threshold: f64) -> f64 {
    if sorted_values.is_empty() {
        return 0.0;
    }
    count_at_or_below(sorted_values, threshold) as f64 / sorted_values.len() as f64
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput("spearman needs at least two points"));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let ma = mean(&ra)?;
    let mb = mean(&rb)?;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va.sqrt() * vb.sqrt()))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}
