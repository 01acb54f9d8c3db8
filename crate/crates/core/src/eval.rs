//! Confusion-matrix metrics, ranked Top-N F1, threshold sweeps and difficulty
//! histograms.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DifficultyRecord, Label};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub threshold: f64,
    pub top_n: Vec<usize>,
    pub tau_grid: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            threshold: 0.5,
            top_n: vec![250, 500, 1000],
            tau_grid: default_tau_grid(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config("eval.threshold", "must be in [0, 1]"));
        }
        if self.top_n.contains(&0) {
            return Err(Error::config("eval.top_n", "values must be positive"));
        }
        if self.tau_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::config("eval.tau_grid", "values must be in [0, 1]"));
        }
        Ok(())
    }
}

/// 0.1, 0.2, ..., 0.9
pub fn default_tau_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub counts: ConfusionCounts,
    pub acc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Tallies counts with `p_vul >= threshold` as the positive prediction.
pub fn confusion(p_vul: &[f64], labels: &[Label], threshold: f64) -> Result<ConfusionCounts> {
    check_len(p_vul.len(), labels.len())?;
    let mut c = ConfusionCounts::default();
    for (&p, &y) in p_vul.iter().zip(labels) {
        match (p >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn metrics(counts: ConfusionCounts) -> Result<MetricReport> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyInput("no evaluated samples"));
    }
    let (tp, fp, tn, fn_) = (
        counts.tp as f64,
        counts.fp as f64,
        counts.tn as f64,
        counts.fn_ as f64,
    );
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    let mcc = if factors.contains(&0.0) {
        0.0
    } else {
        // product of square roots avoids overflowing the u64-range product
        let den = factors.iter().map(|f| f.sqrt()).product::<f64>();
        ((tp * tn - fp * fn_) / den).clamp(-1.0, 1.0)
    };
    Ok(MetricReport {
        counts,
        acc: (tp + tn) / total as f64,
        precision,
        recall,
        f1,
        mcc,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopNReport {
    pub n: usize,
    pub f1: f64,
    pub precision_at_n: f64,
    pub recall_at_n: f64,
}

/// Forces the `n` highest-ranked samples positive and everything else
/// negative, then scores the whole set. Ties in `p_vul` are broken by id.
pub fn top_n_f1<S: AsRef<str>>(
    p_vul: &[f64],
    labels: &[Label],
    ids: &[S],
    n: usize,
) -> Result<TopNReport> {
    check_len(p_vul.len(), labels.len())?;
    check_len(ids.len(), labels.len())?;
    if n == 0 || n > p_vul.len() {
        return Err(Error::Data(format!(
            "top-n of {n} requested from {} samples",
            p_vul.len()
        )));
    }
    let mut order: Vec<usize> = (0..p_vul.len()).collect();
    order.sort_by(|&a, &b| match p_vul[b].total_cmp(&p_vul[a]) {
        Ordering::Equal => ids[a].as_ref().cmp(ids[b].as_ref()),
        o => o,
    });
    let hits = order[..n].iter().filter(|&&i| labels[i] == 1).count() as u64;
    let positives = labels.iter().filter(|&&y| y == 1).count() as u64;
    let counts = ConfusionCounts {
        tp: hits,
        fp: n as u64 - hits,
        fn_: positives - hits,
        tn: (p_vul.len() - n) as u64 - (positives - hits),
    };
    let m = metrics(counts)?;
    Ok(TopNReport {
        n,
        f1: m.f1,
        precision_at_n: m.precision,
        recall_at_n: m.recall,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub report: MetricReport,
}

pub fn threshold_sweep(p_vul: &[f64], labels: &[Label], grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|&threshold| {
            Ok(SweepRow {
                threshold,
                report: metrics(confusion(p_vul, labels, threshold)?)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("threshold,acc,precision,recall,f1,mcc\n");
    for r in rows {
        let m = &r.report;
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.threshold, m.acc, m.precision, m.recall, m.f1, m.mcc
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramFilter {
    All,
    PositivesOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Equal-width bins over `[0, 1]`; a difficulty of exactly 1 lands in the last bin.
pub fn difficulty_histogram(
    records: &[DifficultyRecord],
    bins: usize,
    filter: HistogramFilter,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::config("bins", "must be ≥ 1"));
    }
    let mut counts = vec![0u64; bins];
    for r in records {
        if filter == HistogramFilter::PositivesOnly && r.label != 1 {
            continue;
        }
        let b = ((r.difficulty * bins as f64).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram {
        bin_edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cc(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[0.9], &[1], 0.5).unwrap().tp, 1);
        assert_eq!(confusion(&[0.5], &[0], 0.5).unwrap().fp, 1);
        assert_eq!(
            confusion(&[], &[], 0.5).unwrap(),
            ConfusionCounts::default()
        );
        assert!(confusion(&[0.1], &[], 0.5).is_err());
    }

    #[test]
    fn metric_examples() {
        let m = metrics(cc(1, 0, 1, 0)).unwrap();
        assert_eq!(
            (m.acc, m.precision, m.recall, m.f1, m.mcc),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );

        let m = metrics(cc(50, 10, 100, 20)).unwrap();
        assert!((m.precision - 0.8333).abs() < 1e-4);
        assert!((m.recall - 0.7143).abs() < 1e-4);
        assert!((m.f1 - 0.7692).abs() < 1e-4);
        assert!((m.mcc - 0.6447).abs() < 1e-4);

        let m = metrics(cc(0, 0, 7, 3)).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.mcc), (0.0, 0.0, 0.0, 0.0));

        assert_eq!(metrics(cc(0, 4, 0, 6)).unwrap().mcc, -1.0);
        assert!(metrics(cc(0, 0, 0, 0)).is_err());
    }

    #[test]
    fn top_n_examples() {
        let p = [0.9, 0.8, 0.3, 0.2, 0.1];
        let y = [1, 1, 0, 1, 0];
        let ids = ["a", "b", "c", "d", "e"];
        let r = top_n_f1(&p, &y, &ids, 2).unwrap();
        assert!((r.f1 - 0.8).abs() < 1e-12);
        assert_eq!(r.precision_at_n, 1.0);
        assert!((r.recall_at_n - 2.0 / 3.0).abs() < 1e-12);

        let r = top_n_f1(&[0.1, 0.2, 0.3], &[1, 1, 1], &ids[..3], 3).unwrap();
        assert_eq!(r.f1, 1.0);
        let r = top_n_f1(&[0.1, 0.2, 0.3], &[0, 0, 0], &ids[..3], 2).unwrap();
        assert_eq!(r.f1, 0.0);
        assert!(top_n_f1(&[0.1], &[1], &["a"], 2).is_err());
    }

    #[test]
    fn top_n_ties_break_by_id() {
        let p = [0.5, 0.5, 0.5];
        let y = [0, 1, 0];
        let r = top_n_f1(&p, &y, &["c", "a", "b"], 1).unwrap();
        assert_eq!(r.precision_at_n, 1.0);
        let r = top_n_f1(&p, &y, &["a", "c", "b"], 1).unwrap();
        assert_eq!(r.precision_at_n, 0.0);
    }

    #[test]
    fn sweep_endpoints_and_csv() {
        let p = [0.2, 0.7, 0.9, 0.4];
        let y = [0, 1, 1, 1];
        let rows = threshold_sweep(&p, &y, &[0.0, 1.0]).unwrap();
        assert_eq!(rows[0].report.recall, 1.0);
        assert_eq!(rows[1].report.recall, 0.0);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("threshold,acc,precision,recall,f1,mcc\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    fn rec(d: f64, label: Label) -> DifficultyRecord {
        DifficultyRecord {
            sample_id: String::new(),
            label,
            conf: 0.0,
            difficulty: d,
            correct: true,
        }
    }

    #[test]
    fn histogram_examples() {
        let recs = vec![rec(0.5, 0); 4];
        let h = difficulty_histogram(&recs, 2, HistogramFilter::All).unwrap();
        assert_eq!(h.counts, vec![0, 4]);
        assert_eq!(h.bin_edges, vec![0.0, 0.5, 1.0]);
        let h = difficulty_histogram(&[], 3, HistogramFilter::All).unwrap();
        assert_eq!(h.counts, vec![0, 0, 0]);
        let h = difficulty_histogram(
            &[rec(1.0, 1), rec(0.0, 0)],
            4,
            HistogramFilter::PositivesOnly,
        )
        .unwrap();
        assert_eq!(h.counts, vec![0, 0, 0, 1]);
        assert!(difficulty_histogram(&[], 0, HistogramFilter::All).is_err());
    }

    #[test]
    fn histogram_uniform_chi_square() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let recs: Vec<_> = (0..100_000).map(|_| rec(rng.gen::<f64>(), 0)).collect();
        let h = difficulty_histogram(&recs, 10, HistogramFilter::All).unwrap();
        let expected = 10_000.0;
        let chi2: f64 = h
            .counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 9 degrees of freedom; 0.999 quantile is 27.88
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    proptest! {
        #[test]
        fn metric_identities(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
            prop_assume!(tp + fp + tn + fn_ > 0);
            let m = metrics(cc(tp, fp, tn, fn_)).unwrap();
            prop_assert!((-1.0..=1.0).contains(&m.mcc));
            let alt = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
            prop_assert!((m.f1 - alt).abs() < 1e-12);
        }

        #[test]
        fn sweep_is_monotone(
            data in prop::collection::vec((0.0f64..=1.0, 0u8..=1), 1..200),
        ) {
            let (p, y): (Vec<f64>, Vec<u8>) = data.into_iter().unzip();
            let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
            let rows = threshold_sweep(&p, &y, &grid).unwrap();
            for w in rows.windows(2) {
                prop_assert!(w[1].report.recall <= w[0].report.recall);
                prop_assert!(w[1].report.counts.fp <= w[0].report.counts.fp);
            }
        }

        #[test]
        fn top_all_equals_threshold_zero(
            data in prop::collection::vec((0.0f64..=1.0, 0u8..=1), 1..100),
        ) {
            let (p, y): (Vec<f64>, Vec<u8>) = data.into_iter().unzip();
            let ids: Vec<String> = (0..p.len()).map(|i| format!("{i:04}")).collect();
            let top = top_n_f1(&p, &y, &ids, p.len()).unwrap();
            let at_zero = metrics(confusion(&p, &y, 0.0).unwrap()).unwrap();
            prop_assert!((top.f1 - at_zero.f1).abs() < 1e-15);
        }
    }
}
