//! Classification metrics: accuracy, weighted/macro F1, and the
//! degraded-condition retention ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// L x L confusion counts; rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(label_count: usize) -> Self {
        ConfusionMatrix { counts: vec![vec![0; label_count]; label_count] }
    }

    pub fn label_count(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, truth: usize, pred: usize) -> Result<()> {
        let l = self.label_count();
        if truth >= l || pred >= l {
            return Err(Error::Domain(format!(
                "label index out of range: truth {truth}, pred {pred}, labels {l}"
            )));
        }
        self.counts[truth][pred] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub n: u64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

impl MetricsReport {
    /// Standard definitions over a confusion matrix; 0/0 cases map to 0.
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let l = cm.label_count();
        let total = cm.total();
        let mut trace = 0u64;
        let mut per_class = Vec::with_capacity(l);
        let mut macro_sum = 0.0;
        let mut weighted_sum = 0.0;
        for c in 0..l {
            trace += cm.counts[c][c];
            let tp = cm.counts[c][c] as f64;
            let support: u64 = cm.counts[c].iter().sum();
            let predicted: u64 = (0..l).map(|r| cm.counts[r][c]).sum();
            let precision = ratio(tp, predicted as f64);
            let recall = ratio(tp, support as f64);
            let f1 = ratio(2.0 * precision * recall, precision + recall);
            macro_sum += f1;
            weighted_sum += support as f64 * f1;
            per_class.push(ClassMetrics { label: c, precision, recall, f1, support });
        }
        MetricsReport {
            accuracy: ratio(trace as f64, total as f64),
            weighted_f1: ratio(weighted_sum, total as f64),
            macro_f1: ratio(macro_sum, l as f64),
            per_class,
            n: total,
        }
    }
}

/// Score aligned prediction/truth streams.
pub fn score(preds: &[usize], truths: &[usize], label_count: usize) -> Result<MetricsReport> {
    if preds.len() != truths.len() {
        return Err(Error::Alignment { left: preds.len(), right: truths.len() });
    }
    let mut cm = ConfusionMatrix::new(label_count);
    for (&p, &t) in preds.iter().zip(truths) {
        cm.record(t, p)?;
    }
    Ok(MetricsReport::from_confusion(&cm))
}

/// Performance retention under degraded conditions, as a percentage of the
/// complete-modality accuracy: `100 * mean(missing, low_quality) / complete`.
pub fn retention(acc_complete: f64, acc_missing: f64, acc_lowq: f64) -> Result<f64> {
    if acc_complete <= 0.0 {
        return Err(Error::Domain("complete-condition accuracy must be positive".into()));
    }
    Ok(100.0 * ((acc_missing + acc_lowq) / 2.0) / acc_complete)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_score_one() {
        let truths: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let report = score(&truths, &truths, 4).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.macro_f1, 1.0);
        assert_eq!(report.weighted_f1, 1.0);
    }

    #[test]
    fn degenerate_single_class_predictions() {
        // All predictions class 0 on a balanced 4-class set of 100.
        let truths: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let preds = vec![0usize; 100];
        let report = score(&preds, &truths, 4).unwrap();
        assert!((report.accuracy - 0.25).abs() < 1e-12);
        assert!((report.per_class[0].f1 - 0.4).abs() < 1e-12);
        assert!((report.macro_f1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_class_yields_zero_f1() {
        let truths = vec![0, 0, 1, 1];
        let preds = vec![0, 0, 1, 1];
        let report = score(&preds, &truths, 4).unwrap();
        assert_eq!(report.per_class[2].f1, 0.0);
        assert_eq!(report.per_class[3].f1, 0.0);
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(score(&[0], &[0, 1], 4), Err(Error::Alignment { .. })));
    }

    #[test]
    fn retention_reproduces_reference_rows() {
        assert!((retention(68.4, 64.2, 62.0).unwrap() - 92.3).abs() < 0.05);
        assert!((retention(60.2, 54.1, 51.6).unwrap() - 87.8).abs() < 0.05);
        assert!((retention(50.0, 50.0, 50.0).unwrap() - 100.0).abs() < 1e-12);
        assert!(retention(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn balanced_supports_equalize_macro_and_weighted() {
        // Balanced truth: macro F1 equals weighted F1 to 1e-12.
        let truths: Vec<usize> = (0..400).map(|i| i % 4).collect();
        let preds: Vec<usize> = truths.iter().map(|&t| if t == 3 { 0 } else { t }).collect();
        let report = score(&preds, &truths, 4).unwrap();
        assert!((report.macro_f1 - report.weighted_f1).abs() < 1e-12);
        assert!(report.macro_f1 <= 1.0 && report.weighted_f1 <= 1.0);
    }

    #[test]
    fn score_is_permutation_invariant() {
        let truths = vec![0, 1, 2, 3, 0, 1, 2, 2];
        let preds = vec![0, 1, 1, 3, 2, 1, 2, 0];
        let a = score(&preds, &truths, 4).unwrap();
        let mut pairs: Vec<(usize, usize)> = preds.into_iter().zip(truths).collect();
        pairs.reverse();
        pairs.swap(0, 3);
        let (p2, t2): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let b = score(&p2, &t2, 4).unwrap();
        assert_eq!(a, b);
    }
}
