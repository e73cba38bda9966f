//! One-vs-rest ROC AUC via the Mann-Whitney statistic.

use dataio::ClassLabel;

use crate::error::EvalError;

/// Probability that a random positive outscores a random negative, with
/// half credit for ties. Computed from tie-averaged ranks in
/// O(n log n); equal to explicit pair counting.
pub fn binary_auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::Argument(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::UndefinedMetric(
            "binary AUC needs at least one positive and one negative".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));

    // tie-averaged ranks, 1-based
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Per-class one-vs-rest AUCs and their macro average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OvrAuc {
    pub normal: f64,
    pub chf: f64,
    pub pneumonia: f64,
    pub macro_avg: f64,
}

impl OvrAuc {
    pub fn by_class(&self, class: ClassLabel) -> f64 {
        match class {
            ClassLabel::Normal => self.normal,
            ClassLabel::Chf => self.chf,
            ClassLabel::Pneumonia => self.pneumonia,
        }
    }
}

/// Treats each class as its own binary problem: its probability column
/// against membership. All three classes must be present.
pub fn ovr_auc_report(probs: &[[f64; 3]], labels: &[ClassLabel]) -> Result<OvrAuc, EvalError> {
    if probs.len() != labels.len() {
        return Err(EvalError::Argument(format!(
            "{} probability rows but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    for (i, row) in probs.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) || (sum - 1.0).abs() > 1e-6 {
            return Err(EvalError::Argument(format!(
                "row {i} is not a probability distribution: {row:?}"
            )));
        }
    }
    let mut per_class = [0.0; 3];
    for class in ClassLabel::ALL {
        let idx = class.index();
        if !labels.iter().any(|&l| l == class) {
            return Err(EvalError::UndefinedMetric(format!(
                "class {} absent from the evaluation labels",
                class.name()
            )));
        }
        let scores: Vec<f64> = probs.iter().map(|row| row[idx]).collect();
        let binary: Vec<bool> = labels.iter().map(|&l| l == class).collect();
        per_class[idx] = binary_auc(&scores, &binary)?;
    }
    Ok(OvrAuc {
        normal: per_class[0],
        chf: per_class[1],
        pneumonia: per_class[2],
        macro_avg: (per_class[0] + per_class[1] + per_class[2]) / 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_three_of_four_pairs() {
        let scores = [0.1, 0.4, 0.35, 0.8];
        let labels = [false, false, true, true];
        let auc = binary_auc(&scores, &labels).unwrap();
        assert!((auc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn perfect_separation_is_one() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let labels = [true, true, false, false];
        assert_eq!(binary_auc(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn all_ties_give_half() {
        let scores = [0.5; 6];
        let labels = [true, false, true, false, false, true];
        assert!((binary_auc(&scores, &labels).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_undefined() {
        let scores = [0.1, 0.2];
        assert!(matches!(
            binary_auc(&scores, &[true, true]),
            Err(EvalError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn complement_sums_to_one() {
        let scores = [0.3, 0.1, 0.9, 0.5, 0.5, 0.2];
        let labels = [true, false, true, false, true, false];
        let a = binary_auc(&scores, &labels).unwrap();
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let b = binary_auc(&scores, &flipped).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_hot_correct_probabilities_score_perfectly() {
        let labels = [ClassLabel::Normal, ClassLabel::Chf, ClassLabel::Pneumonia];
        let probs = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let report = ovr_auc_report(&probs, &labels).unwrap();
        assert_eq!(
            (report.normal, report.chf, report.pneumonia, report.macro_avg),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn uniform_probabilities_score_half_everywhere() {
        let labels = [
            ClassLabel::Normal,
            ClassLabel::Chf,
            ClassLabel::Pneumonia,
            ClassLabel::Normal,
        ];
        let probs = [[1.0 / 3.0; 3]; 4];
        let report = ovr_auc_report(&probs, &labels).unwrap();
        assert!((report.normal - 0.5).abs() < 1e-12);
        assert!((report.chf - 0.5).abs() < 1e-12);
        assert!((report.pneumonia - 0.5).abs() < 1e-12);
        assert!((report.macro_avg - 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_class_is_undefined() {
        let labels = [ClassLabel::Normal, ClassLabel::Chf];
        let probs = [[0.5, 0.3, 0.2], [0.2, 0.6, 0.2]];
        assert!(matches!(
            ovr_auc_report(&probs, &labels),
            Err(EvalError::UndefinedMetric(_))
        ));
    }
}
