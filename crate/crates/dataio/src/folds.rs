//! Patient-grouped k-fold assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use numeric_core::rng::seeded_rng;

use crate::error::DataError;
use crate::types::{FoldAssignment, StudyRecord};

/// Shuffles patients by seed, then deals each patient to the currently
/// smallest fold (ties to the lowest index). Every study follows its
/// patient, and fold sizes in studies differ by at most the largest
/// studies-per-patient count. With single-study patients this reduces to
/// a plain round-robin deal.
pub fn grouped_kfold(
    records: &[StudyRecord],
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, DataError> {
    if k < 2 {
        return Err(DataError::Argument(format!("k must be >= 2, got {k}")));
    }
    // Patients in order of first appearance, each with its study ids.
    let mut order: Vec<&str> = Vec::new();
    let mut by_patient: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in records {
        let entry = by_patient.entry(r.patient_id.as_str()).or_default();
        if entry.is_empty() {
            order.push(r.patient_id.as_str());
        }
        entry.push(r.study_id.as_str());
    }
    if order.len() < k {
        return Err(DataError::Argument(format!(
            "{} distinct patients cannot fill {} folds",
            order.len(),
            k
        )));
    }

    let mut rng = seeded_rng(seed);
    order.shuffle(&mut rng);

    let mut fold_sizes = vec![0usize; k];
    let mut assignment: BTreeMap<String, usize> = BTreeMap::new();
    for patient in order {
        let fold = fold_sizes
            .iter()
            .enumerate()
            .min_by_key(|(idx, &size)| (size, *idx))
            .map(|(idx, _)| idx)
            .expect("k >= 2");
        let studies = &by_patient[patient];
        fold_sizes[fold] += studies.len();
        for study in studies {
            assignment.insert((*study).to_string(), fold);
        }
    }
    Ok(FoldAssignment::new(k, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ClassLabel, Heatmap, Report, StudyRecord};

    fn record(study: &str, patient: &str) -> StudyRecord {
        StudyRecord {
            study_id: study.to_string(),
            patient_id: patient.to_string(),
            label: ClassLabel::Normal,
            image: Heatmap::new(2, 2),
            report: Report {
                indication: String::new(),
                findings: String::new(),
                impression: String::new(),
            },
            fixations: Vec::new(),
            temporal: vec![Heatmap::new(2, 2)],
            static_map: Heatmap::new(2, 2),
        }
    }

    #[test]
    fn ten_single_study_patients_make_five_folds_of_two() {
        let records: Vec<StudyRecord> = (0..10)
            .map(|i| record(&format!("s{i}"), &format!("p{i}")))
            .collect();
        let folds = grouped_kfold(&records, 5, 3).unwrap();
        let mut counts = vec![0usize; 5];
        for (_, f) in folds.iter() {
            counts[f] += 1;
        }
        assert_eq!(counts, vec![2; 5]);
    }

    #[test]
    fn rejects_fewer_patients_than_folds() {
        let records = vec![record("s0", "p0"), record("s1", "p0"), record("s2", "p1")];
        assert!(matches!(
            grouped_kfold(&records, 3, 0),
            Err(DataError::Argument(_))
        ));
        assert!(matches!(
            grouped_kfold(&records, 1, 0),
            Err(DataError::Argument(_))
        ));
    }

    #[test]
    fn patients_never_split_across_folds() {
        let records: Vec<StudyRecord> = (0..30)
            .map(|i| record(&format!("s{i}"), &format!("p{}", i / 3)))
            .collect();
        for seed in 0..20 {
            let folds = grouped_kfold(&records, 4, seed).unwrap();
            for r in &records {
                let patient_folds: Vec<usize> = records
                    .iter()
                    .filter(|o| o.patient_id == r.patient_id)
                    .map(|o| folds.fold_of(&o.study_id).unwrap())
                    .collect();
                assert!(patient_folds.windows(2).all(|w| w[0] == w[1]));
            }
            assert_eq!(folds.len(), records.len());
        }
    }
}
