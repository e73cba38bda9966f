//! The rank-based AUC against an independent brute-force pair-counting
//! oracle, including forced ties, plus the metric's invariances.

use rand::Rng;

use evalx::binary_auc;

/// Explicit Mann-Whitney pair count: 1 per won pair, 0.5 per tie.
fn pair_count_oracle(scores: &[f64], labels: &[bool]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0u64;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                credit += 1.0;
            } else if scores[i] == scores[j] {
                credit += 0.5;
            }
        }
    }
    credit / pairs as f64
}

fn random_instance(rng: &mut impl Rng, force_ties: bool) -> (Vec<f64>, Vec<bool>) {
    let n = rng.gen_range(2..=50);
    loop {
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if labels.iter().any(|&l| l) && labels.iter().any(|&l| !l) {
            let scores: Vec<f64> = (0..n)
                .map(|_| {
                    if force_ties {
                        // coarse grid forces score collisions
                        (rng.gen_range(0..5) as f64) / 4.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect();
            return (scores, labels);
        }
    }
}

#[test]
fn matches_brute_force_pair_counting_on_200_instances() {
    let mut rng = numeric_core::rng::seeded_rng(0xac);
    for trial in 0..200 {
        let force_ties = trial % 2 == 0; // at least half the instances carry ties
        let (scores, labels) = random_instance(&mut rng, force_ties);
        let fast = binary_auc(&scores, &labels).unwrap();
        let oracle = pair_count_oracle(&scores, &labels);
        assert!(
            (fast - oracle).abs() < 1e-12,
            "trial {trial}: {fast} vs {oracle}"
        );
    }
}

#[test]
fn invariant_under_strictly_monotone_transforms() {
    let mut rng = numeric_core::rng::seeded_rng(0xad);
    for _ in 0..50 {
        let (scores, labels) = random_instance(&mut rng, true);
        let base = binary_auc(&scores, &labels).unwrap();
        let exped: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        let affine: Vec<f64> = scores.iter().map(|s| 3.5 * s + 11.0).collect();
        assert!((binary_auc(&exped, &labels).unwrap() - base).abs() < 1e-12);
        assert!((binary_auc(&affine, &labels).unwrap() - base).abs() < 1e-12);
    }
}

#[test]
fn complement_labels_sum_to_one() {
    let mut rng = numeric_core::rng::seeded_rng(0xae);
    for _ in 0..50 {
        let (scores, labels) = random_instance(&mut rng, true);
        let a = binary_auc(&scores, &labels).unwrap();
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let b = binary_auc(&scores, &flipped).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }
}
