//! Cross-validation harness on a small generated dataset: report
//! structure, determinism, patient purity, and attention-map scoring.

use dataio::{generate_synthetic_dataset, GenerateConfig};
use evalx::{
    run_cv_experiment, CvSettings, ExperimentSpec, TextSelection,
};
use models::{ArchitectureId, ModelConfig};
use textembed::{build_vocabulary, tokenize, train_skipgram, SkipgramConfig};

fn tiny_dataset() -> (tempfile::TempDir, dataio::DatasetManifest) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GenerateConfig {
        n_studies: 36,
        image_size: 32,
        corpus_reports: 120,
        ..GenerateConfig::default()
    };
    let generated = generate_synthetic_dataset(&cfg, 31, dir.path()).unwrap();
    (dir, generated)
}

fn tiny_settings(seed: u64) -> CvSettings {
    CvSettings {
        k: 3,
        seed,
        base: ModelConfig {
            image_size: 32,
            channels: [4, 6, 8, 10],
            img_feature: 8,
            text_feature: 8,
            lstm_hidden: 4,
            text_dim: 16,
            epochs: 2,
            batch_size: 8,
            ..ModelConfig::default()
        },
        save_params_dir: None,
    }
}

fn tiny_embeddings(generated: &dataio::DatasetManifest) -> textembed::EmbeddingModel {
    let corpus: Vec<Vec<String>> = std::fs::read_to_string(&generated.corpus_path)
        .unwrap()
        .lines()
        .map(tokenize)
        .collect();
    let vocab = build_vocabulary(&corpus, 2).unwrap();
    let cfg = SkipgramConfig {
        dim: 16,
        epochs: 2,
        ..SkipgramConfig::default()
    };
    train_skipgram(&corpus, &vocab, &cfg, 9).unwrap().0
}

#[test]
fn image_experiment_has_k_fold_rows_and_is_deterministic() {
    let (_dir, generated) = tiny_dataset();
    let spec = ExperimentSpec {
        id: "img".into(),
        arch: ArchitectureId::Img,
        text: None,
        heatmap_loss: false,
    };
    let settings = tiny_settings(5);
    let a = run_cv_experiment(&spec, &generated.studies, &generated.boxes, None, &settings)
        .unwrap();
    assert_eq!(a.auc.per_fold.len(), 3);
    assert!(a.overlap.is_none());
    let expected_macro = (a.auc.average.normal + a.auc.average.chf + a.auc.average.pneumonia) / 3.0;
    assert!((a.auc.average.macro_avg - expected_macro).abs() < 1e-12);
    for fold in &a.auc.per_fold {
        for v in [fold.normal, fold.chf, fold.pneumonia] {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    let b = run_cv_experiment(&spec, &generated.studies, &generated.boxes, None, &settings)
        .unwrap();
    for (x, y) in a.auc.per_fold.iter().zip(&b.auc.per_fold) {
        assert_eq!(x.macro_avg.to_bits(), y.macro_avg.to_bits());
    }

    // a different seed moves the numbers
    let c = run_cv_experiment(
        &spec,
        &generated.studies,
        &generated.boxes,
        None,
        &tiny_settings(6),
    )
    .unwrap();
    assert_ne!(
        a.auc.average.macro_avg.to_bits(),
        c.auc.average.macro_avg.to_bits()
    );
}

#[test]
fn text_experiment_requires_embeddings() {
    let (_dir, generated) = tiny_dataset();
    let spec = ExperimentSpec {
        id: "text".into(),
        arch: ArchitectureId::Text,
        text: Some(TextSelection::FullReport),
        heatmap_loss: false,
    };
    let err = run_cv_experiment(
        &spec,
        &generated.studies,
        &generated.boxes,
        None,
        &tiny_settings(5),
    );
    assert!(err.is_err());

    let embeddings = tiny_embeddings(&generated);
    let ok = run_cv_experiment(
        &spec,
        &generated.studies,
        &generated.boxes,
        Some(&embeddings),
        &tiny_settings(5),
    )
    .unwrap();
    assert_eq!(ok.auc.per_fold.len(), 3);
}

#[test]
fn unet_experiment_scores_annotated_studies() {
    let (_dir, generated) = tiny_dataset();
    let spec = ExperimentSpec {
        id: "unet".into(),
        arch: ArchitectureId::GazeSupervisedUnet,
        text: None,
        heatmap_loss: true,
    };
    let result = run_cv_experiment(
        &spec,
        &generated.studies,
        &generated.boxes,
        None,
        &tiny_settings(5),
    )
    .unwrap();
    let overlap = result.overlap.expect("unet produces an overlap report");
    // every annotated study lands in exactly one evaluation fold
    assert_eq!(overlap.per_study.len(), generated.boxes.len());
    assert_eq!(result.attention_maps.len(), generated.boxes.len());
    for (_, v) in &overlap.per_study {
        assert!((0.0..=1.0).contains(v));
    }
    let mean = overlap.per_study.iter().map(|(_, v)| v).sum::<f64>()
        / overlap.per_study.len() as f64;
    assert!((overlap.mean - mean).abs() < 1e-12);
    // maps are on the 0..255 scale at image resolution
    let (_, map) = &result.attention_maps[0];
    assert_eq!((map.width(), map.height()), (32, 32));
}
