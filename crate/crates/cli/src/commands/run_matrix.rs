//! Runs the full experiment matrix: embedding training, nine
//! classification experiments, six explainability rows, and the summary
//! tables. Experiments are independent and may run on several threads;
//! per-experiment seeds are fixed by matrix position, so the outputs do
//! not depend on scheduling.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use evalx::{
    experiment_seed, run_cv_experiment, standard_matrix, write_overlap_summary_csv, CvSettings,
    ExperimentResult, MatrixEntry, OverlapSummaryRow, OVERLAP_SUMMARY_PAIRS,
};
use models::{ArchitectureId, ModelConfig};
use numeric_core::rng::derive_seed;
use numeric_core::AdamConfig;
use textembed::{
    pca_project, save_embeddings, sentence_embedding, write_scatter_svg, SkipgramConfig,
};

use crate::commands::common::{
    emit_experiment, load_data, train_embeddings_from_corpus, write_loss_trace, LoadedData,
};
use crate::config::{ensure_dir, out_dir, parse_channels, FlatConfig, Resolved};
use crate::error::CliError;

const SALT_EMBED: u64 = 0xE3BD;

#[derive(Args, Debug)]
pub struct RunMatrixArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest (manifest.csv); corpus.txt must sit beside it
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub channels: Option<String>,
    #[arg(long)]
    pub img_feature: Option<usize>,
    #[arg(long)]
    pub text_feature: Option<usize>,
    #[arg(long)]
    pub lstm_hidden: Option<usize>,
    /// Epoch overrides per architecture family
    #[arg(long)]
    pub epochs_text: Option<usize>,
    #[arg(long)]
    pub epochs_cnn: Option<usize>,
    #[arg(long)]
    pub epochs_temporal: Option<usize>,
    #[arg(long)]
    pub epochs_unet: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub embed_window: Option<usize>,
    #[arg(long)]
    pub embed_negatives: Option<usize>,
    #[arg(long)]
    pub embed_epochs: Option<usize>,
    #[arg(long)]
    pub embed_min_count: Option<u64>,
    #[arg(long)]
    pub embed_lr: Option<f64>,
    /// Concurrent experiments
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Attention composites per explainability experiment
    #[arg(long)]
    pub composites: Option<usize>,
    /// Persist every fold's trained parameters as GMDL1 files
    #[arg(long)]
    pub save_models: Option<bool>,
}

struct MatrixPlan {
    out: PathBuf,
    seed: u64,
    k: usize,
    base: ModelConfig,
    epochs_text: usize,
    epochs_cnn: usize,
    epochs_temporal: usize,
    epochs_unet: usize,
    embed: SkipgramConfig,
    embed_min_count: u64,
    jobs: usize,
    composites: usize,
    save_models: bool,
}

fn entry_epochs(plan: &MatrixPlan, entry: &MatrixEntry) -> usize {
    match entry.spec.arch {
        ArchitectureId::Text => plan.epochs_text,
        ArchitectureId::HmapTemporal | ArchitectureId::TemporalImgFusion => plan.epochs_temporal,
        ArchitectureId::GazeSupervisedUnet => plan.epochs_unet,
        _ => plan.epochs_cnn,
    }
}

pub fn run(args: RunMatrixArgs) -> Result<(), CliError> {
    let mut file = match &args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolved = Resolved::default();

    let dataset = resolved
        .optional(&mut file, "dataset", args.dataset.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::data("missing dataset manifest path (--dataset)"))?;
    let out = out_dir(&mut file, args.out, "matrix")?;
    let seed = resolved.value(&mut file, "seed", args.seed, 7)?;
    let k = resolved.value(&mut file, "k", args.k, 5)?;
    let batch_size = resolved.value(&mut file, "batch_size", args.batch_size, 16)?;
    let lr = resolved.value(&mut file, "lr", args.lr, 1e-3)?;
    let channels_raw =
        resolved.value(&mut file, "channels", args.channels, "8,16,32,64".to_string())?;
    let img_feature = resolved.value(&mut file, "img_feature", args.img_feature, 32)?;
    let text_feature = resolved.value(&mut file, "text_feature", args.text_feature, 64)?;
    let lstm_hidden = resolved.value(&mut file, "lstm_hidden", args.lstm_hidden, 32)?;
    let epochs_text = resolved.value(
        &mut file,
        "epochs_text",
        args.epochs_text,
        evalx::matrix::family_epochs(ArchitectureId::Text),
    )?;
    let epochs_cnn = resolved.value(
        &mut file,
        "epochs_cnn",
        args.epochs_cnn,
        evalx::matrix::family_epochs(ArchitectureId::Img),
    )?;
    let epochs_temporal = resolved.value(
        &mut file,
        "epochs_temporal",
        args.epochs_temporal,
        evalx::matrix::family_epochs(ArchitectureId::HmapTemporal),
    )?;
    let epochs_unet = resolved.value(
        &mut file,
        "epochs_unet",
        args.epochs_unet,
        evalx::matrix::family_epochs(ArchitectureId::GazeSupervisedUnet),
    )?;
    let embed_dim = resolved.value(&mut file, "embed_dim", args.embed_dim, 150)?;
    let embed_window = resolved.value(&mut file, "embed_window", args.embed_window, 5)?;
    let embed_negatives =
        resolved.value(&mut file, "embed_negatives", args.embed_negatives, 5)?;
    let embed_epochs = resolved.value(&mut file, "embed_epochs", args.embed_epochs, 15)?;
    let embed_min_count =
        resolved.value(&mut file, "embed_min_count", args.embed_min_count, 2)?;
    let embed_lr = resolved.value(&mut file, "embed_lr", args.embed_lr, 0.025)?;
    let jobs = resolved.value(&mut file, "jobs", args.jobs, 1)?;
    let composites = resolved.value(&mut file, "composites", args.composites, 3)?;
    let save_models = resolved.value(&mut file, "save_models", args.save_models, false)?;
    file.reject_unknown_keys()?;

    let data = load_data(&dataset)?;
    let t_frames = data.records.iter().map(|r| r.temporal.len()).max().unwrap_or(8);
    let plan = MatrixPlan {
        out: out.clone(),
        seed,
        k,
        base: ModelConfig {
            arch: ArchitectureId::Img,
            image_size: data.image_size,
            channels: parse_channels(&channels_raw)?,
            img_feature,
            text_feature,
            lstm_hidden,
            text_dim: embed_dim,
            t_frames,
            epochs: 0,
            batch_size,
            optimizer: AdamConfig {
                lr,
                ..AdamConfig::default()
            },
            heatmap_loss: false,
            unet_text: false,
            seed: 0,
        },
        epochs_text,
        epochs_cnn,
        epochs_temporal,
        epochs_unet,
        embed: SkipgramConfig {
            dim: embed_dim,
            window: embed_window,
            negatives: embed_negatives,
            epochs: embed_epochs,
            start_lr: embed_lr,
        },
        embed_min_count,
        jobs: jobs.max(1),
        composites,
        save_models,
    };

    ensure_dir(&out)?;
    execute(&plan, &data)?;
    resolved.write_echo(&out)?;
    println!("matrix complete under {}", out.display());
    Ok(())
}

fn execute(plan: &MatrixPlan, data: &LoadedData) -> Result<(), CliError> {
    // embeddings trained once on the disjoint corpus
    let corpus_path = data.dataset_dir.join("corpus.txt");
    let training = train_embeddings_from_corpus(
        &corpus_path,
        &plan.embed,
        plan.embed_min_count,
        derive_seed(plan.seed, SALT_EMBED),
    )?;
    save_embeddings(&plan.out.join("embeddings.txt"), &training.model)?;
    write_loss_trace(&plan.out.join("embed_loss.csv"), &training.epoch_losses)?;

    // sentence-embedding projections per report section
    let class_codes: Vec<u8> = data.records.iter().map(|r| r.label.code()).collect();
    if data.records.len() >= 2 {
        for (name, title, full) in [
            ("pca_indication.svg", "Exam indication sentence embeddings", false),
            ("pca_full_report.svg", "Full report sentence embeddings", true),
        ] {
            let vectors: Vec<Vec<f64>> = data
                .records
                .iter()
                .map(|r| {
                    let text = if full {
                        r.report.full_text()
                    } else {
                        r.report.indication.clone()
                    };
                    sentence_embedding(&text, &training.model).vector
                })
                .collect();
            let projected = pca_project(&vectors, 2)?;
            let points: Vec<(f64, f64)> = projected.iter().map(|p| (p[0], p[1])).collect();
            write_scatter_svg(&plan.out.join(name), &points, &class_codes, title)?;
        }
    }

    let entries = standard_matrix();
    let mut results: Vec<Option<ExperimentResult>> = Vec::new();
    results.resize_with(entries.len(), || None);
    let indexed: Vec<(usize, &MatrixEntry)> = entries.iter().enumerate().collect();
    for wave in indexed.chunks(plan.jobs) {
        let mut wave_results: Vec<(usize, Result<ExperimentResult, CliError>)> =
            Vec::with_capacity(wave.len());
        if plan.jobs == 1 {
            for &(idx, entry) in wave {
                wave_results.push((idx, run_entry(plan, data, &training.model, idx, entry)));
            }
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|&(idx, entry)| {
                        let model = &training.model;
                        scope.spawn(move || (idx, run_entry(plan, data, model, idx, entry)))
                    })
                    .collect();
                for handle in handles {
                    wave_results.push(handle.join().expect("experiment thread panicked"));
                }
            });
        }
        for (idx, result) in wave_results {
            results[idx] = Some(result?);
        }
    }

    // emit per-experiment outputs in canonical order
    let mut by_id: BTreeMap<String, &ExperimentResult> = BTreeMap::new();
    for (entry, result) in entries.iter().zip(&results) {
        let result = result.as_ref().expect("all experiments ran");
        by_id.insert(entry.spec.id.clone(), result);
        let class_dir = plan.out.join("classification").join(&entry.spec.id);
        let attn_dir = plan.out.join("explainability").join(&entry.spec.id);
        if entry.classification {
            ensure_dir(&class_dir)?;
            evalx::write_auc_csv(&class_dir.join("auc.csv"), &result.auc)?;
            if !entry.spec.arch.emits_attention() {
                emit_experiment(&class_dir, result, &data.records, &data.boxes, 0)?;
            }
        }
        if entry.spec.arch.emits_attention() {
            emit_experiment(&attn_dir, result, &data.records, &data.boxes, plan.composites)?;
        }
    }

    // Table-12-style summary over the three feature combinations
    let mut summary_rows = Vec::new();
    for pair in OVERLAP_SUMMARY_PAIRS {
        let mean_of = |id: &str| -> Result<f64, CliError> {
            by_id
                .get(id)
                .and_then(|r| r.overlap.as_ref())
                .map(|o| o.mean)
                .ok_or_else(|| CliError::data(format!("experiment {id} has no overlap report")))
        };
        summary_rows.push(OverlapSummaryRow {
            input_features: pair.input_features.to_string(),
            without_heatmap_loss: mean_of(pair.without_id)?,
            with_heatmap_loss: mean_of(pair.with_id)?,
        });
    }
    write_overlap_summary_csv(&plan.out.join("overlap_summary.csv"), &summary_rows)?;

    // one-line-per-experiment AUC aggregate
    let mut auc_summary = String::from("experiment,normal,chf,pneumonia,macro_avg\n");
    for entry in entries.iter().filter(|e| e.classification) {
        let result = by_id[&entry.spec.id];
        auc_summary.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{:.4}\n",
            entry.spec.id,
            result.auc.average.normal,
            result.auc.average.chf,
            result.auc.average.pneumonia,
            result.auc.average.macro_avg,
        ));
    }
    std::fs::write(plan.out.join("auc_summary.csv"), auc_summary)
        .map_err(|e| CliError::data(format!("cannot write auc_summary.csv: {e}")))?;
    Ok(())
}

fn run_entry(
    plan: &MatrixPlan,
    data: &LoadedData,
    embeddings: &textembed::EmbeddingModel,
    idx: usize,
    entry: &MatrixEntry,
) -> Result<ExperimentResult, CliError> {
    let mut base = plan.base.clone();
    base.epochs = entry_epochs(plan, entry);
    let section = if entry.spec.arch.emits_attention() {
        "explainability"
    } else {
        "classification"
    };
    let settings = CvSettings {
        k: plan.k,
        seed: experiment_seed(plan.seed, idx),
        base,
        save_params_dir: plan
            .save_models
            .then(|| plan.out.join(section).join(&entry.spec.id).join("models")),
    };
    let uses_text = entry.spec.text.is_some();
    Ok(run_cv_experiment(
        &entry.spec,
        &data.records,
        &data.boxes,
        if uses_text { Some(embeddings) } else { None },
        &settings,
    )?)
}
