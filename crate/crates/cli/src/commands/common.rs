//! Shared pieces of the experiment-running subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dataio::{load_bounding_boxes, load_dataset, BoundingBox, StudyRecord};
use evalx::{
    write_attention_composite_svg, write_auc_csv, write_overlap_csv, ExperimentResult,
};
use textembed::{build_vocabulary, tokenize, train_skipgram, EmbeddingModel, SkipgramConfig};

use crate::config::ensure_dir;
use crate::error::CliError;

pub struct LoadedData {
    pub records: Vec<StudyRecord>,
    pub boxes: BTreeMap<String, Vec<BoundingBox>>,
    pub image_size: usize,
    pub dataset_dir: PathBuf,
}

/// Loads the manifest plus the sibling boxes.csv (when present) and
/// checks that the images form a uniform square grid.
pub fn load_data(manifest: &Path) -> Result<LoadedData, CliError> {
    if !manifest.exists() {
        return Err(CliError::data(format!(
            "dataset manifest {} does not exist",
            manifest.display()
        )));
    }
    let records = load_dataset(manifest)?;
    if records.is_empty() {
        return Err(CliError::data("dataset has no studies"));
    }
    let image_size = records[0].image.width();
    for r in &records {
        if r.image.width() != image_size || r.image.height() != image_size {
            return Err(CliError::data(format!(
                "study {} image is {}x{}, expected uniform {image_size}x{image_size}",
                r.study_id,
                r.image.width(),
                r.image.height()
            )));
        }
    }
    let dataset_dir = manifest
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    let boxes_path = dataset_dir.join("boxes.csv");
    let boxes = if boxes_path.exists() {
        load_bounding_boxes(&boxes_path)?
    } else {
        BTreeMap::new()
    };
    Ok(LoadedData {
        records,
        boxes,
        image_size,
        dataset_dir,
    })
}

pub struct EmbedTraining {
    pub model: EmbeddingModel,
    pub epoch_losses: Vec<f64>,
}

/// Tokenizes a one-report-per-line corpus and trains the skip-gram model.
pub fn train_embeddings_from_corpus(
    corpus_path: &Path,
    cfg: &SkipgramConfig,
    min_count: u64,
    seed: u64,
) -> Result<EmbedTraining, CliError> {
    if !corpus_path.exists() {
        return Err(CliError::data(format!(
            "corpus {} does not exist",
            corpus_path.display()
        )));
    }
    let text = std::fs::read_to_string(corpus_path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", corpus_path.display())))?;
    let corpus: Vec<Vec<String>> = text.lines().map(tokenize).collect();
    let vocab = build_vocabulary(&corpus, min_count)?;
    let (model, epoch_losses) = train_skipgram(&corpus, &vocab, cfg, seed)?;
    Ok(EmbedTraining {
        model,
        epoch_losses,
    })
}

pub fn write_loss_trace(path: &Path, losses: &[f64]) -> Result<(), CliError> {
    let mut out = String::from("epoch,loss\n");
    for (i, loss) in losses.iter().enumerate() {
        out.push_str(&format!("{},{loss:.6}\n", i + 1));
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Writes one experiment's artifacts under `dir`: the AUC table, per-fold
/// loss traces, and for attention models the overlap table, the maps, and
/// a few image composites.
pub fn emit_experiment(
    dir: &Path,
    result: &ExperimentResult,
    records: &[StudyRecord],
    boxes: &BTreeMap<String, Vec<BoundingBox>>,
    composites: usize,
) -> Result<(), CliError> {
    ensure_dir(dir)?;
    write_auc_csv(&dir.join("auc.csv"), &result.auc)?;
    let mut loss_csv = String::from("fold,epoch,loss\n");
    for (fold, trace) in result.fold_train_loss.iter().enumerate() {
        for (epoch, loss) in trace.iter().enumerate() {
            loss_csv.push_str(&format!("{},{},{loss:.6}\n", fold + 1, epoch + 1));
        }
    }
    std::fs::write(dir.join("train_loss.csv"), loss_csv)
        .map_err(|e| CliError::data(format!("cannot write train_loss.csv: {e}")))?;

    if let Some(overlap) = &result.overlap {
        write_overlap_csv(&dir.join("overlap.csv"), overlap)?;
        let maps_dir = dir.join("maps");
        ensure_dir(&maps_dir)?;
        for (study_id, map) in &result.attention_maps {
            dataio::pgm::write_pgm(&maps_dir.join(format!("{study_id}.pgm")), map)?;
        }
        if composites > 0 {
            let comp_dir = dir.join("composites");
            ensure_dir(&comp_dir)?;
            for (study_id, map) in result.attention_maps.iter().take(composites) {
                let record = records.iter().find(|r| &r.study_id == study_id);
                let study_boxes = boxes.get(study_id);
                if let (Some(record), Some(study_boxes)) = (record, study_boxes) {
                    write_attention_composite_svg(
                        &comp_dir.join(format!("{study_id}.svg")),
                        &record.image,
                        map,
                        study_boxes,
                    )?;
                }
            }
        }
    }
    Ok(())
}
