use std::path::PathBuf;

use clap::Args;

use evalx::matrix::family_epochs;
use evalx::{run_cv_experiment, CvSettings, ExperimentSpec, TextSelection};
use models::{ArchitectureId, ModelConfig};
use numeric_core::AdamConfig;
use textembed::load_embeddings;

use crate::commands::common::{emit_experiment, load_data};
use crate::config::{ensure_dir, out_dir, parse_channels, FlatConfig, Resolved};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct RunExpArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest (manifest.csv)
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Persisted embedding table; required for text-using experiments
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Architecture id, e.g. IMG or GAZE_SUPERVISED_UNET
    #[arg(long)]
    pub arch: Option<String>,
    /// Report section for text models: indication or full-report
    #[arg(long)]
    pub text_section: Option<String>,
    /// Train the attention decoder against the static gaze heatmap
    #[arg(long)]
    pub heatmap_loss: Option<bool>,
    /// Experiment id used for the output subdirectory
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Four encoder widths, e.g. 8,16,32,64
    #[arg(long)]
    pub channels: Option<String>,
    #[arg(long)]
    pub img_feature: Option<usize>,
    #[arg(long)]
    pub text_feature: Option<usize>,
    #[arg(long)]
    pub lstm_hidden: Option<usize>,
    #[arg(long)]
    pub composites: Option<usize>,
    /// Persist each fold's trained parameters as GMDL1 files
    #[arg(long)]
    pub save_models: Option<bool>,
}

pub fn run(args: RunExpArgs) -> Result<(), CliError> {
    let mut file = match &args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolved = Resolved::default();

    let dataset = resolved
        .optional(&mut file, "dataset", args.dataset.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::data("missing dataset manifest path (--dataset)"))?;
    let arch_name = resolved.value(&mut file, "arch", args.arch, "IMG".to_string())?;
    let arch = ArchitectureId::from_name(&arch_name).map_err(|e| CliError::usage(e.to_string()))?;
    let text_section = resolved.optional(&mut file, "text_section", args.text_section)?;
    let heatmap_loss = resolved.value(&mut file, "heatmap_loss", args.heatmap_loss, false)?;
    let k = resolved.value(&mut file, "k", args.k, 5)?;
    let seed = resolved.value(&mut file, "seed", args.seed, 7)?;
    let epochs = resolved.value(&mut file, "epochs", args.epochs, family_epochs(arch))?;
    let batch_size = resolved.value(&mut file, "batch_size", args.batch_size, 16)?;
    let lr = resolved.value(&mut file, "lr", args.lr, 1e-3)?;
    let channels_raw =
        resolved.value(&mut file, "channels", args.channels, "8,16,32,64".to_string())?;
    let img_feature = resolved.value(&mut file, "img_feature", args.img_feature, 32)?;
    let text_feature = resolved.value(&mut file, "text_feature", args.text_feature, 64)?;
    let lstm_hidden = resolved.value(&mut file, "lstm_hidden", args.lstm_hidden, 32)?;
    let composites = resolved.value(&mut file, "composites", args.composites, 3)?;
    let save_models = resolved.value(&mut file, "save_models", args.save_models, false)?;
    let embeddings_path = resolved
        .optional(&mut file, "embeddings", args.embeddings.map(|p| p.display().to_string()))?
        .map(PathBuf::from);

    let text = match &text_section {
        Some(name) => Some(TextSelection::from_name(name)?),
        None => None,
    };
    let default_id = {
        let mut id = arch_name.to_lowercase().replace('_', "-");
        if let Some(t) = text {
            id.push('-');
            id.push_str(t.name());
        }
        if heatmap_loss {
            id.push_str("-gt");
        }
        id
    };
    let id = resolved.value(&mut file, "id", args.id, default_id)?;
    let out = out_dir(&mut file, args.out, "experiments")?;
    file.reject_unknown_keys()?;

    let data = load_data(&dataset)?;
    let t_frames = data.records.iter().map(|r| r.temporal.len()).max().unwrap_or(8);

    let spec = ExperimentSpec {
        id: id.clone(),
        arch,
        text,
        heatmap_loss,
    };
    let needs_text = matches!(arch, ArchitectureId::Text | ArchitectureId::TextImgFusion)
        || (arch == ArchitectureId::GazeSupervisedUnet && text.is_some());
    let embeddings = match (&embeddings_path, needs_text) {
        (Some(path), _) => Some(load_embeddings(path)?),
        (None, true) => {
            return Err(CliError::data(format!(
                "experiment {id} needs --embeddings (a table written by train-embed)"
            )));
        }
        (None, false) => None,
    };
    if needs_text && text.is_none() {
        return Err(CliError::usage(format!(
            "architecture {arch_name} needs --text-section indication|full-report"
        )));
    }

    let base = ModelConfig {
        arch,
        image_size: data.image_size,
        channels: parse_channels(&channels_raw)?,
        img_feature,
        text_feature,
        lstm_hidden,
        text_dim: embeddings.as_ref().map(|m| m.dim).unwrap_or(150),
        t_frames,
        epochs,
        batch_size,
        optimizer: AdamConfig {
            lr,
            ..AdamConfig::default()
        },
        heatmap_loss: false,
        unet_text: false,
        seed: 0,
    };
    let exp_dir = out.join(&id);
    let settings = CvSettings {
        k,
        seed,
        base,
        save_params_dir: save_models.then(|| exp_dir.join("models")),
    };
    let result = run_cv_experiment(
        &spec,
        &data.records,
        &data.boxes,
        embeddings.as_ref(),
        &settings,
    )?;

    ensure_dir(&exp_dir)?;
    emit_experiment(&exp_dir, &result, &data.records, &data.boxes, composites)?;
    resolved.write_echo(&exp_dir)?;

    println!(
        "{id}: macro AUC {:.4} (Normal {:.4}, CHF {:.4}, Pneumonia {:.4}){}",
        result.auc.average.macro_avg,
        result.auc.average.normal,
        result.auc.average.chf,
        result.auc.average.pneumonia,
        match &result.overlap {
            Some(o) => format!(", mean overlap {:.4} over {} studies", o.mean, o.per_study.len()),
            None => String::new(),
        }
    );
    Ok(())
}
