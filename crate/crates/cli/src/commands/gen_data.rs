use std::path::PathBuf;

use clap::Args;

use dataio::{generate_synthetic_dataset, ClassLabel, GenerateConfig};

use crate::config::{ensure_dir, out_dir, parse_priors, FlatConfig, Resolved};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct GenDataArgs {
    /// Flat key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the dataset tree
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_studies: Option<usize>,
    #[arg(long)]
    pub image_size: Option<usize>,
    #[arg(long)]
    pub t_frames: Option<usize>,
    /// Three comma-separated class weights, e.g. 1,1,1
    #[arg(long)]
    pub class_priors: Option<String>,
    #[arg(long)]
    pub annotation_fraction: Option<f64>,
    #[arg(long)]
    pub corpus_reports: Option<usize>,
    /// Gaussian radius in pixels; defaults to image_size/16
    #[arg(long)]
    pub sigma: Option<f64>,
}

pub fn run(args: GenDataArgs) -> Result<(), CliError> {
    let mut file = match &args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolved = Resolved::default();

    let out = out_dir(&mut file, args.out, "dataset")?;

    let seed = resolved.value(&mut file, "seed", args.seed, 7)?;
    let n_studies = resolved.value(&mut file, "n_studies", args.n_studies, 600)?;
    let image_size = resolved.value(&mut file, "image_size", args.image_size, 64)?;
    let t_frames = resolved.value(&mut file, "t_frames", args.t_frames, 8)?;
    let priors_raw = resolved.value(
        &mut file,
        "class_priors",
        args.class_priors,
        "1,1,1".to_string(),
    )?;
    let annotation_fraction =
        resolved.value(&mut file, "annotation_fraction", args.annotation_fraction, 1.0)?;
    let corpus_reports =
        resolved.value(&mut file, "corpus_reports", args.corpus_reports, 1200)?;
    let sigma = resolved.optional(&mut file, "sigma", args.sigma)?;
    file.reject_unknown_keys()?;

    let config = GenerateConfig {
        n_studies,
        image_size,
        class_priors: parse_priors(&priors_raw)?,
        t_frames,
        annotation_fraction,
        corpus_reports,
        sigma,
    };
    ensure_dir(&out)?;
    let generated = generate_synthetic_dataset(&config, seed, &out)?;
    resolved.write_echo(&out)?;

    let mut counts = [0usize; 3];
    for s in &generated.studies {
        counts[s.label.index()] += 1;
    }
    println!(
        "generated {} studies into {} ({}: {}, {}: {}, {}: {}), {} annotated, corpus of {} reports",
        generated.studies.len(),
        out.display(),
        ClassLabel::Normal.name(),
        counts[0],
        ClassLabel::Chf.name(),
        counts[1],
        ClassLabel::Pneumonia.name(),
        counts[2],
        generated.boxes.len(),
        corpus_reports,
    );
    Ok(())
}
