use std::path::PathBuf;

use clap::Args;

use dataio::load_bounding_boxes;
use evalx::{score_saved_maps, write_overlap_csv, OverlapReport};

use crate::config::{ensure_dir, out_dir, FlatConfig, Resolved};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct EvalAttnArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of saved attention maps named <study_id>.pgm
    #[arg(long)]
    pub maps: Option<PathBuf>,
    /// Bounding-box CSV
    #[arg(long)]
    pub boxes: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: EvalAttnArgs) -> Result<(), CliError> {
    let mut file = match &args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolved = Resolved::default();

    let maps = resolved
        .optional(&mut file, "maps", args.maps.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::data("missing attention map directory (--maps)"))?;
    let boxes_path = resolved
        .optional(&mut file, "boxes", args.boxes.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::data("missing bounding-box csv (--boxes)"))?;
    let out = out_dir(&mut file, args.out, "eval-attn")?;
    file.reject_unknown_keys()?;

    if !maps.is_dir() {
        return Err(CliError::data(format!(
            "attention map directory {} does not exist",
            maps.display()
        )));
    }
    let boxes = load_bounding_boxes(&boxes_path)?;
    let per_study = score_saved_maps(&maps, &boxes)?;
    if per_study.is_empty() {
        return Err(CliError::data(format!(
            "no maps in {} match the {} annotated studies in {}",
            maps.display(),
            boxes.len(),
            boxes_path.display()
        )));
    }
    let report = OverlapReport::from_values(per_study);
    ensure_dir(&out)?;
    write_overlap_csv(&out.join("overlap.csv"), &report)?;
    resolved.write_echo(&out)?;
    println!(
        "scored {} maps: mean overlap {:.4}, median {:.4}",
        report.per_study.len(),
        report.mean,
        report.median
    );
    Ok(())
}
