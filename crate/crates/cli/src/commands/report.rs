//! Aggregates the per-experiment CSVs of a matrix run into flat summary
//! tables.

use std::path::{Path, PathBuf};

use clap::Args;

use evalx::{improvement_percent, OVERLAP_SUMMARY_PAIRS};

use crate::config::{ensure_dir, out_dir, FlatConfig, Resolved};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory written by run-matrix
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Reads the Average column of a per-experiment auc.csv.
fn read_auc_averages(path: &Path) -> Result<[f64; 4], CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = [0.0; 4];
    let mut row = 0;
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::data(format!("bad row in {}: {e}", path.display())))?;
        let last = record
            .get(record.len() - 1)
            .ok_or_else(|| CliError::data(format!("empty row in {}", path.display())))?;
        if row < 4 {
            out[row] = last
                .parse()
                .map_err(|_| CliError::data(format!("bad average {last:?} in {}", path.display())))?;
        }
        row += 1;
    }
    if row != 4 {
        return Err(CliError::data(format!(
            "{} has {row} data rows, expected 4",
            path.display()
        )));
    }
    Ok(out)
}

/// Reads the mean/median summary rows of an overlap.csv.
fn read_overlap_summary(path: &Path) -> Result<(f64, f64), CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut mean = None;
    let mut median = None;
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::data(format!("bad row in {}: {e}", path.display())))?;
        let value = |raw: &str| -> Result<f64, CliError> {
            raw.parse()
                .map_err(|_| CliError::data(format!("bad value {raw:?} in {}", path.display())))
        };
        match record.get(0) {
            Some("mean") => mean = Some(value(&record[1])?),
            Some("median") => median = Some(value(&record[1])?),
            _ => {}
        }
    }
    match (mean, median) {
        (Some(mean), Some(median)) => Ok((mean, median)),
        _ => Err(CliError::data(format!(
            "{} lacks mean/median rows",
            path.display()
        ))),
    }
}

fn experiment_dirs(root: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let mut out = Vec::new();
    if !root.is_dir() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(root)
        .map_err(|e| CliError::data(format!("cannot list {}: {e}", root.display())))?
    {
        let entry = entry.map_err(|e| CliError::data(e.to_string()))?;
        if entry.path().is_dir() {
            out.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    out.sort();
    Ok(out)
}

pub fn run(args: ReportArgs) -> Result<(), CliError> {
    let mut file = match &args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolved = Resolved::default();
    let matrix = resolved
        .optional(&mut file, "matrix", args.matrix.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::data("missing matrix directory (--matrix)"))?;
    let out = out_dir(&mut file, args.out, "report")?;
    file.reject_unknown_keys()?;

    if !matrix.is_dir() {
        return Err(CliError::data(format!(
            "matrix directory {} does not exist",
            matrix.display()
        )));
    }
    ensure_dir(&out)?;

    let mut tables = String::from("experiment,normal,chf,pneumonia,macro_avg\n");
    let mut found = 0;
    for (id, dir) in experiment_dirs(&matrix.join("classification"))? {
        let auc_path = dir.join("auc.csv");
        if !auc_path.exists() {
            continue;
        }
        let [normal, chf, pneumonia, macro_avg] = read_auc_averages(&auc_path)?;
        tables.push_str(&format!(
            "{id},{normal:.4},{chf:.4},{pneumonia:.4},{macro_avg:.4}\n"
        ));
        found += 1;
    }
    if found == 0 {
        return Err(CliError::data(format!(
            "no classification auc.csv files under {}",
            matrix.display()
        )));
    }
    std::fs::write(out.join("classification_auc.csv"), tables)
        .map_err(|e| CliError::data(format!("cannot write classification_auc.csv: {e}")))?;

    let mut overlap_means: std::collections::BTreeMap<String, (f64, f64)> =
        std::collections::BTreeMap::new();
    let mut explain = String::from("experiment,mean_overlap,median_overlap\n");
    for (id, dir) in experiment_dirs(&matrix.join("explainability"))? {
        let overlap_path = dir.join("overlap.csv");
        if !overlap_path.exists() {
            continue;
        }
        let (mean, median) = read_overlap_summary(&overlap_path)?;
        explain.push_str(&format!("{id},{mean:.4},{median:.4}\n"));
        overlap_means.insert(id, (mean, median));
    }
    std::fs::write(out.join("explainability_overlap.csv"), explain)
        .map_err(|e| CliError::data(format!("cannot write explainability_overlap.csv: {e}")))?;

    // Rebuild the feature-combination summary from per-experiment means.
    let mut summary = String::from("input_features,without_heatmap_loss,with_heatmap_loss,improvement\n");
    for pair in OVERLAP_SUMMARY_PAIRS {
        if let (Some(&(without, _)), Some(&(with, _))) = (
            overlap_means.get(pair.without_id),
            overlap_means.get(pair.with_id),
        ) {
            summary.push_str(&format!(
                "{},{without:.4},{with:.4},{}\n",
                pair.input_features,
                improvement_percent(without, with)
            ));
        }
    }
    std::fs::write(out.join("overlap_summary.csv"), summary)
        .map_err(|e| CliError::data(format!("cannot write overlap_summary.csv: {e}")))?;

    resolved.write_echo(&out)?;
    println!("aggregated {found} experiments into {}", out.display());
    Ok(())
}
