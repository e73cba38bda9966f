//! Table emission mirroring the published layouts: per-experiment AUC
//! tables (rows Normal/CHF/Pneumonia/Average AUC over fold columns), the
//! cross-experiment overlap summary with improvement percentages, and
//! attention-map composites.

use std::fs;
use std::path::Path;

use dataio::{BoundingBox, Heatmap};

use crate::cv::{AucReport, OverlapReport};
use crate::error::EvalError;

fn csv_err(path: &Path, e: csv::Error) -> EvalError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => EvalError::io(path, io),
        other => EvalError::Argument(format!("csv on {}: {other:?}", path.display())),
    }
}

/// Rows Normal/CHF/Pneumonia/Average AUC, columns Fold1..Foldk, Average.
pub fn write_auc_csv(path: &Path, report: &AucReport) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let k = report.per_fold.len();
    let mut header = vec![String::new()];
    header.extend((1..=k).map(|i| format!("Fold{i}")));
    header.push("Average".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let rows: [(&str, fn(&crate::auc::OvrAuc) -> f64); 4] = [
        ("Normal", |f| f.normal),
        ("CHF", |f| f.chf),
        ("Pneumonia", |f| f.pneumonia),
        ("Average AUC", |f| f.macro_avg),
    ];
    for (name, get) in rows {
        let mut record = vec![name.to_string()];
        record.extend(report.per_fold.iter().map(|f| format!("{:.4}", get(f))));
        record.push(format!("{:.4}", get(&report.average)));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| EvalError::io(path, e))
}

/// Per-study overlaps plus mean/median summary rows.
pub fn write_overlap_csv(path: &Path, report: &OverlapReport) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["study_id", "overlap"])
        .map_err(|e| csv_err(path, e))?;
    for (study_id, value) in &report.per_study {
        w.write_record([study_id.clone(), format!("{value:.4}")])
            .map_err(|e| csv_err(path, e))?;
    }
    w.write_record(["mean", &format!("{:.4}", report.mean)])
        .map_err(|e| csv_err(path, e))?;
    w.write_record(["median", &format!("{:.4}", report.median)])
        .map_err(|e| csv_err(path, e))?;
    w.flush().map_err(|e| EvalError::io(path, e))
}

/// One feature combination with its mean overlaps without/with the gaze
/// ground truth.
#[derive(Clone, Debug)]
pub struct OverlapSummaryRow {
    pub input_features: String,
    pub without_heatmap_loss: f64,
    pub with_heatmap_loss: f64,
}

/// Integer improvement percentage, truncated toward zero; 0.0565 to
/// 0.1009 prints as 78%.
pub fn improvement_percent(without: f64, with: f64) -> String {
    if without == 0.0 {
        return "n/a".into();
    }
    let pct = ((with - without) / without * 100.0).trunc() as i64;
    format!("{pct}%")
}

pub fn write_overlap_summary_csv(
    path: &Path,
    rows: &[OverlapSummaryRow],
) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record([
        "input_features",
        "without_heatmap_loss",
        "with_heatmap_loss",
        "improvement",
    ])
    .map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record([
            row.input_features.clone(),
            format!("{:.4}", row.without_heatmap_loss),
            format!("{:.4}", row.with_heatmap_loss),
            improvement_percent(row.without_heatmap_loss, row.with_heatmap_loss),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| EvalError::io(path, e))
}

fn rle_rows(svg: &mut String, map: &Heatmap, cell: f64, color: impl Fn(u8) -> Option<String>) {
    for y in 0..map.height() {
        let mut x = 0;
        while x < map.width() {
            let v = map.get(x, y);
            let mut run = 1;
            while x + run < map.width() && map.get(x + run, y) == v {
                run += 1;
            }
            if let Some(fill) = color(v) {
                svg.push_str(&format!(
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\"/>\n",
                    x as f64 * cell,
                    y as f64 * cell,
                    run as f64 * cell,
                    cell,
                    fill
                ));
            }
            x += run;
        }
    }
}

/// Attention map rendered over the image with the annotation boxes
/// outlined. Rows are run-length merged to keep files small.
pub fn write_attention_composite_svg(
    path: &Path,
    image: &Heatmap,
    attention: &Heatmap,
    boxes: &[BoundingBox],
) -> Result<(), EvalError> {
    if image.width() != attention.width() || image.height() != attention.height() {
        return Err(EvalError::Argument(
            "attention map and image dimensions differ".into(),
        ));
    }
    let cell = 4.0;
    let (w, h) = (
        image.width() as f64 * cell,
        image.height() as f64 * cell,
    );
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    rle_rows(&mut svg, image, cell, |v| {
        Some(format!("rgb({v},{v},{v})"))
    });
    rle_rows(&mut svg, attention, cell, |v| {
        if v > crate::overlap::OVERLAP_CUTOFF {
            Some(format!("rgba(255,64,0,{:.3})", v as f64 / 255.0 * 0.6))
        } else {
            None
        }
    });
    for b in boxes {
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#00e5ff\" stroke-width=\"2\"/>\n",
            b.x_min as f64 * cell,
            b.y_min as f64 * cell,
            (b.x_max - b.x_min) as f64 * cell,
            (b.y_max - b.y_min) as f64 * cell,
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| EvalError::io(path, e))
}
