//! Readers and writers for the CSV and text formats of the dataset tree:
//! manifest, fixation logs, sectioned reports, and bounding boxes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::DataError;
use crate::types::{BoundingBox, FixationEvent, Report};

#[derive(Clone, Debug)]
pub struct ManifestRow {
    pub study_id: String,
    pub patient_id: String,
    pub label: u8,
    pub image: String,
    pub report: String,
    pub fixations: String,
    pub temporal_dir: String,
    pub static_heatmap: String,
}

const MANIFEST_HEADER: [&str; 8] = [
    "study_id",
    "patient_id",
    "label",
    "image",
    "report",
    "fixations",
    "temporal_dir",
    "static_heatmap",
];

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(MANIFEST_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.study_id.as_str(),
            r.patient_id.as_str(),
            &r.label.to_string(),
            r.image.as_str(),
            r.report.as_str(),
            r.fixations.as_str(),
            r.temporal_dir.as_str(),
            r.static_heatmap.as_str(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| DataError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, DataError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    {
        let headers = reader.headers().map_err(|e| csv_err(path, e))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != MANIFEST_HEADER {
            return Err(DataError::parse(
                path,
                format!("manifest header {:?} does not match {:?}", got, MANIFEST_HEADER),
            ));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.len() != 8 {
            return Err(DataError::parse(
                path,
                format!("manifest row has {} fields, expected 8", record.len()),
            ));
        }
        let label: u8 = record[2]
            .parse()
            .map_err(|_| DataError::parse(path, format!("label {:?} is not an integer", &record[2])))?;
        rows.push(ManifestRow {
            study_id: record[0].to_string(),
            patient_id: record[1].to_string(),
            label,
            image: record[3].to_string(),
            report: record[4].to_string(),
            fixations: record[5].to_string(),
            temporal_dir: record[6].to_string(),
            static_heatmap: record[7].to_string(),
        });
    }
    Ok(rows)
}

pub fn write_fixations_csv(path: &Path, fixations: &[FixationEvent]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["t_start_ms", "duration_ms", "x_norm", "y_norm"])
        .map_err(|e| csv_err(path, e))?;
    for f in fixations {
        w.write_record([
            f.t_start_ms.to_string(),
            f.duration_ms.to_string(),
            format!("{:.6}", f.x),
            format!("{:.6}", f.y),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| DataError::io(path, e))
}

pub fn read_fixations_csv(path: &Path) -> Result<Vec<FixationEvent>, DataError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    {
        let headers = reader.headers().map_err(|e| csv_err(path, e))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["t_start_ms", "duration_ms", "x_norm", "y_norm"] {
            return Err(DataError::parse(
                path,
                format!("fixation header {got:?} is not t_start_ms,duration_ms,x_norm,y_norm"),
            ));
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let parse_u32 = |i: usize| -> Result<u32, DataError> {
            record[i]
                .parse()
                .map_err(|_| DataError::parse(path, format!("{:?} is not an integer", &record[i])))
        };
        let parse_f64 = |i: usize| -> Result<f64, DataError> {
            record[i]
                .parse()
                .map_err(|_| DataError::parse(path, format!("{:?} is not a number", &record[i])))
        };
        out.push(FixationEvent {
            t_start_ms: parse_u32(0)?,
            duration_ms: parse_u32(1)?,
            x: parse_f64(2)?,
            y: parse_f64(3)?,
        });
    }
    Ok(out)
}

pub fn write_report(path: &Path, report: &Report) -> Result<(), DataError> {
    let text = format!(
        "INDICATION: {}\nFINDINGS: {}\nIMPRESSION: {}\n",
        report.indication, report.findings, report.impression
    );
    fs::write(path, text).map_err(|e| DataError::io(path, e))
}

/// Parses the line-anchored section headers. Section text runs to the next
/// header, so multi-line sections are preserved.
pub fn read_report(path: &Path) -> Result<Report, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let mut sections: BTreeMap<&'static str, String> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for line in text.lines() {
        let matched = [
            ("INDICATION:", "indication"),
            ("FINDINGS:", "findings"),
            ("IMPRESSION:", "impression"),
        ]
        .iter()
        .find(|(header, _)| line.starts_with(header));
        if let Some((header, key)) = matched {
            current = Some(key);
            sections.insert(key, line[header.len()..].trim().to_string());
        } else if let Some(key) = current {
            let entry = sections.get_mut(key).expect("section started");
            if !entry.is_empty() {
                entry.push(' ');
            }
            entry.push_str(line.trim());
        }
    }
    let get = |key: &str| -> Result<String, DataError> {
        sections
            .get(key)
            .cloned()
            .ok_or_else(|| DataError::parse(path, format!("missing {key} section")))
    };
    Ok(Report {
        indication: get("indication")?,
        findings: get("findings")?,
        impression: get("impression")?,
    })
}

pub fn write_boxes(
    path: &Path,
    boxes: &BTreeMap<String, Vec<BoundingBox>>,
) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["study_id", "x_min", "y_min", "x_max", "y_max"])
        .map_err(|e| csv_err(path, e))?;
    for (study_id, list) in boxes {
        for b in list {
            w.write_record([
                study_id.clone(),
                b.x_min.to_string(),
                b.y_min.to_string(),
                b.x_max.to_string(),
                b.y_max.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| DataError::io(path, e))
}

pub fn load_bounding_boxes(
    path: &Path,
) -> Result<BTreeMap<String, Vec<BoundingBox>>, DataError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    {
        let headers = reader.headers().map_err(|e| csv_err(path, e))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["study_id", "x_min", "y_min", "x_max", "y_max"] {
            return Err(DataError::parse(
                path,
                format!("boxes header {got:?} is not study_id,x_min,y_min,x_max,y_max"),
            ));
        }
    }
    let mut out: BTreeMap<String, Vec<BoundingBox>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let parse = |i: usize| -> Result<usize, DataError> {
            record[i]
                .parse()
                .map_err(|_| DataError::parse(path, format!("{:?} is not an integer", &record[i])))
        };
        let b = BoundingBox {
            x_min: parse(1)?,
            y_min: parse(2)?,
            x_max: parse(3)?,
            y_max: parse(4)?,
        };
        if b.x_min >= b.x_max || b.y_min >= b.y_max {
            return Err(DataError::parse(path, format!("degenerate box {b:?}")));
        }
        out.entry(record[0].to_string()).or_default().push(b);
    }
    Ok(out)
}

fn csv_err(path: &Path, e: csv::Error) -> DataError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::io(path, io),
        other => DataError::parse(path, format!("{other:?}")),
    }
}
