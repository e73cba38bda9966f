//! Seeded synthetic dataset generator.
//!
//! Every study carries a class-dependent signature on a shared noisy
//! chest-like background: CHF enlarges the central cardiac ellipse,
//! Pneumonia adds an off-center textured patch, Normal adds nothing.
//! Report findings/impression carry class keywords with probability 0.95,
//! the indication is only weakly correlated with the label, and fixations
//! cluster on the signature region. Fully determined by (config, seed).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use numeric_core::rng::{derive_seed, seeded_rng};

use crate::error::DataError;
use crate::files;
use crate::heatmap::{amalgamate_heatmaps, render_fixation_heatmap};
use crate::types::{BoundingBox, ClassLabel, FixationEvent, Heatmap, Report, StudyRecord};

const SALT_PLAN: u64 = 0xDA7A_0001;
const SALT_CORPUS: u64 = 0xDA7A_0002;
const SALT_STUDY_BASE: u64 = 0xDA7A_1000;

/// Token pairs that always co-occur inside one findings sentence. Used by
/// the embedding sanity checks.
pub const PLANTED_TOKEN_PAIRS: [(&str, &str); 3] = [
    ("cardiomegaly", "edema"),
    ("consolidation", "opacity"),
    ("clear", "unremarkable"),
];

#[derive(Clone, Debug)]
pub struct GenerateConfig {
    pub n_studies: usize,
    pub image_size: usize,
    pub class_priors: [f64; 3],
    pub t_frames: usize,
    /// Fraction of Pneumonia studies that receive bounding boxes.
    pub annotation_fraction: f64,
    /// Size of the disjoint report corpus used for embedding training.
    pub corpus_reports: usize,
    /// Gaussian radius in pixels; defaults to image_size / 16.
    pub sigma: Option<f64>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            n_studies: 600,
            image_size: 64,
            class_priors: [1.0 / 3.0; 3],
            t_frames: 8,
            annotation_fraction: 1.0,
            corpus_reports: 1200,
            sigma: None,
        }
    }
}

impl GenerateConfig {
    fn validate(&self) -> Result<(), DataError> {
        if self.n_studies == 0 {
            return Err(DataError::Argument("n_studies must be >= 1".into()));
        }
        if self.image_size < 8 {
            return Err(DataError::Argument("image_size must be >= 8".into()));
        }
        if self.t_frames == 0 {
            return Err(DataError::Argument("t_frames must be >= 1".into()));
        }
        let total: f64 = self.class_priors.iter().sum();
        if self.class_priors.iter().any(|&p| p < 0.0) || total <= 0.0 {
            return Err(DataError::Argument("class_priors must be non-negative and sum > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.annotation_fraction) {
            return Err(DataError::Argument("annotation_fraction must be in [0,1]".into()));
        }
        if self.corpus_reports == 0 {
            return Err(DataError::Argument("corpus_reports must be >= 1".into()));
        }
        Ok(())
    }

    pub fn sigma_pixels(&self) -> f64 {
        self.sigma.unwrap_or(self.image_size as f64 / 16.0)
    }
}

/// In-memory handle to a generated dataset tree.
#[derive(Debug)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub manifest_path: PathBuf,
    pub boxes_path: PathBuf,
    pub corpus_path: PathBuf,
    pub studies: Vec<StudyRecord>,
    pub boxes: BTreeMap<String, Vec<BoundingBox>>,
}

const INDICATIONS_NORMAL: [&str; 4] = [
    "routine preoperative evaluation before elective surgery",
    "annual screening visit requested by primary physician",
    "followup of prior outside study",
    "evaluation after minor fall without new complaint",
];

const INDICATIONS_CHF: [&str; 4] = [
    "shortness of breath and progressive leg swelling",
    "worsening orthopnea overnight with fatigue",
    "dyspnea on exertion and new weight gain",
    "known cardiac history with increasing breathlessness",
];

const INDICATIONS_PNEUMONIA: [&str; 4] = [
    "fever and productive cough for several days",
    "chills with pleuritic chest pain",
    "worsening cough and rising temperature",
    "suspected lower respiratory infection after travel",
];

const FINDINGS_NORMAL: [&str; 3] = [
    "the lungs are clear and unremarkable without focal abnormality",
    "clear unremarkable lungs with crisp costophrenic angles",
    "lungs remain clear and unremarkable bilaterally",
];

const FINDINGS_CHF: [&str; 3] = [
    "cardiomegaly with pulmonary edema and vascular congestion",
    "enlarged cardiac silhouette cardiomegaly with interstitial edema",
    "moderate cardiomegaly and pulmonary edema with cephalization",
];

const FINDINGS_PNEUMONIA: [&str; 3] = [
    "focal consolidation with airspace opacity in the right lower lobe",
    "patchy consolidation and opacity concerning for infection",
    "dense consolidation with surrounding opacity at the lung base",
];

const IMPRESSIONS_NORMAL: [&str; 3] = [
    "no acute cardiopulmonary process identified",
    "normal chest radiograph without acute disease",
    "no acute abnormality detected",
];

const IMPRESSIONS_CHF: [&str; 3] = [
    "findings consistent with congestive heart failure",
    "decompensated heart failure with volume overload",
    "congestive failure with pulmonary venous hypertension",
];

const IMPRESSIONS_PNEUMONIA: [&str; 3] = [
    "findings concerning for pneumonia",
    "multifocal pneumonia likely infectious",
    "developing pneumonia in the appropriate clinical setting",
];

const NEUTRAL_FINDINGS: [&str; 2] = [
    "stable appearance of the chest without interval change",
    "no significant change from the prior examination",
];

const NEUTRAL_IMPRESSIONS: [&str; 2] = [
    "stable examination",
    "no significant interval change",
];

const DISTRACTORS: [&str; 6] = [
    "degenerative changes of the thoracic spine",
    "no pneumothorax or pleural effusion",
    "osseous structures are intact",
    "surgical clips project over the upper abdomen",
    "mild biapical pleural thickening",
    "unchanged right sided port catheter",
];

/// Probability that findings/impression carry the class keywords.
const TEXT_SIGNAL_PROB: f64 = 0.95;
/// Per-pixel probability that a signature pixel is dropped.
const SIGNAL_DROPOUT: f64 = 0.05;

fn own_pool_probability(label: ClassLabel) -> f64 {
    // Indication text is only moderately informative, with pneumonia the
    // most recognizable from symptoms.
    match label {
        ClassLabel::Normal => 0.55,
        ClassLabel::Chf => 0.60,
        ClassLabel::Pneumonia => 0.75,
    }
}

fn indication_pool(label: ClassLabel) -> &'static [&'static str] {
    match label {
        ClassLabel::Normal => &INDICATIONS_NORMAL,
        ClassLabel::Chf => &INDICATIONS_CHF,
        ClassLabel::Pneumonia => &INDICATIONS_PNEUMONIA,
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn indication_text(label: ClassLabel, rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(own_pool_probability(label)) {
        pick(rng, indication_pool(label)).to_string()
    } else {
        let all: Vec<&str> = INDICATIONS_NORMAL
            .iter()
            .chain(&INDICATIONS_CHF)
            .chain(&INDICATIONS_PNEUMONIA)
            .copied()
            .collect();
        pick(rng, &all).to_string()
    }
}

fn findings_text(label: ClassLabel, rng: &mut ChaCha8Rng) -> String {
    let lead = if rng.gen_bool(TEXT_SIGNAL_PROB) {
        match label {
            ClassLabel::Normal => pick(rng, &FINDINGS_NORMAL),
            ClassLabel::Chf => pick(rng, &FINDINGS_CHF),
            ClassLabel::Pneumonia => pick(rng, &FINDINGS_PNEUMONIA),
        }
    } else {
        pick(rng, &NEUTRAL_FINDINGS)
    };
    let mut text = lead.to_string();
    for _ in 0..rng.gen_range(1..=2) {
        text.push_str(". ");
        text.push_str(pick(rng, &DISTRACTORS));
    }
    text
}

fn impression_text(label: ClassLabel, rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(TEXT_SIGNAL_PROB) {
        match label {
            ClassLabel::Normal => pick(rng, &IMPRESSIONS_NORMAL).to_string(),
            ClassLabel::Chf => pick(rng, &IMPRESSIONS_CHF).to_string(),
            ClassLabel::Pneumonia => pick(rng, &IMPRESSIONS_PNEUMONIA).to_string(),
        }
    } else {
        pick(rng, &NEUTRAL_IMPRESSIONS).to_string()
    }
}

fn sample_label(priors: &[f64; 3], rng: &mut ChaCha8Rng) -> ClassLabel {
    let total: f64 = priors.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (i, &p) in priors.iter().enumerate() {
        if u < p {
            return ClassLabel::ALL[i];
        }
        u -= p;
    }
    ClassLabel::Pneumonia
}

struct ImageSignature {
    image: Heatmap,
    /// Normalized (cx, cy, r) of the pneumonia patch, when present.
    patch: Option<(f64, f64, f64)>,
}

fn ellipse(nx: f64, ny: f64, cx: f64, cy: f64, rx: f64, ry: f64) -> bool {
    let dx = (nx - cx) / rx;
    let dy = (ny - cy) / ry;
    dx * dx + dy * dy <= 1.0
}

fn synth_image(label: ClassLabel, size: usize, rng: &mut ChaCha8Rng) -> ImageSignature {
    let s = (size - 1) as f64;
    let patch = if label == ClassLabel::Pneumonia {
        let side = if rng.gen_bool(0.5) { 0.28 } else { 0.72 };
        let cx = side + rng.gen_range(-0.04..0.04);
        let cy = 0.40 + rng.gen_range(-0.08..0.08);
        Some((cx, cy, 0.11))
    } else {
        None
    };
    let mut values = vec![0u8; size * size];
    for y in 0..size {
        let ny = y as f64 / s;
        for x in 0..size {
            let nx = x as f64 / s;
            let mut v = 55.0 + 115.0 * (-((nx - 0.5) / 0.14).powi(2)).exp();
            if ellipse(nx, ny, 0.28, 0.42, 0.16, 0.26) || ellipse(nx, ny, 0.72, 0.42, 0.16, 0.26) {
                v -= 40.0;
            }
            if ellipse(nx, ny, 0.52, 0.62, 0.11, 0.09) {
                v += 30.0;
            }
            v += rng.gen_range(-12.0..12.0);
            // Signature contrasts sit near the noise floor so the image
            // task stays hard, with pneumonia the subtlest class.
            match (label, patch) {
                (ClassLabel::Chf, _) => {
                    if ellipse(nx, ny, 0.52, 0.60, 0.24, 0.16) && !rng.gen_bool(SIGNAL_DROPOUT) {
                        v += 34.0;
                    }
                }
                (ClassLabel::Pneumonia, Some((cx, cy, r))) => {
                    let dx = nx - cx;
                    let dy = ny - cy;
                    if dx * dx + dy * dy <= r * r && !rng.gen_bool(SIGNAL_DROPOUT) {
                        let checker = ((x / 2 + y / 2) % 2) as f64;
                        v += 16.0 + 12.0 * checker;
                    }
                }
                _ => {}
            }
            values[y * size + x] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    ImageSignature {
        image: Heatmap::from_values(size, size, values).expect("square image"),
        patch,
    }
}

fn quantize(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn synth_fixations(
    label: ClassLabel,
    patch: Option<(f64, f64, f64)>,
    rng: &mut ChaCha8Rng,
) -> Vec<FixationEvent> {
    let n = rng.gen_range(12..=22);
    let mut t = 0u32;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        t += rng.gen_range(60..=350);
        let duration = rng.gen_range(120..=700);
        let (cx, cy, jitter) = match (label, patch) {
            (ClassLabel::Pneumonia, Some((px, py, _))) => (px, py, 0.045),
            (ClassLabel::Chf, _) => (0.52, 0.60, 0.06),
            _ => {
                let side = if rng.gen_bool(0.5) { 0.28 } else { 0.72 };
                (side, 0.42, 0.10)
            }
        };
        let x = (cx + rng.gen_range(-jitter..jitter)).clamp(0.02, 0.98);
        let y = (cy + rng.gen_range(-jitter..jitter)).clamp(0.02, 0.98);
        out.push(FixationEvent {
            t_start_ms: t,
            duration_ms: duration,
            x: quantize(x),
            y: quantize(y),
        });
    }
    out
}

/// Uniform time-binning of the fixation log into `t_frames` rendered
/// frames, then the static amalgamation.
fn render_temporal(
    fixations: &[FixationEvent],
    size: usize,
    t_frames: usize,
    sigma: f64,
) -> (Vec<Heatmap>, Heatmap) {
    let span = fixations
        .last()
        .map(|f| f.t_start_ms + f.duration_ms)
        .unwrap_or(1)
        .max(1) as u64;
    let mut bins: Vec<Vec<FixationEvent>> = vec![Vec::new(); t_frames];
    for fix in fixations {
        let idx = ((fix.t_start_ms as u64 * t_frames as u64) / span).min(t_frames as u64 - 1);
        bins[idx as usize].push(*fix);
    }
    let temporal: Vec<Heatmap> = bins
        .iter()
        .map(|bin| render_fixation_heatmap(bin, size, size, sigma))
        .collect();
    let static_map = amalgamate_heatmaps(&temporal).expect("t_frames >= 1");
    (temporal, static_map)
}

fn patch_bounding_box(patch: (f64, f64, f64), size: usize) -> BoundingBox {
    let (cx, cy, r) = patch;
    let s = (size - 1) as f64;
    let margin = 1.0;
    let x_min = ((cx - r) * s - margin).floor().max(0.0) as usize;
    let y_min = ((cy - r) * s - margin).floor().max(0.0) as usize;
    let x_max = (((cx + r) * s + margin).ceil() as usize + 1).min(size);
    let y_max = (((cy + r) * s + margin).ceil() as usize + 1).min(size);
    BoundingBox {
        x_min,
        y_min,
        x_max: x_max.max(x_min + 1),
        y_max: y_max.max(y_min + 1),
    }
}

fn corpus_line(priors: &[f64; 3], rng: &mut ChaCha8Rng) -> String {
    let label = sample_label(priors, rng);
    format!(
        "{}. {}. {}",
        indication_text(label, rng),
        findings_text(label, rng),
        impression_text(label, rng)
    )
}

/// Writes a complete dataset tree under `out_dir` and returns both the
/// file layout and the in-memory records.
pub fn generate_synthetic_dataset(
    config: &GenerateConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<DatasetManifest, DataError> {
    config.validate()?;
    let studies_dir = out_dir.join("studies");
    fs::create_dir_all(&studies_dir).map_err(|e| DataError::io(&studies_dir, e))?;

    // Patient structure and labels come from the plan stream, so per-study
    // streams stay independent of each other.
    let mut plan_rng = seeded_rng(derive_seed(seed, SALT_PLAN));
    let mut patient_of_study: Vec<String> = Vec::with_capacity(config.n_studies);
    let mut patient_idx = 0usize;
    while patient_of_study.len() < config.n_studies {
        let remaining = config.n_studies - patient_of_study.len();
        let count = plan_rng.gen_range(1..=3usize).min(remaining);
        let patient_id = format!("p{patient_idx:04}");
        for _ in 0..count {
            patient_of_study.push(patient_id.clone());
        }
        patient_idx += 1;
    }
    let labels: Vec<ClassLabel> = (0..config.n_studies)
        .map(|_| sample_label(&config.class_priors, &mut plan_rng))
        .collect();

    let sigma = config.sigma_pixels();
    let mut studies = Vec::with_capacity(config.n_studies);
    let mut boxes: BTreeMap<String, Vec<BoundingBox>> = BTreeMap::new();
    let mut manifest_rows = Vec::with_capacity(config.n_studies);

    for idx in 0..config.n_studies {
        let study_id = format!("s{idx:04}");
        let label = labels[idx];
        let mut rng = seeded_rng(derive_seed(seed, SALT_STUDY_BASE + idx as u64));

        let ImageSignature { image, patch } = synth_image(label, config.image_size, &mut rng);
        let fixations = synth_fixations(label, patch, &mut rng);
        let (temporal, static_map) =
            render_temporal(&fixations, config.image_size, config.t_frames, sigma);
        let report = Report {
            indication: indication_text(label, &mut rng),
            findings: findings_text(label, &mut rng),
            impression: impression_text(label, &mut rng),
        };
        if let Some(p) = patch {
            if config.annotation_fraction >= 1.0 || rng.gen_bool(config.annotation_fraction) {
                boxes.insert(
                    study_id.clone(),
                    vec![patch_bounding_box(p, config.image_size)],
                );
            }
        }

        let dir = studies_dir.join(&study_id);
        let temporal_dir = dir.join("temporal");
        fs::create_dir_all(&temporal_dir).map_err(|e| DataError::io(&temporal_dir, e))?;
        crate::pgm::write_pgm(&dir.join("image.pgm"), &image)?;
        crate::pgm::write_pgm(&dir.join("static.pgm"), &static_map)?;
        for (i, frame) in temporal.iter().enumerate() {
            crate::pgm::write_pgm(&temporal_dir.join(format!("frame_{i:03}.pgm")), frame)?;
        }
        files::write_report(&dir.join("report.txt"), &report)?;
        files::write_fixations_csv(&dir.join("fixations.csv"), &fixations)?;

        manifest_rows.push(files::ManifestRow {
            study_id: study_id.clone(),
            patient_id: patient_of_study[idx].clone(),
            label: label.code(),
            image: format!("studies/{study_id}/image.pgm"),
            report: format!("studies/{study_id}/report.txt"),
            fixations: format!("studies/{study_id}/fixations.csv"),
            temporal_dir: format!("studies/{study_id}/temporal"),
            static_heatmap: format!("studies/{study_id}/static.pgm"),
        });

        studies.push(StudyRecord {
            study_id,
            patient_id: patient_of_study[idx].clone(),
            label,
            image,
            report,
            fixations,
            temporal,
            static_map,
        });
    }

    let manifest_path = out_dir.join("manifest.csv");
    files::write_manifest(&manifest_path, &manifest_rows)?;
    let boxes_path = out_dir.join("boxes.csv");
    files::write_boxes(&boxes_path, &boxes)?;

    let corpus_path = out_dir.join("corpus.txt");
    let mut corpus_rng = seeded_rng(derive_seed(seed, SALT_CORPUS));
    let mut corpus = String::new();
    for _ in 0..config.corpus_reports {
        corpus.push_str(&corpus_line(&config.class_priors, &mut corpus_rng));
        corpus.push('\n');
    }
    fs::write(&corpus_path, corpus).map_err(|e| DataError::io(&corpus_path, e))?;

    Ok(DatasetManifest {
        root: out_dir.to_path_buf(),
        manifest_path,
        boxes_path,
        corpus_path,
        studies,
        boxes,
    })
}
