//! Shared helpers: reduced-size configs and synthetic records with a
//! planted label signal in every modality.

use rand::Rng;

use models::{ArchitectureId, ModelConfig, StudyInputs};
use numeric_core::rng::seeded_rng;
use numeric_core::NdArray;

pub const SIZE: usize = 16;

pub fn tiny_cfg(arch: ArchitectureId) -> ModelConfig {
    ModelConfig {
        arch,
        image_size: SIZE,
        channels: [2, 3, 4, 5],
        img_feature: 4,
        text_feature: 6,
        lstm_hidden: 3,
        text_dim: 8,
        t_frames: 3,
        epochs: 2,
        batch_size: 4,
        seed: 42,
        ..ModelConfig::default()
    }
}

pub fn grid(f: impl Fn(usize, usize) -> f64) -> NdArray {
    NdArray::from_fn(&[1, SIZE, SIZE], |i| f(i % SIZE, i / SIZE % SIZE))
}

/// One record with every modality present and a planted class signal:
/// a bright column at a label-dependent x position, a matching gaze
/// blob, and a label-aligned text direction.
pub fn synth_record(label_index: usize, seed: u64) -> StudyInputs {
    let mut rng = seeded_rng(seed);
    let column = 3 + label_index * 5;
    let noise_scale = 0.08;
    let mut noisy_grid = |center: usize| -> NdArray {
        let base = grid(move |x, _| {
            if (x as i64 - center as i64).abs() <= 1 {
                0.9
            } else {
                0.15
            }
        });
        NdArray::from_vec(
            &[1, SIZE, SIZE],
            base.data()
                .iter()
                .map(|v| (v + rng.gen_range(-noise_scale..noise_scale)).clamp(0.0, 1.0))
                .collect(),
        )
        .unwrap()
    };
    let image = noisy_grid(column);
    let static_map = noisy_grid(column);
    let frames = (0..3).map(|_| noisy_grid(column)).collect();
    let mut text = vec![0.0; 8];
    text[label_index] = 2.0;
    for t in text.iter_mut() {
        *t += rng.gen_range(-0.2..0.2);
    }
    let target = grid(move |x, _| {
        if (x as i64 - column as i64).abs() <= 1 {
            0.85
        } else {
            0.05
        }
    });
    let heatmap_target =
        NdArray::from_vec(&[SIZE, SIZE], target.data().to_vec()).unwrap();
    StudyInputs {
        study_id: format!("t{seed:03}"),
        image: Some(image),
        static_map: Some(static_map),
        frames: Some(frames),
        text: Some(NdArray::from_vec(&[8], text).unwrap()),
        label_index,
        heatmap_target: Some(heatmap_target),
    }
}

pub fn synth_set(n: usize, seed_base: u64) -> Vec<StudyInputs> {
    (0..n)
        .map(|i| synth_record(i % 3, seed_base + i as u64))
        .collect()
}
