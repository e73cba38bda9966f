//! Structural guarantees of the seven forward passes: probability
//! normalization, bias pathways on zero input, exact fusion reductions,
//! attention-map shape and range, and decoder isolation from the
//! classification loss.

mod common;

use common::{grid, synth_record, tiny_cfg, SIZE};

use models::{build_net, ArchitectureId, ModelError, StudyInputs};
use numeric_core::graph::reverse_sweep;
use numeric_core::ops;
use numeric_core::NdArray;

#[test]
fn every_architecture_outputs_a_distribution() {
    let record = synth_record(1, 9);
    for arch in ArchitectureId::ALL {
        let mut cfg = tiny_cfg(arch);
        if arch == ArchitectureId::GazeSupervisedUnet {
            cfg.unet_text = true;
        }
        let net = build_net(&cfg).unwrap();
        let fwd = net.forward(&record).unwrap();
        let probs = fwd.probs.value();
        assert_eq!(probs.shape(), &[3]);
        let total: f64 = probs.data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "{}: sum {total}", arch.name());
        assert!(probs.data().iter().all(|p| p.is_finite() && *p > 0.0));
        let logits = fwd.logits.value();
        assert!(logits.data().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn zero_image_takes_the_bias_pathway() {
    // Convolutions carry no bias, so a zero image leaves zero features;
    // the logits reduce to head.w2 * relu(head.b1) + head.b2.
    let cfg = tiny_cfg(ArchitectureId::Img);
    let net = build_net(&cfg).unwrap();
    let mut record = synth_record(0, 1);
    record.image = Some(NdArray::zeros(&[1, SIZE, SIZE]));
    let fwd = net.forward(&record).unwrap();

    let params: std::collections::BTreeMap<String, NdArray> =
        net.params().into_iter().map(|(n, v)| (n, v.value())).collect();
    let b1 = &params["head.b1"];
    let w2 = &params["head.w2"];
    let b2 = &params["head.b2"];
    let hidden: Vec<f64> = b1.data().iter().map(|&v| v.max(0.0)).collect();
    let expected: Vec<f64> = (0..3)
        .map(|i| {
            let row = &w2.data()[i * hidden.len()..(i + 1) * hidden.len()];
            row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + b2.data()[i]
        })
        .collect();
    let logits = fwd.logits.value();
    for (a, b) in logits.data().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn zero_static_heatmap_takes_the_bias_pathway() {
    let cfg = tiny_cfg(ArchitectureId::HmapStatic);
    let net = build_net(&cfg).unwrap();
    let mut record = synth_record(0, 2);
    record.static_map = Some(NdArray::zeros(&[1, SIZE, SIZE]));
    let fwd = net.forward(&record).unwrap();
    let probs = fwd.probs.value();
    assert!((probs.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn fusion_with_zeroed_text_weights_matches_image_only_bitwise() {
    let cfg = tiny_cfg(ArchitectureId::TextImgFusion);
    let fusion = build_net(&cfg).unwrap();
    // zero the text branch
    for (name, var) in fusion.params() {
        if name.starts_with("text.") {
            var.set_value(NdArray::zeros(&var.value().shape().to_vec()));
        }
    }
    let record = synth_record(2, 7);
    let fusion_logits = fusion.forward(&record).unwrap().logits.value();

    // image-only classifier sharing the image-branch parameters: the
    // fusion head's first img_feature columns become its output layer.
    let img_cfg = tiny_cfg(ArchitectureId::Img);
    let img_net = build_net(&img_cfg).unwrap();
    let fusion_params: std::collections::BTreeMap<String, NdArray> =
        fusion.params().into_iter().map(|(n, v)| (n, v.value())).collect();
    for (name, var) in img_net.params() {
        let source = match name.as_str() {
            "head.w1" => fusion_params["img.w"].clone(),
            "head.b1" => fusion_params["img.b"].clone(),
            "head.w2" => {
                let full = &fusion_params["head.w"];
                let (rows, cols) = (full.shape()[0], full.shape()[1]);
                let keep = cfg.img_feature;
                let mut data = Vec::with_capacity(rows * keep);
                for r in 0..rows {
                    data.extend_from_slice(&full.data()[r * cols..r * cols + keep]);
                }
                NdArray::from_vec(&[rows, keep], data).unwrap()
            }
            "head.b2" => fusion_params["head.b"].clone(),
            other => fusion_params[other].clone(),
        };
        var.set_value(source);
    }
    let img_logits = img_net.forward(&record).unwrap().logits.value();
    for (a, b) in fusion_logits.data().iter().zip(img_logits.data()) {
        assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
    }
}

#[test]
fn unet_attention_matches_input_shape_and_range() {
    let cfg = tiny_cfg(ArchitectureId::GazeSupervisedUnet);
    let net = build_net(&cfg).unwrap();
    let record = synth_record(1, 3);
    let fwd = net.forward(&record).unwrap();
    let attention = fwd.attention.expect("unet emits an attention map").value();
    assert_eq!(attention.shape(), &[SIZE, SIZE]);
    assert!(attention.data().iter().all(|&v| (0.0..=1.0).contains(&v)));

    // extreme inputs keep the sigmoid range
    let mut extreme = record.clone();
    extreme.image = Some(grid(|x, y| if (x + y) % 2 == 0 { 1.0 } else { 0.0 }));
    let fwd = net.forward(&extreme).unwrap();
    let attention = fwd.attention.unwrap().value();
    assert!(attention.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn classification_loss_sends_no_gradient_to_the_decoder() {
    let cfg = tiny_cfg(ArchitectureId::GazeSupervisedUnet);
    let net = build_net(&cfg).unwrap();
    let record = synth_record(0, 4);
    let fwd = net.forward(&record).unwrap();
    let loss = ops::cross_entropy_loss(&fwd.probs, record.label_index).unwrap();
    reverse_sweep(&loss).unwrap();
    for (name, var) in net.params() {
        let grad = var.grad();
        let nonzero = grad.data().iter().any(|&g| g != 0.0);
        if name.starts_with("dec.") {
            assert!(!nonzero, "decoder parameter {name} received gradient");
        }
        if name.starts_with("enc.block1.conv1") {
            assert!(nonzero, "encoder should receive gradient");
        }
    }

    // with the heatmap term, the decoder does train
    for (_, var) in net.params() {
        var.zero_grad();
    }
    let fwd = net.forward(&record).unwrap();
    let class_loss = ops::cross_entropy_loss(&fwd.probs, record.label_index).unwrap();
    let target = numeric_core::graph::Var::leaf(record.heatmap_target.clone().unwrap());
    let heat_loss = ops::mse_loss(fwd.attention.as_ref().unwrap(), &target).unwrap();
    let total = models::combined_loss_node(&heat_loss, &class_loss).unwrap();
    reverse_sweep(&total).unwrap();
    let dec_grads_nonzero = net
        .params()
        .iter()
        .filter(|(n, _)| n.starts_with("dec."))
        .any(|(_, v)| v.grad().data().iter().any(|&g| g != 0.0));
    assert!(dec_grads_nonzero);
}

#[test]
fn temporal_zero_frames_and_zero_lstm_reduce_to_head_bias() {
    let cfg = tiny_cfg(ArchitectureId::HmapTemporal);
    let net = build_net(&cfg).unwrap();
    for (name, var) in net.params() {
        if name.starts_with("lstm.") {
            var.set_value(NdArray::zeros(&var.value().shape().to_vec()));
        }
    }
    let mut record = synth_record(0, 5);
    record.frames = Some(vec![NdArray::zeros(&[1, SIZE, SIZE]); 3]);
    let fwd = net.forward(&record).unwrap();
    let head_b = net
        .params()
        .into_iter()
        .find(|(n, _)| n == "head.b")
        .unwrap()
        .1
        .value();
    let logits = fwd.logits.value();
    for (a, b) in logits.data().iter().zip(head_b.data()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn temporal_forward_accepts_reversed_order() {
    // Order sensitivity is structural (the LSTM sees a different
    // sequence); both directions must still give valid distributions.
    let cfg = tiny_cfg(ArchitectureId::HmapTemporal);
    let net = build_net(&cfg).unwrap();
    let record = synth_record(2, 6);
    let forward_probs = net.forward(&record).unwrap().probs.value();
    let mut reversed = record.clone();
    reversed.frames = Some(record.frames.clone().unwrap().into_iter().rev().collect());
    let reversed_probs = net.forward(&reversed).unwrap().probs.value();
    for probs in [&forward_probs, &reversed_probs] {
        assert!((probs.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn shorter_sequences_than_t_frames_are_processed() {
    let cfg = tiny_cfg(ArchitectureId::HmapTemporal);
    let net = build_net(&cfg).unwrap();
    let mut record = synth_record(1, 8);
    record.frames = Some(record.frames.unwrap()[..1].to_vec());
    let fwd = net.forward(&record).unwrap();
    assert!((fwd.probs.value().data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn missing_modalities_are_reported_with_study_and_architecture() {
    let record = StudyInputs::empty("s0007", 0);
    for arch in ArchitectureId::ALL {
        let net = build_net(&tiny_cfg(arch)).unwrap();
        let err = match net.forward(&record) {
            Err(e) => e,
            Ok(_) => panic!("{} accepted an empty record", arch.name()),
        };
        match err {
            ModelError::MissingModality { study_id, arch: a, .. } => {
                assert_eq!(study_id, "s0007");
                assert_eq!(a, arch.name());
            }
            other => panic!("expected missing modality, got {other}"),
        }
    }
}

#[test]
fn text_classifier_rejects_wrong_dimension() {
    let cfg = tiny_cfg(ArchitectureId::Text);
    let net = build_net(&cfg).unwrap();
    let mut record = synth_record(0, 10);
    record.text = Some(NdArray::zeros(&[5]));
    assert!(net.forward(&record).is_err());
}

#[test]
fn identical_seeds_build_identical_nets() {
    for arch in ArchitectureId::ALL {
        let a = build_net(&tiny_cfg(arch)).unwrap();
        let b = build_net(&tiny_cfg(arch)).unwrap();
        for ((n1, v1), (n2, v2)) in a.params().iter().zip(b.params().iter()) {
            assert_eq!(n1, n2);
            let (x, y) = (v1.value(), v2.value());
            assert!(x
                .data()
                .iter()
                .zip(y.data())
                .all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}
