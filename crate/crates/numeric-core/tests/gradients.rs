//! Finite-difference verification: 50 random shape/value instances per
//! differentiable kernel, each checked against central differences with
//! h = 1e-5 and a 1e-4 relative tolerance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use numeric_core::array::NdArray;
use numeric_core::finite_diff_check;
use numeric_core::graph::{reverse_sweep, Var};
use numeric_core::lstm::BiLstm;
use numeric_core::ops;
use numeric_core::rng::seeded_rng;

const H: f64 = 1e-5;
const TOL: f64 = 1e-4;
const INSTANCES: usize = 50;

/// Values bounded away from zero so relu/max kinks sit far from the
/// finite-difference probes.
fn sample_away_from_zero(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v: f64 = rng.gen_range(0.05..1.5);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Loss that weights each output element differently, so a misrouted
/// gradient cannot cancel out.
fn weighted_loss(out: &Var, rng: &mut ChaCha8Rng) -> Var {
    let shape = out.shape();
    let weights = Var::leaf(NdArray::from_fn(&shape, |_| rng.gen_range(-1.0..1.0)));
    ops::sum_all(&ops::hadamard(out, &weights).unwrap())
}

#[test]
fn conv2d_gradients() {
    let mut rng = seeded_rng(0xC0);
    for _ in 0..INSTANCES {
        let c_in = rng.gen_range(1..=3);
        let c_out = rng.gen_range(1..=3);
        let h = rng.gen_range(2..=7);
        let w = rng.gen_range(2..=7);
        let padding = rng.gen_range(0..=1usize);
        let kh = rng.gen_range(1..=(h + 2 * padding).min(3));
        let kw = rng.gen_range(1..=(w + 2 * padding).min(3));
        let stride = rng.gen_range(1..=2);
        let input = Var::leaf(NdArray::from_fn(&[c_in, h, w], |_| rng.gen_range(-1.0..1.0)));
        let kernels = Var::leaf(NdArray::from_fn(&[c_out, c_in, kh, kw], |_| {
            rng.gen_range(-1.0..1.0)
        }));
        let w_rng = seeded_rng(rng.gen());
        let err = finite_diff_check(&[input.clone(), kernels.clone()], H, || {
            let out = ops::conv2d(&input, &kernels, stride, padding)?;
            let mut w_rng = w_rng.clone();
            Ok(weighted_loss(&out, &mut w_rng))
        })
        .unwrap();
        assert!(err < TOL, "conv2d relative error {err}");
    }
}

#[test]
fn max_pool2d_gradients() {
    let mut rng = seeded_rng(0xA1);
    for _ in 0..INSTANCES {
        let c = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=3);
        let h = k * rng.gen_range(1..=3);
        let w = k * rng.gen_range(1..=3);
        // Stagger values so window maxima are unique and far apart.
        let mut values = sample_away_from_zero(&mut rng, c * h * w);
        for (i, v) in values.iter_mut().enumerate() {
            *v += (i % 17) as f64 * 1e-2;
        }
        let input = Var::leaf(NdArray::from_vec(&[c, h, w], values).unwrap());
        let w_rng = seeded_rng(rng.gen());
        let err = finite_diff_check(&[input.clone()], H, || {
            let out = ops::max_pool2d(&input, k)?;
            let mut w_rng = w_rng.clone();
            Ok(weighted_loss(&out, &mut w_rng))
        })
        .unwrap();
        assert!(err < TOL, "max_pool2d relative error {err}");
    }
}

#[test]
fn upsample_gradients() {
    let mut rng = seeded_rng(0xB2);
    for _ in 0..INSTANCES {
        let c = rng.gen_range(1..=3);
        let h = rng.gen_range(1..=4);
        let w = rng.gen_range(1..=4);
        let factor = rng.gen_range(1..=3);
        let input = Var::leaf(NdArray::from_fn(&[c, h, w], |_| rng.gen_range(-1.0..1.0)));
        let w_rng = seeded_rng(rng.gen());
        let err = finite_diff_check(&[input.clone()], H, || {
            let out = ops::upsample_nearest(&input, factor)?;
            let mut w_rng = w_rng.clone();
            Ok(weighted_loss(&out, &mut w_rng))
        })
        .unwrap();
        assert!(err < TOL, "upsample relative error {err}");
    }
}

#[test]
fn affine_gradients() {
    let mut rng = seeded_rng(0xD3);
    for _ in 0..INSTANCES {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let x = Var::leaf(NdArray::from_fn(&[n], |_| rng.gen_range(-1.0..1.0)));
        let w = Var::leaf(NdArray::from_fn(&[m, n], |_| rng.gen_range(-1.0..1.0)));
        let b = Var::leaf(NdArray::from_fn(&[m], |_| rng.gen_range(-1.0..1.0)));
        let w_rng = seeded_rng(rng.gen());
        let err = finite_diff_check(&[x.clone(), w.clone(), b.clone()], H, || {
            let out = ops::affine(&x, &w, &b)?;
            let mut w_rng = w_rng.clone();
            Ok(weighted_loss(&out, &mut w_rng))
        })
        .unwrap();
        assert!(err < TOL, "affine relative error {err}");
    }
}

#[test]
fn activation_gradients() {
    let mut rng = seeded_rng(0xE4);
    for kind in [
        ops::Activation::Relu,
        ops::Activation::Sigmoid,
        ops::Activation::Tanh,
    ] {
        for _ in 0..INSTANCES {
            let n = rng.gen_range(1..=8);
            let x = Var::leaf(
                NdArray::from_vec(&[n], sample_away_from_zero(&mut rng, n)).unwrap(),
            );
            let w_rng = seeded_rng(rng.gen());
            let err = finite_diff_check(&[x.clone()], H, || {
                let out = ops::activation(kind, &x);
                let mut w_rng = w_rng.clone();
                Ok(weighted_loss(&out, &mut w_rng))
            })
            .unwrap();
            assert!(err < TOL, "{kind:?} relative error {err}");
        }
    }
}

#[test]
fn softmax_cross_entropy_gradients() {
    let mut rng = seeded_rng(0xF5);
    for _ in 0..INSTANCES {
        let n = rng.gen_range(2..=6);
        let target = rng.gen_range(0..n);
        let x = Var::leaf(NdArray::from_fn(&[n], |_| rng.gen_range(-2.0..2.0)));
        let err = finite_diff_check(&[x.clone()], H, || {
            let probs = ops::softmax(&x)?;
            ops::cross_entropy_loss(&probs, target)
        })
        .unwrap();
        assert!(err < TOL, "softmax+ce relative error {err}");
    }
}

#[test]
fn mse_gradients() {
    let mut rng = seeded_rng(0x16);
    for _ in 0..INSTANCES {
        let n = rng.gen_range(1..=9);
        let pred = Var::leaf(NdArray::from_fn(&[n], |_| rng.gen_range(-2.0..2.0)));
        let target = Var::leaf(NdArray::from_fn(&[n], |_| rng.gen_range(-2.0..2.0)));
        let err = finite_diff_check(&[pred.clone(), target.clone()], H, || {
            ops::mse_loss(&pred, &target)
        })
        .unwrap();
        assert!(err < TOL, "mse relative error {err}");
    }
}

#[test]
fn elementwise_and_pool_gradients() {
    let mut rng = seeded_rng(0x27);
    for _ in 0..INSTANCES {
        let n = rng.gen_range(1..=6);
        let a = Var::leaf(NdArray::from_fn(&[n], |_| rng.gen_range(-1.0..1.0)));
        let b = Var::leaf(NdArray::from_fn(&[n], |_| rng.gen_range(-1.0..1.0)));
        let c = rng.gen_range(-2.0..2.0);
        let err = finite_diff_check(&[a.clone(), b.clone()], H, || {
            let sum = ops::add(&a, &b)?;
            let prod = ops::hadamard(&sum, &a)?;
            Ok(ops::sum_all(&ops::scale(&prod, c)))
        })
        .unwrap();
        assert!(err < TOL, "elementwise relative error {err}");

        let ch = rng.gen_range(1..=3);
        let h = rng.gen_range(1..=4);
        let w = rng.gen_range(1..=4);
        let img = Var::leaf(NdArray::from_fn(&[ch, h, w], |_| rng.gen_range(-1.0..1.0)));
        let w_rng = seeded_rng(rng.gen());
        let err = finite_diff_check(&[img.clone()], H, || {
            let out = ops::global_avg_pool(&img)?;
            let mut w_rng = w_rng.clone();
            Ok(weighted_loss(&out, &mut w_rng))
        })
        .unwrap();
        assert!(err < TOL, "global_avg_pool relative error {err}");
    }
}

#[test]
fn bilstm_gradients() {
    let mut rng = seeded_rng(0x38);
    for _ in 0..INSTANCES {
        let d = rng.gen_range(1..=2);
        let hidden = rng.gen_range(1..=2);
        let len = rng.gen_range(1..=3);
        let cell = BiLstm::init(d, hidden, &mut rng);
        let seq: Vec<Var> = (0..len)
            .map(|_| Var::leaf(NdArray::from_fn(&[d], |_| rng.gen_range(-1.0..1.0))))
            .collect();
        let mut params: Vec<Var> = cell.params("p").into_iter().map(|(_, v)| v).collect();
        params.extend(seq.iter().cloned());
        let w_rng = seeded_rng(rng.gen());
        let err = finite_diff_check(&params, H, || {
            let out = cell.run(&seq)?;
            let mut w_rng = w_rng.clone();
            Ok(weighted_loss(&out, &mut w_rng))
        })
        .unwrap();
        assert!(err < TOL, "bilstm relative error {err}");
    }
}

#[test]
fn composite_graph_matches_finite_differences() {
    // conv -> pool -> affine -> softmax -> cross-entropy, the spine of the
    // image classifiers, verified end to end.
    let mut rng = seeded_rng(0x49);
    let input = Var::leaf(NdArray::from_fn(&[1, 4, 4], |_| rng.gen_range(-1.0..1.0)));
    let kernels = Var::leaf(NdArray::from_fn(&[2, 1, 3, 3], |_| rng.gen_range(-0.7..0.7)));
    let w = Var::leaf(NdArray::from_fn(&[3, 2], |_| rng.gen_range(-0.7..0.7)));
    let b = Var::leaf(NdArray::from_fn(&[3], |_| rng.gen_range(-0.2..0.2)));
    let params = [input.clone(), kernels.clone(), w.clone(), b.clone()];
    let err = finite_diff_check(&params, H, || {
        let conv = ops::conv2d(&input, &kernels, 1, 1)?;
        let act = ops::relu(&conv);
        let pooled = ops::max_pool2d(&act, 2)?;
        let feat = ops::global_avg_pool(&pooled)?;
        let logits = ops::affine(&feat, &w, &b)?;
        let probs = ops::softmax(&logits)?;
        ops::cross_entropy_loss(&probs, 1)
    })
    .unwrap();
    assert!(err < TOL, "composite relative error {err}");
}

#[test]
fn reverse_sweep_accumulates_across_batch() {
    // Two sweeps without zeroing sum the gradients, which is what the
    // training loop relies on for mini-batches.
    let x = Var::leaf(NdArray::scalar(2.0));
    for _ in 0..2 {
        let loss = ops::hadamard(&x, &x).unwrap();
        reverse_sweep(&loss).unwrap();
    }
    assert_eq!(x.grad().scalar_value(), 8.0);
}
