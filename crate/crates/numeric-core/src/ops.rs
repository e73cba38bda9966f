//! Differentiable kernels. Every function validates shapes, computes the
//! forward value, and registers a backward rule that accumulates into the
//! parents' gradients.

use crate::array::NdArray;
use crate::error::NumericError;
use crate::graph::Var;

/// 2D cross-correlation (no kernel flip) of a [C,H,W] input with
/// [C_out,C_in,kh,kw] kernels.
pub fn conv2d(
    input: &Var,
    kernels: &Var,
    stride: usize,
    padding: usize,
) -> Result<Var, NumericError> {
    let in_shape = input.shape();
    let k_shape = kernels.shape();
    if in_shape.len() != 3 {
        return Err(NumericError::dimension(
            "input rank",
            format!("conv2d input must be [C,H,W], got {:?}", in_shape),
        ));
    }
    if k_shape.len() != 4 {
        return Err(NumericError::dimension(
            "kernel rank",
            format!("conv2d kernels must be [C_out,C_in,kh,kw], got {:?}", k_shape),
        ));
    }
    if stride < 1 {
        return Err(NumericError::argument("conv2d stride must be >= 1"));
    }
    let (c_in, h, w) = (in_shape[0], in_shape[1], in_shape[2]);
    let (c_out, kc, kh, kw) = (k_shape[0], k_shape[1], k_shape[2], k_shape[3]);
    if kc != c_in {
        return Err(NumericError::dimension(
            "input channels",
            format!("kernels expect {} channels, input has {}", kc, c_in),
        ));
    }
    if kh > h + 2 * padding {
        return Err(NumericError::dimension(
            "kernel height",
            format!("kh={} exceeds padded input height {}", kh, h + 2 * padding),
        ));
    }
    if kw > w + 2 * padding {
        return Err(NumericError::dimension(
            "kernel width",
            format!("kw={} exceeds padded input width {}", kw, w + 2 * padding),
        ));
    }
    let h_out = (h + 2 * padding - kh) / stride + 1;
    let w_out = (w + 2 * padding - kw) / stride + 1;

    let out = input.with_value(|iv| {
        kernels.with_value(|kv| {
            conv2d_forward(iv, kv, stride, padding, c_in, h, w, c_out, kh, kw, h_out, w_out)
        })
    });

    let input_p = input.clone();
    let kernels_p = kernels.clone();
    Ok(Var::from_op(
        out,
        vec![input.clone(), kernels.clone()],
        Box::new(move |node| {
            let gout = &node.grad;
            let in_val = input_p.value();
            let k_val = kernels_p.value();
            let (d_in, d_k) = conv2d_backward(
                gout, &in_val, &k_val, stride, padding, c_in, h, w, c_out, kh, kw, h_out, w_out,
            );
            input_p.accumulate_grad(&d_in);
            kernels_p.accumulate_grad(&d_k);
        }),
    ))
}

/// Valid output-column range for one kernel column at stride 1:
/// ox in [ox0, ox1) keeps ix = ox + kx - padding inside [0, w).
#[inline]
fn stride1_bounds(kx: usize, padding: usize, w: usize, w_out: usize) -> (usize, usize) {
    let ox0 = padding.saturating_sub(kx);
    let ox1 = ((w + padding) as i64 - kx as i64).clamp(0, w_out as i64) as usize;
    (ox0, ox1)
}

/// dst[i] += weight * src[i]; independent lanes, so this vectorizes.
#[inline]
fn axpy(dst: &mut [f64], src: &[f64], weight: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += weight * s;
    }
}

/// Dot product with four independent accumulators; the fixed summation
/// order keeps results deterministic while letting the lanes vectorize.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..n {
        tail += a[j] * b[j];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// Copies [C,H,W] data into a zero-bordered [C,H+2,W+2] scratch so the
/// 3x3 kernels can run uniform interior loops.
fn pad1(data: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let (hp, wp) = (h + 2, w + 2);
    let mut out = vec![0.0; c * hp * wp];
    for ci in 0..c {
        for y in 0..h {
            let src = ci * h * w + y * w;
            let dst = ci * hp * wp + (y + 1) * wp + 1;
            out[dst..dst + w].copy_from_slice(&data[src..src + w]);
        }
    }
    out
}

/// out_row[ox] += sum over the 3x3 stencil of weights times the padded
/// rows; one fused pass per output row keeps the loop vectorizable.
#[inline]
fn stencil3x3_row(out_row: &mut [f64], r0: &[f64], r1: &[f64], r2: &[f64], k: &[f64]) {
    let w = out_row.len();
    // exact-length subslices let the bounds checks vanish from the loop
    let r0 = &r0[..w + 2];
    let r1 = &r1[..w + 2];
    let r2 = &r2[..w + 2];
    let k = &k[..9];
    for ox in 0..w {
        let acc = k[0] * r0[ox]
            + k[1] * r0[ox + 1]
            + k[2] * r0[ox + 2]
            + k[3] * r1[ox]
            + k[4] * r1[ox + 1]
            + k[5] * r1[ox + 2]
            + k[6] * r2[ox]
            + k[7] * r2[ox + 1]
            + k[8] * r2[ox + 2];
        out_row[ox] += acc;
    }
}

fn conv3x3_forward(
    input: &NdArray,
    kernels: &NdArray,
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
) -> NdArray {
    let mut out = NdArray::zeros(&[c_out, h, w]);
    let padded = pad1(input.data(), c_in, h, w);
    let wp = w + 2;
    let k_data = kernels.data();
    let out_data = out.data_mut();
    for co in 0..c_out {
        for ci in 0..c_in {
            let k = &k_data[(co * c_in + ci) * 9..(co * c_in + ci) * 9 + 9];
            let chan = &padded[ci * (h + 2) * wp..(ci + 1) * (h + 2) * wp];
            for oy in 0..h {
                let out_row = &mut out_data[(co * h + oy) * w..(co * h + oy) * w + w];
                stencil3x3_row(
                    out_row,
                    &chan[oy * wp..],
                    &chan[(oy + 1) * wp..],
                    &chan[(oy + 2) * wp..],
                    k,
                );
            }
        }
    }
    out
}

fn conv3x3_backward(
    gout: &NdArray,
    input: &NdArray,
    kernels: &NdArray,
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
) -> (NdArray, NdArray) {
    let mut d_in = NdArray::zeros(&[c_in, h, w]);
    let mut d_k = NdArray::zeros(&[c_out, c_in, 3, 3]);
    let wp = w + 2;
    let in_padded = pad1(input.data(), c_in, h, w);
    let g_padded = pad1(gout.data(), c_out, h, w);
    let g_data = gout.data();
    let k_data = kernels.data();
    {
        let d_k_data = d_k.data_mut();
        let d_in_data = d_in.data_mut();
        for co in 0..c_out {
            let g_chan = &g_padded[co * (h + 2) * wp..(co + 1) * (h + 2) * wp];
            for ci in 0..c_in {
                let k_off = (co * c_in + ci) * 9;
                let k = &k_data[k_off..k_off + 9];
                // kernel gradient: one pass per row with the nine shifted
                // products held in registers
                let in_chan = &in_padded[ci * (h + 2) * wp..(ci + 1) * (h + 2) * wp];
                let mut acc = [0.0f64; 9];
                for oy in 0..h {
                    let g_row = &g_data[(co * h + oy) * w..(co * h + oy) * w + w];
                    let r0 = &in_chan[oy * wp..oy * wp + w + 2];
                    let r1 = &in_chan[(oy + 1) * wp..(oy + 1) * wp + w + 2];
                    let r2 = &in_chan[(oy + 2) * wp..(oy + 2) * wp + w + 2];
                    for ox in 0..w {
                        let g = g_row[ox];
                        acc[0] += g * r0[ox];
                        acc[1] += g * r0[ox + 1];
                        acc[2] += g * r0[ox + 2];
                        acc[3] += g * r1[ox];
                        acc[4] += g * r1[ox + 1];
                        acc[5] += g * r1[ox + 2];
                        acc[6] += g * r2[ox];
                        acc[7] += g * r2[ox + 1];
                        acc[8] += g * r2[ox + 2];
                    }
                }
                for (slot, a) in d_k_data[k_off..k_off + 9].iter_mut().zip(acc) {
                    *slot += a;
                }
                // input gradient: correlation of the padded upstream
                // gradient with the flipped kernel
                let flipped = [k[8], k[7], k[6], k[5], k[4], k[3], k[2], k[1], k[0]];
                for iy in 0..h {
                    let d_row = &mut d_in_data[(ci * h + iy) * w..(ci * h + iy) * w + w];
                    stencil3x3_row(
                        d_row,
                        &g_chan[iy * wp..],
                        &g_chan[(iy + 1) * wp..],
                        &g_chan[(iy + 2) * wp..],
                        &flipped,
                    );
                }
            }
        }
    }
    (d_in, d_k)
}

#[allow(clippy::too_many_arguments)]
fn conv2d_forward(
    input: &NdArray,
    kernels: &NdArray,
    stride: usize,
    padding: usize,
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    kh: usize,
    kw: usize,
    h_out: usize,
    w_out: usize,
) -> NdArray {
    if stride == 1 && padding == 1 && kh == 3 && kw == 3 && h >= 1 && w >= 1 {
        return conv3x3_forward(input, kernels, c_in, h, w, c_out);
    }
    let mut out = NdArray::zeros(&[c_out, h_out, w_out]);
    let in_data = input.data();
    let k_data = kernels.data();
    let out_data = out.data_mut();
    for co in 0..c_out {
        for ci in 0..c_in {
            let in_base = ci * h * w;
            for ky in 0..kh {
                for kx in 0..kw {
                    let weight = k_data[((co * c_in + ci) * kh + ky) * kw + kx];
                    if weight == 0.0 {
                        continue;
                    }
                    if stride == 1 {
                        let (ox0, ox1) = stride1_bounds(kx, padding, w, w_out);
                        if ox0 >= ox1 {
                            continue;
                        }
                        let ix0 = ox0 + kx - padding;
                        let run = ox1 - ox0;
                        for oy in 0..h_out {
                            let iy = (oy + ky) as i64 - padding as i64;
                            if iy < 0 || iy >= h as i64 {
                                continue;
                            }
                            let in_row = in_base + iy as usize * w + ix0;
                            let out_row = (co * h_out + oy) * w_out + ox0;
                            axpy(
                                &mut out_data[out_row..out_row + run],
                                &in_data[in_row..in_row + run],
                                weight,
                            );
                        }
                    } else {
                        for oy in 0..h_out {
                            let iy = (oy * stride + ky) as i64 - padding as i64;
                            if iy < 0 || iy >= h as i64 {
                                continue;
                            }
                            let in_row = in_base + iy as usize * w;
                            let out_row = (co * h_out + oy) * w_out;
                            for ox in 0..w_out {
                                let ix = (ox * stride + kx) as i64 - padding as i64;
                                if ix < 0 || ix >= w as i64 {
                                    continue;
                                }
                                out_data[out_row + ox] += weight * in_data[in_row + ix as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn conv2d_backward(
    gout: &NdArray,
    input: &NdArray,
    kernels: &NdArray,
    stride: usize,
    padding: usize,
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    kh: usize,
    kw: usize,
    h_out: usize,
    w_out: usize,
) -> (NdArray, NdArray) {
    if stride == 1 && padding == 1 && kh == 3 && kw == 3 && h >= 1 && w >= 1 {
        return conv3x3_backward(gout, input, kernels, c_in, h, w, c_out);
    }
    let mut d_in = NdArray::zeros(&[c_in, h, w]);
    let mut d_k = NdArray::zeros(&[c_out, c_in, kh, kw]);
    let g_data = gout.data();
    let in_data = input.data();
    let k_data = kernels.data();
    {
        let d_in_data = d_in.data_mut();
        let d_k_data = d_k.data_mut();
        for co in 0..c_out {
            for ci in 0..c_in {
                let in_base = ci * h * w;
                for ky in 0..kh {
                    for kx in 0..kw {
                        let k_idx = ((co * c_in + ci) * kh + ky) * kw + kx;
                        let weight = k_data[k_idx];
                        let mut k_grad = 0.0;
                        if stride == 1 {
                            let (ox0, ox1) = stride1_bounds(kx, padding, w, w_out);
                            if ox0 >= ox1 {
                                continue;
                            }
                            let ix0 = ox0 + kx - padding;
                            let run = ox1 - ox0;
                            for oy in 0..h_out {
                                let iy = (oy + ky) as i64 - padding as i64;
                                if iy < 0 || iy >= h as i64 {
                                    continue;
                                }
                                let in_row = in_base + iy as usize * w + ix0;
                                let out_row = (co * h_out + oy) * w_out + ox0;
                                let g_row = &g_data[out_row..out_row + run];
                                k_grad += dot(g_row, &in_data[in_row..in_row + run]);
                                axpy(&mut d_in_data[in_row..in_row + run], g_row, weight);
                            }
                        } else {
                            for oy in 0..h_out {
                                let iy = (oy * stride + ky) as i64 - padding as i64;
                                if iy < 0 || iy >= h as i64 {
                                    continue;
                                }
                                let in_row = in_base + iy as usize * w;
                                let out_row = (co * h_out + oy) * w_out;
                                for ox in 0..w_out {
                                    let ix = (ox * stride + kx) as i64 - padding as i64;
                                    if ix < 0 || ix >= w as i64 {
                                        continue;
                                    }
                                    let g = g_data[out_row + ox];
                                    k_grad += g * in_data[in_row + ix as usize];
                                    d_in_data[in_row + ix as usize] += weight * g;
                                }
                            }
                        }
                        d_k_data[k_idx] += k_grad;
                    }
                }
            }
        }
    }
    (d_in, d_k)
}

/// Non-overlapping k-by-k max pooling. Gradient flows to the first maximum
/// of each window in row-major scan order.
pub fn max_pool2d(input: &Var, k: usize) -> Result<Var, NumericError> {
    let shape = input.shape();
    if shape.len() != 3 {
        return Err(NumericError::dimension(
            "input rank",
            format!("max_pool2d input must be [C,H,W], got {:?}", shape),
        ));
    }
    if k < 1 {
        return Err(NumericError::argument("max_pool2d window must be >= 1"));
    }
    let (c, h, w) = (shape[0], shape[1], shape[2]);
    if h % k != 0 {
        return Err(NumericError::dimension(
            "height",
            format!("height {} not divisible by window {}", h, k),
        ));
    }
    if w % k != 0 {
        return Err(NumericError::dimension(
            "width",
            format!("width {} not divisible by window {}", w, k),
        ));
    }
    let (h_out, w_out) = (h / k, w / k);
    let mut out = NdArray::zeros(&[c, h_out, w_out]);
    let mut argmax = vec![0usize; c * h_out * w_out];
    input.with_value(|iv| {
        let data = iv.data();
        let out_data = out.data_mut();
        for ci in 0..c {
            for oy in 0..h_out {
                for ox in 0..w_out {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = 0;
                    for dy in 0..k {
                        let row = (ci * h + oy * k + dy) * w + ox * k;
                        for dx in 0..k {
                            let v = data[row + dx];
                            if v > best {
                                best = v;
                                best_idx = row + dx;
                            }
                        }
                    }
                    let o = (ci * h_out + oy) * w_out + ox;
                    out_data[o] = best;
                    argmax[o] = best_idx;
                }
            }
        }
    });

    let input_p = input.clone();
    Ok(Var::from_op(
        out,
        vec![input.clone()],
        Box::new(move |node| {
            let mut d_in = NdArray::zeros(&[c, h, w]);
            {
                let d = d_in.data_mut();
                for (o, &src) in argmax.iter().enumerate() {
                    d[src] += node.grad.data()[o];
                }
            }
            input_p.accumulate_grad(&d_in);
        }),
    ))
}

/// Nearest-neighbour upsampling: each cell becomes a factor-by-factor block.
pub fn upsample_nearest(input: &Var, factor: usize) -> Result<Var, NumericError> {
    let shape = input.shape();
    if shape.len() != 3 {
        return Err(NumericError::dimension(
            "input rank",
            format!("upsample_nearest input must be [C,H,W], got {:?}", shape),
        ));
    }
    if factor < 1 {
        return Err(NumericError::argument("upsample factor must be >= 1"));
    }
    let (c, h, w) = (shape[0], shape[1], shape[2]);
    let (h_out, w_out) = (h * factor, w * factor);
    let mut out = NdArray::zeros(&[c, h_out, w_out]);
    input.with_value(|iv| {
        let data = iv.data();
        let out_data = out.data_mut();
        for ci in 0..c {
            for y in 0..h_out {
                let in_row = (ci * h + y / factor) * w;
                let out_row = (ci * h_out + y) * w_out;
                for x in 0..w_out {
                    out_data[out_row + x] = data[in_row + x / factor];
                }
            }
        }
    });

    let input_p = input.clone();
    Ok(Var::from_op(
        out,
        vec![input.clone()],
        Box::new(move |node| {
            let mut d_in = NdArray::zeros(&[c, h, w]);
            {
                let d = d_in.data_mut();
                let g = node.grad.data();
                for ci in 0..c {
                    for y in 0..h_out {
                        let in_row = (ci * h + y / factor) * w;
                        let out_row = (ci * h_out + y) * w_out;
                        for x in 0..w_out {
                            d[in_row + x / factor] += g[out_row + x];
                        }
                    }
                }
            }
            input_p.accumulate_grad(&d_in);
        }),
    ))
}

/// W.x without bias. Used as a building block for `affine` and the LSTM
/// recurrences.
pub fn matvec(weight: &Var, x: &Var) -> Result<Var, NumericError> {
    let w_shape = weight.shape();
    let x_shape = x.shape();
    if w_shape.len() != 2 {
        return Err(NumericError::dimension(
            "weight rank",
            format!("matvec weight must be [m,n], got {:?}", w_shape),
        ));
    }
    if x_shape.len() != 1 {
        return Err(NumericError::dimension(
            "vector rank",
            format!("matvec input must be [n], got {:?}", x_shape),
        ));
    }
    let (m, n) = (w_shape[0], w_shape[1]);
    if x_shape[0] != n {
        return Err(NumericError::dimension(
            "inner dimension",
            format!("weight is [{},{}] but vector has length {}", m, n, x_shape[0]),
        ));
    }
    let mut out = NdArray::zeros(&[m]);
    weight.with_value(|wv| {
        x.with_value(|xv| {
            let w_data = wv.data();
            let x_data = xv.data();
            for (i, o) in out.data_mut().iter_mut().enumerate() {
                *o = dot(&w_data[i * n..(i + 1) * n], x_data);
            }
        })
    });

    let weight_p = weight.clone();
    let x_p = x.clone();
    Ok(Var::from_op(
        out,
        vec![weight.clone(), x.clone()],
        Box::new(move |node| {
            let g = node.grad.data().to_vec();
            let w_val = weight_p.value();
            let x_val = x_p.value();
            let mut d_w = NdArray::zeros(&[m, n]);
            let mut d_x = NdArray::zeros(&[n]);
            {
                let dw = d_w.data_mut();
                let dx = d_x.data_mut();
                for i in 0..m {
                    let gi = g[i];
                    if gi == 0.0 {
                        continue;
                    }
                    let row = &w_val.data()[i * n..(i + 1) * n];
                    let dw_row = &mut dw[i * n..(i + 1) * n];
                    for j in 0..n {
                        dw_row[j] += gi * x_val.data()[j];
                        dx[j] += gi * row[j];
                    }
                }
            }
            weight_p.accumulate_grad(&d_w);
            x_p.accumulate_grad(&d_x);
        }),
    ))
}

/// W.x + b.
pub fn affine(x: &Var, weight: &Var, bias: &Var) -> Result<Var, NumericError> {
    let b_shape = bias.shape();
    let w_shape = weight.shape();
    if b_shape.len() != 1 || w_shape.len() != 2 || b_shape[0] != w_shape[0] {
        return Err(NumericError::dimension(
            "bias length",
            format!("weight {:?} needs bias of length {}, got {:?}", w_shape, w_shape.first().copied().unwrap_or(0), b_shape),
        ));
    }
    let wx = matvec(weight, x)?;
    add(&wx, bias)
}

/// Supported elementwise nonlinearities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

pub fn activation(kind: Activation, x: &Var) -> Var {
    match kind {
        Activation::Relu => relu(x),
        Activation::Sigmoid => sigmoid(x),
        Activation::Tanh => tanh(x),
    }
}

pub fn relu(x: &Var) -> Var {
    let out = x.with_value(|v| v.map(|a| if a > 0.0 { a } else { 0.0 }));
    let x_p = x.clone();
    Var::from_op(
        out,
        vec![x.clone()],
        Box::new(move |node| {
            let x_val = x_p.value();
            let delta = node.grad.zip_map(&x_val, |g, a| if a > 0.0 { g } else { 0.0 });
            x_p.accumulate_grad(&delta);
        }),
    )
}

fn stable_sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Var) -> Var {
    let out = x.with_value(|v| v.map(stable_sigmoid));
    let x_p = x.clone();
    Var::from_op(
        out,
        vec![x.clone()],
        Box::new(move |node| {
            let delta = node.grad.zip_map(&node.value, |g, y| g * y * (1.0 - y));
            x_p.accumulate_grad(&delta);
        }),
    )
}

pub fn tanh(x: &Var) -> Var {
    let out = x.with_value(|v| v.map(f64::tanh));
    let x_p = x.clone();
    Var::from_op(
        out,
        vec![x.clone()],
        Box::new(move |node| {
            let delta = node.grad.zip_map(&node.value, |g, y| g * (1.0 - y * y));
            x_p.accumulate_grad(&delta);
        }),
    )
}

/// Max-subtracted softmax over a vector.
pub fn softmax(x: &Var) -> Result<Var, NumericError> {
    let shape = x.shape();
    if shape.len() != 1 || shape[0] == 0 {
        return Err(NumericError::dimension(
            "input rank",
            format!("softmax expects a non-empty vector, got {:?}", shape),
        ));
    }
    let out = x.with_value(|v| {
        let max = v.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = v.data().iter().map(|a| (a - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        NdArray::from_vec(v.shape(), exps.into_iter().map(|e| e / sum).collect()).unwrap()
    });
    let x_p = x.clone();
    Ok(Var::from_op(
        out,
        vec![x.clone()],
        Box::new(move |node| {
            let y = node.value.data();
            let g = node.grad.data();
            let dot: f64 = y.iter().zip(g).map(|(yi, gi)| yi * gi).sum();
            let delta = NdArray::from_vec(
                node.value.shape(),
                y.iter().zip(g).map(|(yi, gi)| yi * (gi - dot)).collect(),
            )
            .unwrap();
            x_p.accumulate_grad(&delta);
        }),
    ))
}

const PROB_CLAMP: f64 = 1e-12;

/// Negative log-likelihood of the target class: -ln(probs[target]) with
/// the probability clamped at 1e-12.
pub fn cross_entropy_loss(probs: &Var, target: usize) -> Result<Var, NumericError> {
    let shape = probs.shape();
    if shape.len() != 1 {
        return Err(NumericError::dimension(
            "input rank",
            format!("cross_entropy_loss expects a vector, got {:?}", shape),
        ));
    }
    if target >= shape[0] {
        return Err(NumericError::argument(format!(
            "target class {} out of range for {} classes",
            target, shape[0]
        )));
    }
    let p = probs.value_at(target);
    let out = NdArray::scalar(-(p.max(PROB_CLAMP)).ln());
    let probs_p = probs.clone();
    let n = shape[0];
    Ok(Var::from_op(
        out,
        vec![probs.clone()],
        Box::new(move |node| {
            let g = node.grad.scalar_value();
            let p = probs_p.value_at(target);
            let mut delta = NdArray::zeros(&[n]);
            if p > PROB_CLAMP {
                delta.data_mut()[target] = -g / p;
            }
            probs_p.accumulate_grad(&delta);
        }),
    ))
}

/// Mean of squared elementwise differences.
pub fn mse_loss(pred: &Var, target: &Var) -> Result<Var, NumericError> {
    let p_shape = pred.shape();
    let t_shape = target.shape();
    if p_shape != t_shape {
        return Err(NumericError::dimension(
            "shape",
            format!("mse_loss shapes differ: {:?} vs {:?}", p_shape, t_shape),
        ));
    }
    let n = pred.with_value(|v| v.len());
    if n == 0 {
        return Err(NumericError::empty("mse_loss on empty arrays"));
    }
    let sum: f64 = pred.with_value(|pv| {
        target.with_value(|tv| {
            pv.data()
                .iter()
                .zip(tv.data())
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
    });
    let out = NdArray::scalar(sum / n as f64);
    let pred_p = pred.clone();
    let target_p = target.clone();
    Ok(Var::from_op(
        out,
        vec![pred.clone(), target.clone()],
        Box::new(move |node| {
            let g = node.grad.scalar_value();
            let p_val = pred_p.value();
            let t_val = target_p.value();
            let scale = 2.0 * g / p_val.len() as f64;
            let d_pred = p_val.zip_map(&t_val, |a, b| scale * (a - b));
            let d_target = p_val.zip_map(&t_val, |a, b| -scale * (a - b));
            pred_p.accumulate_grad(&d_pred);
            target_p.accumulate_grad(&d_target);
        }),
    ))
}

/// Elementwise sum of two same-shape arrays.
pub fn add(a: &Var, b: &Var) -> Result<Var, NumericError> {
    if a.shape() != b.shape() {
        return Err(NumericError::dimension(
            "shape",
            format!("add shapes differ: {:?} vs {:?}", a.shape(), b.shape()),
        ));
    }
    let out = a.with_value(|av| b.with_value(|bv| av.zip_map(bv, |x, y| x + y)));
    let a_p = a.clone();
    let b_p = b.clone();
    Ok(Var::from_op(
        out,
        vec![a.clone(), b.clone()],
        Box::new(move |node| {
            a_p.accumulate_grad(&node.grad);
            b_p.accumulate_grad(&node.grad);
        }),
    ))
}

/// Elementwise product of two same-shape arrays.
pub fn hadamard(a: &Var, b: &Var) -> Result<Var, NumericError> {
    if a.shape() != b.shape() {
        return Err(NumericError::dimension(
            "shape",
            format!("hadamard shapes differ: {:?} vs {:?}", a.shape(), b.shape()),
        ));
    }
    let out = a.with_value(|av| b.with_value(|bv| av.zip_map(bv, |x, y| x * y)));
    let a_p = a.clone();
    let b_p = b.clone();
    Ok(Var::from_op(
        out,
        vec![a.clone(), b.clone()],
        Box::new(move |node| {
            let a_val = a_p.value();
            let b_val = b_p.value();
            let d_a = node.grad.zip_map(&b_val, |g, y| g * y);
            let d_b = node.grad.zip_map(&a_val, |g, x| g * x);
            a_p.accumulate_grad(&d_a);
            b_p.accumulate_grad(&d_b);
        }),
    ))
}

/// Multiplication by a constant.
pub fn scale(a: &Var, factor: f64) -> Var {
    let out = a.with_value(|v| v.map(|x| x * factor));
    let a_p = a.clone();
    Var::from_op(
        out,
        vec![a.clone()],
        Box::new(move |node| {
            let delta = node.grad.map(|g| g * factor);
            a_p.accumulate_grad(&delta);
        }),
    )
}

/// Sum of all elements, as a scalar.
pub fn sum_all(a: &Var) -> Var {
    let total: f64 = a.with_value(|v| v.data().iter().sum());
    let a_p = a.clone();
    Var::from_op(
        NdArray::scalar(total),
        vec![a.clone()],
        Box::new(move |node| {
            let g = node.grad.scalar_value();
            let shape = a_p.shape();
            a_p.accumulate_grad(&NdArray::full(&shape, g));
        }),
    )
}

/// Per-channel mean over the spatial dimensions: [C,H,W] -> [C].
pub fn global_avg_pool(input: &Var) -> Result<Var, NumericError> {
    let shape = input.shape();
    if shape.len() != 3 {
        return Err(NumericError::dimension(
            "input rank",
            format!("global_avg_pool input must be [C,H,W], got {:?}", shape),
        ));
    }
    let (c, h, w) = (shape[0], shape[1], shape[2]);
    let area = (h * w) as f64;
    let out = input.with_value(|v| {
        let data = v.data();
        NdArray::from_vec(
            &[c],
            (0..c)
                .map(|ci| data[ci * h * w..(ci + 1) * h * w].iter().sum::<f64>() / area)
                .collect(),
        )
        .unwrap()
    });
    let input_p = input.clone();
    Ok(Var::from_op(
        out,
        vec![input.clone()],
        Box::new(move |node| {
            let mut d_in = NdArray::zeros(&[c, h, w]);
            {
                let d = d_in.data_mut();
                for ci in 0..c {
                    let g = node.grad.data()[ci] / area;
                    for v in &mut d[ci * h * w..(ci + 1) * h * w] {
                        *v += g;
                    }
                }
            }
            input_p.accumulate_grad(&d_in);
        }),
    ))
}

/// Concatenation of 1-D vectors.
pub fn concat(parts: &[&Var]) -> Result<Var, NumericError> {
    if parts.is_empty() {
        return Err(NumericError::empty("concat of zero vectors"));
    }
    let mut lens = Vec::with_capacity(parts.len());
    for p in parts {
        let s = p.shape();
        if s.len() != 1 {
            return Err(NumericError::dimension(
                "input rank",
                format!("concat expects vectors, got {:?}", s),
            ));
        }
        lens.push(s[0]);
    }
    let total: usize = lens.iter().sum();
    let mut data = Vec::with_capacity(total);
    for p in parts {
        p.with_value(|v| data.extend_from_slice(v.data()));
    }
    let owned: Vec<Var> = parts.iter().map(|p| (*p).clone()).collect();
    let lens_b = lens.clone();
    let owned_b = owned.clone();
    Ok(Var::from_op(
        NdArray::from_vec(&[total], data)?,
        owned,
        Box::new(move |node| {
            let g = node.grad.data();
            let mut offset = 0;
            for (p, &len) in owned_b.iter().zip(&lens_b) {
                let delta = NdArray::from_vec(&[len], g[offset..offset + len].to_vec()).unwrap();
                p.accumulate_grad(&delta);
                offset += len;
            }
        }),
    ))
}

/// Shape change over the same buffer; gradients pass through untouched.
pub fn reshape(a: &Var, new_shape: &[usize]) -> Result<Var, NumericError> {
    let old_len: usize = a.shape().iter().product();
    let new_len: usize = new_shape.iter().product();
    if old_len != new_len {
        return Err(NumericError::dimension(
            "element count",
            format!("cannot reshape {:?} into {:?}", a.shape(), new_shape),
        ));
    }
    let out = a.with_value(|v| NdArray::from_vec(new_shape, v.data().to_vec()).unwrap());
    let a_p = a.clone();
    let old_shape = a.shape();
    Ok(Var::from_op(
        out,
        vec![a.clone()],
        Box::new(move |node| {
            let delta =
                NdArray::from_vec(&old_shape, node.grad.data().to_vec()).unwrap();
            a_p.accumulate_grad(&delta);
        }),
    ))
}
