use crate::array::NdArray;
use crate::graph::Var;

/// Adam hyperparameters. Defaults follow the usual lr=1e-3, beta1=0.9,
/// beta2=0.999, epsilon=1e-8.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter optimizer state: step counter plus first/second moment
/// buffers of the parameter's shape.
pub struct AdamState {
    pub step: u64,
    m: NdArray,
    v: NdArray,
    cfg: AdamConfig,
}

impl AdamState {
    pub fn new(shape: &[usize], cfg: AdamConfig) -> AdamState {
        AdamState {
            step: 0,
            m: NdArray::zeros(shape),
            v: NdArray::zeros(shape),
            cfg,
        }
    }

    pub fn config(&self) -> AdamConfig {
        self.cfg
    }
}

/// One bias-corrected Adam update. Consumes the accumulated gradient and
/// zeroes it afterwards.
pub fn adam_step(param: &Var, state: &mut AdamState) {
    let grad = param.grad();
    assert_eq!(
        grad.shape(),
        state.m.shape(),
        "adam state shape must match the parameter"
    );
    state.step += 1;
    let t = state.step as i32;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.cfg;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    let m = state.m.data_mut();
    let v = state.v.data_mut();
    let g = grad.data();
    param.update_value(|values| {
        for (((value, m_i), v_i), &g_i) in
            values.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g)
        {
            *m_i = beta1 * *m_i + (1.0 - beta1) * g_i;
            *v_i = beta2 * *v_i + (1.0 - beta2) * g_i * g_i;
            let m_hat = *m_i / bc1;
            let v_hat = *v_i / bc2;
            *value -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
    });
    param.zero_grad();
}
