//! LSTM recurrences built from the differentiable kernels, plus the
//! bidirectional wrapper used by the temporal classifiers.

use rand_chacha::ChaCha8Rng;

use crate::array::NdArray;
use crate::error::NumericError;
use crate::graph::Var;
use crate::ops;
use crate::rng::glorot_uniform;

/// Gate order used throughout: input, forget, output, candidate.
const GATES: usize = 4;

/// One LSTM direction. Each gate has its own input weight, recurrent
/// weight, and bias, so no slicing op is needed.
pub struct LstmCell {
    pub input_dim: usize,
    pub hidden: usize,
    /// Input weights per gate, each [hidden, input_dim].
    pub w: Vec<Var>,
    /// Recurrent weights per gate, each [hidden, hidden].
    pub u: Vec<Var>,
    /// Biases per gate, each [hidden].
    pub b: Vec<Var>,
}

impl LstmCell {
    pub fn init(input_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> LstmCell {
        let w = (0..GATES)
            .map(|_| Var::leaf(glorot_uniform(&[hidden, input_dim], input_dim, hidden, rng)))
            .collect();
        let u = (0..GATES)
            .map(|_| Var::leaf(glorot_uniform(&[hidden, hidden], hidden, hidden, rng)))
            .collect();
        let b = (0..GATES)
            .map(|_| Var::leaf(NdArray::zeros(&[hidden])))
            .collect();
        LstmCell {
            input_dim,
            hidden,
            w,
            u,
            b,
        }
    }

    pub fn zeroed(input_dim: usize, hidden: usize) -> LstmCell {
        let w = (0..GATES)
            .map(|_| Var::leaf(NdArray::zeros(&[hidden, input_dim])))
            .collect();
        let u = (0..GATES)
            .map(|_| Var::leaf(NdArray::zeros(&[hidden, hidden])))
            .collect();
        let b = (0..GATES)
            .map(|_| Var::leaf(NdArray::zeros(&[hidden])))
            .collect();
        LstmCell {
            input_dim,
            hidden,
            w,
            u,
            b,
        }
    }

    fn gate(&self, idx: usize, x: &Var, h: &Var) -> Result<Var, NumericError> {
        let wx = ops::matvec(&self.w[idx], x)?;
        let uh = ops::matvec(&self.u[idx], h)?;
        ops::add(&ops::add(&wx, &uh)?, &self.b[idx])
    }

    /// One recurrence step; returns (h', c').
    pub fn step(&self, x: &Var, h: &Var, c: &Var) -> Result<(Var, Var), NumericError> {
        let i = ops::sigmoid(&self.gate(0, x, h)?);
        let f = ops::sigmoid(&self.gate(1, x, h)?);
        let o = ops::sigmoid(&self.gate(2, x, h)?);
        let g = ops::tanh(&self.gate(3, x, h)?);
        let c_next = ops::add(&ops::hadamard(&f, c)?, &ops::hadamard(&i, &g)?)?;
        let h_next = ops::hadamard(&o, &ops::tanh(&c_next))?;
        Ok((h_next, c_next))
    }

    /// Final hidden state after running over the whole sequence from zero
    /// initial states.
    pub fn run(&self, seq: &[Var]) -> Result<Var, NumericError> {
        if seq.is_empty() {
            return Err(NumericError::empty("lstm over an empty sequence"));
        }
        let mut h = Var::leaf(NdArray::zeros(&[self.hidden]));
        let mut c = Var::leaf(NdArray::zeros(&[self.hidden]));
        for x in seq {
            let s = x.shape();
            if s != vec![self.input_dim] {
                return Err(NumericError::dimension(
                    "sequence element",
                    format!("expected [{}], got {:?}", self.input_dim, s),
                ));
            }
            let (h_next, c_next) = self.step(x, &h, &c)?;
            h = h_next;
            c = c_next;
        }
        Ok(h)
    }

    pub fn params(&self, prefix: &str) -> Vec<(String, Var)> {
        let names = ["i", "f", "o", "g"];
        let mut out = Vec::new();
        for (idx, gate) in names.iter().enumerate() {
            out.push((format!("{prefix}.w_{gate}"), self.w[idx].clone()));
            out.push((format!("{prefix}.u_{gate}"), self.u[idx].clone()));
            out.push((format!("{prefix}.b_{gate}"), self.b[idx].clone()));
        }
        out
    }
}

/// Forward and backward LSTM over a sequence; output is the concatenation
/// of the two final hidden states, length 2*hidden.
pub struct BiLstm {
    pub forward: LstmCell,
    pub backward: LstmCell,
}

impl BiLstm {
    pub fn init(input_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> BiLstm {
        BiLstm {
            forward: LstmCell::init(input_dim, hidden, rng),
            backward: LstmCell::init(input_dim, hidden, rng),
        }
    }

    pub fn zeroed(input_dim: usize, hidden: usize) -> BiLstm {
        BiLstm {
            forward: LstmCell::zeroed(input_dim, hidden),
            backward: LstmCell::zeroed(input_dim, hidden),
        }
    }

    pub fn run(&self, seq: &[Var]) -> Result<Var, NumericError> {
        if seq.is_empty() {
            return Err(NumericError::empty("bilstm over an empty sequence"));
        }
        let h_fwd = self.forward.run(seq)?;
        let reversed: Vec<Var> = seq.iter().rev().cloned().collect();
        let h_bwd = self.backward.run(&reversed)?;
        ops::concat(&[&h_fwd, &h_bwd])
    }

    pub fn params(&self, prefix: &str) -> Vec<(String, Var)> {
        let mut out = self.forward.params(&format!("{prefix}.fwd"));
        out.extend(self.backward.params(&format!("{prefix}.bwd")));
        out
    }
}

/// Runs a bidirectional LSTM with the given parameters over `seq`.
pub fn bilstm(cell: &BiLstm, seq: &[Var]) -> Result<Var, NumericError> {
    cell.run(seq)
}
