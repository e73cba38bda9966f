use std::cell::RefCell;
use std::collections::HashSet;
use std::rc::Rc;

use crate::array::NdArray;
use crate::error::NumericError;

/// One node of the reverse-mode graph: a value, its accumulated gradient,
/// and the backward rule that scatters the gradient to its parents.
pub struct Node {
    pub value: NdArray,
    pub grad: NdArray,
    parents: Vec<Var>,
    backward: Option<Box<dyn Fn(&Node)>>,
}

/// Shared handle to a graph node. Leaves (parameters and inputs) outlive
/// the per-sample graphs built on top of them; intermediate nodes are
/// dropped with the loss they feed.
#[derive(Clone)]
pub struct Var(Rc<RefCell<Node>>);

impl Var {
    /// Leaf node with no parents. Its gradient accumulates across sweeps
    /// until explicitly zeroed.
    pub fn leaf(value: NdArray) -> Var {
        let grad = NdArray::zeros(value.shape());
        Var(Rc::new(RefCell::new(Node {
            value,
            grad,
            parents: Vec::new(),
            backward: None,
        })))
    }

    pub(crate) fn from_op(
        value: NdArray,
        parents: Vec<Var>,
        backward: Box<dyn Fn(&Node)>,
    ) -> Var {
        value.debug_assert_finite("forward op output");
        let grad = NdArray::zeros(value.shape());
        Var(Rc::new(RefCell::new(Node {
            value,
            grad,
            parents,
            backward: Some(backward),
        })))
    }

    pub fn shape(&self) -> Vec<usize> {
        self.0.borrow().value.shape().to_vec()
    }

    pub fn value(&self) -> NdArray {
        self.0.borrow().value.clone()
    }

    /// Read access without cloning the buffer.
    pub fn with_value<R>(&self, f: impl FnOnce(&NdArray) -> R) -> R {
        f(&self.0.borrow().value)
    }

    pub fn grad(&self) -> NdArray {
        self.0.borrow().grad.clone()
    }

    pub fn set_value(&self, value: NdArray) {
        let mut node = self.0.borrow_mut();
        assert_eq!(
            node.value.shape(),
            value.shape(),
            "set_value must preserve shape"
        );
        node.value = value;
    }

    pub fn value_at(&self, index: usize) -> f64 {
        self.0.borrow().value.data()[index]
    }

    pub fn set_value_at(&self, index: usize, v: f64) {
        self.0.borrow_mut().value.data_mut()[index] = v;
    }

    pub fn zero_grad(&self) {
        self.0.borrow_mut().grad.fill(0.0);
    }

    pub fn scale_grad(&self, factor: f64) {
        self.0.borrow_mut().grad.scale_assign(factor);
    }

    /// Adds `delta` into the accumulated gradient. Used by backward rules.
    pub(crate) fn accumulate_grad(&self, delta: &NdArray) {
        delta.debug_assert_finite("backward gradient");
        self.0.borrow_mut().grad.add_assign(delta);
    }

    /// In-place parameter update used by the optimizer.
    pub fn update_value(&self, f: impl FnMut(&mut [f64])) {
        let mut node = self.0.borrow_mut();
        let mut f = f;
        f(node.value.data_mut());
        node.value.debug_assert_finite("parameter update");
    }

    pub fn scalar_value(&self) -> f64 {
        self.0.borrow().value.scalar_value()
    }

    fn ptr(&self) -> *const RefCell<Node> {
        Rc::as_ptr(&self.0)
    }
}

/// Backpropagates d(loss)/d(node) into every node reachable from `loss`.
///
/// Gradients accumulate: leaves keep whatever was already in their grad
/// buffer, which is how mini-batches sum per-sample gradients before an
/// optimizer step. The loss must be scalar and the graph acyclic.
pub fn reverse_sweep(loss: &Var) -> Result<(), NumericError> {
    {
        let node = loss.0.borrow();
        if !node.value.is_scalar() {
            return Err(NumericError::argument(format!(
                "reverse_sweep requires a scalar loss, got shape {:?}",
                node.value.shape()
            )));
        }
    }

    // Iterative post-order DFS: children are pushed before their node is
    // emitted, so `order` ends parent-before-child when reversed.
    let mut order: Vec<Var> = Vec::new();
    let mut visited: HashSet<*const RefCell<Node>> = HashSet::new();
    let mut stack: Vec<(Var, bool)> = vec![(loss.clone(), false)];
    while let Some((var, expanded)) = stack.pop() {
        if expanded {
            order.push(var);
            continue;
        }
        if !visited.insert(var.ptr()) {
            continue;
        }
        stack.push((var.clone(), true));
        for parent in var.0.borrow().parents.iter() {
            stack.push((parent.clone(), false));
        }
    }

    {
        let mut node = loss.0.borrow_mut();
        let g = node.grad.data_mut();
        g[0] += 1.0;
    }

    for var in order.iter().rev() {
        let node = var.0.borrow();
        if let Some(backward) = &node.backward {
            backward(&node);
        }
    }
    Ok(())
}
