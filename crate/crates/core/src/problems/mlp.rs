//! One-hidden-layer feedforward classifier as an optimization problem.
//!
//! Sigmoid hidden activation, softmax output, mean cross-entropy loss, and
//! analytic backpropagation for the gradient. The objective is nonconvex,
//! so the problem is flagged accordingly and its Lipschitz constant is a
//! configured surrogate rather than a true bound.

use std::sync::Arc;

use super::{Dataset, Problem};
use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::sampling;

/// Default Lipschitz surrogate; chosen so the common benchmark step size
/// 0.12 satisfies every solver's step bound (2/(3L) = 0.125, 1/L = 0.1875).
pub const MLP_DEFAULT_LIPSCHITZ: f64 = 16.0 / 3.0;

/// Parameter layout inside the flat vector:
/// `[W1 (h x d), b1 (h), W2 (c x h), b2 (c)]`, all row-major.
#[derive(Debug, Clone, Copy)]
struct Layout {
    d: usize,
    h: usize,
    c: usize,
}

impl Layout {
    fn dim(&self) -> usize {
        self.h * self.d + self.h + self.c * self.h + self.c
    }
    fn b1(&self) -> usize {
        self.h * self.d
    }
    fn w2(&self) -> usize {
        self.h * self.d + self.h
    }
    fn b2(&self) -> usize {
        self.h * self.d + self.h + self.c * self.h
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Forward {
    hidden: Vec<f64>,
    probs: Vec<f64>,
    loss: f64,
}

fn forward(layout: Layout, params: &[f64], x: &[f64], label: usize) -> Forward {
    let Layout { d, h, c } = layout;
    let w1 = &params[..layout.b1()];
    let b1 = &params[layout.b1()..layout.w2()];
    let w2 = &params[layout.w2()..layout.b2()];
    let b2 = &params[layout.b2()..];

    let mut hidden = vec![0.0; h];
    for i in 0..h {
        let mut z = b1[i];
        for j in 0..d {
            z += w1[i * d + j] * x[j];
        }
        hidden[i] = sigmoid(z);
    }
    let mut logits = vec![0.0; c];
    for k in 0..c {
        let mut z = b2[k];
        for i in 0..h {
            z += w2[k * h + i] * hidden[i];
        }
        logits[k] = z;
    }
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    let mut total = 0.0;
    let mut probs = vec![0.0; c];
    for k in 0..c {
        probs[k] = (logits[k] - m).exp();
        total += probs[k];
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    let loss = -(probs[label].max(1e-300)).ln();
    Forward { hidden, probs, loss }
}

/// Builds the classifier problem. `seed` fixes the uniform `[0, 1)`
/// initialization returned by [`mlp_initial_parameters`] for this layout.
pub fn build_mlp_classifier(data: &Dataset, hidden: usize, seed: u64) -> Result<Problem> {
    if hidden == 0 {
        return Err(Error::InvalidParameter("hidden width must be >= 1".into()));
    }
    if data.samples() == 0 {
        return Err(Error::Dataset("empty dataset".into()));
    }
    let layout = Layout { d: data.feature_count(), h: hidden, c: data.class_count };
    let dim = layout.dim();
    let data1 = Arc::new(data.clone());
    let data2 = data1.clone();
    let _ = seed; // the layout itself is deterministic; seed only drives init

    Ok(Problem {
        name: "mlp_classifier".into(),
        dim,
        smooth_value: Arc::new(move |params: &DenseVector| {
            let p = params.as_slice();
            let n = data1.samples();
            let mut total = 0.0;
            for s in 0..n {
                total += forward(layout, p, data1.features.row(s), data1.labels[s]).loss;
            }
            total / n as f64
        }),
        smooth_gradient: Arc::new(move |params: &DenseVector| {
            let p = params.as_slice();
            let Layout { d, h, c } = layout;
            let n = data2.samples();
            let w2 = &p[layout.w2()..layout.b2()];
            let mut grad = vec![0.0; layout.dim()];
            for s in 0..n {
                let x = data2.features.row(s);
                let fw = forward(layout, p, x, data2.labels[s]);
                // output layer: d_logit = probs - onehot(label)
                let mut d_logit = fw.probs.clone();
                d_logit[data2.labels[s]] -= 1.0;
                for k in 0..c {
                    let dk = d_logit[k];
                    for i in 0..h {
                        grad[layout.w2() + k * h + i] += dk * fw.hidden[i];
                    }
                    grad[layout.b2() + k] += dk;
                }
                // hidden layer
                for i in 0..h {
                    let mut dh = 0.0;
                    for k in 0..c {
                        dh += w2[k * h + i] * d_logit[k];
                    }
                    let da = dh * fw.hidden[i] * (1.0 - fw.hidden[i]);
                    for j in 0..d {
                        grad[i * d + j] += da * x[j];
                    }
                    grad[layout.b1() + i] += da;
                }
            }
            let scale = 1.0 / n as f64;
            DenseVector::from_fn(layout.dim(), |i| grad[i] * scale)
        }),
        lipschitz: MLP_DEFAULT_LIPSCHITZ,
        hessian_vp: None,
        nonsmooth: None,
        optimum: None,
        convex: false,
        full_prox_factory: None,
    })
}

/// Uniform `[0, 1)` starting parameters for a classifier problem.
pub fn mlp_initial_parameters(problem: &Problem, seed: u64) -> DenseVector {
    sampling::uniform_vector(problem.dim(), seed)
}
