//! Accelerated first-order optimization with a descent safeguard.
//!
//! This crate implements a family of two-sequence accelerated gradient
//! methods that pick the better of a momentum step and a plain descent step
//! at every iteration, together with:
//!
//! - zeroth-order gradient oracles (coordinate and orthonormal-direction
//!   finite differences) and the machinery to run the accelerated scheme on
//!   estimated gradients, optionally projecting the auxiliary sequence onto
//!   a ball;
//! - a proximal variant driven by the prox of the full objective and a
//!   composite variant for objectives `F = f + h` with nonsmooth `h`;
//! - classic baselines (gradient descent, Nesterov momentum, FISTA, and an
//!   accelerated forward-backward method with configurable damping);
//! - a benchmark problem suite (least squares, logistic regression, lasso,
//!   log-sum-exp, ridge, matrix completion, a small neural classifier);
//! - continuous-time models of the accelerated dynamics (a first-order
//!   system and a second-order Hessian-damped equation) with a fixed-step
//!   RK4 integrator and an energy-decay diagnostic;
//! - convergence diagnostics that audit per-step descent, rate-scaled gap
//!   series, and the Lyapunov telescoping inequality on recorded traces;
//! - an experiment harness with JSON configs, deterministic seeded runs,
//!   and CSV trace output.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod ode;
pub mod problems;
pub mod prox;
pub mod sampling;
pub mod solvers;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector};
pub use problems::Problem;
pub use solvers::{IterationRecord, Method, MethodConfig, Trace};
