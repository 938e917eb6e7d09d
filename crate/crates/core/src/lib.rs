//! Element-wise relaxed scalar auxiliary variable (E-RSAV) optimizers.
//!
//! The crate provides the gradient-flow schemes (plain gradient descent,
//! scalar and element-wise SAV, their relaxed variants, a secant-stepped
//! univariate scheme and the adaptive Steffensen-stepped AE-RSAV), the
//! benchmark objectives they are evaluated on, and diagnostics that check
//! the schemes' energy laws on recorded traces.
//!
//! ```
//! use ersav::objectives::Benchmark;
//! use ersav::optimizers::{run, Method, RunConfig};
//!
//! let obj = Benchmark::Rosenbrock.objective().with_shift(1.0)?;
//! let x0 = Benchmark::Rosenbrock.spec().default_x0;
//! let mut config = RunConfig::new(Method::AERSAV, 1.5e-3, 2_000);
//! config.controller.beta = 1e-4;
//! let result = run(&obj, &x0, &config)?;
//! assert!(result.final_loss().unwrap() < 1.0);
//! # Ok::<(), ersav::Error>(())
//! ```

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod objective;
pub mod objectives;
pub mod optimizers;
pub mod relaxation;
pub mod vector;

pub use error::{Error, Result};
pub use objective::{finite_diff_gradient, LambdaSource, Objective, ObjectiveFn, SplittingOperator};
pub use vector::DenseVector;
