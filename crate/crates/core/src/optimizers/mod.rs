//! Step kernels and run loops.
//!
//! Kernels are pure functions of an iterate state, an objective and the step
//! parameters. States cache the shifted value and the gradient at the current
//! point so a kernel never re-evaluates them; [`ElementAuxState::advance`]
//! performs the single oracle call per step.

mod adaptive;
mod run;
mod steps;

pub use adaptive::{aersav_step, indicator_alpha, secant_dt, steffensen_dt, superlinear_step};
pub use run::{run, Method, RunConfig, RunResult, RunStatus, StopRule};
pub use steps::{esav_step, ersav_step, gd_step, rsav_step, sav_step};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::vector::DenseVector;

/// Default indicator threshold of the adaptive scheme.
pub const DEFAULT_BETA: f64 = 0.1;
/// Default initial step size.
pub const DEFAULT_DT0: f64 = 0.01;
/// Default relative guard on step-size denominators.
pub const DEFAULT_DENOMINATOR_TOL: f64 = 1e-12;

/// What happens to `dt_current` when a proposal is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DtFallback {
    #[default]
    KeepPrevious,
}

/// Step-size parameters shared by the fixed-step and adaptive schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController {
    pub dt0: f64,
    pub beta: f64,
    pub secant_denominator_tol: f64,
    pub steffensen_denominator_tol: f64,
    pub dt_fallback_policy: DtFallback,
}

impl Default for StepController {
    fn default() -> Self {
        StepController {
            dt0: DEFAULT_DT0,
            beta: DEFAULT_BETA,
            secant_denominator_tol: DEFAULT_DENOMINATOR_TOL,
            steffensen_denominator_tol: DEFAULT_DENOMINATOR_TOL,
            dt_fallback_policy: DtFallback::KeepPrevious,
        }
    }
}

impl StepController {
    pub fn with_dt0(dt0: f64) -> Result<Self> {
        let c = StepController {
            dt0,
            ..Default::default()
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_dt(self.dt0)?;
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.secant_denominator_tol > 0.0 && self.steffensen_denominator_tol > 0.0) {
            return Err(Error::config("denominator tolerances must be > 0"));
        }
        Ok(())
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("step size must be finite and > 0, got {dt}")))
    }
}

/// Why a step-size proposal was or was not taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalReason {
    Proposed,
    DenominatorTooSmall,
    NonPositive,
    NonFinite,
}

impl ProposalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ProposalReason::Proposed => "proposed",
            ProposalReason::DenominatorTooSmall => "denominator_too_small",
            ProposalReason::NonPositive => "non_positive",
            ProposalReason::NonFinite => "non_finite",
        }
    }
}

/// A secant or Steffensen step size together with its verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeProposal {
    pub dt: f64,
    /// φₙ for Steffensen proposals, 1 for secant proposals.
    pub phi: f64,
    pub accepted: bool,
    pub reason: ProposalReason,
}

impl StepSizeProposal {
    pub(crate) fn rejected(dt: f64, phi: f64, reason: ProposalReason) -> Self {
        StepSizeProposal {
            dt,
            phi,
            accepted: false,
            reason,
        }
    }

    /// Accepts `dt` if it is finite and positive.
    pub(crate) fn judge(dt: f64, phi: f64) -> Self {
        if !dt.is_finite() || !phi.is_finite() {
            Self::rejected(dt, phi, ProposalReason::NonFinite)
        } else if dt <= 0.0 {
            Self::rejected(dt, phi, ProposalReason::NonPositive)
        } else {
            StepSizeProposal {
                dt,
                phi,
                accepted: true,
                reason: ProposalReason::Proposed,
            }
        }
    }
}

/// Result of one step.
///
/// Scalar schemes store their single auxiliary value in one-entry vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub x_next: DenseVector,
    pub r_tilde: Vec<f64>,
    /// After relaxation; equal to `r_tilde` for the non-relaxed schemes.
    pub r_next: Vec<f64>,
    /// η₀ per relaxed entry; empty for non-relaxed schemes.
    pub eta: Vec<f64>,
    pub dt_used: f64,
    /// Step-size proposal evaluated during this step, if any.
    pub proposal: Option<StepSizeProposal>,
}

/// Iterate of an element-wise scheme: one auxiliary variable per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementAuxState {
    pub x: DenseVector,
    pub r: Vec<f64>,
    pub iter: usize,
    pub dt_current: f64,
    pub x_prev: Option<DenseVector>,
    pub grad_prev: Option<DenseVector>,
    f_shifted: f64,
    grad: DenseVector,
}

impl ElementAuxState {
    /// Starts at `x0` with every rᵢ⁰ = √f(x⁰).
    pub fn new(obj: &Objective, x0: DenseVector, dt0: f64) -> Result<Self> {
        check_dt(dt0)?;
        let f_shifted = obj.shifted_value(&x0)?;
        let grad = obj.gradient(&x0)?;
        Ok(ElementAuxState {
            r: vec![f_shifted.sqrt(); x0.dim()],
            x: x0,
            iter: 0,
            dt_current: dt0,
            x_prev: None,
            grad_prev: None,
            f_shifted,
            grad,
        })
    }

    /// Replaces the auxiliary vector.
    pub fn with_r(mut self, r: Vec<f64>) -> Result<Self> {
        if r.len() != self.x.dim() {
            return Err(Error::config(format!(
                "r has dimension {}, x has {}",
                r.len(),
                self.x.dim()
            )));
        }
        if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::numerical("auxiliary variables must be finite and >= 0"));
        }
        self.r = r;
        Ok(self)
    }

    /// Sets the previous iterate, as if one step had already been taken from `x_prev`.
    pub fn with_history(mut self, obj: &Objective, x_prev: DenseVector) -> Result<Self> {
        let grad_prev = obj.gradient(&x_prev)?;
        self.x_prev = Some(x_prev);
        self.grad_prev = Some(grad_prev);
        self.iter = self.iter.max(1);
        Ok(self)
    }

    /// Shifted objective value at `x`.
    pub fn f(&self) -> f64 {
        self.f_shifted
    }

    /// Gradient at `x`.
    pub fn grad(&self) -> &DenseVector {
        &self.grad
    }

    /// The state after applying `outcome`; evaluates the objective once at the new point.
    pub fn advance(&self, obj: &Objective, outcome: &StepOutcome) -> Result<Self> {
        let f_shifted = obj.shifted_value(&outcome.x_next)?;
        let grad = obj.gradient(&outcome.x_next)?;
        Ok(ElementAuxState {
            x: outcome.x_next.clone(),
            r: outcome.r_next.clone(),
            iter: self.iter + 1,
            dt_current: outcome.dt_used,
            x_prev: Some(self.x.clone()),
            grad_prev: Some(self.grad.clone()),
            f_shifted,
            grad,
        })
    }
}

/// Iterate of a scalar scheme: a single auxiliary variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarAuxState {
    pub x: DenseVector,
    pub r: f64,
    pub iter: usize,
    pub dt_current: f64,
    f_shifted: f64,
    grad: DenseVector,
}

impl ScalarAuxState {
    /// Starts at `x0` with r⁰ = √f(x⁰).
    pub fn new(obj: &Objective, x0: DenseVector, dt0: f64) -> Result<Self> {
        check_dt(dt0)?;
        let f_shifted = obj.shifted_value(&x0)?;
        let grad = obj.gradient(&x0)?;
        Ok(ScalarAuxState {
            r: f_shifted.sqrt(),
            x: x0,
            iter: 0,
            dt_current: dt0,
            f_shifted,
            grad,
        })
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::numerical("auxiliary variable must be finite and >= 0"));
        }
        self.r = r;
        Ok(self)
    }

    pub fn f(&self) -> f64 {
        self.f_shifted
    }

    pub fn grad(&self) -> &DenseVector {
        &self.grad
    }

    pub fn advance(&self, obj: &Objective, outcome: &StepOutcome) -> Result<Self> {
        let f_shifted = obj.shifted_value(&outcome.x_next)?;
        let grad = obj.gradient(&outcome.x_next)?;
        Ok(ScalarAuxState {
            x: outcome.x_next.clone(),
            r: outcome.r_next[0],
            iter: self.iter + 1,
            dt_current: outcome.dt_used,
            f_shifted,
            grad,
        })
    }
}
