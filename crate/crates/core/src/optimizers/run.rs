use std::fmt;
use std::str::FromStr;

use crate::diagnostics::TraceRecord;
use crate::error::{Error, Result};
use crate::objective::{LambdaSource, Objective, SplittingOperator};
use crate::relaxation::RelaxationParams;
use crate::vector::DenseVector;

use super::adaptive::{aersav_step, indicator_alpha, superlinear_step};
use super::steps::{ersav_step, esav_step, gd_step, rsav_step, sav_step};
use super::{ElementAuxState, ScalarAuxState, StepController, StepOutcome};

/// Default cap on the raw objective before a run is declared divergent.
pub const DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    GD,
    SAV,
    RSAV,
    ESAV,
    ERSAV,
    /// E-RSAV with a Hessian-based splitting operator.
    ERSAVL,
    Superlinear,
    AERSAV,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::GD,
        Method::SAV,
        Method::RSAV,
        Method::ESAV,
        Method::ERSAV,
        Method::ERSAVL,
        Method::Superlinear,
        Method::AERSAV,
    ];

    /// Command-line identifier.
    pub fn key(self) -> &'static str {
        match self {
            Method::GD => "gd",
            Method::SAV => "sav",
            Method::RSAV => "rsav",
            Method::ESAV => "esav",
            Method::ERSAV => "ersav",
            Method::ERSAVL => "ersavl",
            Method::Superlinear => "superlinear",
            Method::AERSAV => "aersav",
        }
    }

    pub fn is_relaxed(self) -> bool {
        matches!(
            self,
            Method::RSAV | Method::ERSAV | Method::ERSAVL | Method::Superlinear | Method::AERSAV
        )
    }

    fn is_scalar(self) -> bool {
        matches!(self, Method::SAV | Method::RSAV)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Method::GD => "GD",
            Method::SAV => "SAV",
            Method::RSAV => "RSAV",
            Method::ESAV => "E-SAV",
            Method::ERSAV => "E-RSAV",
            Method::ERSAVL => "E-RSAVL",
            Method::Superlinear => "Superlinear",
            Method::AERSAV => "AE-RSAV",
        };
        f.write_str(label)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "");
        Method::ALL
            .into_iter()
            .find(|m| m.key() == key)
            .ok_or_else(|| Error::config(format!("unknown method '{s}'")))
    }
}

/// When a run stops early. `None` disables a criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iters: usize,
    pub grad_tol: Option<f64>,
    pub loss_tol: Option<f64>,
    pub divergence_cap: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_iters: 1000,
            grad_tol: None,
            loss_tol: None,
            divergence_cap: DIVERGENCE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Splitting operator source. E-RSAVL upgrades `Zero` to the Hessian diagonal;
    /// gradient descent ignores it.
    pub lambda: LambdaSource,
    pub clamp_lambda: bool,
    pub controller: StepController,
    pub relaxation: RelaxationParams,
    pub stop: StopRule,
    /// Keep every iterate in [`RunResult::path`].
    pub record_path: bool,
}

impl RunConfig {
    pub fn new(method: Method, dt0: f64, max_iters: usize) -> Self {
        RunConfig {
            method,
            lambda: LambdaSource::Zero,
            clamp_lambda: false,
            controller: StepController {
                dt0,
                ..Default::default()
            },
            relaxation: RelaxationParams::default(),
            stop: StopRule {
                max_iters,
                ..Default::default()
            },
            record_path: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    NumericalFailure(String),
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub method: Method,
    pub status: RunStatus,
    pub trace: Vec<TraceRecord>,
    /// Iterates x⁰, x¹, … when requested; empty otherwise.
    pub path: Vec<DenseVector>,
    pub final_x: DenseVector,
    pub final_r: Option<Vec<f64>>,
}

impl RunResult {
    pub fn failed(&self) -> bool {
        matches!(self.status, RunStatus::NumericalFailure(_))
    }

    /// Last record with finite fields.
    pub fn last_valid(&self) -> Option<&TraceRecord> {
        self.trace.iter().rev().find(|r| r.is_finite())
    }

    /// Raw loss at the end of a successful run; `None` after a failure.
    pub fn final_loss(&self) -> Option<f64> {
        if self.failed() {
            None
        } else {
            self.trace.last().map(|r| r.loss)
        }
    }
}

enum Iterate {
    Plain { x: DenseVector, grad: DenseVector },
    Scalar(ScalarAuxState),
    Element(ElementAuxState),
}

impl Iterate {
    fn x(&self) -> &DenseVector {
        match self {
            Iterate::Plain { x, .. } => x,
            Iterate::Scalar(s) => &s.x,
            Iterate::Element(s) => &s.x,
        }
    }

    fn grad(&self) -> &DenseVector {
        match self {
            Iterate::Plain { grad, .. } => grad,
            Iterate::Scalar(s) => s.grad(),
            Iterate::Element(s) => s.grad(),
        }
    }

    fn r(&self) -> Option<Vec<f64>> {
        match self {
            Iterate::Plain { .. } => None,
            Iterate::Scalar(s) => Some(vec![s.r]),
            Iterate::Element(s) => Some(s.r.clone()),
        }
    }

    fn alpha(&self) -> Option<f64> {
        match self {
            Iterate::Plain { .. } => None,
            Iterate::Scalar(s) => Some(s.r / s.f().sqrt()),
            Iterate::Element(s) => Some(indicator_alpha(s, s.f())),
        }
    }
}

/// Largest violation of the per-step modified-energy bound.
///
/// Element-wise: maxᵢ [(rᵢ')² − rᵢ² + λᵢΔxᵢ² + (κ/dt)Δxᵢ²];
/// scalar: (r')² − r² + Σλᵢ Δxᵢ² + (κ/dt)‖Δx‖², with κ = 1 − ψ for relaxed
/// schemes and κ = 1 otherwise.
fn dissipation_margin(
    x: &DenseVector,
    r: &[f64],
    outcome: &StepOutcome,
    l: &SplittingOperator,
    kappa: f64,
    scalar: bool,
) -> f64 {
    let dt = outcome.dt_used;
    let dx: Vec<f64> = outcome.x_next.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
    if scalar {
        let dx_sq: f64 = dx.iter().map(|d| d * d).sum();
        outcome.r_next[0].powi(2) - r[0].powi(2) + l.quadratic_form(&dx) + kappa / dt * dx_sq
    } else {
        dx.iter()
            .enumerate()
            .map(|(i, d)| outcome.r_next[i].powi(2) - r[i].powi(2) + (l.lambda(i) + kappa / dt) * d * d)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn record(
    iter: usize,
    obj: &Objective,
    it: &Iterate,
    dt_used: f64,
    step: Option<(&StepOutcome, Option<f64>)>,
) -> Result<TraceRecord> {
    let f_raw = obj.raw_value(it.x())?;
    let r = it.r();
    let (r_min, r_max) = match &r {
        Some(r) => {
            let (lo, hi) = min_max(r);
            (Some(lo), Some(hi))
        }
        None => (None, None),
    };
    let (eta_min, eta_max, margin, event) = match step {
        Some((outcome, margin)) => {
            let (eta_min, eta_max) = if outcome.eta.is_empty() {
                (None, None)
            } else {
                let (lo, hi) = min_max(&outcome.eta);
                (Some(lo), Some(hi))
            };
            let event = outcome.proposal.map(|p| p.reason.as_str().to_string());
            (eta_min, eta_max, margin, event)
        }
        None => (None, None, None, None),
    };
    Ok(TraceRecord {
        iter,
        f_raw,
        loss: obj.loss(f_raw),
        grad_norm: it.grad().norm(),
        dt_used,
        alpha: it.alpha(),
        eta_min,
        eta_max,
        r_min,
        r_max,
        modified_energy: r.as_ref().map(|r| r.iter().map(|v| v * v).sum()),
        dissipation_margin: margin,
        proposal_event: event,
    })
}

fn converged(rec: &TraceRecord, stop: &StopRule) -> bool {
    stop.grad_tol.is_some_and(|tol| rec.grad_norm <= tol)
        || stop.loss_tol.is_some_and(|tol| rec.loss <= tol)
}

fn failure_event(err: &Error) -> &'static str {
    match err {
        Error::PositivityViolation { .. } => "positivity",
        _ => "non_finite",
    }
}

/// Runs `config.method` from `x0` and records one trace row per iterate.
///
/// Numerical trouble (non-finite values, divergence past the cap, positivity
/// violations) ends the run with [`RunStatus::NumericalFailure`] and a final
/// failure row; only configuration problems are returned as errors.
pub fn run(obj: &Objective, x0: &DenseVector, config: &RunConfig) -> Result<RunResult> {
    config.controller.validate()?;
    config.relaxation.validate()?;
    let stop = &config.stop;
    if stop.max_iters == 0 {
        return Err(Error::config("max_iters must be at least 1"));
    }
    if x0.dim() != obj.dim() {
        return Err(Error::config(format!(
            "x0 has dimension {}, objective {} expects {}",
            x0.dim(),
            obj.name(),
            obj.dim()
        )));
    }
    let method = config.method;
    if method == Method::Superlinear && obj.dim() != 1 {
        return Err(Error::config("the superlinear scheme is univariate only"));
    }
    let lambda = match (method, &config.lambda) {
        (Method::GD | Method::Superlinear, _) => LambdaSource::Zero,
        (Method::ERSAVL, LambdaSource::Zero) => LambdaSource::HessianDiagonal,
        (_, source) => source.clone(),
    };
    let mut l = lambda.resolve(obj, x0, config.clamp_lambda)?;
    let dynamic = lambda.is_dynamic(obj);
    let kappa = if method.is_relaxed() {
        1.0 - config.relaxation.psi
    } else {
        1.0
    };
    let dt0 = config.controller.dt0;

    let mut it = match method {
        Method::GD => Iterate::Plain {
            x: x0.clone(),
            grad: obj.gradient(x0)?,
        },
        Method::SAV | Method::RSAV => Iterate::Scalar(ScalarAuxState::new(obj, x0.clone(), dt0)?),
        _ => Iterate::Element(ElementAuxState::new(obj, x0.clone(), dt0)?),
    };

    let mut trace = vec![record(0, obj, &it, dt0, None)?];
    let mut path = Vec::new();
    if config.record_path {
        path.push(x0.clone());
    }
    let mut status = if converged(&trace[0], stop) {
        RunStatus::Converged
    } else {
        RunStatus::MaxIters
    };

    if status == RunStatus::MaxIters {
        for n in 1..=stop.max_iters {
            match advance(obj, &it, method, &mut l, &lambda, dynamic, config, kappa) {
                Ok((next, outcome, margin)) => {
                    let rec = match record(n, obj, &next, outcome.dt_used, Some((&outcome, margin))) {
                        Ok(rec) => rec,
                        Err(e) if !e.is_config() => {
                            trace.push(TraceRecord::failure(n, failure_event(&e)));
                            status = RunStatus::NumericalFailure(e.to_string());
                            break;
                        }
                        Err(e) => return Err(e),
                    };
                    if rec.f_raw > stop.divergence_cap || !rec.is_finite() {
                        trace.push(TraceRecord::failure(n, "diverged"));
                        status = RunStatus::NumericalFailure(format!(
                            "objective {} exceeded the divergence cap at iteration {n}",
                            rec.f_raw
                        ));
                        break;
                    }
                    it = next;
                    if config.record_path {
                        path.push(it.x().clone());
                    }
                    let done = converged(&rec, stop);
                    trace.push(rec);
                    if done {
                        status = RunStatus::Converged;
                        break;
                    }
                }
                Err(e) if e.is_config() => return Err(e),
                Err(e) => {
                    trace.push(TraceRecord::failure(n, failure_event(&e)));
                    status = RunStatus::NumericalFailure(e.to_string());
                    break;
                }
            }
        }
    }

    Ok(RunResult {
        method,
        status,
        trace,
        path,
        final_x: it.x().clone(),
        final_r: it.r(),
    })
}

type Advanced = (Iterate, StepOutcome, Option<f64>);

#[allow(clippy::too_many_arguments)]
fn advance(
    obj: &Objective,
    it: &Iterate,
    method: Method,
    l: &mut SplittingOperator,
    lambda: &LambdaSource,
    dynamic: bool,
    config: &RunConfig,
    kappa: f64,
) -> Result<Advanced> {
    let dt0 = config.controller.dt0;
    let params = &config.relaxation;
    match it {
        Iterate::Plain { x, grad } => {
            let x_next = gd_step(x, grad, dt0)?;
            let grad_next = obj.gradient(&x_next)?;
            let outcome = StepOutcome {
                x_next: x_next.clone(),
                r_tilde: Vec::new(),
                r_next: Vec::new(),
                eta: Vec::new(),
                dt_used: dt0,
                proposal: None,
            };
            Ok((
                Iterate::Plain {
                    x: x_next,
                    grad: grad_next,
                },
                outcome,
                None,
            ))
        }
        Iterate::Scalar(state) => {
            if dynamic {
                *l = lambda.resolve(obj, &state.x, config.clamp_lambda)?;
            }
            let outcome = match method {
                Method::SAV => sav_step(state, obj, l, dt0)?,
                _ => rsav_step(state, obj, l, dt0, params)?,
            };
            let margin = dissipation_margin(&state.x, &[state.r], &outcome, l, kappa, true);
            let next = state.advance(obj, &outcome)?;
            Ok((Iterate::Scalar(next), outcome, Some(margin)))
        }
        Iterate::Element(state) => {
            if dynamic {
                *l = lambda.resolve(obj, &state.x, config.clamp_lambda)?;
            }
            let outcome = match method {
                Method::ESAV => esav_step(state, obj, l, dt0)?,
                Method::Superlinear => superlinear_step(state, obj, &config.controller, params)?,
                Method::AERSAV => aersav_step(state, obj, l, &config.controller, params)?,
                _ => ersav_step(state, obj, l, dt0, params)?,
            };
            let l_used = if method == Method::Superlinear {
                &SplittingOperator::Zero
            } else {
                &*l
            };
            let margin = dissipation_margin(&state.x, &state.r, &outcome, l_used, kappa, method.is_scalar());
            let next = state.advance(obj, &outcome)?;
            Ok((Iterate::Element(next), outcome, Some(margin)))
        }
    }
}
