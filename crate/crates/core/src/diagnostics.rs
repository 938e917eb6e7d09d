//! Trace records, dissipation monitors, energy bookkeeping and rate estimation.

use crate::error::{Error, Result};

/// Default absolute tolerance on squared-energy quantities.
pub const DISSIPATION_TOL: f64 = 1e-9;

/// One row of a run trace. Record `n` describes the iterate after `n` steps;
/// the step-related fields (`eta_*`, `dissipation_margin`) describe the step
/// that produced it and are absent on record 0.
///
/// Fields that do not apply to a method (everything auxiliary for plain
/// gradient descent) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub f_raw: f64,
    pub loss: f64,
    pub grad_norm: f64,
    pub dt_used: f64,
    pub alpha: Option<f64>,
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    /// ‖rⁿ‖² (or (rⁿ)² for scalar schemes).
    pub modified_energy: Option<f64>,
    /// Largest violation of the per-step energy bound; nonpositive when it holds.
    pub dissipation_margin: Option<f64>,
    pub proposal_event: Option<String>,
}

impl TraceRecord {
    /// Row marking an aborted run.
    pub fn failure(iter: usize, event: &str) -> Self {
        TraceRecord {
            iter,
            f_raw: f64::NAN,
            loss: f64::NAN,
            grad_norm: f64::NAN,
            dt_used: f64::NAN,
            alpha: None,
            eta_min: None,
            eta_max: None,
            r_min: None,
            r_max: None,
            modified_energy: None,
            dissipation_margin: None,
            proposal_event: Some(event.to_string()),
        }
    }

    fn numeric_fields(&self) -> impl Iterator<Item = f64> + '_ {
        [self.f_raw, self.loss, self.grad_norm, self.dt_used]
            .into_iter()
            .chain(
                [
                    self.alpha,
                    self.eta_min,
                    self.eta_max,
                    self.r_min,
                    self.r_max,
                    self.modified_energy,
                    self.dissipation_margin,
                ]
                .into_iter()
                .flatten(),
            )
    }

    pub fn is_finite(&self) -> bool {
        self.numeric_fields().all(f64::is_finite)
    }
}

/// Structural checks on a trace: strictly increasing `iter`, and finite
/// fields everywhere except possibly on a trailing failure row.
pub fn check_trace_shape(trace: &[TraceRecord]) -> Result<()> {
    for (k, pair) in trace.windows(2).enumerate() {
        if pair[1].iter <= pair[0].iter {
            return Err(Error::numerical(format!("iter does not increase at row {}", k + 1)));
        }
    }
    let body = match trace.last() {
        Some(last) if !last.is_finite() => &trace[..trace.len() - 1],
        _ => trace,
    };
    if let Some(bad) = body.iter().find(|r| !r.is_finite()) {
        return Err(Error::numerical(format!("non-finite field at iteration {}", bad.iter)));
    }
    Ok(())
}

/// Outcome of a monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DissipationCheck {
    pub holds: bool,
    /// Index into the trace of the first offending record.
    pub first_violation: Option<usize>,
}

impl DissipationCheck {
    fn from_violation(first_violation: Option<usize>) -> Self {
        DissipationCheck {
            holds: first_violation.is_none(),
            first_violation,
        }
    }
}

/// Checks the per-step modified-energy bound recorded in the trace.
///
/// A record violates the law when its `dissipation_margin` exceeds `tol` or
/// its modified energy exceeds the previous one by more than `tol`. The
/// margin already carries the relaxation budget of the run, so no ψ is needed.
/// Non-finite rows count as violations.
pub fn check_modified_dissipation(trace: &[TraceRecord], tol: f64) -> DissipationCheck {
    let mut prev: Option<f64> = None;
    for (k, rec) in trace.iter().enumerate() {
        if !rec.is_finite() {
            return DissipationCheck::from_violation(Some(k));
        }
        if rec.dissipation_margin.is_some_and(|m| m > tol) {
            return DissipationCheck::from_violation(Some(k));
        }
        if let Some(e) = rec.modified_energy {
            if prev.is_some_and(|p| e > p + tol) {
                return DissipationCheck::from_violation(Some(k));
            }
            prev = Some(e);
        }
    }
    DissipationCheck::from_violation(None)
}

/// Checks that `f_raw` never increases by more than `tol`; a NaN counts as an increase.
pub fn check_original_dissipation(trace: &[TraceRecord], tol: f64) -> DissipationCheck {
    let first = trace
        .windows(2)
        .position(|w| w[1].f_raw.is_nan() || w[1].f_raw > w[0].f_raw + tol)
        .map(|k| k + 1);
    DissipationCheck::from_violation(first)
}

/// Per-iteration |mean(rᵢ) − √(f_raw + shift)|; NaN where the record has no
/// auxiliary variables.
pub fn energy_gap(trace: &[TraceRecord], shift: f64) -> Vec<f64> {
    trace
        .iter()
        .map(|rec| match rec.alpha {
            Some(alpha) => (alpha - 1.0).abs() * (rec.f_raw + shift).sqrt(),
            None => f64::NAN,
        })
        .collect()
}

/// The energy gap divided by √f, i.e. |α − 1|.
pub fn normalized_energy_gap(trace: &[TraceRecord]) -> Vec<f64> {
    trace
        .iter()
        .map(|rec| rec.alpha.map_or(f64::NAN, |a| (a - 1.0).abs()))
        .collect()
}

/// Errors εₙ and the empirical orders qₙ = ln(εₙ₊₁/εₙ) / ln(εₙ/εₙ₋₁).
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub epsilons: Vec<f64>,
    /// `q_values[k]` uses ε at indices k, k+1, k+2; `None` where a log ratio vanishes
    /// or the quotient is not finite.
    pub q_values: Vec<Option<f64>>,
}

impl RateEstimate {
    /// The last `n` defined orders, oldest first.
    pub fn last_defined(&self, n: usize) -> Vec<f64> {
        let defined: Vec<f64> = self.q_values.iter().flatten().copied().collect();
        defined[defined.len().saturating_sub(n)..].to_vec()
    }
}

/// Computes qₙ for every interior index of `epsilons`.
pub fn estimate_rate(epsilons: &[f64]) -> Result<RateEstimate> {
    if epsilons.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 errors, got {}",
            epsilons.len()
        )));
    }
    if let Some(bad) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InsufficientData(format!("error {bad} is not a positive finite number")));
    }
    let q_values = epsilons
        .windows(3)
        .map(|w| {
            let den = (w[1] / w[0]).ln();
            let q = (w[2] / w[1]).ln() / den;
            (den != 0.0 && q.is_finite()).then_some(q)
        })
        .collect();
    Ok(RateEstimate {
        epsilons: epsilons.to_vec(),
        q_values,
    })
}
