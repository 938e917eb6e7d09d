use crate::error::{Error, Result};
use crate::objective::{Objective, SplittingOperator};
use crate::relaxation::{solve_eta, solve_eta_sq, RelaxationParams};
use crate::vector::DenseVector;

use super::{check_dt, ElementAuxState, ScalarAuxState, StepOutcome};

/// Plain gradient descent, `x − dt·grad`.
pub fn gd_step(x: &DenseVector, grad: &DenseVector, dt: f64) -> Result<DenseVector> {
    check_dt(dt)?;
    x.axpy(-dt, grad)
}

/// Per-coordinate factors `(1 + dt·λᵢ, dt·gᵢ² / (2(1 + dt·λᵢ) f))`.
///
/// Both the scalar and the element-wise kernels go through this so that the
/// two coincide bit for bit in one dimension.
fn damping(g: f64, f: f64, lambda: f64, dt: f64) -> (f64, f64) {
    let denom = 1.0 + dt * lambda;
    (denom, dt * g * g / (2.0 * denom * f))
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::numerical(format!("{what} became {v}"))),
        None => Ok(()),
    }
}

/// Element-wise SAV step (no relaxation).
pub fn esav_step(
    state: &ElementAuxState,
    obj: &Objective,
    l: &SplittingOperator,
    dt: f64,
) -> Result<StepOutcome> {
    check_dt(dt)?;
    l.check_dim(obj.dim())?;
    let f = state.f();
    if f <= 0.0 {
        return Err(Error::PositivityViolation {
            value: f,
            floor: obj.delta(),
        });
    }
    let sqrt_f = f.sqrt();
    let g = state.grad().as_slice();
    let mut r_tilde = Vec::with_capacity(g.len());
    let mut x_next = Vec::with_capacity(g.len());
    for (i, (&xi, &gi)) in state.x.iter().zip(g).enumerate() {
        let (denom, t) = damping(gi, f, l.lambda(i), dt);
        let ri = state.r[i] / (1.0 + t);
        x_next.push(xi - dt / denom * (ri / sqrt_f) * gi);
        r_tilde.push(ri);
    }
    finite(&r_tilde, "auxiliary variable")?;
    Ok(StepOutcome {
        x_next: DenseVector::new(x_next)?,
        r_next: r_tilde.clone(),
        r_tilde,
        eta: Vec::new(),
        dt_used: dt,
        proposal: None,
    })
}

/// Relaxes every coordinate of an element-wise outcome against √f(xⁿ⁺¹).
pub(crate) fn relax_elementwise(
    x: &DenseVector,
    obj: &Objective,
    mut outcome: StepOutcome,
    params: &RelaxationParams,
) -> Result<StepOutcome> {
    let sqrt_f_next = obj.shifted_value(&outcome.x_next)?.sqrt();
    let mut eta = Vec::with_capacity(x.dim());
    let mut r_next = Vec::with_capacity(x.dim());
    for (i, &rt) in outcome.r_tilde.iter().enumerate() {
        let dx = outcome.x_next[i] - x[i];
        let relaxed = solve_eta(rt, sqrt_f_next, dx, outcome.dt_used, params)?;
        eta.push(relaxed.eta);
        r_next.push(relaxed.r_relaxed);
    }
    outcome.eta = eta;
    outcome.r_next = r_next;
    Ok(outcome)
}

/// Element-wise relaxed SAV step: [`esav_step`] followed by per-coordinate relaxation.
pub fn ersav_step(
    state: &ElementAuxState,
    obj: &Objective,
    l: &SplittingOperator,
    dt: f64,
    params: &RelaxationParams,
) -> Result<StepOutcome> {
    let outcome = esav_step(state, obj, l, dt)?;
    relax_elementwise(&state.x, obj, outcome, params)
}

/// Scalar SAV step (no relaxation).
pub fn sav_step(
    state: &ScalarAuxState,
    obj: &Objective,
    l: &SplittingOperator,
    dt: f64,
) -> Result<StepOutcome> {
    check_dt(dt)?;
    l.check_dim(obj.dim())?;
    let f = state.f();
    if f <= 0.0 {
        return Err(Error::PositivityViolation {
            value: f,
            floor: obj.delta(),
        });
    }
    let sqrt_f = f.sqrt();
    let g = state.grad().as_slice();
    let factors: Vec<(f64, f64)> = g
        .iter()
        .enumerate()
        .map(|(i, &gi)| damping(gi, f, l.lambda(i), dt))
        .collect();
    let total: f64 = factors.iter().map(|&(_, t)| t).sum();
    let r_tilde = state.r / (1.0 + total);
    finite(&[r_tilde], "auxiliary variable")?;
    let x_next = state
        .x
        .iter()
        .zip(g)
        .zip(&factors)
        .map(|((&xi, &gi), &(denom, _))| xi - dt / denom * (r_tilde / sqrt_f) * gi)
        .collect();
    Ok(StepOutcome {
        x_next: DenseVector::new(x_next)?,
        r_tilde: vec![r_tilde],
        r_next: vec![r_tilde],
        eta: Vec::new(),
        dt_used: dt,
        proposal: None,
    })
}

/// Scalar relaxed SAV step: [`sav_step`] followed by relaxation with the full-norm budget.
pub fn rsav_step(
    state: &ScalarAuxState,
    obj: &Objective,
    l: &SplittingOperator,
    dt: f64,
    params: &RelaxationParams,
) -> Result<StepOutcome> {
    let mut outcome = sav_step(state, obj, l, dt)?;
    let sqrt_f_next = obj.shifted_value(&outcome.x_next)?.sqrt();
    let dx_sq = outcome.x_next.sub(&state.x)?.norm_squared();
    let relaxed = solve_eta_sq(outcome.r_tilde[0], sqrt_f_next, dx_sq, dt, params)?;
    outcome.eta = vec![relaxed.eta];
    outcome.r_next = vec![relaxed.r_relaxed];
    Ok(outcome)
}
