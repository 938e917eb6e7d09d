//! Secant and Steffensen step sizes, and the schemes built on them.

use crate::error::{Error, Result};
use crate::objective::{Objective, SplittingOperator};
use crate::relaxation::RelaxationParams;
use crate::vector::DenseVector;

use super::steps::{ersav_step, relax_elementwise};
use super::{ElementAuxState, ProposalReason, StepController, StepOutcome, StepSizeProposal};

fn history(state: &ElementAuxState) -> Result<(&DenseVector, &DenseVector)> {
    match (&state.x_prev, &state.grad_prev) {
        (Some(x), Some(g)) => Ok((x, g)),
        _ => Err(Error::config("step-size proposal needs a previous iterate")),
    }
}

/// Secant step `(√f/r)·(xⁿ − xⁿ⁻¹)/(f′(xⁿ) − f′(xⁿ⁻¹))` for univariate objectives.
pub fn secant_dt(
    state: &ElementAuxState,
    obj: &Objective,
    controller: &StepController,
) -> Result<StepSizeProposal> {
    if obj.dim() != 1 || state.x.dim() != 1 {
        return Err(Error::config("the secant step size is defined for univariate objectives only"));
    }
    let (x_prev, g_prev) = history(state)?;
    let dx = state.x[0] - x_prev[0];
    let dg = state.grad()[0] - g_prev[0];
    if dg.abs() < controller.secant_denominator_tol * dx.abs().max(1.0) {
        return Ok(StepSizeProposal::rejected(
            state.dt_current,
            1.0,
            ProposalReason::DenominatorTooSmall,
        ));
    }
    let dt = state.f().sqrt() / state.r[0] * dx / dg;
    Ok(StepSizeProposal::judge(dt, 1.0))
}

/// Univariate step with a secant step size.
///
/// Without a previous iterate this is a plain [`ersav_step`] at `dt_current`.
/// Rejected proposals keep `dt_current`.
pub fn superlinear_step(
    state: &ElementAuxState,
    obj: &Objective,
    controller: &StepController,
    params: &RelaxationParams,
) -> Result<StepOutcome> {
    if state.x_prev.is_none() {
        return ersav_step(state, obj, &SplittingOperator::Zero, state.dt_current, params);
    }
    let proposal = secant_dt(state, obj, controller)?;
    let dt = if proposal.accepted {
        proposal.dt
    } else {
        state.dt_current
    };
    let f = state.f();
    let g = state.grad()[0];
    let r_tilde = 2.0 * f / (2.0 * f + dt * g * g) * state.r[0];
    let x_next = DenseVector::new(vec![state.x[0] - dt * (r_tilde / f.sqrt()) * g])?;
    if !r_tilde.is_finite() {
        return Err(Error::numerical(format!("auxiliary variable became {r_tilde}")));
    }
    let outcome = StepOutcome {
        x_next,
        r_tilde: vec![r_tilde],
        r_next: vec![r_tilde],
        eta: Vec::new(),
        dt_used: dt,
        proposal: Some(proposal),
    };
    relax_elementwise(&state.x, obj, outcome, params)
}

/// α = mean(rᵢ / √f_now).
pub fn indicator_alpha(state: &ElementAuxState, f_now: f64) -> f64 {
    let sqrt_f = f_now.sqrt();
    state.r.iter().map(|r| r / sqrt_f).sum::<f64>() / state.r.len() as f64
}

/// Steffensen step size, scaled by φₙ.
///
/// Evaluates the gradient exactly once, at `xⁿ + ∇f(xⁿ)`.
pub fn steffensen_dt(
    state: &ElementAuxState,
    obj: &Objective,
    controller: &StepController,
) -> Result<StepSizeProposal> {
    let (x_prev, g_prev) = history(state)?;
    let keep = state.dt_current;
    let g = state.grad();
    let probe_grad = match state.x.add(g).and_then(|probe| obj.gradient(&probe)) {
        Ok(pg) => pg,
        Err(Error::NumericalFailure(_)) => {
            return Ok(StepSizeProposal::rejected(keep, f64::NAN, ProposalReason::NonFinite))
        }
        Err(e) => return Err(e),
    };

    let tol = controller.steffensen_denominator_tol;
    let dx = state.x.sub(x_prev)?;
    let dg = g.sub(g_prev)?;
    let curvature = dg.dot(&dx)?;
    let dx_sq = dx.norm_squared();
    if curvature.abs() < tol * dx_sq.max(1.0) {
        return Ok(StepSizeProposal::rejected(keep, f64::NAN, ProposalReason::DenominatorTooSmall));
    }
    let r_mean = state.r.iter().sum::<f64>() / state.r.len() as f64;
    let phi = state.f().sqrt() / r_mean * dx_sq / curvature;

    let g_sq = g.norm_squared();
    let denominator = crate::vector::dot(probe_grad.as_slice(), g.as_slice()) - g_sq;
    if !denominator.is_finite() {
        return Ok(StepSizeProposal::rejected(keep, phi, ProposalReason::NonFinite));
    }
    if denominator.abs() < tol * g_sq.max(1.0) {
        return Ok(StepSizeProposal::rejected(keep, phi, ProposalReason::DenominatorTooSmall));
    }
    let proposal = StepSizeProposal::judge(phi * g_sq / denominator, phi);
    if proposal.accepted {
        Ok(proposal)
    } else {
        Ok(StepSizeProposal { dt: keep, ..proposal })
    }
}

/// Adaptive element-wise relaxed step.
///
/// When |1 − α| > β the Steffensen proposal replaces `dt_current` (if accepted);
/// one [`ersav_step`] follows with the resulting step size.
pub fn aersav_step(
    state: &ElementAuxState,
    obj: &Objective,
    l: &SplittingOperator,
    controller: &StepController,
    params: &RelaxationParams,
) -> Result<StepOutcome> {
    let alpha = indicator_alpha(state, state.f());
    let mut dt = state.dt_current;
    let mut proposal = None;
    if (1.0 - alpha).abs() > controller.beta && state.x_prev.is_some() {
        let p = steffensen_dt(state, obj, controller)?;
        if p.accepted {
            dt = p.dt;
        }
        proposal = Some(p);
    }
    let mut outcome = ersav_step(state, obj, l, dt, params)?;
    outcome.proposal = proposal;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ObjectiveFn;
    use crate::objectives::{make_cubic_univariate, make_rosenbrock};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// x² + 1 with a gradient-call counter.
    struct Counting(Arc<AtomicUsize>);

    impl ObjectiveFn for Counting {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            x[0] * x[0] + 1.0
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            self.0.fetch_add(1, Ordering::SeqCst);
            vec![2.0 * x[0]]
        }
    }

    fn x1(v: f64) -> DenseVector {
        DenseVector::new(vec![v]).unwrap()
    }

    fn state_with_history(obj: &Objective, x: f64, x_prev: f64) -> ElementAuxState {
        ElementAuxState::new(obj, x1(x), 0.01)
            .unwrap()
            .with_history(obj, x1(x_prev))
            .unwrap()
    }

    #[test]
    fn secant_on_cubic() {
        let obj = make_cubic_univariate();
        let state = state_with_history(&obj, 11.0, 12.0);
        assert!((state.r[0] - 18.539).abs() < 1e-3);
        let p = secant_dt(&state, &obj, &StepController::default()).unwrap();
        assert!(p.accepted);
        assert!((p.dt - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn secant_on_parabola_is_inverse_curvature() {
        let obj = Objective::new("counting", Counting(Arc::default()));
        let state = state_with_history(&obj, 1.0, 2.0);
        let p = secant_dt(&state, &obj, &StepController::default()).unwrap();
        assert_eq!(p.dt, 0.5);
        assert_eq!(p.reason, ProposalReason::Proposed);
    }

    #[test]
    fn secant_rejections() {
        let obj = make_cubic_univariate();
        // f'(x) = x² − 100 takes the same value at ±11
        let state = state_with_history(&obj, 11.0, -11.0);
        let p = secant_dt(&state, &obj, &StepController::default()).unwrap();
        assert!(!p.accepted);
        assert_eq!(p.reason, ProposalReason::DenominatorTooSmall);
        assert_eq!(p.dt, state.dt_current);
        // secant through a concave stretch gives a negative step
        let state = state_with_history(&obj, -1.0, -2.0);
        let p = secant_dt(&state, &obj, &StepController::default()).unwrap();
        assert_eq!(p.reason, ProposalReason::NonPositive);
        let fresh = ElementAuxState::new(&obj, x1(11.0), 0.01).unwrap();
        assert!(secant_dt(&fresh, &obj, &StepController::default()).is_err());
        let ros = make_rosenbrock();
        let s2 = ElementAuxState::new(&ros, DenseVector::zeros(2).unwrap(), 0.01).unwrap();
        assert!(secant_dt(&s2, &ros, &StepController::default()).is_err());
    }

    #[test]
    fn superlinear_cubic_step() {
        let obj = make_cubic_univariate();
        let state = state_with_history(&obj, 11.0, 12.0);
        let out = superlinear_step(&state, &obj, &StepController::default(), &RelaxationParams::default()).unwrap();
        assert!((out.dt_used - 1.0 / 23.0).abs() < 1e-15);
        assert!((out.r_tilde[0] - 18.036).abs() < 1e-3, "{}", out.r_tilde[0]);
        assert!((out.x_next[0] - 10.11).abs() < 5e-3, "{}", out.x_next[0]);
        assert_eq!(out.eta.len(), 1);
    }

    #[test]
    fn superlinear_fixed_point_and_first_step() {
        let obj = make_cubic_univariate();
        let state = state_with_history(&obj, 10.0, 10.5);
        let out = superlinear_step(&state, &obj, &StepController::default(), &RelaxationParams::default()).unwrap();
        assert_eq!(out.x_next[0], 10.0);
        assert_eq!(out.eta, vec![0.0]);

        let fresh = ElementAuxState::new(&obj, x1(11.0), 0.01).unwrap();
        let a = superlinear_step(&fresh, &obj, &StepController::default(), &RelaxationParams::default()).unwrap();
        let b = ersav_step(&fresh, &obj, &SplittingOperator::Zero, 0.01, &RelaxationParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_examples() {
        let obj = make_rosenbrock();
        let state = ElementAuxState::new(&obj, DenseVector::new(vec![-2.0, -4.0]).unwrap(), 0.01).unwrap();
        assert_eq!(indicator_alpha(&state, state.f()), 1.0);
        let state = state.with_r(vec![0.5, 1.5]).unwrap();
        assert_eq!(indicator_alpha(&state, 1.0), 1.0);
        let state = state.with_r(vec![1.0, 1.0]).unwrap();
        assert_eq!(indicator_alpha(&state, 4.0), 0.5);
    }

    #[test]
    fn steffensen_example_uses_one_gradient() {
        let calls = Arc::new(AtomicUsize::new(0));
        let obj = Objective::new("counting", Counting(calls.clone()));
        let state = state_with_history(&obj, 1.0, 2.0);
        let before = calls.load(Ordering::SeqCst);
        let p = steffensen_dt(&state, &obj, &StepController::default()).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst) - before, 1);
        assert_eq!(p.phi, 0.5);
        assert_eq!(p.dt, 0.25);
        assert!(p.accepted);
    }

    #[test]
    fn steffensen_rejections() {
        let calls = Arc::new(AtomicUsize::new(0));
        let obj = Objective::new("counting", Counting(calls));
        let state = state_with_history(&obj, 0.0, 1.0);
        let p = steffensen_dt(&state, &obj, &StepController::default()).unwrap();
        assert_eq!(p.reason, ProposalReason::DenominatorTooSmall);
        assert_eq!(p.dt, state.dt_current);

        // the probe at x + f'(x) lands across the minimum of the cubic's derivative
        let cubic = make_cubic_univariate();
        let state = state_with_history(&cubic, 5.0, 6.0);
        let p = steffensen_dt(&state, &cubic, &StepController::default()).unwrap();
        assert!(p.phi > 0.0);
        assert_eq!(p.reason, ProposalReason::NonPositive);
        assert!(!p.accepted);
        assert_eq!(p.dt, state.dt_current);
    }

    #[test]
    fn aersav_gate() {
        let obj = make_rosenbrock();
        let params = RelaxationParams::default();
        let l = SplittingOperator::Zero;
        let state = ElementAuxState::new(&obj, DenseVector::new(vec![-2.0, -4.0]).unwrap(), 1.5e-3).unwrap();
        let c = StepController {
            beta: 1e-4,
            ..StepController::with_dt0(1.5e-3).unwrap()
        };
        let a = aersav_step(&state, &obj, &l, &c, &params).unwrap();
        let b = ersav_step(&state, &obj, &l, 1.5e-3, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.proposal.is_none());

        // force the gate open with an off-balance auxiliary vector
        let next = state.advance(&obj, &a).unwrap();
        let skewed = next.clone().with_r(vec![0.5 * next.r[0], 0.5 * next.r[1]]).unwrap();
        let out = aersav_step(&skewed, &obj, &l, &c, &params).unwrap();
        let p = out.proposal.expect("gate should open");
        if p.accepted {
            assert_eq!(out.dt_used, p.dt);
        } else {
            assert_eq!(out.dt_used.to_bits(), skewed.dt_current.to_bits());
        }
        let closed = aersav_step(&next, &obj, &l, &StepController { beta: 10.0, ..c }, &params).unwrap();
        assert_eq!(closed.dt_used.to_bits(), next.dt_current.to_bits());
    }
}
