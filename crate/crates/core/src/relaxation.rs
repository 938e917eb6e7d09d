//! Relaxation of the auxiliary variable.
//!
//! After an auxiliary-variable step produces `r̃`, the relaxed value
//!
//! ```text
//! r = η r̃ + (1 − η) √f(xⁿ⁺¹)
//! ```
//!
//! uses the smallest η ∈ [0, 1] whose constraint
//!
//! ```text
//! r² − r̃² ≤ (ψ/Δt) · dx²
//! ```
//!
//! holds. Expanding gives `a η² + b η + c ≤ 0` with
//! `a = (√f − r̃)²`, `b = 2√f (r̃ − √f)`, `c = f − r̃² − (ψ/Δt) dx²`.
//! Since `a ≥ 0` and η = 1 is always feasible, the feasible set is an
//! interval ending at 1 and η₀ is its left end (clamped at 0).

use crate::error::{Error, Result};

/// Sign of the step-length budget in the relaxation constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelaxationRule {
    /// `r² − r̃² ≤ +(ψ/Δt) dx²`: the relaxed energy may exceed `r̃²` by the budget.
    #[default]
    Standard,
    /// `r² − r̃² ≤ −(ψ/Δt) dx²`: the relaxed energy must undercut `r̃²` by the budget.
    ///
    /// Frequently infeasible; the closed form is then clamped into [0, 1]
    /// and the outcome is flagged infeasible. Used to reproduce the
    /// reference quadratic loss table.
    Strict,
}

impl RelaxationRule {
    fn sign(self) -> f64 {
        match self {
            RelaxationRule::Standard => 1.0,
            RelaxationRule::Strict => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelaxationRule::Standard => "standard",
            RelaxationRule::Strict => "strict",
        }
    }
}

impl std::str::FromStr for RelaxationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(RelaxationRule::Standard),
            "strict" => Ok(RelaxationRule::Strict),
            other => Err(Error::config(format!(
                "unknown relaxation rule '{other}' (expected standard or strict)"
            ))),
        }
    }
}

/// Parameters of the η solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParams {
    /// ψ ∈ (0, 1).
    pub psi: f64,
    /// Leading coefficients `a ≤ a_tolerance · max(1, f)` count as zero.
    pub a_tolerance: f64,
    /// Discriminants in `[−discriminant_clamp · max(1, b²), 0)` are clamped to 0.
    pub discriminant_clamp: f64,
    /// Slack on `a η² + b η + c ≤ 0` when reporting feasibility, relative to `max(1, f, r̃²)`.
    pub feasibility_tolerance: f64,
    pub rule: RelaxationRule,
}

impl Default for RelaxationParams {
    fn default() -> Self {
        RelaxationParams {
            psi: 0.95,
            a_tolerance: 1e-14,
            discriminant_clamp: 1e-10,
            feasibility_tolerance: 1e-12,
            rule: RelaxationRule::Standard,
        }
    }
}

impl RelaxationParams {
    pub fn with_psi(psi: f64) -> Result<Self> {
        let params = RelaxationParams {
            psi,
            ..Default::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::config(format!("psi must lie in (0, 1), got {}", self.psi)));
        }
        if !(self.a_tolerance >= 0.0 && self.discriminant_clamp >= 0.0 && self.feasibility_tolerance >= 0.0) {
            return Err(Error::config("relaxation tolerances must be nonnegative"));
        }
        Ok(())
    }
}

/// Result of one scalar relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationOutcome {
    pub eta: f64,
    pub r_relaxed: f64,
    /// Whether the constraint holds at `eta` (within the feasibility tolerance).
    pub feasible: bool,
}

/// Quadratic coefficients `(a, b, c)` of the relaxation constraint.
pub fn constraint_coefficients(
    r_tilde: f64,
    sqrt_f_next: f64,
    dx_sq: f64,
    dt: f64,
    params: &RelaxationParams,
) -> (f64, f64, f64) {
    let f_next = sqrt_f_next * sqrt_f_next;
    let budget = params.rule.sign() * params.psi / dt * dx_sq;
    let a = (sqrt_f_next - r_tilde).powi(2);
    let b = 2.0 * sqrt_f_next * (r_tilde - sqrt_f_next);
    let c = f_next - r_tilde * r_tilde - budget;
    (a, b, c)
}

/// Solves for the smallest admissible η given the squared step `dx_sq`.
///
/// Element-wise schemes pass `(xᵢⁿ⁺¹ − xᵢⁿ)²`, scalar schemes `‖xⁿ⁺¹ − xⁿ‖²`.
pub fn solve_eta_sq(
    r_tilde: f64,
    sqrt_f_next: f64,
    dx_sq: f64,
    dt: f64,
    params: &RelaxationParams,
) -> Result<RelaxationOutcome> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("step size must be > 0, got {dt}")));
    }
    if !(r_tilde >= 0.0 && r_tilde.is_finite() && sqrt_f_next > 0.0 && sqrt_f_next.is_finite() && dx_sq.is_finite()) {
        return Err(Error::numerical(format!(
            "invalid relaxation inputs r_tilde={r_tilde}, sqrt_f_next={sqrt_f_next}, dx^2={dx_sq}"
        )));
    }
    let f_next = sqrt_f_next * sqrt_f_next;
    let (a, b, c) = constraint_coefficients(r_tilde, sqrt_f_next, dx_sq, dt, params);

    let eta = if c <= 0.0 || a <= params.a_tolerance * f_next.max(1.0) {
        // η = 0 already satisfies the constraint, or the degenerate a = 0 case
        0.0
    } else {
        let mut disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            if disc >= -params.discriminant_clamp * (b * b).max(1.0) || params.rule == RelaxationRule::Strict {
                disc = 0.0;
            } else {
                return Err(Error::numerical(format!(
                    "negative discriminant {disc:e} in relaxation (a={a:e}, b={b:e}, c={c:e})"
                )));
            }
        }
        let root = disc.sqrt();
        // smaller root; the b < 0 branch avoids cancellation between −b and √disc
        let smaller = if b < 0.0 {
            2.0 * c / (root - b)
        } else {
            (-b - root) / (2.0 * a)
        };
        smaller.clamp(0.0, 1.0)
    };

    let r_relaxed = eta * r_tilde + (1.0 - eta) * sqrt_f_next;
    let slack = params.feasibility_tolerance * f_next.max(r_tilde * r_tilde).max(1.0);
    let feasible = a * eta * eta + b * eta + c <= slack;
    Ok(RelaxationOutcome {
        eta,
        r_relaxed,
        feasible,
    })
}

/// Per-coordinate form taking the signed displacement `dx`.
pub fn solve_eta(
    r_tilde: f64,
    sqrt_f_next: f64,
    dx: f64,
    dt: f64,
    params: &RelaxationParams,
) -> Result<RelaxationOutcome> {
    solve_eta_sq(r_tilde, sqrt_f_next, dx * dx, dt, params)
}
