//! The objective oracle contract and the splitting operator.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Default central-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-6;

/// Positivity floor used when no optimum is known.
pub const DEFAULT_POSITIVITY_GUARD: f64 = 1e-12;

/// A smooth function with an analytic gradient.
///
/// Implementations must be pure: the same input always gives the same output.
pub trait ObjectiveFn: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Diagonal of the Hessian, when available.
    fn hessian_diagonal(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// True when the Hessian does not depend on `x`.
    fn constant_hessian(&self) -> bool {
        false
    }
}

/// A value/gradient oracle plus the metadata the auxiliary-variable schemes
/// need: a constant `shift` added to the raw function and the positivity
/// floor `delta` the shifted function must respect.
#[derive(Clone)]
pub struct Objective {
    name: String,
    func: Arc<dyn ObjectiveFn>,
    shift: f64,
    delta: f64,
    known_optimum: Option<(DenseVector, f64)>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("shift", &self.shift)
            .field("delta", &self.delta)
            .field("known_optimum", &self.known_optimum)
            .finish()
    }
}

impl Objective {
    /// Wraps `func` with shift 0 and no known optimum.
    pub fn new(name: impl Into<String>, func: impl ObjectiveFn + 'static) -> Self {
        let mut obj = Objective {
            name: name.into(),
            func: Arc::new(func),
            shift: 0.0,
            delta: DEFAULT_POSITIVITY_GUARD,
            known_optimum: None,
        };
        obj.delta = obj.default_delta();
        obj
    }

    /// δ = min(1, shift + f*) when f* is known and that is positive, else the runtime guard.
    fn default_delta(&self) -> f64 {
        match &self.known_optimum {
            Some((_, f_star)) if self.shift + f_star > 0.0 => (self.shift + f_star).min(1.0),
            _ => DEFAULT_POSITIVITY_GUARD,
        }
    }

    pub fn with_known_optimum(mut self, x_star: DenseVector, f_star: f64) -> Result<Self> {
        if x_star.dim() != self.dim() {
            return Err(Error::config("optimum dimension does not match objective"));
        }
        self.known_optimum = Some((x_star, f_star));
        self.delta = self.default_delta();
        Ok(self)
    }

    /// Sets the shift and recomputes the default δ.
    pub fn with_shift(mut self, shift: f64) -> Result<Self> {
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(Error::config(format!("shift must be finite and >= 0, got {shift}")));
        }
        self.shift = shift;
        self.delta = self.default_delta();
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::config(format!("positivity floor must be > 0, got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.func.dim()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn known_optimum(&self) -> Option<&(DenseVector, f64)> {
        self.known_optimum.as_ref()
    }

    pub fn has_hessian_diagonal(&self) -> bool {
        self.func.hessian_diagonal(&vec![0.0; self.dim()]).is_some()
    }

    pub fn constant_hessian(&self) -> bool {
        self.func.constant_hessian()
    }

    fn check_dim(&self, x: &DenseVector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::config(format!(
                "point has dimension {}, objective {} expects {}",
                x.dim(),
                self.name,
                self.dim()
            )));
        }
        Ok(())
    }

    /// Unshifted function value; may be any real but must be finite.
    pub fn raw_value(&self, x: &DenseVector) -> Result<f64> {
        self.check_dim(x)?;
        let v = self.func.value(x.as_slice());
        if !v.is_finite() {
            return Err(Error::numerical(format!("{} evaluated to {v}", self.name)));
        }
        Ok(v)
    }

    /// `raw + shift`, checked against the positivity floor.
    pub fn shifted_value(&self, x: &DenseVector) -> Result<f64> {
        let value = self.raw_value(x)? + self.shift;
        if value < self.delta {
            return Err(Error::PositivityViolation {
                value,
                floor: self.delta,
            });
        }
        Ok(value)
    }

    /// `|raw − f*|` when the optimum is known, otherwise the raw value.
    pub fn loss(&self, raw: f64) -> f64 {
        match &self.known_optimum {
            Some((_, f_star)) => (raw - f_star).abs(),
            None => raw,
        }
    }

    pub fn gradient(&self, x: &DenseVector) -> Result<DenseVector> {
        self.check_dim(x)?;
        let g = self.func.gradient(x.as_slice());
        if g.len() != self.dim() {
            return Err(Error::config(format!(
                "gradient of {} has dimension {}, expected {}",
                self.name,
                g.len(),
                self.dim()
            )));
        }
        DenseVector::new(g)
    }

    pub fn hessian_diagonal(&self, x: &DenseVector) -> Result<Option<DenseVector>> {
        self.check_dim(x)?;
        self.func
            .hessian_diagonal(x.as_slice())
            .map(DenseVector::new)
            .transpose()
    }
}

/// Central-difference gradient, entry i = (f(x+h·eᵢ) − f(x−h·eᵢ)) / 2h, on the raw function.
pub fn finite_diff_gradient(obj: &Objective, x: &DenseVector, h: f64) -> Result<DenseVector> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("difference step must be > 0, got {h}")));
    }
    let mut probe = x.as_slice().to_vec();
    let mut grad = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let xi = probe[i];
        probe[i] = xi + h;
        let up = obj.raw_value(&DenseVector::new(probe.clone())?)?;
        probe[i] = xi - h;
        let down = obj.raw_value(&DenseVector::new(probe.clone())?)?;
        probe[i] = xi;
        grad.push((up - down) / (2.0 * h));
    }
    DenseVector::new(grad)
}

/// Second central difference of the raw value, entry i = (f(x+h·eᵢ) − 2f(x) + f(x−h·eᵢ)) / h².
pub fn finite_diff_hessian_diagonal(obj: &Objective, x: &DenseVector, h: f64) -> Result<DenseVector> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("difference step must be > 0, got {h}")));
    }
    let center = obj.raw_value(x)?;
    let mut probe = x.as_slice().to_vec();
    let mut diag = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let xi = probe[i];
        probe[i] = xi + h;
        let up = obj.raw_value(&DenseVector::new(probe.clone())?)?;
        probe[i] = xi - h;
        let down = obj.raw_value(&DenseVector::new(probe.clone())?)?;
        probe[i] = xi;
        diag.push((up - 2.0 * center + down) / (h * h));
    }
    DenseVector::new(diag)
}

/// The diagonal operator moved to the implicit side of the scheme,
/// `(L x)ᵢ = λᵢ xᵢ` with every λᵢ ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub enum SplittingOperator {
    Zero,
    Diagonal(DenseVector),
}

impl SplittingOperator {
    /// Builds a diagonal operator. Negative entries are an error unless `clamp` is set.
    pub fn diagonal(lambdas: DenseVector, clamp: bool) -> Result<Self> {
        if let Some(i) = lambdas.iter().position(|&l| l < 0.0) {
            if !clamp {
                return Err(Error::config(format!(
                    "lambda[{i}] = {} is negative; pass --clamp-lambda to clamp at 0",
                    lambdas[i]
                )));
            }
            let clamped = lambdas.iter().map(|l| l.max(0.0)).collect();
            return Ok(SplittingOperator::Diagonal(DenseVector::new(clamped)?));
        }
        Ok(SplittingOperator::Diagonal(lambdas))
    }

    /// λᵢ, zero for the trivial splitting.
    pub fn lambda(&self, i: usize) -> f64 {
        match self {
            SplittingOperator::Zero => 0.0,
            SplittingOperator::Diagonal(l) => l[i],
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            SplittingOperator::Diagonal(l) if l.dim() != dim => Err(Error::config(format!(
                "lambda has dimension {}, objective expects {dim}",
                l.dim()
            ))),
            _ => Ok(()),
        }
    }

    /// `(L d, d) = Σ λᵢ dᵢ²`
    pub fn quadratic_form(&self, d: &[f64]) -> f64 {
        match self {
            SplittingOperator::Zero => 0.0,
            SplittingOperator::Diagonal(l) => {
                l.iter().zip(d).map(|(l, d)| l * d * d).sum()
            }
        }
    }
}

/// Where the λᵢ of a run come from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LambdaSource {
    #[default]
    Zero,
    /// λᵢⁿ = max(H(xⁿ)ᵢᵢ, 0); evaluated once for constant-Hessian objectives.
    HessianDiagonal,
    /// Uniform λ = maxᵢ H(x⁰)ᵢᵢ, a scalar bound on the Hessian diagonal.
    HessianMax,
    Explicit(Vec<f64>),
}

impl LambdaSource {
    /// Whether λ has to be re-evaluated at every iterate.
    pub fn is_dynamic(&self, obj: &Objective) -> bool {
        matches!(self, LambdaSource::HessianDiagonal) && !obj.constant_hessian()
    }

    pub fn resolve(&self, obj: &Objective, x: &DenseVector, clamp: bool) -> Result<SplittingOperator> {
        let hessian = || -> Result<DenseVector> {
            obj.hessian_diagonal(x)?.ok_or_else(|| {
                Error::config(format!("{} has no Hessian diagonal oracle", obj.name()))
            })
        };
        let op = match self {
            LambdaSource::Zero => SplittingOperator::Zero,
            LambdaSource::HessianDiagonal => {
                let h = hessian()?;
                SplittingOperator::diagonal(h, true)?
            }
            LambdaSource::HessianMax => {
                let h = hessian()?;
                let bound = h.max().max(0.0);
                SplittingOperator::Diagonal(DenseVector::filled(obj.dim(), bound)?)
            }
            LambdaSource::Explicit(values) => {
                let values = if values.len() == 1 {
                    vec![values[0]; obj.dim()]
                } else {
                    values.clone()
                };
                SplittingOperator::diagonal(DenseVector::new(values)?, clamp)?
            }
        };
        op.check_dim(obj.dim())?;
        Ok(op)
    }
}
