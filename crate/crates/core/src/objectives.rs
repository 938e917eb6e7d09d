//! Benchmark problems: the ill-conditioned quadratic, Rosenbrock and two
//! univariate functions used for the superlinear experiments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::{Objective, ObjectiveFn};
use crate::vector::DenseVector;

/// `Σ x_{2i−1}² + (1/N) Σ x_{2i}²`, Hessian condition number N.
#[derive(Debug, Clone, Copy)]
pub struct IllConditionedQuadratic {
    n: usize,
}

impl IllConditionedQuadratic {
    fn weight(&self, i: usize) -> f64 {
        // 0-based index: even i is an odd coordinate
        if i.is_multiple_of(2) {
            1.0
        } else {
            1.0 / self.n as f64
        }
    }
}

impl ObjectiveFn for IllConditionedQuadratic {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let odd: f64 = x.iter().step_by(2).map(|v| v * v).sum();
        let even: f64 = x.iter().skip(1).step_by(2).map(|v| v * v).sum();
        odd + even / self.n as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| 2.0 * self.weight(i) * v)
            .collect()
    }

    fn hessian_diagonal(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some((0..self.n).map(|i| 2.0 * self.weight(i)).collect())
    }

    fn constant_hessian(&self) -> bool {
        true
    }
}

/// `(1 − x₁)² + 100 (x₂ − x₁²)²`
#[derive(Debug, Clone, Copy)]
pub struct Rosenbrock;

impl ObjectiveFn for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        let valley = b - a * a;
        vec![-2.0 * (1.0 - a) - 400.0 * a * valley, 200.0 * valley]
    }

    fn hessian_diagonal(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (a, b) = (x[0], x[1]);
        Some(vec![2.0 - 400.0 * b + 1200.0 * a * a, 200.0])
    }
}

/// `x³/3 − 100x + 1000`, minimum 1000/3 at x = 10.
#[derive(Debug, Clone, Copy)]
pub struct Cubic;

impl ObjectiveFn for Cubic {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let x = x[0];
        x * x * x / 3.0 - 100.0 * x + 1000.0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] - 100.0]
    }

    fn hessian_diagonal(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![2.0 * x[0]])
    }
}

/// `(sin x − ½)² + 5`, minimum 5 at x = π/6.
#[derive(Debug, Clone, Copy)]
pub struct SineSquared;

impl ObjectiveFn for SineSquared {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        (x[0].sin() - 0.5).powi(2) + 5.0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (s, c) = x[0].sin_cos();
        vec![2.0 * (s - 0.5) * c]
    }

    fn hessian_diagonal(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (s, c) = x[0].sin_cos();
        // d/dx [2 (s − ½) c] = 2c² − 2(s − ½)s
        Some(vec![2.0 * c * c - 2.0 * (s - 0.5) * s])
    }
}

pub fn make_illcond_quadratic(n: usize) -> Result<Objective> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::config(format!("quadratic dimension must be even and positive, got {n}")));
    }
    Objective::new(format!("quadratic{n}"), IllConditionedQuadratic { n })
        .with_known_optimum(DenseVector::zeros(n)?, 0.0)
}

/// Rosenbrock with shift 1 so the shifted function stays ≥ 1.
pub fn make_rosenbrock() -> Objective {
    Objective::new("rosenbrock", Rosenbrock)
        .with_known_optimum(DenseVector::filled(2, 1.0).expect("finite"), 0.0)
        .and_then(|o| o.with_shift(1.0))
        .expect("static configuration is valid")
}

pub fn make_cubic_univariate() -> Objective {
    Objective::new("cubic1d", Cubic)
        .with_known_optimum(DenseVector::filled(1, 10.0).expect("finite"), 1000.0 / 3.0)
        .expect("static configuration is valid")
}

pub fn make_sine_univariate() -> Objective {
    Objective::new("sine1d", SineSquared)
        .with_known_optimum(DenseVector::filled(1, PI / 6.0).expect("finite"), 5.0)
        .expect("static configuration is valid")
}

/// Benchmarks addressable by name from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Quadratic100,
    Rosenbrock,
    Cubic1d,
    Sine1d,
}

/// Static description of a benchmark.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: &'static str,
    pub dim: usize,
    /// Per-coordinate interval, enforced on the starting point only.
    pub domain: Option<(f64, f64)>,
    pub default_x0: DenseVector,
    pub known_optimum: (DenseVector, f64),
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::Quadratic100,
        Benchmark::Rosenbrock,
        Benchmark::Cubic1d,
        Benchmark::Sine1d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Quadratic100 => "quadratic100",
            Benchmark::Rosenbrock => "rosenbrock",
            Benchmark::Cubic1d => "cubic1d",
            Benchmark::Sine1d => "sine1d",
        }
    }

    /// Objective with the benchmark's constructor defaults (quadratic shift 0).
    pub fn objective(self) -> Objective {
        match self {
            Benchmark::Quadratic100 => make_illcond_quadratic(100).expect("100 is even"),
            Benchmark::Rosenbrock => make_rosenbrock(),
            Benchmark::Cubic1d => make_cubic_univariate(),
            Benchmark::Sine1d => make_sine_univariate(),
        }
    }

    /// Shift used for auxiliary-variable runs launched from the harness.
    ///
    /// The quadratic and Rosenbrock both have a zero minimum, so they run
    /// with shift 1; the univariate benchmarks are already bounded away from 0.
    pub fn harness_shift(self) -> f64 {
        match self {
            Benchmark::Quadratic100 | Benchmark::Rosenbrock => 1.0,
            Benchmark::Cubic1d | Benchmark::Sine1d => 0.0,
        }
    }

    pub fn spec(self) -> BenchmarkSpec {
        let obj = self.objective();
        let optimum = obj.known_optimum().cloned().expect("benchmarks know their optimum");
        let (domain, x0) = match self {
            Benchmark::Quadratic100 => (None, vec![1.0; 100]),
            Benchmark::Rosenbrock => (None, vec![-2.0, -4.0]),
            Benchmark::Cubic1d => (Some((0.0, 20.0)), vec![11.0]),
            Benchmark::Sine1d => (Some((-1.0, 2.0)), vec![0.2]),
        };
        BenchmarkSpec {
            name: self.name(),
            dim: obj.dim(),
            domain,
            default_x0: DenseVector::new(x0).expect("finite"),
            known_optimum: optimum,
        }
    }

    /// Sampling box for randomized checks: the domain when declared, else [−2, 2].
    pub fn sampling_box(self) -> (f64, f64) {
        self.spec().domain.unwrap_or((-2.0, 2.0))
    }

    pub fn check_start(self, x0: &DenseVector) -> Result<()> {
        let spec = self.spec();
        if x0.dim() != spec.dim {
            return Err(Error::config(format!(
                "x0 has dimension {}, {} expects {}",
                x0.dim(),
                spec.name,
                spec.dim
            )));
        }
        if let Some((lo, hi)) = spec.domain {
            if x0.iter().any(|&v| v < lo || v > hi) {
                return Err(Error::config(format!(
                    "x0 {x0:?} lies outside the {} domain [{lo}, {hi}]",
                    spec.name
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::config(format!("unknown benchmark '{s}'")))
    }
}
