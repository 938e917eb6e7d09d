//! Convergence-order table for the secant-stepped univariate scheme.

use std::fmt::Write as _;

use crate::diagnostics::{estimate_rate, RateEstimate};
use crate::error::{Error, Result};
use crate::objectives::Benchmark;
use crate::optimizers::{run, Method, RunConfig};
use crate::vector::DenseVector;

use super::csv::format_real;

pub const SUPERLINEAR_ITERS: usize = 8;
pub const SUPERLINEAR_DT0: f64 = 0.01;
/// Errors at most this far above zero count as converged.
pub const TARGET_ERROR: f64 = 1e-12;

pub fn default_starts(bench: Benchmark) -> Vec<f64> {
    match bench {
        Benchmark::Cubic1d => vec![10.5, 11.0, 12.0, 15.0],
        Benchmark::Sine1d => vec![0.0, 0.2, 0.3, 0.7],
        _ => Vec::new(),
    }
}

/// Errors at or below 64 ulps of the minimizer are roundoff, not convergence data.
pub fn noise_floor(x_star: f64) -> f64 {
    64.0 * f64::EPSILON * x_star.abs().max(1.0)
}

#[derive(Debug, Clone)]
pub struct SuperlinearRun {
    pub benchmark: Benchmark,
    pub start: f64,
    /// εₙ = |xⁿ − x*| for every iterate, including ε₀ and any trailing zeros.
    pub epsilons: Vec<f64>,
    /// Order estimates over the prefix of errors above the noise floor.
    pub rate: RateEstimate,
}

impl SuperlinearRun {
    /// Whether some εₙ with n ≤ `SUPERLINEAR_ITERS` is at most [`TARGET_ERROR`].
    pub fn reached_target(&self) -> bool {
        self.epsilons
            .iter()
            .take(SUPERLINEAR_ITERS + 1)
            .any(|&e| e <= TARGET_ERROR)
    }

    pub fn last_two_q(&self) -> Vec<f64> {
        self.rate.last_defined(2)
    }
}

pub fn superlinear_run(bench: Benchmark, start: f64, iters: usize) -> Result<SuperlinearRun> {
    if !matches!(bench, Benchmark::Cubic1d | Benchmark::Sine1d) {
        return Err(Error::config(format!("{bench} is not a univariate benchmark")));
    }
    let x0 = DenseVector::new(vec![start])?;
    bench.check_start(&x0)?;
    let obj = bench.objective().with_shift(bench.harness_shift())?;
    let x_star = bench.spec().known_optimum.0[0];
    let mut config = RunConfig::new(Method::Superlinear, SUPERLINEAR_DT0, iters);
    config.record_path = true;
    let result = run(&obj, &x0, &config)?;
    if result.failed() {
        return Err(Error::numerical(format!("{bench} from {start}: {:?}", result.status)));
    }
    let epsilons: Vec<f64> = result.path.iter().map(|x| (x[0] - x_star).abs()).collect();
    let floor = noise_floor(x_star);
    let measurable: Vec<f64> = epsilons.iter().copied().take_while(|&e| e > floor).collect();
    let rate = estimate_rate(&measurable).map_err(|e| match e {
        Error::InsufficientData(msg) => {
            Error::InsufficientData(format!("{bench} from {start} converged too fast: {msg}"))
        }
        other => other,
    })?;
    Ok(SuperlinearRun {
        benchmark: bench,
        start,
        epsilons,
        rate,
    })
}

/// `benchmark,start,n,epsilon,q` with `q` empty where undefined.
pub fn rate_table_csv(runs: &[SuperlinearRun]) -> String {
    let mut out = String::from("benchmark,start,n,epsilon,q\n");
    for run in runs {
        for (n, eps) in run.epsilons.iter().enumerate() {
            // q_values[k] is centred on ε index k + 1
            let q = n
                .checked_sub(1)
                .and_then(|k| run.rate.q_values.get(k).copied().flatten())
                .map(format_real)
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", run.benchmark, run.start, n, format_real(*eps), q);
        }
    }
    out
}

pub fn run_superlinear(benchmarks: &[(Benchmark, Vec<f64>)], iters: usize) -> Result<Vec<SuperlinearRun>> {
    let mut runs = Vec::new();
    for (bench, starts) in benchmarks {
        for &s in starts {
            runs.push(superlinear_run(*bench, s, iters)?);
        }
    }
    Ok(runs)
}
