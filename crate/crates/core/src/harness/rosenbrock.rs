//! Rosenbrock comparison: loss curves, trajectories and the energy series.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{energy_gap, normalized_energy_gap};
use crate::error::{Error, Result};
use crate::objectives::Benchmark;
use crate::optimizers::{run, Method, RunConfig, RunResult};

use super::csv::{format_real, trace_to_string};

pub const ROSENBROCK_METHODS: [Method; 3] = [Method::GD, Method::ESAV, Method::AERSAV];
pub const ROSENBROCK_STEPS: [f64; 2] = [3e-4, 1.5e-3];
pub const ROSENBROCK_ITERS: usize = 20_000;
pub const ROSENBROCK_BETA: f64 = 1e-4;
/// Trajectory files flag every this many steps.
pub const MARKER_EVERY: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct RosenbrockOptions {
    pub iters: usize,
    pub beta: f64,
    pub steps: Vec<f64>,
}

impl Default for RosenbrockOptions {
    fn default() -> Self {
        RosenbrockOptions {
            iters: ROSENBROCK_ITERS,
            beta: ROSENBROCK_BETA,
            steps: ROSENBROCK_STEPS.to_vec(),
        }
    }
}

/// Runs one method at one step size from (−2, −4) with the path recorded.
pub fn rosenbrock_run(method: Method, dt: f64, options: &RosenbrockOptions) -> Result<RunResult> {
    let bench = Benchmark::Rosenbrock;
    let obj = bench.objective().with_shift(bench.harness_shift())?;
    let mut config = RunConfig::new(method, dt, options.iters);
    config.controller.beta = options.beta;
    config.record_path = true;
    run(&obj, &bench.spec().default_x0, &config)
}

/// Two columns, `iter loss`, for rows with a finite loss.
pub fn loss_curve(result: &RunResult) -> String {
    let mut out = String::from("# iter loss\n");
    for rec in result.trace.iter().filter(|r| r.loss.is_finite()) {
        let _ = writeln!(out, "{} {}", rec.iter, format_real(rec.loss));
    }
    out
}

/// Three columns, `x1 x2 marker`, with marker 1 every [`MARKER_EVERY`] steps.
pub fn trajectory(result: &RunResult) -> String {
    let mut out = String::from("# x1 x2 marker\n");
    for (k, x) in result.path.iter().enumerate() {
        let marker = u8::from(k % MARKER_EVERY == 0);
        let _ = writeln!(out, "{} {} {marker}", format_real(x[0]), format_real(x[1]));
    }
    out
}

/// `iter original modified gap normalized_gap`, where original is the shifted
/// objective and modified is (mean rᵢ)².
pub fn energy_series(result: &RunResult, shift: f64) -> String {
    let gaps = energy_gap(&result.trace, shift);
    let normalized = normalized_energy_gap(&result.trace);
    let mut out = String::from("# iter original modified gap normalized_gap\n");
    for (k, rec) in result.trace.iter().enumerate() {
        let Some(alpha) = rec.alpha else { continue };
        if !rec.is_finite() {
            continue;
        }
        let original = rec.f_raw + shift;
        let modified = alpha * alpha * original;
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            rec.iter,
            format_real(original),
            format_real(modified),
            format_real(gaps[k]),
            format_real(normalized[k])
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct RosenbrockSummary {
    pub method: Method,
    pub dt: f64,
    pub final_loss: Option<f64>,
    pub files: Vec<PathBuf>,
}

fn write(path: PathBuf, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

/// Runs every method at every step size and writes the plot data into `dir`.
pub fn run_rosenbrock(dir: &Path, options: &RosenbrockOptions) -> Result<Vec<RosenbrockSummary>> {
    fs::create_dir_all(dir).map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))?;
    let shift = Benchmark::Rosenbrock.harness_shift();
    let mut summaries = Vec::new();
    for &dt in &options.steps {
        for method in ROSENBROCK_METHODS {
            let result = rosenbrock_run(method, dt, options)?;
            let tag = format!("{}_dt{}", method.key(), dt);
            let mut files = Vec::new();
            write(dir.join(format!("trace_{tag}.csv")), &trace_to_string(&result.trace)?, &mut files)?;
            write(dir.join(format!("loss_{tag}.dat")), &loss_curve(&result), &mut files)?;
            write(dir.join(format!("trajectory_{tag}.dat")), &trajectory(&result), &mut files)?;
            if method == Method::AERSAV {
                write(dir.join(format!("energy_{tag}.dat")), &energy_series(&result, shift), &mut files)?;
            }
            summaries.push(RosenbrockSummary {
                method,
                dt,
                final_loss: result.final_loss(),
                files,
            });
        }
    }
    Ok(summaries)
}
