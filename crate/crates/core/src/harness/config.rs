//! Experiment configuration files: `key = value` lines with `#` comments.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::objective::{LambdaSource, Objective};
use crate::objectives::Benchmark;
use crate::optimizers::{Method, RunConfig, StepController, StopRule};
use crate::relaxation::{RelaxationParams, RelaxationRule};
use crate::vector::DenseVector;

/// Everything needed to launch one run from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub benchmark: Benchmark,
    pub dt0: f64,
    pub psi: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub x0: Option<Vec<f64>>,
    pub lambda: LambdaSource,
    pub clamp_lambda: bool,
    /// Overrides the benchmark's harness shift.
    pub shift: Option<f64>,
    pub relaxation: RelaxationRule,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::ERSAV,
            benchmark: Benchmark::Quadratic100,
            dt0: 0.01,
            psi: 0.95,
            beta: 0.1,
            max_iters: 1000,
            x0: None,
            lambda: LambdaSource::Zero,
            clamp_lambda: false,
            shift: None,
            relaxation: RelaxationRule::Standard,
            seed: 0,
            output: None,
        }
    }
}

/// Parses a comma-separated list of reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::config(format!("'{s}' is not a finite number")))
        })
        .collect()
}

/// `zero`, `hessian`, `hessian-max`, or a comma-separated list of λ values.
pub fn parse_lambda(text: &str) -> Result<LambdaSource> {
    match text.trim() {
        "zero" | "0" => Ok(LambdaSource::Zero),
        "hessian" => Ok(LambdaSource::HessianDiagonal),
        "hessian-max" | "hessian_max" => Ok(LambdaSource::HessianMax),
        other => parse_reals(other).map(LambdaSource::Explicit),
    }
}

fn parse_bool(text: &str) -> Result<bool> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(format!("'{other}' is not a boolean"))),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, what: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::config(format!("{what} '{value}' is not a valid number")))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "method" => self.method = value.parse()?,
            "benchmark" => self.benchmark = value.parse()?,
            "dt0" | "dt" => self.dt0 = parse_num(value, "dt0")?,
            "psi" => self.psi = parse_num(value, "psi")?,
            "beta" => self.beta = parse_num(value, "beta")?,
            "max_iters" | "iters" => self.max_iters = parse_num(value, "max_iters")?,
            "x0" => self.x0 = Some(parse_reals(value)?),
            "lambda" => self.lambda = parse_lambda(value)?,
            "clamp_lambda" => self.clamp_lambda = parse_bool(value)?,
            "shift" => self.shift = Some(parse_num(value, "shift")?),
            "relaxation" => self.relaxation = value.parse()?,
            "seed" => self.seed = parse_num(value, "seed")?,
            "output" | "out" => self.output = Some(PathBuf::from(value)),
            other => return Err(Error::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(Error::config(format!("dt0 must be > 0, got {}", self.dt0)));
        }
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::config(format!("psi must lie in (0, 1), got {}", self.psi)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.max_iters < 1 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        if let Some(shift) = self.shift {
            if !(shift >= 0.0 && shift.is_finite()) {
                return Err(Error::config(format!("shift must be >= 0, got {shift}")));
            }
        }
        Ok(())
    }

    /// The benchmark objective with the configured (or default harness) shift.
    pub fn objective(&self) -> Result<Objective> {
        self.benchmark
            .objective()
            .with_shift(self.shift.unwrap_or(self.benchmark.harness_shift()))
    }

    pub fn start(&self) -> Result<DenseVector> {
        let x0 = match &self.x0 {
            Some(x0) => DenseVector::from_slice(x0)?,
            None => self.benchmark.spec().default_x0,
        };
        self.benchmark.check_start(&x0)?;
        Ok(x0)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        self.validate()?;
        Ok(RunConfig {
            method: self.method,
            lambda: self.lambda.clone(),
            clamp_lambda: self.clamp_lambda,
            controller: StepController {
                dt0: self.dt0,
                beta: self.beta,
                ..Default::default()
            },
            relaxation: RelaxationParams {
                psi: self.psi,
                rule: self.relaxation,
                ..Default::default()
            },
            stop: StopRule {
                max_iters: self.max_iters,
                ..Default::default()
            },
            record_path: false,
        })
    }
}

/// Parses configuration text; errors carry 1-based line numbers.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config_at(line_no, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::config_at(line_no, format!("malformed line '{line}'")));
        }
        let at_line = |e: Error| match e {
            Error::Config { message, .. } => Error::config_at(line_no, message),
            other => other,
        };
        config.set(key, value).map_err(at_line)?;
        config.validate().map_err(at_line)?;
    }
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.method, Method::ERSAV);
        assert_eq!((c.psi, c.beta, c.dt0, c.max_iters), (0.95, 0.1, 0.01, 1000));
    }

    #[test]
    fn values_and_comments() {
        let c = parse_config_str("# experiment\nmethod = ersav\n\ndt0 = 0.5  # big\nx0 = 1, 2\nlambda = hessian\n").unwrap();
        assert_eq!(c.dt0, 0.5);
        assert_eq!(c.x0, Some(vec![1.0, 2.0]));
        assert_eq!(c.lambda, LambdaSource::HessianDiagonal);
        assert_eq!(c.benchmark, Benchmark::Quadratic100);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_config_str(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(line_of("psi = 1.5"), Some(1));
        assert_eq!(line_of("method = ersav\nstep = 2"), Some(2));
        assert_eq!(line_of("\n\nmethod ersav"), Some(3));
        assert_eq!(line_of("dt0 = fast"), Some(1));
        assert_eq!(line_of("dt0 = 0"), Some(1));
        assert_eq!(line_of("max_iters = 0"), Some(1));
    }

    #[test]
    fn missing_file() {
        assert!(parse_config(Path::new("/nonexistent/ersav.conf")).unwrap_err().is_config());
    }

    #[test]
    fn lambda_forms() {
        assert_eq!(parse_lambda("zero").unwrap(), LambdaSource::Zero);
        assert_eq!(parse_lambda("hessian-max").unwrap(), LambdaSource::HessianMax);
        assert_eq!(parse_lambda("1, 2.5").unwrap(), LambdaSource::Explicit(vec![1.0, 2.5]));
        assert!(parse_lambda("lots").is_err());
    }

    #[test]
    fn start_is_checked_against_domain() {
        let mut c = ExperimentConfig {
            benchmark: Benchmark::Cubic1d,
            ..Default::default()
        };
        assert_eq!(c.start().unwrap()[0], 11.0);
        c.x0 = Some(vec![25.0]);
        assert!(c.start().is_err());
    }
}
