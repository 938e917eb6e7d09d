//! Loss grid on the ill-conditioned quadratic: five methods by five step sizes.

use std::fmt::Write as _;

use crate::error::Result;
use crate::objective::LambdaSource;
use crate::objectives::Benchmark;
use crate::optimizers::{run, Method, RunConfig};
use crate::relaxation::{RelaxationParams, RelaxationRule};

pub const TABLE1_METHODS: [Method; 5] = [Method::GD, Method::RSAV, Method::ESAV, Method::ERSAV, Method::ERSAVL];
pub const TABLE1_STEPS: [f64; 5] = [0.1, 1.0, 10.0, 20.0, 30.0];
pub const TABLE1_ITERS: usize = 1000;

/// Options for the grid. The defaults reproduce the reference table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Options {
    pub relaxation: RelaxationRule,
    pub psi: f64,
    pub shift: f64,
    /// Splitting operator of the E-RSAVL column.
    pub ersavl_lambda: LambdaSource,
    pub iters: usize,
}

impl Default for Table1Options {
    fn default() -> Self {
        Table1Options {
            relaxation: RelaxationRule::Strict,
            psi: 0.95,
            shift: Benchmark::Quadratic100.harness_shift(),
            ersavl_lambda: LambdaSource::HessianMax,
            iters: TABLE1_ITERS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Cell {
    pub method: Method,
    pub dt: f64,
    /// Final raw loss; `None` when the run blew up.
    pub loss: Option<f64>,
}

impl Table1Cell {
    /// "NAN" for failures, "<2.23e-308" below the smallest positive normal value.
    pub fn rendered(&self) -> String {
        match self.loss {
            None => "NAN".to_string(),
            Some(v) if v < f64::MIN_POSITIVE => "<2.23e-308".to_string(),
            Some(v) if (1e-3..1e5).contains(&v) => format!("{v:.4}"),
            Some(v) => format!("{v:.2e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table1 {
    pub cells: Vec<Table1Cell>,
}

impl Table1 {
    pub fn get(&self, method: Method, dt: f64) -> Option<&Table1Cell> {
        self.cells.iter().find(|c| c.method == method && c.dt == dt)
    }

    /// Fixed-width text table, one row per step size.
    pub fn render(&self) -> String {
        let mut out = format!("{:<10}", "dt");
        for m in TABLE1_METHODS {
            let _ = write!(out, "{:>14}", m.to_string());
        }
        out.push('\n');
        for dt in TABLE1_STEPS {
            let _ = write!(out, "{:<10}", dt);
            for m in TABLE1_METHODS {
                let text = self.get(m, dt).map(|c| c.rendered()).unwrap_or_default();
                let _ = write!(out, "{text:>14}");
            }
            out.push('\n');
        }
        out
    }

    /// Long-format CSV: `dt,method,loss,rendered`; failed cells leave `loss` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt,method,loss,rendered\n");
        for c in &self.cells {
            let loss = c.loss.map(super::csv::format_real).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", c.dt, c.method, loss, c.rendered());
        }
        out
    }
}

/// Runs one cell from the all-ones start.
pub fn table1_cell(method: Method, dt: f64, options: &Table1Options) -> Result<Table1Cell> {
    let obj = Benchmark::Quadratic100.objective().with_shift(options.shift)?;
    let x0 = Benchmark::Quadratic100.spec().default_x0;
    let mut config = RunConfig::new(method, dt, options.iters);
    config.relaxation = RelaxationParams {
        psi: options.psi,
        rule: options.relaxation,
        ..Default::default()
    };
    if method == Method::ERSAVL {
        config.lambda = options.ersavl_lambda.clone();
    }
    let result = run(&obj, &x0, &config)?;
    Ok(Table1Cell {
        method,
        dt,
        loss: result.final_loss(),
    })
}

pub fn run_table1(options: &Table1Options) -> Result<Table1> {
    let mut cells = Vec::with_capacity(25);
    for dt in TABLE1_STEPS {
        for method in TABLE1_METHODS {
            cells.push(table1_cell(method, dt, options)?);
        }
    }
    Ok(Table1 { cells })
}
