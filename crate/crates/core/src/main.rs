use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ersav::harness::check::{run_checks, CheckOptions};
use ersav::harness::config::{parse_lambda, parse_reals, ExperimentConfig};
use ersav::harness::csv::write_trace;
use ersav::harness::rosenbrock::{run_rosenbrock, RosenbrockOptions};
use ersav::harness::superlinear::{default_starts, rate_table_csv, run_superlinear, SUPERLINEAR_ITERS};
use ersav::harness::table1::{run_table1, Table1Options};
use ersav::harness::parse_config;
use ersav::objectives::Benchmark;
use ersav::optimizers::{run, RunStatus};
use ersav::relaxation::RelaxationRule;
use ersav::Error;

#[derive(Parser)]
#[command(name = "ersav", version, about = "Energy-stable gradient-flow optimizers and their benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method on one benchmark and write the per-iteration trace as CSV.
    Run(RunArgs),
    /// Reproduce the loss table on the ill-conditioned quadratic.
    Table1 {
        /// Sign convention of the relaxation budget.
        #[arg(long, default_value = "strict")]
        relaxation: String,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rosenbrock comparison of GD, E-SAV and AE-RSAV; writes plot data into a directory.
    Rosenbrock {
        #[arg(long, default_value = "rosenbrock_out")]
        out: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        iters: usize,
        #[arg(long, default_value_t = 1e-4)]
        beta: f64,
    },
    /// Convergence orders of the secant-stepped univariate scheme.
    Superlinear {
        /// Restrict to one benchmark (cubic1d or sine1d).
        #[arg(long)]
        benchmark: Option<String>,
        /// Comma-separated starting points.
        #[arg(long)]
        starts: Option<String>,
        #[arg(long, default_value_t = SUPERLINEAR_ITERS)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite; exits nonzero on any violation.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances for the relaxation solver check.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Comma-separated starting point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// zero, hessian, hessian-max, or comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    clamp_lambda: bool,
    #[arg(long)]
    shift: Option<f64>,
    /// standard or strict.
    #[arg(long)]
    relaxation: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn experiment(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &args.method {
        cfg.method = m.parse()?;
    }
    if let Some(b) = &args.benchmark {
        cfg.benchmark = b.parse()?;
    }
    if let Some(dt) = args.dt {
        cfg.dt0 = dt;
    }
    if let Some(psi) = args.psi {
        cfg.psi = psi;
    }
    if let Some(beta) = args.beta {
        cfg.beta = beta;
    }
    if let Some(iters) = args.iters {
        cfg.max_iters = iters;
    }
    if let Some(x0) = &args.x0 {
        cfg.x0 = Some(parse_reals(x0)?);
    }
    if let Some(l) = &args.lambda {
        cfg.lambda = parse_lambda(l)?;
    }
    if args.clamp_lambda {
        cfg.clamp_lambda = true;
    }
    if let Some(shift) = args.shift {
        cfg.shift = Some(shift);
    }
    if let Some(rule) = &args.relaxation {
        cfg.relaxation = rule.parse()?;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Config {
        line: None,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, Error> {
    let cfg = experiment(args)?;
    let obj = cfg.objective()?;
    let x0 = cfg.start()?;
    let result = run(&obj, &x0, &cfg.run_config()?)?;
    match &cfg.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Error::Config {
                line: None,
                message: format!("cannot create {}: {e}", path.display()),
            })?;
            write_trace(io::BufWriter::new(file), &result.trace)?;
        }
        None => write_trace(io::stdout().lock(), &result.trace)?,
    }
    match &result.status {
        RunStatus::NumericalFailure(reason) => {
            eprintln!("numerical failure: {reason}");
            Ok(ExitCode::from(1))
        }
        status => {
            if let Some(last) = result.trace.last() {
                eprintln!("{status:?} after {} iterations, loss {:e}", last.iter, last.loss);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Table1 { relaxation, out } => {
            let options = Table1Options {
                relaxation: relaxation.parse::<RelaxationRule>()?,
                ..Default::default()
            };
            let table = run_table1(&options)?;
            print!("{}", table.render());
            if let Some(path) = out {
                write_file(&path, &table.to_csv())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rosenbrock { out, iters, beta } => {
            let options = RosenbrockOptions {
                iters,
                beta,
                ..Default::default()
            };
            for s in run_rosenbrock(&out, &options)? {
                let loss = s.final_loss.map_or("NAN".to_string(), |l| format!("{l:e}"));
                println!("{:<8} dt={:<8} final loss {loss}", s.method.to_string(), s.dt);
            }
            println!("plot data written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Superlinear {
            benchmark,
            starts,
            iters,
            out,
        } => {
            let benches = match benchmark {
                Some(b) => vec![b.parse::<Benchmark>()?],
                None => vec![Benchmark::Cubic1d, Benchmark::Sine1d],
            };
            let starts = starts.as_deref().map(parse_reals).transpose()?;
            let plan: Vec<(Benchmark, Vec<f64>)> = benches
                .into_iter()
                .map(|b| (b, starts.clone().unwrap_or_else(|| default_starts(b))))
                .collect();
            let runs = run_superlinear(&plan, iters)?;
            let csv = rate_table_csv(&runs);
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            for r in &runs {
                eprintln!(
                    "{} from {}: last orders {:?}, reached 1e-12: {}",
                    r.benchmark,
                    r.start,
                    r.last_two_q(),
                    r.reached_target()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { seed, samples } => {
            let options = CheckOptions {
                seed,
                eta_samples: samples,
                ..Default::default()
            };
            let items = run_checks(&options)?;
            let mut stdout = io::stdout().lock();
            for item in &items {
                let mark = if item.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(stdout, "{mark}  {:<40} {}", item.name, item.detail);
            }
            if items.iter().all(|i| i.passed) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
