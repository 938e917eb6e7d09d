//! The invariant suite behind the `check` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{check_modified_dissipation, check_original_dissipation, DISSIPATION_TOL};
use crate::error::Result;
use crate::objective::{finite_diff_gradient, finite_diff_hessian_diagonal, LambdaSource, FD_STEP};
use crate::objectives::Benchmark;
use crate::optimizers::{run, Method, RunConfig};
use crate::relaxation::{solve_eta, RelaxationParams};
use crate::vector::DenseVector;

pub const GRADIENT_SAMPLES: usize = 100;
pub const HESSIAN_SAMPLES: usize = 20;
pub const HESSIAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckItem {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckItem {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub seed: u64,
    pub eta_samples: usize,
    pub dissipation_steps: usize,
    pub dissipation_dts: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: 0,
            eta_samples: 100_000,
            dissipation_steps: 200,
            dissipation_dts: 20,
        }
    }
}

fn sample_point(rng: &mut ChaCha8Rng, bench: Benchmark) -> Result<DenseVector> {
    let (lo, hi) = bench.sampling_box();
    DenseVector::new((0..bench.spec().dim).map(|_| rng.gen_range(lo..=hi)).collect())
}

/// Largest relative error ‖g − g_fd‖∞ / max(1, ‖g‖∞) over random points.
pub fn gradient_check(bench: Benchmark, samples: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let obj = bench.objective();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_point(rng, bench)?;
        let g = obj.gradient(&x)?;
        let fd = finite_diff_gradient(&obj, &x, FD_STEP)?;
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let err = g.iter().zip(fd.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

/// Largest relative error of the Hessian diagonal against second differences.
pub fn hessian_check(bench: Benchmark, samples: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let obj = bench.objective();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_point(rng, bench)?;
        let Some(h) = obj.hessian_diagonal(&x)? else {
            return Ok(f64::INFINITY);
        };
        let fd = finite_diff_hessian_diagonal(&obj, &x, HESSIAN_STEP)?;
        for (a, b) in h.iter().zip(fd.iter()) {
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// Number of random relaxation instances whose η is infeasible or not minimal.
pub fn eta_check(samples: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    let params = RelaxationParams::default();
    let psi = params.psi;
    let violation = |eta: f64, rt: f64, s: f64, dx: f64, dt: f64| {
        let r = eta * rt + (1.0 - eta) * s;
        r * r - rt * rt - psi / dt * dx * dx
    };
    let mut bad = 0;
    for _ in 0..samples {
        let rt = rng.gen_range(1e-9..=10.0);
        let s = rng.gen_range(1e-9..=10.0);
        let dx = rng.gen_range(-5.0..=5.0);
        let dt = rng.gen_range(1e-4..=50.0);
        let out = solve_eta(rt, s, dx, dt, &params)?;
        let feasible = (0.0..=1.0).contains(&out.eta)
            && out.r_relaxed * out.r_relaxed - rt * rt <= psi / dt * dx * dx + 1e-9;
        let minimal = out.eta <= 1e-6 || violation(out.eta - 1e-4, rt, s, dx, dt) > 0.0;
        if !(feasible && minimal) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Runs the full suite.
pub fn run_checks(options: &CheckOptions) -> Result<Vec<CheckItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut items = Vec::new();

    for bench in Benchmark::ALL {
        let err = gradient_check(bench, GRADIENT_SAMPLES, &mut rng)?;
        items.push(CheckItem::new(
            format!("gradient {bench}"),
            err < 1e-6,
            format!("max rel. error {err:.2e}"),
        ));
        let err = hessian_check(bench, HESSIAN_SAMPLES, &mut rng)?;
        items.push(CheckItem::new(
            format!("hessian diagonal {bench}"),
            err < 1e-4,
            format!("max rel. error {err:.2e}"),
        ));
        let obj = bench.objective();
        let (x_star, f_star) = obj.known_optimum().cloned().expect("benchmarks know their optimum");
        let g = obj.gradient(&x_star)?.norm();
        let dv = (obj.raw_value(&x_star)? - f_star).abs();
        items.push(CheckItem::new(
            format!("optimum {bench}"),
            g < 1e-10 && dv <= 1e-12,
            format!("|grad| {g:.1e}, |f - f*| {dv:.1e}"),
        ));
    }

    let bad = eta_check(options.eta_samples, &mut rng)?;
    items.push(CheckItem::new(
        "relaxation solver",
        bad == 0,
        format!("{bad} of {} instances infeasible or not minimal", options.eta_samples),
    ));

    for bench in [Benchmark::Quadratic100, Benchmark::Rosenbrock] {
        let obj = bench.objective().with_shift(bench.harness_shift())?;
        let x0 = bench.spec().default_x0;
        for method in [Method::ESAV, Method::ERSAV, Method::ERSAVL] {
            let mut failures = Vec::new();
            for _ in 0..options.dissipation_dts {
                let dt = rng.gen_range(1e-4..=50.0);
                let mut config = RunConfig::new(method, dt, options.dissipation_steps);
                if method == Method::ERSAVL {
                    config.lambda = LambdaSource::HessianDiagonal;
                }
                let res = run(&obj, &x0, &config)?;
                let check = check_modified_dissipation(&res.trace, DISSIPATION_TOL);
                if res.failed() || !check.holds {
                    failures.push(format!("dt={dt:.4}"));
                }
            }
            items.push(CheckItem::new(
                format!("modified energy {method} {bench}"),
                failures.is_empty(),
                if failures.is_empty() {
                    format!("{} step sizes", options.dissipation_dts)
                } else {
                    format!("violations at {}", failures.join(" "))
                },
            ));
        }
    }

    let bench = Benchmark::Quadratic100;
    let obj = bench.objective().with_shift(1.0)?;
    let res = run(&obj, &bench.spec().default_x0, &RunConfig::new(Method::ERSAV, 0.01, 2000))?;
    let original = check_original_dissipation(&res.trace, 1e-12);
    let r_min = res.trace.iter().filter_map(|r| r.r_min).fold(f64::INFINITY, f64::min);
    items.push(CheckItem::new(
        "original energy at dt=0.01",
        !res.failed() && original.holds,
        format!("first violation {:?}", original.first_violation),
    ));
    items.push(CheckItem::new(
        "auxiliary lower bound at dt=0.01",
        r_min >= 0.5,
        format!("min r {r_min:.6}"),
    ));

    items.push(one_dimensional_equivalence()?);
    Ok(items)
}

/// Scalar and element-wise schemes must coincide on a univariate problem.
pub fn one_dimensional_equivalence() -> Result<CheckItem> {
    let bench = Benchmark::Cubic1d;
    let obj = bench.objective();
    let x0 = bench.spec().default_x0;
    let mut mismatches = Vec::new();
    for (scalar, element) in [(Method::SAV, Method::ESAV), (Method::RSAV, Method::ERSAV)] {
        let mut a = RunConfig::new(scalar, 0.05, 300);
        a.record_path = true;
        let mut b = a.clone();
        b.method = element;
        let ra = run(&obj, &x0, &a)?;
        let rb = run(&obj, &x0, &b)?;
        let same_path = ra.path.len() == rb.path.len()
            && ra.path.iter().zip(&rb.path).all(|(p, q)| p[0].to_bits() == q[0].to_bits());
        let r_close = ra
            .trace
            .iter()
            .zip(&rb.trace)
            .all(|(p, q)| match (p.r_min, q.r_min) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-15 * x.abs().max(1.0),
                _ => false,
            });
        if !(same_path && r_close) {
            mismatches.push(format!("{scalar}/{element}"));
        }
    }
    Ok(CheckItem::new(
        "one-dimensional equivalence",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "SAV = E-SAV, RSAV = E-RSAV".to_string()
        } else {
            format!("mismatch in {}", mismatches.join(", "))
        },
    ))
}
