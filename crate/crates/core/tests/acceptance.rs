//! Acceptance run: ten numbered criteria, one PASS/FAIL line each.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use sphere_transforms::cli::function::random_even_spectrum;
use sphere_transforms::diff_ops::{
    weighted_laplacian, weighted_laplacian_factored, weighted_laplacian_fd, FdOptions, WeightedOpSpec,
};
use sphere_transforms::inversion::{invert_cosine1, invert_funk, InversionConfig, InversionMethod};
use sphere_transforms::spectral::{funk_multiplier, oracle_gate, synthesize};
use sphere_transforms::sphere::{build_grid, remove_mean, GridFunction};
use sphere_transforms::stiefel::{check_identity, Identity, StiefelCheckParams};
use sphere_transforms::transforms::constants::funk_constant;
use sphere_transforms::transforms::{
    cosine_transform, funk_transform, log_cosine_transform, log_sine_transform, sine_transform, Path,
    TransformParams,
};
use sphere_transforms::Result;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random even band-limited function on S^{n-1}, sampled on a grid that
/// resolves its products.
fn even_fn(n: usize, max_degree: usize, seed: u64) -> Result<GridFunction> {
    let grid = Arc::new(build_grid(n, max_degree + 2)?);
    synthesize(&random_even_spectrum(n, max_degree, seed)?, &grid)
}

fn rel(a: &GridFunction, reference: &GridFunction) -> f64 {
    a.max_abs_diff(reference) / reference.max_abs().max(1.0)
}

fn cosine(f: &GridFunction, lambda: Complex64, path: Path) -> Result<GridFunction> {
    cosine_transform(f, &TransformParams::new(lambda, path))
}

fn sine(f: &GridFunction, lambda: f64, path: Path) -> Result<GridFunction> {
    sine_transform(f, &TransformParams::real(lambda, path))
}

fn scaled(f: &GridFunction, s: f64) -> GridFunction {
    f.map_values(|v| v * s)
}

fn duality() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5] {
        let f = even_fn(n, 8, 10 + n as u64)?;
        for i in 0..20 {
            let lambda = c(-(n as f64) + 0.3 + 0.35 * i as f64, 0.25 * (i % 2) as f64);
            let phi = cosine(&f, lambda, Path::Spectral)?;
            let back = cosine(&phi, -lambda - n as f64, Path::Spectral)?;
            worst = worst.max(rel(&back, &f));
        }
    }
    Ok((worst <= 1e-9, format!("max rel err {worst:.2e} over 60 round trips")))
}

fn slope(rows: &[(f64, f64)]) -> f64 {
    sphere_transforms::cli::convergence::log_log_slope(rows)
}

fn weighted_three_ways() -> Outcome {
    let (mut spectral, mut fd): (f64, f64) = (0.0, 0.0);
    for n in [3, 4, 5] {
        let f = even_fn(n, 6, 20 + n as u64)?;
        for lambda in [-2.5, -0.5, 0.7, 1.5] {
            let spec = WeightedOpSpec::real(lambda, 1);
            let a = weighted_laplacian(&f, &spec)?;
            spectral = spectral.max(rel(&weighted_laplacian_factored(&f, &spec)?, &a));
            fd = fd.max(rel(&weighted_laplacian_fd(&f, &spec, &FdOptions { h: 1e-3, richardson: false })?, &a));
        }
    }
    let f = even_fn(3, 6, 23)?;
    let spec = WeightedOpSpec::real(0.7, 1);
    let a = weighted_laplacian(&f, &spec)?;
    let mut rows = Vec::new();
    for h in [1e-2, 3e-3, 1e-3] {
        rows.push((h, rel(&weighted_laplacian_fd(&f, &spec, &FdOptions { h, richardson: false })?, &a)));
    }
    let s = slope(&rows);
    Ok((
        spectral <= 1e-8 && fd <= 1e-3 && (s - 2.0).abs() <= 0.2,
        format!("factored vs spectral {spectral:.2e}, fd {fd:.2e}, fd slope {s:.3}"),
    ))
}

fn shift_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5] {
        let f = even_fn(n, 8, 30 + n as u64)?;
        for lambda in [-2.5, -0.5, 0.7, 1.5] {
            let rhs = cosine(&f, c(lambda, 0.0), Path::Spectral)?;
            for ell in 1..=3u32 {
                let up = cosine(&f, c(lambda + 2.0 * ell as f64, 0.0), Path::Spectral)?;
                let lhs = weighted_laplacian_factored(&up, &WeightedOpSpec::real(lambda, ell))?;
                worst = worst.max(rel(&lhs, &rhs));
            }
        }
    }
    Ok((worst <= 1e-8, format!("max rel err {worst:.2e} for l = 1, 2, 3")))
}

fn funk_inversion() -> Outcome {
    let cfg = InversionConfig::default();
    let f = even_fn(4, 8, 41)?;
    let mut even = invert_funk(&funk_transform(&f, Path::Spectral)?, &cfg)?;
    even.score(&f)?;
    let scale = f.max_abs().max(1.0);
    let e4 = even.report.max_error.unwrap_or(f64::INFINITY) / scale;
    let agree = even.report.branch_agreement.unwrap_or(f64::INFINITY) / scale;
    let mut collapse: f64 = 0.0;
    for j in (0..=12).step_by(2) {
        let fj = funk_multiplier(j, 4)?;
        collapse = collapse.max(((j as f64 + 1.0).powi(2) * fj * fj - 1.0).abs());
    }
    let f3 = even_fn(3, 8, 42)?;
    let mut odd = invert_funk(&funk_transform(&f3, Path::Spectral)?, &cfg)?;
    odd.score(&f3)?;
    let e3 = odd.report.max_error.unwrap_or(f64::INFINITY) / f3.max_abs().max(1.0);
    let methods = even.report.method == InversionMethod::EvenBranch && odd.report.method == InversionMethod::LogBranch;
    Ok((
        methods && e4 <= 1e-9 && agree <= 1e-9 && collapse <= 1e-10 && e3 <= 1e-6,
        format!("n=4 err {e4:.2e}, orderings agree {agree:.2e}, (j+1)^2 f_j^2 - 1 {collapse:.2e}; n=3 err {e3:.2e}"),
    ))
}

fn cosine1_inversion() -> Outcome {
    let cfg = InversionConfig::default();
    let mut errs = Vec::new();
    let mut agree = 0.0;
    for (n, seed) in [(4, 51), (3, 52)] {
        let f = even_fn(n, 8, seed)?.map_values(|v| v + 0.75);
        let mut out = invert_cosine1(&cosine(&f, c(1.0, 0.0), Path::Spectral)?, &cfg)?;
        out.score(&f)?;
        let scale = f.max_abs().max(1.0);
        errs.push(out.report.max_error.unwrap_or(f64::INFINITY) / scale);
        if let Some(a) = out.report.branch_agreement {
            agree = a / scale;
        }
    }
    Ok((
        errs[0] <= 1e-8 && agree <= 1e-8 && errs[1] <= 1e-6,
        format!("n=4 err {:.2e} (orderings agree {agree:.2e}); n=3 err {:.2e} with mean 0.75 added", errs[0], errs[1]),
    ))
}

fn log_branch() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut limit: f64 = 0.0;
    for n in [3, 4] {
        let f = remove_mean(&even_fn(n, 8, 60 + n as u64)?);
        let log = log_cosine_transform(&f, Path::Quadrature)?;
        for ell in 1..=3u32 {
            let l = -2.0 * ell as f64;
            let lhs = weighted_laplacian_factored(&log, &WeightedOpSpec::real(l, ell))?;
            let rhs = cosine(&f, c(l, 0.0), Path::Spectral)?;
            worst = worst.max(rel(&lhs, &rhs));
        }
        let eps = 1e-5;
        let near = cosine(&f, c(eps, 0.0), Path::Spectral)?.zip_with(&cosine(&f, c(-eps, 0.0), Path::Spectral)?, |a, b| 0.5 * (a + b))?;
        limit = limit.max(rel(&near, &log));
    }
    Ok((
        worst <= 1e-6 && limit <= 1e-6,
        format!("Delta_(-2l,l) C_log f vs C^(-2l) f {worst:.2e} (l = 1, 2, 3); (C^e + C^-e)/2 vs C_log at e = 1e-5 {limit:.2e}"),
    ))
}

fn sine_identities() -> Outcome {
    let mut inverse: f64 = 0.0;
    for n in [3, 4, 5] {
        let f = even_fn(n, 8, 70 + n as u64)?;
        inverse = inverse.max(rel(&sine(&f, 1.0 - n as f64, Path::Spectral)?, &f));
    }
    let mut factor: f64 = 0.0;
    let mut shift: f64 = 0.0;
    let mut log: f64 = 0.0;
    for n in [3, 4] {
        let f = even_fn(n, 6, 80 + n as u64)?;
        let cn = funk_constant(n);
        for lambda in [-0.5, 0.5, 1.5] {
            let s = sine(&f, lambda, Path::Quadrature)?;
            let p = TransformParams::real(lambda, Path::Quadrature);
            let a = scaled(&cosine_transform(&funk_transform(&f, Path::Quadrature)?, &p)?, cn);
            let b = scaled(&funk_transform(&cosine_transform(&f, &p)?, Path::Quadrature)?, cn);
            factor = factor.max(rel(&a, &s)).max(rel(&b, &s));
        }
        let lambda = -0.5;
        let target = sine(&f, lambda, Path::Auto)?;
        for ell in 1..=2u32 {
            let up = sine(&f, lambda + 2.0 * ell as f64, Path::Auto)?;
            shift = shift.max(rel(&weighted_laplacian_factored(&up, &WeightedOpSpec::real(lambda, ell))?, &target));
        }
        if n % 2 == 0 {
            for ell in 1..=2u32 {
                let up = sine(&f, 1.0 - n as f64 + 2.0 * ell as f64, Path::Auto)?;
                let back = weighted_laplacian_factored(&up, &WeightedOpSpec::real(1.0 - n as f64, ell))?;
                shift = shift.max(rel(&back, &f));
            }
        }
        let g = remove_mean(&f);
        let lhs = weighted_laplacian_factored(&log_sine_transform(&g, Path::Quadrature)?, &WeightedOpSpec::real(-2.0, 1))?;
        log = log.max(rel(&lhs, &sine(&g, -2.0, Path::Auto)?));
    }
    Ok((
        inverse <= 1e-9 && factor <= 1e-8 && shift <= 1e-6 && log <= 1e-6,
        format!("S^(1-n) f = f {inverse:.2e}; S = c_n C F = c_n F C {factor:.2e}; shifts {shift:.2e}; log branch {log:.2e}"),
    ))
}

fn frame_identities() -> Outcome {
    let runs = [
        (Identity::Factorization, 4, 2),
        (Identity::SineInverse, 4, 2),
        (Identity::FunkOddCodim, 4, 1),
        (Identity::FunkOddCodim, 5, 2),
        (Identity::FunkEvenCodim, 4, 2),
        (Identity::Cosine1Even, 4, 2),
        (Identity::Cosine1Odd, 5, 2),
        (Identity::Cosine1Odd, 3, 1),
    ];
    let start = Instant::now();
    let mut ok = true;
    let mut spectral: f64 = 0.0;
    let mut sigmas: f64 = 0.0;
    let mut failed = Vec::new();
    for (id, n, k) in runs {
        let params = StiefelCheckParams::new(n, k);
        let r = check_identity(id, &params)?;
        spectral = spectral.max(r.spectral_error);
        if let (Some(e), Some(s)) = (r.mc_error, r.mc_sigma) {
            if s > 0.0 {
                sigmas = sigmas.max(e / s);
            }
        }
        if !r.passed() {
            ok = false;
            failed.push(format!("{id}@({n},{k})"));
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(120);
    Ok((
        ok && fast,
        format!(
            "8 checks, spectral max {spectral:.2e}, worst MC {sigmas:.2} sigma at 1e5 samples, {:.1} s{}",
            elapsed.as_secs_f64(),
            if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join(" ")) }
        ),
    ))
}

fn gate() -> Outcome {
    let g = oracle_gate();
    let worst = g.cases.iter().map(|c| c.error).fold(0.0, f64::max);
    Ok((
        g.passed && g.cases.len() == 24 && worst <= 1e-9,
        format!("{} cases, worst rel err {worst:.2e}", g.cases.len()),
    ))
}

fn sphtx(args: &[&str]) -> std::io::Result<(i32, Vec<u8>)> {
    let out = Command::new(env!("CARGO_BIN_EXE_sphtx")).args(args).output()?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("sphtx-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.toml");
    std::fs::write(&config, "n = 3\nJ = 6\nseed = 5\ninput = \"random-even:J=4\"\n")?;
    let csv = dir.join("nodes.csv");
    let (cfg, csv) = (config.to_string_lossy().into_owned(), csv.to_string_lossy().into_owned());
    let runs: Vec<Vec<&str>> = vec![
        vec!["multipliers", "--n", "3", "--J", "8", "--lambda", "-1"],
        vec!["multipliers", "--operator", "delta-op", "--n", "5", "--J", "6", "--lambda", "0.5", "--lambda-im", "0.25", "--ell", "2"],
        vec!["forward", "--config", &cfg, "--transform", "cosine", "--path", "quadrature", "--lambda", "0.5"],
        vec!["diffop", "--config", &cfg, "--path", "fd", "--lambda", "0.7"],
        vec!["invert", "--theorem", "funk", "--n", "4", "--seed", "7", "--csv", &csv],
        vec!["invert", "--theorem", "cosine1", "--n", "3", "--seed", "7"],
        vec!["convergence", "--study", "quadrature"],
        vec!["stiefel-check", "--identity", "4.8", "--n", "4", "--k", "2", "--samples", "3000", "--seed", "3"],
    ];
    let mut identical = 0;
    let mut problems = Vec::new();
    for args in &runs {
        let (code_a, a) = sphtx(args)?;
        let csv_a = std::fs::read(&csv).unwrap_or_default();
        let (code_b, b) = sphtx(args)?;
        let csv_b = std::fs::read(&csv).unwrap_or_default();
        if code_a == 0 && code_b == 0 && a == b && !a.is_empty() && csv_a == csv_b {
            identical += 1;
        } else {
            problems.push(format!("{} (exit {code_a}/{code_b})", args[0]));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((
        problems.is_empty(),
        format!(
            "{identical}/{} invocations byte-identical across two runs{}",
            runs.len(),
            if problems.is_empty() { String::new() } else { format!("; differing: {}", problems.join(", ")) }
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("duality C^(-l-n) C^l = I", Some(5), duality),
        ("weighted operator, three pipelines", Some(30), weighted_three_ways),
        ("Delta_(l,ell) C^(l+2ell) = C^l", None, shift_identity),
        ("Funk inversion", None, funk_inversion),
        ("C^1 inversion", None, cosine1_inversion),
        ("logarithmic branch", None, log_branch),
        ("sine transform identities", None, sine_identities),
        ("frame transform identities", None, frame_identities),
        ("multiplier oracle gate", None, gate),
        ("CLI determinism", None, determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b as f64);
        let passed = passed && in_time;
        if !passed {
            failures += 1;
        }
        let budget = budget.map(|b| format!(", budget {b} s")).unwrap_or_default();
        println!(
            "criterion {:>2} {}: {name}: {detail} [{secs:.2} s{budget}]",
            i + 1,
            if passed { "PASS" } else { "FAIL" }
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
