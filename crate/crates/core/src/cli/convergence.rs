//! Convergence studies: error against step size, resolution or sample count.
//!
//! * `fd-beltrami`: max |Δ_S f (finite differences, step h) - Δ_S f (spectral)|
//!   on a random even f normalized to max |f| = 1; slope 2 ± 0.2 in h.
//! * `quadrature`: max over m of |mean(Y_{6,m}²) - 1| on S^2 against the
//!   resolution; must drop below 1e-12 from resolution 8 on.
//! * `mc-dual-funk`: RMS error of the Monte-Carlo F*_k F_k f over seeded
//!   replicates against the quadrature eigenvalue; slope -0.5 ± 0.1 in the
//!   sample count.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::function::random_even_spectrum;
use crate::diff_ops::{beltrami, beltrami_fd};
use crate::error::{Error, Result};
use crate::spectral::harmonics;
use crate::sphere::{build_grid, Direction};
use crate::stiefel::{composite_multiplier, dual_funk_k, test_function, Composite, StiefelFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    FdBeltrami,
    Quadrature,
    McDualFunk,
}

impl std::str::FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd-beltrami" => Ok(Study::FdBeltrami),
            "quadrature" => Ok(Study::Quadrature),
            "mc-dual-funk" => Ok(Study::McDualFunk),
            other => Err(Error::Parse(format!(
                "unknown study '{other}' (fd-beltrami, quadrature, mc-dual-funk)"
            ))),
        }
    }
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::FdBeltrami => "fd-beltrami",
            Study::Quadrature => "quadrature",
            Study::McDualFunk => "mc-dual-funk",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter(self) -> &'static str {
        match self {
            Study::FdBeltrami => "h",
            Study::Quadrature => "resolution",
            Study::McDualFunk => "samples",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Study::FdBeltrami => vec![1e-2, 3e-3, 1e-3],
            Study::Quadrature => vec![4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0],
            Study::McDualFunk => vec![500.0, 5000.0, 50000.0],
        }
    }
}

pub const QUADRATURE_THRESHOLD: f64 = 1e-12;
pub const QUADRATURE_MIN_RESOLUTION: usize = 8;
pub const DEFAULT_REPLICATES: usize = 64;

/// Inputs of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub study: Study,
    pub values: Vec<f64>,
    /// Dimension (fd-beltrami, mc-dual-funk).
    pub n: usize,
    /// Frame size (mc-dual-funk).
    pub k: usize,
    pub seed: u64,
    pub replicates: usize,
}

/// Error table with the fitted log-log slope and its acceptance band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub study: Study,
    pub rows: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub target: Option<(f64, f64)>,
    pub passed: bool,
}

/// Least-squares slope of log(error) against log(parameter).
pub fn log_log_slope(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / m, b + y / m));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

fn fd_error(n: usize, seed: u64, h: f64) -> Result<f64> {
    let s = random_even_spectrum(n, 6, seed)?;
    let grid = Arc::new(build_grid(n, 8)?);
    let f = crate::spectral::synthesize(&s, &grid)?;
    let f = f.map_values(|v| v / f.max_abs()).with_band(s.band());
    Ok(beltrami_fd(&f, h)?.max_abs_diff(&beltrami(&f)?))
}

fn quadrature_error(resolution: usize) -> Result<f64> {
    let grid = build_grid(3, resolution)?;
    let j = 6;
    let mut worst: f64 = 0.0;
    for m in -(j as i64)..=(j as i64) {
        let idx = harmonics::index(j, m);
        let mean: f64 = grid
            .nodes()
            .zip(grid.weights())
            .map(|(v, w)| w * harmonics::real_harmonics(j, v)[idx].powi(2))
            .sum();
        worst = worst.max((mean - 1.0).abs());
    }
    Ok(worst)
}

/// RMS over replicates of the Monte-Carlo F*_k F_k f at a point off the
/// pole of a zonal test function.
fn mc_error(n: usize, k: usize, seed: u64, samples: usize, replicates: usize) -> Result<f64> {
    let degree = 4;
    let f = test_function(n, degree)?;
    let phi = StiefelFunction::funk_of(f.clone(), k, degree)?;
    let mut v = vec![1.0; n];
    v[0] = -2.0;
    let v = Direction::new(v)?;
    let multipliers = (0..=degree)
        .map(|j| composite_multiplier(Composite::DualFunkFunk, j, n, k))
        .collect::<Result<Vec<_>>>()?;
    let exact = f.map_degrees(|j, c| c * multipliers[j]).eval_at(v.as_slice());
    let mut sum = 0.0;
    for r in 0..replicates {
        let e = dual_funk_k(&phi, &v, samples, seed, r as u64)?;
        sum += (e.mean - exact).norm_sqr();
    }
    Ok((sum / replicates as f64).sqrt())
}

fn as_count(x: f64, what: &str) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 && x < 1e12 {
        Ok(x as usize)
    } else {
        Err(Error::InvalidArgument(format!("{what} must be a positive integer, got {x}")))
    }
}

/// Runs a study. Fewer than three data points is an invalid argument.
pub fn convergence_study(spec: &StudySpec) -> Result<StudyResult> {
    if spec.values.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence study needs at least 3 data points, got {}",
            spec.values.len()
        )));
    }
    let mut rows = Vec::with_capacity(spec.values.len());
    for &x in &spec.values {
        let err = match spec.study {
            Study::FdBeltrami => fd_error(spec.n, spec.seed, x)?,
            Study::Quadrature => quadrature_error(as_count(x, "resolution")?)?,
            Study::McDualFunk => {
                if spec.replicates < 2 {
                    return Err(Error::InvalidArgument("need at least 2 replicates".into()));
                }
                mc_error(spec.n, spec.k, spec.seed, as_count(x, "samples")?, spec.replicates)?
            }
        };
        rows.push((x, err));
    }
    let (slope, target, passed) = match spec.study {
        Study::Quadrature => {
            let passed = rows
                .iter()
                .filter(|(x, _)| *x >= QUADRATURE_MIN_RESOLUTION as f64)
                .all(|(_, e)| *e < QUADRATURE_THRESHOLD);
            (None, None, passed)
        }
        Study::FdBeltrami | Study::McDualFunk => {
            let (centre, band) = if spec.study == Study::FdBeltrami { (2.0, 0.2) } else { (-0.5, 0.1) };
            let s = log_log_slope(&rows);
            (Some(s), Some((centre - band, centre + band)), (s - centre).abs() <= band)
        }
    };
    Ok(StudyResult {
        study: spec.study,
        rows,
        slope,
        target,
        passed,
    })
}
