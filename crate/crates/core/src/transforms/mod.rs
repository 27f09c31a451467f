//! Forward transforms on S^{n-1}: λ-cosine, Funk, logarithmic cosine,
//! λ-sine and logarithmic sine.
//!
//! Each transform has two independent evaluation paths:
//!
//! * **spectral**: analyze, multiply degree j by the closed-form multiplier,
//!   synthesize. Valid for every λ off the pole set (analytic continuation).
//! * **quadrature**: integrate the kernel directly. For every output node u
//!   the sphere is written in polar form about u, v = t u + √(1-t²) ω with ω
//!   on the unit sphere of u^⊥; the singular t-integral uses a rule adapted
//!   to the kernel and the ω-average a product rule exact for the band
//!   limit. Off-grid values of f come from band-limited synthesis, never
//!   from interpolation. Inputs without a band fall back to the plain
//!   weighted sum over the grid.

pub mod constants;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::SphereRule;
use crate::spectral::funk_hecke::{abs_pow, zonal_integral, ZonalKernel, ZonalQuadrature};
use crate::spectral::{analyze, synthesize, HarmonicSpectrum, MultiplierTable, MEAN_TOLERANCE};
use crate::sphere::{dot, integrate, GridFunction, Provenance, QuadratureGrid, SphereFn};

/// Which evaluation path to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Path {
    Quadrature,
    Spectral,
    /// Spectral when the input is band-limited and λ lies outside the
    /// quadrature domain, quadrature otherwise.
    Auto,
}

impl Path {
    pub fn name(self) -> &'static str {
        match self {
            Path::Quadrature => "quadrature",
            Path::Spectral => "spectral",
            Path::Auto => "auto",
        }
    }
}

impl std::str::FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Path::Quadrature),
            "spectral" => Ok(Path::Spectral),
            "auto" => Ok(Path::Auto),
            other => Err(Error::Parse(format!("unknown path '{other}'"))),
        }
    }
}

/// Parameters of a λ-dependent transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub lambda: Complex64,
    pub path: Path,
}

impl TransformParams {
    pub fn new(lambda: Complex64, path: Path) -> Self {
        Self { lambda, path }
    }

    pub fn real(lambda: f64, path: Path) -> Self {
        Self::new(Complex64::new(lambda, 0.0), path)
    }
}

/// An orthonormal basis of u^⊥, as n-1 rows of length n.
///
/// For n = 3: e1 normalizes a - (a·u)u with a the coordinate axis of
/// smallest |a·u| (lowest index on ties) and e2 = u × e1. For other n the
/// axes are Gram–Schmidt orthogonalized against u in order of increasing
/// |u_i|, skipping any that become degenerate.
pub fn orthonormal_complement(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()));
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for &axis in &order {
        if basis.len() == n {
            break;
        }
        if n == 3 && basis.len() == 2 {
            let e1 = &basis[1];
            basis.push(vec![
                u[1] * e1[2] - u[2] * e1[1],
                u[2] * e1[0] - u[0] * e1[2],
                u[0] * e1[1] - u[1] * e1[0],
            ]);
            break;
        }
        let mut w = vec![0.0; n];
        w[axis] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > 1e-8 {
            w.iter_mut().for_each(|x| *x /= norm);
            basis.push(w);
        }
    }
    basis.remove(0);
    basis
}

/// Integration rule for kernel transforms at a single output direction.
#[derive(Debug, Clone)]
pub struct PolarRule {
    n: usize,
    fiber: SphereRule,
    radial: ZonalQuadrature,
}

impl PolarRule {
    /// Exact fiber averages for band limit `max_degree`; `radial` controls
    /// the singular t-integral.
    pub fn new(n: usize, max_degree: usize, radial: ZonalQuadrature) -> Result<Self> {
        Ok(Self {
            n,
            fiber: SphereRule::with_exactness(n - 1, max_degree.max(1))?,
            radial,
        })
    }

    /// Default rule for a band limit: J + 16 Gauss–Jacobi nodes per half
    /// (at least 40) and tanh-sinh level 5.
    pub fn for_band(n: usize, max_degree: usize) -> Result<Self> {
        Self::new(
            n,
            max_degree,
            ZonalQuadrature {
                nodes: (max_degree + 16).max(40),
                tanh_sinh_level: 5,
            },
        )
    }

    /// ∫ f(v) k(u·v) d_*v.
    pub fn integrate(&self, f: &dyn SphereFn, u: &[f64], kernel: &ZonalKernel) -> Result<Complex64> {
        let basis = orthonormal_complement(u);
        let fiber_mean = |t: f64| -> Complex64 {
            let t = t.clamp(-1.0, 1.0);
            let s = ((1.0 - t) * (1.0 + t)).sqrt();
            let mut v = vec![0.0; self.n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (w, wt) in self.fiber.iter() {
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi = t * u[i];
                }
                for (b, &c) in basis.iter().zip(w) {
                    let sc = s * c;
                    v.iter_mut().zip(b).for_each(|(x, y)| *x += sc * y);
                }
                acc += wt * f.eval(&v);
            }
            acc
        };
        zonal_integral(kernel, self.n, fiber_mean, self.radial)
    }

    /// Average of f over the great subsphere u^⊥ ∩ S^{n-1}.
    pub fn great_sphere_mean(&self, f: &dyn SphereFn, u: &[f64]) -> Complex64 {
        let basis = orthonormal_complement(u);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut v = vec![0.0; self.n];
        for (w, wt) in self.fiber.iter() {
            v.fill(0.0);
            for (b, &c) in basis.iter().zip(w) {
                v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
            }
            acc += wt * f.eval(&v);
        }
        acc
    }
}

/// Which integral operator is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Cosine(Complex64),
    Sine(Complex64),
    LogCosine,
    LogSine,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Cosine(_) => "cosine",
            Kind::Sine(_) => "sine",
            Kind::LogCosine => "log-cosine",
            Kind::LogSine => "log-sine",
        }
    }

    fn kernel(self, n: usize) -> Result<ZonalKernel> {
        match self {
            Kind::Cosine(l) => ZonalKernel::cosine(l, n),
            Kind::Sine(l) => ZonalKernel::sine(l, n),
            Kind::LogCosine => Ok(ZonalKernel::log_cosine(n)),
            Kind::LogSine => Ok(ZonalKernel::log_sine(n)),
        }
    }

    fn table(self, n: usize, max_degree: usize) -> Result<MultiplierTable> {
        match self {
            Kind::Cosine(l) => MultiplierTable::cosine(n, max_degree, l),
            Kind::Sine(l) => MultiplierTable::sine(n, max_degree, l),
            Kind::LogCosine => MultiplierTable::log_cosine(n, max_degree),
            Kind::LogSine => MultiplierTable::log_sine(n, max_degree),
        }
    }

    /// Whether the defining integral converges.
    fn in_quadrature_domain(self, n: usize) -> bool {
        match self {
            Kind::Cosine(l) => l.re > -1.0,
            Kind::Sine(l) => l.re > 1.0 - n as f64,
            Kind::LogCosine | Kind::LogSine => true,
        }
    }

    fn domain_message(self, n: usize) -> String {
        match self {
            Kind::Cosine(l) => format!("cosine quadrature needs Re λ > -1, got {}", l.re),
            Kind::Sine(l) => format!("sine quadrature needs Re λ > {}, got {}", 1.0 - n as f64, l.re),
            _ => String::new(),
        }
    }

    /// Kernel value used by the plain grid sum, with the singular set capped
    /// at |t| = 1e-14 (cosine family) or 1 - t² = 1e-14 (sine family).
    fn grid_kernel(self, n: usize, t: f64) -> Result<Complex64> {
        const FLOOR: f64 = 1e-14;
        Ok(match self {
            Kind::Cosine(l) => constants::gamma_cosine(l, n)? * abs_pow(t.abs().max(FLOOR), l),
            Kind::Sine(l) => {
                constants::delta_sine(l, n)? * abs_pow(((1.0 - t) * (1.0 + t)).max(FLOOR), l / 2.0)
            }
            Kind::LogCosine => ZonalKernel::log_cosine(n).eval(t.abs().max(FLOOR)),
            Kind::LogSine => {
                let s = ((1.0 - t) * (1.0 + t)).max(FLOOR);
                ZonalKernel::log_sine(n).eval((1.0 - s).max(0.0).sqrt())
            }
        })
    }

    fn lambda(self) -> Option<Complex64> {
        match self {
            Kind::Cosine(l) | Kind::Sine(l) => Some(l),
            _ => None,
        }
    }
}

fn spectrum_of(f: &GridFunction) -> Result<Option<HarmonicSpectrum>> {
    match f.band() {
        Some(b) => Ok(Some(analyze(f, b.max_degree)?)),
        None => Ok(None),
    }
}

fn provenance(op: &str, path: &str, requested: Path, lambda: Option<Complex64>) -> Provenance {
    let mut detail = format!("requested={}", requested.name());
    if let Some(l) = lambda {
        detail.push_str(&format!(" lambda={:.16e}{:+.16e}i", l.re, l.im));
    }
    Provenance {
        operation: op.into(),
        path: path.into(),
        detail,
    }
}

fn check_mean(f: &GridFunction, op: &str) -> Result<()> {
    let mean = integrate(f);
    if mean.norm() > MEAN_TOLERANCE {
        return Err(Error::Precondition(format!(
            "{op} needs a mean-zero input, mean is {:e}",
            mean.norm()
        )));
    }
    Ok(())
}

fn spectral_apply(f: &GridFunction, table: impl FnOnce(usize) -> Result<MultiplierTable>) -> Result<GridFunction> {
    let band = f.band().ok_or_else(|| {
        Error::Precondition("the spectral path needs a band-limited input".into())
    })?;
    let s = analyze(f, band.max_degree)?;
    let table = table(band.max_degree)?;
    synthesize(&s.apply(&table)?, f.grid())
}

/// Evaluates `∫ f(v) k(u·v) d_*v` at every node of `grid`.
pub fn kernel_transform_on_grid(
    f: &dyn SphereFn,
    grid: &Arc<QuadratureGrid>,
    kernel: &ZonalKernel,
    rule: &PolarRule,
) -> Result<Vec<Complex64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| rule.integrate(f, grid.node(i), kernel))
        .collect()
}

fn run(f: &GridFunction, kind: Kind, requested: Path) -> Result<GridFunction> {
    let n = f.dim();
    if let Some(l) = kind.lambda() {
        // λ ∈ {0, 2, 4, ...} is excluded on every path.
        constants::gamma_cosine(l, n)?;
    }
    if matches!(kind, Kind::LogCosine | Kind::LogSine) {
        check_mean(f, kind.name())?;
    }
    let in_domain = kind.in_quadrature_domain(n);
    let path = match requested {
        Path::Auto if f.band().is_some() && !in_domain => Path::Spectral,
        Path::Auto => Path::Quadrature,
        p => p,
    };
    let out = match path {
        Path::Spectral => {
            spectral_apply(f, |j| kind.table(n, j))?
                .with_provenance(provenance(kind.name(), "spectral", requested, kind.lambda()))
        }
        _ => {
            if !in_domain {
                return Err(Error::Domain(kind.domain_message(n)));
            }
            let kernel = kind.kernel(n)?;
            match spectrum_of(f)? {
                Some(s) => {
                    let rule = PolarRule::for_band(n, s.max_degree())?;
                    let values = kernel_transform_on_grid(&s, f.grid(), &kernel, &rule)?;
                    GridFunction::from_values(Arc::clone(f.grid()), values)?
                        .with_band(s.band())
                        .with_provenance(provenance(kind.name(), "quadrature", requested, kind.lambda()))
                }
                None => grid_sum(f, kind)?.with_provenance(provenance(
                    kind.name(),
                    "grid-sum",
                    requested,
                    kind.lambda(),
                )),
            }
        }
    };
    Ok(out)
}

/// Σ_i w_i f(v_i) k(u·v_i) at every node u, for inputs without a band.
fn grid_sum(f: &GridFunction, kind: Kind) -> Result<GridFunction> {
    let grid = f.grid();
    let n = f.dim();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<Complex64> {
            let u = grid.node(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, (&w, &fv)) in grid.weights().iter().zip(f.values()).enumerate() {
                let t = dot(u, grid.node(q)).clamp(-1.0, 1.0);
                acc += w * fv * kind.grid_kernel(n, t)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    GridFunction::from_values(Arc::clone(grid), values)
}

/// Normalized λ-cosine transform.
pub fn cosine_transform(f: &GridFunction, params: &TransformParams) -> Result<GridFunction> {
    run(f, Kind::Cosine(params.lambda), params.path)
}

/// Normalized λ-sine transform.
pub fn sine_transform(f: &GridFunction, params: &TransformParams) -> Result<GridFunction> {
    run(f, Kind::Sine(params.lambda), params.path)
}

/// Logarithmic cosine transform of a mean-zero function.
pub fn log_cosine_transform(f: &GridFunction, path: Path) -> Result<GridFunction> {
    run(f, Kind::LogCosine, path)
}

/// Logarithmic sine transform of a mean-zero function.
pub fn log_sine_transform(f: &GridFunction, path: Path) -> Result<GridFunction> {
    run(f, Kind::LogSine, path)
}

/// Funk transform: the average over the great subsphere orthogonal to u.
/// The quadrature path integrates over u^⊥ with a product rule (on S^2 an
/// equispaced rule on the great circle with at least 64 nodes).
pub fn funk_transform(f: &GridFunction, path: Path) -> Result<GridFunction> {
    let n = f.dim();
    let out = match path {
        Path::Spectral => spectral_apply(f, |j| MultiplierTable::funk(n, j))?,
        Path::Quadrature | Path::Auto => {
            let s = spectrum_of(f)?.ok_or_else(|| {
                Error::Precondition(
                    "geodesic quadrature evaluates f off the grid and needs a band-limited input"
                        .into(),
                )
            })?;
            let rule = great_sphere_rule(n, s.max_degree())?;
            let grid = f.grid();
            let values: Vec<Complex64> = (0..grid.len())
                .into_par_iter()
                .map(|i| rule.great_sphere_mean(&s, grid.node(i)))
                .collect();
            GridFunction::from_values(Arc::clone(grid), values)?.with_band(s.band())
        }
    };
    let used = if path == Path::Spectral { "spectral" } else { "quadrature" };
    Ok(out.with_provenance(provenance("funk", used, path, None)))
}

/// Rule on the great subsphere used by the geodesic Funk path.
pub fn great_sphere_rule(n: usize, max_degree: usize) -> Result<PolarRule> {
    let degree = if n == 3 { max_degree.max(63) } else { max_degree };
    PolarRule::new(n, degree, ZonalQuadrature::default())
}
