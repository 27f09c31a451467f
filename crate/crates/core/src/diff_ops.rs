//! The Beltrami–Laplace operator and the weighted operators
//!
//! ```text
//! Δ_{λ,ℓ} f(u) = (-1/4)^ℓ (Δ^ℓ E_{λ+2ℓ} f)(x)|_{x=u}
//!             = (-1/4)^ℓ ∏_{m=1}^{ℓ} [Δ_S + (λ+2m)(λ+2m+n-2) I] f.
//! ```
//!
//! Three realizations: the diagonal spectral action, the factored product of
//! shifted Beltrami operators, and finite differences of the homogeneous
//! extension in R^n (the definition taken literally).

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{analyze, synthesize, HarmonicSpectrum, MultiplierTable};
use crate::sphere::{homogeneous_extension_eval, GridFunction, Provenance, QuadratureGrid, SphereFn};

/// Parameters of Δ_{λ,ℓ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedOpSpec {
    pub lambda: Complex64,
    pub ell: u32,
}

impl WeightedOpSpec {
    pub fn new(lambda: Complex64, ell: u32) -> Self {
        Self { lambda, ell }
    }

    pub fn real(lambda: f64, ell: u32) -> Self {
        Self::new(Complex64::new(lambda, 0.0), ell)
    }

    /// Shift of the m-th factor: (λ+2m)(λ+2m+n-2).
    pub fn shift(&self, m: u32, n: usize) -> Complex64 {
        let a = self.lambda + 2.0 * m as f64;
        a * (a + n as f64 - 2.0)
    }
}

fn spectrum(f: &GridFunction) -> Result<HarmonicSpectrum> {
    let band = f.band().ok_or_else(|| {
        Error::Precondition("spectral differential operators need a band-limited input".into())
    })?;
    analyze(f, band.max_degree)
}

fn note(op: &str, path: &str, detail: String) -> Provenance {
    Provenance {
        operation: op.into(),
        path: path.into(),
        detail,
    }
}

/// Δ_S f: degree j scaled by -j(j+n-2).
pub fn beltrami(f: &GridFunction) -> Result<GridFunction> {
    let s = spectrum(f)?;
    let table = MultiplierTable::beltrami(f.dim(), s.max_degree())?;
    Ok(synthesize(&s.apply(&table)?, f.grid())?.with_provenance(note("beltrami", "spectral", String::new())))
}

/// Δ_{λ,ℓ} f by its diagonal action.
pub fn weighted_laplacian(f: &GridFunction, spec: &WeightedOpSpec) -> Result<GridFunction> {
    let s = spectrum(f)?;
    let table = MultiplierTable::delta_op(f.dim(), s.max_degree(), spec.lambda, spec.ell)?;
    Ok(synthesize(&s.apply(&table)?, f.grid())?.with_provenance(note(
        "weighted-laplacian",
        "spectral",
        format!("ell={} truncation=hard-cutoff-at-band", spec.ell),
    )))
}

/// Δ_{λ,ℓ} f as (-1/4)^ℓ times the factors [Δ_S + shift_m I] applied for
/// m = ℓ, ℓ-1, ..., 1, each factor a separate grid-level operation.
pub fn weighted_laplacian_factored(f: &GridFunction, spec: &WeightedOpSpec) -> Result<GridFunction> {
    let order: Vec<u32> = (1..=spec.ell).rev().collect();
    apply_factors(f, spec, &order)
}

/// The factored form with the factors applied in the given order (any
/// permutation of 1..=ℓ).
pub fn apply_factors(f: &GridFunction, spec: &WeightedOpSpec, order: &[u32]) -> Result<GridFunction> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=spec.ell).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument(format!(
            "factor order {order:?} is not a permutation of 1..={}",
            spec.ell
        )));
    }
    let n = f.dim();
    let mut g = f.clone();
    for &m in order {
        let shift = spec.shift(m, n);
        let lap = beltrami(&g)?;
        g = lap.zip_with(&g, |a, b| a + shift * b)?;
    }
    let scale = Complex64::new((-0.25f64).powi(spec.ell as i32), 0.0);
    Ok(g.map_values(|v| scale * v).with_provenance(note(
        "weighted-laplacian",
        "factored",
        format!("ell={} order={order:?}", spec.ell),
    )))
}

/// Finite-difference options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    pub h: f64,
    /// Combine steps h and h/2 as (4 L(h/2) - L(h)) / 3.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            h: 1e-3,
            richardson: false,
        }
    }
}

pub const MAX_FD_ORDER: u32 = 2;

/// ℓ-fold discrete Laplacian (iterated (2n+1)-point stencil) of `ext` at x.
fn iterated_laplacian<E>(ext: &E, x: &mut [f64], h: f64, ell: u32) -> Result<Complex64>
where
    E: Fn(&[f64]) -> Result<Complex64>,
{
    if ell == 0 {
        return ext(x);
    }
    let center = iterated_laplacian(ext, x, h, ell - 1)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..x.len() {
        let xi = x[i];
        x[i] = xi + h;
        acc += iterated_laplacian(ext, x, h, ell - 1)?;
        x[i] = xi - h;
        acc += iterated_laplacian(ext, x, h, ell - 1)?;
        x[i] = xi;
        acc -= 2.0 * center;
    }
    Ok(acc / (h * h))
}

fn fd_single(
    f: &dyn SphereFn,
    grid: &Arc<QuadratureGrid>,
    spec: &WeightedOpSpec,
    h: f64,
) -> Result<Vec<Complex64>> {
    let a = spec.lambda + 2.0 * spec.ell as f64;
    let ext = |x: &[f64]| homogeneous_extension_eval(f, a, x);
    let scale = (-0.25f64).powi(spec.ell as i32);
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut x = grid.node(i).to_vec();
            Ok(scale * iterated_laplacian(&ext, &mut x, h, spec.ell)?)
        })
        .collect()
}

/// Δ_{λ,ℓ} f from its definition: the ℓ-fold Euclidean Laplacian of
/// E_{λ+2ℓ} f by central differences around each unit node, times (-1/4)^ℓ.
/// `f` must be evaluable off the grid. Truncation error is O(h²); rounding
/// grows like eps/h^{2ℓ}.
pub fn weighted_laplacian_fd_fn(
    f: &dyn SphereFn,
    grid: &Arc<QuadratureGrid>,
    spec: &WeightedOpSpec,
    opts: &FdOptions,
) -> Result<GridFunction> {
    if spec.ell > MAX_FD_ORDER {
        return Err(Error::Unsupported(format!(
            "finite differences are limited to ℓ <= {MAX_FD_ORDER}; got ℓ = {}",
            spec.ell
        )));
    }
    if !(1e-4..=1e-2).contains(&opts.h) {
        return Err(Error::InvalidArgument(format!("step h = {} outside [1e-4, 1e-2]", opts.h)));
    }
    if f.dim() != grid.dim() {
        return Err(Error::InvalidArgument("function and grid dimensions differ".into()));
    }
    let coarse = fd_single(f, grid, spec, opts.h)?;
    let values = if opts.richardson {
        let fine = fd_single(f, grid, spec, opts.h / 2.0)?;
        fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect()
    } else {
        coarse
    };
    let mut out = GridFunction::from_values(Arc::clone(grid), values)?;
    if let Some(b) = f.band_limit() {
        out = out.with_band(crate::sphere::Band {
            max_degree: b,
            pole: None,
        });
    }
    Ok(out.with_provenance(note(
        "weighted-laplacian",
        "fd",
        format!("ell={} h={:e} richardson={}", spec.ell, opts.h, opts.richardson),
    )))
}

/// Finite-difference Δ_{λ,ℓ} of a band-limited grid function, evaluated off
/// the grid by synthesis from its spectrum. The result keeps f's band.
pub fn weighted_laplacian_fd(f: &GridFunction, spec: &WeightedOpSpec, opts: &FdOptions) -> Result<GridFunction> {
    let s = spectrum(f)?;
    let out = weighted_laplacian_fd_fn(&s, f.grid(), spec, opts)?;
    let band = s.band();
    Ok(out.with_band(band))
}

/// Δ_S f by finite differences: |x|²Δ of f(x/|x|) at |x| = 1, i.e. the
/// ℓ = 1 stencil applied to the 0-homogeneous extension, without the
/// (-1/4) factor.
pub fn beltrami_fd(f: &GridFunction, h: f64) -> Result<GridFunction> {
    let s = spectrum(f)?;
    let spec = WeightedOpSpec::real(-2.0, 1);
    let out = weighted_laplacian_fd_fn(&s, f.grid(), &spec, &FdOptions { h, richardson: false })?;
    Ok(out.map_values(|v| -4.0 * v).with_band(s.band()))
}
