//! Inversion of the Funk and cosine transforms by weighted Beltrami–Laplace
//! operators.
//!
//! * between:  f = 𝒞^{-λ-n} Δ_{λ,ℓ} φ,           φ = 𝒞^{λ+2ℓ} f
//! * outside:  f = Δ_{-λ-n,ℓ} 𝒞^{-λ-n+2ℓ} φ,     φ = 𝒞^λ f
//! * Funk, n even:  f = F D φ = D F φ,  D = c_n² Δ_{1-n,(n-2)/2}
//! * Funk, n odd:   f = φ₀ + c_n Δ_{1-n,(n-1)/2} 𝒞_log φ
//! * 𝒞¹, n even:    f = F c_n Δ_{1-n,n/2} φ = c_n Δ_{-1-n,n/2} F φ
//! * 𝒞¹, n odd:     f = c φ₀ + Δ_{-1-n,(n+1)/2} 𝒞_log φ,  c = Γ((n+1)/2)/Γ(-1/2)
//!
//! Every operation returns an [`InversionReport`]; supplying the true f to
//! [`InversionOutcome::score`] fills in the reconstruction errors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diff_ops::{weighted_laplacian, WeightedOpSpec};
use crate::error::{Error, Result};
use crate::spectral::{analyze, cosine_multiplier, funk_multiplier};
use crate::sphere::{integrate, remove_mean, GridFunction};
use crate::transforms::constants::{cosine1_odd_constant, funk_constant, gamma_cosine};
use crate::transforms::{cosine_transform, funk_transform, log_cosine_transform, Path, TransformParams};

/// Default band-limit ceiling: Δ_{λ,ℓ} amplifies degree j like j^{2ℓ}.
pub const DEFAULT_DEGREE_CEILING: usize = 12;

/// Odd-part norm above which a warning is attached.
pub const ODD_PART_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InversionMethod {
    Between,
    Outside,
    /// Even n: two orderings of the Funk transform and a differential operator.
    EvenBranch,
    /// Odd n: through the logarithmic cosine transform.
    LogBranch,
}

/// Knobs shared by the inversion operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub degree_ceiling: usize,
    /// Path of the Funk transforms inside the even branches.
    pub funk_path: Path,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            degree_ceiling: DEFAULT_DEGREE_CEILING,
            funk_path: Path::Spectral,
        }
    }
}

/// What an inversion did and how well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub theorem: String,
    pub method: InversionMethod,
    pub n: usize,
    pub lambda: Option<Complex64>,
    pub ell: Option<u32>,
    pub max_degree: usize,
    /// Pointwise max |reconstruction - reference|, once scored.
    pub max_error: Option<f64>,
    /// L² norm of the degree-j error, once scored.
    pub per_degree_error: Vec<f64>,
    /// Max difference of the two reconstructions in the even branches.
    pub branch_agreement: Option<f64>,
    /// |eigenvalue| of the inverse operator per degree (0 on odd degrees).
    pub amplification: Vec<f64>,
    pub odd_part_norm: f64,
    pub warnings: Vec<String>,
}

/// Reconstruction(s) plus report.
#[derive(Debug, Clone)]
pub struct InversionOutcome {
    pub reconstruction: GridFunction,
    /// Second formula of an even branch.
    pub alternate: Option<GridFunction>,
    pub report: InversionReport,
}

impl InversionOutcome {
    /// Compares the reconstruction with the true function.
    pub fn score(&mut self, reference: &GridFunction) -> Result<()> {
        let diff = self.reconstruction.zip_with(reference, |a, b| a - b)?;
        self.report.max_error = Some(diff.max_abs());
        let mut diff = diff;
        if let Some(band) = self.reconstruction.band() {
            diff = diff.with_band(band.clone());
        }
        let s = analyze(&diff, self.report.max_degree)?;
        self.report.per_degree_error = s.degree_norms();
        Ok(())
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn not_excluded(value: Complex64, condition: &str) -> Result<()> {
    gamma_cosine(value, 3).map(|_| ()).map_err(|_| {
        Error::pole(value, format!("{condition} must avoid {{0, 2, 4, ...}}"))
    })
}

struct Prepared {
    n: usize,
    max_degree: usize,
    odd_part_norm: f64,
    warnings: Vec<String>,
}

fn prepare(phi: &GridFunction, cfg: &InversionConfig) -> Result<Prepared> {
    let n = phi.dim();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("dimension n = {n} must be at least 3")));
    }
    let band = phi.band().ok_or_else(|| {
        Error::Precondition("inversion needs a band-limited input".into())
    })?;
    if band.max_degree > cfg.degree_ceiling {
        return Err(Error::InvalidArgument(format!(
            "band limit {} exceeds the inversion ceiling {}; raise degree_ceiling to override",
            band.max_degree, cfg.degree_ceiling
        )));
    }
    let s = analyze(phi, band.max_degree)?;
    let odd_part_norm = s.odd_norm();
    let mut warnings = Vec::new();
    if odd_part_norm > ODD_PART_WARNING {
        warnings.push(format!(
            "input has an odd part of norm {odd_part_norm:.3e}; it is annihilated by the inversion"
        ));
    }
    Ok(Prepared {
        n,
        max_degree: band.max_degree,
        odd_part_norm,
        warnings,
    })
}

fn amplification<F>(max_degree: usize, forward: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<Complex64>,
{
    (0..=max_degree)
        .map(|j| {
            if j % 2 == 1 {
                Ok(0.0)
            } else {
                Ok(1.0 / forward(j)?.norm())
            }
        })
        .collect()
}

fn report(
    theorem: &str,
    method: InversionMethod,
    p: Prepared,
    lambda: Option<Complex64>,
    ell: Option<u32>,
    amplification: Vec<f64>,
) -> InversionReport {
    InversionReport {
        theorem: theorem.into(),
        method,
        n: p.n,
        lambda,
        ell,
        max_degree: p.max_degree,
        max_error: None,
        per_degree_error: Vec::new(),
        branch_agreement: None,
        amplification,
        odd_part_norm: p.odd_part_norm,
        warnings: p.warnings,
    }
}

fn scale(f: &GridFunction, c: f64) -> GridFunction {
    f.map_values(|v| c * v)
}

/// f = 𝒞^{-λ-n} Δ_{λ,ℓ} φ for φ = 𝒞^{λ+2ℓ} f.
pub fn invert_general_between(
    phi: &GridFunction,
    lambda: Complex64,
    ell: u32,
    cfg: &InversionConfig,
) -> Result<InversionOutcome> {
    let p = prepare(phi, cfg)?;
    let n = p.n as f64;
    not_excluded(-lambda - n, "-λ-n")?;
    not_excluded(lambda + 2.0 * ell as f64, "λ+2ℓ")?;
    let psi = weighted_laplacian(phi, &WeightedOpSpec::new(lambda, ell))?;
    let f = cosine_transform(&psi, &TransformParams::new(-lambda - n, Path::Spectral))?;
    let amp = amplification(p.max_degree, |j| cosine_multiplier(j, p.n, lambda + 2.0 * ell as f64))?;
    Ok(InversionOutcome {
        reconstruction: f,
        alternate: None,
        report: report("general-between", InversionMethod::Between, p, Some(lambda), Some(ell), amp),
    })
}

/// f = Δ_{-λ-n,ℓ} 𝒞^{-λ-n+2ℓ} φ for φ = 𝒞^λ f.
pub fn invert_general_outside(
    phi: &GridFunction,
    lambda: Complex64,
    ell: u32,
    cfg: &InversionConfig,
) -> Result<InversionOutcome> {
    let p = prepare(phi, cfg)?;
    let n = p.n as f64;
    not_excluded(lambda, "λ")?;
    let inner = -lambda - n + 2.0 * ell as f64;
    not_excluded(inner, "-λ-n+2ℓ")?;
    let psi = cosine_transform(phi, &TransformParams::new(inner, Path::Spectral))?;
    let f = weighted_laplacian(&psi, &WeightedOpSpec::new(-lambda - n, ell))?;
    let amp = amplification(p.max_degree, |j| cosine_multiplier(j, p.n, lambda))?;
    Ok(InversionOutcome {
        reconstruction: f,
        alternate: None,
        report: report("general-outside", InversionMethod::Outside, p, Some(lambda), Some(ell), amp),
    })
}

/// φ₀ + c · L where L is a mean-zero function; φ₀ is re-added as a constant.
fn add_constant(f: &GridFunction, c: Complex64) -> GridFunction {
    f.map_values(|v| v + c)
}

/// Inverts φ = F f.
pub fn invert_funk(phi: &GridFunction, cfg: &InversionConfig) -> Result<InversionOutcome> {
    let p = prepare(phi, cfg)?;
    let n = p.n;
    let cn = funk_constant(n);
    let amp = amplification(p.max_degree, |j| Ok(re(funk_multiplier(j, n)?)))?;
    if n % 2 == 0 {
        let spec = WeightedOpSpec::real(1.0 - n as f64, ((n - 2) / 2) as u32);
        let d = |g: &GridFunction| -> Result<GridFunction> {
            Ok(scale(&weighted_laplacian(g, &spec)?, cn * cn))
        };
        let a = funk_transform(&d(phi)?, cfg.funk_path)?;
        let b = d(&funk_transform(phi, cfg.funk_path)?)?;
        let mut r = report("funk", InversionMethod::EvenBranch, p, None, Some(spec.ell), amp);
        r.branch_agreement = Some(a.max_abs_diff(&b));
        Ok(InversionOutcome {
            reconstruction: a,
            alternate: Some(b),
            report: r,
        })
    } else {
        let spec = WeightedOpSpec::real(1.0 - n as f64, ((n - 1) / 2) as u32);
        let phi0 = integrate(phi);
        let log = log_cosine_transform(&remove_mean(phi), Path::Spectral)?;
        let f = add_constant(&scale(&weighted_laplacian(&log, &spec)?, cn), phi0);
        Ok(InversionOutcome {
            reconstruction: f,
            alternate: None,
            report: report("funk", InversionMethod::LogBranch, p, None, Some(spec.ell), amp),
        })
    }
}

/// Inverts φ = 𝒞¹ f.
pub fn invert_cosine1(phi: &GridFunction, cfg: &InversionConfig) -> Result<InversionOutcome> {
    let p = prepare(phi, cfg)?;
    let n = p.n;
    let nf = n as f64;
    let cn = funk_constant(n);
    let amp = amplification(p.max_degree, |j| cosine_multiplier(j, n, re(1.0)))?;
    if n % 2 == 0 {
        let ell = (n / 2) as u32;
        let d1 = WeightedOpSpec::real(1.0 - nf, ell);
        let d2 = WeightedOpSpec::real(-1.0 - nf, ell);
        let a = funk_transform(&scale(&weighted_laplacian(phi, &d1)?, cn), cfg.funk_path)?;
        let b = scale(&weighted_laplacian(&funk_transform(phi, cfg.funk_path)?, &d2)?, cn);
        let mut r = report("cosine1", InversionMethod::EvenBranch, p, Some(re(1.0)), Some(ell), amp);
        r.branch_agreement = Some(a.max_abs_diff(&b));
        Ok(InversionOutcome {
            reconstruction: a,
            alternate: Some(b),
            report: r,
        })
    } else {
        let spec = WeightedOpSpec::real(-1.0 - nf, n.div_ceil(2) as u32);
        let c = cosine1_odd_constant(n);
        let phi0 = integrate(phi);
        let log = log_cosine_transform(&remove_mean(phi), Path::Spectral)?;
        let f = add_constant(&weighted_laplacian(&log, &spec)?, c * phi0);
        Ok(InversionOutcome {
            reconstruction: f,
            alternate: None,
            report: report("cosine1", InversionMethod::LogBranch, p, Some(re(1.0)), Some(spec.ell), amp),
        })
    }
}
