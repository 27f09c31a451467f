//! Operator identities for the frame transforms, checked two ways.
//!
//! Spectral: every composite of a frame transform with its dual is
//! O(n)-equivariant, hence diagonal in harmonic degree. Its eigenvalue on
//! degree j is the composite applied to the zonal profile Z_j(·p) and
//! evaluated at p, which reduces to deterministic quadrature:
//!
//! * F*_k 𝒞^λ_k Z_j(p) = 𝒞^λ_k Z_j(u₀) for any u₀ ⊥ p
//! * F*_k F_k Z_j(p)   = F_k Z_j(u₀)
//! * 𝒞*^λ_k F_k Z_j(p) = γ_k(λ) E[|uᵀp|^λ F_k Z_j(u)], a one-dimensional
//!   integral in |uᵀp|² since F_k Z_j(u) depends on u only through it.
//!
//! These are compared with the gamma-ratio closed forms.
//!
//! Monte Carlo: the dual transforms are sampled on a zonal test function at
//! a few points, degree coefficients are recovered by collocation, the
//! inverting operator is applied degree by degree, and the reconstruction at
//! the pole is compared with the truth within three standard errors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::monte_carlo::{dual_cosine_k, dual_funk_k, McEstimate};
use super::{cosine_k, funk_k, Frame, RadialRule, StiefelFunction};
use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::inversion::{invert_cosine1, invert_funk, InversionConfig};
use crate::spectral::{
    analyze_about, cosine_multiplier, delta_op_eigenvalue, funk_multiplier, sine_multiplier, synthesize,
    zonal_profiles, HarmonicSpectrum, SpectrumKind,
};
use crate::sphere::{build_grid, Direction};
use crate::transforms::constants::{c_nk, gamma_k, mu_k};

/// Tolerance of the degree-wise identities.
pub const SPECTRAL_TOLERANCE: f64 = 1e-10;
/// Monte-Carlo estimates pass within this many standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Absolute slack for estimates whose sampling variance vanishes.
pub const MC_FLOOR: f64 = 1e-12;
/// Default sample budget of the dual transforms.
pub const DEFAULT_SAMPLES: usize = 100_000;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The checkable identities. CLI tokens follow the usual numbering of the
/// formulas for frame transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Identity {
    /// 𝒮^λ f = c_{n,k} 𝒞*^λ_k F_k f = c_{n,k} F*_k 𝒞^λ_k f.
    Factorization,
    /// c_{n,k} 𝒞*^{1-n}_k F_k f = f.
    SineInverse,
    /// f = c_{n,k} μ_k Δ_{1-n,ℓ} F*_k F_k f, n-k odd, ℓ = (n-k-1)/2.
    FunkOddCodim,
    /// f = c_{n,k} Δ_{1-n,ℓ} 𝒞*^{1-k}_k F_k f, n-k even, k > 1, ℓ = (n-k)/2.
    FunkEvenCodim,
    /// f = c_{n,k} Δ_{1-n,n/2} F*_k 𝒞¹_k f, n even.
    Cosine1Even,
    /// f = Γ(k/2)/√π · F⁻¹ (𝒞¹)⁻¹ F*_k 𝒞¹_k f, n odd.
    Cosine1Odd,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::Factorization,
        Identity::SineInverse,
        Identity::FunkOddCodim,
        Identity::FunkEvenCodim,
        Identity::Cosine1Even,
        Identity::Cosine1Odd,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Identity::Factorization => "4.8",
            Identity::SineInverse => "4.9",
            Identity::FunkOddCodim => "thm4.1-i",
            Identity::FunkEvenCodim => "thm4.1-ii",
            Identity::Cosine1Even => "4.13",
            Identity::Cosine1Odd => "4.14",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|id| id.token() == s)
            .ok_or_else(|| {
                let tokens: Vec<_> = Identity::ALL.iter().map(|id| id.token()).collect();
                Error::Parse(format!("unknown identity '{s}', expected one of {}", tokens.join(", ")))
            })
    }
}

/// Parameters of an identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiefelCheckParams {
    pub n: usize,
    pub k: usize,
    /// Used by the factorization only.
    pub lambda: Complex64,
    pub samples: usize,
    pub seed: u64,
    /// Highest degree of the spectral sweep.
    pub spectral_degree: usize,
    /// Band limit of the Monte-Carlo test function.
    pub test_degree: usize,
}

impl StiefelCheckParams {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            lambda: re(1.0),
            samples: DEFAULT_SAMPLES,
            seed: 1,
            spectral_degree: 12,
            test_degree: 4,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidArgument(format!("dimension n = {} must be at least 3", self.n)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidArgument(format!(
                "frame size k = {} must satisfy 1 <= k <= n-1",
                self.k
            )));
        }
        if self.test_degree % 2 == 1 {
            return Err(Error::InvalidArgument("test degree must be even".into()));
        }
        Ok(())
    }
}

/// Outcome of an identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiefelReport {
    pub identity: String,
    pub params: StiefelCheckParams,
    /// Max relative deviation of the degree-wise identity over the sweep.
    pub spectral_error: f64,
    pub mc_error: Option<f64>,
    pub mc_sigma: Option<f64>,
    pub mc_estimate: Option<Complex64>,
    pub mc_reference: Option<Complex64>,
    pub notes: Vec<String>,
}

impl StiefelReport {
    pub fn spectral_passed(&self) -> bool {
        self.spectral_error <= SPECTRAL_TOLERANCE
    }

    pub fn mc_passed(&self) -> bool {
        match (self.mc_error, self.mc_sigma) {
            (Some(e), Some(s)) => {
                let scale = self.mc_reference.map_or(1.0, |r| r.norm().max(1.0));
                e <= MC_SIGMAS * s + MC_FLOOR * scale
            }
            _ => true,
        }
    }

    pub fn passed(&self) -> bool {
        self.spectral_passed() && self.mc_passed()
    }
}

/// A composite of a frame transform and a dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Composite {
    /// 𝒞*^λ_k F_k
    DualCosineFunk(Complex64),
    /// F*_k 𝒞^λ_k
    DualFunkCosine(Complex64),
    /// F*_k F_k
    DualFunkFunk,
}

fn profile(n: usize, j: usize) -> Result<(HarmonicSpectrum, Direction)> {
    let pole = Direction::axis(n, n - 1);
    let mut coeffs = vec![re(0.0); j + 1];
    coeffs[j] = re(1.0);
    Ok((HarmonicSpectrum::zonal(pole.clone(), coeffs)?, pole))
}

/// Eigenvalue of a composite on degree j, by quadrature.
pub fn composite_multiplier(composite: Composite, j: usize, n: usize, k: usize) -> Result<Complex64> {
    let (z, _) = profile(n, j)?;
    let u0 = Frame::standard(n, k)?;
    match composite {
        Composite::DualFunkFunk => funk_k(&z, &u0, j),
        Composite::DualFunkCosine(lambda) => cosine_k(&z, &u0, lambda, j),
        Composite::DualCosineFunk(lambda) => {
            let gamma = gamma_k(lambda, n, k)?;
            let radial = RadialRule::new(n, k, lambda, j / 2 + 8)?;
            let mut acc = re(0.0);
            for (&s, &w) in radial.nodes.iter().zip(&radial.weights) {
                let mut u = DMatrix::<f64>::identity(n, k);
                u[(0, 0)] = (1.0 - s).max(0.0).sqrt();
                u[(n - 1, 0)] = s.sqrt();
                acc += w * funk_k(&z, &Frame::new(u)?, j)?;
            }
            Ok(gamma * acc)
        }
    }
}

/// Closed form of the same eigenvalue.
pub fn composite_closed_form(composite: Composite, j: usize, n: usize, k: usize) -> Result<Complex64> {
    match composite {
        Composite::DualFunkFunk => Ok(sine_multiplier(j, n, re(-(k as f64)))? / (c_nk(n, k) * mu_k(n, k))),
        Composite::DualFunkCosine(lambda) | Composite::DualCosineFunk(lambda) => {
            Ok(sine_multiplier(j, n, lambda)? / c_nk(n, k))
        }
    }
}

fn even_degrees(max: usize) -> impl Iterator<Item = usize> {
    (0..=max).step_by(2)
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Max over even j of |chain(j) - 1|.
fn sweep<F>(max: usize, chain: F) -> Result<f64>
where
    F: Fn(usize) -> Result<Complex64>,
{
    let mut worst: f64 = 0.0;
    for j in even_degrees(max) {
        worst = worst.max((chain(j)? - 1.0).norm());
    }
    Ok(worst)
}

/// Zonal test function Σ Z_j(·p)/(j+1) over even j, about a generic pole.
pub fn test_function(n: usize, max_degree: usize) -> Result<Arc<HarmonicSpectrum>> {
    let pole = Direction::new((1..=n).map(|i| i as f64).collect())?;
    let coeffs = (0..=max_degree)
        .map(|j| if j % 2 == 0 { re(1.0 / (j as f64 + 1.0)) } else { re(0.0) })
        .collect();
    Ok(Arc::new(HarmonicSpectrum::zonal(pole, coeffs)?))
}

fn zonal_parts(f: &HarmonicSpectrum) -> Result<Direction> {
    let pole = match f.kind() {
        SpectrumKind::Zonal { pole } => pole.clone(),
        SpectrumKind::Full => {
            return Err(Error::Precondition("the Monte-Carlo pipeline needs a zonal test function".into()))
        }
    };
    if f.coeffs().iter().skip(1).step_by(2).any(|c| c.norm() > 0.0) {
        return Err(Error::Precondition("test function must be even".into()));
    }
    Ok(pole)
}

struct Collocated {
    /// Zonal coefficients of the sampled function on the even degrees.
    coeffs: Vec<Complex64>,
    /// Row l: weights of the point estimates in coefficient l.
    solve: DMatrix<f64>,
    sigmas: Vec<f64>,
}

/// Samples an even zonal function at points spread in angle from the pole
/// and recovers its degree coefficients.
fn collocate<E>(pole: &Direction, n: usize, max_degree: usize, estimate: E) -> Result<Collocated>
where
    E: Fn(&Direction, u64) -> Result<McEstimate>,
{
    let degrees: Vec<usize> = even_degrees(max_degree).collect();
    let m = degrees.len();
    let q = Frame::new(DMatrix::from_column_slice(n, 1, pole.as_slice()))?.null_basis()[0].clone();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut values = Vec::with_capacity(m);
    let mut sigmas = Vec::with_capacity(m);
    for i in 0..m {
        let theta = if m == 1 { 0.0 } else { 0.5 * PI * i as f64 / (m - 1) as f64 };
        let (t, s) = (theta.cos(), theta.sin());
        let v: Vec<f64> = pole.as_slice().iter().zip(&q).map(|(p, q)| t * p + s * q).collect();
        let e = estimate(&Direction::new(v)?, i as u64)?;
        let z = zonal_profiles(max_degree, n, t);
        for (l, &j) in degrees.iter().enumerate() {
            a[(i, l)] = z[j];
        }
        values.push(e.mean);
        sigmas.push(e.std_error);
    }
    let solve = a
        .try_inverse()
        .ok_or_else(|| Error::Precondition("singular collocation system".into()))?;
    let coeffs = (0..m)
        .map(|l| (0..m).map(|i| solve[(l, i)] * values[i]).sum())
        .collect();
    Ok(Collocated { coeffs, solve, sigmas })
}

impl Collocated {
    /// Standard error of Σ_l factor_l · coeff_l.
    fn sigma_of(&self, factors: &[Complex64]) -> f64 {
        let m = self.sigmas.len();
        (0..m)
            .map(|i| {
                let w: Complex64 = (0..m).map(|l| factors[l] * self.solve[(l, i)]).sum();
                w.norm_sqr() * self.sigmas[i] * self.sigmas[i]
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn factors<F>(max_degree: usize, factor: F) -> Result<Vec<Complex64>>
where
    F: Fn(usize) -> Result<Complex64>,
{
    even_degrees(max_degree).map(factor).collect()
}

fn base_report(id: Identity, params: &StiefelCheckParams, spectral_error: f64) -> StiefelReport {
    StiefelReport {
        identity: id.token().into(),
        params: *params,
        spectral_error,
        mc_error: None,
        mc_sigma: None,
        mc_estimate: None,
        mc_reference: None,
        notes: Vec::new(),
    }
}

fn with_mc(mut report: StiefelReport, estimate: Complex64, sigma: f64, reference: Complex64) -> StiefelReport {
    report.mc_error = Some((estimate - reference).norm());
    report.mc_sigma = Some(sigma);
    report.mc_estimate = Some(estimate);
    report.mc_reference = Some(reference);
    report
}

/// Reconstruction through a degree-wise inverse: returns the estimate of
/// f(p), its standard error and the true f(p).
fn reconstruct_at_pole<E, F>(f_true: &HarmonicSpectrum, estimate: E, factor: F) -> Result<(Complex64, f64, Complex64)>
where
    E: Fn(&Direction, u64) -> Result<McEstimate>,
    F: Fn(usize) -> Result<Complex64>,
{
    let pole = zonal_parts(f_true)?;
    let max_degree = f_true.max_degree();
    let col = collocate(&pole, f_true.dim(), max_degree, estimate)?;
    let factors = factors(max_degree, factor)?;
    let est = col.coeffs.iter().zip(&factors).map(|(c, f)| c * f).sum();
    let truth = f_true.eval_at(pole.as_slice());
    Ok((est, col.sigma_of(&factors), truth))
}

/// Which formula of the Funk-type frame inversion to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunkKMode {
    /// n-k odd: f = c_{n,k} μ_k Δ_{1-n,ℓ} F*_k F_k f.
    OddCodim,
    /// n-k even, k > 1: f = c_{n,k} Δ_{1-n,ℓ} 𝒞*^{1-k}_k F_k f.
    EvenCodim,
}

/// Checks the inversion of F_k spectrally and by Monte Carlo on `f_true`.
pub fn invert_funk_k(f_true: Arc<HarmonicSpectrum>, mode: FunkKMode, params: &StiefelCheckParams) -> Result<StiefelReport> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    let (nf, kf) = (n as f64, k as f64);
    if f_true.dim() != n {
        return Err(Error::InvalidArgument("test function dimension differs from n".into()));
    }
    let parity = (n - k) % 2;
    match mode {
        FunkKMode::OddCodim if parity == 0 => {
            return Err(Error::InvalidArgument(format!("n-k = {} must be odd for this formula", n - k)))
        }
        FunkKMode::EvenCodim if parity == 1 => {
            return Err(Error::InvalidArgument(format!("n-k = {} must be even for this formula", n - k)))
        }
        FunkKMode::EvenCodim if k == 1 => {
            return Err(Error::ExcludedComponent(
                "k = 1: the coefficient γ_k(λ) of the dual cosine transform has a pole at λ = 1-k = 0".into(),
            ))
        }
        _ => {}
    }
    let phi = StiefelFunction::funk_of(f_true.clone(), k, f_true.max_degree())?;
    let (id, ell, c, composite, lambda) = match mode {
        FunkKMode::OddCodim => (
            Identity::FunkOddCodim,
            ((n - k - 1) / 2) as u32,
            c_nk(n, k) * mu_k(n, k),
            Composite::DualFunkFunk,
            re(-kf),
        ),
        FunkKMode::EvenCodim => (
            Identity::FunkEvenCodim,
            ((n - k) / 2) as u32,
            c_nk(n, k),
            Composite::DualCosineFunk(re(1.0 - kf)),
            re(1.0 - kf),
        ),
    };
    let d = |j: usize| delta_op_eigenvalue(j, n, re(1.0 - nf), ell as i64);
    let quad = sweep(params.spectral_degree, |j| Ok(c * d(j)? * composite_multiplier(composite, j, n, k)?))?;
    let closed = sweep(params.spectral_degree, |j| Ok(d(j)? * sine_multiplier(j, n, lambda)?))?;
    let report = base_report(id, params, quad.max(closed));
    let (est, sigma, truth) = reconstruct_at_pole(
        &f_true,
        |v, stream| match mode {
            FunkKMode::OddCodim => dual_funk_k(&phi, v, params.samples, params.seed, stream),
            FunkKMode::EvenCodim => dual_cosine_k(&phi, v, lambda, params.samples, params.seed, stream),
        },
        |j| Ok(c * d(j)?),
    )?;
    Ok(with_mc(report, est, sigma, truth))
}

/// Checks the inversion of 𝒞¹_k spectrally and by Monte Carlo on `f_true`.
pub fn invert_cosine1_k(f_true: Arc<HarmonicSpectrum>, params: &StiefelCheckParams) -> Result<StiefelReport> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    if f_true.dim() != n {
        return Err(Error::InvalidArgument("test function dimension differs from n".into()));
    }
    let one = re(1.0);
    let composite = Composite::DualFunkCosine(one);
    let phi = StiefelFunction::cosine_of(f_true.clone(), k, one, f_true.max_degree())?;
    let sample = |v: &Direction, stream| dual_funk_k(&phi, v, params.samples, params.seed, stream);
    if n % 2 == 0 {
        let d = |j: usize| delta_op_eigenvalue(j, n, re(1.0 - n as f64), (n / 2) as i64);
        let c = c_nk(n, k);
        let quad = sweep(params.spectral_degree, |j| Ok(c * d(j)? * composite_multiplier(composite, j, n, k)?))?;
        let closed = sweep(params.spectral_degree, |j| Ok(d(j)? * sine_multiplier(j, n, one)?))?;
        let report = base_report(Identity::Cosine1Even, params, quad.max(closed));
        let (est, sigma, truth) = reconstruct_at_pole(&f_true, sample, |j| Ok(c * d(j)?))?;
        Ok(with_mc(report, est, sigma, truth))
    } else {
        let c = gamma_real(0.5 * k as f64) / PI.sqrt();
        let inverse = |j: usize| -> Result<Complex64> {
            Ok(c / (funk_multiplier(j, n)? * cosine_multiplier(j, n, one)?))
        };
        let quad = sweep(params.spectral_degree, |j| Ok(inverse(j)? * composite_multiplier(composite, j, n, k)?))?;
        let mut report = base_report(Identity::Cosine1Odd, params, quad);

        // the inner inverses run through the grid-level inversion operators
        let pole = zonal_parts(&f_true)?;
        let max_degree = f_true.max_degree();
        let col = collocate(&pole, n, max_degree, sample)?;
        let mut coeffs = vec![re(0.0); max_degree + 1];
        for (l, j) in even_degrees(max_degree).enumerate() {
            coeffs[j] = col.coeffs[l];
        }
        let grid = Arc::new(build_grid(n, max_degree + 2)?);
        let psi = synthesize(&HarmonicSpectrum::zonal(pole.clone(), coeffs)?, &grid)?;
        let cfg = InversionConfig::default();
        let step = invert_cosine1(&psi, &cfg)?.reconstruction;
        let f = invert_funk(&step, &cfg)?.reconstruction;
        let est = c * analyze_about(&f, max_degree, &pole)?.eval_at(pole.as_slice());
        let sigma = col.sigma_of(&factors(max_degree, inverse)?);
        report.notes.push("inner inverses: cosine then Funk, grid-level".into());
        Ok(with_mc(report, est, sigma, f_true.eval_at(pole.as_slice())))
    }
}

/// Runs the check for `id` with the default zonal test function.
pub fn check_identity(id: Identity, params: &StiefelCheckParams) -> Result<StiefelReport> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    let f = test_function(n, params.test_degree)?;
    match id {
        Identity::Factorization => {
            let lambda = params.lambda;
            let cnk = c_nk(n, k);
            let mut worst: f64 = 0.0;
            for j in even_degrees(params.spectral_degree) {
                let s = sine_multiplier(j, n, lambda)?;
                for comp in [Composite::DualCosineFunk(lambda), Composite::DualFunkCosine(lambda)] {
                    worst = worst.max(relative(cnk * composite_multiplier(comp, j, n, k)?, s));
                }
            }
            let report = base_report(id, params, worst);
            // off the pole, where the dual integrands are not constant
            let pole = zonal_parts(&f)?;
            let q = Frame::new(DMatrix::from_column_slice(n, 1, pole.as_slice()))?.null_basis()[0].clone();
            let (t, st) = ((0.2 * PI).cos(), (0.2 * PI).sin());
            let v = Direction::new(pole.as_slice().iter().zip(&q).map(|(p, q)| t * p + st * q).collect())?;
            let z = zonal_profiles(params.test_degree, n, t);
            let truth: Complex64 = even_degrees(params.test_degree)
                .map(|j| Ok(f.coeffs()[j] * sine_multiplier(j, n, lambda)? * z[j]))
                .sum::<Result<Complex64>>()?;
            let by_dual_cosine = dual_cosine_k(
                &StiefelFunction::funk_of(f.clone(), k, params.test_degree)?,
                &v,
                lambda,
                params.samples,
                params.seed,
                0,
            )?;
            let by_dual_funk = dual_funk_k(
                &StiefelFunction::cosine_of(f.clone(), k, lambda, params.test_degree)?,
                &v,
                params.samples,
                params.seed,
                1,
            )?;
            let z = |e: &McEstimate| (cnk * e.mean - truth).norm() / (cnk * e.std_error);
            let worse = if z(&by_dual_cosine) >= z(&by_dual_funk) {
                by_dual_cosine
            } else {
                by_dual_funk
            };
            let mut report = with_mc(report, cnk * worse.mean, cnk * worse.std_error, truth);
            report.notes.push(format!(
                "dual cosine of F_k: {:.6e} ± {:.1e}; dual Funk of the cosine transform: {:.6e} ± {:.1e}",
                cnk * by_dual_cosine.mean.re,
                cnk * by_dual_cosine.std_error,
                cnk * by_dual_funk.mean.re,
                cnk * by_dual_funk.std_error
            ));
            Ok(report)
        }
        Identity::SineInverse => {
            let err = sweep(params.spectral_degree, |j| sine_multiplier(j, n, re(1.0 - n as f64)))?;
            let mut report = base_report(id, params, err);
            report
                .notes
                .push("λ = 1-n lies outside the sampling domain; checked spectrally only".into());
            Ok(report)
        }
        Identity::FunkOddCodim => invert_funk_k(f, FunkKMode::OddCodim, params),
        Identity::FunkEvenCodim => invert_funk_k(f, FunkKMode::EvenCodim, params),
        Identity::Cosine1Even => {
            if n % 2 == 1 {
                return Err(Error::InvalidArgument(format!("this inversion needs n even, got {n}")));
            }
            invert_cosine1_k(f, params)
        }
        Identity::Cosine1Odd => {
            if n % 2 == 0 {
                return Err(Error::InvalidArgument(format!("this inversion needs n odd, got {n}")));
            }
            invert_cosine1_k(f, params)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(n: usize, k: usize) -> StiefelCheckParams {
        StiefelCheckParams {
            samples: 4000,
            ..StiefelCheckParams::new(n, k)
        }
    }

    #[test]
    fn tokens_round_trip() {
        for id in Identity::ALL {
            assert_eq!(id.token().parse::<Identity>().unwrap(), id);
        }
        assert!("4.15".parse::<Identity>().is_err());
    }

    #[test]
    fn composites_match_closed_forms() {
        for (n, k) in [(4, 1), (4, 2), (5, 2), (5, 3)] {
            for j in (0..=12).step_by(2) {
                for comp in [
                    Composite::DualFunkFunk,
                    Composite::DualFunkCosine(re(1.0)),
                    Composite::DualCosineFunk(re(1.0)),
                    Composite::DualFunkCosine(re(-0.5)),
                    Composite::DualCosineFunk(re(-0.5)),
                ] {
                    let q = composite_multiplier(comp, j, n, k).unwrap();
                    let c = composite_closed_form(comp, j, n, k).unwrap();
                    assert!(relative(q, c) < 1e-11, "{comp:?} n={n} k={k} j={j}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn spectral_identities_hold() {
        let cases = [
            (Identity::FunkOddCodim, 4, 1),
            (Identity::FunkOddCodim, 5, 2),
            (Identity::FunkEvenCodim, 4, 2),
            (Identity::Cosine1Even, 4, 2),
            (Identity::Cosine1Odd, 5, 2),
            (Identity::SineInverse, 5, 2),
            (Identity::Factorization, 4, 2),
        ];
        for (id, n, k) in cases {
            let r = check_identity(id, &quick(n, k)).unwrap();
            assert!(r.spectral_error < SPECTRAL_TOLERANCE, "{id} {}", r.spectral_error);
            assert!(r.mc_passed(), "{id}: {:?} vs sigma {:?}", r.mc_error, r.mc_sigma);
        }
    }

    #[test]
    fn excluded_and_parity_guards() {
        let f = test_function(4, 2).unwrap();
        let p = quick(4, 1);
        assert!(matches!(
            invert_funk_k(f.clone(), FunkKMode::EvenCodim, &p),
            Err(Error::InvalidArgument(_))
        ));
        let f5 = test_function(5, 2).unwrap();
        assert!(matches!(
            invert_funk_k(f5, FunkKMode::EvenCodim, &quick(5, 1)),
            Err(Error::ExcludedComponent(_))
        ));
        assert!(check_identity(Identity::Cosine1Odd, &p).is_err());
    }

    #[test]
    fn constant_is_recovered() {
        let pole = Direction::axis(4, 0);
        let f = Arc::new(HarmonicSpectrum::zonal(pole, vec![re(2.0)]).unwrap());
        let r = invert_cosine1_k(f, &quick(4, 2)).unwrap();
        assert!(r.mc_passed());
    }
}
