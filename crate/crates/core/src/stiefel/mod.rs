//! Transforms indexed by the Stiefel manifold V_{n,k} of orthonormal
//! k-frames in R^n.
//!
//! * 𝒞^λ_k f(u) = γ_k(λ) ∫ f(v) |uᵀv|^λ d_*v
//! * F_k f(u)   = mean of f over the unit sphere of null(uᵀ)
//!
//! and their duals, which integrate over frames (Monte Carlo, see
//! [`monte_carlo`]). Direct transforms are computed by product quadrature:
//! v = √s·u a + √(1-s)·B b with a ∈ S^{k-1}, b ∈ S^{n-k-1}, B a basis of
//! null(uᵀ), and s = |uᵀv|² ~ Beta(k/2, (n-k)/2).

pub mod identities;
pub mod monte_carlo;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::quadrature::{gauss_jacobi, SphereRule};
use crate::sphere::SphereFn;
use crate::transforms::constants::gamma_k;

pub use identities::{
    check_identity, composite_closed_form, composite_multiplier, invert_cosine1_k, invert_funk_k, Composite, FunkKMode, Identity,
    StiefelCheckParams, StiefelReport, test_function,
};
pub use monte_carlo::{dual_cosine_k, dual_funk_k, McEstimate, DUAL_STRATA, MIN_SAMPLES};

/// Tolerance on uᵀu = I_k.
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// A point of V_{n,k}: an n×k matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    u: DMatrix<f64>,
}

impl Frame {
    pub fn new(u: DMatrix<f64>) -> Result<Self> {
        let (n, k) = u.shape();
        check_dims(n, k)?;
        let gram = u.transpose() * &u;
        let err = (gram - DMatrix::<f64>::identity(k, k)).amax();
        if err > FRAME_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "columns are not orthonormal: |uᵀu - I| = {err:.3e}"
            )));
        }
        Ok(Self { u })
    }

    /// Frame whose columns are the first k coordinate axes.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        check_dims(n, k)?;
        Ok(Self {
            u: DMatrix::identity(n, k),
        })
    }

    pub(crate) fn from_matrix_unchecked(u: DMatrix<f64>) -> Self {
        Self { u }
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// uᵀv.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        (0..self.k())
            .map(|c| self.u.column(c).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// |uᵀv|.
    pub fn cosine(&self, v: &[f64]) -> f64 {
        self.project(v).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// u·R for a k×k orthogonal R.
    pub fn rotate(&self, r: &DMatrix<f64>) -> Result<Self> {
        if r.shape() != (self.k(), self.k()) {
            return Err(Error::InvalidArgument("rotation must be k×k".into()));
        }
        Self::new(&self.u * r)
    }

    /// Orthonormal basis of null(uᵀ): the last n-k columns of the Householder
    /// completion of u to an orthogonal matrix.
    pub fn null_basis(&self) -> Vec<Vec<f64>> {
        let (n, k) = self.u.shape();
        let mut aug = DMatrix::<f64>::zeros(n, n + k);
        aug.view_mut((0, 0), (n, k)).copy_from(&self.u);
        aug.view_mut((0, k), (n, n)).fill_with_identity();
        let q = aug.qr().q();
        (k..n).map(|c| q.column(c).iter().copied().collect()).collect()
    }
}

fn check_dims(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("frame size k = {k} must satisfy 1 <= k <= n-1 = {}", n.max(1) - 1)));
    }
    Ok(())
}

/// Haar-distributed n×k frame: QR of a Gaussian matrix with R_ii > 0.
pub(crate) fn haar_matrix<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = DMatrix::<f64>::from_fn(n, k, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..k).any(|i| r[(i, i)].abs() < 1e-10) {
            continue;
        }
        let mut q = qr.q();
        for i in 0..k {
            if r[(i, i)] < 0.0 {
                q.column_mut(i).neg_mut();
            }
        }
        return q;
    }
}

/// Haar sample of V_{n,k} from `rng`.
pub fn haar_with<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Frame> {
    check_dims(n, k)?;
    Ok(Frame::from_matrix_unchecked(haar_matrix(n, k, rng)))
}

/// Haar sample of V_{n,k}; the same seed gives the same frame bit for bit.
pub fn haar_sample(n: usize, k: usize, seed: u64) -> Result<Frame> {
    haar_with(n, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn check_band(f: &dyn SphereFn, exactness: usize) -> Result<()> {
    if let Some(b) = f.band_limit() {
        if exactness < b {
            return Err(Error::Resolution {
                needed: b,
                available: exactness,
            });
        }
    }
    Ok(())
}

fn combine_into(out: &mut [f64], basis: &[Vec<f64>], coeffs: &[f64], scale: f64) {
    for (b, &c) in basis.iter().zip(coeffs) {
        let sc = scale * c;
        out.iter_mut().zip(b).for_each(|(x, y)| *x += sc * y);
    }
}

/// Quadrature for F_k: an exact rule on S^{n-k-1}.
#[derive(Debug, Clone)]
pub struct FunkKRule {
    n: usize,
    k: usize,
    fiber: SphereRule,
}

impl FunkKRule {
    pub fn new(n: usize, k: usize, exactness: usize) -> Result<Self> {
        check_dims(n, k)?;
        Ok(Self {
            n,
            k,
            fiber: SphereRule::with_exactness(n - k, exactness.max(1))?,
        })
    }

    pub fn exactness(&self) -> usize {
        self.fiber.exactness()
    }

    pub fn apply(&self, f: &dyn SphereFn, u: &Frame) -> Result<Complex64> {
        if u.n() != self.n || u.k() != self.k || f.dim() != self.n {
            return Err(Error::InvalidArgument("frame, function and rule dimensions differ".into()));
        }
        check_band(f, self.exactness())?;
        Ok(self.eval(f, u))
    }

    fn eval(&self, f: &dyn SphereFn, u: &Frame) -> Complex64 {
        let basis = u.null_basis();
        let mut v = vec![0.0; self.n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, wt) in self.fiber.iter() {
            v.fill(0.0);
            combine_into(&mut v, &basis, w, 1.0);
            acc += wt * f.eval(&v);
        }
        acc
    }
}

/// F_k f(u) with a fiber rule of polynomial exactness `exactness`.
pub fn funk_k(f: &dyn SphereFn, u: &Frame, exactness: usize) -> Result<Complex64> {
    FunkKRule::new(u.n(), u.k(), exactness)?.apply(f, u)
}

/// Rule in s = |uᵀv|² for the weight of r^λ under the Beta(k/2, (n-k)/2) law:
/// Σ w_i g(s_i) ≈ E[s^{λ/2} g(s)].
#[derive(Debug, Clone)]
pub(crate) struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<Complex64>,
}

impl RadialRule {
    pub fn new(n: usize, k: usize, lambda: Complex64, count: usize) -> Result<Self> {
        let (nf, kf) = (n as f64, k as f64);
        if lambda.re <= -kf {
            return Err(Error::Domain(format!(
                "Re λ = {} must exceed -k = {} for direct integration",
                lambda.re, -kf
            )));
        }
        let alpha = 0.5 * (nf - kf) - 1.0;
        let beta = 0.5 * (lambda.re + kf) - 1.0;
        let rule = gauss_jacobi(count, alpha, beta)?;
        let beta_fn = gamma_real(0.5 * kf) * gamma_real(0.5 * (nf - kf)) / gamma_real(0.5 * nf);
        let scale = 2f64.powf(-(alpha + beta + 1.0)) / beta_fn;
        let nodes: Vec<f64> = rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect();
        let weights = nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| {
                let phase = if lambda.im == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.5 * lambda.im * s.ln()).exp()
                };
                w * scale * phase
            })
            .collect();
        Ok(Self { nodes, weights })
    }
}

/// Quadrature for 𝒞^λ_k, reusable across frames.
#[derive(Debug, Clone)]
pub struct CosineKRule {
    n: usize,
    k: usize,
    lambda: Complex64,
    gamma: Complex64,
    radial: RadialRule,
    inner: SphereRule,
    outer: SphereRule,
}

impl CosineKRule {
    /// Exact for band limit `exactness` when λ is real.
    pub fn new(n: usize, k: usize, lambda: Complex64, exactness: usize) -> Result<Self> {
        check_dims(n, k)?;
        let gamma = gamma_k(lambda, n, k)?;
        Ok(Self {
            n,
            k,
            lambda,
            gamma,
            radial: RadialRule::new(n, k, lambda, exactness / 2 + 4)?,
            inner: SphereRule::with_exactness(k, exactness.max(1))?,
            outer: SphereRule::with_exactness(n - k, exactness.max(1))?,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn exactness(&self) -> usize {
        self.inner.exactness().min(self.outer.exactness())
    }

    pub fn apply(&self, f: &dyn SphereFn, u: &Frame) -> Result<Complex64> {
        if u.n() != self.n || u.k() != self.k || f.dim() != self.n {
            return Err(Error::InvalidArgument("frame, function and rule dimensions differ".into()));
        }
        check_band(f, self.exactness())?;
        Ok(self.eval(f, u))
    }

    fn eval(&self, f: &dyn SphereFn, u: &Frame) -> Complex64 {
        let span: Vec<Vec<f64>> = (0..self.k).map(|c| u.u.column(c).iter().copied().collect()).collect();
        let null = u.null_basis();
        let mut v = vec![0.0; self.n];
        let mut total = Complex64::new(0.0, 0.0);
        for (&s, &ws) in self.radial.nodes.iter().zip(&self.radial.weights) {
            let (r, q) = (s.sqrt(), (1.0 - s).max(0.0).sqrt());
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, wa) in self.inner.iter() {
                for (b, wb) in self.outer.iter() {
                    v.fill(0.0);
                    combine_into(&mut v, &span, a, r);
                    combine_into(&mut v, &null, b, q);
                    acc += wa * wb * f.eval(&v);
                }
            }
            total += ws * acc;
        }
        self.gamma * total
    }
}

/// 𝒞^λ_k f(u), Re λ > -k.
pub fn cosine_k(f: &dyn SphereFn, u: &Frame, lambda: Complex64, exactness: usize) -> Result<Complex64> {
    CosineKRule::new(u.n(), u.k(), lambda, exactness)?.apply(f, u)
}

/// Where a frame function came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StiefelSource {
    Raw,
    Funk,
    Cosine(Complex64),
}

type FrameFn = dyn Fn(&Frame) -> Complex64 + Send + Sync;

/// A function on V_{n,k}.
#[derive(Clone)]
pub struct StiefelFunction {
    n: usize,
    k: usize,
    source: StiefelSource,
    f: Arc<FrameFn>,
}

impl std::fmt::Debug for StiefelFunction {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("StiefelFunction")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("source", &self.source)
            .finish()
    }
}

impl StiefelFunction {
    pub fn new<F>(n: usize, k: usize, f: F) -> Result<Self>
    where
        F: Fn(&Frame) -> Complex64 + Send + Sync + 'static,
    {
        check_dims(n, k)?;
        Ok(Self {
            n,
            k,
            source: StiefelSource::Raw,
            f: Arc::new(f),
        })
    }

    /// u ↦ F_k f(u).
    pub fn funk_of(f: Arc<dyn SphereFn + Send + Sync>, k: usize, exactness: usize) -> Result<Self> {
        let n = f.dim();
        let rule = FunkKRule::new(n, k, exactness)?;
        check_band(f.as_ref(), rule.exactness())?;
        Ok(Self {
            n,
            k,
            source: StiefelSource::Funk,
            f: Arc::new(move |u: &Frame| rule.eval(f.as_ref(), u)),
        })
    }

    /// u ↦ 𝒞^λ_k f(u).
    pub fn cosine_of(f: Arc<dyn SphereFn + Send + Sync>, k: usize, lambda: Complex64, exactness: usize) -> Result<Self> {
        let n = f.dim();
        let rule = CosineKRule::new(n, k, lambda, exactness)?;
        check_band(f.as_ref(), rule.exactness())?;
        Ok(Self {
            n,
            k,
            source: StiefelSource::Cosine(lambda),
            f: Arc::new(move |u: &Frame| rule.eval(f.as_ref(), u)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn source(&self) -> StiefelSource {
        self.source
    }

    pub fn eval(&self, u: &Frame) -> Complex64 {
        (self.f)(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::HarmonicSpectrum;
    use crate::sphere::{build_grid, Direction, FnSphere, GridFunction};
    use crate::transforms::{cosine_transform, funk_transform, Path, TransformParams};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn zonal(n: usize) -> HarmonicSpectrum {
        let pole = Direction::new((1..=n).map(|i| i as f64).collect()).unwrap();
        HarmonicSpectrum::zonal(pole, vec![c(1.0), c(0.0), c(0.5), c(0.0), c(0.25)]).unwrap()
    }

    #[test]
    fn haar_frames() {
        let u = haar_sample(5, 2, 3).unwrap();
        let again = Frame::new(u.matrix().clone()).unwrap();
        assert_eq!(u, again);
        assert_eq!(haar_sample(5, 2, 3).unwrap(), u);
        assert_ne!(haar_sample(5, 2, 4).unwrap(), u);
        assert!(haar_sample(3, 3, 0).is_err());
    }

    #[test]
    fn haar_second_moment() {
        let (n, k, m) = (5, 2, 20_000);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = [1.0, 0.0, 0.0, 0.0, 0.0];
        let xs: Vec<f64> = (0..m)
            .map(|_| {
                let c = haar_with(n, k, &mut rng).unwrap().cosine(&v);
                c * c
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let sigma = (var / m as f64).sqrt();
        assert!((mean - k as f64 / n as f64).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn null_basis_is_orthonormal_complement() {
        let u = haar_sample(5, 2, 8).unwrap();
        let b = u.null_basis();
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(u.cosine(x) < 1e-13);
            for (j, y) in b.iter().enumerate() {
                let d: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn funk_k_basics() {
        let one = FnSphere::band_limited(4, 0, |_| c(1.0));
        let u = haar_sample(4, 2, 1).unwrap();
        assert!((funk_k(&one, &u, 2).unwrap() - 1.0).norm() < 1e-14);
        let f = zonal(4);
        let u = haar_sample(4, 3, 1).unwrap();
        let b = u.null_basis();
        assert!((funk_k(&f, &u, 4).unwrap() - f.eval_at(&b[0])).norm() < 1e-13);
        let u = haar_sample(4, 2, 1).unwrap();
        assert!(matches!(funk_k(&f, &u, 2), Err(Error::Resolution { .. })));
    }

    #[test]
    fn right_invariance() {
        let f = zonal(5);
        let u = haar_sample(5, 2, 5).unwrap();
        let r = haar_sample(2, 1, 0).unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[r.matrix()[0], -r.matrix()[1], r.matrix()[1], r.matrix()[0]]);
        let ur = u.rotate(&r).unwrap();
        assert!((funk_k(&f, &u, 4).unwrap() - funk_k(&f, &ur, 4).unwrap()).norm() < 1e-12);
        let (a, b) = (cosine_k(&f, &u, c(0.7), 4).unwrap(), cosine_k(&f, &ur, c(0.7), 4).unwrap());
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn k1_matches_hyperplane_transforms() {
        let grid = Arc::new(build_grid(3, 12).unwrap());
        let s = zonal(3);
        let g = GridFunction::from_fn(Arc::clone(&grid), |v| s.eval_at(v)).with_band(s.band());
        let ct = cosine_transform(&g, &TransformParams::real(0.5, Path::Quadrature)).unwrap();
        let ft = funk_transform(&g, Path::Quadrature).unwrap();
        for i in (0..grid.len()).step_by(37) {
            let u = Frame::new(DMatrix::from_column_slice(3, 1, grid.node(i))).unwrap();
            assert!((cosine_k(&s, &u, c(0.5), 4).unwrap() - ct.values()[i]).norm() < 1e-8);
            assert!((funk_k(&s, &u, 4).unwrap() - ft.values()[i]).norm() < 1e-8);
        }
    }

    #[test]
    fn constant_is_frame_independent() {
        let one = FnSphere::band_limited(5, 0, |_| c(1.0));
        let a = cosine_k(&one, &haar_sample(5, 2, 1).unwrap(), c(1.0), 2).unwrap();
        let b = cosine_k(&one, &haar_sample(5, 2, 2).unwrap(), c(1.0), 2).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn cosine_k_limit_is_scaled_funk_k() {
        let f = zonal(4);
        let u = haar_sample(4, 2, 9).unwrap();
        let near = cosine_k(&f, &u, c(-2.0 + 1e-4), 4).unwrap();
        let limit = crate::transforms::constants::mu_k(4, 2) * funk_k(&f, &u, 4).unwrap();
        assert!((near - limit).norm() < 1e-3, "{near} {limit}");
        assert!(matches!(cosine_k(&f, &u, c(-2.0), 4), Err(Error::Domain(_))));
        assert!(matches!(cosine_k(&f, &u, c(2.0), 4), Err(Error::Pole { .. })));
    }
}
