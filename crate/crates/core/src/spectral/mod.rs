//! Spherical-harmonic analysis and synthesis, and the degree-wise action of
//! invariant operators.
//!
//! On S^2 the full real harmonic basis is used. For n > 3 only functions
//! zonal about a stored pole p are represented: f(v) = Σ_j c_j Z_j(v·p).

pub mod funk_hecke;
pub mod harmonics;
pub mod multipliers;
pub mod zonal;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{Band, Direction, GridFunction, QuadratureGrid, SphereFn};

pub use funk_hecke::{funk_hecke_multiplier_quadrature, zonal_integral, Singularity, ZonalKernel};
pub use multipliers::{
    beltrami_eigenvalue, cosine_multiplier, delta_op_eigenvalue, funk_multiplier,
    log_cosine_multiplier, log_sine_multiplier, oracle_gate, require_gate, sine_multiplier,
    MultiplierTable, OperatorTag,
};
pub use zonal::{harmonic_dimension, zonal_eval, zonal_profiles};

/// Nodes per parallel work unit; partial sums are combined in chunk order
/// so results do not depend on the thread count.
const CHUNK: usize = 256;

/// How the coefficients are indexed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectrumKind {
    /// n = 3, coefficients c[j][m] at `harmonics::index(j, m)`.
    Full,
    /// Any n, coefficients c[j] of Z_j(v·pole).
    Zonal { pole: Direction },
}

/// Coefficients of a band-limited function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    n: usize,
    max_degree: usize,
    kind: SpectrumKind,
    coeffs: Vec<Complex64>,
}

impl HarmonicSpectrum {
    /// Full-basis spectrum on S^2 from a coefficient table of length (J+1)^2.
    pub fn full(max_degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != harmonics::table_len(max_degree) {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for degree {max_degree}",
                coeffs.len()
            )));
        }
        Ok(Self {
            n: 3,
            max_degree,
            kind: SpectrumKind::Full,
            coeffs,
        })
    }

    /// Zonal spectrum about `pole` with coefficients c_0..=c_J.
    pub fn zonal(pole: Direction, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = pole.dim();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("dimension n = {n} must be at least 3")));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient list".into()));
        }
        Ok(Self {
            n,
            max_degree: coeffs.len() - 1,
            kind: SpectrumKind::Zonal { pole },
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients of degree j (2j+1 of them for the full basis, one for
    /// a zonal spectrum).
    pub fn degree(&self, j: usize) -> &[Complex64] {
        match self.kind {
            SpectrumKind::Full => {
                &self.coeffs[harmonics::index(j, -(j as i64))..=harmonics::index(j, j as i64)]
            }
            SpectrumKind::Zonal { .. } => &self.coeffs[j..=j],
        }
    }

    /// L²(d_*v) norm of the degree-j component.
    pub fn degree_norm(&self, j: usize) -> f64 {
        match self.kind {
            SpectrumKind::Full => self.degree(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            SpectrumKind::Zonal { .. } => {
                self.coeffs[j].norm() / harmonic_dimension(j, self.n).sqrt()
            }
        }
    }

    pub fn degree_norms(&self) -> Vec<f64> {
        (0..=self.max_degree).map(|j| self.degree_norm(j)).collect()
    }

    /// L² norm of the odd-degree part.
    pub fn odd_norm(&self) -> f64 {
        (1..=self.max_degree)
            .step_by(2)
            .map(|j| self.degree_norm(j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Applies `f(j, c)` to every coefficient.
    pub fn map_degrees<F>(&self, f: F) -> Self
    where
        F: Fn(usize, Complex64) -> Complex64,
    {
        let coeffs = match self.kind {
            SpectrumKind::Full => (0..=self.max_degree)
                .flat_map(|j| {
                    let f = &f;
                    self.degree(j).iter().map(move |&c| f(j, c))
                })
                .collect(),
            SpectrumKind::Zonal { .. } => {
                self.coeffs.iter().enumerate().map(|(j, &c)| f(j, c)).collect()
            }
        };
        Self {
            coeffs,
            ..self.clone()
        }
    }

    /// Diagonal action of an operator. Fails if the table is too short or
    /// if a logarithmic operator meets a nonzero mean.
    pub fn apply(&self, table: &MultiplierTable) -> Result<Self> {
        if table.n != self.n {
            return Err(Error::InvalidArgument(format!(
                "operator on S^{} applied to a function on S^{}",
                table.n - 1,
                self.n - 1
            )));
        }
        if table.max_degree() < self.max_degree {
            return Err(Error::InvalidArgument(format!(
                "multiplier table stops at degree {}, spectrum reaches {}",
                table.max_degree(),
                self.max_degree
            )));
        }
        if table.mean_excluded && self.coeffs[0].norm() > MEAN_TOLERANCE {
            return Err(Error::Precondition(format!(
                "{} needs a mean-zero input, mean is {:e}",
                table.tag.name(),
                self.coeffs[0].norm()
            )));
        }
        Ok(self.map_degrees(|j, c| table.values[j] * c))
    }

    /// Coefficientwise linear combination a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.kind != other.kind || self.n != other.n {
            return Err(Error::InvalidArgument("spectra use different bases".into()));
        }
        let (long, short, a_long, b_short) = if self.max_degree >= other.max_degree {
            (self, other, a, b)
        } else {
            (other, self, b, a)
        };
        let mut coeffs: Vec<Complex64> = long.coeffs.iter().map(|&c| a_long * c).collect();
        for (dst, &c) in coeffs.iter_mut().zip(&short.coeffs) {
            *dst += b_short * c;
        }
        Ok(Self {
            coeffs,
            ..long.clone()
        })
    }

    /// Largest coefficient difference, padding the shorter spectrum with zeros.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(zero);
                let b = other.coeffs.get(i).copied().unwrap_or(zero);
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Value at a point of the sphere.
    pub fn eval_at(&self, v: &[f64]) -> Complex64 {
        match &self.kind {
            SpectrumKind::Full => {
                let y = harmonics::real_harmonics(self.max_degree, v);
                y.iter().zip(&self.coeffs).map(|(&y, &c)| c * y).sum()
            }
            SpectrumKind::Zonal { pole } => {
                let t = pole.dot(v).clamp(-1.0, 1.0);
                zonal_sum(&self.coeffs, self.n, t)
            }
        }
    }

    /// The band annotation a synthesized function carries.
    pub fn band(&self) -> Band {
        Band {
            max_degree: self.max_degree,
            pole: match &self.kind {
                SpectrumKind::Full => None,
                SpectrumKind::Zonal { pole } => Some(pole.clone()),
            },
        }
    }
}

/// Σ c_j Z_j(t) by the three-term recurrence, without allocating.
fn zonal_sum(coeffs: &[Complex64], n: usize, t: f64) -> Complex64 {
    let two_alpha = n as f64 - 2.0;
    let (mut prev, mut cur) = (1.0, t);
    let mut acc = coeffs[0];
    if let Some(&c1) = coeffs.get(1) {
        acc += c1 * t;
    }
    for (j, &c) in coeffs.iter().enumerate().skip(2) {
        let jf = (j - 1) as f64;
        let next = ((2.0 * jf + two_alpha) * t * cur - jf * prev) / (jf + two_alpha);
        prev = cur;
        cur = next;
        acc += c * cur;
    }
    acc
}

/// Mean magnitude above which a logarithmic operator refuses its input.
pub const MEAN_TOLERANCE: f64 = 1e-10;

impl SphereFn for HarmonicSpectrum {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, v: &[f64]) -> Complex64 {
        self.eval_at(v)
    }

    fn band_limit(&self) -> Option<usize> {
        Some(self.max_degree)
    }
}

fn check_resolution(grid: &QuadratureGrid, max_degree: usize) -> Result<()> {
    if grid.exactness() < 2 * max_degree {
        return Err(Error::Resolution {
            needed: 2 * max_degree,
            available: grid.exactness(),
        });
    }
    Ok(())
}

/// Deterministic parallel Σ_i w_i f_i basis(v_i) over the grid.
fn project<B>(f: &GridFunction, len: usize, basis: B) -> Vec<Complex64>
where
    B: Fn(&[f64], &mut [f64]) + Sync,
{
    let grid = f.grid();
    let values = f.values();
    let weights = grid.weights();
    let partials: Vec<Vec<Complex64>> = (0..grid.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let mut scratch = vec![0.0; len];
            for &i in idx {
                basis(grid.node(i), &mut scratch);
                let fw = values[i] * weights[i];
                for (a, &b) in acc.iter_mut().zip(&scratch) {
                    *a += fw * b;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); len];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// Projection onto harmonics of degree <= J. On S^2 the full basis is used
/// unless the function's band names a pole; for n > 3 a pole is required.
pub fn analyze(f: &GridFunction, max_degree: usize) -> Result<HarmonicSpectrum> {
    match f.band().and_then(|b| b.pole.clone()) {
        Some(pole) => analyze_about(f, max_degree, &pole),
        None if f.band().is_some_and(|b| b.max_degree == 0) => {
            analyze_about(f, max_degree, &Direction::axis(f.dim(), 0))
        }
        None if f.dim() == 3 => analyze_full(f, max_degree),
        None => Err(Error::Unsupported(format!(
            "non-zonal analysis on S^{}; give the function a zonal pole",
            f.dim() - 1
        ))),
    }
}

/// Full real-harmonic analysis on S^2.
pub fn analyze_full(f: &GridFunction, max_degree: usize) -> Result<HarmonicSpectrum> {
    if f.dim() != 3 {
        return Err(Error::Unsupported(format!(
            "full harmonic analysis is implemented on S^2 only, not S^{}",
            f.dim() - 1
        )));
    }
    check_resolution(f.grid(), max_degree)?;
    let coeffs = project(f, harmonics::table_len(max_degree), |v, out| {
        harmonics::fill_real_harmonics(max_degree, v, out)
    });
    HarmonicSpectrum::full(max_degree, coeffs)
}

/// Zonal analysis about `pole`: c_j = N(n, j) ∫ f(v) Z_j(v·p) d_*v. The
/// non-zonal part of f, if any, is discarded.
pub fn analyze_about(f: &GridFunction, max_degree: usize, pole: &Direction) -> Result<HarmonicSpectrum> {
    let n = f.dim();
    if pole.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "pole in R^{} for a function on S^{}",
            pole.dim(),
            n - 1
        )));
    }
    check_resolution(f.grid(), max_degree)?;
    let mut coeffs = project(f, max_degree + 1, |v, out| {
        let z = zonal_profiles(max_degree, n, pole.dot(v).clamp(-1.0, 1.0));
        out.copy_from_slice(&z);
    });
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c *= harmonic_dimension(j, n);
    }
    HarmonicSpectrum::zonal(pole.clone(), coeffs)
}

/// Evaluates the expansion at every node of `grid`.
pub fn synthesize(s: &HarmonicSpectrum, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    if grid.dim() != s.n {
        return Err(Error::InvalidArgument(format!(
            "spectrum on S^{} synthesized on a grid on S^{}",
            s.n - 1,
            grid.dim() - 1
        )));
    }
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| s.eval_at(grid.node(i)))
        .collect();
    Ok(GridFunction::from_values(Arc::clone(grid), values)?.with_band(s.band()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_full(max_degree: usize, seed: u64) -> HarmonicSpectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..harmonics::table_len(max_degree))
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        HarmonicSpectrum::full(max_degree, coeffs).unwrap()
    }

    #[test]
    fn constant_function() {
        let grid = Arc::new(build_grid(3, 8).unwrap());
        let f = GridFunction::constant(grid, Complex64::new(1.0, 0.0));
        let s = analyze(&f, 4).unwrap();
        assert!((s.coeffs()[0] - 1.0).norm() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn round_trip_full() {
        let grid = Arc::new(build_grid(3, 10).unwrap());
        let s = random_full(8, 3);
        let f = synthesize(&s, &grid).unwrap();
        let back = analyze(&f, 8).unwrap();
        assert!(back.max_abs_diff(&s) < 1e-12);
        let again = synthesize(&back, &grid).unwrap();
        assert!(again.max_abs_diff(&f) < 1e-11);
    }

    #[test]
    fn round_trip_zonal_higher_dimensions() {
        for n in [4, 5] {
            let grid = Arc::new(build_grid(n, 8).unwrap());
            let pole = Direction::new((0..n).map(|i| 1.0 + i as f64).collect()).unwrap();
            let coeffs = (0..=6).map(|j| Complex64::new(1.0 / (j as f64 + 1.0), 0.1)).collect();
            let s = HarmonicSpectrum::zonal(pole, coeffs).unwrap();
            let f = synthesize(&s, &grid).unwrap();
            let back = analyze(&f, 6).unwrap();
            assert!(back.max_abs_diff(&s) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn mean_of_squared_coordinate() {
        let grid = Arc::new(build_grid(3, 6).unwrap());
        let f = GridFunction::from_fn(grid, |v| Complex64::new(v[0] * v[0], 0.0));
        let s = analyze(&f, 2).unwrap();
        assert!((s.coeffs()[0] - 1.0 / 3.0).norm() < 1e-14);
    }

    #[test]
    fn even_functions_have_no_odd_coefficients() {
        let grid = Arc::new(build_grid(3, 10).unwrap());
        let s = random_full(7, 11);
        let f = crate::sphere::even_project(&synthesize(&s, &grid).unwrap()).unwrap();
        let back = analyze(&f, 7).unwrap();
        assert!(back.odd_norm() < 1e-12);
    }

    #[test]
    fn resolution_is_checked() {
        let grid = Arc::new(build_grid(3, 4).unwrap());
        let f = GridFunction::constant(grid, Complex64::new(1.0, 0.0));
        assert!(matches!(analyze(&f, 5), Err(Error::Resolution { .. })));
    }

    #[test]
    fn zonal_spectrum_norms() {
        // ||Z_j||² = 1/N(n, j)
        let pole = Direction::axis(4, 3);
        let s = HarmonicSpectrum::zonal(pole, vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let grid = Arc::new(build_grid(4, 6).unwrap());
        let f = synthesize(&s, &grid).unwrap();
        let direct = crate::sphere::integrate(&f.map_values(|v| v * v.conj())).re.sqrt();
        assert!((direct - s.degree_norm(2)).abs() < 1e-14);
    }

    #[test]
    fn analysis_is_deterministic() {
        let grid = Arc::new(build_grid(3, 20).unwrap());
        let s = random_full(10, 5);
        let f = synthesize(&s, &grid).unwrap();
        let a = analyze(&f, 10).unwrap();
        let b = analyze(&f, 10).unwrap();
        assert_eq!(a, b);
    }
}
