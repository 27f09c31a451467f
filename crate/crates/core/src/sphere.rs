//! Grids, quadrature and sampled functions on S^{n-1}.
//!
//! Every grid is a product rule normalized to the invariant probability
//! measure, so `integrate` is a plain weighted sum. Nodes come in antipodal
//! pairs, which is what `even_project` relies on.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::SphereRule;

/// A unit vector in R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Domain("direction must be a nonzero finite vector".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    /// The standard basis vector e_{index} in R^n.
    pub fn axis(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        dot(&self.0, v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Product quadrature on S^{n-1}: nodes, probability weights and the
/// antipodal involution when the node set is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    n: usize,
    resolution: Option<usize>,
    coords: Vec<f64>,
    weights: Vec<f64>,
    antipode: Option<Vec<usize>>,
    exactness: usize,
}

/// Builds the product grid: Gauss–Legendre × trapezoid on S^2, nested
/// Gauss–Jacobi rules in the hyperspherical angles for n > 3. `resolution`
/// is the number of polar nodes; the azimuth carries twice as many.
pub fn build_grid(n: usize, resolution: usize) -> Result<QuadratureGrid> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("dimension n = {n} must be at least 3")));
    }
    if resolution < 4 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} must be at least 4"
        )));
    }
    let rule = SphereRule::product(n, resolution)?;
    let mut coords = Vec::with_capacity(rule.len() * n);
    for (v, _) in rule.iter() {
        coords.extend_from_slice(v);
    }
    Ok(QuadratureGrid {
        n,
        resolution: Some(resolution),
        coords,
        weights: rule.weights().to_vec(),
        antipode: Some(rule.antipodes().to_vec()),
        exactness: rule.exactness(),
    })
}

impl QuadratureGrid {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn resolution(&self) -> Option<usize> {
        self.resolution
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.n)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn antipodes(&self) -> Option<&[usize]> {
        self.antipode.as_deref()
    }

    /// Total polynomial degree integrated exactly (0 when unknown).
    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// Writes the grid as text: a `# sphere-grid n=<n> nodes=<N>` header,
    /// then one row per node with the coordinates and weight, 17 significant
    /// digits, separated by single spaces.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# sphere-grid n={} nodes={}", self.n, self.len())?;
        let mut line = String::new();
        for (v, w) in self.nodes().zip(&self.weights) {
            line.clear();
            for x in v {
                write!(line, "{x:.16e} ").expect("writing to a String");
            }
            write!(line, "{w:.16e}").expect("writing to a String");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the text format written by [`QuadratureGrid::write_to`]. The
    /// antipodal map is reconstructed from the coordinates; if the node set
    /// coincides with a `build_grid` output its exactness degree is restored.
    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let (n, count) = parse_grid_header(&header)?;
        let mut coords = Vec::with_capacity(n * count);
        let mut weights = Vec::with_capacity(count);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
            if fields.len() != n + 1 {
                return Err(Error::Parse(format!(
                    "row {}: expected {} fields, found {}",
                    row + 1,
                    n + 1,
                    fields.len()
                )));
            }
            coords.extend_from_slice(&fields[..n]);
            weights.push(fields[n]);
        }
        if weights.len() != count {
            return Err(Error::Parse(format!(
                "header declares {count} nodes, file has {}",
                weights.len()
            )));
        }
        let mut grid = QuadratureGrid {
            n,
            resolution: None,
            coords,
            weights,
            antipode: None,
            exactness: 0,
        };
        grid.antipode = find_antipodes(&grid);
        if let Some(res) = matching_resolution(n, count) {
            if let Ok(reference) = build_grid(n, res) {
                let same = reference
                    .coords
                    .iter()
                    .zip(&grid.coords)
                    .all(|(a, b)| (a - b).abs() <= 1e-15);
                if same {
                    grid.resolution = Some(res);
                    grid.exactness = reference.exactness;
                }
            }
        }
        Ok(grid)
    }
}

fn parse_grid_header(header: &str) -> Result<(usize, usize)> {
    let rest = header
        .strip_prefix("# sphere-grid")
        .ok_or_else(|| Error::Parse(format!("bad grid header: {header}")))?;
    let mut n = None;
    let mut count = None;
    for token in rest.split_whitespace() {
        if let Some(v) = token.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = token.strip_prefix("nodes=") {
            count = v.parse().ok();
        }
    }
    match (n, count) {
        (Some(n), Some(c)) if n >= 1 => Ok((n, c)),
        _ => Err(Error::Parse(format!("bad grid header: {header}"))),
    }
}

fn matching_resolution(n: usize, count: usize) -> Option<usize> {
    // build_grid(n, r) has 2 r^{n-1} nodes
    (4..=512).find(|&r| {
        let mut total = 2usize;
        for _ in 0..n - 1 {
            total = total.saturating_mul(r);
        }
        total == count
    })
}

fn find_antipodes(grid: &QuadratureGrid) -> Option<Vec<usize>> {
    let n = grid.n;
    let key = |v: &[f64]| -> Vec<i64> { v.iter().map(|x| (x * 1e9).round() as i64).collect() };
    let mut index: std::collections::HashMap<Vec<i64>, usize> = std::collections::HashMap::new();
    for (i, v) in grid.nodes().enumerate() {
        index.insert(key(v), i);
    }
    let mut out = Vec::with_capacity(grid.len());
    for (i, v) in grid.nodes().enumerate() {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let j = *index.get(&key(&neg))?;
        let close = (0..n).all(|d| (grid.coords[j * n + d] + v[d]).abs() < 1e-12);
        if !close || grid.weights[j] != grid.weights[i] {
            return None;
        }
        out.push(j);
    }
    Some(out)
}

/// Declared spherical-harmonic content of a sampled function. For n > 3 the
/// spectral machinery handles zonal functions only, so a pole is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub max_degree: usize,
    pub pole: Option<Direction>,
}

/// One entry of a function's processing history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operation: String,
    pub path: String,
    pub detail: String,
}

/// Complex samples of a function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
    band: Option<Band>,
    provenance: Vec<Provenance>,
}

impl GridFunction {
    pub fn from_values(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            band: None,
            provenance: Vec::new(),
        })
    }

    pub fn from_fn<F>(grid: Arc<QuadratureGrid>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let values = grid.nodes().map(f).collect();
        Self {
            grid,
            values,
            band: None,
            provenance: Vec::new(),
        }
    }

    pub fn constant(grid: Arc<QuadratureGrid>, c: Complex64) -> Self {
        let values = vec![c; grid.len()];
        Self {
            grid,
            values,
            band: Some(Band {
                max_degree: 0,
                pole: None,
            }),
            provenance: Vec::new(),
        }
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = Some(band);
        self
    }

    pub fn without_band(mut self) -> Self {
        self.band = None;
        self
    }

    pub fn with_provenance(mut self, step: Provenance) -> Self {
        self.provenance.push(step);
        self
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn band(&self) -> Option<&Band> {
        self.band.as_ref()
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.grid.n
    }

    /// Same grid, band and history; new samples.
    pub fn map_values<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
            band: self.band.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Pointwise combination of two functions on the same grid. The band of
    /// the result is the larger of the two when both are declared.
    pub fn zip_with<F>(&self, other: &GridFunction, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(Error::InvalidArgument("functions live on different grids".into()));
        }
        let band = match (&self.band, &other.band) {
            (Some(a), Some(b)) if a.pole == b.pole => Some(Band {
                max_degree: a.max_degree.max(b.max_degree),
                pole: a.pole.clone(),
            }),
            (Some(a), Some(b)) if a.max_degree == 0 || b.max_degree == 0 => {
                let (hi, lo) = if a.max_degree == 0 { (b, a) } else { (a, b) };
                Some(Band {
                    max_degree: hi.max_degree.max(lo.max_degree),
                    pole: hi.pole.clone(),
                })
            }
            _ => None,
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
            band,
            provenance: Vec::new(),
        })
    }

    /// Largest pointwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Weighted sum of the samples: the integral against the probability
/// measure on the sphere.
pub fn integrate(f: &GridFunction) -> Complex64 {
    f.values
        .iter()
        .zip(f.grid.weights())
        .fold(Complex64::new(0.0, 0.0), |acc, (v, w)| acc + v * w)
}

/// (f(v) + f(-v)) / 2 at every node.
pub fn even_project(f: &GridFunction) -> Result<GridFunction> {
    let antipode = f
        .grid
        .antipodes()
        .ok_or_else(|| Error::UnsupportedGrid("grid nodes are not antipodally paired".into()))?;
    let values = f
        .values
        .iter()
        .zip(antipode)
        .map(|(&a, &j)| (a + f.values[j]) * 0.5)
        .collect();
    Ok(GridFunction {
        grid: Arc::clone(&f.grid),
        values,
        band: f.band.clone(),
        provenance: f.provenance.clone(),
    })
}

/// Odd part (f(v) - f(-v)) / 2.
pub fn odd_part(f: &GridFunction) -> Result<GridFunction> {
    let antipode = f
        .grid
        .antipodes()
        .ok_or_else(|| Error::UnsupportedGrid("grid nodes are not antipodally paired".into()))?;
    let values = f
        .values
        .iter()
        .zip(antipode)
        .map(|(&a, &j)| (a - f.values[j]) * 0.5)
        .collect();
    Ok(GridFunction {
        grid: Arc::clone(&f.grid),
        values,
        band: f.band.clone(),
        provenance: Vec::new(),
    })
}

/// f - ∫ f.
pub fn remove_mean(f: &GridFunction) -> GridFunction {
    let mean = integrate(f);
    f.map_values(|v| v - mean)
}

/// A function that can be evaluated anywhere on S^{n-1}.
pub trait SphereFn: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, v: &[f64]) -> Complex64;

    /// Degree bound of the spherical-harmonic expansion, if finite and known.
    fn band_limit(&self) -> Option<usize> {
        None
    }
}

/// Adapter turning a closure into a [`SphereFn`].
pub struct FnSphere<F> {
    n: usize,
    band: Option<usize>,
    f: F,
}

impl<F> FnSphere<F>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, band: None, f }
    }

    pub fn band_limited(n: usize, band: usize, f: F) -> Self {
        Self {
            n,
            band: Some(band),
            f,
        }
    }
}

impl<F> SphereFn for FnSphere<F>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, v: &[f64]) -> Complex64 {
        (self.f)(v)
    }

    fn band_limit(&self) -> Option<usize> {
        self.band
    }
}

/// E_a f(x) = |x|^a f(x / |x|).
pub fn homogeneous_extension_eval(f: &dyn SphereFn, a: Complex64, x: &[f64]) -> Result<Complex64> {
    if x.len() != f.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, function lives on S^{}",
            x.len(),
            f.dim() - 1
        )));
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Domain("homogeneous extension is undefined at the origin".into()));
    }
    let unit: Vec<f64> = x.iter().map(|c| c / r).collect();
    let scale = if a == Complex64::new(0.0, 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        (a * r.ln()).exp()
    };
    Ok(scale * f.eval(&unit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid(n: usize, r: usize) -> Arc<QuadratureGrid> {
        Arc::new(build_grid(n, r).unwrap())
    }

    #[test]
    fn grid_shape_and_normalization() {
        let g = build_grid(3, 16).unwrap();
        assert_eq!(g.len(), 16 * 32);
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        for v in g.nodes() {
            assert!((norm(v) - 1.0).abs() < 1e-14);
        }
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn build_grid_rejects_bad_arguments() {
        assert!(matches!(build_grid(2, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_grid(3, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn integrates_constants_and_second_moment() {
        for r in [4, 5, 9, 16] {
            let g = grid(3, r);
            assert!((integrate(&GridFunction::constant(g.clone(), re(1.0))) - 1.0).norm() < 1e-14);
            let f = GridFunction::from_fn(g, |v| re(v[0] * v[0]));
            assert!((integrate(&f) - 1.0 / 3.0).norm() < 1e-12);
        }
    }

    #[test]
    fn moment_exactness_up_to_design_degree() {
        // ∫ (v·e1)^{2m} d_*v = 1/(2m+1) on S^2, exact for 2m <= 2N-1
        let n_res = 10;
        let g = grid(3, n_res);
        for m in 0..n_res {
            let f = GridFunction::from_fn(g.clone(), |v| re(v[0].powi(2 * m as i32)));
            let expect = 1.0 / (2 * m + 1) as f64;
            assert!((integrate(&f).re - expect).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn odd_functions_integrate_to_zero() {
        let g = grid(3, 7);
        let f = GridFunction::from_fn(g, |v| re(v[0]));
        assert!(integrate(&f).norm() < 1e-14);
    }

    #[test]
    fn degree_two_zonal_is_orthogonal_to_constants() {
        let g = grid(3, 6);
        let f = GridFunction::from_fn(g, |v| re(0.5 * (3.0 * v[1] * v[1] - 1.0)));
        assert!(integrate(&f).norm() < 1e-12);
    }

    #[test]
    fn even_projection() {
        let g = grid(3, 8);
        let odd = GridFunction::from_fn(g.clone(), |v| re(v[0]));
        assert!(even_project(&odd).unwrap().max_abs() < 1e-15);
        let mixed = GridFunction::from_fn(g.clone(), |v| re(v[0] + v[0] * v[0]));
        let sq = GridFunction::from_fn(g, |v| re(v[0] * v[0]));
        assert!(even_project(&mixed).unwrap().max_abs_diff(&sq) < 1e-15);
        let once = even_project(&mixed).unwrap();
        let twice = even_project(&once).unwrap();
        assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn even_project_requires_pairing() {
        let mut g = build_grid(3, 4).unwrap();
        g.antipode = None;
        let f = GridFunction::constant(Arc::new(g), re(1.0));
        assert!(matches!(even_project(&f), Err(Error::UnsupportedGrid(_))));
    }

    #[test]
    fn remove_mean_examples() {
        let g = grid(3, 6);
        let five = GridFunction::constant(g.clone(), re(5.0));
        assert!(remove_mean(&five).max_abs() < 1e-14);
        let sq = GridFunction::from_fn(g.clone(), |v| re(v[0] * v[0]));
        let centered = remove_mean(&sq);
        let expect = GridFunction::from_fn(g, |v| re(v[0] * v[0] - 1.0 / 3.0));
        assert!(centered.max_abs_diff(&expect) < 1e-14);
        assert!(integrate(&centered).norm() < 1e-13);
        assert!(remove_mean(&centered).max_abs_diff(&centered) < 1e-15);
    }

    #[test]
    fn homogeneous_extension_examples() {
        let one = FnSphere::new(3, |_| re(1.0));
        let v = homogeneous_extension_eval(&one, re(2.0), &[2.0, 0.0, 0.0]).unwrap();
        assert!((v - 4.0).norm() < 1e-14);
        let sq = FnSphere::new(3, |v: &[f64]| re(v[0] * v[0]));
        let v = homogeneous_extension_eval(&sq, re(-1.0), &[0.0, 3.0, 0.0]).unwrap();
        assert_eq!(v, re(0.0));
        let x = [0.6, 0.0, 0.8];
        let v = homogeneous_extension_eval(&sq, re(0.0), &x).unwrap();
        assert!((v - 0.36).norm() < 1e-15);
        assert!(matches!(
            homogeneous_extension_eval(&one, re(1.0), &[0.0, 0.0, 0.0]),
            Err(Error::Domain(_))
        ));
        // complex exponent: |x|^{i} = exp(i ln|x|)
        let v = homogeneous_extension_eval(&one, Complex64::new(0.0, 1.0), &[0.0, 2.0, 0.0]).unwrap();
        assert!((v - Complex64::new(0.0, 2f64.ln()).exp()).norm() < 1e-15);
    }

    #[test]
    fn grid_file_round_trip() {
        let g = build_grid(3, 5).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# sphere-grid n=3 nodes=50\n"));
        let back = QuadratureGrid::read_from(&buf[..]).unwrap();
        assert_eq!(back.len(), g.len());
        assert_eq!(back.exactness(), g.exactness());
        assert_eq!(back.antipodes(), g.antipodes());
        for (a, b) in back.nodes().zip(g.nodes()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn grid_file_errors() {
        assert!(QuadratureGrid::read_from(&b"nonsense\n"[..]).is_err());
        assert!(QuadratureGrid::read_from(&b"# sphere-grid n=3 nodes=2\n1 0 0 0.5\n"[..]).is_err());
    }

    #[test]
    fn higher_dimensional_grids() {
        for n in [4, 5] {
            let g = build_grid(n, 4).unwrap();
            assert_eq!(g.len(), 2 * 4usize.pow(n as u32 - 1));
            let f = GridFunction::from_fn(Arc::new(g), |v| re(v[0] * v[0]));
            assert!((integrate(&f).re - 1.0 / n as f64).abs() < 1e-14);
        }
    }

    proptest::proptest! {
        #[test]
        fn antipodal_involution(n in 3usize..=5, r in 4usize..=6) {
            let g = build_grid(n, r).unwrap();
            let a = g.antipodes().unwrap();
            for i in 0..g.len() {
                proptest::prop_assert_eq!(a[a[i]], i);
                proptest::prop_assert_eq!(g.weights()[i], g.weights()[a[i]]);
                for (x, y) in g.node(i).iter().zip(g.node(a[i])) {
                    proptest::prop_assert!((x + y).abs() < 1e-15);
                }
            }
        }
    }
}
