//! Closed-form eigenvalues of the invariant operators, degree by degree.
//!
//! The cosine multiplier
//!
//! ```text
//! m_j(λ) = (-1)^{j/2} Γ((j - λ)/2) / Γ((j + λ + n)/2)
//! ```
//!
//! is meromorphic in λ with poles at λ = j, j+2, ... Every other kernel
//! operator is built from it. Before any table is handed out the closed form
//! is compared against Funk–Hecke quadrature of the normalized kernel (the
//! oracle gate); tables refuse to build if that comparison fails.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{gamma_ratio, near_pole};
use crate::spectral::funk_hecke::{funk_hecke_multiplier_quadrature, ZonalKernel};
use crate::transforms::constants::funk_constant;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn sign_half(j: usize) -> f64 {
    if (j / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn require_even(j: usize) -> Result<()> {
    if j % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "degree {j} is odd; kernel multipliers are defined on even degrees"
        )));
    }
    Ok(())
}

fn require_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("dimension n = {n} must be at least 3")));
    }
    Ok(())
}

/// Eigenvalue of the normalized λ-cosine transform on degree-j harmonics.
pub fn cosine_multiplier(j: usize, n: usize, lambda: Complex64) -> Result<Complex64> {
    require_even(j)?;
    require_dim(n)?;
    let top = (re(j as f64) - lambda) / 2.0;
    if near_pole(top).is_some() {
        let pole = j as f64 - 2.0 * top.re.round();
        return Err(Error::pole(
            lambda,
            format!("λ = {pole} is a pole of the degree-{j} cosine multiplier"),
        ));
    }
    let bottom = (re((j + n) as f64) + lambda) / 2.0;
    Ok(sign_half(j) * gamma_ratio(top, bottom)?)
}

/// Eigenvalue of the Funk transform, m_j(-1) / c_n.
pub fn funk_multiplier(j: usize, n: usize) -> Result<f64> {
    require_even(j)?;
    require_dim(n)?;
    let jf = j as f64;
    let nf = n as f64;
    // Γ((j+1)/2)/Γ((j+n-1)/2) · Γ((n-1)/2)/√π
    let ratio = gamma_ratio(re((jf + 1.0) / 2.0), re((jf + nf - 1.0) / 2.0))?.re;
    Ok(sign_half(j) * ratio / funk_constant(n))
}

/// Eigenvalue of the normalized λ-sine transform, m_j(λ) m_j(-1).
pub fn sine_multiplier(j: usize, n: usize, lambda: Complex64) -> Result<Complex64> {
    Ok(cosine_multiplier(j, n, lambda)? * cosine_multiplier(j, n, re(-1.0))?)
}

/// Eigenvalue of the logarithmic cosine transform, the regular value
/// m_j(0) for j >= 2.
pub fn log_cosine_multiplier(j: usize, n: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::ExcludedComponent(
            "the logarithmic cosine transform is defined on mean-zero functions only".into(),
        ));
    }
    Ok(cosine_multiplier(j, n, re(0.0))?.re)
}

/// Eigenvalue of the logarithmic sine transform, c_n · log_j · f_j.
pub fn log_sine_multiplier(j: usize, n: usize) -> Result<f64> {
    Ok(funk_constant(n) * log_cosine_multiplier(j, n)? * funk_multiplier(j, n)?)
}

/// Eigenvalue of the weighted operator Δ_{λ,ℓ}:
/// (-1/4)^ℓ ∏_{m=1}^{ℓ} [(λ+2m)(λ+2m+n-2) - j(j+n-2)].
pub fn delta_op_eigenvalue(j: usize, n: usize, lambda: Complex64, ell: i64) -> Result<Complex64> {
    if ell < 0 {
        return Err(Error::InvalidArgument(format!("order ℓ = {ell} must be nonnegative")));
    }
    require_dim(n)?;
    let beltrami = beltrami_eigenvalue(j, n);
    let mut acc = re(1.0);
    for m in 1..=ell {
        let a = lambda + 2.0 * m as f64;
        acc *= -0.25 * (a * (a + n as f64 - 2.0) + beltrami);
    }
    Ok(acc)
}

/// Eigenvalue of the Beltrami–Laplace operator, -j(j+n-2).
pub fn beltrami_eigenvalue(j: usize, n: usize) -> f64 {
    -((j * (j + n - 2)) as f64)
}

/// Which operator a table diagonalizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorTag {
    Cosine,
    Sine,
    Funk,
    LogCosine,
    LogSine,
    DeltaOp,
    Beltrami,
    Composite(Vec<OperatorTag>),
}

impl OperatorTag {
    pub fn name(&self) -> String {
        match self {
            OperatorTag::Cosine => "cosine".into(),
            OperatorTag::Sine => "sine".into(),
            OperatorTag::Funk => "funk".into(),
            OperatorTag::LogCosine => "log-cosine".into(),
            OperatorTag::LogSine => "log-sine".into(),
            OperatorTag::DeltaOp => "delta-op".into(),
            OperatorTag::Beltrami => "beltrami".into(),
            OperatorTag::Composite(parts) => {
                let names: Vec<String> = parts.iter().map(|p| p.name()).collect();
                format!("composite({})", names.join("*"))
            }
        }
    }
}

/// Eigenvalues m[j], j = 0..=J, of an O(n)-invariant operator.
///
/// Kernel operators annihilate odd degrees, so their odd entries are zero.
/// Logarithmic operators are undefined on constants; `mean_excluded` marks
/// that the j = 0 entry is a placeholder and inputs must have zero mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierTable {
    pub tag: OperatorTag,
    pub n: usize,
    pub lambda: Option<Complex64>,
    pub ell: Option<u32>,
    pub values: Vec<Complex64>,
    pub mean_excluded: bool,
}

impl MultiplierTable {
    fn even_only<F>(tag: OperatorTag, n: usize, max_degree: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<Complex64>,
    {
        require_gate()?;
        require_dim(n)?;
        let values = (0..=max_degree)
            .map(|j| if j % 2 == 0 { f(j) } else { Ok(re(0.0)) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tag,
            n,
            lambda: None,
            ell: None,
            values,
            mean_excluded: false,
        })
    }

    pub fn cosine(n: usize, max_degree: usize, lambda: Complex64) -> Result<Self> {
        let mut t = Self::even_only(OperatorTag::Cosine, n, max_degree, |j| {
            cosine_multiplier(j, n, lambda)
        })?;
        t.lambda = Some(lambda);
        Ok(t)
    }

    pub fn sine(n: usize, max_degree: usize, lambda: Complex64) -> Result<Self> {
        let mut t = Self::even_only(OperatorTag::Sine, n, max_degree, |j| {
            sine_multiplier(j, n, lambda)
        })?;
        t.lambda = Some(lambda);
        Ok(t)
    }

    pub fn funk(n: usize, max_degree: usize) -> Result<Self> {
        Self::even_only(OperatorTag::Funk, n, max_degree, |j| Ok(re(funk_multiplier(j, n)?)))
    }

    pub fn log_cosine(n: usize, max_degree: usize) -> Result<Self> {
        let mut t = Self::even_only(OperatorTag::LogCosine, n, max_degree, |j| {
            if j == 0 {
                Ok(re(0.0))
            } else {
                Ok(re(log_cosine_multiplier(j, n)?))
            }
        })?;
        t.mean_excluded = true;
        Ok(t)
    }

    pub fn log_sine(n: usize, max_degree: usize) -> Result<Self> {
        let mut t = Self::even_only(OperatorTag::LogSine, n, max_degree, |j| {
            if j == 0 {
                Ok(re(0.0))
            } else {
                Ok(re(log_sine_multiplier(j, n)?))
            }
        })?;
        t.mean_excluded = true;
        Ok(t)
    }

    /// Δ_{λ,ℓ}; a polynomial in Δ_S, so every degree is populated.
    pub fn delta_op(n: usize, max_degree: usize, lambda: Complex64, ell: u32) -> Result<Self> {
        require_dim(n)?;
        let values = (0..=max_degree)
            .map(|j| delta_op_eigenvalue(j, n, lambda, ell as i64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tag: OperatorTag::DeltaOp,
            n,
            lambda: Some(lambda),
            ell: Some(ell),
            values,
            mean_excluded: false,
        })
    }

    pub fn beltrami(n: usize, max_degree: usize) -> Result<Self> {
        require_dim(n)?;
        Ok(Self {
            tag: OperatorTag::Beltrami,
            n,
            lambda: None,
            ell: None,
            values: (0..=max_degree).map(|j| re(beltrami_eigenvalue(j, n))).collect(),
            mean_excluded: false,
        })
    }

    /// Table of `self ∘ other` (the two commute).
    pub fn compose(&self, other: &MultiplierTable) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "cannot compose operators on S^{} and S^{}",
                self.n - 1,
                other.n - 1
            )));
        }
        let len = self.values.len().min(other.values.len());
        let mut parts = Vec::new();
        for t in [&self.tag, &other.tag] {
            match t {
                OperatorTag::Composite(p) => parts.extend(p.iter().cloned()),
                other => parts.push(other.clone()),
            }
        }
        Ok(Self {
            tag: OperatorTag::Composite(parts),
            n: self.n,
            lambda: None,
            ell: None,
            values: (0..len).map(|j| self.values[j] * other.values[j]).collect(),
            mean_excluded: self.mean_excluded || other.mean_excluded,
        })
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(mut self, c: Complex64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= c);
        self
    }

    pub fn max_degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> Option<Complex64> {
        self.values.get(j).copied()
    }
}

/// One comparison performed by the oracle gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCase {
    pub j: usize,
    pub n: usize,
    pub lambda: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub error: f64,
}

/// Outcome of comparing the closed-form cosine multiplier with quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub tolerance: f64,
    pub cases: Vec<GateCase>,
    pub passed: bool,
}

pub const GATE_DEGREES: [usize; 3] = [0, 2, 4];
pub const GATE_DIMENSIONS: [usize; 2] = [3, 4];
pub const GATE_LAMBDAS: [f64; 4] = [-0.5, 0.5, 1.0, 1.5];
pub const GATE_TOLERANCE: f64 = 1e-9;

fn run_gate() -> GateReport {
    let mut cases = Vec::new();
    let mut passed = true;
    for &n in &GATE_DIMENSIONS {
        for &lambda in &GATE_LAMBDAS {
            for &j in &GATE_DEGREES {
                let closed = cosine_multiplier(j, n, re(lambda));
                let quad = ZonalKernel::cosine(re(lambda), n)
                    .and_then(|k| funk_hecke_multiplier_quadrature(&k, j, n));
                let (closed_form, quadrature, error) = match (closed, quad) {
                    (Ok(a), Ok(b)) => (a.re, b.re, (a - b).norm() / b.norm().max(1.0)),
                    _ => (f64::NAN, f64::NAN, f64::INFINITY),
                };
                passed &= error <= GATE_TOLERANCE;
                cases.push(GateCase {
                    j,
                    n,
                    lambda,
                    closed_form,
                    quadrature,
                    error,
                });
            }
        }
    }
    GateReport {
        tolerance: GATE_TOLERANCE,
        cases,
        passed,
    }
}

/// The gate report, computed once per process.
pub fn oracle_gate() -> &'static GateReport {
    static GATE: OnceLock<GateReport> = OnceLock::new();
    GATE.get_or_init(run_gate)
}

/// Fails unless the closed-form multipliers passed the quadrature gate.
pub fn require_gate() -> Result<()> {
    let gate = oracle_gate();
    if gate.passed {
        return Ok(());
    }
    let worst = gate
        .cases
        .iter()
        .max_by(|a, b| a.error.total_cmp(&b.error))
        .expect("gate has cases");
    Err(Error::GateFailed(format!(
        "closed form and quadrature differ by {:e} at j={}, n={}, λ={}",
        worst.error, worst.j, worst.n, worst.lambda
    )))
}
