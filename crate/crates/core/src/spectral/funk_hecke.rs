//! Funk–Hecke multipliers by one-dimensional quadrature.
//!
//! For a kernel k(u·v) the operator f ↦ ∫ f(v) k(u·v) d_*v acts on degree-j
//! harmonics by
//!
//! ```text
//! m_j = A_n ∫_{-1}^{1} k(t) Z_j(t) (1 - t^2)^{(n-3)/2} dt,
//! A_n = Γ(n/2) / (√π Γ((n-1)/2)),
//! ```
//!
//! which is the pushforward of the probability measure on S^{n-1} under
//! v ↦ u·v. Singular kernel families are integrated with the singular factor
//! absorbed into a Gauss–Jacobi weight (power laws) or with a tanh-sinh rule
//! (logarithms).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::quadrature::{gauss_jacobi, tanh_sinh_unit};
use crate::spectral::zonal::zonal_profiles;
use crate::transforms::constants;

/// Where a kernel is singular and how.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singularity {
    /// Smooth on [-1, 1].
    None,
    /// Behaves like |t|^exponent at t = 0.
    AbsPower(Complex64),
    /// Behaves like (1 - t^2)^(exponent / 2) at t = ±1.
    SinePower(Complex64),
    /// Logarithmic singularity at t = 0.
    LogAtZero,
    /// Logarithmic singularity at t = ±1.
    LogAtEnds,
}

type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A zonal kernel t ↦ k(t) on [-1, 1] with a hint about its singularity.
#[derive(Clone)]
pub struct ZonalKernel {
    profile: Profile,
    singularity: Singularity,
}

impl std::fmt::Debug for ZonalKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZonalKernel")
            .field("singularity", &self.singularity)
            .finish_non_exhaustive()
    }
}

impl ZonalKernel {
    pub fn new<F>(profile: F, singularity: Singularity) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            profile: Arc::new(profile),
            singularity,
        }
    }

    pub fn smooth<F>(profile: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(profile, Singularity::None)
    }

    /// γ(λ) |t|^λ, the normalized cosine kernel.
    pub fn cosine(lambda: Complex64, n: usize) -> Result<Self> {
        let scale = constants::gamma_cosine(lambda, n)?;
        Ok(Self::new(
            move |t| scale * abs_pow(t.abs(), lambda),
            Singularity::AbsPower(lambda),
        ))
    }

    /// δ(λ) (1 - t^2)^{λ/2}, the normalized sine kernel.
    pub fn sine(lambda: Complex64, n: usize) -> Result<Self> {
        let scale = constants::delta_sine(lambda, n)?;
        Ok(Self::new(
            move |t| scale * abs_pow((1.0 - t) * (1.0 + t), lambda / 2.0),
            Singularity::SinePower(lambda),
        ))
    }

    /// (2 / Γ(n/2)) log(1 / |t|).
    pub fn log_cosine(n: usize) -> Self {
        let scale = 2.0 / gamma_real(n as f64 / 2.0);
        Self::new(
            move |t| Complex64::new(-scale * t.abs().ln(), 0.0),
            Singularity::LogAtZero,
        )
    }

    /// (2√π / (Γ(n/2) Γ((n-1)/2))) log(1 / sin θ), sin θ = √(1 - t^2): the
    /// λ → 0 limit of the sine kernel on mean-zero functions.
    pub fn log_sine(n: usize) -> Self {
        let nf = n as f64;
        let scale = PI.sqrt() / (gamma_real(nf / 2.0) * gamma_real((nf - 1.0) / 2.0));
        Self::new(
            move |t| Complex64::new(-scale * ((1.0 - t) * (1.0 + t)).ln(), 0.0),
            Singularity::LogAtEnds,
        )
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        (self.profile)(t)
    }

    pub fn singularity(&self) -> Singularity {
        self.singularity
    }
}

/// x^a for x > 0 and complex a; 0^a is taken as 0 (only reached at
/// quadrature-excluded points).
pub(crate) fn abs_pow(x: f64, a: Complex64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (a * x.ln()).exp()
}

/// Node counts of the one-dimensional rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalQuadrature {
    /// Gauss–Jacobi nodes per half-interval (or on [-1, 1] when unsplit).
    pub nodes: usize,
    /// Tanh-sinh level for logarithmic kernels.
    pub tanh_sinh_level: u32,
}

impl Default for ZonalQuadrature {
    fn default() -> Self {
        Self {
            nodes: 40,
            tanh_sinh_level: 6,
        }
    }
}

/// A_n, the density normalization of t = u·v under the probability measure.
pub fn pushforward_normalization(n: usize) -> f64 {
    let nf = n as f64;
    gamma_real(nf / 2.0) / (PI.sqrt() * gamma_real((nf - 1.0) / 2.0))
}

/// A_n ∫ k(t) g(t) (1 - t^2)^{(n-3)/2} dt.
pub fn zonal_integral<G>(
    kernel: &ZonalKernel,
    n: usize,
    g: G,
    rule: ZonalQuadrature,
) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    if n < 3 {
        return Err(Error::InvalidArgument(format!("dimension n = {n} must be at least 3")));
    }
    let a = 0.5 * (n as f64 - 3.0);
    let an = pushforward_normalization(n);
    let k = |t: f64| kernel.eval(t);
    let zero = Complex64::new(0.0, 0.0);

    let raw = match kernel.singularity {
        Singularity::None => return smooth_integral(&k, &g, a, an, rule.nodes),
        Singularity::AbsPower(lambda) => {
            let beta = lambda.re;
            if beta <= -1.0 {
                return Err(Error::Divergence(format!(
                    "|t|^λ with Re λ = {beta} is not integrable at t = 0"
                )));
            }
            // On [0, 1]: t = (1 + x)/2, weight (1+x)^β (1-x)^a.
            let r = gauss_jacobi(rule.nodes, a, beta)?;
            let scale = 0.5f64.powf(a + beta + 1.0);
            let mut acc = zero;
            for (x, w) in r.iter() {
                let t = 0.5 * (1.0 + x);
                let rest = (1.0 + t).powf(a) / t.powf(beta);
                acc += w * rest * (k(t) * g(t) + k(-t) * g(-t));
            }
            acc * scale
        }
        Singularity::SinePower(lambda) => {
            let e = 0.5 * lambda.re + a;
            if e <= -1.0 {
                return Err(Error::Divergence(format!(
                    "(1-t^2)^(λ/2) with Re λ = {} is not integrable for n = {n}",
                    lambda.re
                )));
            }
            let r = gauss_jacobi(rule.nodes, e, e)?;
            let mut acc = zero;
            for (x, w) in r.iter() {
                let s = (1.0 - x) * (1.0 + x);
                acc += w * k(x) * g(x) / s.powf(0.5 * lambda.re);
            }
            acc
        }
        Singularity::LogAtZero | Singularity::LogAtEnds => {
            // Fold onto (0, 1); tanh-sinh clusters nodes at both ends, where
            // the singularities sit after folding.
            let mut acc = zero;
            for node in tanh_sinh_unit(rule.tanh_sinh_level) {
                let t = node.t;
                let jac = (node.one_minus_t * (1.0 + t)).powf(a);
                let term = k(t) * g(t) + k(-t) * g(-t);
                if term.is_finite() && jac.is_finite() {
                    acc += node.weight * jac * term;
                }
            }
            acc
        }
    };
    Ok(raw * an)
}

fn smooth_integral<K, G>(k: &K, g: &G, a: f64, an: f64, nodes: usize) -> Result<Complex64>
where
    K: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let once = |count: usize| -> Result<Complex64> {
        let r = gauss_jacobi(count, a, a)?;
        Ok(r.iter().map(|(x, w)| w * k(x) * g(x)).sum::<Complex64>() * an)
    };
    let mut prev = once(nodes)?;
    let mut prev_diff = f64::INFINITY;
    let mut count = nodes;
    for _ in 0..4 {
        count *= 2;
        let next = once(count)?;
        let diff = (next - prev).norm();
        if !next.is_finite() {
            return Err(Error::Divergence("kernel quadrature produced a non-finite value".into()));
        }
        if diff <= 1e-12 * next.norm().max(1.0) {
            return Ok(next);
        }
        if diff >= prev_diff {
            return Err(Error::Divergence(format!(
                "quadrature refinement does not converge (successive differences {prev_diff:e}, {diff:e})"
            )));
        }
        prev_diff = diff;
        prev = next;
    }
    Err(Error::Divergence(format!(
        "quadrature refinement not converged after {count} nodes (last difference {prev_diff:e})"
    )))
}

/// Multiplier of the kernel operator on degree-j harmonics of S^{n-1}.
pub fn funk_hecke_multiplier_quadrature(kernel: &ZonalKernel, j: usize, n: usize) -> Result<Complex64> {
    zonal_integral(
        kernel,
        n,
        |t| Complex64::new(zonal_profiles(j, n, t.clamp(-1.0, 1.0))[j], 0.0),
        ZonalQuadrature::default(),
    )
}

/// γ(λ) A_n ∫ |t|^λ (1-t^2)^{(n-3)/2} dt through the Beta function.
#[cfg(test)]
pub(crate) fn cosine_mean_via_beta(lambda: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let beta = gamma_real((lambda + 1.0) / 2.0) * gamma_real((nf - 1.0) / 2.0)
        / gamma_real((lambda + nf) / 2.0);
    let l = Complex64::new(lambda, 0.0);
    constants::gamma_cosine(l, n).unwrap() * pushforward_normalization(n) * beta
}
