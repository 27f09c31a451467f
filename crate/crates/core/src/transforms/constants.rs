//! Normalizing constants of the transforms.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::{gamma_ratio, gamma_real, near_pole, rgamma};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn excluded(lambda: Complex64) -> Result<()> {
    let half = -lambda / 2.0;
    if let Some(p) = near_pole(half) {
        return Err(Error::pole(
            lambda,
            format!("λ = {} is in the excluded set {{0, 2, 4, ...}}", -2.0 * p),
        ));
    }
    Ok(())
}

/// γ(λ) = √π Γ(-λ/2) / (Γ(n/2) Γ((λ+1)/2)).
pub fn gamma_cosine(lambda: Complex64, n: usize) -> Result<Complex64> {
    gamma_k(lambda, n, 1)
}

/// δ(λ) = √π Γ(-λ/2) / (Γ(n/2) Γ((n-1+λ)/2)).
pub fn delta_sine(lambda: Complex64, n: usize) -> Result<Complex64> {
    gamma_k(lambda, n, n - 1)
}

/// γ_k(λ) = √π Γ(-λ/2) / (Γ(n/2) Γ((λ+k)/2)).
pub fn gamma_k(lambda: Complex64, n: usize, k: usize) -> Result<Complex64> {
    excluded(lambda)?;
    let ratio = gamma_ratio(-lambda / 2.0, (lambda + k as f64) / 2.0)?;
    Ok(PI.sqrt() * ratio / gamma_real(n as f64 / 2.0))
}

/// c_n = √π / Γ((n-1)/2).
pub fn funk_constant(n: usize) -> f64 {
    PI.sqrt() / gamma_real((n as f64 - 1.0) / 2.0)
}

/// c_{n,k} = Γ(k/2) / Γ((n-1)/2).
pub fn c_nk(n: usize, k: usize) -> f64 {
    gamma_real(k as f64 / 2.0) / gamma_real((n as f64 - 1.0) / 2.0)
}

/// μ_k = √π / Γ((n-k)/2).
pub fn mu_k(n: usize, k: usize) -> f64 {
    PI.sqrt() * rgamma(re((n as f64 - k as f64) / 2.0)).re
}

/// Γ((n+1)/2) / Γ(-1/2), the constant of the odd-dimensional 𝒞^1 inversion.
pub fn cosine1_odd_constant(n: usize) -> f64 {
    gamma_real((n as f64 + 1.0) / 2.0) / gamma_real(-0.5)
}
