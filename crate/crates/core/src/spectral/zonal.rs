//! Zonal profiles: Gegenbauer polynomials normalized to 1 at t = 1.

use crate::error::{Error, Result};

/// Degree-j zonal profile on S^{n-1}, C_j^{(n-2)/2}(t) / C_j^{(n-2)/2}(1)
/// (the Legendre polynomial for n = 3).
pub fn zonal_eval(j: usize, n: usize, t: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("dimension n = {n} must be at least 3")));
    }
    if t.is_nan() || t.abs() > 1.0 {
        return Err(Error::Domain(format!("zonal argument {t} outside [-1, 1]")));
    }
    Ok(zonal_profiles(j, n, t)[j])
}

/// All profiles of degree 0..=max_degree at `t`. No domain check; `t` may be
/// slightly outside [-1, 1] from rounding.
pub fn zonal_profiles(max_degree: usize, n: usize, t: f64) -> Vec<f64> {
    let two_alpha = n as f64 - 2.0;
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0);
    if max_degree >= 1 {
        out.push(t);
    }
    for j in 1..max_degree {
        let jf = j as f64;
        let next = ((2.0 * jf + two_alpha) * t * out[j] - jf * out[j - 1]) / (jf + two_alpha);
        out.push(next);
    }
    out
}

/// Dimension of the space of degree-j spherical harmonics on S^{n-1}.
pub fn harmonic_dimension(j: usize, n: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    // (2j + n - 2) / (n - 2) * C(j + n - 3, j)
    let mut binom = 1.0;
    for i in 1..=j {
        binom *= (i + n - 3) as f64 / i as f64;
    }
    (2 * j + n - 2) as f64 / (n - 2) as f64 * binom
}
