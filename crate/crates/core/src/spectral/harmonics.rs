//! Real spherical harmonics on S^2, orthonormal for the probability measure.
//!
//! Y_{j,m} = Pbar_{j,|m|}(cos θ) · {cos mφ for m >= 0, sin |m|φ for m < 0},
//! with Pbar the 4π-normalized associated Legendre functions (no
//! Condon–Shortley phase). Coefficients of degree j sit at `j*j + j + m`.

/// Index of (j, m) in a flat coefficient table.
pub fn index(j: usize, m: i64) -> usize {
    ((j * j + j) as i64 + m) as usize
}

/// Number of (j, m) pairs with j <= max_degree.
pub fn table_len(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

/// Every Y_{j,m}(v) with j <= max_degree, for a unit vector v in R^3.
pub fn real_harmonics(max_degree: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; table_len(max_degree)];
    fill_real_harmonics(max_degree, v, &mut out);
    out
}

/// In-place version of [`real_harmonics`]; `out` must have
/// `table_len(max_degree)` entries.
pub fn fill_real_harmonics(max_degree: usize, v: &[f64], out: &mut [f64]) {
    let (x, y, t) = (v[0], v[1], v[2]);
    let s = x.hypot(y);
    let (c1, s1) = if s > 0.0 { (x / s, y / s) } else { (1.0, 0.0) };
    let lmax = max_degree;

    // cos(mφ), sin(mφ)
    let mut cos_m = vec![1.0; lmax + 1];
    let mut sin_m = vec![0.0; lmax + 1];
    for m in 1..=lmax {
        cos_m[m] = cos_m[m - 1] * c1 - sin_m[m - 1] * s1;
        sin_m[m] = sin_m[m - 1] * c1 + cos_m[m - 1] * s1;
    }

    // Sectoral seeds Pbar_{m,m}
    let mut diag = vec![0.0; lmax + 1];
    diag[0] = 1.0;
    if lmax >= 1 {
        diag[1] = 3f64.sqrt() * s;
    }
    for m in 2..=lmax {
        let mf = m as f64;
        diag[m] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * diag[m - 1];
    }

    for m in 0..=lmax {
        let mf = m as f64;
        let mut p_prev = 0.0;
        let mut p = diag[m];
        for j in m..=lmax {
            if j == m + 1 {
                let next = (2.0 * mf + 3.0).sqrt() * t * diag[m];
                p_prev = p;
                p = next;
            } else if j > m + 1 {
                let jf = j as f64;
                let a = ((2.0 * jf - 1.0) * (2.0 * jf + 1.0) / ((jf - mf) * (jf + mf))).sqrt();
                let b = ((2.0 * jf + 1.0) * (jf + mf - 1.0) * (jf - mf - 1.0)
                    / ((jf - mf) * (jf + mf) * (2.0 * jf - 3.0)))
                    .sqrt();
                let next = a * t * p - b * p_prev;
                p_prev = p;
                p = next;
            }
            if m == 0 {
                out[index(j, 0)] = p;
            } else {
                out[index(j, m as i64)] = p * cos_m[m];
                out[index(j, -(m as i64))] = p * sin_m[m];
            }
        }
    }
}
