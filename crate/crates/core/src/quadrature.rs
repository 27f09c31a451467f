//! One-dimensional rules and product rules on spheres of any dimension.
//!
//! Gauss–Jacobi nodes come from the Golub–Welsch eigenproblem of the Jacobi
//! matrix; this module also symmetrizes them, normalizes weights to
//! probability measures and assembles them into hyperspherical product rules.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss–Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1].
/// Weights integrate the weight function itself (they are not normalized).
/// Nodes are returned in ascending order.
pub fn gauss_jacobi(count: usize, alpha: f64, beta: f64) -> Result<Rule1D> {
    if count == 0 {
        return Err(Error::InvalidArgument("quadrature rule needs at least one node".into()));
    }
    for (name, e) in [("alpha", alpha), ("beta", beta)] {
        if !e.is_finite() || e <= -1.0 {
            return Err(Error::Divergence(format!("Jacobi exponent {name} = {e} must exceed -1")));
        }
    }
    let (a, b) = (alpha, beta);
    let mut jacobi = DMatrix::<f64>::zeros(count, count);
    for i in 0..count {
        let s = 2.0 * i as f64 + a + b;
        jacobi[(i, i)] = if i == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if i + 1 < count {
            let m = (i + 1) as f64;
            let s = 2.0 * m + a + b;
            let sq = if i == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / (s * s * (s + 1.0))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            jacobi[(i, i + 1)] = sq.sqrt();
            jacobi[(i + 1, i)] = sq.sqrt();
        }
    }
    let mass = 2f64.powf(a + b + 1.0) * crate::gamma::gamma_real(a + 1.0) * crate::gamma::gamma_real(b + 1.0)
        / crate::gamma::gamma_real(a + b + 2.0);
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(Rule1D { nodes, weights })
}

/// Gauss–Gegenbauer rule for (1-x^2)^a, made exactly symmetric under x -> -x
/// and normalized to total weight 1.
pub fn symmetric_probability_rule(count: usize, a: f64) -> Result<Rule1D> {
    let mut rule = gauss_jacobi(count, a, a)?;
    let n = rule.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        let w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if n % 2 == 1 {
        rule.nodes[n / 2] = 0.0;
    }
    let total: f64 = rule.weights.iter().sum();
    rule.weights.iter_mut().for_each(|w| *w /= total);
    Ok(rule)
}

/// A tanh-sinh node on the unit interval. `t` and `1 - t` are both stored so
/// integrands with endpoint singularities can be evaluated without
/// cancellation.
#[derive(Debug, Clone, Copy)]
pub struct TanhSinhNode {
    pub t: f64,
    pub one_minus_t: f64,
    pub weight: f64,
}

/// Double-exponential rule on (0, 1) with step 2^-level. Integrable
/// algebraic or logarithmic endpoint singularities are handled with
/// near-machine accuracy from level 5 or so.
pub fn tanh_sinh_unit(level: u32) -> Vec<TanhSinhNode> {
    let h = 0.5f64.powi(level as i32);
    let mut out = Vec::new();
    let mut push = |k: i64| -> bool {
        let s = k as f64 * h;
        let u = 0.5 * PI * s.sinh();
        let weight = h * 0.5 * PI * s.cosh() / (2.0 * u.cosh().powi(2));
        let (t, one_minus_t) = if u >= 0.0 {
            let e = (-2.0 * u).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = (2.0 * u).exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if weight < 1e-300 || t <= 0.0 || one_minus_t <= 0.0 {
            return false;
        }
        out.push(TanhSinhNode {
            t,
            one_minus_t,
            weight,
        });
        true
    };
    push(0);
    for k in 1.. {
        let a = push(k);
        let b = push(-k);
        if !a && !b {
            break;
        }
    }
    out
}

/// Product rule on the unit sphere S^{m-1} in R^m, m >= 1, normalized to the
/// invariant probability measure. Coordinates are laid out as
/// `(sqrt(1 - t^2) w, t)` with `t` the last coordinate and `w` a node of the
/// rule on S^{m-2}; the base cases are {+1, -1} (m = 1) and the equispaced
/// circle (m = 2).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    ambient: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    exactness: usize,
}

impl SphereRule {
    /// `polar` Gauss nodes per polar angle and `2 * polar` circle nodes.
    pub fn product(ambient: usize, polar: usize) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::InvalidArgument("sphere dimension must be positive".into()));
        }
        if polar == 0 {
            return Err(Error::InvalidArgument("rule needs at least one polar node".into()));
        }
        match ambient {
            1 => Ok(Self {
                ambient,
                coords: vec![1.0, -1.0],
                weights: vec![0.5, 0.5],
                antipode: vec![1, 0],
                exactness: usize::MAX,
            }),
            2 => {
                let m = 2 * polar;
                let mut coords = Vec::with_capacity(2 * m);
                for k in 0..m {
                    let phi = 2.0 * PI * k as f64 / m as f64;
                    let (s, c) = phi.sin_cos();
                    coords.extend_from_slice(&[c, s]);
                }
                Ok(Self {
                    ambient,
                    coords,
                    weights: vec![1.0 / m as f64; m],
                    antipode: (0..m).map(|k| (k + polar) % m).collect(),
                    exactness: m - 1,
                })
            }
            _ => {
                let sub = Self::product(ambient - 1, polar)?;
                let rule = symmetric_probability_rule(polar, 0.5 * (ambient as f64 - 3.0))?;
                let sub_len = sub.len();
                let mut coords = Vec::with_capacity(rule.len() * sub_len * ambient);
                let mut weights = Vec::with_capacity(rule.len() * sub_len);
                let mut antipode = Vec::with_capacity(rule.len() * sub_len);
                for (i, (t, wt)) in rule.iter().enumerate() {
                    let s = ((1.0 - t) * (1.0 + t)).sqrt();
                    for q in 0..sub_len {
                        coords.extend(sub.node(q).iter().map(|x| s * x));
                        coords.push(t);
                        weights.push(wt * sub.weights[q]);
                        antipode.push((polar - 1 - i) * sub_len + sub.antipode[q]);
                    }
                }
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                Ok(Self {
                    ambient,
                    coords,
                    weights,
                    antipode,
                    exactness: 2 * polar - 1,
                })
            }
        }
    }

    /// Smallest product rule integrating every polynomial of total degree
    /// `degree` exactly.
    pub fn with_exactness(ambient: usize, degree: usize) -> Result<Self> {
        Self::product(ambient, (degree + 1).div_ceil(2).max(1))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn antipodes(&self) -> &[usize] {
        &self.antipode
    }

    /// Polynomial exactness degree (`usize::MAX` for S^0).
    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.ambient)
            .zip(self.weights.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_rule_integrates_weighted_monomials() {
        // ∫_{-1}^{1} (1+x)^{-1/2} dx = 2√2
        let r = gauss_jacobi(12, 0.0, -0.5).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn jacobi_rule_is_exact_for_odd_counts_and_unequal_exponents() {
        use crate::gamma::gamma_real;
        // ∫ (1-x)^a (1+x)^(b+p) dx = 2^(a+b+p+1) B(a+1, b+p+1)
        for (a, b) in [(0.5, 0.0), (-0.5, 0.0), (0.0, -0.5), (1.0, 0.3), (0.25, -0.75)] {
            for count in 1..10 {
                let r = gauss_jacobi(count, a, b).unwrap();
                for p in 0..2 * count {
                    let pf = p as f64;
                    let exact = 2f64.powf(a + b + pf + 1.0) * gamma_real(a + 1.0) * gamma_real(b + pf + 1.0)
                        / gamma_real(a + b + pf + 2.0);
                    let got: f64 = r.iter().map(|(x, w)| w * (1.0 + x).powi(p as i32)).sum();
                    assert!((got - exact).abs() < 1e-13 * exact.max(1.0), "a={a} b={b} count={count} p={p}");
                }
            }
        }
    }

    #[test]
    fn jacobi_rejects_nonintegrable_weight() {
        assert!(matches!(gauss_jacobi(4, -1.0, 0.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn symmetric_rule_is_symmetric() {
        let r = symmetric_probability_rule(7, 0.5).unwrap();
        for i in 0..7 {
            assert_eq!(r.nodes[i], -r.nodes[6 - i]);
            assert_eq!(r.weights[i], r.weights[6 - i]);
        }
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tanh_sinh_handles_log_singularity() {
        // ∫_0^1 log(1/t) t^2 dt = 1/9
        let v: f64 = tanh_sinh_unit(6)
            .iter()
            .map(|n| n.weight * (-n.t.ln()) * n.t * n.t)
            .sum();
        assert!((v - 1.0 / 9.0).abs() < 1e-14, "{v}");
        // ∫_0^1 (1-t)^{-1/2} dt = 2
        let v: f64 = tanh_sinh_unit(6)
            .iter()
            .map(|n| n.weight / n.one_minus_t.sqrt())
            .sum();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn sphere_rules_are_probability_measures() {
        for m in 1..=5 {
            let r = SphereRule::product(m, 4).unwrap();
            assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for (v, _) in r.iter() {
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sphere_rule_antipodes() {
        for m in 1..=5 {
            let r = SphereRule::product(m, 3).unwrap();
            for i in 0..r.len() {
                let j = r.antipodes()[i];
                assert_eq!(r.antipodes()[j], i);
                assert_eq!(r.weights()[i], r.weights()[j]);
                for (a, b) in r.node(i).iter().zip(r.node(j)) {
                    assert!((a + b).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn sphere_moments() {
        // E[x_1^2] = 1/m and E[x_1^4] = 3/(m(m+2)) under the uniform measure
        for m in 2..=5 {
            let r = SphereRule::with_exactness(m, 4).unwrap();
            let m2: f64 = r.iter().map(|(v, w)| w * v[0].powi(2)).sum();
            let m4: f64 = r.iter().map(|(v, w)| w * v[0].powi(4)).sum();
            let mf = m as f64;
            assert!((m2 - 1.0 / mf).abs() < 1e-14, "m={m}");
            assert!((m4 - 3.0 / (mf * (mf + 2.0))).abs() < 1e-14, "m={m}");
        }
    }
}
