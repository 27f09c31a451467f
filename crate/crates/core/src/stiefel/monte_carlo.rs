//! Monte-Carlo dual transforms.
//!
//! F*_k φ(v) averages φ over Haar frames of v^⊥. 𝒞*^λ_k φ(v) is stratified
//! in s = |uᵀv|²: Gauss–Jacobi nodes carry the weight of |uᵀv|^λ, and at
//! each node the conditional law of u given uᵀv = √s·a is sampled exactly,
//!
//!   u = √s·v aᵀ + C W M,   M = I + (√(1-s) - 1) a aᵀ,
//!
//! with a uniform on S^{k-1}, W Haar on V_{n-1,k} and C a basis of v^⊥.
//!
//! Sampling runs in fixed-size chunks, each with its own ChaCha stream, and
//! chunk statistics are merged pairwise in a fixed order, so results do not
//! depend on the number of worker threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{haar_matrix, Frame, RadialRule, StiefelFunction};
use crate::error::{Error, Result};
use crate::sphere::Direction;
use crate::transforms::constants::gamma_k;

pub const MIN_SAMPLES: usize = 100;
/// Gauss–Jacobi strata of the dual cosine transform.
pub const DUAL_STRATA: usize = 12;
const CHUNK: usize = 1000;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    count: usize,
    mean: Complex64,
    m2: f64,
}

impl Stats {
    const EMPTY: Self = Self {
        count: 0,
        mean: Complex64::new(0.0, 0.0),
        m2: 0.0,
    };

    fn push(&mut self, x: Complex64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += (d.conj() * (x - self.mean)).re;
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let count = a.count + b.count;
        let d = b.mean - a.mean;
        let wb = b.count as f64 / count as f64;
        Self {
            count,
            mean: a.mean + d * wb,
            m2: a.m2 + b.m2 + d.norm_sqr() * a.count as f64 * wb,
        }
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

fn pairwise(stats: &[Stats]) -> Stats {
    match stats.len() {
        0 => Stats::EMPTY,
        1 => stats[0],
        len => Stats::merge(pairwise(&stats[..len / 2]), pairwise(&stats[len / 2..])),
    }
}

/// Runs `draw` `samples` times on independent substreams of `seed`.
fn sample<F>(samples: usize, seed: u64, stream: u64, draw: F) -> Stats
where
    F: Fn(&mut ChaCha8Rng) -> Complex64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let stats: Vec<Stats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((stream << 32) | c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut s = Stats::EMPTY;
            for _ in 0..len {
                s.push(draw(&mut rng));
            }
            s
        })
        .collect();
    pairwise(&stats)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    Ok(())
}

/// n×(n-1) matrix whose columns span v^⊥.
fn complement(v: &Direction) -> Result<DMatrix<f64>> {
    let n = v.dim();
    let frame = Frame::new(DMatrix::from_column_slice(n, 1, v.as_slice()))?;
    let basis = frame.null_basis();
    Ok(DMatrix::from_fn(n, n - 1, |i, j| basis[j][i]))
}

fn check_pair(phi: &StiefelFunction, v: &Direction) -> Result<()> {
    if phi.n() != v.dim() {
        return Err(Error::InvalidArgument(format!(
            "frame function on V_{{{},{}}} evaluated at a point of S^{}",
            phi.n(),
            phi.k(),
            v.dim() - 1
        )));
    }
    Ok(())
}

/// F*_k φ(v) by Haar sampling of frames in v^⊥. `stream` separates
/// independent estimates drawn from one seed.
pub fn dual_funk_k(phi: &StiefelFunction, v: &Direction, samples: usize, seed: u64, stream: u64) -> Result<McEstimate> {
    check_pair(phi, v)?;
    check_samples(samples)?;
    let c = complement(v)?;
    let (n, k) = (phi.n(), phi.k());
    let stats = sample(samples, seed, stream, |rng| {
        let w = haar_matrix(n - 1, k, rng);
        phi.eval(&Frame::from_matrix_unchecked(&c * w))
    });
    Ok(McEstimate {
        mean: stats.mean,
        std_error: (stats.variance() / samples as f64).sqrt(),
        samples,
    })
}

fn unit_vector<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let r = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-12 {
            return a.into_iter().map(|x| x / r).collect();
        }
    }
}

/// 𝒞*^λ_k φ(v), Re λ > -k, stratified over |uᵀv|².
pub fn dual_cosine_k(
    phi: &StiefelFunction,
    v: &Direction,
    lambda: Complex64,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<McEstimate> {
    check_pair(phi, v)?;
    check_samples(samples)?;
    let (n, k) = (phi.n(), phi.k());
    let gamma = gamma_k(lambda, n, k)?;
    let radial = RadialRule::new(n, k, lambda, DUAL_STRATA)?;
    let c = complement(v)?;
    let vcol = DMatrix::from_column_slice(n, 1, v.as_slice());
    let mut mean = Complex64::new(0.0, 0.0);
    let mut var = 0.0;
    for (i, (&s, &w)) in radial.nodes.iter().zip(&radial.weights).enumerate() {
        let count = samples / DUAL_STRATA + usize::from(i < samples % DUAL_STRATA);
        let (r, q) = (s.sqrt(), (1.0 - s).max(0.0).sqrt());
        let stats = sample(count, seed, (stream << 8) | i as u64, |rng| {
            let a = DMatrix::from_vec(k, 1, unit_vector(k, rng));
            let m = DMatrix::<f64>::identity(k, k) + (&a * a.transpose()) * (q - 1.0);
            let u = &vcol * a.transpose() * r + &c * haar_matrix(n - 1, k, rng) * m;
            phi.eval(&Frame::from_matrix_unchecked(u))
        });
        mean += w * stats.mean;
        var += w.norm_sqr() * stats.variance() / count as f64;
    }
    Ok(McEstimate {
        mean: gamma * mean,
        std_error: gamma.norm() * var.sqrt(),
        samples,
    })
}
