//! Input functions named on the command line:
//!
//!   zonal:j=<j>,pole=<x,y,...>   degree-j zonal harmonic (pole defaults to the last axis)
//!   const:<c>                    constant
//!   random-even:J=<J>,seed=<s>   random even band-limited function
//!
//! Random functions are full expansions on S^2 and zonal about a random pole
//! for n > 3, with coefficients uniform in [-1, 1] scaled by 1/(j+1).

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{harmonics, synthesize, HarmonicSpectrum};
use crate::sphere::{Band, Direction, GridFunction, QuadratureGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Zonal { degree: usize, pole: Option<Vec<f64>> },
    Const(f64),
    RandomEven { max_degree: usize, seed: Option<u64> },
}

fn bad(text: &str, why: &str) -> Error {
    Error::Parse(format!("function spec '{text}': {why}"))
}

/// `key=a,b,key2=c` into (key, [values]) pairs; bare items extend the
/// previous key.
fn key_values(body: &str, text: &str) -> Result<Vec<(String, Vec<String>)>> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), vec![v.trim().to_string()])),
            None => match out.last_mut() {
                Some((_, vs)) => vs.push(item.to_string()),
                None => return Err(bad(text, "expected key=value")),
            },
        }
    }
    Ok(out)
}

fn scalar<T: FromStr>(values: &[String], key: &str, text: &str) -> Result<T> {
    match values {
        [v] => v.parse().map_err(|_| bad(text, &format!("bad value for {key}"))),
        _ => Err(bad(text, &format!("{key} takes one value"))),
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (kind, body) = text.split_once(':').unwrap_or((text, ""));
        match kind.trim() {
            "const" => body
                .trim()
                .parse()
                .map(FunctionSpec::Const)
                .map_err(|_| bad(text, "const needs a number")),
            "zonal" => {
                let (mut degree, mut pole) = (None, None);
                for (k, vs) in key_values(body, text)? {
                    match k.as_str() {
                        "j" => degree = Some(scalar(&vs, "j", text)?),
                        "pole" => {
                            pole = Some(
                                vs.iter()
                                    .map(|v| v.parse::<f64>().map_err(|_| bad(text, "bad pole coordinate")))
                                    .collect::<Result<Vec<_>>>()?,
                            )
                        }
                        other => return Err(bad(text, &format!("unknown key '{other}'"))),
                    }
                }
                Ok(FunctionSpec::Zonal {
                    degree: degree.ok_or_else(|| bad(text, "zonal needs j"))?,
                    pole,
                })
            }
            "random-even" => {
                let (mut max_degree, mut seed) = (None, None);
                for (k, vs) in key_values(body, text)? {
                    match k.as_str() {
                        "J" => max_degree = Some(scalar(&vs, "J", text)?),
                        "seed" => seed = Some(scalar(&vs, "seed", text)?),
                        other => return Err(bad(text, &format!("unknown key '{other}'"))),
                    }
                }
                Ok(FunctionSpec::RandomEven {
                    max_degree: max_degree.ok_or_else(|| bad(text, "random-even needs J"))?,
                    seed,
                })
            }
            other => Err(bad(text, &format!("unknown kind '{other}'"))),
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Random even band-limited expansion on S^{n-1}.
pub fn random_even_spectrum(n: usize, max_degree: usize, seed: u64) -> Result<HarmonicSpectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeff = |j: usize, rng: &mut ChaCha8Rng| {
        let c = rng.random_range(-1.0..1.0) / (j as f64 + 1.0);
        if j.is_multiple_of(2) {
            re(c)
        } else {
            re(0.0)
        }
    };
    if n == 3 {
        let coeffs = (0..=max_degree)
            .flat_map(|j| std::iter::repeat_n(j, 2 * j + 1))
            .map(|j| coeff(j, &mut rng))
            .collect::<Vec<_>>();
        debug_assert_eq!(coeffs.len(), harmonics::table_len(max_degree));
        HarmonicSpectrum::full(max_degree, coeffs)
    } else {
        let pole: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let coeffs = (0..=max_degree).map(|j| coeff(j, &mut rng)).collect();
        HarmonicSpectrum::zonal(Direction::new(pole)?, coeffs)
    }
}

impl FunctionSpec {
    /// Band limit of the function.
    pub fn band_limit(&self) -> usize {
        match self {
            FunctionSpec::Zonal { degree, .. } => *degree,
            FunctionSpec::Const(_) => 0,
            FunctionSpec::RandomEven { max_degree, .. } => *max_degree,
        }
    }

    /// Harmonic expansion on S^{n-1}; `default_seed` serves random specs
    /// without an explicit seed.
    pub fn spectrum(&self, n: usize, default_seed: u64) -> Result<HarmonicSpectrum> {
        match self {
            FunctionSpec::Zonal { degree, pole } => {
                let pole = match pole {
                    Some(p) if p.len() != n => {
                        return Err(Error::InvalidArgument(format!(
                            "pole has {} coordinates, expected {n}",
                            p.len()
                        )))
                    }
                    Some(p) => Direction::new(p.clone())?,
                    None => Direction::axis(n, n - 1),
                };
                let coeffs = (0..=*degree).map(|j| if j == *degree { re(1.0) } else { re(0.0) }).collect();
                HarmonicSpectrum::zonal(pole, coeffs)
            }
            FunctionSpec::Const(c) => HarmonicSpectrum::zonal(Direction::axis(n, 0), vec![re(*c)]),
            FunctionSpec::RandomEven { max_degree, seed } => {
                random_even_spectrum(n, *max_degree, seed.unwrap_or(default_seed))
            }
        }
    }

    /// Samples on `grid`, carrying the band annotation.
    pub fn sample(&self, grid: &Arc<QuadratureGrid>, default_seed: u64) -> Result<GridFunction> {
        if let FunctionSpec::Const(c) = self {
            return Ok(GridFunction::constant(Arc::clone(grid), re(*c)).with_band(Band {
                max_degree: 0,
                pole: None,
            }));
        }
        synthesize(&self.spectrum(grid.dim(), default_seed)?, grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;

    #[test]
    fn parses_the_three_kinds() {
        assert_eq!(
            "zonal:j=4,pole=0,0.6,0.8".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Zonal {
                degree: 4,
                pole: Some(vec![0.0, 0.6, 0.8])
            }
        );
        assert_eq!("zonal:j=2".parse::<FunctionSpec>().unwrap(), FunctionSpec::Zonal { degree: 2, pole: None });
        assert_eq!("const:2.5".parse::<FunctionSpec>().unwrap(), FunctionSpec::Const(2.5));
        assert_eq!(
            "random-even:J=6,seed=7".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::RandomEven {
                max_degree: 6,
                seed: Some(7)
            }
        );
        for bad in ["zonal:pole=1,0,0", "const:x", "random-even:seed=1", "cubic:j=1", "zonal:j=2,q=1"] {
            assert!(matches!(bad.parse::<FunctionSpec>(), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn random_even_is_even_and_seeded() {
        for n in [3, 4] {
            let a = random_even_spectrum(n, 6, 9).unwrap();
            assert_eq!(a, random_even_spectrum(n, 6, 9).unwrap());
            assert_ne!(a, random_even_spectrum(n, 6, 10).unwrap());
            assert_eq!(a.odd_norm(), 0.0);
        }
    }

    #[test]
    fn samples_carry_band() {
        let grid = Arc::new(build_grid(4, 6).unwrap());
        let f = "zonal:j=2".parse::<FunctionSpec>().unwrap().sample(&grid, 1).unwrap();
        assert_eq!(f.band().unwrap().max_degree, 2);
        let c = FunctionSpec::Const(3.0).sample(&grid, 1).unwrap();
        assert!(c.values().iter().all(|v| *v == re(3.0)));
        assert!(matches!(
            FunctionSpec::Zonal { degree: 2, pole: Some(vec![1.0, 0.0]) }.sample(&grid, 1),
            Err(Error::InvalidArgument(_))
        ));
    }
}
