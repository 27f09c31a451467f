//! Experiment configuration: a flat TOML file of optional keys, overridden
//! key by key by command-line flags. Precedence: built-in defaults < config
//! file < flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Multipliers,
    Forward,
    Diffop,
    Invert,
    Convergence,
    StiefelCheck,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Multipliers => "multipliers",
            Subcommand::Forward => "forward",
            Subcommand::Diffop => "diffop",
            Subcommand::Invert => "invert",
            Subcommand::Convergence => "convergence",
            Subcommand::StiefelCheck => "stiefel-check",
        }
    }
}

/// Every knob of every subcommand. Unset keys take the subcommand's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    /// Band limit J.
    #[serde(default, rename = "J", skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_ceiling: Option<usize>,
    /// Main artifact; standard output when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Per-node CSV of `invert`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {}", e.message())))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Keys set in `top` replace those of `self`.
    pub fn merged(mut self, top: ExperimentConfig) -> Self {
        overlay!(
            self, top, subcommand, n, k, lambda, lambda_im, ell, max_degree, resolution, samples, seed, h,
            path, tolerance, operator, transform, input, theorem, identity, study, values, replicates,
            degree_ceiling, output, csv
        );
        self
    }

    /// SHA-256 of the canonical TOML form, output paths excluded.
    pub fn hash(&self) -> Result<String> {
        let canonical = ExperimentConfig {
            output: None,
            csv: None,
            ..self.clone()
        };
        Ok(hex::encode(Sha256::digest(canonical.to_toml_string()?.as_bytes())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_flat_file_and_rejects_unknown_keys() {
        let c = ExperimentConfig::from_toml_str("subcommand = \"stiefel-check\"\nn = 4\nJ = 8\nlambda = -1.5\n").unwrap();
        assert_eq!(c.subcommand, Some(Subcommand::StiefelCheck));
        assert_eq!((c.n, c.max_degree, c.lambda), (Some(4), Some(8), Some(-1.5)));
        assert!(matches!(ExperimentConfig::from_toml_str("bogus = 1"), Err(Error::Parse(_))));
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig {
            n: Some(4),
            seed: Some(3),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            n: Some(5),
            ..Default::default()
        };
        let m = file.merged(flags);
        assert_eq!((m.n, m.seed), (Some(5), Some(3)));
    }

    #[test]
    fn hash_ignores_output_paths() {
        let a = ExperimentConfig {
            n: Some(3),
            ..Default::default()
        };
        let b = ExperimentConfig {
            output: Some("x.csv".into()),
            ..a.clone()
        };
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = ExperimentConfig {
            n: Some(4),
            ..Default::default()
        };
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    proptest! {
        #[test]
        fn round_trips_through_toml(
            n in proptest::option::of(3usize..9),
            lambda in proptest::option::of(-1e6f64..1e6),
            lambda_im in proptest::option::of(any::<f64>().prop_filter("finite", |x| x.is_finite())),
            seed in proptest::option::of(any::<u32>()),
            values in proptest::option::of(proptest::collection::vec(-1e3f64..1e3, 0..5)),
            input in proptest::option::of("[a-z0-9=:,.-]{0,20}"),
        ) {
            let c = ExperimentConfig {
                subcommand: Some(Subcommand::Invert),
                n,
                lambda,
                lambda_im,
                seed: seed.map(u64::from),
                values,
                input,
                output: Some("out.json".into()),
                ..Default::default()
            };
            let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
