//! Run configuration: a flat key-value TOML file mirroring the CLI options.
//!
//! ```toml
//! phi = "cross_entropy"        # cross_entropy | neg_half_sq_norm | diversity
//! scheme = "alpha_c"           # multiplicative | additive | alpha_c
//! alpha = 0.5
//! c = "one_over_alpha"         # or a number
//! v0 = 1.0
//! normalize_barycenter = true
//! ```

use std::path::{Path, PathBuf};

use fgp_core::genfun::{CrossEntropy, Diversity, GeneratingFunction, NegHalfSquaredNorm};
use fgp_core::strategy::GenerationScheme;
use serde::Deserialize;

use crate::report::ReportFormat;
use crate::CliError;

/// Named generation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Multiplicative,
    Additive,
    AlphaC,
}

/// The offset `C` of the `(α, C)` family: a number, or tied to `1/α`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CSpec {
    Value(f64),
    Keyword(String),
}

impl CSpec {
    pub fn resolve(&self, alpha: f64) -> Result<f64, CliError> {
        match self {
            CSpec::Value(c) => Ok(*c),
            CSpec::Keyword(word) if word == "one_over_alpha" => {
                if alpha <= 0.0 {
                    return Err(CliError::Config(
                        "c = \"one_over_alpha\" needs alpha > 0".into(),
                    ));
                }
                Ok(1.0 / alpha)
            }
            CSpec::Keyword(word) => Err(CliError::Config(format!(
                "unknown value for c: '{word}' (expected a number or \"one_over_alpha\")"
            ))),
        }
    }
}

fn default_v0() -> f64 {
    1.0
}

fn default_normalize() -> bool {
    true
}

/// Backtest/sweep configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub phi: String,
    #[serde(default)]
    pub pi: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<f64>,
    pub scheme: SchemeName,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub c: Option<CSpec>,
    #[serde(default = "default_v0")]
    pub v0: f64,
    #[serde(default = "default_normalize")]
    pub normalize_barycenter: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<ReportFormat>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Instantiates the generating function for an `n`-asset market.
    pub fn build_phi(&self, n: usize) -> Result<Box<dyn GeneratingFunction>, CliError> {
        build_phi(&self.phi, self.pi.as_deref(), self.lambda, n)
    }

    /// Builds the scheme for a plain run (`fgp run`).
    pub fn build_scheme(&self) -> Result<GenerationScheme, CliError> {
        match self.scheme {
            SchemeName::Multiplicative => Ok(GenerationScheme::multiplicative(self.v0)?),
            SchemeName::Additive => Ok(GenerationScheme::additive(self.v0)),
            SchemeName::AlphaC => {
                let alpha = self.alpha.ok_or_else(|| {
                    CliError::Config("scheme = \"alpha_c\" requires alpha".into())
                })?;
                let c = self
                    .c
                    .clone()
                    .unwrap_or_else(|| CSpec::Keyword("one_over_alpha".into()))
                    .resolve(alpha)?;
                Ok(GenerationScheme::alpha_c(alpha, c, self.v0)?)
            }
        }
    }
}

/// Builtin selection by name + parameters.
pub fn build_phi(
    name: &str,
    pi: Option<&[f64]>,
    lambda: Option<f64>,
    n: usize,
) -> Result<Box<dyn GeneratingFunction>, CliError> {
    match name {
        "cross_entropy" => {
            let phi = match pi {
                Some(weights) => {
                    if weights.len() != n {
                        return Err(CliError::Config(format!(
                            "pi has {} components but the data has {} assets",
                            weights.len(),
                            n
                        )));
                    }
                    CrossEntropy::new(weights.to_vec())?
                }
                None => CrossEntropy::equal_weight(n),
            };
            Ok(Box::new(phi))
        }
        "neg_half_sq_norm" => Ok(Box::new(NegHalfSquaredNorm)),
        "diversity" => {
            let lambda = lambda.ok_or_else(|| {
                CliError::Config("phi = \"diversity\" requires lambda in (0, 1)".into())
            })?;
            Ok(Box::new(Diversity::new(lambda)?))
        }
        other => Err(CliError::Config(format!(
            "unknown generating function '{other}' \
             (expected cross_entropy, neg_half_sq_norm or diversity)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fgp_core::strategy::SchemeKind;
    use std::io::Write;

    fn write_config(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn parses_full_config() {
        let file = write_config(
            "phi = \"cross_entropy\"\nscheme = \"alpha_c\"\nalpha = 0.5\n\
             c = \"one_over_alpha\"\nv0 = 1.0\nnormalize_barycenter = true\n\
             format = \"json\"\n",
        );
        let config = RunConfig::from_path(file.path()).unwrap();
        let scheme = config.build_scheme().unwrap();
        assert_eq!(
            scheme.kind,
            SchemeKind::AlphaC {
                alpha: 0.5,
                c: 2.0
            }
        );
        assert_eq!(config.format, Some(ReportFormat::Json));
        let phi = config.build_phi(3).unwrap();
        assert_eq!(phi.name(), "cross_entropy");
    }

    #[test]
    fn parses_numeric_c_and_defaults() {
        let file = write_config("phi = \"neg_half_sq_norm\"\nscheme = \"alpha_c\"\nalpha = 1.0\nc = 0.0\n");
        let config = RunConfig::from_path(file.path()).unwrap();
        assert_eq!(config.v0, 1.0);
        assert!(config.normalize_barycenter);
        let scheme = config.build_scheme().unwrap();
        assert_eq!(scheme.kind, SchemeKind::AlphaC { alpha: 1.0, c: 0.0 });
    }

    #[test]
    fn rejects_bad_inputs() {
        let file = write_config("phi = \"cross_entropy\"\nscheme = \"martingale\"\n");
        assert!(RunConfig::from_path(file.path()).is_err());

        let file = write_config("phi = \"cross_entropy\"\nscheme = \"alpha_c\"\n");
        let config = RunConfig::from_path(file.path()).unwrap();
        assert!(config.build_scheme().is_err());

        assert!(build_phi("diversity", None, None, 3).is_err());
        assert!(build_phi("entropy", None, None, 3).is_err());
        assert!(build_phi("cross_entropy", Some(&[0.5, 0.5]), None, 3).is_err());
    }
}
