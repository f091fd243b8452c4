//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ruelle_bf_core::{CMatrix, Cx, Representation};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Label copied into every output row; defaults to the model kind.
    #[serde(default)]
    pub id: Option<String>,
    pub model: ModelSpec,
    #[serde(default)]
    pub rep: RepSpec,
    #[serde(default)]
    pub truncation: Truncation,
    /// Complex `λ` (zeta) or `ħ` (bridge, partition) values.
    #[serde(default)]
    pub grid: Vec<Complex>,
    /// Base point `λ0` of the orbit bridge.
    #[serde(default)]
    pub base_point: Option<Complex>,
    /// External fields `A`, `B` for chain diagrams.
    #[serde(default)]
    pub fields: Option<Fields>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ModelSpec {
    Catmap(CatmapSpec),
    SpectrumFile(PathBuf),
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatmapSpec {
    #[serde(rename = "A")]
    pub a: IntMatrix,
    #[serde(default = "one")]
    pub roof: f64,
}

fn one() -> f64 {
    1.0
}

/// Four integers, either flat row-major or as two rows.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntMatrix {
    Flat([i64; 4]),
    Rows([[i64; 2]; 2]),
}

impl IntMatrix {
    pub fn rows(&self) -> [[i64; 2]; 2] {
        match *self {
            IntMatrix::Flat([a, b, c, d]) => [[a, b], [c, d]],
            IntMatrix::Rows(r) => r,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub blocks: Vec<BlockSpec>,
}

/// One degree block, given by its generator `L` or by `d` and `iota`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub degree: i32,
    #[serde(default, rename = "L")]
    pub l: Option<Vec<Vec<Complex>>>,
    #[serde(default)]
    pub d: Option<Vec<Vec<Complex>>>,
    #[serde(default)]
    pub iota: Option<Vec<Vec<Complex>>>,
}

/// A number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl Complex {
    pub fn value(self) -> Cx<f64> {
        match self {
            Complex::Real(re) => Cx::new(re, 0.0),
            Complex::Pair([re, im]) => Cx::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum RepSpec {
    #[default]
    Trivial,
    Character(f64),
}

impl RepSpec {
    pub fn representation(self) -> Representation<f64> {
        match self {
            RepSpec::Trivial => Representation::Trivial,
            RepSpec::Character(theta) => Representation::Character(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default, rename = "L_max")]
    pub l_max: Option<f64>,
    #[serde(default, rename = "K")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    #[serde(rename = "A")]
    pub a: Vec<Complex>,
    #[serde(rename = "B")]
    pub b: Vec<Complex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

pub const DEFAULT_K: usize = 8;

impl RunConfig {
    /// Reads and validates a config; relative paths inside it resolve
    /// against the config's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let mut config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let at = e.path().to_string();
            CliError::Config(format!("config field `{at}`: {}", e.inner()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let ModelSpec::SpectrumFile(p) = &mut config.model {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(OutputSpec { path: Some(p), .. }) = &mut config.output {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Config(format!("config field `{field}`: {msg}")));
        if self.truncation.n_max == Some(0) {
            return bad("truncation.n_max", "must be positive");
        }
        if let Some(l) = self.truncation.l_max {
            if !(l > 0.0 && l.is_finite()) {
                return bad("truncation.L_max", "must be positive and finite");
            }
        }
        if self.truncation.k == Some(0) {
            return bad("truncation.K", "must be positive");
        }
        match &self.model {
            ModelSpec::Catmap(c) => {
                if !(c.roof > 0.0 && c.roof.is_finite()) {
                    return bad("model.catmap.roof", "must be positive and finite");
                }
                if let (Some(n), Some(l)) = (self.truncation.n_max, self.truncation.l_max) {
                    if l > f64::from(n) * c.roof * (1.0 + 1e-12) {
                        return bad("truncation.L_max", "exceeds n_max * roof; longer orbits would be missing");
                    }
                }
            }
            ModelSpec::SpectrumFile(_) => {
                if !matches!(self.rep, RepSpec::Trivial) {
                    return bad("rep", "spectrum files carry their own rho column");
                }
            }
            ModelSpec::Matrix(m) => {
                if m.blocks.is_empty() {
                    return bad("model.matrix.blocks", "needs at least one block");
                }
                for (i, b) in m.blocks.iter().enumerate() {
                    let ok = matches!((&b.l, &b.d, &b.iota), (Some(_), None, None) | (None, Some(_), Some(_)));
                    if !ok {
                        return bad(&format!("model.matrix.blocks[{i}]"), "give either L or both d and iota");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn model_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            match &self.model {
                ModelSpec::Catmap(_) => "catmap",
                ModelSpec::SpectrumFile(_) => "spectrum",
                ModelSpec::Matrix(_) => "matrix",
            }
            .to_string()
        })
    }

    pub fn k(&self) -> usize {
        self.truncation.k.unwrap_or(DEFAULT_K)
    }
}

pub fn matrix(rows: &[Vec<Complex>], field: &str) -> Result<CMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("config field `{field}`: must be a non-empty square matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}
