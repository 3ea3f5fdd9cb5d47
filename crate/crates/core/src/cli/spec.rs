//! JSON documents describing cells, codebooks and strategies.

use num_complex::Complex64;
use serde::Deserialize;

use crate::channels::{erasure_corrections, weyl_corrections, EnvParamCell, GroupRepresentation, KrausChannel, MemoryCell};
use crate::error::{check_range, Error, Result};
use crate::gaussian::ThermalEnsemble;
use crate::linalg::{CMatrix, DensityOperator};
use crate::protocol::{AdaptiveStrategy, Codebook, Decoder, Povm};

/// Complex matrix as parallel row-major real and imaginary arrays; `im` defaults to zeros.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid("matrix has no entries".into()));
        }
        if let Some(r) = self.re.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { context: "matrix row length", expected: cols, found: r.len() });
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(Error::DimensionMismatch { context: "imaginary part shape", expected: rows, found: im.len() });
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |m| m[i][j]))))
    }

    pub fn to_state(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.to_matrix()?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kraus: Vec<MatrixSpec>,
}

impl ChannelSpec {
    pub fn to_channel(&self) -> Result<KrausChannel> {
        let ops = self.kraus.iter().map(MatrixSpec::to_matrix).collect::<Result<Vec<_>>>()?;
        let first = ops.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        KrausChannel::new(first.cols(), first.rows(), ops)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    HeisenbergWeyl,
    HeisenbergWeylErasure,
}

/// Parsed cell document, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CellSpec {
    Erasure {
        d: usize,
        q: f64,
    },
    Depolarizing {
        d: usize,
        q: f64,
    },
    CovariantOrbit {
        d: usize,
        group: GroupSpec,
        base: ChannelSpec,
    },
    Hhlw,
    Custom {
        labels: Vec<String>,
        channels: Vec<ChannelSpec>,
    },
    EnvParam {
        labels: Vec<String>,
        in_dim: usize,
        env_states: Vec<MatrixSpec>,
        interaction: ChannelSpec,
    },
    Thermal {
        photon_numbers: Vec<f64>,
        #[serde(default)]
        probs: Option<Vec<f64>>,
        #[serde(default)]
        cutoff: Option<usize>,
        /// Transmissivity; recorded but it does not affect the capacity.
        #[serde(default)]
        eta: Option<f64>,
        /// Mean input photon number for the energy-constrained bound.
        #[serde(default)]
        n_s: Option<f64>,
    },
}

/// A cell spec turned into library objects.
#[derive(Debug, Clone)]
pub enum BuiltCell {
    /// A memory cell, with its environment-parametrized form when one is known.
    Memory { cell: MemoryCell, env: Option<EnvParamCell> },
    Env { env: EnvParamCell, cell: MemoryCell },
    Thermal(ThermalEnsemble),
}

impl BuiltCell {
    pub fn memory_cell(&self) -> Result<&MemoryCell> {
        match self {
            BuiltCell::Memory { cell, .. } | BuiltCell::Env { cell, .. } => Ok(cell),
            BuiltCell::Thermal(_) => Err(Error::Invalid("a thermal cell has no finite-dimensional channel form".into())),
        }
    }

    /// Environment states for the environment-parametrized bounds.
    pub fn env_states(&self) -> Result<Vec<DensityOperator>> {
        match self {
            BuiltCell::Memory { env: Some(e), .. } | BuiltCell::Env { env: e, .. } => Ok(e.env_states().to_vec()),
            BuiltCell::Memory { env: None, .. } => {
                Err(Error::Invalid("cell is not environment-parametrized; use an env_param or covariant cell".into()))
            }
            BuiltCell::Thermal(t) => t.states(),
        }
    }
}

pub fn parse_cell_spec(document: &[u8]) -> Result<CellSpec> {
    let spec: CellSpec = serde_json::from_slice(document).map_err(|e| Error::Invalid(format!("malformed cell spec: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

/// Parses a cell document that may also carry a `codebook` field next to the cell parameters.
pub fn parse_cell_document(document: &[u8]) -> Result<(CellSpec, Option<CodebookSpec>)> {
    let mut value: serde_json::Value =
        serde_json::from_slice(document).map_err(|e| Error::Invalid(format!("malformed cell spec: {e}")))?;
    let codebook = match value.as_object_mut().and_then(|o| o.remove("codebook")) {
        Some(c) => Some(serde_json::from_value(c).map_err(|e| Error::Invalid(format!("malformed codebook: {e}")))?),
        None => None,
    };
    let spec: CellSpec = serde_json::from_value(value).map_err(|e| Error::Invalid(format!("malformed cell spec: {e}")))?;
    spec.validate()?;
    Ok((spec, codebook))
}

impl CellSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CellSpec::Erasure { .. } => "erasure",
            CellSpec::Depolarizing { .. } => "depolarizing",
            CellSpec::CovariantOrbit { .. } => "covariant_orbit",
            CellSpec::Hhlw => "hhlw",
            CellSpec::Custom { .. } => "custom",
            CellSpec::EnvParam { .. } => "env_param",
            CellSpec::Thermal { .. } => "thermal",
        }
    }

    /// Checks parameters by building the objects the spec describes.
    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<BuiltCell> {
        match self {
            CellSpec::Erasure { d, q } => {
                check_range("q", *q, 0.0, 1.0, "0 <= q <= 1")?;
                let cell = MemoryCell::erasure(*d, *q)?;
                let env = EnvParamCell::teleportation(&cell, &erasure_corrections(*d)?)?;
                Ok(BuiltCell::Memory { cell, env: Some(env) })
            }
            CellSpec::Depolarizing { d, q } => {
                check_range("q", *q, 0.0, 1.0, "0 <= q <= 1")?;
                let cell = MemoryCell::depolarizing(*d, *q)?;
                let env = EnvParamCell::teleportation(&cell, &weyl_corrections(*d)?)?;
                Ok(BuiltCell::Memory { cell, env: Some(env) })
            }
            CellSpec::CovariantOrbit { d, group, base } => {
                let base = base.to_channel()?;
                let (rep, corrections) = match group {
                    GroupSpec::HeisenbergWeyl => (GroupRepresentation::heisenberg_weyl(*d)?, weyl_corrections(*d)?),
                    GroupSpec::HeisenbergWeylErasure => {
                        (GroupRepresentation::heisenberg_weyl_erasure(*d)?, erasure_corrections(*d)?)
                    }
                };
                let cell = MemoryCell::covariant_orbit(&base, &rep)?;
                let env = EnvParamCell::teleportation(&cell, &corrections)?;
                Ok(BuiltCell::Memory { cell, env: Some(env) })
            }
            CellSpec::Hhlw => Ok(BuiltCell::Memory { cell: MemoryCell::hhlw(), env: None }),
            CellSpec::Custom { labels, channels } => {
                let chans = channels.iter().map(ChannelSpec::to_channel).collect::<Result<Vec<_>>>()?;
                Ok(BuiltCell::Memory { cell: MemoryCell::new(labels.clone(), chans)?, env: None })
            }
            CellSpec::EnvParam { labels, in_dim, env_states, interaction } => {
                let states = env_states.iter().map(MatrixSpec::to_state).collect::<Result<Vec<_>>>()?;
                let env = EnvParamCell::new(labels.clone(), states, interaction.to_channel()?, *in_dim)?;
                let cell = env.induced_cell()?;
                Ok(BuiltCell::Env { env, cell })
            }
            CellSpec::Thermal { photon_numbers, probs, cutoff, eta, n_s } => {
                if let Some(e) = eta {
                    check_range("eta", *e, 0.0, 1.0, "0 <= eta <= 1")?;
                }
                if let Some(n) = n_s {
                    check_range("n_s", *n, 0.0, f64::INFINITY, "n_s >= 0")?;
                }
                let k = photon_numbers.len();
                let p = probs.clone().unwrap_or_else(|| vec![1.0 / k.max(1) as f64; k]);
                let ens = match cutoff {
                    Some(c) => ThermalEnsemble::new(p, photon_numbers.clone(), *c)?,
                    None => ThermalEnsemble::with_auto_cutoff(p, photon_numbers.clone())?,
                };
                Ok(BuiltCell::Thermal(ens))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    /// Codewords as sequences of cell labels.
    pub words: Vec<Vec<String>>,
}

impl CodebookSpec {
    pub fn build(&self, cell: &MemoryCell) -> Result<Codebook> {
        Codebook::from_labels(&self.words, cell.labels())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DecoderSpec {
    Named(String),
    Povm(Vec<MatrixSpec>),
}

/// Reading strategy document, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    /// The built-in two-call strategy for the `hhlw` cell.
    Hhlw,
    Adaptive {
        r_dims: Vec<usize>,
        initial: MatrixSpec,
        #[serde(default)]
        adaptors: Vec<ChannelSpec>,
        final_povm: Vec<MatrixSpec>,
    },
    Nonadaptive {
        transmitter: MatrixSpec,
        decoder: DecoderSpec,
    },
}

/// A strategy ready to run against a particular cell.
#[derive(Debug, Clone)]
pub enum BuiltStrategy {
    Adaptive(AdaptiveStrategy),
    Nonadaptive { transmitter: DensityOperator, decoder: Decoder },
}

impl StrategySpec {
    pub fn build(&self, cell: &MemoryCell) -> Result<BuiltStrategy> {
        match self {
            StrategySpec::Hhlw => Ok(BuiltStrategy::Adaptive(crate::protocol::hhlw_adaptive_strategy())),
            StrategySpec::Adaptive { r_dims, initial, adaptors, final_povm } => {
                let adaptors = adaptors.iter().map(ChannelSpec::to_channel).collect::<Result<Vec<_>>>()?;
                let povm = Povm::new(final_povm.iter().map(MatrixSpec::to_matrix).collect::<Result<Vec<_>>>()?)?;
                Ok(BuiltStrategy::Adaptive(AdaptiveStrategy::new(
                    initial.to_state()?,
                    r_dims.clone(),
                    cell.in_dim(),
                    cell.out_dim(),
                    adaptors,
                    povm,
                )?))
            }
            StrategySpec::Nonadaptive { transmitter, decoder } => {
                let decoder = match decoder {
                    DecoderSpec::Named(n) if n == "pgm" => Decoder::Pgm,
                    DecoderSpec::Named(n) => return Err(Error::Invalid(format!("unknown decoder `{n}`"))),
                    DecoderSpec::Povm(ms) => {
                        Decoder::Povm(Povm::new(ms.iter().map(MatrixSpec::to_matrix).collect::<Result<Vec<_>>>()?)?)
                    }
                };
                Ok(BuiltStrategy::Nonadaptive { transmitter: transmitter.to_state()?, decoder })
            }
        }
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(document: &[u8], what: &str) -> Result<T> {
    serde_json::from_slice(document).map_err(|e| Error::Invalid(format!("malformed {what}: {e}")))
}
