//! JSON input files: the system description and the compression triple.

use serde::{Deserialize, Serialize};
use ssc_core::optimize::{induced_triple, InduceOptions, RefDist, RhoMode};
use ssc_core::{CompressionTriple, MarkovSystem, Matrix, Observable, Partition, WeightKind, WeightSpec, Weights};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ObservableFile {
    pub space: usize,
    pub channel: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub horizon: usize,
    #[serde(default)]
    pub include_t0: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub states: usize,
    pub transition: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub observable: ObservableFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_matrix: Option<Vec<Vec<f64>>>,
    pub weight: WeightFile,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InduceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_dist: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_mode: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TripleFile {
    Explicit {
        macrostates: usize,
        pi: Vec<Vec<f64>>,
        phi: Vec<Vec<f64>>,
        rho: Vec<Vec<f64>>,
    },
    Partition {
        partition: Vec<usize>,
        #[serde(default)]
        induce: InduceFile,
    },
}

/// A JSON syntax or schema error located in the source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub byte_offset: usize,
}

fn locate(text: &str, err: &serde_json::Error) -> ParseError {
    let (line, column) = (err.line(), err.column());
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    ParseError {
        message: err.to_string(),
        line,
        column,
        byte_offset: (line_start + column.saturating_sub(1)).min(text.len()),
    }
}

pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    serde_json::from_str(text).map_err(|e| locate(text, &e))
}

pub fn parse_triple(text: &str) -> Result<TripleFile, ParseError> {
    serde_json::from_str(text).map_err(|e| locate(text, &e))
}

fn matrix(name: &str, rows: &[Vec<f64>], cols_if_empty: usize) -> Result<Matrix, CliError> {
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, cols_if_empty));
    }
    Matrix::from_rows(rows).ok_or_else(|| CliError::Config(format!("{name}: rows have different lengths")))
}

pub fn parse_ref_dist(s: &str) -> Result<RefDist, CliError> {
    match s {
        "w_averaged_occupancy" | "w-averaged" | "occupancy" => Ok(RefDist::WAveragedOccupancy),
        "stationary" => Ok(RefDist::Stationary),
        "uniform" => Ok(RefDist::Uniform),
        other => Err(CliError::Config(format!(
            "unknown ref_dist `{other}` (expected w_averaged_occupancy, stationary or uniform)"
        ))),
    }
}

pub fn parse_rho_mode(s: &str) -> Result<RhoMode, CliError> {
    match s {
        "bayes" => Ok(RhoMode::Bayes),
        "argmin_cost" | "argmin-cost" => Ok(RhoMode::ArgminCost),
        other => Err(CliError::Config(format!("unknown rho_mode `{other}` (expected bayes or argmin_cost)"))),
    }
}

/// Parsed system whose objects have the declared shapes; stochasticity is checked
/// separately by the validator.
pub struct LoadedSystem {
    pub system: MarkovSystem,
    pub observable: Observable,
    pub weight: WeightSpec,
}

impl LoadedSystem {
    pub fn weights(&self) -> Result<Weights, CliError> {
        self.weight.materialize().map_err(CliError::from)
    }
}

impl SystemFile {
    pub fn load(&self) -> Result<LoadedSystem, CliError> {
        if self.transition.len() != self.states {
            return Err(CliError::Config(format!(
                "transition has {} rows, `states` is {}",
                self.transition.len(),
                self.states
            )));
        }
        if self.observable.channel.len() != self.states {
            return Err(CliError::Config(format!(
                "observable channel has {} rows, `states` is {}",
                self.observable.channel.len(),
                self.states
            )));
        }
        let transition = matrix("transition", &self.transition, self.states)?;
        let channel = matrix("observable.channel", &self.observable.channel, self.observable.space)?;
        if channel.cols() != self.observable.space {
            return Err(CliError::Config(format!(
                "observable channel has {} columns, `space` is {}",
                channel.cols(),
                self.observable.space
            )));
        }
        let cost = match &self.cost_matrix {
            Some(rows) => Some(matrix("cost_matrix", rows, self.observable.space)?),
            None => None,
        };
        let kind = match self.weight.kind.as_str() {
            "uniform" => WeightKind::Uniform,
            "geometric" => WeightKind::Geometric {
                gamma: self
                    .weight
                    .gamma
                    .ok_or_else(|| CliError::Config("geometric weight needs `gamma`".into()))?,
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown weight kind `{other}` (expected uniform or geometric)"
                )))
            }
        };
        Ok(LoadedSystem {
            system: MarkovSystem::new(transition, self.initial.clone()),
            observable: Observable::new(channel, cost),
            weight: WeightSpec {
                kind,
                horizon: self.weight.horizon,
                include_t0: self.weight.include_t0,
            },
        })
    }

    pub fn from_parts(sys: &MarkovSystem, obs: &Observable, weight: &WeightSpec) -> Self {
        let (kind, gamma) = match weight.kind {
            WeightKind::Uniform => ("uniform", None),
            WeightKind::Geometric { gamma } => ("geometric", Some(gamma)),
        };
        SystemFile {
            states: sys.n(),
            transition: sys.transition().to_rows(),
            initial: sys.initial().to_vec(),
            observable: ObservableFile {
                space: obs.m(),
                channel: obs.channel().to_rows(),
            },
            cost_matrix: obs.cost_matrix().map(Matrix::to_rows),
            weight: WeightFile {
                kind: kind.into(),
                gamma,
                horizon: weight.horizon,
                include_t0: weight.include_t0,
            },
        }
    }
}

impl TripleFile {
    /// Builds the triple, inducing it from the partition when one is given.
    pub fn load(&self, loaded: &LoadedSystem) -> Result<CompressionTriple, CliError> {
        match self {
            TripleFile::Explicit { macrostates, pi, phi, rho } => {
                let k = *macrostates;
                let pi = matrix("pi", pi, k)?;
                let phi = matrix("phi", phi, k)?;
                let rho = matrix("rho", rho, loaded.observable.m())?;
                if phi.rows() != k {
                    return Err(CliError::Config(format!("phi has {} rows, `macrostates` is {k}", phi.rows())));
                }
                Ok(CompressionTriple::new(pi, phi, rho))
            }
            TripleFile::Partition { partition, induce } => {
                if partition.len() != loaded.system.n() {
                    return Err(CliError::Config(format!(
                        "partition has {} entries for {} states",
                        partition.len(),
                        loaded.system.n()
                    )));
                }
                let opts = InduceOptions {
                    ref_dist: induce.ref_dist.as_deref().map(parse_ref_dist).transpose()?.unwrap_or_default(),
                    rho: induce.rho_mode.as_deref().map(parse_rho_mode).transpose()?.unwrap_or_default(),
                };
                let p = Partition::from_assignment(partition.clone());
                let w = loaded.weights()?;
                Ok(induced_triple(&p, &loaded.system, &loaded.observable, &w, opts)?)
            }
        }
    }

    pub fn explicit(triple: &CompressionTriple) -> Self {
        TripleFile::Explicit {
            macrostates: triple.k(),
            pi: triple.pi().to_rows(),
            phi: triple.phi().to_rows(),
            rho: triple.rho().to_rows(),
        }
    }
}
