//! Sweep configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gstest::graph::{Boundary, RhgSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSource {
    Rhg(RhgSpec),
    File(PathBuf),
}

impl Default for GraphSource {
    fn default() -> Self {
        GraphSource::Rhg(RhgSpec::periodic(3))
    }
}

/// Every field is optional so that a file can be partial; missing values
/// fall back to the defaults in [`SweepConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfigFile {
    pub degree: Option<usize>,
    pub delta: Option<f64>,
    pub p_th: Option<f64>,
    pub n_test: Option<usize>,
    pub p_values: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub master_seed: Option<u64>,
    pub graph: Option<GraphSource>,
}

impl SweepConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Values set in `other` win.
    pub fn overridden_by(self, other: SweepConfigFile) -> Self {
        Self {
            degree: other.degree.or(self.degree),
            delta: other.delta.or(self.delta),
            p_th: other.p_th.or(self.p_th),
            n_test: other.n_test.or(self.n_test),
            p_values: other.p_values.or(self.p_values),
            trials: other.trials.or(self.trials),
            master_seed: other.master_seed.or(self.master_seed),
            graph: other.graph.or(self.graph),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub degree: usize,
    pub delta: f64,
    pub p_th: f64,
    pub n_test: Option<usize>,
    /// Empty means the default log-spaced grid.
    pub p_values: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub graph: GraphSource,
}

pub const DEFAULT_DELTA: f64 = 1.0 / 3.0;
pub const DEFAULT_P_TH: f64 = 1.4e-2;
pub const DEFAULT_DEGREE: usize = 4;

impl SweepConfig {
    pub fn resolve(file: SweepConfigFile) -> Result<Self> {
        let config = Self {
            degree: file.degree.unwrap_or(DEFAULT_DEGREE),
            delta: file.delta.unwrap_or(DEFAULT_DELTA),
            p_th: file.p_th.unwrap_or(DEFAULT_P_TH),
            n_test: file.n_test,
            p_values: file.p_values.unwrap_or_default(),
            trials: file.trials.unwrap_or(10_000),
            master_seed: file.master_seed.unwrap_or(0),
            graph: file.graph.unwrap_or_default(),
        };
        if config.trials == 0 {
            bail!("trials must be at least 1");
        }
        if config.n_test == Some(0) {
            bail!("N_test must be at least 1");
        }
        if let Some(p) = config.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            bail!("error rate {p} is not in [0, 1]");
        }
        Ok(config)
    }
}

/// Graph selection flags shared by several subcommands.
pub fn graph_source(
    graph: Option<PathBuf>,
    cells: Option<Vec<usize>>,
    boundary: Option<Boundary>,
) -> Result<Option<GraphSource>> {
    match (graph, cells) {
        (Some(_), Some(_)) => bail!("--graph and --cells are mutually exclusive"),
        (Some(path), None) => Ok(Some(GraphSource::File(path))),
        (None, Some(cells)) => {
            let cells: [usize; 3] = cells
                .try_into()
                .map_err(|_| anyhow::anyhow!("--cells takes exactly three values"))?;
            Ok(Some(GraphSource::Rhg(RhgSpec {
                cells,
                boundary: boundary.unwrap_or_default(),
            })))
        }
        (None, None) => Ok(boundary.map(|boundary| {
            GraphSource::Rhg(RhgSpec {
                cells: [3; 3],
                boundary,
            })
        })),
    }
}
