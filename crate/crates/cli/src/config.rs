//! Experiment configuration files (TOML).
//!
//! ```toml
//! [experiment]
//! algebra = "q2.alg"        # optional; relative to this file
//! alpha = ["w1"]
//! beta = ["1"]
//! window = "(-1,0]"
//! set = "[0,w1-1) | [1,3-w1)"   # literal or region file
//! seed = 7                  # optional: random rational translate of S
//! output = "out"
//!
//! [ranges]
//! gen_range = 220
//! radii = [25.0, 50.0, 100.0, 200.0]
//! density_radii = [50.0, 100.0]
//! n_max = 128
//! k_max = 2000
//! disc_n = 100000
//! disc_j = 10000
//! bmo_max = 4096
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{read_file, CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub ranges: Ranges,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub algebra: Option<PathBuf>,
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    pub window: String,
    pub set: String,
    pub seed: Option<u64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ranges {
    pub gen_range: i64,
    pub radii: Vec<f64>,
    pub density_radii: Vec<f64>,
    pub n_max: usize,
    pub k_max: i64,
    pub disc_n: i64,
    pub disc_j: i64,
    pub bmo_max: usize,
}

impl Default for Ranges {
    fn default() -> Self {
        Ranges {
            gen_range: 220,
            radii: vec![25.0, 50.0, 100.0, 200.0],
            density_radii: vec![50.0, 100.0],
            n_max: 128,
            k_max: 2000,
            disc_n: 100_000,
            disc_j: 10_000,
            bmo_max: 4096,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    /// Reads a config; relative paths inside it are resolved against its
    /// directory.
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let cfg = Self::parse(&read_file(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
