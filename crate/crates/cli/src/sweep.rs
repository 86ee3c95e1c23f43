use std::path::Path;

use rayon::prelude::*;
use repeater_core::{run_chain, ChainConfig};
use serde::{Deserialize, Serialize};

use crate::config_io::{check_config, parse_json, read_text, Overrides};
use crate::error::{CliError, CliResult};
use crate::row::ResultRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    TDepol,
    NNodes,
    TotalLength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ChainConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Seeds per point; repetition `r` runs with `base.seed + r`.
    #[serde(default = "one")]
    pub repetitions: u32,
}

fn one() -> u32 {
    1
}

impl SweepSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let spec: SweepSpec = parse_json(path, &read_text(path)?)?;
        spec.validate().map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        check_config(path, &spec.base)?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.values.is_empty() {
            return Err("values must not be empty".into());
        }
        if self.values.iter().any(|v| v.is_nan()) {
            return Err("values must be numbers".into());
        }
        let rising = self.values.windows(2).all(|w| w[0] < w[1]);
        let falling = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(rising || falling) {
            return Err("values must be strictly monotone".into());
        }
        if self.repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        if self.axis == Axis::NNodes
            && self
                .values
                .iter()
                .any(|&v| v < 0.0 || v.fract() != 0.0 || v.is_infinite())
        {
            return Err("n_nodes values must be non-negative integers".into());
        }
        Ok(())
    }

    /// Configurations in output order: axis value first, then repetition.
    pub fn configs(&self, overrides: &Overrides) -> Vec<ChainConfig> {
        let mut base = self.base.clone();
        overrides.apply(&mut base);
        let mut out = Vec::with_capacity(self.values.len() * self.repetitions as usize);
        for &value in &self.values {
            for rep in 0..self.repetitions {
                let mut config = base.clone();
                match self.axis {
                    Axis::TDepol => config.t_depol = value,
                    Axis::NNodes => config.n_nodes = value as usize,
                    Axis::TotalLength => config.total_length = value,
                }
                config.seed = base.seed.wrapping_add(rep as u64);
                out.push(config);
            }
        }
        out
    }
}

/// Runs every point of the sweep, in parallel, returning rows in axis order.
pub fn run_sweep(spec: &SweepSpec, overrides: &Overrides) -> CliResult<Vec<ResultRow>> {
    spec.validate().map_err(CliError::Usage)?;
    spec.configs(overrides)
        .par_iter()
        .map(|config| Ok(ResultRow::new(config, &run_chain(config)?)))
        .collect()
}
