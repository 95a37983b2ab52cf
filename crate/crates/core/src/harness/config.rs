use serde::{Deserialize, Serialize};

use crate::process::{load_process, EdgeKernel};
use crate::{Error, Result};

/// Parameters shared by every experiment driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Preset name or path to a JSON process file.
    pub process: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub beta: f64,
    pub exact: bool,
    pub given_state: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            process: "hmm2".into(),
            n: 256,
            samples: 10_000,
            seed: 1,
            epsilon: 0.1,
            beta: 0.3,
            exact: false,
            given_state: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "N = {} is not a power of two",
                self.n
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config(format!(
                "epsilon = {} outside (0, 1/2)",
                self.epsilon
            )));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::Config(format!(
                "beta = {} outside (0, 1/2)",
                self.beta
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.given_state.is_some() && !self.exact {
            return Err(Error::Config("--given-state needs --exact".into()));
        }
        Ok(())
    }

    /// Validates and loads the process.
    pub fn kernel(&self) -> Result<EdgeKernel> {
        self.validate()?;
        load_process(&self.process)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            ExperimentConfig {
                n: 12,
                ..ok.clone()
            },
            ExperimentConfig {
                epsilon: 0.5,
                ..ok.clone()
            },
            ExperimentConfig {
                beta: 0.0,
                ..ok.clone()
            },
            ExperimentConfig {
                samples: 0,
                ..ok.clone()
            },
            ExperimentConfig {
                given_state: Some(1),
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }
}
