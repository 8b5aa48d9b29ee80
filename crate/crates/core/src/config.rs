use num_bigint::BigInt;
use serde::Serialize;

use crate::formula::SampleConfig;
use crate::series::Q;
use crate::tstrat::VerifyConfig;

/// Knobs shared by every command; echoed verbatim in each report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunConfig {
    #[serde(serialize_with = "crate::series::ser_q")]
    pub truncation: Q,
    pub samples: usize,
    pub pairs: usize,
    pub seed: u64,
    pub max_exp_denominator: u64,
    pub budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncation: Q::from_integer(BigInt::from(8)),
            samples: 200,
            pairs: 10_000,
            seed: 0,
            max_exp_denominator: 64,
            budget: 1000,
        }
    }
}

impl RunConfig {
    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig { precision: self.truncation.clone(), ..SampleConfig::default() }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        let base = VerifyConfig::default();
        let sample = SampleConfig { precision: self.truncation.clone(), ..base.sample.clone() };
        VerifyConfig { sample, budget: self.budget, seed: self.seed, ..base }
    }
}
