use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::oracle::GroundTruth;
use super::stats::EnergyHistogram;
use crate::cost::RamseyInstance;
use crate::error::Result;

/// Summary written by the `oracle`, `analyze` and `protocol` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub instance: RamseyInstance,
    pub e_gs: Option<f64>,
    pub degeneracy: Option<u64>,
    /// `oracle`, `sa` or `qa`.
    pub source: String,
    /// Energy (as a string key) to read count.
    pub histogram: Value,
    pub feasible_fraction: Option<f64>,
    pub success_probability: Option<f64>,
    /// Seed of the stochastic run that produced the data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ResultsFile {
    pub fn from_oracle(g: &GroundTruth) -> Self {
        Self {
            instance: g.instance,
            e_gs: Some(g.e_gs as f64),
            degeneracy: Some(g.degeneracy),
            source: "oracle".into(),
            histogram: serde_json::json!({ g.e_gs.to_string(): g.degeneracy }),
            feasible_fraction: None,
            success_probability: None,
            seed: None,
        }
    }

    /// Results of a sampler run. `ground` is the reference ground energy used
    /// for the success probability; without one the lowest observed energy
    /// stands in.
    pub fn from_histogram(
        instance: RamseyInstance,
        source: &str,
        hist: &EnergyHistogram,
        ground: Option<f64>,
        seed: Option<u64>,
    ) -> Self {
        let e_gs = ground.or(hist.min_energy());
        let feasible_fraction = (hist.total_reads > 0).then(|| hist.feasible_reads as f64 / hist.total_reads as f64);
        let success_probability = match (e_gs, hist.total_reads) {
            (Some(e), t) if t > 0 => Some(hist.count(e) as f64 / t as f64),
            _ => None,
        };
        Self {
            instance,
            e_gs,
            degeneracy: None,
            source: source.into(),
            histogram: hist.to_json_map(),
            feasible_fraction,
            success_probability,
            seed,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
