//! Ground-truth oracles, the incremental-N Ramsey protocol and sample
//! statistics.

mod noise;
mod oracle;
mod protocol;
mod results;
mod stats;

pub use noise::{noise_robustness, NoiseKind, NoiseReport, MAX_NOISE_VARS};
pub use oracle::{
    exhaustive_ground, exhaustive_model_ground, GroundTruth, ModelGround, MAX_ORACLE_EDGES, MINIMIZER_RETENTION,
};
pub use protocol::{
    estimate_from_reads, ramsey_protocol, EmbeddedSaSolver, OracleSolver, ProtocolReport, ProtocolRow, QaSolver,
    RamseySolver, SaSolver, SolverEstimate, MAX_PROTOCOL_VERTICES,
};
pub use results::ResultsFile;
pub use stats::{
    boltzmann_fit, configuration_counts, counts_by_index, equal_energy_dispersion, format_energy, histogram,
    max_dispersion, repetition_count, BoltzmannFit, EnergyHistogram, HistogramBin, HistogramPair, LevelDispersion,
    ENERGY_TOL,
};
