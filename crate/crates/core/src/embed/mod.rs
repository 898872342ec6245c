//! Chimera hardware graphs, minor embeddings and chain-strength tuning.

mod chimera;
mod embedding;
mod find;
mod lambda;

pub use chimera::{chimera_graph, HardwareFile, HardwareGraph, Partition, DEFAULT_DEFECTS};
pub use embedding::{
    chain_strength_bound, embed_model, inter_chain_couplers, validate_embedding, EmbeddedModel, Embedding,
    EmbeddingIssue, ValidationReport,
};
pub use find::{find_embedding, find_embedding_with, FindOptions};
pub use lambda::{tune_lambda, LambdaPoint, LambdaSweep, LambdaTuning};
