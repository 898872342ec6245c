use serde::Serialize;

use super::chimera::HardwareGraph;
use super::embedding::{embed_model, EmbeddedModel, Embedding};
use crate::error::{Error, Result};
use crate::qubo::{Coef, QuadraticModel};
use crate::sa::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSweep {
    pub initial: Coef,
    pub step: Coef,
    /// Sweep fails once λ would exceed this.
    pub cap: Coef,
    pub target_feasible: f64,
}

impl Default for LambdaSweep {
    fn default() -> Self {
        Self {
            initial: Coef::new(1, 2),
            step: Coef::new(1, 2),
            cap: Coef::from_integer(20),
            target_feasible: 0.85,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTuning {
    /// First λ with feasible fraction above target, plus one more step.
    pub lambda: Coef,
    pub trace: Vec<LambdaPoint>,
    pub embedded: EmbeddedModel,
}

/// Raises λ linearly until the feasible fraction first exceeds the target,
/// then raises it once more. On failure the error message carries the trace.
pub fn tune_lambda(
    model: &QuadraticModel,
    emb: &Embedding,
    hw: &HardwareGraph,
    mut solver: impl FnMut(&EmbeddedModel) -> Result<SampleSet>,
    sweep: &LambdaSweep,
) -> Result<LambdaTuning> {
    if sweep.step <= Coef::from_integer(0) || sweep.initial <= Coef::from_integer(0) {
        return Err(Error::domain("λ sweep needs positive initial value and step"));
    }
    let mut trace = Vec::new();
    let mut lambda = sweep.initial;
    while lambda <= sweep.cap {
        let embedded = embed_model(model, &emb.with_lambda(lambda), hw)?;
        let samples = solver(&embedded)?;
        let f = embedded.feasible_fraction(&samples);
        trace.push(LambdaPoint {
            lambda: num_traits::ToPrimitive::to_f64(&lambda).unwrap_or(f64::NAN),
            feasible_fraction: f,
        });
        if f > sweep.target_feasible {
            let final_lambda = lambda + sweep.step;
            let embedded = embed_model(model, &emb.with_lambda(final_lambda), hw)?;
            return Ok(LambdaTuning {
                lambda: final_lambda,
                trace,
                embedded,
            });
        }
        lambda += sweep.step;
    }
    Err(Error::NotFound(format!(
        "feasible fraction never exceeded {} up to λ={}; trace: {}",
        sweep.target_feasible,
        sweep.cap,
        serde_json::to_string(&trace).unwrap_or_default()
    )))
}
