use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{RamseyInstance, WordEnergy};
use crate::dense::{ground_search, DenseModel};
use crate::error::{Error, Result};
use crate::graph::GraphBits;
use crate::qubo::{Coef, QuadraticModel};

/// Largest `L_N` the graph oracle enumerates.
pub const MAX_ORACLE_EDGES: usize = 30;

/// Minimizer lists longer than this are dropped (only the count is kept).
pub const MINIMIZER_RETENTION: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub instance: RamseyInstance,
    pub e_gs: u64,
    pub degeneracy: u64,
    /// Empty when `degeneracy > MINIMIZER_RETENTION`.
    #[serde(skip)]
    pub minimizers: Vec<GraphBits>,
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    min: u64,
    count: u64,
}

/// Exact `E_gs` and degeneracy of `h^N_{m,n}` over all `2^{L_N}` graphs.
pub fn exhaustive_ground(inst: &RamseyInstance) -> Result<GroundTruth> {
    let len = inst.num_edges();
    if len > MAX_ORACLE_EDGES {
        return Err(Error::domain(format!(
            "L_N={len} exceeds the oracle cap of {MAX_ORACLE_EDGES}"
        )));
    }
    let energy = WordEnergy::new(inst)?;
    let low = len.min(20);
    let high = len - low;
    // pass 1: minimum and count
    let total = (0..1u64 << high)
        .into_par_iter()
        .map(|c| {
            let base = c << low;
            let mut p = Partial {
                min: u64::MAX,
                count: 0,
            };
            for w in base..base + (1 << low) {
                let e = energy.energy(w);
                if e < p.min {
                    p = Partial { min: e, count: 1 };
                } else if e == p.min {
                    p.count += 1;
                }
            }
            p
        })
        .reduce(
            || Partial {
                min: u64::MAX,
                count: 0,
            },
            |a, b| match a.min.cmp(&b.min) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => Partial {
                    min: a.min,
                    count: a.count + b.count,
                },
            },
        );
    // pass 2: collect minimizers when they fit
    let minimizers = if total.count as usize <= MINIMIZER_RETENTION {
        let words: Vec<u64> = (0..1u64 << high)
            .into_par_iter()
            .flat_map_iter(|c| {
                let base = c << low;
                let energy = &energy;
                (base..base + (1 << low)).filter(move |&w| energy.energy(w) == total.min)
            })
            .collect();
        words
            .into_iter()
            .map(|w| GraphBits::from_word(inst.n_vertices, w))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(GroundTruth {
        instance: *inst,
        e_gs: total.min,
        degeneracy: total.count,
        minimizers,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGround {
    pub min: Coef,
    pub degeneracy: u64,
    /// Minimizing basis states (bit `i` = variable `i` is 1 / +1); empty
    /// beyond the retention cap.
    pub minimizers: Vec<u64>,
}

/// Exact minimum of a quadratic model over its whole domain (≤ 30 variables).
pub fn exhaustive_model_ground(model: &QuadraticModel) -> Result<ModelGround> {
    let (dm, denom) = DenseModel::from_model_scaled(model);
    let g = ground_search(&dm, 0, MINIMIZER_RETENTION)?;
    Ok(ModelGround {
        min: Coef::new(g.min, denom),
        degeneracy: g.degeneracy,
        minimizers: g.minimizers,
    })
}
