use std::collections::BTreeSet;

use serde::Serialize;

use super::oracle::exhaustive_ground;
use crate::cost::{ramsey_energy, RamseyInstance};
use crate::embed::{embed_model, find_embedding, tune_lambda, HardwareGraph, LambdaSweep};
use crate::error::{Error, Result};
use crate::qa::{evolve, recommended_steps, sample_state, AnnealSchedule};
use crate::qubo::{build_ramsey_model, to_spin, Coef, PenaltyConfig, QuadraticModel};
use crate::sa::{simulated_anneal, CoolingSchedule, SampleSet};

/// Largest vertex count the protocol will try.
pub const MAX_PROTOCOL_VERTICES: usize = 8;

/// One solver's view of `min h^N_{m,n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverEstimate {
    /// `None` when no read decoded to a valid graph.
    pub e_min: Option<u64>,
    /// Exact for the oracle, otherwise the number of distinct optimal graphs seen.
    pub degeneracy: Option<u64>,
    pub exact: bool,
    /// Share of all reads landing on `e_min`.
    pub success_probability: Option<f64>,
    pub feasible_fraction: Option<f64>,
    pub reads: u64,
}

/// Anything that can estimate the minimum Ramsey energy of an instance.
pub trait RamseySolver {
    fn name(&self) -> &str;
    fn estimate(&mut self, inst: &RamseyInstance) -> Result<SolverEstimate>;
}

/// Exhaustive enumeration; the reference adapter.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleSolver;

impl RamseySolver for OracleSolver {
    fn name(&self) -> &str {
        "oracle"
    }

    fn estimate(&mut self, inst: &RamseyInstance) -> Result<SolverEstimate> {
        let g = exhaustive_ground(inst)?;
        Ok(SolverEstimate {
            e_min: Some(g.e_gs),
            degeneracy: Some(g.degeneracy),
            exact: true,
            success_probability: None,
            feasible_fraction: None,
            reads: 0,
        })
    }
}

/// Reduces logical reads to an estimate. `reads` yields the decoded logical
/// assignment (or `None` for a broken read) with its multiplicity.
/// `symmetry_factor` scales the distinct-optimum count when a variable was
/// fixed by symmetry.
pub fn estimate_from_reads(
    inst: &RamseyInstance,
    model: &QuadraticModel,
    reads: impl IntoIterator<Item = (Option<Vec<i8>>, u64)>,
    symmetry_factor: u64,
) -> Result<SolverEstimate> {
    let mut total = 0u64;
    let mut feasible = 0u64;
    let mut best: Option<u64> = None;
    let mut hits = 0u64;
    let mut optima: BTreeSet<String> = BTreeSet::new();
    for (x, mult) in reads {
        total += mult;
        let Some(x) = x else { continue };
        if !model.products_satisfied(&x) {
            continue;
        }
        feasible += mult;
        let g = model.graph_of(&x)?;
        let e = ramsey_energy(&g, inst)?;
        match best {
            Some(b) if e > b => continue,
            Some(b) if e == b => {}
            _ => {
                best = Some(e);
                hits = 0;
                optima.clear();
            }
        }
        hits += mult;
        optima.insert(g.bit_string());
    }
    if total == 0 {
        return Err(Error::domain("no reads to summarize"));
    }
    Ok(SolverEstimate {
        e_min: best,
        degeneracy: best.map(|_| optima.len() as u64 * symmetry_factor),
        exact: false,
        success_probability: Some(hits as f64 / total as f64),
        feasible_fraction: Some(feasible as f64 / total as f64),
        reads: total,
    })
}

fn spin_model(inst: &RamseyInstance, fix_first: bool) -> Result<QuadraticModel> {
    to_spin(&build_ramsey_model(inst, &PenaltyConfig::default(), fix_first)?)
}

fn direct_reads(set: &SampleSet) -> impl Iterator<Item = (Option<Vec<i8>>, u64)> + '_ {
    set.samples.iter().map(|s| (Some(s.spins.clone()), s.multiplicity))
}

/// Seed of repetition `rep` in a run seeded with `seed`.
fn repetition_seed(seed: u64, rep: usize) -> u64 {
    seed.wrapping_add((rep as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Simulated annealing on the logical Ising model.
#[derive(Debug, Clone)]
pub struct SaSolver {
    pub schedule: CoolingSchedule,
    pub reads: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl RamseySolver for SaSolver {
    fn name(&self) -> &str {
        "sa"
    }

    fn estimate(&mut self, inst: &RamseyInstance) -> Result<SolverEstimate> {
        let model = spin_model(inst, false)?;
        let mut all = SampleSet::default();
        for rep in 0..self.repetitions.max(1) {
            let set = simulated_anneal(&model, &self.schedule, self.reads, repetition_seed(self.seed, rep))?;
            all = all.merge(&set);
        }
        estimate_from_reads(inst, &model, direct_reads(&all), 1)
    }
}

/// Statevector annealing simulation. For `(3, 3)` the first edge is fixed to
/// zero, which is free by complement symmetry and halves the state space.
#[derive(Debug, Clone)]
pub struct QaSolver {
    pub schedule: AnnealSchedule,
    /// Integrator steps; `None` picks [`recommended_steps`].
    pub steps: Option<usize>,
    pub reads: usize,
    pub seed: u64,
}

impl RamseySolver for QaSolver {
    fn name(&self) -> &str {
        "qa"
    }

    fn estimate(&mut self, inst: &RamseyInstance) -> Result<SolverEstimate> {
        let symmetric = inst.clique_order == inst.independent_order;
        let model = spin_model(inst, symmetric)?;
        let steps = match self.steps {
            Some(s) => s,
            None => recommended_steps(&model, &self.schedule)?,
        };
        let state = evolve(&model, &self.schedule, steps)?;
        let set = sample_state(&state, &model, self.reads, self.seed)?;
        estimate_from_reads(inst, &model, direct_reads(&set), if symmetric { 2 } else { 1 })
    }
}

/// Simulated annealing on the minor-embedded hardware model. Without a fixed
/// `lambda` the chain strength is tuned per instance.
#[derive(Debug, Clone)]
pub struct EmbeddedSaSolver {
    pub hardware: HardwareGraph,
    pub schedule: CoolingSchedule,
    pub reads: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub lambda: Option<Coef>,
    /// Reads per point of the λ sweep.
    pub tune_reads: usize,
}

impl RamseySolver for EmbeddedSaSolver {
    fn name(&self) -> &str {
        "sa-embedded"
    }

    fn estimate(&mut self, inst: &RamseyInstance) -> Result<SolverEstimate> {
        let model = spin_model(inst, false)?;
        let emb = find_embedding(&model, &self.hardware, self.seed)?;
        let embedded = match self.lambda {
            Some(l) => embed_model(&model, &emb.with_lambda(l), &self.hardware)?,
            None => {
                let (sched, reads, seed) = (self.schedule, self.tune_reads.max(1), self.seed);
                tune_lambda(
                    &model,
                    &emb,
                    &self.hardware,
                    |em| simulated_anneal(&em.model, &sched, reads, seed),
                    &LambdaSweep::default(),
                )?
                .embedded
            }
        };
        let mut all = SampleSet::default();
        for rep in 0..self.repetitions.max(1) {
            let set = simulated_anneal(
                &embedded.model,
                &self.schedule,
                self.reads,
                repetition_seed(self.seed, rep),
            )?;
            all = all.merge(&set);
        }
        let reads = all.samples.iter().map(|s| (embedded.unembed(&s.spins), s.multiplicity));
        estimate_from_reads(inst, &model, reads, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRow {
    #[serde(rename = "N")]
    pub n_vertices: usize,
    #[serde(flatten)]
    pub estimate: SolverEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub m: usize,
    pub n: usize,
    pub solver: String,
    /// First `N` whose estimated minimum is positive.
    pub ramsey_number: Option<usize>,
    pub rows: Vec<ProtocolRow>,
    pub warnings: Vec<String>,
}

/// Raises `N` from `n_start` until the solver's minimum energy first becomes
/// positive; that `N` is the Ramsey number.
pub fn ramsey_protocol(m: usize, n: usize, solver: &mut dyn RamseySolver, n_start: usize) -> Result<ProtocolReport> {
    if !(2..MAX_PROTOCOL_VERTICES + 1).contains(&n_start) {
        return Err(Error::domain(format!(
            "N_start={n_start} outside 2..={MAX_PROTOCOL_VERTICES}"
        )));
    }
    let mut report = ProtocolReport {
        m,
        n,
        solver: solver.name().to_string(),
        ramsey_number: None,
        rows: Vec::new(),
        warnings: Vec::new(),
    };
    for nv in n_start..=MAX_PROTOCOL_VERTICES {
        let inst = RamseyInstance::new(nv, m, n)?;
        let estimate = solver.estimate(&inst)?;
        let e_min = estimate.e_min;
        report.rows.push(ProtocolRow {
            n_vertices: nv,
            estimate,
        });
        match e_min {
            None => {
                report.warnings.push(format!("no feasible read at N={nv}; stopping"));
                return Ok(report);
            }
            Some(e) if e > 0 => {
                if nv == n_start {
                    report.warnings.push(format!(
                        "solver never certified E=0; N_start={n_start} may be at or above the Ramsey number"
                    ));
                }
                report.ramsey_number = Some(nv);
                return Ok(report);
            }
            Some(_) => {}
        }
    }
    report
        .warnings
        .push(format!("E stayed 0 up to N={MAX_PROTOCOL_VERTICES}"));
    Ok(report)
}
