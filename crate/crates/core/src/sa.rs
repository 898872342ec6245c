//! Classical samplers over Ising models: Metropolis simulated annealing with
//! an exponential cooling schedule, and steepest-descent local search.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseModel;
use crate::error::{Error, Result};
use crate::qubo::{Domain, QuadraticModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub sweeps: usize,
}

impl CoolingSchedule {
    pub fn new(t_initial: f64, t_final: f64, sweeps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_initial >= t_final && t_initial.is_finite()) {
            return Err(Error::domain(format!(
                "need t_initial >= t_final > 0, got {t_initial} and {t_final}"
            )));
        }
        if sweeps == 0 {
            return Err(Error::domain("sweeps must be positive"));
        }
        Ok(Self {
            t_initial,
            t_final,
            sweeps,
        })
    }

    /// Temperature during sweep `k` (0-based): `t_i·(t_f/t_i)^{k/(sweeps-1)}`.
    pub fn temperature(&self, k: usize) -> f64 {
        if self.sweeps == 1 {
            return self.t_initial;
        }
        let frac = k as f64 / (self.sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }

    pub fn temperatures(&self) -> Vec<f64> {
        (0..self.sweeps).map(|k| self.temperature(k)).collect()
    }
}

impl Default for CoolingSchedule {
    fn default() -> Self {
        Self {
            t_initial: 10.0,
            t_final: 0.05,
            sweeps: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub spins: Vec<i8>,
    pub energy: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub sampler: String,
    pub seed: Option<u64>,
    pub schedule: Option<CoolingSchedule>,
    pub model_hash: u64,
}

/// Distinct configurations with their energy and read count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub metadata: SampleMetadata,
}

impl SampleSet {
    /// Aggregates reads into distinct configurations ordered by energy, then spins.
    pub fn from_reads(reads: impl IntoIterator<Item = (Vec<i8>, f64)>, metadata: SampleMetadata) -> Self {
        let mut merged: BTreeMap<Vec<i8>, (f64, u64)> = BTreeMap::new();
        for (spins, energy) in reads {
            merged.entry(spins).or_insert((energy, 0)).1 += 1;
        }
        let mut samples: Vec<Sample> = merged
            .into_iter()
            .map(|(spins, (energy, multiplicity))| Sample {
                spins,
                energy,
                multiplicity,
            })
            .collect();
        samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.spins.cmp(&b.spins)));
        Self { samples, metadata }
    }

    pub fn total_reads(&self) -> u64 {
        self.samples.iter().map(|s| s.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.energy).min_by(f64::total_cmp)
    }

    /// Combines two sets; the result does not depend on argument order.
    pub fn merge(&self, other: &SampleSet) -> SampleSet {
        let reads = self
            .samples
            .iter()
            .chain(&other.samples)
            .flat_map(|s| std::iter::repeat_n((s.spins.clone(), s.energy), s.multiplicity as usize));
        SampleSet::from_reads(reads, self.metadata.clone())
    }

    /// Largest `|recorded − recomputed|` energy over all samples.
    pub fn energy_mismatch(&self, model: &QuadraticModel) -> f64 {
        let dm = DenseModel::from_model(model);
        self.samples
            .iter()
            .map(|s| (dm.energy(&s.spins) - s.energy).abs())
            .fold(0.0, f64::max)
    }

    /// `energy,multiplicity,spins` with spins written as `+`/`-` characters.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["energy", "multiplicity", "spins"]).map_err(csv_err)?;
        for s in &self.samples {
            let spins: String = s.spins.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect();
            out.write_record([s.energy.to_string(), s.multiplicity.to_string(), spins])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns, got {}", rec.len())));
            }
            let energy: f64 = rec[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad energy {:?}", &rec[0])))?;
            let multiplicity: u64 = rec[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity {:?}", &rec[1])))?;
            let spins = rec[2]
                .chars()
                .map(|c| match c {
                    '+' => Ok(1i8),
                    '-' => Ok(-1i8),
                    other => Err(Error::Parse(format!("bad spin character {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            samples.push(Sample {
                spins,
                energy,
                multiplicity,
            });
        }
        Ok(Self {
            samples,
            metadata: SampleMetadata::default(),
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// FNV-1a of the model's JSON form; stable across runs and platforms.
pub fn model_hash(model: &QuadraticModel) -> u64 {
    let text = model.to_json().to_string();
    text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Independent, reproducible stream for read `index` of a run seeded with `seed`.
fn read_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn require_spin(model: &QuadraticModel) -> Result<()> {
    if model.domain() != Domain::Spin {
        return Err(Error::domain("sampler expects a spin-domain model"));
    }
    Ok(())
}

fn random_spins(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// One annealing read: Metropolis single-spin-flip sweeps in fixed variable
/// order. Returns the final spins and the incrementally tracked energy.
fn anneal_read(dm: &DenseModel<f64>, temps: &[f64], rng: &mut ChaCha8Rng) -> (Vec<i8>, f64) {
    let n = dm.num_vars();
    let mut s = random_spins(rng, n);
    let mut fields: Vec<f64> = (0..n).map(|i| dm.local_field(i, &s)).collect();
    let mut energy = dm.energy(&s);
    for &t in temps {
        for i in 0..n {
            let delta = -2.0 * s[i] as f64 * fields[i];
            if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                s[i] = -s[i];
                energy += delta;
                let dv = 2.0 * s[i] as f64;
                for &(j, c) in &dm.adj[i] {
                    fields[j] += c * dv;
                }
            }
        }
    }
    (s, energy)
}

/// Simulated annealing; read `r` uses its own counter-based stream, so the
/// result is independent of thread scheduling.
pub fn simulated_anneal(model: &QuadraticModel, sched: &CoolingSchedule, reads: usize, seed: u64) -> Result<SampleSet> {
    require_spin(model)?;
    if reads == 0 {
        return Err(Error::domain("reads must be at least 1"));
    }
    let dm = DenseModel::from_model(model);
    let temps = sched.temperatures();
    let raw: Vec<(Vec<i8>, f64)> = (0..reads as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = read_rng(seed, r);
            let (s, tracked) = anneal_read(&dm, &temps, &mut rng);
            let exact = dm.energy(&s);
            debug_assert!((tracked - exact).abs() <= 1e-9 * (1.0 + exact.abs()));
            (s, exact)
        })
        .collect();
    Ok(SampleSet::from_reads(
        raw,
        SampleMetadata {
            sampler: "sa".into(),
            seed: Some(seed),
            schedule: Some(*sched),
            model_hash: model_hash(model),
        },
    ))
}

/// Runs a single read and reports `(tracked, recomputed)` energies, exposing
/// the incremental bookkeeping for tests.
pub fn anneal_energy_bookkeeping(model: &QuadraticModel, sched: &CoolingSchedule, seed: u64) -> Result<(f64, f64)> {
    require_spin(model)?;
    let dm = DenseModel::from_model(model);
    let mut rng = read_rng(seed, 0);
    let (s, tracked) = anneal_read(&dm, &sched.temperatures(), &mut rng);
    Ok((tracked, dm.energy(&s)))
}

/// Greedy descent: repeatedly flip the spin with the most negative energy
/// change (lowest index on ties) until no flip lowers the energy.
pub fn steepest_descent(model: &QuadraticModel, starts: usize, seed: u64) -> Result<SampleSet> {
    require_spin(model)?;
    let dm = DenseModel::from_model(model);
    let n = dm.num_vars();
    let raw: Vec<(Vec<i8>, f64)> = (0..starts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = read_rng(seed, r);
            let mut s = random_spins(&mut rng, n);
            let mut fields: Vec<f64> = (0..n).map(|i| dm.local_field(i, &s)).collect();
            loop {
                let mut best = None::<(usize, f64)>;
                for i in 0..n {
                    let d = -2.0 * s[i] as f64 * fields[i];
                    if d < -1e-12 && best.is_none_or(|(_, b)| d < b) {
                        best = Some((i, d));
                    }
                }
                let Some((i, _)) = best else { break };
                s[i] = -s[i];
                let dv = 2.0 * s[i] as f64;
                for &(j, c) in &dm.adj[i] {
                    fields[j] += c * dv;
                }
            }
            let e = dm.energy(&s);
            (s, e)
        })
        .collect();
    Ok(SampleSet::from_reads(
        raw,
        SampleMetadata {
            sampler: "steepest-descent".into(),
            seed: Some(seed),
            schedule: None,
            model_hash: model_hash(model),
        },
    ))
}

/// Starts the search from a supplied configuration instead of a random one.
pub fn steepest_descent_from(model: &QuadraticModel, start: &[i8]) -> Result<Vec<i8>> {
    require_spin(model)?;
    let dm = DenseModel::from_model(model);
    let mut s = start.to_vec();
    loop {
        let mut best = None::<(usize, f64)>;
        for i in 0..s.len() {
            let d = dm.flip_delta(i, &s);
            if d < -1e-12 && best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) => s[i] = -s[i],
            None => return Ok(s),
        }
    }
}

/// Outcome of reading one sample back to the logical problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Readout {
    /// Chains disagree or an ancilla constraint is violated.
    Infeasible,
    Feasible {
        energy: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessStats {
    pub feasible_fraction: f64,
    /// Share of feasible reads at the ground energy.
    pub optimal_fraction: f64,
    /// `feasible_fraction × optimal_fraction`.
    pub joint: f64,
}

impl SuccessStats {
    pub fn from_counts(total: u64, feasible: u64, optimal: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::domain("empty sample set"));
        }
        let feasible_fraction = feasible as f64 / total as f64;
        let optimal_fraction = if feasible == 0 {
            0.0
        } else {
            optimal as f64 / feasible as f64
        };
        Ok(Self {
            feasible_fraction,
            optimal_fraction,
            joint: feasible_fraction * optimal_fraction,
        })
    }
}

/// Feasible, optimal-given-feasible and joint success rates. `readout` maps a
/// stored configuration to its logical outcome; use [`direct_readout`] when
/// no embedding or constraints are involved.
pub fn success_statistics(
    samples: &SampleSet,
    readout: impl Fn(&Sample) -> Readout,
    ground_energy: f64,
) -> Result<SuccessStats> {
    let mut feasible = 0;
    let mut optimal = 0;
    for s in &samples.samples {
        if let Readout::Feasible { energy } = readout(s) {
            feasible += s.multiplicity;
            if (energy - ground_energy).abs() <= 1e-9 * (1.0 + ground_energy.abs()) {
                optimal += s.multiplicity;
            }
        }
    }
    SuccessStats::from_counts(samples.total_reads(), feasible, optimal)
}

pub fn direct_readout(s: &Sample) -> Readout {
    Readout::Feasible { energy: s.energy }
}

/// Tries every `(t_initial, t_final)` pair and keeps the schedule with the
/// highest joint success.
#[allow(clippy::too_many_arguments)]
pub fn grid_search_schedule(
    model: &QuadraticModel,
    t_initials: &[f64],
    t_finals: &[f64],
    sweeps: usize,
    reads: usize,
    seed: u64,
    readout: impl Fn(&Sample) -> Readout + Sync,
    ground_energy: f64,
) -> Result<(CoolingSchedule, SuccessStats)> {
    let mut best: Option<(CoolingSchedule, SuccessStats)> = None;
    for &t0 in t_initials {
        for &t1 in t_finals {
            let Ok(sched) = CoolingSchedule::new(t0, t1, sweeps) else {
                continue;
            };
            let set = simulated_anneal(model, &sched, reads, seed)?;
            let stats = success_statistics(&set, &readout, ground_energy)?;
            if best.is_none_or(|(_, b)| stats.joint > b.joint) {
                best = Some((sched, stats));
            }
        }
    }
    best.ok_or_else(|| Error::domain("no valid schedule in the grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_rm2_model, to_spin, Coef, PenaltyConfig};

    fn single_spin(h: i64) -> QuadraticModel {
        let mut m = QuadraticModel::new(1, Domain::Spin);
        m.add_linear(0, Coef::from_integer(h));
        m
    }

    fn fm_pair() -> QuadraticModel {
        let mut m = QuadraticModel::new(2, Domain::Spin);
        m.add_quadratic(0, 1, Coef::from_integer(-1));
        m
    }

    #[test]
    fn schedule_shape() {
        let s = CoolingSchedule::new(10.0, 0.1, 3).unwrap();
        let t = s.temperatures();
        assert!((t[0] - 10.0).abs() < 1e-12);
        assert!((t[1] - 1.0).abs() < 1e-12);
        assert!((t[2] - 0.1).abs() < 1e-12);
        assert!(CoolingSchedule::new(0.1, 1.0, 10).is_err());
        assert!(CoolingSchedule::new(1.0, 0.0, 10).is_err());
        assert!(CoolingSchedule::new(1.0, 0.5, 0).is_err());
        assert_eq!(CoolingSchedule::new(2.0, 2.0, 1).unwrap().temperature(0), 2.0);
    }

    #[test]
    fn single_spin_finds_minimum() {
        let sched = CoolingSchedule::new(5.0, 0.01, 50).unwrap();
        let set = simulated_anneal(&single_spin(1), &sched, 1000, 7).unwrap();
        let down = set.samples.iter().find(|s| s.spins == [-1]).unwrap();
        assert_eq!(down.energy, -1.0);
        assert!(down.multiplicity as f64 / 1000.0 >= 0.99);
    }

    #[test]
    fn fm_pair_aligns() {
        let sched = CoolingSchedule::new(5.0, 0.01, 50).unwrap();
        let set = simulated_anneal(&fm_pair(), &sched, 500, 3).unwrap();
        for s in &set.samples {
            assert_eq!(s.spins[0], s.spins[1]);
            assert_eq!(s.energy, -1.0);
        }
    }

    #[test]
    fn rejects_binary_and_zero_reads() {
        let b = build_rm2_model(4, &PenaltyConfig::default()).unwrap();
        assert!(simulated_anneal(&b, &CoolingSchedule::default(), 1, 0).is_err());
        assert!(simulated_anneal(&fm_pair(), &CoolingSchedule::default(), 0, 0).is_err());
        assert!(steepest_descent(&b, 1, 0).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = to_spin(&build_rm2_model(5, &PenaltyConfig::default()).unwrap()).unwrap();
        let sched = CoolingSchedule::new(10.0, 0.05, 100).unwrap();
        let a = simulated_anneal(&m, &sched, 200, 42).unwrap();
        let b = simulated_anneal(&m, &sched, 200, 42).unwrap();
        assert_eq!(a, b);
        let c = simulated_anneal(&m, &sched, 200, 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.energy_mismatch(&m), 0.0);
    }

    #[test]
    fn incremental_energy_is_exact_on_integer_models() {
        let m = to_spin(&build_rm2_model(6, &PenaltyConfig::default()).unwrap()).unwrap();
        for seed in 0..20 {
            let (tracked, exact) =
                anneal_energy_bookkeeping(&m, &CoolingSchedule::new(3.0, 0.1, 200).unwrap(), seed).unwrap();
            // quarter-integer coefficients are exact in f64
            assert_eq!(tracked, exact);
        }
    }

    #[test]
    fn steepest_descent_examples() {
        let set = steepest_descent(&single_spin(1), 2, 0).unwrap();
        assert!(set.samples.iter().all(|s| s.spins == [-1]));
        let s = steepest_descent_from(&fm_pair(), &[1, -1]).unwrap();
        assert_eq!(s[0], s[1]);
        // tie between both flips resolves to the lowest index
        assert_eq!(s, vec![-1, -1]);
    }

    #[test]
    fn success_stats_examples() {
        let s = SuccessStats::from_counts(1000, 856, 642).unwrap();
        assert!((s.joint - 0.642).abs() < 1e-12);
        let s = SuccessStats::from_counts(100_000, 85_600, 64_200).unwrap();
        assert!((s.optimal_fraction - 0.75).abs() < 1e-3);
        assert!((s.joint - 0.856 * 0.75).abs() < 1e-3);

        let set = SampleSet::from_reads(vec![(vec![1], -1.0); 4], SampleMetadata::default());
        let s = success_statistics(&set, direct_readout, -1.0).unwrap();
        assert_eq!((s.feasible_fraction, s.optimal_fraction, s.joint), (1.0, 1.0, 1.0));

        let reads = vec![
            (vec![1, 1], 0.0),
            (vec![-1, -1], 1.0),
            (vec![1, -1], 5.0),
            (vec![-1, 1], 5.0),
        ];
        let set = SampleSet::from_reads(reads, SampleMetadata::default());
        let readout = |s: &Sample| {
            if s.spins[0] == s.spins[1] {
                Readout::Feasible { energy: s.energy }
            } else {
                Readout::Infeasible
            }
        };
        let s = success_statistics(&set, readout, 0.0).unwrap();
        assert_eq!((s.feasible_fraction, s.optimal_fraction, s.joint), (0.5, 0.5, 0.25));

        assert!(success_statistics(&SampleSet::default(), direct_readout, 0.0).is_err());
    }

    #[test]
    fn fixed_temperature_matches_boltzmann() {
        // 4-spin ring with a field
        let mut m = QuadraticModel::new(4, Domain::Spin);
        for i in 0..4 {
            m.add_quadratic(i, (i + 1) % 4, Coef::new(-1, 2));
        }
        m.add_linear(0, Coef::new(1, 4));
        m.add_quadratic(0, 2, Coef::new(1, 2));
        let t = 1.5;
        let sched = CoolingSchedule::new(t, t, 30).unwrap();
        let reads = 100_000;
        let set = simulated_anneal(&m, &sched, reads, 11).unwrap();
        let dm = DenseModel::from_model(&m);
        let weights: Vec<f64> = (0..16u64)
            .map(|b| (-dm.energy(&dm.assignment_of_bits(b)) / t).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let mut tv = 0.0;
        for b in 0..16u64 {
            let spins = dm.assignment_of_bits(b);
            let count = set
                .samples
                .iter()
                .find(|s| s.spins == spins)
                .map_or(0, |s| s.multiplicity);
            tv += (count as f64 / reads as f64 - weights[b as usize] / z).abs();
        }
        assert!(tv / 2.0 < 0.05, "total variation {}", tv / 2.0);
    }

    #[test]
    fn merge_is_order_insensitive() {
        let m = to_spin(&build_rm2_model(4, &PenaltyConfig::default()).unwrap()).unwrap();
        let sched = CoolingSchedule::new(5.0, 0.1, 20).unwrap();
        let a = simulated_anneal(&m, &sched, 50, 1).unwrap();
        let b = simulated_anneal(&m, &sched, 50, 2).unwrap();
        let ab = a.merge(&b);
        let ba = b.merge(&a);
        assert_eq!(ab.samples, ba.samples);
        assert_eq!(ab.total_reads(), 100);
    }

    #[test]
    fn csv_roundtrip() {
        let m = to_spin(&build_rm2_model(4, &PenaltyConfig::default()).unwrap()).unwrap();
        let set = simulated_anneal(&m, &CoolingSchedule::new(5.0, 0.1, 20).unwrap(), 30, 9).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("energy,multiplicity,spins\n"));
        let back = SampleSet::read_csv(&buf[..]).unwrap();
        assert_eq!(back.samples, set.samples);
        assert!(SampleSet::read_csv("energy,multiplicity,spins\n1,2,+x\n".as_bytes()).is_err());
    }
}
