use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::chimera::HardwareGraph;
use crate::error::{Error, Result};
use crate::qubo::{coef_from_f64, normalize_ranges, Coef, Domain, QuadraticModel, VarRole};
use crate::sa::{Readout, Sample, SampleSet};

/// Logical variable → chain of hardware qubits, plus the ferromagnetic chain
/// coupling strength `λ` (in logical-model units, before range scaling).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub chains: BTreeMap<usize, Vec<usize>>,
    pub lambda: Coef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingIssue {
    MissingChain { var: usize },
    EmptyChain { var: usize },
    UnknownVariable { var: usize },
    UnusableQubit { var: usize, qubit: usize },
    Overlap { qubit: usize, vars: (usize, usize) },
    Disconnected { var: usize },
    MissingCoupler { u: usize, v: usize },
    NonPositiveLambda,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<EmbeddingIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    lambda: Value,
    chains: BTreeMap<String, Vec<usize>>,
}

impl Embedding {
    pub fn new(chains: BTreeMap<usize, Vec<usize>>, lambda: Coef) -> Self {
        let chains = chains
            .into_iter()
            .map(|(v, mut c)| {
                c.sort_unstable();
                c.dedup();
                (v, c)
            })
            .collect();
        Self { chains, lambda }
    }

    /// Every variable on its own qubit, `var i → qubits[i]`.
    pub fn identity(qubits: &[usize], lambda: Coef) -> Self {
        Self::new(qubits.iter().enumerate().map(|(i, &q)| (i, vec![q])).collect(), lambda)
    }

    pub fn with_lambda(&self, lambda: Coef) -> Self {
        Self {
            chains: self.chains.clone(),
            lambda,
        }
    }

    pub fn chain(&self, var: usize) -> Option<&[usize]> {
        self.chains.get(&var).map(Vec::as_slice)
    }

    pub fn total_qubits(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.values().map(Vec::len).max().unwrap_or(0)
    }

    /// `{lambda, chains:{var:[qubit,...]}}`
    pub fn to_json(&self) -> Value {
        let lambda = self.lambda.to_f64().expect("finite λ");
        let file = EmbeddingFile {
            lambda: serde_json::Number::from_f64(lambda).map_or(Value::Null, Value::Number),
            chains: self.chains.iter().map(|(v, c)| (v.to_string(), c.clone())).collect(),
        };
        serde_json::to_value(file).expect("embedding serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let file: EmbeddingFile = serde_json::from_value(v.clone())?;
        let lambda = match &file.lambda {
            Value::Number(n) => coef_from_f64(n.as_f64().unwrap_or(f64::NAN))?,
            other => crate::qubo::coef_from_json(other)?,
        };
        let mut chains = BTreeMap::new();
        for (k, c) in file.chains {
            let var: usize = k.parse().map_err(|_| Error::Parse(format!("bad chain key {k:?}")))?;
            chains.insert(var, c);
        }
        Ok(Self::new(chains, lambda))
    }

    /// Logical spins if every chain is unanimous, `None` for a broken sample.
    pub fn unembed(&self, spin_of: impl Fn(usize) -> i8) -> Option<Vec<i8>> {
        let mut out = Vec::with_capacity(self.chains.len());
        for chain in self.chains.values() {
            let first = spin_of(chain[0]);
            if chain[1..].iter().any(|&q| spin_of(q) != first) {
                return None;
            }
            out.push(first);
        }
        Some(out)
    }
}

fn chain_connected(chain: &[usize], hw: &HardwareGraph) -> bool {
    let members: BTreeSet<usize> = chain.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([chain[0]]);
    seen.insert(chain[0]);
    while let Some(q) = queue.pop_front() {
        for p in hw.usable_neighbors(q) {
            if members.contains(&p) && seen.insert(p) {
                queue.push_back(p);
            }
        }
    }
    seen.len() == members.len()
}

/// Couplers between two chains, in lexicographic order.
pub fn inter_chain_couplers(a: &[usize], b: &[usize], hw: &HardwareGraph) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = a
        .iter()
        .flat_map(|&p| b.iter().filter(move |&&q| hw.has_coupler(p, q)).map(move |&q| (p, q)))
        .collect();
    out.sort_unstable();
    out
}

/// Checks chains against the hardware and the model's primal graph.
pub fn validate_embedding(emb: &Embedding, model: &QuadraticModel, hw: &HardwareGraph) -> ValidationReport {
    let mut issues = Vec::new();
    if emb.lambda <= Coef::zero() {
        issues.push(EmbeddingIssue::NonPositiveLambda);
    }
    for var in 0..model.num_vars() {
        if !emb.chains.contains_key(&var) {
            issues.push(EmbeddingIssue::MissingChain { var });
        }
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (&var, chain) in &emb.chains {
        if var >= model.num_vars() {
            issues.push(EmbeddingIssue::UnknownVariable { var });
        }
        if chain.is_empty() {
            issues.push(EmbeddingIssue::EmptyChain { var });
            continue;
        }
        for &q in chain {
            if !hw.is_usable(q) {
                issues.push(EmbeddingIssue::UnusableQubit { var, qubit: q });
            }
            if let Some(&other) = owner.get(&q) {
                issues.push(EmbeddingIssue::Overlap {
                    qubit: q,
                    vars: (other, var),
                });
            } else {
                owner.insert(q, var);
            }
        }
        if !chain_connected(chain, hw) {
            issues.push(EmbeddingIssue::Disconnected { var });
        }
    }
    for (u, v) in model.primal_edges() {
        if let (Some(a), Some(b)) = (emb.chain(u), emb.chain(v)) {
            if inter_chain_couplers(a, b, hw).is_empty() {
                issues.push(EmbeddingIssue::MissingCoupler { u, v });
            }
        }
    }
    ValidationReport { issues }
}

/// Largest `|h_v| + Σ_u |J_uv|` over the variables of a spin model. Any
/// `λ` strictly above it makes every hardware ground state chain-unanimous:
/// flipping part of a chain gains at most twice this amount and breaks at
/// least one chain coupler, which costs `2λ`.
pub fn chain_strength_bound(model: &QuadraticModel) -> Coef {
    let mut incident: Vec<Coef> = model.linear().iter().map(|h| h.abs()).collect();
    for (&(i, j), c) in model.quadratic() {
        incident[i] += c.abs();
        incident[j] += c.abs();
    }
    incident.into_iter().max().unwrap_or_else(Coef::zero)
}

/// A hardware Ising model together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedModel {
    /// Spin model over the chain qubits; variable `k` is qubit `qubits[k]`.
    pub model: QuadraticModel,
    pub qubits: Vec<usize>,
    pub embedding: Embedding,
    pub source: QuadraticModel,
    /// Factor applied by range normalization.
    pub scale: Coef,
    /// Number of intra-chain couplers carrying `−λ`.
    pub chain_couplers: usize,
}

/// Places a logical spin model onto hardware: fields split evenly across each
/// chain, each logical coupling on the lexicographically smallest coupler
/// between the two chains, `−λ` on every coupler inside a chain, then scaled
/// into the programmable ranges.
pub fn embed_model(model: &QuadraticModel, emb: &Embedding, hw: &HardwareGraph) -> Result<EmbeddedModel> {
    if model.domain() != Domain::Spin {
        return Err(Error::domain("embedding expects a spin-domain model"));
    }
    let report = validate_embedding(emb, model, hw);
    if !report.is_valid() {
        return Err(Error::domain(format!("invalid embedding: {:?}", report.issues)));
    }
    let qubits: Vec<usize> = emb
        .chains
        .values()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<usize, usize> = qubits.iter().enumerate().map(|(k, &q)| (q, k)).collect();
    let mut hwm = QuadraticModel::new(qubits.len(), Domain::Spin);
    for (k, &q) in qubits.iter().enumerate() {
        hwm.set_label(k, VarRole::Qubit { id: q });
    }
    hwm.add_offset(model.offset());
    for (&var, chain) in &emb.chains {
        let share = model.linear()[var] / Coef::from_integer(chain.len() as i64);
        for q in chain {
            hwm.add_linear(index[q], share);
        }
    }
    for (&(u, v), &c) in model.quadratic() {
        let (p, q) = inter_chain_couplers(&emb.chains[&u], &emb.chains[&v], hw)[0];
        hwm.add_quadratic(index[&p], index[&q], c);
    }
    let mut chain_couplers = 0;
    for chain in emb.chains.values() {
        for (i, &p) in chain.iter().enumerate() {
            for &q in &chain[i + 1..] {
                if hw.has_coupler(p, q) {
                    hwm.add_quadratic(index[&p], index[&q], -emb.lambda);
                    chain_couplers += 1;
                }
            }
        }
    }
    let (scaled, scale) = normalize_ranges(&hwm)?;
    Ok(EmbeddedModel {
        model: scaled,
        qubits,
        embedding: emb.clone(),
        source: model.clone(),
        scale,
        chain_couplers,
    })
}

impl EmbeddedModel {
    /// Logical assignment for hardware spins in model order, `None` when a
    /// chain is broken.
    pub fn unembed(&self, spins: &[i8]) -> Option<Vec<i8>> {
        let pos: BTreeMap<usize, usize> = self.qubits.iter().enumerate().map(|(k, &q)| (q, k)).collect();
        self.embedding.unembed(|q| spins[pos[&q]])
    }

    /// Hardware spins with every chain set to its logical value.
    pub fn inflate(&self, logical: &[i8]) -> Vec<i8> {
        let mut out = vec![0i8; self.qubits.len()];
        for (k, &q) in self.qubits.iter().enumerate() {
            let var = self
                .embedding
                .chains
                .iter()
                .find(|(_, c)| c.contains(&q))
                .map(|(&v, _)| v)
                .expect("qubit belongs to a chain");
            out[k] = logical[var];
        }
        out
    }

    /// Hardware energy of an unbroken configuration in terms of the logical
    /// energy: `scale · (E_logical − λ·chain_couplers)`.
    pub fn hardware_energy_of_logical(&self, logical_energy: Coef) -> Coef {
        self.scale * (logical_energy - self.embedding.lambda * Coef::from_integer(self.chain_couplers as i64))
    }

    /// Share of reads whose chains are all unanimous.
    pub fn feasible_fraction(&self, samples: &SampleSet) -> f64 {
        let total = samples.total_reads();
        if total == 0 {
            return 0.0;
        }
        let ok: u64 = samples
            .samples
            .iter()
            .filter(|s| self.unembed(&s.spins).is_some())
            .map(|s| s.multiplicity)
            .sum();
        ok as f64 / total as f64
    }

    /// Readout against the source model's energy; broken chains and violated
    /// ancilla products are infeasible.
    pub fn logical_readout(&self) -> impl Fn(&Sample) -> Readout + Sync + '_ {
        let dm = crate::dense::DenseModel::from_model(&self.source);
        move |s: &Sample| match self.unembed(&s.spins) {
            Some(x) if self.source.products_satisfied(&x) => Readout::Feasible { energy: dm.energy(&x) },
            _ => Readout::Infeasible,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::exhaustive_model_ground;
    use crate::embed::chimera::chimera_graph;
    use num_traits::One;

    fn coupled_pair(j: i64) -> QuadraticModel {
        let mut m = QuadraticModel::new(2, Domain::Spin);
        m.add_quadratic(0, 1, Coef::from_integer(j));
        m
    }

    fn chains(list: &[(usize, &[usize])]) -> BTreeMap<usize, Vec<usize>> {
        list.iter().map(|&(v, c)| (v, c.to_vec())).collect()
    }

    #[test]
    fn published_chain_is_valid() {
        let hw = HardwareGraph::default_chip();
        let emb = Embedding::new(chains(&[(0, &[104, 112, 107]), (1, &[75])]), Coef::from_integer(2));
        assert!(validate_embedding(&emb, &coupled_pair(1), &hw).is_valid());
        assert_eq!(inter_chain_couplers(&[104, 107, 112], &[75], &hw), vec![(107, 75)]);
    }

    #[test]
    fn split_chain_is_reported() {
        let hw = HardwareGraph::default_chip();
        let emb = Embedding::new(chains(&[(0, &[104, 75]), (1, &[112])]), Coef::from_integer(2));
        let r = validate_embedding(&emb, &coupled_pair(1), &hw);
        assert!(r.issues.contains(&EmbeddingIssue::Disconnected { var: 0 }));
    }

    #[test]
    fn other_issues_are_reported() {
        let hw = HardwareGraph::default_chip();
        let m = coupled_pair(1);
        let emb = Embedding::new(chains(&[(0, &[4])]), Coef::zero());
        let r = validate_embedding(&emb, &m, &hw);
        assert!(r.issues.contains(&EmbeddingIssue::MissingChain { var: 1 }));
        assert!(r.issues.contains(&EmbeddingIssue::UnusableQubit { var: 0, qubit: 4 }));
        assert!(r.issues.contains(&EmbeddingIssue::NonPositiveLambda));
        let emb = Embedding::new(chains(&[(0, &[1, 5]), (1, &[5])]), Coef::one());
        let r = validate_embedding(&emb, &m, &hw);
        assert!(r
            .issues
            .iter()
            .any(|i| matches!(i, EmbeddingIssue::Overlap { qubit: 5, .. })));
        let emb = Embedding::new(chains(&[(0, &[1]), (1, &[2])]), Coef::one());
        let r = validate_embedding(&emb, &m, &hw);
        assert!(r.issues.contains(&EmbeddingIssue::MissingCoupler { u: 0, v: 1 }));
    }

    #[test]
    fn identity_embedding_of_subgraph() {
        let hw = HardwareGraph::default_chip();
        let mut m = QuadraticModel::new(3, Domain::Spin);
        m.add_quadratic(0, 1, Coef::one());
        m.add_quadratic(1, 2, Coef::one());
        // 1 - 5 - 2 inside the first cell
        let emb = Embedding::identity(&[1, 5, 2], Coef::one());
        assert!(validate_embedding(&emb, &m, &hw).is_valid());
    }

    #[test]
    fn field_split_and_chain_coupler() {
        let hw = chimera_graph(1, 1, 1, &[]).unwrap();
        let mut m = QuadraticModel::new(1, Domain::Spin);
        m.add_linear(0, Coef::one());
        let lambda = Coef::new(1, 2);
        let emb = Embedding::new(chains(&[(0, &[1, 2])]), lambda);
        let e = embed_model(&m, &emb, &hw).unwrap();
        assert_eq!(e.scale, Coef::one());
        assert_eq!(e.model.linear(), &[Coef::new(1, 2), Coef::new(1, 2)]);
        assert_eq!(e.model.quadratic()[&(0, 1)], -lambda);
        let g = exhaustive_model_ground(&e.model).unwrap();
        assert_eq!(g.degeneracy, 1);

        let mut zero = QuadraticModel::new(1, Domain::Spin);
        zero.add_offset(Coef::zero());
        for lam in [Coef::new(1, 10), Coef::one(), Coef::from_integer(7)] {
            let e = embed_model(&zero, &emb.with_lambda(lam), &hw).unwrap();
            let g = exhaustive_model_ground(&e.model).unwrap();
            assert_eq!(g.minimizers, vec![0b00, 0b11]);
        }
    }

    #[test]
    fn embedded_ranges_and_unembed() {
        let hw = HardwareGraph::default_chip();
        let mut m = coupled_pair(3);
        m.add_linear(0, Coef::from_integer(5));
        let emb = Embedding::new(chains(&[(0, &[104, 112, 107]), (1, &[75])]), Coef::from_integer(4));
        let e = embed_model(&m, &emb, &hw).unwrap();
        let (h, j) = e.model.coefficient_ranges();
        assert!(h <= Coef::from_integer(2) && j <= Coef::one());
        assert_eq!(e.chain_couplers, 2);
        let hardware_75_107 = {
            let a = e.qubits.iter().position(|&q| q == 75).unwrap();
            let b = e.qubits.iter().position(|&q| q == 107).unwrap();
            e.model.quadratic()[&(a.min(b), a.max(b))]
        };
        assert_eq!(hardware_75_107, Coef::from_integer(3) * e.scale);
        for logical in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
            let hw_spins = e.inflate(&logical);
            assert_eq!(e.unembed(&hw_spins), Some(logical.to_vec()));
            let el = m.energy(&logical).unwrap();
            assert_eq!(e.model.energy(&hw_spins).unwrap(), e.hardware_energy_of_logical(el));
        }
        // qubits in id order: 75, 104, 107, 112
        assert_eq!(e.unembed(&[1, 1, -1, 1]), None);
    }

    #[test]
    fn embed_rejects_invalid() {
        let hw = HardwareGraph::default_chip();
        let emb = Embedding::new(chains(&[(0, &[104, 75]), (1, &[112])]), Coef::one());
        assert!(embed_model(&coupled_pair(1), &emb, &hw).is_err());
        let binary = QuadraticModel::new(2, Domain::Binary);
        assert!(embed_model(&binary, &emb, &hw).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let emb = Embedding::new(chains(&[(0, &[104, 112, 107]), (1, &[75])]), Coef::new(3, 2));
        let text = emb.to_json().to_string();
        assert!(text.contains("\"lambda\":1.5"));
        assert_eq!(
            Embedding::from_json(&serde_json::from_str(&text).unwrap()).unwrap(),
            emb
        );
    }
}
