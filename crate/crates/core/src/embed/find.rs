//! Heuristic minor embedding.
//!
//! Variables are placed one at a time. The root of a chain is the qubit with
//! the smallest summed path weight to every placed neighbour chain, and the
//! chain grows from it along shortest paths, each new path leaving from the
//! nearest qubit already in the chain. The tail of each path is then handed
//! to the neighbour it reaches, so neighbouring chains grow toward each other.
//! A qubit shared by `k` chains weighs `base^k`, with `base` larger than any
//! overlap-free route, so rip-up-and-reroute passes remove overlaps first.
//! Finished embeddings have redundant qubits trimmed.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chimera::HardwareGraph;
use super::embedding::{validate_embedding, Embedding};
use crate::error::{Error, Result};
use crate::qubo::{Coef, QuadraticModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindOptions {
    /// Independent restarts with fresh variable orders.
    pub restarts: usize,
    /// Rip-up passes allowed without improvement before a restart.
    pub patience: usize,
    /// Hard cap on rip-up passes per restart.
    pub passes: usize,
    /// `λ` stored in the returned embedding.
    pub lambda: Coef,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            patience: 100,
            passes: 1000,
            lambda: Coef::from_integer(2),
        }
    }
}

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Placer<'a> {
    hw: &'a HardwareGraph,
    neighbors: &'a [Vec<usize>],
    chains: Vec<BTreeSet<usize>>,
    fill: Vec<u32>,
    base: f64,
    /// Random tie-break rank per qubit, redrawn every pass.
    rank: Vec<u32>,
}

impl<'a> Placer<'a> {
    fn new(hw: &'a HardwareGraph, neighbors: &'a [Vec<usize>]) -> Self {
        let nq = hw.num_qubits() + 1;
        Self {
            hw,
            neighbors,
            chains: vec![BTreeSet::new(); neighbors.len()],
            fill: vec![0; nq],
            base: 4.0 * nq as f64,
            rank: (0..nq as u32).collect(),
        }
    }

    fn weight(&self, q: usize) -> f64 {
        self.base.powi(self.fill[q] as i32)
    }

    fn reshuffle(&mut self, rng: &mut ChaCha8Rng) {
        self.rank.shuffle(rng);
    }

    /// Node-weighted Dijkstra from a chain: chain qubits sit at distance zero
    /// and entering a qubit costs its weight.
    fn dijkstra(&self, chain: &BTreeSet<usize>) -> (Vec<f64>, Vec<usize>) {
        let n = self.fill.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![NONE; n];
        let mut heap = BinaryHeap::new();
        for &s in chain {
            dist[s] = 0.0;
            heap.push((Reverse(OrdF64(0.0)), Reverse(self.rank[s]), s));
        }
        while let Some((Reverse(OrdF64(d)), _, q)) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            for p in self.hw.usable_neighbors(q) {
                let nd = d + self.weight(p);
                if nd < dist[p] {
                    dist[p] = nd;
                    parent[p] = q;
                    heap.push((Reverse(OrdF64(nd)), Reverse(self.rank[p]), p));
                }
            }
        }
        (dist, parent)
    }

    fn tear_out(&mut self, var: usize) {
        for &q in &self.chains[var] {
            self.fill[q] -= 1;
        }
        self.chains[var].clear();
    }

    fn add(&mut self, var: usize, q: usize) {
        if self.chains[var].insert(q) {
            self.fill[q] += 1;
        }
    }

    fn remove(&mut self, var: usize, q: usize) {
        if self.chains[var].remove(&q) {
            self.fill[q] -= 1;
        }
    }

    fn argmin(&self, cost: impl Fn(usize) -> f64, rng: &mut ChaCha8Rng) -> Option<usize> {
        let mut best = f64::INFINITY;
        let mut pool = Vec::new();
        for q in self.hw.usable_qubits() {
            let c = cost(q);
            if c < best * (1.0 - 1e-12) {
                best = c;
                pool.clear();
                pool.push(q);
            } else if c <= best * (1.0 + 1e-12) {
                pool.push(q);
            }
        }
        if !best.is_finite() {
            return None;
        }
        Some(pool[rng.random_range(0..pool.len())])
    }

    /// Builds a chain for `var` (which must be torn out) against its placed
    /// neighbours.
    fn place(&mut self, var: usize, rng: &mut ChaCha8Rng) -> bool {
        let mut placed: Vec<usize> = self.neighbors[var]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        if placed.is_empty() {
            let Some(root) = self.argmin(|q| self.weight(q), rng) else {
                return false;
            };
            self.add(var, root);
            return true;
        }
        placed.shuffle(rng);
        let searches: Vec<(Vec<f64>, Vec<usize>)> = placed.iter().map(|&u| self.dijkstra(&self.chains[u])).collect();
        let root = self.argmin(
            |q| {
                let w = self.weight(q);
                placed
                    .iter()
                    .zip(&searches)
                    .map(|(&u, (d, _))| if self.chains[u].contains(&q) { w } else { d[q] })
                    .sum()
            },
            rng,
        );
        let Some(root) = root else {
            return false;
        };
        let mut chain = vec![root];
        let mut members = BTreeSet::from([root]);
        let mut starts = BTreeSet::new();
        let mut segments = Vec::with_capacity(placed.len());
        for (&u, (d, parent)) in placed.iter().zip(&searches) {
            let start = *chain
                .iter()
                .min_by(|&&x, &&y| d[x].total_cmp(&d[y]))
                .expect("chain is non-empty");
            starts.insert(start);
            let mut segment = Vec::new();
            let mut q = parent[start];
            // distances fall strictly along parent links, so the path
            // cannot re-enter the chain
            while q != NONE && !self.chains[u].contains(&q) {
                segment.push(q);
                members.insert(q);
                chain.push(q);
                q = parent[q];
            }
            segments.push((u, segment));
        }
        for &q in &chain {
            self.add(var, q);
        }
        // hand each path tail beyond the last branching point to its target
        for (u, segment) in segments {
            let keep = segment.iter().rposition(|q| starts.contains(q)).map_or(0, |k| k + 1);
            for &q in &segment[keep..] {
                self.remove(var, q);
                self.add(u, q);
            }
        }
        debug_assert!(!self.chains[var].is_empty() && members.contains(&root));
        true
    }

    /// Drops qubits no chain needs any more.
    fn trim_all(&mut self) {
        let mut chains: Vec<Vec<usize>> = self.chains.iter().map(|c| c.iter().copied().collect()).collect();
        prune(&mut chains, self.neighbors, self.hw);
        for (var, chain) in chains.into_iter().enumerate() {
            let keep: BTreeSet<usize> = chain.into_iter().collect();
            let gone: Vec<usize> = self.chains[var].difference(&keep).copied().collect();
            for q in gone {
                self.remove(var, q);
            }
        }
    }

    /// Variables on overfilled qubits together with their neighbours.
    fn hot_region(&self) -> Vec<usize> {
        let mut region = BTreeSet::new();
        for (v, chain) in self.chains.iter().enumerate() {
            if chain.iter().any(|&q| self.fill[q] > 1) {
                region.insert(v);
                region.extend(self.neighbors[v].iter().copied());
            }
        }
        region.into_iter().collect()
    }

    fn max_fill(&self) -> u32 {
        self.fill.iter().copied().max().unwrap_or(0)
    }

    fn overfill(&self) -> u32 {
        self.fill.iter().map(|&f| f.saturating_sub(1)).sum()
    }
}

/// Breadth-first order over the primal graph from a random start, covering
/// every component.
fn bfs_order(neighbors: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = neighbors.len();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = neighbors[v].iter().copied().filter(|&u| !seen[u]).collect();
            next.shuffle(rng);
            for u in next {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    order
}

/// True when `chain` is connected on usable couplers.
fn connected(chain: &[usize], hw: &HardwareGraph) -> bool {
    let Some(&first) = chain.first() else {
        return true;
    };
    let members: BTreeSet<usize> = chain.iter().copied().collect();
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(x) = queue.pop_front() {
        for y in hw.usable_neighbors(x) {
            if members.contains(&y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen.len() == members.len()
}

/// Drops qubits of `chain` (the chain of `var`) that neither connectivity nor
/// any coupling to an already placed neighbour needs.
fn trim(chain: &mut Vec<usize>, var: usize, chains: &[Vec<usize>], neighbors: &[Vec<usize>], hw: &HardwareGraph) {
    let mut k = 0;
    while k < chain.len() && chain.len() > 1 {
        let rest: Vec<usize> = chain.iter().copied().filter(|&p| p != chain[k]).collect();
        let covered = neighbors[var].iter().all(|&u| {
            chains[u].is_empty()
                || rest
                    .iter()
                    .any(|&p| chains[u].iter().any(|&r| r == p || hw.has_coupler(p, r)))
        });
        if covered && connected(&rest, hw) {
            *chain = rest;
            k = 0;
        } else {
            k += 1;
        }
    }
}

/// Trims every chain until no qubit can be dropped.
fn prune(chains: &mut [Vec<usize>], neighbors: &[Vec<usize>], hw: &HardwareGraph) {
    for _ in 0..chains.len() {
        let before: usize = chains.iter().map(Vec::len).sum();
        for var in 0..chains.len() {
            let mut chain = std::mem::take(&mut chains[var]);
            trim(&mut chain, var, chains, neighbors, hw);
            chains[var] = chain;
        }
        if chains.iter().map(Vec::len).sum::<usize>() == before {
            break;
        }
    }
}

/// Searches for a minor embedding of the model's primal graph. Deterministic
/// for a fixed seed; returns [`Error::NotFound`] when every restart fails.
pub fn find_embedding(model: &QuadraticModel, hw: &HardwareGraph, seed: u64) -> Result<Embedding> {
    find_embedding_with(model, hw, seed, &FindOptions::default())
}

pub fn find_embedding_with(
    model: &QuadraticModel,
    hw: &HardwareGraph,
    seed: u64,
    opts: &FindOptions,
) -> Result<Embedding> {
    let n = model.num_vars();
    if n == 0 {
        return Ok(Embedding::new(BTreeMap::new(), opts.lambda));
    }
    if n > hw.num_usable() {
        return Err(Error::NotFound(format!(
            "{n} variables cannot fit on {} usable qubits",
            hw.num_usable()
        )));
    }
    let neighbors = model.neighbors();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.restarts.max(1) {
        let mut order = bfs_order(&neighbors, &mut rng);
        let mut placer = Placer::new(hw, &neighbors);
        placer.reshuffle(&mut rng);
        let mut ok = order.iter().all(|&v| placer.place(v, &mut rng));
        let mut best = (u32::MAX, u32::MAX);
        let mut stale = 0;
        for _ in 0..opts.passes {
            if !ok || placer.max_fill() <= 1 {
                break;
            }
            placer.reshuffle(&mut rng);
            // alternate full passes with passes over the congested region
            let focus = stale % 2 == 1;
            let mut batch = if focus { placer.hot_region() } else { order.clone() };
            batch.shuffle(&mut rng);
            if !focus {
                order = batch.clone();
            }
            for &v in &batch {
                placer.tear_out(v);
                if !placer.place(v, &mut rng) {
                    ok = false;
                    break;
                }
            }
            placer.trim_all();
            let score = (placer.max_fill(), placer.overfill());
            if score < best {
                best = score;
                stale = 0;
            } else {
                stale += 1;
                if stale >= opts.patience {
                    break;
                }
            }
        }
        if !ok || placer.max_fill() > 1 {
            continue;
        }
        let mut chains: Vec<Vec<usize>> = placer.chains.into_iter().map(|c| c.into_iter().collect()).collect();
        prune(&mut chains, &neighbors, hw);
        let emb = Embedding::new(chains.into_iter().enumerate().collect(), opts.lambda);
        if validate_embedding(&emb, model, hw).is_valid() {
            return Ok(emb);
        }
    }
    Err(Error::NotFound(format!(
        "no embedding of {n} variables found after {} restarts",
        opts.restarts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_r33_model, build_rm2_model, to_spin, Domain, PenaltyConfig};
    use num_traits::One;

    #[test]
    fn single_variable() {
        let hw = HardwareGraph::default_chip();
        let m = QuadraticModel::new(1, Domain::Spin);
        let emb = find_embedding(&m, &hw, 0).unwrap();
        assert_eq!(emb.chains.len(), 1);
        assert_eq!(emb.chains[&0].len(), 1);
    }

    #[test]
    fn triangle_needs_a_chain() {
        let hw = HardwareGraph::default_chip();
        let mut m = QuadraticModel::new(3, Domain::Spin);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            m.add_quadratic(i, j, Coef::one());
        }
        let emb = find_embedding(&m, &hw, 5).unwrap();
        assert!(validate_embedding(&emb, &m, &hw).is_valid());
        // Chimera is bipartite, so some chain has length >= 2
        assert!(emb.total_qubits() >= 4);
    }

    #[test]
    fn r33_fixed_model_embeds() {
        let hw = HardwareGraph::default_chip();
        let m = to_spin(&build_r33_model(6, true).unwrap()).unwrap();
        let emb = find_embedding(&m, &hw, 1).unwrap();
        assert!(validate_embedding(&emb, &m, &hw).is_valid());
        assert_eq!(emb.chains.len(), 14);
    }

    #[test]
    fn r82_model_embeds() {
        let hw = HardwareGraph::default_chip();
        let m = to_spin(&build_rm2_model(8, &PenaltyConfig::default()).unwrap()).unwrap();
        let emb = find_embedding(&m, &hw, 3).unwrap();
        assert!(validate_embedding(&emb, &m, &hw).is_valid());
        assert!(emb.total_qubits() >= 54);
        assert!(emb.total_qubits() <= hw.num_usable());
    }

    #[test]
    fn deterministic_per_seed() {
        let hw = HardwareGraph::default_chip();
        let m = to_spin(&build_r33_model(5, false).unwrap()).unwrap();
        assert_eq!(find_embedding(&m, &hw, 9).unwrap(), find_embedding(&m, &hw, 9).unwrap());
    }

    #[test]
    fn every_returned_embedding_is_valid() {
        let hw = HardwareGraph::default_chip();
        let m = to_spin(&build_r33_model(5, false).unwrap()).unwrap();
        for seed in 0..100 {
            if let Ok(emb) = find_embedding(&m, &hw, seed) {
                assert!(validate_embedding(&emb, &m, &hw).is_valid(), "seed {seed}");
            }
        }
    }

    #[test]
    fn too_many_variables() {
        let hw = HardwareGraph::default_chip();
        let m = QuadraticModel::new(200, Domain::Spin);
        assert!(matches!(find_embedding(&m, &hw, 0), Err(Error::NotFound(_))));
    }
}
