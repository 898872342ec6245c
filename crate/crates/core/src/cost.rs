//! The Ramsey cost `h(G) = C_m(G) + I_n(G)`: the number of `m`-cliques plus
//! the number of `n`-independent sets of `G`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_count, EdgeIndexMap, GraphBits, MAX_VERTICES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RamseyInstance {
    #[serde(rename = "N")]
    pub n_vertices: usize,
    #[serde(rename = "m")]
    pub clique_order: usize,
    #[serde(rename = "n")]
    pub independent_order: usize,
}

impl RamseyInstance {
    pub fn new(n_vertices: usize, clique_order: usize, independent_order: usize) -> Result<Self> {
        if !(2..=MAX_VERTICES).contains(&n_vertices) {
            return Err(Error::domain(format!("N={n_vertices} outside 2..={MAX_VERTICES}")));
        }
        check_order(clique_order)?;
        check_order(independent_order)?;
        Ok(Self {
            n_vertices,
            clique_order,
            independent_order,
        })
    }

    /// Same instance with the two orders exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n_vertices: self.n_vertices,
            clique_order: self.independent_order,
            independent_order: self.clique_order,
        }
    }

    pub fn num_edges(&self) -> usize {
        edge_count(self.n_vertices)
    }
}

fn check_order(k: usize) -> Result<()> {
    if !(2..=MAX_VERTICES).contains(&k) {
        return Err(Error::domain(format!("order {k} outside 2..={MAX_VERTICES}")));
    }
    Ok(())
}

/// For every `k`-subset of the `N` vertices, the mask of its `k(k-1)/2` edge bits.
#[derive(Debug)]
pub struct SubsetMasks {
    n: usize,
    k: usize,
    masks: Vec<[u64; 4]>,
}

impl SubsetMasks {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let map = EdgeIndexMap::new(n)?;
        let mut masks = Vec::new();
        if k <= n {
            let mut subset: Vec<usize> = (1..=k).collect();
            loop {
                let mut mask = [0u64; 4];
                for a in 0..k {
                    for b in a + 1..k {
                        let idx = map.index(subset[b], subset[a])?;
                        mask[idx / 64] |= 1 << (idx % 64);
                    }
                }
                masks.push(mask);
                if !next_combination(&mut subset, n) {
                    break;
                }
            }
        }
        Ok(Self { n, k, masks })
    }

    /// Shared, lazily built table for `(n, k)`.
    pub fn cached(n: usize, k: usize) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<SubsetMasks>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().unwrap().get(&(n, k)) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Self::new(n, k)?);
        cache.lock().unwrap().insert((n, k), built.clone());
        Ok(built)
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[[u64; 4]] {
        &self.masks
    }

    /// Subsets whose edge bits are all set in `words`.
    pub fn count_full(&self, words: &[u64; 4]) -> u64 {
        self.masks
            .iter()
            .filter(|m| (0..4).all(|i| words[i] & m[i] == m[i]))
            .count() as u64
    }

    /// Single-word masks, available when `L_N <= 64`.
    pub fn word_masks(&self) -> Option<Vec<u64>> {
        (edge_count(self.n) <= 64).then(|| self.masks.iter().map(|m| m[0]).collect())
    }

    pub fn order(&self) -> usize {
        self.k
    }
}

/// Advances `subset` (sorted, values in `1..=n`) to the next combination in
/// lexicographic order; false after the last one.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - 1 - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Number of `m`-cliques in `g`. Zero when `m > N`.
pub fn count_cliques(g: &GraphBits, m: usize) -> Result<u64> {
    check_order(m)?;
    if m > g.n_vertices() {
        return Ok(0);
    }
    if m == 2 {
        return Ok(g.popcount() as u64);
    }
    Ok(SubsetMasks::cached(g.n_vertices(), m)?.count_full(g.words()))
}

/// Number of `n`-independent sets in `g`.
pub fn count_independent(g: &GraphBits, n: usize) -> Result<u64> {
    count_cliques(&g.complement(), n)
}

pub fn ramsey_energy(g: &GraphBits, inst: &RamseyInstance) -> Result<u64> {
    if g.n_vertices() != inst.n_vertices {
        return Err(Error::domain(format!(
            "graph has {} vertices, instance expects {}",
            g.n_vertices(),
            inst.n_vertices
        )));
    }
    Ok(count_cliques(g, inst.clique_order)? + count_independent(g, inst.independent_order)?)
}

/// `h_{m,n}(G) == h_{n,m}(complement G)`.
pub fn complement_symmetry_check(g: &GraphBits, inst: &RamseyInstance) -> Result<bool> {
    Ok(ramsey_energy(g, inst)? == ramsey_energy(&g.complement(), &inst.swapped())?)
}

#[derive(Debug, Clone)]
enum WordTerm {
    Zero,
    Pairs,
    Subsets(Vec<u64>),
}

impl WordTerm {
    fn new(n: usize, k: usize) -> Result<Self> {
        Ok(if k > n {
            WordTerm::Zero
        } else if k == 2 {
            WordTerm::Pairs
        } else {
            let masks = SubsetMasks::cached(n, k)?
                .word_masks()
                .expect("caller checked L_N <= 64");
            WordTerm::Subsets(masks)
        })
    }

    #[inline]
    fn count(&self, w: u64) -> u64 {
        match self {
            WordTerm::Zero => 0,
            WordTerm::Pairs => w.count_ones() as u64,
            WordTerm::Subsets(masks) => masks.iter().filter(|&&m| w & m == m).count() as u64,
        }
    }
}

/// Evaluator over single-word graphs (`L_N <= 64`) used by the exhaustive
/// oracle. Order-2 terms reduce to popcounts.
#[derive(Debug, Clone)]
pub struct WordEnergy {
    full: u64,
    cliques: WordTerm,
    independents: WordTerm,
}

impl WordEnergy {
    pub fn new(inst: &RamseyInstance) -> Result<Self> {
        let len = inst.num_edges();
        if len > 64 {
            return Err(Error::domain(format!("L_N={len} exceeds one word")));
        }
        Ok(Self {
            full: if len == 64 { u64::MAX } else { (1u64 << len) - 1 },
            cliques: WordTerm::new(inst.n_vertices, inst.clique_order)?,
            independents: WordTerm::new(inst.n_vertices, inst.independent_order)?,
        })
    }

    #[inline]
    pub fn energy(&self, w: u64) -> u64 {
        self.cliques.count(w) + self.independents.count(!w & self.full)
    }
}
