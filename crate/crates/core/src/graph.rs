//! Graph ↔ bitstring codec.
//!
//! An `N`-vertex simple graph is stored as the `L_N = N(N-1)/2` entries of its
//! adjacency matrix below the diagonal, read column by column:
//! `a(2,1) a(3,1) .. a(N,1) a(3,2) .. a(N,2) .. a(N,N-1)`.
//! Vertices are 1-based, bit positions 0-based.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest accepted vertex count. `L_23 = 253` fits in four words.
pub const MAX_VERTICES: usize = 23;

const WORDS: usize = 4;

/// Number of vertex pairs, `N(N-1)/2`.
pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn check_vertices(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VERTICES {
        return Err(Error::domain(format!("vertex count {n} outside 1..={MAX_VERTICES}")));
    }
    Ok(())
}

/// Zero-based position of edge `{v, v'}` with `1 <= v' < v <= n`.
pub fn edge_index(v: usize, vp: usize, n: usize) -> Result<usize> {
    check_vertices(n)?;
    if vp == 0 || vp >= v || v > n {
        return Err(Error::domain(format!(
            "edge ({v},{vp}) invalid for N={n}: need 1 <= v' < v <= N"
        )));
    }
    // columns 1..v'-1 hold N-c entries each
    let before = (vp - 1) * n - (vp - 1) * vp / 2;
    Ok(before + (v - vp - 1))
}

/// The bijection between vertex pairs and bit positions for a fixed `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIndexMap {
    n: usize,
}

impl EdgeIndexMap {
    pub fn new(n: usize) -> Result<Self> {
        check_vertices(n)?;
        Ok(Self { n })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        edge_count(self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Accepts either orientation of the pair.
    pub fn index(&self, u: usize, w: usize) -> Result<usize> {
        let (v, vp) = if u > w { (u, w) } else { (w, u) };
        edge_index(v, vp, self.n)
    }

    /// Inverse of [`index`](Self::index): returns `(v, v')` with `v > v'`.
    pub fn endpoints(&self, idx: usize) -> Result<(usize, usize)> {
        if idx >= self.len() {
            return Err(Error::domain(format!(
                "bit position {idx} out of range for N={}",
                self.n
            )));
        }
        let mut rest = idx;
        for vp in 1..self.n {
            let col = self.n - vp;
            if rest < col {
                return Ok((vp + 1 + rest, vp));
            }
            rest -= col;
        }
        unreachable!("index checked against L_N")
    }

    /// All pairs `(v, v')` in bit order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n).flat_map(move |vp| (vp + 1..=self.n).map(move |v| (v, vp)))
    }
}

/// A graph encoded as its edge bitstring.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphBits {
    n: u8,
    words: [u64; WORDS],
}

impl GraphBits {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        check_vertices(n)?;
        Ok(Self {
            n: n as u8,
            words: [0; WORDS],
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Ok(Self::empty(n)?.complement())
    }

    /// Builds from the low `L_N` bits of `word` (bit `i` of the word is edge `i`).
    pub fn from_word(n: usize, word: u64) -> Result<Self> {
        check_vertices(n)?;
        let len = edge_count(n);
        if len > 64 {
            return Err(Error::domain(format!("N={n} needs more than one word")));
        }
        if len < 64 && word >> len != 0 {
            return Err(Error::domain(format!("word {word:#x} has bits beyond L_N={len}")));
        }
        let mut words = [0; WORDS];
        words[0] = word;
        Ok(Self { n: n as u8, words })
    }

    /// Builds from a slice of 0/1 values in bit order.
    pub fn from_bits(n: usize, bits: &[u8]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        if bits.len() != g.len() {
            return Err(Error::domain(format!(
                "expected {} bits for N={n}, got {}",
                g.len(),
                bits.len()
            )));
        }
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => g.set(i, true),
                _ => return Err(Error::domain(format!("bit {i} has value {b}"))),
            }
        }
        Ok(g)
    }

    /// Encodes a symmetric 0/1 adjacency matrix with zero diagonal.
    pub fn from_adjacency(adj: &[Vec<u8>]) -> Result<Self> {
        let n = adj.len();
        let mut g = Self::empty(n)?;
        for (i, row) in adj.iter().enumerate() {
            if row.len() != n {
                return Err(Error::domain("adjacency matrix is not square"));
            }
            if row[i] != 0 {
                return Err(Error::domain(format!("nonzero diagonal at vertex {}", i + 1)));
            }
            for (j, &x) in row.iter().enumerate() {
                if x > 1 {
                    return Err(Error::domain(format!("entry ({},{}) is not 0/1", i + 1, j + 1)));
                }
                if x != adj[j][i] {
                    return Err(Error::domain(format!("asymmetric entries at ({},{})", i + 1, j + 1)));
                }
            }
        }
        let map = EdgeIndexMap::new(n)?;
        for (idx, (v, vp)) in map.pairs().enumerate() {
            if adj[v - 1][vp - 1] == 1 {
                g.set(idx, true);
            }
        }
        Ok(g)
    }

    pub fn to_adjacency(&self) -> Vec<Vec<u8>> {
        let n = self.n_vertices();
        let mut adj = vec![vec![0u8; n]; n];
        for (idx, (v, vp)) in self.index_map().pairs().enumerate() {
            let b = self.get(idx) as u8;
            adj[v - 1][vp - 1] = b;
            adj[vp - 1][v - 1] = b;
        }
        adj
    }

    pub fn n_vertices(&self) -> usize {
        self.n as usize
    }

    /// `L_N`.
    pub fn len(&self) -> usize {
        edge_count(self.n_vertices())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_map(&self) -> EdgeIndexMap {
        EdgeIndexMap { n: self.n_vertices() }
    }

    pub fn words(&self) -> &[u64; WORDS] {
        &self.words
    }

    /// The single-word encoding; `None` when `L_N > 64`.
    pub fn as_word(&self) -> Option<u64> {
        (self.len() <= 64).then_some(self.words[0])
    }

    pub fn get(&self, idx: usize) -> bool {
        debug_assert!(idx < self.len());
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        assert!(idx < self.len(), "bit {idx} out of range");
        let mask = 1u64 << (idx % 64);
        if value {
            self.words[idx / 64] |= mask;
        } else {
            self.words[idx / 64] &= !mask;
        }
    }

    pub fn has_edge(&self, u: usize, w: usize) -> Result<bool> {
        Ok(self.get(self.index_map().index(u, w)?))
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Flips every edge bit.
    pub fn complement(&self) -> Self {
        let len = self.len();
        let mut words = [0u64; WORDS];
        for (k, w) in words.iter_mut().enumerate() {
            let lo = k * 64;
            if lo >= len {
                break;
            }
            let span = (len - lo).min(64);
            let mask = if span == 64 { u64::MAX } else { (1u64 << span) - 1 };
            *w = !self.words[k] & mask;
        }
        Self { n: self.n, words }
    }

    /// Bits as a 0/1 vector in edge order.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i) as u8).collect()
    }

    pub fn bit_string(&self) -> String {
        (0..self.len()).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for GraphBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphBits({self})")
    }
}

/// `N:<n>;bits:<0/1 string>`
impl fmt::Display for GraphBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N:{};bits:{}", self.n, self.bit_string())
    }
}

impl FromStr for GraphBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n_part, bits_part) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected `N:<n>;bits:<..>`, got {s:?}")))?;
        let n: usize = n_part
            .trim()
            .strip_prefix("N:")
            .ok_or_else(|| Error::Parse(format!("missing `N:` in {s:?}")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad vertex count: {e}")))?;
        let bits = bits_part
            .trim()
            .strip_prefix("bits:")
            .ok_or_else(|| Error::Parse(format!("missing `bits:` in {s:?}")))?
            .trim();
        let values = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        GraphBits::from_bits(n, &values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Reference ordering built by walking the columns literally.
    fn brute_order(n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for col in 1..=n {
            for row in 1..=n {
                if row > col {
                    out.push((row, col));
                }
            }
        }
        out
    }

    #[test]
    fn edge_index_examples() {
        assert_eq!(edge_index(2, 1, 4).unwrap(), 0);
        assert_eq!(edge_index(4, 3, 4).unwrap(), 5);
        assert_eq!(edge_index(3, 2, 5).unwrap(), 4);
        let order = brute_order(5);
        assert_eq!(order[4], (3, 2));
    }

    #[test]
    fn edge_index_rejects_bad_pairs() {
        assert!(edge_index(1, 1, 4).is_err());
        assert!(edge_index(2, 3, 4).is_err());
        assert!(edge_index(5, 1, 4).is_err());
        assert!(edge_index(2, 0, 4).is_err());
        assert!(edge_index(2, 1, 24).is_err());
    }

    #[test]
    fn edge_index_is_bijective_up_to_eight() {
        for n in 1..=8 {
            let map = EdgeIndexMap::new(n).unwrap();
            let order = brute_order(n);
            assert_eq!(order.len(), edge_count(n));
            let mut seen = vec![false; edge_count(n)];
            for (pos, &(v, vp)) in order.iter().enumerate() {
                let idx = edge_index(v, vp, n).unwrap();
                assert_eq!(idx, pos);
                assert!(!seen[idx]);
                seen[idx] = true;
                assert_eq!(map.endpoints(idx).unwrap(), (v, vp));
            }
            assert!(seen.iter().all(|&s| s));
            assert_eq!(map.pairs().collect::<Vec<_>>(), order);
        }
    }

    #[test]
    fn adjacency_examples() {
        let g = GraphBits::from_adjacency(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.bit_string(), "1");
        assert_eq!(g.to_adjacency(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(GraphBits::empty(4).unwrap().bit_string(), "000000");
        let k4 = vec![vec![0, 1, 1, 1], vec![1, 0, 1, 1], vec![1, 1, 0, 1], vec![1, 1, 1, 0]];
        assert_eq!(GraphBits::from_adjacency(&k4).unwrap().bit_string(), "111111");

        let g: GraphBits = "N:4;bits:100000".parse().unwrap();
        let adj = g.to_adjacency();
        let edges: usize = adj.iter().flatten().map(|&x| x as usize).sum();
        assert_eq!(edges, 2);
        assert_eq!(adj[1][0], 1);
    }

    #[test]
    fn adjacency_rejects_invalid() {
        assert!(GraphBits::from_adjacency(&[vec![0, 1], vec![0, 0]]).is_err());
        assert!(GraphBits::from_adjacency(&[vec![1, 0], vec![0, 0]]).is_err());
        assert!(GraphBits::from_adjacency(&[vec![0, 2], vec![2, 0]]).is_err());
    }

    #[test]
    fn roundtrip_exhaustive_small() {
        for n in 1..=5 {
            let len = edge_count(n);
            for w in 0..(1u64 << len) {
                let g = GraphBits::from_word(n, w).unwrap();
                assert_eq!(GraphBits::from_adjacency(&g.to_adjacency()).unwrap(), g);
            }
        }
    }

    #[test]
    fn complement_examples() {
        let e = GraphBits::empty(4).unwrap();
        assert_eq!(e.complement().bit_string(), "111111");
        // 5-cycle 1-2-3-4-5-1
        let mut c5 = GraphBits::empty(5).unwrap();
        for (u, w) in [(2, 1), (3, 2), (4, 3), (5, 4), (5, 1)] {
            let i = edge_index(u, w, 5).unwrap();
            c5.set(i, true);
        }
        let comp = c5.complement();
        assert_eq!(comp.popcount(), 5);
        for i in 0..10 {
            assert_ne!(comp.get(i), c5.get(i));
        }
        // the complement of C5 is the pentagram 1-3-5-2-4-1
        for (u, w) in [(3, 1), (5, 3), (5, 2), (4, 2), (4, 1)] {
            assert!(comp.has_edge(u, w).unwrap());
        }
    }

    #[test]
    fn text_format() {
        let g: GraphBits = "N:4;bits:101001".parse().unwrap();
        assert_eq!(g.to_string(), "N:4;bits:101001");
        assert!("N:4;bits:10100".parse::<GraphBits>().is_err());
        assert!("N:4;bits:10100x".parse::<GraphBits>().is_err());
        assert!("4;101001".parse::<GraphBits>().is_err());
    }

    #[test]
    fn max_size_graph() {
        let g = GraphBits::complete(MAX_VERTICES).unwrap();
        assert_eq!(g.len(), 253);
        assert_eq!(g.popcount(), 253);
        assert_eq!(g.complement().popcount(), 0);
        assert!(GraphBits::empty(24).is_err());
        assert!(g.as_word().is_none());
    }

    proptest! {
        #[test]
        fn roundtrip_random(n in 2usize..=MAX_VERTICES, seed in any::<[u64; 4]>()) {
            let mut g = GraphBits::empty(n).unwrap();
            for i in 0..g.len() {
                g.set(i, seed[i / 64] >> (i % 64) & 1 == 1);
            }
            prop_assert_eq!(GraphBits::from_adjacency(&g.to_adjacency()).unwrap(), g);
            prop_assert_eq!(g.complement().complement(), g);
            prop_assert_eq!(g.to_string().parse::<GraphBits>().unwrap(), g);
        }
    }
}
