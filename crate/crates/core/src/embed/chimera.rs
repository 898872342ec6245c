use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fabrication defects of the 4×4 chip used by default. Transcribed by hand
/// from the chip layout figure; treat as configuration.
pub const DEFAULT_DEFECTS: [usize; 22] = [
    4, 13, 22, 30, 33, 41, 47, 52, 58, 63, 66, 79, 84, 91, 95, 98, 117, 120, 123, 125, 126, 128,
];

/// A Chimera qubit graph: a grid of `K_{shore,shore}` unit cells.
///
/// Qubits are numbered from 1, cells row-major from the top-left, the left
/// partition before the right partition inside a cell. Left-partition qubits
/// couple to the same position in the cells above and below, right-partition
/// qubits to the cells left and right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareGraph {
    rows: usize,
    cols: usize,
    shore: usize,
    usable: Vec<bool>,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareFile {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
    #[serde(default)]
    pub defects: Vec<usize>,
}

/// Which half of a unit cell a qubit sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Left,
    Right,
}

pub fn chimera_graph(rows: usize, cols: usize, shore: usize, defects: &[usize]) -> Result<HardwareGraph> {
    if rows == 0 || cols == 0 || shore == 0 {
        return Err(Error::domain("Chimera dimensions must be positive"));
    }
    let total = rows * cols * 2 * shore;
    let mut usable = vec![true; total + 1];
    usable[0] = false;
    for &d in defects {
        if d == 0 || d > total {
            return Err(Error::domain(format!("defect qubit {d} outside 1..={total}")));
        }
        usable[d] = false;
    }
    let id = |r: usize, c: usize, side: usize, k: usize| (r * cols + c) * 2 * shore + side * shore + k + 1;
    let mut edges = BTreeSet::new();
    let mut add = |a: usize, b: usize| {
        edges.insert((a.min(b), a.max(b)));
    };
    for r in 0..rows {
        for c in 0..cols {
            for i in 0..shore {
                for j in 0..shore {
                    add(id(r, c, 0, i), id(r, c, 1, j));
                }
                if r + 1 < rows {
                    add(id(r, c, 0, i), id(r + 1, c, 0, i));
                }
                if c + 1 < cols {
                    add(id(r, c, 1, i), id(r, c + 1, 1, i));
                }
            }
        }
    }
    let mut adj = vec![Vec::new(); total + 1];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    Ok(HardwareGraph {
        rows,
        cols,
        shore,
        usable,
        edges,
        adj,
    })
}

impl HardwareGraph {
    /// The 4×4×8 chip with [`DEFAULT_DEFECTS`] removed (106 usable qubits).
    pub fn default_chip() -> Self {
        chimera_graph(4, 4, 4, &DEFAULT_DEFECTS).expect("default chip is valid")
    }

    pub fn from_file(file: &HardwareFile) -> Result<Self> {
        chimera_graph(file.rows, file.cols, file.shore, &file.defects)
    }

    pub fn to_file(&self) -> HardwareFile {
        HardwareFile {
            rows: self.rows,
            cols: self.cols,
            shore: self.shore,
            defects: self.defects(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.usable.len() - 1
    }

    pub fn num_usable(&self) -> usize {
        self.usable.iter().filter(|&&u| u).count()
    }

    pub fn defects(&self) -> Vec<usize> {
        (1..=self.num_qubits()).filter(|&q| !self.usable[q]).collect()
    }

    pub fn usable_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.num_qubits()).filter(|&q| self.usable[q])
    }

    pub fn is_usable(&self, q: usize) -> bool {
        q >= 1 && q <= self.num_qubits() && self.usable[q]
    }

    /// All couplers of the full lattice, defects included.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    /// Lattice neighbours, defects included.
    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adj[q].len()
    }

    /// Usable neighbours of `q`.
    pub fn usable_neighbors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[q].iter().copied().filter(|&p| self.usable[p])
    }

    /// True when a programmable coupler joins `a` and `b` (both usable).
    pub fn has_coupler(&self, a: usize, b: usize) -> bool {
        self.is_usable(a) && self.is_usable(b) && self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// `(row, col, partition, index)` of qubit `q`.
    pub fn coordinates(&self, q: usize) -> (usize, usize, Partition, usize) {
        let z = q - 1;
        let cell = z / (2 * self.shore);
        let within = z % (2 * self.shore);
        let part = if within < self.shore {
            Partition::Left
        } else {
            Partition::Right
        };
        (cell / self.cols, cell % self.cols, part, within % self.shore)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.shore)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lattice_structure() {
        let g = chimera_graph(4, 4, 4, &[]).unwrap();
        assert_eq!(g.num_qubits(), 128);
        assert_eq!(g.edges().len(), 256 + 96);
        let intra = g.edges().iter().filter(|&&(a, b)| (a - 1) / 8 == (b - 1) / 8).count();
        assert_eq!(intra, 256);
        let six = (1..=128).filter(|&q| g.degree(q) == 6).count();
        // interior rows (left partition) and interior columns (right partition)
        assert_eq!(six, 64);
        for q in 1..=128 {
            let (r, c, part, _) = g.coordinates(q);
            let interior = match part {
                Partition::Left => r > 0 && r < 3,
                Partition::Right => c > 0 && c < 3,
            };
            if interior {
                assert_eq!(g.degree(q), 6);
            } else {
                assert_eq!(g.degree(q), 5);
            }
        }
    }

    #[test]
    fn default_chip_has_106_usable() {
        let g = HardwareGraph::default_chip();
        assert_eq!(g.num_usable(), 106);
        assert_eq!(g.defects(), DEFAULT_DEFECTS.to_vec());
        for q in [75, 104, 107, 112] {
            assert!(g.is_usable(q));
        }
    }

    #[test]
    fn published_chain_couplers() {
        let g = HardwareGraph::default_chip();
        assert!(g.has_coupler(104, 112));
        assert!(g.has_coupler(107, 112));
        assert!(g.has_coupler(75, 107));
        assert!(!g.has_coupler(104, 75));
        assert_eq!(g.coordinates(104), (3, 0, Partition::Right, 3));
        assert_eq!(g.coordinates(75), (2, 1, Partition::Left, 2));
    }

    #[test]
    fn single_pair_cell() {
        let g = chimera_graph(1, 1, 1, &[]).unwrap();
        assert_eq!(g.num_qubits(), 2);
        assert_eq!(g.edges().len(), 1);
        assert!(g.has_coupler(1, 2));
    }

    #[test]
    fn defect_validation() {
        assert!(chimera_graph(4, 4, 4, &[129]).is_err());
        assert!(chimera_graph(4, 4, 4, &[0]).is_err());
        assert!(chimera_graph(0, 4, 4, &[]).is_err());
        let g = chimera_graph(1, 1, 1, &[2]).unwrap();
        assert!(!g.has_coupler(1, 2));
    }

    #[test]
    fn file_roundtrip() {
        let g = HardwareGraph::default_chip();
        let text = serde_json::to_string(&g.to_file()).unwrap();
        let back = HardwareGraph::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
