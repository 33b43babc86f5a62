use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{Subsystem, StateVector};

/// A simple undirected graph over labelled vertices.
///
/// Vertex order is significant: it fixes the qubit order of the graph state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::InvalidGraph(format!("vertex {v} listed twice")));
            }
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on {u}")));
            }
            if !vertices.contains(&u) || !vertices.contains(&v) {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) references a missing vertex")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self { vertices, edges: set })
    }

    /// Graph on vertices `1..=n`.
    pub fn numbered(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new((1..=n).collect(), edges)
    }

    pub fn empty(n: usize) -> Self {
        Self { vertices: (1..=n).collect(), edges: BTreeSet::new() }
    }

    pub fn path(n: usize) -> Self {
        Self::numbered(n, (1..n).map(|v| (v, v + 1))).expect("path graph is simple")
    }

    /// Star with centre 1 and leaves `2..=n`.
    pub fn star(n: usize) -> Self {
        Self::numbered(n, (2..=n).map(|v| (1, v))).expect("star graph is simple")
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("a ring needs at least 3 vertices, got {n}")));
        }
        Self::numbered(n, (1..=n).map(|v| (v, v % n + 1)))
    }

    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)));
        Self::numbered(n, edges).expect("complete graph is simple")
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// Position of a vertex in the vertex order.
    pub fn index_of(&self, v: usize) -> Result<usize> {
        self.vertices.iter().position(|&x| x == v).ok_or_else(|| Error::InvalidGraph(format!("no vertex {v}")))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.vertices.iter().copied().filter(|&u| self.has_edge(u, v)).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    /// Induced subgraph on `keep`, in this graph's vertex order.
    pub fn induced(&self, keep: &[usize]) -> Result<Self> {
        if let Some(v) = keep.iter().find(|v| !self.contains(**v)) {
            return Err(Error::InvalidGraph(format!("no vertex {v}")));
        }
        let vertices: Vec<usize> = self.vertices.iter().copied().filter(|v| keep.contains(v)).collect();
        let edges = self.edges.iter().copied().filter(|(u, v)| keep.contains(u) && keep.contains(v));
        Self::new(vertices, edges)
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.first() else { return true };
        let mut seen = alloc::vec![start];
        let mut frontier = alloc::vec![start];
        while let Some(v) = frontier.pop() {
            for u in self.neighbors(v) {
                if !seen.contains(&u) {
                    seen.push(u);
                    frontier.push(u);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// `K_v = X_v prod_{u ~ v} Z_u` as a Pauli string over the vertex order.
    pub fn stabilizer(&self, v: usize) -> Result<PauliString> {
        let idx = self.index_of(v)?;
        let mut letters = alloc::vec![Pauli::I; self.vertices.len()];
        letters[idx] = Pauli::X;
        for u in self.neighbors(v) {
            letters[self.index_of(u)?] = Pauli::Z;
        }
        Ok(PauliString::new(false, letters))
    }

    /// All `K_v`, in vertex order.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        self.vertices.iter().map(|&v| self.stabilizer(v).expect("vertex exists")).collect()
    }
}

/// Default qubit label of a graph vertex.
pub fn vertex_label(v: usize) -> alloc::string::String {
    format!("v{v}")
}

/// `prod_{(u,v) in E} CZ_{uv} |+>^{|V|}`, one qubit per vertex labelled `v<n>`.
pub fn graph_state(g: &Graph) -> Result<StateVector> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    let subs = g.vertices().iter().map(|&v| Subsystem::qubit(vertex_label(v))).collect();
    let positions: Vec<(usize, usize)> =
        g.edges().map(|(u, v)| (g.index_of(u).unwrap(), g.index_of(v).unwrap())).collect();
    let amps = (0..1usize << n)
        .map(|x| {
            let bit = |i: usize| (x >> (n - 1 - i)) & 1;
            let parity = positions.iter().filter(|&&(a, b)| bit(a) & bit(b) == 1).count() % 2;
            linalg::r(if parity == 0 { 1.0 } else { -1.0 })
        })
        .collect();
    StateVector::new(subs, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::r;

    #[test]
    fn single_edge_graph_state() {
        let s = graph_state(&Graph::path(2)).unwrap();
        let want = [0.5, 0.5, 0.5, -0.5];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - r(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn path_stabilizers() {
        let g = Graph::path(3);
        let names: Vec<alloc::string::String> = g.stabilizers().iter().map(|p| format!("{p}")).collect();
        assert_eq!(names, ["+XZI", "+ZXZ", "+IZX"]);
        let s = graph_state(&g).unwrap();
        let ids: Vec<_> = (0..3).map(crate::tensor::SubsystemId).collect();
        for k in g.stabilizers() {
            let out = s.apply(&k.on(&ids).unwrap()).unwrap();
            assert!(out.max_abs_diff(&s).unwrap() < 1e-10);
        }
    }

    #[test]
    fn empty_graph_is_plus_product() {
        let s = graph_state(&Graph::empty(3)).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a - r(1.0 / 8f64.sqrt())).norm() < 1e-15));
    }

    #[test]
    fn validation_and_queries() {
        assert!(Graph::numbered(2, [(1, 1)]).is_err());
        assert!(Graph::numbered(2, [(1, 3)]).is_err());
        assert!(Graph::new(alloc::vec![1, 1], []).is_err());
        let g = Graph::numbered(4, [(1, 2), (2, 1), (3, 4)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert!(!g.is_connected());
        assert!(Graph::ring(4).unwrap().is_connected());
        assert_eq!(Graph::star(5).degree(1), 4);
        let h = Graph::complete(4).induced(&[1, 3, 4]).unwrap();
        assert_eq!(h.vertices(), &[1, 3, 4]);
        assert_eq!(h.num_edges(), 3);
        assert!(Graph::ring(2).is_err());
    }
}
