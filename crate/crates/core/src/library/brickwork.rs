use super::Graph;

/// Wire metadata of a brickwork block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockWires {
    pub inputs: [usize; 2],
    pub outputs: [usize; 2],
    /// Vertices carrying measured ancillas, in column-major measurement order.
    pub measured: [usize; 8],
}

/// The ten-vertex brickwork block: two rows of five, bridged at columns 3 and 5.
pub fn brickwork_block() -> (Graph, BlockWires) {
    let edges = [(1, 2), (2, 3), (3, 4), (4, 5), (6, 7), (7, 8), (8, 9), (9, 10), (3, 8), (5, 10)];
    let g = Graph::numbered(10, edges).expect("brickwork block is simple");
    (g, BlockWires { inputs: [1, 6], outputs: [5, 10], measured: [1, 6, 2, 7, 3, 8, 4, 9] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_shape() {
        let (g, w) = brickwork_block();
        assert_eq!(g.num_vertices(), 10);
        assert_eq!(g.num_edges(), 10);
        assert_eq!(g.degree(3), 3);
        assert!(w.inputs.iter().all(|v| !w.outputs.contains(v)));
        let mut all: alloc::vec::Vec<usize> = w.measured.to_vec();
        all.extend(w.outputs);
        all.sort_unstable();
        assert_eq!(all, (1..=10).collect::<alloc::vec::Vec<_>>());
    }
}
