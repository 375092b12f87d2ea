use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Simple undirected connected graph on samples `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are unordered; repeats are
    /// merged. The graph must have at least two vertices and be connected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(Error::UnknownSample(v));
                }
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop on vertex {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let g = Graph { n, edges: set };
        if n < 2 || !g.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(g)
    }

    /// The linear cluster `1 – 2 – … – n`.
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|a| (a, a + 1)))
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Neighbors of `a`, ascending.
    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(u, v)| {
                if u == a {
                    Some(v)
                } else if v == a {
                    Some(u)
                } else {
                    None
                }
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn degree(&self, a: usize) -> usize {
        self.neighbors(a).len()
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n + 1];
        let mut stack = vec![1];
        seen[1] = true;
        while let Some(a) = stack.pop() {
            for b in self.neighbors(a) {
                if !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_neighbors() {
        let g = Graph::path(4).unwrap();
        assert_eq!(g.neighbors(1), vec![2]);
        assert_eq!(g.neighbors(2), vec![1, 3]);
        assert_eq!(g.degree(4), 1);
        assert_eq!(g.edges().count(), 3);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert_eq!(Graph::path(1), Err(Error::DisconnectedGraph));
        assert_eq!(Graph::new(3, [(1, 2)]), Err(Error::DisconnectedGraph));
        assert!(Graph::new(2, [(1, 1)]).is_err());
        assert_eq!(Graph::new(2, [(1, 3)]), Err(Error::UnknownSample(3)));
        assert_eq!(Graph::new(2, [(2, 1), (1, 2)]).unwrap().edges().count(), 1);
    }
}
