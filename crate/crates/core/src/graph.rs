//! Simple undirected graphs and a union-find.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected graph with sorted adjacency lists and no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    max_degree: usize,
}

impl Graph {
    pub fn from_edges(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); vertices];
        for (a, b) in edges {
            for v in [a, b] {
                if v >= vertices {
                    return Err(Error::IndexOutOfRange { index: v, len: vertices });
                }
            }
            if a == b {
                return Err(Error::param(format!("self-loop at vertex {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(Self::from_adjacency(adj))
    }

    /// Builds from possibly unsorted, duplicated neighbour lists. The lists
    /// must already be symmetric.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        Graph { adj, max_degree }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Component label of every vertex, labels dense from 0 in order of the
    /// smallest member.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.adj.len());
        for (v, list) in self.adj.iter().enumerate() {
            for &w in list {
                uf.union(v, w);
            }
        }
        uf.dense_labels()
    }

    /// Graph with vertices renamed by `perm` (vertex v becomes `perm[v]`).
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        let mut adj = vec![Vec::new(); self.adj.len()];
        for (v, list) in self.adj.iter().enumerate() {
            adj[perm[v]] = list.iter().map(|&w| perm[w]).collect();
        }
        Graph::from_adjacency(adj)
    }
}

/// Disjoint sets with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }

    pub fn dense_labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|v| {
                let r = self.find(v);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_bad_vertices() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn degree_and_distances() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (1, 0)]).unwrap();
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.edge_count(), 3);
        let d = g.bfs_distances(0);
        assert_eq!(&d[..4], &[0, 1, 2, 3]);
        assert_eq!(d[4], usize::MAX);
        assert_eq!(g.component_labels(), vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn union_find_sizes() {
        let mut uf = UnionFind::new(6);
        assert!(uf.union(0, 1));
        assert!(uf.union(2, 1));
        assert!(!uf.union(0, 2));
        assert_eq!(uf.set_size(2), 3);
        assert_eq!(uf.set_size(5), 1);
    }
}
