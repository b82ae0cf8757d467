//! Non-isomorphic simple graphs by orderly vertex augmentation, with a
//! canonical form from partition refinement plus individualization.

use std::collections::HashSet;

/// Adjacency rows as bitmasks; `n <= 8`.
pub type Adj = Vec<u8>;

fn refine(adj: &Adj, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    loop {
        let mut cell_of = vec![0usize; adj.len()];
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                cell_of[v] = i;
            }
        }
        let mut next = Vec::with_capacity(cells.len());
        for c in &cells {
            let mut keyed: Vec<(Vec<u8>, usize)> = c
                .iter()
                .map(|&v| {
                    let mut sig = vec![0u8; cells.len()];
                    for w in 0..adj.len() {
                        if adj[v] >> w & 1 == 1 {
                            sig[cell_of[w]] += 1;
                        }
                    }
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|&(_, v)| v).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

fn encode(adj: &Adj, order: &[usize]) -> u32 {
    let mut code = 0u32;
    let mut bit = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if adj[order[i]] >> order[j] & 1 == 1 {
                code |= 1 << bit;
            }
            bit += 1;
        }
    }
    code
}

fn search(adj: &Adj, cells: Vec<Vec<usize>>, best: &mut u32) {
    let cells = refine(adj, cells);
    match cells.iter().position(|c| c.len() > 1) {
        None => {
            let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
            *best = (*best).min(encode(adj, &order));
        }
        Some(i) => {
            let cell = &cells[i];
            // Swapping twins in one cell is an automorphism fixing the
            // partition, so only one of each twin class needs exploring.
            let twins = |v: usize, w: usize| adj[v] & !(1 << w) == adj[w] & !(1 << v);
            let mut explored: Vec<usize> = Vec::new();
            for &v in cell {
                if explored.iter().any(|&w| twins(v, w)) {
                    continue;
                }
                explored.push(v);
                let mut split = cells.clone();
                split[i] = cell.iter().copied().filter(|&w| w != v).collect();
                split.insert(i, vec![v]);
                search(adj, split, best);
            }
        }
    }
}

/// Canonical code: identical for isomorphic graphs.
pub fn canonical(adj: &Adj) -> u32 {
    let mut best = u32::MAX;
    search(adj, vec![(0..adj.len()).collect()], &mut best);
    best
}

/// One representative of every isomorphism class, indexed by order 0..=max_n.
pub fn all_graphs(max_n: usize) -> Vec<Vec<Adj>> {
    assert!(max_n <= 8);
    let mut levels: Vec<Vec<Adj>> = vec![vec![Vec::new()]];
    for n in 1..=max_n {
        let mut seen = HashSet::new();
        let mut level = Vec::new();
        for g in &levels[n - 1] {
            for nbrs in 0u16..1 << (n - 1) {
                let mut adj = g.clone();
                adj.push(nbrs as u8);
                for v in 0..n - 1 {
                    if nbrs >> v & 1 == 1 {
                        adj[v] |= 1 << (n - 1);
                    }
                }
                if seen.insert(canonical(&adj)) {
                    level.push(adj);
                }
            }
        }
        levels.push(level);
    }
    levels
}

pub fn edges(adj: &Adj) -> Vec<(usize, usize)> {
    let n = adj.len();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| adj[i] >> j & 1 == 1).collect()
}

