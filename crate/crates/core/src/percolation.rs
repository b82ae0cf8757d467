//! Error-cluster statistics on a qubit graph.
//!
//! An α-subset of a vertex set X is a connected vertex set S with
//! `|S ∩ X| >= α |S|`; `maxconn_α(X)` is the size of the largest one.
//!
//! [`maxconn_alpha`] solves this exactly. Whole components of the subgraph
//! induced on X ("terminals") can always be added to an α-subset, so an
//! optimum is a union of terminals plus `c` connector vertices outside X.
//! With `W` the X-weight of the union, it is feasible iff
//! `num (W + c) <= den W` for `α = num/den`, and then it pads with adjacent
//! vertices up to `min(floor(den W / num), |component|)`. The task reduces to
//! the largest feasible `W`, found by a node-weighted Steiner (Dreyfus-Wagner)
//! search after splitting terminals into clusters that no feasible set can
//! straddle.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::Write;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::stats::{wilson_interval, Z95};

/// Default cap on terminals per cluster for the exact search.
pub const DEFAULT_MAX_TERMINALS: usize = 12;

/// Percolation constant `c` in the applicability condition `p < c / D`.
pub const DEFAULT_PERCOLATION_C: f64 = 1.0 / (2.0 * std::f64::consts::E);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterReport {
    /// Component size of the subgraph induced on X -> number of components.
    pub component_sizes: BTreeMap<usize, usize>,
    pub maxconn_lower: usize,
    pub maxconn_upper: usize,
    pub alpha: Ratio<u64>,
    pub exact: bool,
}

impl ClusterReport {
    /// The exact value, when known.
    pub fn maxconn(&self) -> Option<usize> {
        self.exact.then_some(self.maxconn_lower)
    }

    pub fn largest_component(&self) -> usize {
        self.component_sizes.keys().next_back().copied().unwrap_or(0)
    }

    /// `size,count` rows followed by a `# summary` line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "size,count")?;
        for (s, c) in &self.component_sizes {
            writeln!(out, "{s},{c}")?;
        }
        writeln!(
            out,
            "# summary alpha={} maxconn_lower={} maxconn_upper={} exact={}",
            self.alpha, self.maxconn_lower, self.maxconn_upper, self.exact
        )
    }
}

fn membership(g: &Graph, x: &[usize]) -> Result<Vec<bool>> {
    let n = g.vertex_count();
    let mut in_x = vec![false; n];
    for &v in x {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, len: n });
        }
        in_x[v] = true;
    }
    Ok(in_x)
}

/// Components of the subgraph induced on X: label per X-vertex
/// (`usize::MAX` outside X) and the size of each component.
fn x_components(g: &Graph, in_x: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    for v in (0..n).filter(|&v| in_x[v]) {
        for &w in g.neighbors(v) {
            if in_x[w] {
                uf.union(v, w);
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut labels = vec![usize::MAX; n];
    for v in (0..n).filter(|&v| in_x[v]) {
        let r = uf.find(v);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = sizes.len();
            sizes.push(0);
        }
        labels[v] = label_of_root[r];
        sizes[label_of_root[r]] += 1;
    }
    (labels, sizes)
}

fn histogram(sizes: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &s in sizes {
        *h.entry(s).or_insert(0) += 1;
    }
    h
}

/// Component sizes of the subgraph induced on `x`; `maxconn` with α = 1.
pub fn connected_components(g: &Graph, x: &[usize]) -> Result<ClusterReport> {
    let in_x = membership(g, x)?;
    let (_, sizes) = x_components(g, &in_x);
    let largest = sizes.iter().copied().max().unwrap_or(0);
    Ok(ClusterReport {
        component_sizes: histogram(&sizes),
        maxconn_lower: largest,
        maxconn_upper: largest,
        alpha: Ratio::from_integer(1),
        exact: true,
    })
}

/// Shortest-path search where entering a vertex outside X costs 1 and an
/// X-vertex costs 0, seeded with `dist`. `local` maps graph vertices to
/// positions in `members` (the component being searched).
fn relax(g: &Graph, members: &[usize], local: &[usize], in_x: &[bool], dist: &mut [u32]) {
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> = (0..members.len())
        .filter(|&i| dist[i] != u32::MAX)
        .map(|i| Reverse((dist[i], i)))
        .collect();
    while let Some(Reverse((d, i))) = heap.pop() {
        if d != dist[i] {
            continue;
        }
        for &w in g.neighbors(members[i]) {
            let k = local[w];
            let nd = d + u32::from(!in_x[w]);
            if nd < dist[k] {
                dist[k] = nd;
                heap.push(Reverse((nd, k)));
            }
        }
    }
}

/// Largest X-weight of a feasible union of terminals within one cluster, or
/// a lower bound when the cluster is too large for the exact search.
struct ComponentSearch<'a> {
    g: &'a Graph,
    in_x: &'a [bool],
    members: Vec<usize>,
    local: Vec<usize>,
    /// Terminal -> local indices of its vertices.
    terminals: Vec<Vec<usize>>,
    num: u64,
    den: u64,
}

impl ComponentSearch<'_> {
    fn feasible(&self, w: u64, c: u64) -> bool {
        self.num * (w + c) <= self.den * w
    }

    fn budget(&self, w: u64) -> u64 {
        w * (self.den - self.num) / self.num
    }

    fn weight(&self, t: usize) -> u64 {
        self.terminals[t].len() as u64
    }

    fn single_source(&self, t: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.members.len()];
        for &i in &self.terminals[t] {
            dist[i] = 0;
        }
        relax(self.g, &self.members, &self.local, self.in_x, &mut dist);
        dist
    }

    /// Splits terminals into clusters that contain every feasible union.
    fn clusters(&self, sources: &[Vec<u32>]) -> Vec<Vec<usize>> {
        let t = self.terminals.len();
        // Non-X vertices on a cheapest path between two terminals.
        let mut gap = vec![vec![u32::MAX; t]; t];
        for a in 0..t {
            for b in 0..t {
                gap[a][b] = self.terminals[b].iter().map(|&i| sources[a][i]).min().unwrap_or(u32::MAX);
            }
        }
        let mut stack = vec![(0..t).collect::<Vec<_>>()];
        let mut out = Vec::new();
        while let Some(cluster) = stack.pop() {
            let w: u64 = cluster.iter().map(|&i| self.weight(i)).sum();
            let b = self.budget(w);
            let mut uf = UnionFind::new(cluster.len());
            for i in 0..cluster.len() {
                for j in i + 1..cluster.len() {
                    if u64::from(gap[cluster[i]][cluster[j]]) <= b {
                        uf.union(i, j);
                    }
                }
            }
            let labels = uf.dense_labels();
            let parts = labels.iter().copied().max().map_or(0, |m| m + 1);
            if parts <= 1 {
                out.push(cluster);
                continue;
            }
            let mut split = vec![Vec::new(); parts];
            for (i, &l) in labels.iter().enumerate() {
                split[l].push(cluster[i]);
            }
            stack.extend(split);
        }
        out
    }

    /// Exact maximum feasible weight over unions of `cluster`'s terminals.
    fn exact_weight(&self, cluster: &[usize], sources: &[Vec<u32>]) -> u64 {
        let t = cluster.len();
        let v = self.members.len();
        let full = 1usize << t;
        let cost: Vec<u32> = self.members.iter().map(|&m| u32::from(!self.in_x[m])).collect();
        let mut dp = vec![u32::MAX; full * v];
        let mut weight = vec![0u64; full];
        let mut best = 0;
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            weight[mask] = weight[mask & (mask - 1)] + self.weight(cluster[low]);
            let row = mask * v;
            if mask.is_power_of_two() {
                dp[row..row + v].copy_from_slice(&sources[cluster[low]]);
            } else {
                // Merge two sub-trees meeting at a vertex; iterate over
                // submasks containing the lowest bit to avoid duplicates.
                let rest = mask ^ (1 << low);
                let mut sub = rest;
                loop {
                    let a = sub | (1 << low);
                    if a != mask {
                        let b = mask ^ a;
                        for i in 0..v {
                            let (x, y) = (dp[a * v + i], dp[b * v + i]);
                            if x != u32::MAX && y != u32::MAX {
                                let m = x + y - cost[i];
                                if m < dp[row + i] {
                                    dp[row + i] = m;
                                }
                            }
                        }
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & rest;
                }
                relax(self.g, &self.members, &self.local, self.in_x, &mut dp[row..row + v]);
            }
            let c = dp[row..row + v].iter().copied().min().unwrap_or(u32::MAX);
            if c != u32::MAX && weight[mask] > best && self.feasible(weight[mask], u64::from(c)) {
                best = weight[mask];
            }
        }
        best
    }

    /// Greedy feasible union grown from the heaviest terminal of `cluster`.
    fn greedy_weight(&self, cluster: &[usize]) -> u64 {
        let v = self.members.len();
        let start = *cluster.iter().max_by_key(|&&t| self.weight(t)).expect("non-empty cluster");
        let mut in_set = vec![false; v];
        for &i in &self.terminals[start] {
            in_set[i] = true;
        }
        let mut remaining: Vec<usize> = cluster.iter().copied().filter(|&t| t != start).collect();
        let (mut w, mut c) = (self.weight(start), 0u64);
        loop {
            // Cheapest connections from the current set, with parents for
            // path recovery. Vertices already in the set cost nothing.
            let mut dist = vec![u32::MAX; v];
            let mut parent = vec![usize::MAX; v];
            let mut heap = BinaryHeap::new();
            for i in (0..v).filter(|&i| in_set[i]) {
                dist[i] = 0;
                heap.push(Reverse((0u32, i)));
            }
            while let Some(Reverse((d, i))) = heap.pop() {
                if d != dist[i] {
                    continue;
                }
                for &nb in self.g.neighbors(self.members[i]) {
                    let k = self.local[nb];
                    let nd = d + u32::from(!self.in_x[nb] && !in_set[k]);
                    if nd < dist[k] {
                        dist[k] = nd;
                        parent[k] = i;
                        heap.push(Reverse((nd, k)));
                    }
                }
            }
            let mut options: Vec<(u32, Reverse<u64>, usize, usize)> = remaining
                .iter()
                .filter_map(|&t| {
                    let (d, at) = self.terminals[t].iter().map(|&i| (dist[i], i)).min()?;
                    (d != u32::MAX).then_some((d, Reverse(self.weight(t)), t, at))
                })
                .collect();
            options.sort_unstable();
            let chosen = options.into_iter().find(|&(d, Reverse(wt), _, _)| self.feasible(w + wt, c + u64::from(d)));
            let Some((_, _, _, at)) = chosen else { break };
            // Add the path; X-vertices on it pull in their whole terminal.
            let mut cur = at;
            while cur != usize::MAX && !in_set[cur] {
                in_set[cur] = true;
                if !self.in_x[self.members[cur]] {
                    c += 1;
                }
                cur = parent[cur];
            }
            let mut closed = false;
            while !closed {
                closed = true;
                for verts in &self.terminals {
                    let touched = verts.iter().any(|&i| in_set[i]);
                    if touched && verts.iter().any(|&i| !in_set[i]) {
                        for &i in verts {
                            in_set[i] = true;
                        }
                        closed = false;
                    }
                }
            }
            w = (0..v).filter(|&i| in_set[i] && self.in_x[self.members[i]]).count() as u64;
            remaining.retain(|&t| !in_set[self.terminals[t][0]]);
            if remaining.is_empty() {
                break;
            }
        }
        w
    }
}

/// Size of the largest α-subset of `x`. Exact unless some cluster has more
/// than `max_terminals` X-components, in which case certified lower and
/// upper bounds are returned.
pub fn maxconn_alpha(g: &Graph, x: &[usize], alpha: Ratio<u64>, max_terminals: usize) -> Result<ClusterReport> {
    let (num, den) = (*alpha.numer(), *alpha.denom());
    if num == 0 || num > den {
        return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if max_terminals == 0 || max_terminals > 24 {
        return Err(Error::param("max_terminals must lie in 1..=24"));
    }
    let in_x = membership(g, x)?;
    let (labels, sizes) = x_components(g, &in_x);
    let mut report = ClusterReport {
        component_sizes: histogram(&sizes),
        maxconn_lower: 0,
        maxconn_upper: 0,
        alpha,
        exact: true,
    };
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if num == den || largest == 0 {
        report.maxconn_lower = largest;
        report.maxconn_upper = largest;
        return Ok(report);
    }

    let comp = g.component_labels();
    let mut by_comp: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..g.vertex_count() {
        by_comp.entry(comp[v]).or_default().push(v);
    }
    let mut local = vec![usize::MAX; g.vertex_count()];
    for members in by_comp.into_values() {
        if !members.iter().any(|&v| in_x[v]) {
            continue;
        }
        for (i, &v) in members.iter().enumerate() {
            local[v] = i;
        }
        let mut term_of_label: BTreeMap<usize, usize> = BTreeMap::new();
        let mut terminals: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in members.iter().enumerate() {
            if in_x[v] {
                let t = *term_of_label.entry(labels[v]).or_insert_with(|| {
                    terminals.push(Vec::new());
                    terminals.len() - 1
                });
                terminals[t].push(i);
            }
        }
        let search = ComponentSearch {
            g,
            in_x: &in_x,
            local: local.clone(),
            members,
            terminals,
            num,
            den,
        };
        let size = search.members.len() as u64;
        let value = |w: u64| (den * w / num).min(size) as usize;
        let sources: Vec<Vec<u32>> = (0..search.terminals.len()).map(|t| search.single_source(t)).collect();
        for cluster in search.clusters(&sources) {
            let total: u64 = cluster.iter().map(|&t| search.weight(t)).sum();
            let (lo, hi) = if cluster.len() == 1 {
                (total, total)
            } else if cluster.len() <= max_terminals {
                let w = search.exact_weight(&cluster, &sources);
                (w, w)
            } else {
                report.exact = false;
                (search.greedy_weight(&cluster), total)
            };
            report.maxconn_lower = report.maxconn_lower.max(value(lo));
            report.maxconn_upper = report.maxconn_upper.max(value(hi));
        }
    }
    if report.exact {
        debug_assert_eq!(report.maxconn_lower, report.maxconn_upper);
    }
    Ok(report)
}

/// Analytic bound `2n (2 D e p^α)^t` on `P(maxconn_α >= t)` for
/// locally-stochastic noise with parameter p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercolationBound {
    pub value: f64,
    pub ln_value: f64,
    /// Whether `p < c / D`.
    pub applicable: bool,
}

pub fn percolation_bound(degree: usize, alpha: f64, p: f64, t: usize, n: usize, c: f64) -> Result<PercolationBound> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p must lie in [0, 1], got {p}")));
    }
    if degree == 0 || n == 0 || !(alpha > 0.0) {
        return Err(Error::param("degree, n and alpha must be positive"));
    }
    let d = degree as f64;
    let base_ln = (2.0 * d * std::f64::consts::E).ln() + alpha * p.ln();
    let ln_value = (2.0 * n as f64).ln() + t as f64 * base_ln;
    let value = if p == 0.0 && t > 0 { 0.0 } else { ln_value.exp() };
    Ok(PercolationBound {
        value,
        ln_value,
        applicable: p < c / d,
    })
}

/// Containment statistics for one probe set.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeEstimate {
    pub probe: Vec<usize>,
    pub hits: u64,
    pub trials: u64,
    pub probability: f64,
    pub ci: (f64, f64),
    /// `P̂^(1/|S|)`, the implied local-stochasticity parameter.
    pub implied: f64,
    /// Implied parameter from the upper confidence limit.
    pub implied_upper: f64,
}

/// Empirical `P(X ⊇ S)` with 95% Wilson intervals for each probe set.
pub fn local_stochasticity_estimate(samples: &[Vec<usize>], probes: &[Vec<usize>]) -> Result<Vec<ProbeEstimate>> {
    if samples.is_empty() {
        return Err(Error::EmptySet);
    }
    let sets: Vec<std::collections::HashSet<usize>> = samples.iter().map(|s| s.iter().copied().collect()).collect();
    let trials = samples.len() as u64;
    Ok(probes
        .iter()
        .map(|probe| {
            let hits = sets.iter().filter(|s| probe.iter().all(|v| s.contains(v))).count() as u64;
            let probability = hits as f64 / trials as f64;
            let ci = wilson_interval(hits, trials, Z95);
            let root = |x: f64| if probe.is_empty() { 1.0 } else { x.powf(1.0 / probe.len() as f64) };
            ProbeEstimate {
                probe: probe.clone(),
                hits,
                trials,
                probability,
                ci,
                implied: root(probability),
                implied_upper: root(ci.1),
            }
        })
        .collect())
}

/// `count` random connected vertex sets of each size in `sizes`, grown by
/// adding uniform boundary vertices from a uniform start.
pub fn random_connected_sets(g: &Graph, sizes: std::ops::RangeInclusive<usize>, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.vertex_count();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for size in sizes {
        for _ in 0..count {
            let mut set = vec![rng.gen_range(0..n)];
            while set.len() < size {
                let mut boundary: Vec<usize> = set
                    .iter()
                    .flat_map(|&v| g.neighbors(v).iter().copied())
                    .filter(|w| !set.contains(w))
                    .collect();
                boundary.sort_unstable();
                boundary.dedup();
                if boundary.is_empty() {
                    break;
                }
                set.push(boundary[rng.gen_range(0..boundary.len())]);
            }
            set.sort_unstable();
            out.push(set);
        }
    }
    out
}

/// Parses `"a/b"` or an integer into a ratio.
pub fn parse_alpha(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::param(format!("invalid fraction {s:?}"));
    let r = match s.trim().split_once('/') {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0 {
                return Err(bad());
            }
            Ratio::new(a, b)
        }
        None => Ratio::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    Ok(r)
}
