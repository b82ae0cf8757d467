//! Parallel majority-flip decoding against the base checks: Z-errors with
//! the X-checks first, then X-errors with the Z-checks.

use std::io::Write;

use num_rational::Ratio;
use rand::Rng;

use crate::code::{CssCode, Pauli, PauliError};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, RowSpace};
use crate::graph::Graph;

/// Which error component a pass corrects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Z-part, checked by the X-checks.
    Z,
    /// X-part, checked by the Z-checks.
    X,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Z => "z",
            Side::X => "x",
        })
    }
}

fn checks_for(code: &CssCode, side: Side) -> &BitMatrix {
    match side {
        Side::Z => code.h_x(),
        Side::X => code.h_z(),
    }
}

fn incident(code: &CssCode, side: Side, q: usize) -> &[usize] {
    match side {
        Side::Z => code.x_checks_of(q),
        Side::X => code.z_checks_of(q),
    }
}

/// Default round limit `ceil(10 log2 n)`.
pub fn default_max_rounds(n: usize) -> usize {
    (10.0 * (n.max(2) as f64).log2()).ceil() as usize
}

/// Qubits whose unsatisfied incident checks strictly outnumber the satisfied
/// ones, all decided from the same syndrome.
fn flip_set(code: &CssCode, working: &BitVector, side: Side) -> Result<(Vec<usize>, usize)> {
    let h = checks_for(code, side);
    let syndrome = h.mul_vec(working)?;
    let mut unsat = vec![0u32; code.n()];
    let mut candidates = Vec::new();
    for c in syndrome.iter_ones() {
        for &q in h.row(c) {
            if unsat[q] == 0 {
                candidates.push(q);
            }
            unsat[q] += 1;
        }
    }
    let mut flips: Vec<usize> = candidates
        .into_iter()
        .filter(|&q| 2 * unsat[q] as usize > incident(code, side, q).len())
        .collect();
    flips.sort_unstable();
    Ok((flips, syndrome.weight()))
}

/// One parallel round. Returns the updated estimate and the flip count.
pub fn flip_round(code: &CssCode, working: &BitVector, side: Side) -> Result<(BitVector, usize)> {
    let (flips, _) = flip_set(code, working, side)?;
    let mut out = working.clone();
    for &q in &flips {
        out.flip(q);
    }
    Ok((out, flips.len()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub round: usize,
    pub side: Side,
    pub flips: usize,
    /// Syndrome weight before the round.
    pub syndrome_weight: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Rounds of the Z-pass that flipped at least one qubit.
    pub rounds_z: usize,
    pub rounds_x: usize,
    /// Error left after applying the correction.
    pub residual: PauliError,
    pub syndrome_cleared: bool,
    /// Cleared, but the residual is not a stabilizer.
    pub logical_failure: bool,
    /// Qubits flipped in each effective round, Z-pass first.
    pub touched: Vec<(Side, Vec<usize>)>,
    pub trace: Vec<TraceRow>,
}

impl DecodeResult {
    /// Syndrome cleared with no logical error.
    pub fn recovered(&self) -> bool {
        self.syndrome_cleared && !self.logical_failure
    }

    pub fn max_rounds(&self) -> usize {
        self.rounds_z.max(self.rounds_x)
    }

    pub fn write_trace<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "round,side,flips,syndrome_weight")?;
        for r in &self.trace {
            writeln!(out, "{},{},{},{}", r.round, r.side, r.flips, r.syndrome_weight)?;
        }
        Ok(())
    }
}

/// A code with precomputed stabilizer spaces for logical-failure verdicts.
#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    code: &'a CssCode,
    x_stabilizers: RowSpace,
    z_stabilizers: RowSpace,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a CssCode) -> Self {
        Decoder {
            code,
            x_stabilizers: RowSpace::new(code.h_x()),
            z_stabilizers: RowSpace::new(code.h_z()),
        }
    }

    pub fn code(&self) -> &CssCode {
        self.code
    }

    /// True when `e` is a product of stabilizers.
    pub fn is_stabilizer(&self, e: &PauliError) -> Result<bool> {
        Ok(self.z_stabilizers.contains(&e.z)? && self.x_stabilizers.contains(&e.x)?)
    }

    fn pass(&self, working: &mut BitVector, side: Side, max_rounds: usize, res: &mut DecodeResult) -> Result<bool> {
        let mut rounds = 0;
        loop {
            let (flips, syndrome_weight) = flip_set(self.code, working, side)?;
            if syndrome_weight == 0 {
                return Ok(true);
            }
            if flips.is_empty() || rounds == max_rounds {
                return Ok(false);
            }
            rounds += 1;
            res.trace.push(TraceRow {
                round: rounds,
                side,
                flips: flips.len(),
                syndrome_weight,
            });
            for &q in &flips {
                working.flip(q);
            }
            match side {
                Side::Z => res.rounds_z = rounds,
                Side::X => res.rounds_x = rounds,
            }
            res.touched.push((side, flips));
        }
    }

    pub fn decode(&self, e: &PauliError, max_rounds: usize) -> Result<DecodeResult> {
        if e.len() != self.code.n() {
            return Err(Error::LengthMismatch {
                expected: self.code.n(),
                found: e.len(),
            });
        }
        let mut res = DecodeResult {
            rounds_z: 0,
            rounds_x: 0,
            residual: e.clone(),
            syndrome_cleared: false,
            logical_failure: false,
            touched: Vec::new(),
            trace: Vec::new(),
        };
        let mut z = e.z.clone();
        let mut x = e.x.clone();
        let z_ok = self.pass(&mut z, Side::Z, max_rounds, &mut res)?;
        let x_ok = self.pass(&mut x, Side::X, max_rounds, &mut res)?;
        res.residual = PauliError::new(x, z)?;
        res.syndrome_cleared = z_ok && x_ok;
        res.logical_failure = res.syndrome_cleared && !self.is_stabilizer(&res.residual)?;
        Ok(res)
    }
}

/// Decodes one error; repeated calls should share a [`Decoder`].
pub fn decode_shallow(code: &CssCode, e: &PauliError, max_rounds: usize) -> Result<DecodeResult> {
    Decoder::new(code).decode(e, max_rounds)
}

/// Distinct checks incident to `support` over the total incidence count.
pub fn expansion_certificate(code: &CssCode, support: &[usize], side: Side) -> Result<Ratio<u64>> {
    if support.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut seen = std::collections::HashSet::new();
    let mut total = 0u64;
    for &q in support {
        if q >= code.n() {
            return Err(Error::IndexOutOfRange { index: q, len: code.n() });
        }
        let checks = incident(code, side, q);
        total += checks.len() as u64;
        seen.extend(checks.iter().copied());
    }
    if total == 0 {
        return Err(Error::param("support touches no checks"));
    }
    Ok(Ratio::new(seen.len() as u64, total))
}

/// The per-round expansion threshold `3/4 + 3/16`.
pub fn expansion_threshold() -> Ratio<u64> {
    Ratio::new(15, 16)
}

/// Places connected clusters of the given sizes on the interaction graph,
/// pairwise at hop distance at least `min_distance`, each qubit carrying a
/// uniform non-identity Pauli. Returns the error and the cluster vertex
/// sets, or `None` if placement failed after `attempts` tries.
pub fn plant_clusters<R: Rng + ?Sized>(
    g: &Graph,
    sizes: &[usize],
    min_distance: usize,
    attempts: usize,
    rng: &mut R,
) -> Option<(PauliError, Vec<Vec<usize>>)> {
    let n = g.vertex_count();
    'attempt: for _ in 0..attempts {
        let mut taken_dist = vec![usize::MAX; n];
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &size in sizes {
            let free: Vec<usize> = (0..n).filter(|&v| taken_dist[v] >= min_distance).collect();
            if free.is_empty() {
                continue 'attempt;
            }
            let mut cluster = vec![free[rng.gen_range(0..free.len())]];
            while cluster.len() < size {
                let mut boundary: Vec<usize> = cluster
                    .iter()
                    .flat_map(|&v| g.neighbors(v).iter().copied())
                    .filter(|w| !cluster.contains(w) && taken_dist[*w] >= min_distance)
                    .collect();
                boundary.sort_unstable();
                boundary.dedup();
                if boundary.is_empty() {
                    continue 'attempt;
                }
                cluster.push(boundary[rng.gen_range(0..boundary.len())]);
            }
            cluster.sort_unstable();
            // Update distances to everything planted so far.
            for &v in &cluster {
                for (w, d) in g.bfs_distances(v).into_iter().enumerate() {
                    taken_dist[w] = taken_dist[w].min(d);
                }
            }
            clusters.push(cluster);
        }
        let mut e = PauliError::identity(n);
        for c in &clusters {
            for &q in c {
                e.apply(q, Pauli::ALL[rng.gen_range(0..3)]);
            }
        }
        return Some((e, clusters));
    }
    None
}

/// Outcome counts of [`planted_trials`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PlantedStats {
    pub trials: usize,
    pub recovered: usize,
    /// Recovered within `depth_slope * log2(cluster size) + depth_offset` rounds.
    pub within_depth: usize,
    /// Trials whose X and Z supports both have certificate at least 15/16.
    pub expanding: usize,
    pub expanding_recovered: usize,
    pub expanding_within_depth: usize,
}

/// Plants one connected cluster of uniform size in `1..=max_size` per trial
/// and decodes it with the base checks of `code`.
pub fn planted_trials<R: Rng + ?Sized>(
    code: &CssCode,
    g: &Graph,
    trials: usize,
    max_size: usize,
    depth: (f64, f64),
    rng: &mut R,
) -> Result<PlantedStats> {
    if max_size == 0 || max_size > g.vertex_count() {
        return Err(Error::param("cluster size out of range"));
    }
    let dec = Decoder::new(code);
    let max_rounds = default_max_rounds(code.n());
    let mut out = PlantedStats { trials, ..Default::default() };
    for _ in 0..trials {
        let size = rng.gen_range(1..=max_size);
        let (e, _) = plant_clusters(g, &[size], 1, 1000, rng).ok_or(Error::param("cluster planting failed"))?;
        let r = dec.decode(&e, max_rounds)?;
        let ok = r.recovered();
        let shallow = ok && r.max_rounds() as f64 <= depth.0 * (size as f64).log2() + depth.1;
        let expands = [(&e.z, Side::Z), (&e.x, Side::X)].into_iter().all(|(v, side)| {
            let support = v.ones();
            support.is_empty() || expansion_certificate(code, &support, side).map_or(false, |c| c >= expansion_threshold())
        });
        out.recovered += usize::from(ok);
        out.within_depth += usize::from(shallow);
        if expands {
            out.expanding += 1;
            out.expanding_recovered += usize::from(ok);
            out.expanding_within_depth += usize::from(shallow);
        }
    }
    Ok(out)
}
