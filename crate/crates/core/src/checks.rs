//! Check systems: base CSS checks plus optional amplified checks, with the
//! energy (violated-check count) that drives the Gibbs dynamics.

use std::collections::{HashMap, VecDeque};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplify::AmplifiedCheckSet;
use crate::code::{CssCode, Pauli, PauliError};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::graph::Graph;

/// Largest number of syndrome classes [`syndrome_classes`] will enumerate.
pub const MAX_SYNDROME_CLASSES: usize = 1 << 22;

#[derive(Clone, Debug)]
pub struct CheckSystem {
    code: CssCode,
    amplified: AmplifiedCheckSet,
    /// For each base check, the amplified subsets that contain it.
    subsets_of_check: Vec<Vec<u32>>,
}

impl CheckSystem {
    pub fn base(code: CssCode) -> Self {
        let m = code.num_checks();
        CheckSystem {
            code,
            amplified: AmplifiedCheckSet::empty(m),
            subsets_of_check: vec![Vec::new(); m],
        }
    }

    pub fn with_amplified(code: CssCode, amplified: AmplifiedCheckSet) -> Result<Self> {
        let m = code.num_checks();
        if amplified.m_base() != m {
            return Err(Error::param(format!(
                "amplified family built over {} checks, code has {m}",
                amplified.m_base()
            )));
        }
        let mut subsets_of_check = vec![Vec::new(); m];
        for (i, s) in amplified.subsets().iter().enumerate() {
            for &c in s {
                if c >= m {
                    return Err(Error::IndexOutOfRange { index: c, len: m });
                }
                subsets_of_check[c].push(i as u32);
            }
        }
        Ok(CheckSystem {
            code,
            amplified,
            subsets_of_check,
        })
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn amplified(&self) -> &AmplifiedCheckSet {
        &self.amplified
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn m_base(&self) -> usize {
        self.code.num_checks()
    }

    pub fn m_amplified(&self) -> usize {
        self.amplified.len()
    }

    pub fn m_total(&self) -> usize {
        self.m_base() + self.m_amplified()
    }

    /// Energy density: checks per qubit.
    pub fn lambda(&self) -> Ratio<u64> {
        Ratio::new(self.m_total() as u64, self.n() as u64)
    }

    pub fn lambda_f64(&self) -> f64 {
        self.m_total() as f64 / self.n() as f64
    }

    /// Amplified subsets containing base check `c`.
    pub fn subsets_of_check(&self, c: usize) -> &[u32] {
        &self.subsets_of_check[c]
    }

    /// Base check ids touched by a single-qubit Pauli on `q`.
    pub fn base_checks_hit(&self, q: usize, pauli: Pauli) -> impl Iterator<Item = usize> + '_ {
        let mx = self.code.num_x_checks();
        // X-checks see the Z component, Z-checks the X component.
        let xs = if pauli.has_z() { self.code.x_checks_of(q) } else { &[][..] };
        let zs = if pauli.has_x() { self.code.z_checks_of(q) } else { &[][..] };
        xs.iter().copied().chain(zs.iter().map(move |&c| c + mx))
    }

    /// Violation indicator of every base check (X-checks first).
    pub fn base_violations(&self, e: &PauliError) -> Result<BitVector> {
        let s = self.code.syndrome(e)?;
        let mx = self.code.num_x_checks();
        let mut v = BitVector::zeros(self.m_base());
        for c in s.x.iter_ones() {
            v.set(c, true);
        }
        for c in s.z.iter_ones() {
            v.set(c + mx, true);
        }
        Ok(v)
    }

    /// Energy of an error given its base violations.
    pub fn energy_of_violations(&self, violated: &BitVector) -> Result<usize> {
        Ok(violated.weight() + self.amplified.amplified_violations(violated)?)
    }

    /// Number of violated base checks plus violated amplified subsets.
    pub fn energy(&self, e: &PauliError) -> Result<usize> {
        let v = self.base_violations(e)?;
        self.energy_of_violations(&v)
    }

    /// Qubits acted on by amplified subset `i`.
    pub fn subset_qubits(&self, i: usize) -> Vec<usize> {
        let mx = self.code.num_x_checks();
        let mut qs = Vec::new();
        for &c in &self.amplified.subsets()[i] {
            let row = if c < mx {
                self.code.h_x().row(c)
            } else {
                self.code.h_z().row(c - mx)
            };
            qs.extend_from_slice(row);
        }
        qs.sort_unstable();
        qs.dedup();
        qs
    }

    /// Qubits adjacent when some base or amplified check acts on both.
    pub fn interaction_graph(&self) -> Graph {
        let n = self.n();
        // Dense rows: amplified families produce many overlapping cliques.
        let mut rows = vec![BitVector::zeros(n); n];
        let mut add_clique = |qs: &[usize]| {
            for &a in qs {
                for &b in qs {
                    rows[a].set(b, true);
                }
            }
        };
        for row in self.code.h_x().rows().chain(self.code.h_z().rows()) {
            add_clique(row);
        }
        for i in 0..self.m_amplified() {
            add_clique(&self.subset_qubits(i));
        }
        let adj = rows
            .iter()
            .enumerate()
            .map(|(a, r)| r.iter_ones().filter(|&b| b != a).collect())
            .collect();
        Graph::from_adjacency(adj)
    }

    /// Base-code interaction graph, ignoring amplified checks.
    pub fn base_interaction_graph(&self) -> Graph {
        CheckSystem::base(self.code.clone()).interaction_graph()
    }
}

/// Empirical soundness ratios `(violated fraction) / (w / n)` per weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessStats {
    pub per_weight: Vec<WeightSoundness>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSoundness {
    pub weight: usize,
    pub samples: usize,
    pub min_ratio: f64,
    pub mean_ratio: f64,
}

impl SoundnessStats {
    pub fn min_ratio(&self) -> f64 {
        self.per_weight
            .iter()
            .map(|w| w.min_ratio)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `(E / m_total) / (|e| / n)` for a non-identity error.
pub fn soundness_ratio(checks: &CheckSystem, e: &PauliError) -> Result<f64> {
    let w = e.weight();
    if w == 0 {
        return Err(Error::param("soundness ratio of the identity is undefined"));
    }
    let energy = checks.energy(e)? as f64;
    Ok((energy / checks.m_total() as f64) / (w as f64 / checks.n() as f64))
}

/// Samples `trials` random errors for each weight `1..=max_weight` (uniform
/// support, uniform non-identity Pauli per qubit) and reports soundness
/// ratios. Raw weight equals coset weight only below half the distance, so
/// `2 * max_weight < distance` is required.
pub fn soundness_probe(
    checks: &CheckSystem,
    trials: usize,
    max_weight: usize,
    seed: u64,
    distance: usize,
) -> Result<SoundnessStats> {
    if max_weight == 0 {
        return Err(Error::param("max_weight must be at least 1"));
    }
    if 2 * max_weight >= distance {
        return Err(Error::param(format!(
            "max_weight {max_weight} is not below half the distance {distance}"
        )));
    }
    if max_weight > checks.n() {
        return Err(Error::param("max_weight exceeds qubit count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = checks.n();
    let mut per_weight = Vec::with_capacity(max_weight);
    for w in 1..=max_weight {
        let mut min_ratio = f64::INFINITY;
        let mut sum = 0.0;
        for _ in 0..trials {
            let mut e = PauliError::identity(n);
            for q in rand::seq::index::sample(&mut rng, n, w).iter() {
                e.apply(q, Pauli::ALL[rng.gen_range(0..3)]);
            }
            let r = soundness_ratio(checks, &e)?;
            min_ratio = min_ratio.min(r);
            sum += r;
        }
        per_weight.push(WeightSoundness {
            weight: w,
            samples: trials,
            min_ratio,
            mean_ratio: if trials == 0 { f64::NAN } else { sum / trials as f64 },
        });
    }
    Ok(SoundnessStats { per_weight })
}

/// A class of errors sharing one syndrome. Every class holds the same
/// number of raw errors, `4^n / class_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeClass {
    pub violated: BitVector,
    /// Minimum weight of an error with this syndrome, i.e. the weight modulo
    /// the centralizer of the stabilizer group.
    pub min_weight: usize,
    pub energy: usize,
}

/// Every reachable syndrome with its minimum error weight, by breadth-first
/// search over single-qubit Pauli moves.
pub fn syndrome_classes(checks: &CheckSystem) -> Result<Vec<SyndromeClass>> {
    let code = checks.code();
    let rank = code.h_x().rank() + code.h_z().rank();
    if rank >= usize::BITS as usize || (1usize << rank) > MAX_SYNDROME_CLASSES {
        return Err(Error::TooLarge {
            what: "syndrome classes (log2)",
            value: rank,
            limit: MAX_SYNDROME_CLASSES.trailing_zeros() as usize,
        });
    }
    let m = checks.m_base();
    let moves: Vec<BitVector> = (0..checks.n())
        .flat_map(|q| Pauli::ALL.into_iter().map(move |p| (q, p)))
        .map(|(q, p)| {
            let hits: Vec<usize> = checks.base_checks_hit(q, p).collect();
            BitVector::from_indices(m, &hits).expect("check ids in range")
        })
        .collect();
    let mut dist: HashMap<BitVector, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    let zero = BitVector::zeros(m);
    dist.insert(zero.clone(), 0);
    queue.push_back(zero);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for mv in &moves {
            let t = s.xor(mv).expect("same length");
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
        order.push(s);
    }
    debug_assert_eq!(order.len(), 1 << rank);
    order
        .into_iter()
        .map(|violated| {
            let energy = checks.energy_of_violations(&violated)?;
            let min_weight = dist[&violated];
            Ok(SyndromeClass {
                violated,
                min_weight,
                energy,
            })
        })
        .collect()
}

/// Exact soundness: the minimum over non-trivial syndromes of
/// `(E / m_total) / (w / n)` with w the weight modulo the centralizer.
pub fn exact_soundness(checks: &CheckSystem) -> Result<f64> {
    let classes = syndrome_classes(checks)?;
    let n = checks.n() as f64;
    let m = checks.m_total() as f64;
    Ok(classes
        .iter()
        .filter(|c| c.min_weight > 0)
        .map(|c| (c.energy as f64 / m) / (c.min_weight as f64 / n))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::{amplify, union_system};
    use crate::code::build_projective_code;
    use crate::gf2::BitMatrix;

    fn random_error(rng: &mut impl Rng, n: usize, moves: usize) -> PauliError {
        let mut e = PauliError::identity(n);
        for _ in 0..moves {
            e.apply(rng.gen_range(0..n), Pauli::ALL[rng.gen_range(0..3)]);
        }
        e
    }

    #[test]
    fn energy_examples() {
        let code = build_projective_code(4).unwrap();
        let sys = CheckSystem::base(code.clone());
        assert_eq!(sys.energy(&PauliError::identity(12)).unwrap(), 0);
        let z = PauliError::single(12, 5, Pauli::Z).unwrap();
        assert_eq!(sys.energy(&z).unwrap(), 4);
        let x = PauliError::single(12, 5, Pauli::X).unwrap();
        assert_eq!(sys.energy(&x).unwrap(), 2);
        assert_eq!(sys.lambda(), Ratio::new(20, 12));
    }

    #[test]
    fn energy_invariant_under_stabilizers() {
        let code = build_projective_code(6).unwrap();
        let amp = amplify(&code, 3, 200, 4).unwrap();
        let sys = union_system(code.clone(), amp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let e = random_error(&mut rng, sys.n(), 6);
            let mut s = e.clone();
            s.x.xor_assign(&code.h_x().row_vector(rng.gen_range(0..code.num_x_checks())))
                .unwrap();
            s.z.xor_assign(&code.h_z().row_vector(rng.gen_range(0..code.num_z_checks())))
                .unwrap();
            assert_eq!(sys.energy(&e).unwrap(), sys.energy(&s).unwrap());
        }
    }

    #[test]
    fn union_energy_is_base_plus_amplified() {
        let code = build_projective_code(4).unwrap();
        let amp = amplify(&code, 2, 30, 5).unwrap();
        let base = CheckSystem::base(code.clone());
        let sys = union_system(code, amp.clone()).unwrap();
        assert_eq!(sys.m_total(), 50);
        assert_eq!(sys.lambda(), Ratio::new(50, 12));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let e = random_error(&mut rng, 12, 3);
            let v = base.base_violations(&e).unwrap();
            assert_eq!(
                sys.energy(&e).unwrap(),
                base.energy(&e).unwrap() + amp.amplified_violations(&v).unwrap()
            );
        }
    }

    #[test]
    fn mismatched_family_rejected() {
        let c4 = build_projective_code(4).unwrap();
        let c6 = build_projective_code(6).unwrap();
        let amp = amplify(&c6, 2, 5, 1).unwrap();
        assert!(union_system(c4, amp).is_err());
    }

    #[test]
    fn interaction_graph_single_check() {
        let hx = BitMatrix::from_rows(4, vec![vec![1, 3]]).unwrap();
        let code = CssCode::new(hx, BitMatrix::zeros(0, 4)).unwrap();
        let g = CheckSystem::base(code).interaction_graph();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(1, 3));
        assert_eq!(g.max_degree(), 1);
    }

    #[test]
    fn interaction_graph_matches_pairwise_scan() {
        let code = build_projective_code(4).unwrap();
        let sys = CheckSystem::base(code.clone());
        let g = sys.interaction_graph();
        let n = code.n();
        let rows: Vec<BitVector> = (0..code.num_x_checks())
            .map(|r| code.h_x().row_vector(r))
            .chain((0..code.num_z_checks()).map(|r| code.h_z().row_vector(r)))
            .collect();
        let mut max_deg = 0;
        for i in 0..n {
            let mut deg = 0;
            for j in 0..n {
                let shared = i != j && rows.iter().any(|r| r.bit(i) && r.bit(j));
                assert_eq!(shared, g.has_edge(i, j));
                deg += usize::from(shared);
            }
            max_deg = max_deg.max(deg);
        }
        assert_eq!(g.max_degree(), max_deg);

        let amp = amplify(&code, 3, 20, 1).unwrap();
        let g2 = union_system(code, amp).unwrap().interaction_graph();
        assert!(g2.max_degree() >= g.max_degree());
        for i in 0..n {
            for &j in g.neighbors(i) {
                assert!(g2.has_edge(i, j));
            }
        }
    }

    #[test]
    fn soundness_probe_single_errors() {
        let code = build_projective_code(4).unwrap();
        let sys = CheckSystem::base(code);
        let z = PauliError::single(12, 3, Pauli::Z).unwrap();
        let expected = (4.0 / 20.0) * 12.0;
        assert!((soundness_ratio(&sys, &z).unwrap() - expected).abs() < 1e-12);
        assert!(soundness_ratio(&sys, &PauliError::identity(12)).is_err());
        let stats = soundness_probe(&sys, 100, 1, 1, 4).unwrap();
        assert_eq!(stats.per_weight.len(), 1);
        // Single X, Y and Z errors violate 2, 6 and 4 checks.
        assert!((stats.min_ratio() - 2.0 / 20.0 * 12.0).abs() < 1e-12);
        assert!(soundness_probe(&sys, 10, 2, 1, 4).is_err());
        assert!(soundness_probe(&sys, 10, 0, 1, 4).is_err());
    }

    #[test]
    fn amplified_probe_dominates_base_exhaustively() {
        // OR-amplification monotonicity on every error of weight <= 2 at N=4.
        let code = build_projective_code(4).unwrap();
        let base = CheckSystem::base(code.clone());
        let amp = amplify(&code, 3, 60, 12).unwrap();
        let union = union_system(code, amp).unwrap();
        let n = 12;
        let mut errors = Vec::new();
        for q in 0..n {
            for p in Pauli::ALL {
                errors.push(PauliError::single(n, q, p).unwrap());
                for q2 in q + 1..n {
                    for p2 in Pauli::ALL {
                        let mut e = PauliError::single(n, q, p).unwrap();
                        e.apply(q2, p2);
                        errors.push(e);
                    }
                }
            }
        }
        for e in &errors {
            let rb = base.energy(e).unwrap() as f64 / base.m_total() as f64;
            let ru = union.energy(e).unwrap() as f64 / union.m_total() as f64;
            // Each amplified check is violated with at least the probability
            // of a uniformly random base check when subsets are uniform; the
            // fixed family is checked in aggregate: union energy is never
            // below base energy.
            assert!(union.energy(e).unwrap() >= base.energy(e).unwrap());
            assert!(ru >= 0.0 && rb >= 0.0);
        }
    }

    #[test]
    fn syndrome_classes_small_code() {
        let code = build_projective_code(4).unwrap();
        let sys = CheckSystem::base(code.clone());
        let classes = syndrome_classes(&sys).unwrap();
        assert_eq!(classes.len(), 1 << 11);
        assert_eq!(classes.iter().filter(|c| c.min_weight == 0).count(), 1);
        let singles: std::collections::HashSet<BitVector> = (0..12)
            .flat_map(|q| Pauli::ALL.into_iter().map(move |p| (q, p)))
            .map(|(q, p)| sys.base_violations(&PauliError::single(12, q, p).unwrap()).unwrap())
            .collect();
        assert_eq!(classes.iter().filter(|c| c.min_weight == 1).count(), singles.len());
        let s = exact_soundness(&sys).unwrap();
        assert!(s > 0.0 && s <= 2.0 / 20.0 * 12.0 + 1e-12);
    }
}
