//! Metropolis-Hastings sampling of the thermal error distribution
//! `P(e) ∝ exp(-beta * E(e) / lambda)`, exact small-instance oracles and the
//! analytic tail and temperature-window formulas.
//!
//! The chain walks raw Pauli errors. Every stabilizer coset has the same
//! size, so the induced distribution over cosets is the coset Gibbs state.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checks::CheckSystem;
use crate::code::{Pauli, PauliError};
use crate::error::{Error, Result};

/// Largest qubit count [`LevelCounts::enumerate`] accepts.
pub const MAX_EXACT_QUBITS: usize = 12;

/// Single-qubit Paulis the chain proposes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Proposal {
    /// X or Z with probability 1/2 each.
    #[default]
    Xz,
    /// X, Y or Z with probability 1/3 each.
    Xyz,
}

impl Proposal {
    /// Probability that `p` is the proposed Pauli.
    pub fn probability(self, p: Pauli) -> f64 {
        match (self, p) {
            (Proposal::Xz, Pauli::Y) => 0.0,
            (Proposal::Xz, _) => 0.5,
            (Proposal::Xyz, _) => 1.0 / 3.0,
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> Pauli {
        match self {
            Proposal::Xz => {
                if rng.gen_bool(0.5) {
                    Pauli::X
                } else {
                    Pauli::Z
                }
            }
            Proposal::Xyz => Pauli::ALL[rng.gen_range(0..3)],
        }
    }
}

impl std::fmt::Display for Proposal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Proposal::Xz => "xz",
            Proposal::Xyz => "xyz",
        })
    }
}

impl std::str::FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xz" => Ok(Proposal::Xz),
            "xyz" => Ok(Proposal::Xyz),
            _ => Err(Error::param(format!("unknown proposal {s:?}"))),
        }
    }
}

/// Probability of the lazy self-loop taken before any proposal.
pub const LAZY_PROBABILITY: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub beta: f64,
    /// Largest raw error weight the chain may reach.
    pub truncation_k: Option<usize>,
    pub steps: u64,
    pub burn_in: u64,
    /// Record every `thin`-th state after burn-in.
    pub thin: u64,
    pub proposal: Proposal,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(beta: f64, steps: u64, seed: u64) -> Self {
        ChainConfig {
            beta,
            truncation_k: None,
            steps,
            burn_in: 0,
            thin: 1,
            proposal: Proposal::Xz,
            seed,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::param(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.thin == 0 {
            return Err(Error::param("thin must be positive"));
        }
        if let Some(k) = self.truncation_k {
            if k > n {
                return Err(Error::param(format!("truncation_k {k} exceeds n = {n}")));
            }
        }
        Ok(())
    }

    fn allows(&self, weight: usize) -> bool {
        self.truncation_k.map_or(true, |k| weight <= k)
    }
}

/// A chain position with its cached (unscaled) energy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainState {
    pub error: PauliError,
    pub energy: usize,
    pub step: u64,
}

impl ChainState {
    pub fn weight(&self) -> usize {
        self.error.weight()
    }
}

/// Incrementally maintained error, weight and energy.
#[derive(Clone, Debug)]
pub(crate) struct EnergyTracker {
    error: PauliError,
    weight: usize,
    violated: Vec<bool>,
    /// Violated constituents per amplified subset.
    subset_hits: Vec<u32>,
    base_energy: usize,
    amplified_energy: usize,
}

impl EnergyTracker {
    pub(crate) fn new(checks: &CheckSystem) -> Self {
        EnergyTracker {
            error: PauliError::identity(checks.n()),
            weight: 0,
            violated: vec![false; checks.m_base()],
            subset_hits: vec![0; checks.m_amplified()],
            base_energy: 0,
            amplified_energy: 0,
        }
    }

    pub(crate) fn energy(&self) -> usize {
        self.base_energy + self.amplified_energy
    }

    pub(crate) fn weight(&self) -> usize {
        self.weight
    }

    pub(crate) fn error(&self) -> &PauliError {
        &self.error
    }

    /// Weight after multiplying by `p` on qubit `q`, without applying it.
    pub(crate) fn weight_after(&self, q: usize, p: Pauli) -> usize {
        let before = self.error.pauli_at(q).is_some();
        let x = self.error.x.bit(q) ^ p.has_x();
        let z = self.error.z.bit(q) ^ p.has_z();
        self.weight + usize::from(x || z) - usize::from(before)
    }

    /// Multiplies the error by `p` on qubit `q`. Self-inverse.
    pub(crate) fn apply(&mut self, checks: &CheckSystem, q: usize, p: Pauli) {
        self.weight = self.weight_after(q, p);
        self.error.apply(q, p);
        for c in checks.base_checks_hit(q, p) {
            let now = !self.violated[c];
            self.violated[c] = now;
            if now {
                self.base_energy += 1;
                for &s in checks.subsets_of_check(c) {
                    let h = &mut self.subset_hits[s as usize];
                    if *h == 0 {
                        self.amplified_energy += 1;
                    }
                    *h += 1;
                }
            } else {
                self.base_energy -= 1;
                for &s in checks.subsets_of_check(c) {
                    let h = &mut self.subset_hits[s as usize];
                    *h -= 1;
                    if *h == 0 {
                        self.amplified_energy -= 1;
                    }
                }
            }
        }
    }
}

/// Metropolis-Hastings chain over raw Pauli errors.
#[derive(Clone, Debug)]
pub struct Chain<'a> {
    checks: &'a CheckSystem,
    cfg: ChainConfig,
    tracker: EnergyTracker,
    rng: ChaCha8Rng,
    step: u64,
    accepted: u64,
    scale: f64,
}

impl<'a> Chain<'a> {
    /// Starts at the identity error.
    pub fn new(checks: &'a CheckSystem, cfg: ChainConfig) -> Result<Self> {
        cfg.validate(checks.n())?;
        Ok(Chain {
            checks,
            scale: cfg.beta / checks.lambda_f64(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            tracker: EnergyTracker::new(checks),
            cfg,
            step: 0,
            accepted: 0,
        })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn energy(&self) -> usize {
        self.tracker.energy()
    }

    pub fn weight(&self) -> usize {
        self.tracker.weight()
    }

    pub fn error(&self) -> &PauliError {
        self.tracker.error()
    }

    pub fn state(&self) -> ChainState {
        ChainState {
            error: self.tracker.error().clone(),
            energy: self.tracker.energy(),
            step: self.step,
        }
    }

    /// Fraction of steps so far that moved the chain.
    pub fn acceptance_rate(&self) -> f64 {
        if self.step == 0 {
            0.0
        } else {
            self.accepted as f64 / self.step as f64
        }
    }

    /// One transition. Returns whether the state changed.
    pub fn step(&mut self) -> bool {
        self.step += 1;
        if self.rng.gen_bool(LAZY_PROBABILITY) {
            return false;
        }
        let n = self.checks.n();
        let q = self.rng.gen_range(0..n);
        let p = self.cfg.proposal.draw(&mut self.rng);
        if !self.cfg.allows(self.tracker.weight_after(q, p)) {
            return false;
        }
        let old = self.tracker.energy();
        self.tracker.apply(self.checks, q, p);
        let new = self.tracker.energy();
        let accept = new <= old || {
            let log_a = self.scale * (old as f64 - new as f64);
            self.rng.gen::<f64>().ln() < log_a
        };
        if accept {
            self.accepted += 1;
        } else {
            self.tracker.apply(self.checks, q, p);
        }
        accept
    }

    /// True when the cached energy matches a full recomputation.
    pub fn energy_cache_coherent(&self) -> Result<bool> {
        Ok(self.checks.energy(self.tracker.error())? == self.tracker.energy())
    }
}

/// Applies one transition to `state`. Convenience form for callers holding
/// a bare state; long runs should reuse a [`Chain`].
pub fn mh_step<R: Rng>(
    state: &ChainState,
    checks: &CheckSystem,
    cfg: &ChainConfig,
    rng: &mut R,
) -> ChainState {
    let mut next = state.clone();
    next.step += 1;
    if rng.gen_bool(LAZY_PROBABILITY) {
        return next;
    }
    let q = rng.gen_range(0..checks.n());
    let p = cfg.proposal.draw(rng);
    let mut e = state.error.clone();
    e.apply(q, p);
    if !cfg.allows(e.weight()) {
        return next;
    }
    let new = checks.energy(&e).expect("error length matches code");
    let log_a = cfg.beta / checks.lambda_f64() * (state.energy as f64 - new as f64);
    if new <= state.energy || rng.gen::<f64>().ln() < log_a {
        next.error = e;
        next.energy = new;
    }
    next
}

/// Recorded samples plus run statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRun {
    pub samples: Vec<ChainState>,
    /// Acceptance rate so far at each recorded sample.
    pub acceptance: Vec<f64>,
    pub acceptance_rate: f64,
}

/// Runs the chain, calling `visit` on each recorded state: steps `t` with
/// `t >= burn_in` and `(t - burn_in) % thin == 0`, including step 0.
pub fn run_chain_with<F>(checks: &CheckSystem, cfg: &ChainConfig, mut visit: F) -> Result<f64>
where
    F: FnMut(&Chain<'_>),
{
    let mut chain = Chain::new(checks, cfg.clone())?;
    let record = |t: u64| t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0;
    if record(0) {
        visit(&chain);
    }
    for t in 1..=cfg.steps {
        chain.step();
        if record(t) {
            visit(&chain);
        }
    }
    Ok(chain.acceptance_rate())
}

pub fn run_chain(checks: &CheckSystem, cfg: &ChainConfig) -> Result<ChainRun> {
    let mut samples = Vec::new();
    let mut acceptance = Vec::new();
    let acceptance_rate = run_chain_with(checks, cfg, |c| {
        samples.push(c.state());
        acceptance.push(c.acceptance_rate());
    })?;
    Ok(ChainRun {
        samples,
        acceptance,
        acceptance_rate,
    })
}

/// Writes the sample log: `preamble` (comment lines, written verbatim), a
/// `#` parameter line, then `step,weight,energy,acceptance_rate_so_far`.
pub fn write_sample_log<W: Write>(
    mut out: W,
    preamble: &str,
    checks: &CheckSystem,
    cfg: &ChainConfig,
    run: &ChainRun,
) -> std::io::Result<()> {
    out.write_all(preamble.as_bytes())?;
    writeln!(
        out,
        "# seed={} beta={} lambda={} truncation_k={} proposal={}",
        cfg.seed,
        cfg.beta,
        checks.lambda(),
        cfg.truncation_k.map_or_else(|| "none".to_string(), |k| k.to_string()),
        cfg.proposal
    )?;
    writeln!(out, "step,weight,energy,acceptance_rate_so_far")?;
    for (s, a) in run.samples.iter().zip(&run.acceptance) {
        writeln!(out, "{},{},{},{:.6}", s.step, s.weight(), s.energy, a)?;
    }
    Ok(())
}

/// Number of raw errors at each (energy, weight), by exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelCounts {
    n: usize,
    lambda: (u64, u64),
    counts: BTreeMap<(usize, usize), u64>,
}

impl LevelCounts {
    /// Enumerates all `4^n` errors in Gray-code order.
    pub fn enumerate(checks: &CheckSystem) -> Result<Self> {
        let n = checks.n();
        if n > MAX_EXACT_QUBITS {
            return Err(Error::TooLarge {
                what: "qubits for exact enumeration",
                value: n,
                limit: MAX_EXACT_QUBITS,
            });
        }
        let mut tracker = EnergyTracker::new(checks);
        let mut counts = BTreeMap::new();
        *counts.entry((0, 0)).or_insert(0u64) += 1;
        let total: u64 = 1 << (2 * n);
        for i in 1..total {
            // Bit b of the Gray code: X on qubit b for b < n, else Z on b - n.
            let b = i.trailing_zeros() as usize;
            let (q, p) = if b < n { (b, Pauli::X) } else { (b - n, Pauli::Z) };
            tracker.apply(checks, q, p);
            *counts.entry((tracker.energy(), tracker.weight())).or_insert(0) += 1;
        }
        let l = checks.lambda();
        Ok(LevelCounts {
            n,
            lambda: (*l.numer(), *l.denom()),
            counts,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Raw error count per (energy, weight).
    pub fn counts(&self) -> &BTreeMap<(usize, usize), u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Gibbs distribution at `beta`, optionally restricted to weight <= k.
    pub fn gibbs(&self, beta: f64, truncation_k: Option<usize>) -> GibbsDistribution {
        let scale = beta * self.lambda.1 as f64 / self.lambda.0 as f64;
        let mut by_level = BTreeMap::new();
        let mut z = 0.0;
        for (&(e, w), &c) in &self.counts {
            if truncation_k.map_or(false, |k| w > k) {
                continue;
            }
            let mass = c as f64 * (-scale * e as f64).exp();
            by_level.insert((e, w), mass);
            z += mass;
        }
        for v in by_level.values_mut() {
            *v /= z;
        }
        GibbsDistribution {
            scale,
            partition: z,
            by_level,
        }
    }
}

/// Exact Gibbs law over raw errors, aggregated by (energy, weight).
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsDistribution {
    scale: f64,
    /// Partition function `sum_e exp(-beta E(e) / lambda)`.
    pub partition: f64,
    by_level: BTreeMap<(usize, usize), f64>,
}

impl GibbsDistribution {
    /// Probability of one specific error with energy `energy`.
    pub fn probability_of_error(&self, energy: usize) -> f64 {
        (-self.scale * energy as f64).exp() / self.partition
    }

    pub fn by_level(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.by_level
    }

    pub fn energy_marginal(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (&(e, _), &p) in &self.by_level {
            *out.entry(e).or_insert(0.0) += p;
        }
        out
    }

    pub fn weight_marginal(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (&(_, w), &p) in &self.by_level {
            *out.entry(w).or_insert(0.0) += p;
        }
        out
    }
}

/// Exact Gibbs distribution by full enumeration.
pub fn exact_gibbs_oracle(checks: &CheckSystem, beta: f64) -> Result<GibbsDistribution> {
    Ok(LevelCounts::enumerate(checks)?.gibbs(beta, None))
}

/// Probability that the chain moves from `from` to `from * p_q` in one step.
pub fn transition_probability(
    checks: &CheckSystem,
    cfg: &ChainConfig,
    from: &PauliError,
    q: usize,
    p: Pauli,
) -> Result<f64> {
    let mut to = from.clone();
    to.apply(q, p);
    if !cfg.allows(to.weight()) {
        return Ok(0.0);
    }
    let (e_from, e_to) = (checks.energy(from)? as f64, checks.energy(&to)? as f64);
    let accept = (cfg.beta / checks.lambda_f64() * (e_from - e_to)).exp().min(1.0);
    Ok((1.0 - LAZY_PROBABILITY) / checks.n() as f64 * cfg.proposal.probability(p) * accept)
}

/// Largest `|pi_i M_ij - pi_j M_ji|` over `pairs` random adjacent pairs,
/// with `pi = exp(-beta E / lambda)` on allowed errors and 0 elsewhere.
pub fn detailed_balance_check(
    checks: &CheckSystem,
    cfg: &ChainConfig,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    cfg.validate(checks.n())?;
    let n = checks.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = |e: &PauliError| -> Result<f64> {
        if !cfg.allows(e.weight()) {
            return Ok(0.0);
        }
        Ok((-cfg.beta / checks.lambda_f64() * checks.energy(e)? as f64).exp())
    };
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let mut a = PauliError::identity(n);
        let target = rng.gen_range(0..=cfg.truncation_k.unwrap_or(n).min(n));
        for q in rand::seq::index::sample(&mut rng, n, target).iter() {
            a.apply(q, Pauli::ALL[rng.gen_range(0..3)]);
        }
        let q = rng.gen_range(0..n);
        let p = match cfg.proposal {
            Proposal::Xz => [Pauli::X, Pauli::Z][rng.gen_range(0..2)],
            Proposal::Xyz => Pauli::ALL[rng.gen_range(0..3)],
        };
        let mut b = a.clone();
        b.apply(q, p);
        let forward = pi(&a)? * transition_probability(checks, cfg, &a, q, p)?;
        let backward = pi(&b)? * transition_probability(checks, cfg, &b, q, p)?;
        worst = worst.max((forward - backward).abs());
    }
    Ok(worst)
}

/// Analytic tail bound `2n exp(-2n ln(1/delta) delta)` for the weight of a
/// thermal error, valid when `beta >= 5 ln(1/delta) / s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub value: f64,
    pub ln_value: f64,
    pub precondition: bool,
    pub min_beta: f64,
}

pub fn truncation_tail_bound(beta: f64, soundness: f64, delta: f64, n: usize) -> Result<TailBound> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::param(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if !(soundness > 0.0) {
        return Err(Error::param("soundness must be positive"));
    }
    let n = n as f64;
    let ln_inv = (1.0 / delta).ln();
    let ln_value = (2.0 * n).ln() - 2.0 * n * ln_inv * delta;
    let min_beta = 5.0 * ln_inv / soundness;
    Ok(TailBound {
        value: ln_value.exp(),
        ln_value,
        precondition: beta >= min_beta,
        min_beta,
    })
}

/// The interval `(10/alpha) ln(D)/s <= beta <= lambda/ln(n)` in which
/// typical thermal error clusters are small.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaWindow {
    pub low: f64,
    pub high: f64,
}

impl BetaWindow {
    pub fn is_empty(&self) -> bool {
        self.low > self.high
    }
}

pub fn beta_window_from(degree: f64, lambda: f64, n: usize, soundness: f64, alpha: f64) -> Result<BetaWindow> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(soundness > 0.0) {
        return Err(Error::param("soundness must be positive"));
    }
    Ok(BetaWindow {
        low: 10.0 / alpha * degree.ln() / soundness,
        high: lambda / (n as f64).ln(),
    })
}

/// Window for a check system, with D the maximum degree of its interaction
/// graph.
pub fn beta_window(checks: &CheckSystem, alpha: f64, soundness: f64) -> Result<BetaWindow> {
    let d = checks.interaction_graph().max_degree() as f64;
    let w = beta_window_from(d, checks.lambda_f64(), checks.n(), soundness, alpha)?;
    if w.is_empty() {
        log::info!(
            "beta window empty at n = {}: low {:.3} > high {:.3}",
            checks.n(),
            w.low,
            w.high
        );
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_projective_code;

    fn system(n: usize) -> CheckSystem {
        CheckSystem::base(build_projective_code(n).unwrap())
    }

    #[test]
    fn zero_steps_gives_initial_state() {
        let sys = system(4);
        let run = run_chain(&sys, &ChainConfig::new(1.0, 0, 3)).unwrap();
        assert_eq!(run.samples.len(), 1);
        assert!(run.samples[0].error.is_identity());
        assert_eq!(run.samples[0].energy, 0);
    }

    #[test]
    fn same_seed_same_samples() {
        let sys = system(4);
        let cfg = ChainConfig { thin: 7, burn_in: 10, ..ChainConfig::new(0.8, 500, 9) };
        let a = run_chain(&sys, &cfg).unwrap();
        assert_eq!(a, run_chain(&sys, &cfg).unwrap());
        assert_eq!(a.samples.len(), 1 + (500 - 10) / 7);
        assert_ne!(a, run_chain(&sys, &ChainConfig { seed: 10, ..cfg }).unwrap());
    }

    #[test]
    fn beta_zero_accepts_every_proposal() {
        let sys = system(4);
        let mut chain = Chain::new(&sys, ChainConfig::new(0.0, 0, 1)).unwrap();
        for _ in 0..4000 {
            chain.step();
        }
        assert!((chain.acceptance_rate() - 0.75).abs() < 0.03);
    }

    #[test]
    fn cache_stays_coherent_with_amplification() {
        let code = build_projective_code(6).unwrap();
        let amp = crate::amplify::amplify(&code, 3, 300, 2).unwrap();
        let sys = crate::amplify::union_system(code, amp).unwrap();
        for proposal in [Proposal::Xz, Proposal::Xyz] {
            let cfg = ChainConfig { proposal, truncation_k: Some(9), ..ChainConfig::new(2.0, 0, 5) };
            let mut chain = Chain::new(&sys, cfg).unwrap();
            for _ in 0..3000 {
                chain.step();
                assert!(chain.energy_cache_coherent().unwrap());
                assert!(chain.weight() <= 9);
                assert_eq!(chain.weight(), chain.error().weight());
            }
        }
    }

    #[test]
    fn single_z_acceptance_matches_hand_computation() {
        // A Z on one qubit of the N=4 code violates its N = 4 X-checks.
        let sys = system(4);
        let beta = 1.3;
        let cfg = ChainConfig::new(beta, 0, 0);
        let lambda = 20.0 / 12.0;
        let p = transition_probability(&sys, &cfg, &PauliError::identity(12), 0, Pauli::Z).unwrap();
        let expected = 0.75 / 12.0 * 0.5 * (-beta * 4.0 / lambda).exp();
        assert!((p - expected).abs() < 1e-15);
        // The reverse move lowers the energy and is always accepted.
        let e = PauliError::single(12, 0, Pauli::Z).unwrap();
        let back = transition_probability(&sys, &cfg, &e, 0, Pauli::Z).unwrap();
        assert!((back - 0.75 / 24.0).abs() < 1e-15);
        assert_eq!(transition_probability(&sys, &cfg, &e, 0, Pauli::Y).unwrap(), 0.0);
    }

    #[test]
    fn mh_step_matches_chain_semantics() {
        let sys = system(4);
        let cfg = ChainConfig::new(0.5, 0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = ChainState { error: PauliError::identity(12), energy: 0, step: 0 };
        for _ in 0..2000 {
            s = mh_step(&s, &sys, &cfg, &mut rng);
            assert_eq!(sys.energy(&s.error).unwrap(), s.energy);
        }
        assert_eq!(s.step, 2000);
    }

    #[test]
    fn n2_partition_function_matches_level_sum() {
        let sys = system(2);
        let counts = LevelCounts::enumerate(&sys).unwrap();
        assert_eq!(counts.total(), 16);
        let beta = 0.7;
        let d = counts.gibbs(beta, None);
        // Direct sum over every one of the 16 errors.
        let mut z = 0.0;
        for bits in 0u32..16 {
            let mut e = PauliError::identity(2);
            for q in 0..2 {
                if bits >> q & 1 == 1 {
                    e.apply(q, Pauli::X);
                }
                if bits >> (q + 2) & 1 == 1 {
                    e.apply(q, Pauli::Z);
                }
            }
            z += (-beta / sys.lambda_f64() * sys.energy(&e).unwrap() as f64).exp();
        }
        assert!((d.partition - z).abs() < 1e-12);
        assert!((d.probability_of_error(0) - 1.0 / z).abs() < 1e-12);
    }

    #[test]
    fn oracle_limits() {
        let sys = system(2);
        let uniform = exact_gibbs_oracle(&sys, 0.0).unwrap();
        assert!((uniform.partition - 16.0).abs() < 1e-12);
        let cold = exact_gibbs_oracle(&sys, 1e4 * sys.lambda_f64()).unwrap();
        let ground: f64 = cold.energy_marginal().get(&0).copied().unwrap();
        assert!((ground - 1.0).abs() < 1e-12);
        assert!(exact_gibbs_oracle(&system(6), 1.0).is_err());
    }

    #[test]
    fn enumeration_matches_direct_energies_at_n4() {
        let sys = system(4);
        let counts = LevelCounts::enumerate(&sys).unwrap();
        assert_eq!(counts.total(), 1 << 24);
        // Weight-1 level: 36 errors; energies 2 (X), 4 (Z), 6 (Y).
        let w1: BTreeMap<usize, u64> = counts
            .counts()
            .iter()
            .filter(|((_, w), _)| *w == 1)
            .map(|(&(e, _), &c)| (e, c))
            .collect();
        assert_eq!(w1, [(2, 12), (4, 12), (6, 12)].into());
    }

    #[test]
    fn detailed_balance_residuals() {
        let sys = system(4);
        for proposal in [Proposal::Xz, Proposal::Xyz] {
            for k in [None, Some(3)] {
                let cfg = ChainConfig { proposal, truncation_k: k, ..ChainConfig::new(1.7, 0, 0) };
                assert!(detailed_balance_check(&sys, &cfg, 1000, 11).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn tail_bound_substitution() {
        let b = truncation_tail_bound(1.0, 1.0, 0.499_999_999, 1000).unwrap();
        let expected = 2000f64.ln() - 1000.0 * 2f64.ln();
        assert!((b.ln_value - expected).abs() < 1e-5);
        assert!(!truncation_tail_bound(1.0, 1.0, 0.1, 10).unwrap().precondition);
        assert!(truncation_tail_bound(5.0 * 10f64.ln(), 1.0, 0.1, 10).unwrap().precondition);
        assert!(truncation_tail_bound(1.0, 1.0, 0.5, 10).is_err());
        assert!(truncation_tail_bound(1.0, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn window_substitution() {
        let w = beta_window_from(std::f64::consts::E, 1.0, 100, 1.0, 1.0).unwrap();
        assert!((w.low - 10.0).abs() < 1e-12);
        let w2 = beta_window_from(std::f64::consts::E, 1.0, 100, 2.0, 1.0).unwrap();
        assert!(w2.low < w.low);
        assert!(beta_window_from(3.0, 1.0, 10, 1.0, 0.0).is_err());
    }

    #[test]
    fn sample_log_header() {
        let sys = system(2);
        let cfg = ChainConfig { truncation_k: Some(1), ..ChainConfig::new(1.0, 3, 42) };
        let run = run_chain(&sys, &cfg).unwrap();
        let mut buf = Vec::new();
        write_sample_log(&mut buf, "# version=v0\n", &sys, &cfg, &run).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# version=v0");
        assert!(lines[1].starts_with("# seed=42 beta=1 lambda=") && lines[1].contains("truncation_k=1"));
        assert_eq!(lines[2], "step,weight,energy,acceptance_rate_so_far");
        assert_eq!(lines.len(), 3 + 4);
    }
}
