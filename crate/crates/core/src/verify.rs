//! Quick self-checks of the structural and statistical claims the library
//! relies on, with a deterministic textual report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checks::CheckSystem;
use crate::code::{build_projective_code, Pauli, PauliError};
use crate::cube::symmetry::{pair_orbit_representatives, random_clustered_set, random_face};
use crate::cube::{expansion_ratio, Direction, ProjFace};
use crate::decoder::{default_max_rounds, planted_trials, Decoder};
use crate::error::{Error, Result};
use crate::gibbs::{detailed_balance_check, run_chain_with, ChainConfig, LevelCounts};
use crate::graph::Graph;
use crate::percolation::{maxconn_alpha, percolation_bound, DEFAULT_PERCOLATION_C};
use crate::stats::{derive_seed, normalize, total_variation, wilson_interval, Z95};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,passed,detail\n");
        for o in &self.outcomes {
            writeln!(s, "{},{},\"{}\"", o.name, o.passed, o.detail.replace('"', "'")).expect("write to String");
        }
        s
    }
}

/// Counts from an expansion sweep at one cube dimension.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExpansionSweep {
    pub sets_checked: usize,
    pub violations: usize,
    /// Smallest ratio seen per direction, as (numerator, denominator).
    pub min_up: Option<Ratio<u64>>,
    pub min_down: Option<Ratio<u64>>,
}

/// Checks small-set expansion of p-faces, p = n/2: every 1- and 2-element
/// set (one representative per symmetry orbit) and `random_sets` random
/// sets per direction with sizes up to `n/32` (up) and `n/64` (down), at
/// least 2. Up-ratios must reach `(n/2)(15/16)`, down-ratios `n (15/16)`.
pub fn expansion_sweep(n: usize, random_sets: usize, seed: u64) -> Result<ExpansionSweep> {
    if n % 2 == 1 || n < 4 {
        return Err(Error::OddDimension(n));
    }
    let p = n / 2;
    let up_need = Ratio::new(15 * p as u64, 16);
    let down_need = Ratio::new(15 * n as u64, 16);
    let mut out = ExpansionSweep::default();
    let check = |set: &[ProjFace], out: &mut ExpansionSweep| -> Result<()> {
        let up = expansion_ratio(set, Direction::Up)?;
        let down = expansion_ratio(set, Direction::Down)?;
        out.sets_checked += 1;
        if up < up_need {
            out.violations += 1;
        }
        if down < down_need {
            out.violations += 1;
        }
        out.min_up = Some(out.min_up.map_or(up, |m| m.min(up)));
        out.min_down = Some(out.min_down.map_or(down, |m| m.min(down)));
        Ok(())
    };
    let single = ProjFace::of(pair_orbit_representatives(n, p)[0].0);
    check(&[single], &mut out)?;
    for (a, b) in pair_orbit_representatives(n, p) {
        check(&[ProjFace::of(a), ProjFace::of(b)], &mut out)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let up_max = (n / 32).max(2);
    let down_max = (n / 64).max(2);
    for i in 0..random_sets {
        let max = if i % 2 == 0 { up_max } else { down_max };
        let size = rng.gen_range(1..=max);
        let set = if i % 4 < 2 {
            let mut s: Vec<ProjFace> = Vec::new();
            while s.len() < size {
                let f = ProjFace::of(random_face(&mut rng, n, p));
                if !s.contains(&f) {
                    s.push(f);
                }
            }
            s
        } else {
            random_clustered_set(&mut rng, n, p, size, 0.9)
        };
        let up = expansion_ratio(&set, Direction::Up)?;
        let down = expansion_ratio(&set, Direction::Down)?;
        out.sets_checked += 1;
        if (set.len() <= up_max && up < up_need) || (set.len() <= down_max && down < down_need) {
            out.violations += 1;
        }
        out.min_up = Some(out.min_up.map_or(up, |m| m.min(up)));
        out.min_down = Some(out.min_down.map_or(down, |m| m.min(down)));
    }
    Ok(out)
}

/// Largest connected S with `|S ∩ X| >= α |S|`, by trying every subset of
/// a graph with at most 20 vertices.
pub fn maxconn_exhaustive(g: &Graph, x: &[usize], alpha: Ratio<u64>) -> usize {
    let n = g.vertex_count();
    assert!(n <= 20, "exhaustive search limited to 20 vertices");
    let xm: u32 = x.iter().map(|&v| 1u32 << v).sum();
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().map(|&w| 1u32 << w).sum()).collect();
    let mut best = 0;
    for s in 1u32..1 << n {
        let size = s.count_ones() as u64;
        if (size as usize) <= best || u64::from((s & xm).count_ones()) * alpha.denom() < alpha.numer() * size {
            continue;
        }
        let mut seen = s & s.wrapping_neg();
        loop {
            let mut grow = seen;
            let mut rest = seen;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                grow |= nbr[v] & s;
            }
            if grow == seen {
                break;
            }
            seen = grow;
        }
        if seen == s {
            best = size as usize;
        }
    }
    best
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn css_validity() -> Result<CheckOutcome> {
    let mut detail = String::new();
    let mut ok = true;
    for n in [2, 4, 6, 8, 10] {
        let code = build_projective_code(n)?;
        let zero = code.h_x().mul_transpose(code.h_z())?.is_zero();
        ok &= zero;
        write!(detail, "N={n}:n={},k={} ", code.n(), code.logical_qubits()).expect("write to String");
    }
    Ok(outcome("css_validity", ok, detail.trim_end().to_string()))
}

fn structure_constants() -> Result<CheckOutcome> {
    let mut ok = true;
    for n in [4, 6, 8, 10] {
        let code = build_projective_code(n)?;
        ok &= code.h_x().rows().all(|r| r.len() == n / 2 + 1);
        ok &= code.h_z().rows().all(|r| r.len() == n + 2);
        ok &= (0..code.n()).all(|q| code.x_checks_of(q).len() == n && code.z_checks_of(q).len() == n / 2);
    }
    Ok(outcome("structure_constants", ok, "N in 4..=10: row weights N/2+1, N+2; degrees N, N/2".into()))
}

fn expansion(seed: u64) -> Result<CheckOutcome> {
    let s = expansion_sweep(64, 2000, seed)?;
    Ok(outcome(
        "expansion_n64",
        s.violations == 0,
        format!(
            "sets={} violations={} min_up={} min_down={}",
            s.sets_checked,
            s.violations,
            s.min_up.expect("checked"),
            s.min_down.expect("checked")
        ),
    ))
}

fn gibbs(seed: u64) -> Result<Vec<CheckOutcome>> {
    let sys = CheckSystem::base(build_projective_code(4)?);
    let cfg = ChainConfig::new(1.5, 0, 0);
    let db = detailed_balance_check(&sys, &cfg, 1000, derive_seed(seed, &[2, 0]))?;
    let db_trunc = detailed_balance_check(&sys, &ChainConfig { truncation_k: Some(3), ..cfg }, 1000, derive_seed(seed, &[2, 1]))?;
    let mut out = vec![outcome(
        "detailed_balance",
        db < 1e-12 && db_trunc < 1e-12,
        format!("max_residual={:.3e} truncated={:.3e}", db, db_trunc),
    )];

    let small = CheckSystem::base(build_projective_code(2)?);
    let exact = LevelCounts::enumerate(&small)?.gibbs(1.0, None).energy_marginal();
    let mut hist = BTreeMap::new();
    run_chain_with(&small, &ChainConfig { burn_in: 1000, ..ChainConfig::new(1.0, 1_000_000, derive_seed(seed, &[2, 2])) }, |c| {
        *hist.entry(c.energy()).or_insert(0u64) += 1;
    })?;
    let tv = total_variation(&normalize(&hist), &exact);
    out.push(outcome("gibbs_oracle_n2", tv < 0.02, format!("steps=1000000 tv={tv:.5}")));
    Ok(out)
}

fn maxconn_oracle(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let cases = 300;
    for _ in 0..cases {
        let n = rng.gen_range(1..=9);
        let density = rng.gen_range(0.15..0.6);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(density))
            .collect();
        let g = Graph::from_edges(n, edges)?;
        let x: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        for alpha in [Ratio::new(1, 3), Ratio::new(1, 2), Ratio::new(1, 1)] {
            if maxconn_alpha(&g, &x, alpha, 12)?.maxconn() != Some(maxconn_exhaustive(&g, &x, alpha)) {
                mismatches += 1;
            }
        }
    }
    Ok(outcome("maxconn_oracle", mismatches == 0, format!("graphs={cases} mismatches={mismatches}")))
}

fn decoder_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let code = build_projective_code(6)?;
    let dec = Decoder::new(&code);
    let mut failures = 0;
    let mut worst = 0;
    for q in 0..code.n() {
        for p in Pauli::ALL {
            let r = dec.decode(&PauliError::single(code.n(), q, p)?, default_max_rounds(code.n()))?;
            failures += usize::from(!r.recovered());
            worst = worst.max(r.max_rounds());
        }
    }
    out.push(outcome(
        "decoder_single_qubit_n6",
        failures == 0 && worst <= 2,
        format!("errors={} failures={failures} max_rounds={worst}", 3 * code.n()),
    ));

    let code8 = build_projective_code(8)?;
    let g = CheckSystem::base(code8.clone()).interaction_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let st = planted_trials(&code8, &g, 200, 8, (2.41, 2.0), &mut rng)?;
    out.push(outcome(
        "decoder_planted_n8",
        st.expanding > 0 && st.expanding_within_depth * 100 >= 99 * st.expanding,
        format!(
            "trials={} recovered={} expanding={} expanding_recovered={} expanding_within_depth={}",
            st.trials, st.recovered, st.expanding, st.expanding_recovered, st.expanding_within_depth
        ),
    ));
    Ok(out)
}

fn percolation(seed: u64) -> Result<CheckOutcome> {
    let code = build_projective_code(6)?;
    let g = CheckSystem::base(code).interaction_graph();
    let n = g.vertex_count();
    let d = g.max_degree();
    let p = 0.9 * DEFAULT_PERCOLATION_C / d as f64;
    let trials = 20_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at_least = vec![0u64; n + 2];
    for _ in 0..trials {
        let x: Vec<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
        let m = maxconn_alpha(&g, &x, Ratio::from_integer(1), 12)?.maxconn_upper;
        for t in 1..=m {
            at_least[t] += 1;
        }
    }
    let mut ok = true;
    for t in 1..=n {
        let b = percolation_bound(d, 1.0, p, t, n, DEFAULT_PERCOLATION_C)?;
        let (lo, _) = wilson_interval(at_least[t], trials, Z95);
        ok &= !b.applicable || lo <= b.value;
    }
    Ok(outcome(
        "percolation_iid_n6",
        ok,
        format!("D={d} p={p:.6} trials={trials} P(maxconn>=1)={:.5}", at_least[1] as f64 / trials as f64),
    ))
}

/// Runs every check with seeds derived from `seed`.
pub fn run_verify(seed: u64) -> Result<VerifyReport> {
    let mut outcomes = vec![css_validity()?, structure_constants()?, expansion(derive_seed(seed, &[10]))?];
    outcomes.extend(gibbs(derive_seed(seed, &[11]))?);
    outcomes.push(maxconn_oracle(derive_seed(seed, &[12]))?);
    outcomes.extend(decoder_checks(derive_seed(seed, &[13]))?);
    outcomes.push(percolation(derive_seed(seed, &[14]))?);
    Ok(VerifyReport { outcomes })
}

/// Runs the checks and writes `verify.csv` and `manifest.txt` under `dir`.
pub fn run_verify_to(dir: &Path, seed: u64) -> Result<VerifyReport> {
    let report = run_verify(seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let text = format!("{}{}", crate::experiment::preamble(crate::VERSION, seed), report.to_csv());
    let path = dir.join("verify.csv");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    crate::experiment::write_manifest(dir, crate::VERSION, seed)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_oracle_examples() {
        let star = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(maxconn_exhaustive(&star, &[1, 2], Ratio::new(1, 2)), 4);
        assert_eq!(maxconn_exhaustive(&star, &[1, 2], Ratio::from_integer(1)), 1);
        assert_eq!(maxconn_exhaustive(&star, &[], Ratio::new(1, 3)), 0);
    }

    #[test]
    fn expansion_sweep_small() {
        let s = expansion_sweep(64, 40, 1).unwrap();
        assert_eq!(s.violations, 0);
        assert_eq!(s.min_down, Some(Ratio::from_integer(64)).min(s.min_down));
        assert!(expansion_sweep(5, 1, 1).is_err());
    }
}
