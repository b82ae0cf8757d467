//! Randomized soundness amplification.
//!
//! An amplified check is a set of base checks that is violated whenever any
//! of its constituents is. Subsets are drawn independently and uniformly
//! among all sets of `subset_size` distinct base checks. Base check ids put
//! the X-checks first, then the Z-checks.

use std::io::{BufRead, Write};

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checks::CheckSystem;
use crate::code::CssCode;
use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmplifiedCheckSet {
    subsets: Vec<Vec<usize>>,
    subset_size: usize,
    m_base: usize,
    seed: u64,
}

impl AmplifiedCheckSet {
    pub fn empty(m_base: usize) -> Self {
        AmplifiedCheckSet {
            subsets: Vec::new(),
            subset_size: 0,
            m_base,
            seed: 0,
        }
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn subset_size(&self) -> usize {
        self.subset_size
    }

    pub fn m_base(&self) -> usize {
        self.m_base
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Number of subsets containing at least one violated base check.
    pub fn amplified_violations(&self, base_violated: &BitVector) -> Result<usize> {
        if base_violated.len() != self.m_base {
            return Err(Error::LengthMismatch {
                expected: self.m_base,
                found: base_violated.len(),
            });
        }
        Ok(self
            .subsets
            .iter()
            .filter(|s| s.iter().any(|&c| base_violated.bit(c)))
            .count())
    }

    /// Header line `# seed=S m_base=M subset_size=K m_prime=P`, then one line
    /// of base-check ids per subset.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# seed={} m_base={} subset_size={} m_prime={}",
            self.seed,
            self.m_base,
            self.subset_size,
            self.subsets.len()
        )?;
        for s in &self.subsets {
            let line: Vec<String> = s.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Reads [`AmplifiedCheckSet::write_text`] output. Comment lines before
    /// the header are skipped.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .skip_while(|l| matches!(l, Ok(s) if s.starts_with('#') && !s.contains("m_base=")));
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let header = lines
            .next()
            .ok_or_else(|| err(1, "missing header"))?
            .map_err(|e| err(1, &e.to_string()))?;
        let mut fields = std::collections::HashMap::new();
        for tok in header.trim_start_matches('#').split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| err(1, "expected key=value"))?;
            let v: u64 = v.parse().map_err(|_| err(1, "non-integer header value"))?;
            fields.insert(k.to_string(), v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| err(1, &format!("missing {k}")));
        let (seed, m_base, subset_size, m_prime) =
            (get("seed")?, get("m_base")? as usize, get("subset_size")? as usize, get("m_prime")? as usize);
        let mut subsets = Vec::with_capacity(m_prime);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| err(i + 2, &e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(i + 2, "non-integer check id"))?;
            if ids.len() != subset_size || ids.iter().any(|&c| c >= m_base) {
                return Err(err(i + 2, "subset size or id out of range"));
            }
            subsets.push(ids);
        }
        if subsets.len() != m_prime {
            return Err(err(0, "subset count differs from header"));
        }
        Ok(AmplifiedCheckSet {
            subsets,
            subset_size,
            m_base,
            seed,
        })
    }
}

/// `(ceil(1/s), ceil(n log2(n)^2))`: subset size and family size that the
/// existence argument uses.
pub fn default_amplification(n: usize, soundness: f64) -> (usize, usize) {
    let log = (n as f64).log2();
    ((1.0 / soundness).ceil() as usize, (n as f64 * log * log).ceil() as usize)
}

/// Draws `m_prime` subsets of `subset_size` distinct base checks.
pub fn amplify(code: &CssCode, subset_size: usize, m_prime: usize, seed: u64) -> Result<AmplifiedCheckSet> {
    let m_base = code.num_checks();
    if subset_size == 0 || m_prime == 0 {
        return Err(Error::param("subset_size and m_prime must be positive"));
    }
    if subset_size > m_base {
        return Err(Error::param(format!(
            "subset_size {subset_size} exceeds the {m_base} base checks"
        )));
    }
    let (_, paper_m) = default_amplification(code.n(), 1.0);
    if m_prime < paper_m {
        warn!("m_prime = {m_prime} is below ceil(n log^2 n) = {paper_m}; the family is not guaranteed to amplify every error");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets = (0..m_prime)
        .map(|_| {
            let mut s = rand::seq::index::sample(&mut rng, m_base, subset_size).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    Ok(AmplifiedCheckSet {
        subsets,
        subset_size,
        m_base,
        seed,
    })
}

/// Base checks together with the amplified family.
pub fn union_system(code: CssCode, amp: AmplifiedCheckSet) -> Result<CheckSystem> {
    CheckSystem::with_amplified(code, amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_projective_code, Pauli, PauliError};

    #[test]
    fn same_seed_same_family() {
        let code = build_projective_code(4).unwrap();
        let a = amplify(&code, 3, 50, 17).unwrap();
        let b = amplify(&code, 3, 50, 17).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, amplify(&code, 3, 50, 18).unwrap());
        for s in a.subsets() {
            assert_eq!(s.len(), 3);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&c| c < code.num_checks()));
        }
    }

    #[test]
    fn invalid_sizes_rejected() {
        let code = build_projective_code(4).unwrap();
        assert!(amplify(&code, 0, 5, 1).is_err());
        assert!(amplify(&code, 2, 0, 1).is_err());
        assert!(amplify(&code, 21, 5, 1).is_err());
        assert!(amplify(&code, 20, 5, 1).is_ok());
    }

    #[test]
    fn violation_counts() {
        let code = build_projective_code(4).unwrap();
        let amp = amplify(&code, 2, 40, 3).unwrap();
        let m = code.num_checks();
        assert_eq!(amp.amplified_violations(&BitVector::zeros(m)).unwrap(), 0);
        let all = BitVector::from_indices(m, &(0..m).collect::<Vec<_>>()).unwrap();
        assert_eq!(amp.amplified_violations(&all).unwrap(), 40);
        for c in 0..m {
            let expected = amp.subsets().iter().filter(|s| s.contains(&c)).count();
            let one = BitVector::from_indices(m, &[c]).unwrap();
            assert_eq!(amp.amplified_violations(&one).unwrap(), expected);
        }
        assert!(amp.amplified_violations(&BitVector::zeros(m + 1)).is_err());
    }

    #[test]
    fn singleton_subsets_resample_base_checks() {
        let code = build_projective_code(4).unwrap();
        let amp = amplify(&code, 1, 30, 8).unwrap();
        let sys = union_system(code.clone(), amp.clone()).unwrap();
        let e = PauliError::single(code.n(), 2, Pauli::Z).unwrap();
        let viol = sys.base_violations(&e).unwrap();
        let hits = amp.subsets().iter().filter(|s| viol.bit(s[0])).count();
        assert_eq!(sys.energy(&e).unwrap(), 4 + hits);
    }

    #[test]
    fn paper_defaults() {
        assert_eq!(default_amplification(16, 0.25), (4, 256));
        assert_eq!(default_amplification(16, 0.3), (4, 256));
    }

    #[test]
    fn text_roundtrip() {
        let code = build_projective_code(4).unwrap();
        let amp = amplify(&code, 3, 7, 99).unwrap();
        let mut buf = Vec::new();
        amp.write_text(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# seed=99 m_base=20 subset_size=3 m_prime=7\n"));
        assert_eq!(AmplifiedCheckSet::read_text(buf.as_slice()).unwrap(), amp);
        let mut commented = b"# version=x seed=1\n".to_vec();
        commented.extend_from_slice(&buf);
        assert_eq!(AmplifiedCheckSet::read_text(commented.as_slice()).unwrap(), amp);
        assert!(AmplifiedCheckSet::read_text("# seed=1 m_base=4 subset_size=2 m_prime=1\n0 9\n".as_bytes()).is_err());
    }
}
