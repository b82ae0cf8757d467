//! Linear algebra over GF(2).
//!
//! [`BitVector`] is a dense packed vector; [`BitMatrix`] stores each row as a
//! sorted list of column indices, which suits parity-check matrices whose
//! rows are short while the column count grows combinatorially. Rank, kernel
//! and row-space queries convert to packed dense rows and run Gaussian
//! elimination one 64-bit word at a time.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2), packed into 64-bit words.
///
/// Bits beyond `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector with the given positions set. Repeated indices cancel.
    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut v = BitVector::zeros(len);
        for &i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            v.flip(i);
        }
        Ok(v)
    }

    /// Low `len` bits of `bits` (bit i is entry i). Requires `len <= 64`.
    pub fn from_u64(len: usize, bits: u64) -> Self {
        assert!(len <= WORD, "from_u64 needs len <= 64");
        let mut v = BitVector::zeros(len);
        if len > 0 {
            let mask = if len == WORD { !0 } else { (1u64 << len) - 1 };
            v.words[0] = bits & mask;
        }
        v
    }

    /// The low 64 entries packed into a word (entry i is bit i).
    pub fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Checked read.
    pub fn get(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(self.bit(i))
    }

    /// Unchecked-by-`Result` read; panics when `i >= len`.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let m = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn or(&self, other: &BitVector) -> Result<BitVector> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        Ok(BitVector {
            len: self.len,
            words,
        })
    }

    /// Number of positions set in both vectors.
    pub fn and_weight(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// Positions of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    pub fn ones(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.bit(i)))?;
        }
        write!(f, "]")
    }
}

/// A sparse GF(2) matrix stored as sorted column indices per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<Vec<usize>>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![Vec::new(); rows],
        }
    }

    pub fn identity(size: usize) -> Self {
        BitMatrix {
            cols: size,
            rows: (0..size).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from per-row index lists. Each row is sorted and must
    /// not repeat an index.
    pub fn from_rows(cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut rows = rows;
        for row in &mut rows {
            row.sort_unstable();
            if let Some(&last) = row.last() {
                if last >= cols {
                    return Err(Error::IndexOutOfRange {
                        index: last,
                        len: cols,
                    });
                }
            }
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param("duplicate column index within a row"));
            }
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn from_dense(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            out.push(r.ones());
        }
        Ok(BitMatrix { cols, rows: out })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        for &c in &self.rows[r] {
            v.flip(c);
        }
        v
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(r);
            }
        }
        BitMatrix {
            cols: self.rows.len(),
            rows: cols,
        }
    }

    /// Matrix-vector product `M v`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            let parity = row.iter().fold(false, |acc, &c| acc ^ v.bit(c));
            if parity {
                out.flip(r);
            }
        }
        Ok(out)
    }

    /// Product `self * other^T`, i.e. the pairwise overlap parities of rows.
    pub fn mul_transpose(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let other_cols = other.transpose();
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut acc = BitVector::zeros(other.num_rows());
            for &c in row {
                for &r2 in other_cols.row(c) {
                    acc.flip(r2);
                }
            }
            rows.push(acc.ones());
        }
        Ok(BitMatrix {
            cols: other.num_rows(),
            rows,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    fn dense_rows(&self) -> Vec<BitVector> {
        (0..self.rows.len()).map(|r| self.row_vector(r)).collect()
    }

    /// Row rank over GF(2).
    pub fn rank(&self) -> usize {
        Echelon::reduce(self.dense_rows(), self.cols).pivots.len()
    }

    /// A basis of the null space `{v : M v = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let ech = Echelon::reduce(self.dense_rows(), self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - ech.pivots.len());
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
                if row.bit(free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// True iff `v` is a sum of rows of `self`.
    pub fn in_rowspace(&self, v: &BitVector) -> Result<bool> {
        RowSpace::new(self).contains(v)
    }

    /// Writes the text form: a `rows cols` line, then one line of
    /// space-separated column indices per row.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.rows.len(), self.cols)?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii")
    }

    /// Reads the [`BitMatrix::write_text`] format, skipping `#` lines.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        // `#` lines are comments.
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| !matches!(l, Ok(s) if s.starts_with('#')));
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
        let header = header.map_err(|e| parse_err(0, &e.to_string()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(0, "header must be `rows cols`"))?;
        let [nrows, ncols] = dims[..] else {
            return Err(parse_err(0, "header must be `rows cols`"));
        };
        let mut rows = Vec::with_capacity(nrows);
        for (i, line) in lines.take(nrows) {
            let line = line.map_err(|e| parse_err(i, &e.to_string()))?;
            let row: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(i, "non-integer column index"))?;
            rows.push(row);
        }
        if rows.len() != nrows {
            return Err(parse_err(rows.len() + 1, "fewer rows than declared"));
        }
        BitMatrix::from_rows(ncols, rows)
    }
}

/// Row-reduced echelon form of a set of dense rows.
struct Echelon {
    /// Fully reduced rows, one per pivot.
    rows: Vec<BitVector>,
    /// Pivot column of each row, increasing.
    pivots: Vec<usize>,
}

impl Echelon {
    fn reduce(mut rows: Vec<BitVector>, cols: usize) -> Echelon {
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..cols {
            let w = col / WORD;
            let m = 1u64 << (col % WORD);
            let Some(found) = (next..rows.len()).find(|&r| rows[r].words[w] & m != 0) else {
                continue;
            };
            rows.swap(next, found);
            let (before, rest) = rows.split_at_mut(next);
            let (pivot_row, after) = rest.split_first_mut().expect("pivot row exists");
            for r in before.iter_mut().chain(after.iter_mut()) {
                if r.words[w] & m != 0 {
                    for (a, b) in r.words.iter_mut().zip(&pivot_row.words) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
            next += 1;
            if next == rows.len() {
                break;
            }
        }
        rows.truncate(next);
        Echelon { rows, pivots }
    }
}

/// Precomputed reduced basis of a row space, for repeated membership tests.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        let ech = Echelon::reduce(m.dense_rows(), m.cols);
        RowSpace {
            cols: m.cols,
            rows: ech.rows,
            pivots: ech.pivots,
        }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Canonical representative of `v` modulo the row space: the unique
    /// vector in the coset with zeros on every pivot column.
    pub fn reduce(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut r = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r.bit(p) {
                for (a, b) in r.words.iter_mut().zip(&row.words) {
                    *a ^= b;
                }
            }
        }
        Ok(r)
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix_strategy() -> impl Strategy<Value = BitMatrix> {
        (1usize..9, 1usize..70).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::btree_set(0..c, 0..c.min(6) + 1), r)
                .prop_map(move |rows| {
                    BitMatrix::from_rows(c, rows.into_iter().map(|s| s.into_iter().collect()).collect())
                        .unwrap()
                })
        })
    }

    #[test]
    fn rank_trivial_cases() {
        assert_eq!(BitMatrix::zeros(3, 3).rank(), 0);
        assert_eq!(BitMatrix::identity(3).rank(), 3);
    }

    #[test]
    fn kernel_trivial_cases() {
        assert!(BitMatrix::identity(2).kernel_basis().is_empty());
        assert_eq!(BitMatrix::zeros(2, 2).kernel_basis().len(), 2);
    }

    #[test]
    fn rowspace_trivial_cases() {
        let m = BitMatrix::from_rows(5, vec![vec![0, 1], vec![1, 2, 4]]).unwrap();
        assert!(m.in_rowspace(&BitVector::zeros(5)).unwrap());
        let id = BitMatrix::identity(5);
        let v = BitVector::from_indices(5, &[0, 3, 4]).unwrap();
        assert!(id.in_rowspace(&v).unwrap());
        assert!(matches!(
            m.in_rowspace(&BitVector::zeros(4)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_is_an_error() {
        let v = BitVector::zeros(10);
        assert!(v.get(9).is_ok());
        assert!(matches!(v.get(10), Err(Error::IndexOutOfRange { .. })));
        assert!(BitMatrix::from_rows(3, vec![vec![3]]).is_err());
        assert!(BitMatrix::from_rows(3, vec![vec![1, 1]]).is_err());
    }

    #[test]
    fn text_roundtrip_and_golden() {
        let m = BitMatrix::from_rows(4, vec![vec![2, 0], vec![], vec![3]]).unwrap();
        let text = m.to_text();
        assert_eq!(text, "3 4\n0 2\n\n3\n");
        let back = BitMatrix::read_text(text.as_bytes()).unwrap();
        assert_eq!(back, m);
        let commented = format!("# version=x seed=1\n{text}");
        assert_eq!(BitMatrix::read_text(commented.as_bytes()).unwrap(), m);
        assert!(BitMatrix::read_text("2 3\n0 1\n".as_bytes()).is_err());
        assert!(BitMatrix::read_text("2 3\n0 x\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn iter_ones_across_words() {
        let v = BitVector::from_indices(200, &[0, 63, 64, 127, 199]).unwrap();
        assert_eq!(v.ones(), vec![0, 63, 64, 127, 199]);
        assert_eq!(v.weight(), 5);
    }

    proptest! {
        #[test]
        fn rank_nullity(m in matrix_strategy()) {
            let basis = m.kernel_basis();
            prop_assert_eq!(m.rank() + basis.len(), m.num_cols());
            for v in &basis {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
            }
        }

        #[test]
        fn rows_lie_in_rowspace(m in matrix_strategy()) {
            let space = RowSpace::new(&m);
            for r in 0..m.num_rows() {
                prop_assert!(space.contains(&m.row_vector(r)).unwrap());
            }
            prop_assert_eq!(space.dim(), m.rank());
        }

        #[test]
        fn operations_are_deterministic(m in matrix_strategy()) {
            prop_assert_eq!(m.kernel_basis(), m.clone().kernel_basis());
            prop_assert_eq!(m.rank(), m.clone().rank());
        }
    }
}
