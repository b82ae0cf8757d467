//! Faces of the N-cube and of its antipodal quotient.
//!
//! A p-face is a word over `{0, 1, *}` with exactly p stars. Words are stored
//! as two `u128` masks (bit i is character i, counted from the left), so the
//! cube dimension is limited to 128. The projective cube identifies a face
//! with its antipode (every `0` and `1` swapped, stars kept); each class is
//! represented by the lexicographically smaller word under `0 < 1 < *`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

pub mod symmetry;

pub const MAX_CUBE_DIM: usize = 128;

/// Largest class count [`enumerate_proj_faces`] will materialise.
pub const MAX_ENUMERATION: usize = 1 << 22;

fn full_mask(n: usize) -> u128 {
    if n == 128 {
        !0
    } else {
        (1u128 << n) - 1
    }
}

/// A face of the n-cube.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    n: u8,
    stars: u128,
    /// Zero under every star.
    values: u128,
}

impl Face {
    pub fn new(n: usize, stars: u128, values: u128) -> Result<Self> {
        if n == 0 || n > MAX_CUBE_DIM {
            return Err(Error::InvalidFace(format!("cube dimension {n} not in 1..=128")));
        }
        let mask = full_mask(n);
        if stars & !mask != 0 || values & !mask != 0 {
            return Err(Error::InvalidFace("mask bits beyond dimension".into()));
        }
        Ok(Face {
            n: n as u8,
            stars,
            values: values & !stars,
        })
    }

    pub(crate) fn from_masks(n: usize, stars: u128, values: u128) -> Self {
        debug_assert!(n >= 1 && n <= MAX_CUBE_DIM);
        Face {
            n: n as u8,
            stars,
            values: values & !stars,
        }
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn star_count(&self) -> usize {
        self.stars.count_ones() as usize
    }

    pub fn stars(&self) -> u128 {
        self.stars
    }

    pub fn values(&self) -> u128 {
        self.values
    }

    /// Character at position `i`: 0, 1, or 2 for `*`.
    pub fn symbol(&self, i: usize) -> u8 {
        if (self.stars >> i) & 1 == 1 {
            2
        } else {
            ((self.values >> i) & 1) as u8
        }
    }

    pub fn antipode(&self) -> Face {
        Face {
            n: self.n,
            stars: self.stars,
            values: !self.values & !self.stars & full_mask(self.dim()),
        }
    }

    /// Faces of one dimension lower obtained by fixing one star to 0 or 1,
    /// ordered by star position then value.
    pub fn lower_shadow(&self) -> Result<Vec<Face>> {
        if self.stars == 0 {
            return Err(Error::InvalidFace(format!("{self} has no star to fix")));
        }
        let mut out = Vec::with_capacity(2 * self.star_count());
        let mut rest = self.stars;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            out.push(Face::from_masks(self.dim(), self.stars ^ bit, self.values));
            out.push(Face::from_masks(self.dim(), self.stars ^ bit, self.values | bit));
        }
        Ok(out)
    }

    /// Faces of one dimension higher obtained by turning one fixed position
    /// into a star, ordered by position.
    pub fn upper_shadow(&self) -> Result<Vec<Face>> {
        let free = !self.stars & full_mask(self.dim());
        if free == 0 {
            return Err(Error::InvalidFace(format!("{self} is the full cube")));
        }
        let mut out = Vec::with_capacity(free.count_ones() as usize);
        let mut rest = free;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            out.push(Face::from_masks(self.dim(), self.stars | bit, self.values));
        }
        Ok(out)
    }

    /// True iff `self` is a sub-face of `other`.
    pub fn is_contained_in(&self, other: &Face) -> bool {
        self.n == other.n
            && self.stars & !other.stars == 0
            && (self.values ^ other.values) & !other.stars == 0
    }

    fn canonical(&self) -> Face {
        let fixed = !self.stars & full_mask(self.dim());
        if fixed == 0 {
            return *self;
        }
        let first = fixed & fixed.wrapping_neg();
        if self.values & first != 0 {
            self.antipode()
        } else {
            *self
        }
    }
}

impl Ord for Face {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            let diff = (self.stars ^ other.stars) | (self.values ^ other.values);
            if diff == 0 {
                return Ordering::Equal;
            }
            let i = diff.trailing_zeros() as usize;
            self.symbol(i).cmp(&other.symbol(i))
        })
    }
}

impl PartialOrd for Face {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.dim())
            .map(|i| match self.symbol(i) {
                0 => '0',
                1 => '1',
                _ => '*',
            })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Face({self})")
    }
}

impl FromStr for Face {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > MAX_CUBE_DIM {
            return Err(Error::InvalidFace(format!("{s:?}: length must be 1..=128")));
        }
        let (mut stars, mut values) = (0u128, 0u128);
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => values |= 1 << i,
                '*' => stars |= 1 << i,
                _ => return Err(Error::InvalidFace(format!("{s:?}: bad symbol {c:?}"))),
            }
        }
        Face::new(n, stars, values)
    }
}

/// An antipodal class of faces, identified by its canonical representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjFace {
    rep: Face,
}

impl ProjFace {
    pub fn of(face: Face) -> Self {
        ProjFace {
            rep: face.canonical(),
        }
    }

    pub fn rep(&self) -> Face {
        self.rep
    }

    pub fn star_count(&self) -> usize {
        self.rep.star_count()
    }

    /// Both members of the class (one when the face is self-antipodal).
    pub fn members(&self) -> impl Iterator<Item = Face> {
        let a = self.rep;
        let b = a.antipode();
        std::iter::once(a).chain((b != a).then_some(b))
    }
}

impl fmt::Display for ProjFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

impl fmt::Debug for ProjFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjFace({})", self.rep)
    }
}

impl FromStr for ProjFace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(ProjFace::of(s.parse()?))
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of antipodal classes of p-faces of the n-cube.
pub fn proj_face_count(n: usize, p: usize) -> u128 {
    if p == n {
        1
    } else {
        binomial(n, p) << (n - p - 1)
    }
}

/// Every antipodal class of p-faces, sorted by representative word.
pub fn enumerate_proj_faces(n: usize, p: usize) -> Result<Vec<ProjFace>> {
    if n == 0 || n > MAX_CUBE_DIM || p > n {
        return Err(Error::DimensionOutOfRange { p, n });
    }
    let count = proj_face_count(n, p);
    if count > MAX_ENUMERATION as u128 {
        return Err(Error::TooLarge {
            what: "projective face count",
            value: usize::try_from(count).unwrap_or(usize::MAX),
            limit: MAX_ENUMERATION,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    for stars in StarMasks::new(n, p) {
        let fixed: Vec<u32> = (0..n as u32).filter(|&i| (stars >> i) & 1 == 0).collect();
        if fixed.is_empty() {
            out.push(ProjFace::of(Face::from_masks(n, stars, 0)));
            continue;
        }
        // Canonical representatives carry 0 at the first fixed position.
        let free_bits = fixed.len() - 1;
        for assignment in 0u128..(1u128 << free_bits) {
            let mut values = 0u128;
            for (j, &pos) in fixed[1..].iter().enumerate() {
                if (assignment >> j) & 1 == 1 {
                    values |= 1 << pos;
                }
            }
            out.push(ProjFace {
                rep: Face::from_masks(n, stars, values),
            });
        }
    }
    out.sort_unstable();
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

/// All `n`-bit masks with exactly `k` ones, in increasing numeric order.
struct StarMasks {
    next: Option<u128>,
    limit: u128,
}

impl StarMasks {
    fn new(n: usize, k: usize) -> Self {
        let first = if k == 0 { 0 } else { full_mask(k) };
        StarMasks {
            next: Some(first),
            limit: full_mask(n),
        }
    }
}

impl Iterator for StarMasks {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        let cur = self.next?;
        // Gosper's hack.
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.checked_add(c);
            match r {
                Some(r) if r != 0 => {
                    let nxt = (((r ^ cur) >> 2) / c) | r;
                    (nxt & !self.limit == 0).then_some(nxt)
                }
                _ => None,
            }
        };
        Some(cur)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Antipodal classes of the shadows of every face in every class of `set`,
/// deduplicated and sorted.
pub fn proj_shadow_of_set(set: &[ProjFace], direction: Direction) -> Result<Vec<ProjFace>> {
    let Some(first) = set.first() else {
        return Ok(Vec::new());
    };
    let p = first.star_count();
    if set.iter().any(|f| f.star_count() != p || f.rep.n != first.rep.n) {
        return Err(Error::MixedDimensions);
    }
    let mut out = BTreeSet::new();
    for class in set {
        // The antipode's shadow is the antipode of the shadow, so the
        // representative alone covers the class.
        let faces = match direction {
            Direction::Up => class.rep.upper_shadow()?,
            Direction::Down => class.rep.lower_shadow()?,
        };
        out.extend(faces.into_iter().map(ProjFace::of));
    }
    Ok(out.into_iter().collect())
}

/// `|shadow(A)| / |A|` as an exact fraction.
pub fn expansion_ratio(set: &[ProjFace], direction: Direction) -> Result<Ratio<u64>> {
    let distinct: BTreeSet<ProjFace> = set.iter().copied().collect();
    if distinct.is_empty() {
        return Err(Error::EmptySet);
    }
    let distinct: Vec<ProjFace> = distinct.into_iter().collect();
    let shadow = proj_shadow_of_set(&distinct, direction)?;
    Ok(Ratio::new(shadow.len() as u64, distinct.len() as u64))
}

/// Dense ids for the classes of one face dimension.
#[derive(Clone, Debug)]
pub struct FaceLevel {
    p: usize,
    faces: Vec<ProjFace>,
    ids: HashMap<ProjFace, usize>,
}

impl FaceLevel {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        let faces = enumerate_proj_faces(n, p)?;
        let ids = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        Ok(FaceLevel { p, faces, ids })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face(&self, id: usize) -> ProjFace {
        self.faces[id]
    }

    pub fn faces(&self) -> &[ProjFace] {
        &self.faces
    }

    pub fn id(&self, face: &ProjFace) -> Option<usize> {
        self.ids.get(face).copied()
    }
}

/// Numbering of the classes of dimensions p-1 (X-checks), p (qubits) and
/// p+1 (Z-checks).
#[derive(Clone, Debug)]
pub struct FaceIndex {
    n: usize,
    pub lower: FaceLevel,
    pub middle: FaceLevel,
    pub upper: FaceLevel,
}

impl FaceIndex {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p >= n {
            return Err(Error::DimensionOutOfRange { p, n });
        }
        Ok(FaceIndex {
            n,
            lower: FaceLevel::new(n, p - 1)?,
            middle: FaceLevel::new(n, p)?,
            upper: FaceLevel::new(n, p + 1)?,
        })
    }

    pub fn cube_dim(&self) -> usize {
        self.n
    }
}

/// Newline-separated face words.
pub fn faces_to_text<'a>(faces: impl IntoIterator<Item = &'a ProjFace>) -> String {
    let mut s = String::new();
    for f in faces {
        s.push_str(&f.to_string());
        s.push('\n');
    }
    s
}

pub fn faces_from_text(text: &str) -> Result<Vec<ProjFace>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.trim().parse().map_err(|e: Error| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(s: &str) -> Face {
        s.parse().unwrap()
    }

    fn words(faces: &[Face]) -> BTreeSet<String> {
        faces.iter().map(Face::to_string).collect()
    }

    fn set(ws: &[&str]) -> BTreeSet<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn random_face(rng: &mut impl Rng, n: usize) -> Face {
        let mut stars = 0u128;
        let mut values = 0u128;
        for i in 0..n {
            match rng.gen_range(0..3) {
                0 => {}
                1 => values |= 1 << i,
                _ => stars |= 1 << i,
            }
        }
        Face::new(n, stars, values).unwrap()
    }

    #[test]
    fn parse_display_roundtrip() {
        for w in ["0*1*", "1", "*", "0101**10"] {
            assert_eq!(f(w).to_string(), w);
        }
        assert!("0a1".parse::<Face>().is_err());
        assert!("".parse::<Face>().is_err());
        assert_eq!(f("0*1*").star_count(), 2);
    }

    #[test]
    fn antipode_examples_and_involution() {
        assert_eq!(f("0*1").antipode(), f("1*0"));
        assert_eq!(f("***").antipode(), f("***"));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=128);
            let face = random_face(&mut rng, n);
            assert_eq!(face.antipode().antipode(), face);
            assert_eq!(face.antipode().star_count(), face.star_count());
        }
    }

    #[test]
    fn lower_shadow_examples() {
        assert_eq!(words(&f("*0").lower_shadow().unwrap()), set(&["00", "10"]));
        assert_eq!(
            words(&f("**").lower_shadow().unwrap()),
            set(&["0*", "1*", "*0", "*1"])
        );
        assert!(f("01").lower_shadow().is_err());
        for face in enumerate_proj_faces(6, 3).unwrap() {
            assert_eq!(face.rep().lower_shadow().unwrap().len(), 6);
        }
    }

    #[test]
    fn upper_shadow_examples() {
        assert_eq!(words(&f("00").upper_shadow().unwrap()), set(&["*0", "0*"]));
        assert_eq!(words(&f("0*1").upper_shadow().unwrap()), set(&["**1", "0**"]));
        assert!(f("**").upper_shadow().is_err());
        for n in [4, 6, 8] {
            for g in enumerate_proj_faces(n, n / 2 - 1).unwrap() {
                assert_eq!(g.rep().upper_shadow().unwrap().len(), n / 2 + 1);
            }
        }
    }

    #[test]
    fn shadows_are_incidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let face = random_face(&mut rng, 9);
            if face.star_count() > 0 {
                for g in face.lower_shadow().unwrap() {
                    assert!(g.is_contained_in(&face));
                    assert_eq!(g.star_count() + 1, face.star_count());
                }
            }
            if face.star_count() < 9 {
                for h in face.upper_shadow().unwrap() {
                    assert!(face.is_contained_in(&h));
                }
            }
        }
    }

    #[test]
    fn canonical_rep_is_lexicographic_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..12);
            let face = random_face(&mut rng, n);
            let class = ProjFace::of(face);
            let key = |w: String| w.replace('*', "2");
            let by_string = key(face.to_string()).min(key(face.antipode().to_string()));
            assert_eq!(key(class.rep().to_string()), by_string);
            assert!(class.rep() <= class.rep().antipode());
            assert_eq!(ProjFace::of(face.antipode()), class);
        }
    }

    #[test]
    fn enumeration_examples() {
        let sq = enumerate_proj_faces(2, 1).unwrap();
        let ws: Vec<String> = sq.iter().map(ToString::to_string).collect();
        assert_eq!(ws, vec!["0*", "*0"]);
        assert_eq!(enumerate_proj_faces(4, 2).unwrap().len(), 12);
        let top = enumerate_proj_faces(2, 2).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].to_string(), "**");
        assert!(enumerate_proj_faces(3, 4).is_err());
    }

    #[test]
    fn enumeration_counts_match_closed_form() {
        for n in 1..=10 {
            for p in 0..=n {
                let faces = enumerate_proj_faces(n, p).unwrap();
                assert_eq!(faces.len() as u128, proj_face_count(n, p), "n={n} p={p}");
                if p < n {
                    assert_eq!(faces.len() as u128 * 2, binomial(n, p) << (n - p));
                }
                assert!(faces.windows(2).all(|w| w[0] < w[1]), "sorted, no repeats");
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force_quotient() {
        // Independent route: list every word over {0,1,*}, canonicalise by
        // string comparison, deduplicate.
        for n in 1..=6 {
            for p in 0..=n {
                let mut expected = BTreeSet::new();
                for code in 0..3usize.pow(n as u32) {
                    let mut c = code;
                    let word: String = (0..n)
                        .map(|_| {
                            let ch = ['0', '1', '*'][c % 3];
                            c /= 3;
                            ch
                        })
                        .collect();
                    if word.chars().filter(|&ch| ch == '*').count() != p {
                        continue;
                    }
                    let anti: String = word
                        .chars()
                        .map(|ch| match ch {
                            '0' => '1',
                            '1' => '0',
                            c => c,
                        })
                        .collect();
                    // '2' stands in for '*' so byte order is 0 < 1 < *.
                    expected.insert(word.replace('*', "2").min(anti.replace('*', "2")));
                }
                let got: Vec<String> = enumerate_proj_faces(n, p)
                    .unwrap()
                    .iter()
                    .map(|f| f.to_string().replace('*', "2"))
                    .collect();
                let expected: Vec<String> = expected.into_iter().collect();
                assert_eq!(got, expected, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn chain_condition_on_cube_faces() {
        // |lower(h) ∩ upper(g)| is even for every (p+1)-face h and (p-1)-face g.
        let n = 5;
        let all = |p: usize| -> Vec<Face> {
            let mut v = Vec::new();
            for stars in StarMasks::new(n, p) {
                for values in 0u128..(1 << n) {
                    if values & stars == 0 {
                        v.push(Face::from_masks(n, stars, values));
                    }
                }
            }
            v
        };
        for p in 1..n {
            for h in all(p + 1) {
                let down: BTreeSet<Face> = h.lower_shadow().unwrap().into_iter().collect();
                for g in all(p - 1) {
                    let common = g
                        .upper_shadow()
                        .unwrap()
                        .into_iter()
                        .filter(|x| down.contains(x))
                        .count();
                    assert_eq!(common % 2, 0);
                }
            }
        }
    }

    #[test]
    fn proj_shadow_examples() {
        assert!(proj_shadow_of_set(&[], Direction::Up).unwrap().is_empty());
        let g = enumerate_proj_faces(4, 1).unwrap()[5];
        assert_eq!(proj_shadow_of_set(&[g], Direction::Up).unwrap().len(), 3);
        let h = enumerate_proj_faces(6, 4).unwrap()[17];
        assert_eq!(proj_shadow_of_set(&[h], Direction::Down).unwrap().len(), 8);
        let mixed = [g, enumerate_proj_faces(4, 2).unwrap()[0]];
        assert!(matches!(
            proj_shadow_of_set(&mixed, Direction::Up),
            Err(Error::MixedDimensions)
        ));
    }

    #[test]
    fn expansion_ratio_examples() {
        let n = 64;
        let g = ProjFace::of(Face::from_masks(n, full_mask(31), 0));
        assert_eq!(expansion_ratio(&[g], Direction::Up).unwrap(), Ratio::from_integer(33));
        assert!(matches!(expansion_ratio(&[], Direction::Up), Err(Error::EmptySet)));

        // The class is the same whichever member is listed.
        let a = ProjFace::of("0*1*10".parse().unwrap());
        let b = ProjFace::of("1*0*01".parse().unwrap());
        let c = ProjFace::of("**0011".parse().unwrap());
        assert_eq!(
            expansion_ratio(&[a, c], Direction::Down).unwrap(),
            expansion_ratio(&[a, b, c], Direction::Down).unwrap()
        );
    }

    #[test]
    fn two_element_down_sets_at_n64_meet_proof_bound() {
        // Random pairs of (p+1)-classes at N = 64; the exhaustive orbit sweep
        // lives in the acceptance suite.
        let n = 64;
        let bound = Ratio::new(2 * (n as u64 / 2 + 1) * 15, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let pair: Vec<ProjFace> = (0..2)
                .map(|_| ProjFace::of(symmetry::random_face(&mut rng, n, 33)))
                .collect();
            if pair[0] == pair[1] {
                continue;
            }
            assert!(expansion_ratio(&pair, Direction::Down).unwrap() >= bound);
        }
    }

    #[test]
    fn face_text_roundtrip() {
        let faces = enumerate_proj_faces(4, 2).unwrap();
        let text = faces_to_text(&faces);
        assert_eq!(faces_from_text(&text).unwrap(), faces);
        assert!(faces_from_text("0*\n1x\n").is_err());
    }

    #[test]
    fn face_index_is_a_bijection() {
        let idx = FaceIndex::new(6, 3).unwrap();
        for level in [&idx.lower, &idx.middle, &idx.upper] {
            for (i, face) in level.faces().iter().enumerate() {
                assert_eq!(level.id(face), Some(i));
            }
        }
        assert!(FaceIndex::new(4, 4).is_err());
    }
}
