//! The (N, N/2) projective CSS code and Pauli errors on it.
//!
//! Qubits are antipodal classes of p-faces with p = N/2. The X-check for a
//! (p-1)-class acts on the classes of its upper shadow; the Z-check for a
//! (p+1)-class acts on the classes of its lower shadow. Rows are boundary
//! maps over GF(2), so a class hit twice cancels. This only happens for the
//! self-antipodal top face at N = 2, whose Z-row vanishes.

use crate::cube::{FaceIndex, ProjFace};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, RowSpace};

/// Largest cube dimension [`build_projective_code`] accepts.
pub const MAX_BUILD_DIM: usize = 12;

/// Largest qubit count for exhaustive distance search.
pub const MAX_BRUTE_FORCE_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

/// A Pauli error up to phase: X-part and Z-part over n qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliError {
    pub x: BitVector,
    pub z: BitVector,
}

impl PauliError {
    pub fn identity(n: usize) -> Self {
        PauliError {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn new(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(PauliError { x, z })
    }

    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        let mut e = PauliError::identity(n);
        if qubit >= n {
            return Err(Error::IndexOutOfRange { index: qubit, len: n });
        }
        e.apply(qubit, pauli);
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Multiplies a single-qubit Pauli onto qubit `q`.
    #[inline]
    pub fn apply(&mut self, q: usize, pauli: Pauli) {
        if pauli.has_x() {
            self.x.flip(q);
        }
        if pauli.has_z() {
            self.z.flip(q);
        }
    }

    pub fn pauli_at(&self, q: usize) -> Option<Pauli> {
        match (self.x.bit(q), self.z.bit(q)) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    pub fn support(&self) -> BitVector {
        self.x.or(&self.z).expect("parts have equal length")
    }

    pub fn weight(&self) -> usize {
        self.support().weight()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn compose(&self, other: &PauliError) -> Result<PauliError> {
        Ok(PauliError {
            x: self.x.xor(&other.x)?,
            z: self.z.xor(&other.z)?,
        })
    }
}

/// One character per qubit from `IXYZ`.
impl std::fmt::Display for PauliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for q in 0..self.len() {
            f.write_str(match self.pauli_at(q) {
                None => "I",
                Some(Pauli::X) => "X",
                Some(Pauli::Y) => "Y",
                Some(Pauli::Z) => "Z",
            })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliError {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut e = PauliError::identity(s.len());
        for (q, c) in s.chars().enumerate() {
            match c {
                'I' => {}
                'X' => e.apply(q, Pauli::X),
                'Y' => e.apply(q, Pauli::Y),
                'Z' => e.apply(q, Pauli::Z),
                _ => return Err(Error::param(format!("invalid Pauli character {c:?}"))),
            }
        }
        Ok(e)
    }
}

/// Check outcomes: `x` holds X-check results (triggered by Z-errors), `z`
/// holds Z-check results (triggered by X-errors).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub x: BitVector,
    pub z: BitVector,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn weight(&self) -> usize {
        self.x.weight() + self.z.weight()
    }
}

/// A CSS code given by orthogonal check matrices.
#[derive(Clone, Debug)]
pub struct CssCode {
    h_x: BitMatrix,
    h_z: BitMatrix,
    /// Per qubit, the X-checks (resp. Z-checks) acting on it.
    x_cols: BitMatrix,
    z_cols: BitMatrix,
    geometry: Option<Geometry>,
}

#[derive(Clone, Debug)]
struct Geometry {
    cube_dim: usize,
    p: usize,
    faces: FaceIndex,
}

impl CssCode {
    /// Wraps a pair of check matrices after checking they commute.
    pub fn new(h_x: BitMatrix, h_z: BitMatrix) -> Result<Self> {
        if h_x.num_cols() != h_z.num_cols() {
            return Err(Error::LengthMismatch {
                expected: h_x.num_cols(),
                found: h_z.num_cols(),
            });
        }
        if !h_x.mul_transpose(&h_z)?.is_zero() {
            return Err(Error::param("X- and Z-checks do not commute"));
        }
        Ok(Self::assemble(h_x, h_z, None))
    }

    fn assemble(h_x: BitMatrix, h_z: BitMatrix, geometry: Option<Geometry>) -> Self {
        let x_cols = h_x.transpose();
        let z_cols = h_z.transpose();
        CssCode {
            h_x,
            h_z,
            x_cols,
            z_cols,
            geometry,
        }
    }

    pub fn n(&self) -> usize {
        self.h_x.num_cols()
    }

    pub fn h_x(&self) -> &BitMatrix {
        &self.h_x
    }

    pub fn h_z(&self) -> &BitMatrix {
        &self.h_z
    }

    pub fn num_x_checks(&self) -> usize {
        self.h_x.num_rows()
    }

    pub fn num_z_checks(&self) -> usize {
        self.h_z.num_rows()
    }

    pub fn num_checks(&self) -> usize {
        self.num_x_checks() + self.num_z_checks()
    }

    /// X-checks acting on qubit `q`.
    pub fn x_checks_of(&self, q: usize) -> &[usize] {
        self.x_cols.row(q)
    }

    /// Z-checks acting on qubit `q`.
    pub fn z_checks_of(&self, q: usize) -> &[usize] {
        self.z_cols.row(q)
    }

    pub fn cube_dim(&self) -> Option<usize> {
        self.geometry.as_ref().map(|g| g.cube_dim)
    }

    pub fn face_dim(&self) -> Option<usize> {
        self.geometry.as_ref().map(|g| g.p)
    }

    pub fn face_index(&self) -> Option<&FaceIndex> {
        self.geometry.as_ref().map(|g| &g.faces)
    }

    /// The face class carried by qubit `q`, for geometric codes.
    pub fn qubit_face(&self, q: usize) -> Option<ProjFace> {
        self.face_index().map(|f| f.middle.face(q))
    }

    pub fn syndrome(&self, e: &PauliError) -> Result<Syndrome> {
        Ok(Syndrome {
            x: self.h_x.mul_vec(&e.z)?,
            z: self.h_z.mul_vec(&e.x)?,
        })
    }

    /// Number of encoded qubits, `n - rank(H_X) - rank(H_Z)`.
    pub fn logical_qubits(&self) -> usize {
        self.n() - self.h_x.rank() - self.h_z.rank()
    }

    /// Greedy weight reduction modulo the stabilizer group: applies any single
    /// generator (a row of `h_x` to the X part, of `h_z` to the Z part) that
    /// lowers the Pauli weight, until none does. The result is a local
    /// minimum, not always the lightest element of the coset.
    pub fn reduce_by_stabilizers(&self, e: &PauliError) -> Result<PauliError> {
        if e.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: e.len(),
            });
        }
        let mut r = e.clone();
        loop {
            let mut improved = false;
            for (h, x_part) in [(&self.h_x, true), (&self.h_z, false)] {
                for row in h.rows() {
                    let delta: isize = row
                        .iter()
                        .map(|&q| {
                            let (x, z) = (r.x.bit(q), r.z.bit(q));
                            let other = if x_part { z } else { x };
                            let mine = if x_part { x } else { z };
                            isize::from(!mine || other) - isize::from(mine || other)
                        })
                        .sum();
                    if delta < 0 {
                        for &q in row {
                            if x_part {
                                r.x.flip(q);
                            } else {
                                r.z.flip(q);
                            }
                        }
                        improved = true;
                    }
                }
            }
            if !improved {
                return Ok(r);
            }
        }
    }

    /// Exact distances by enumerating all 2^n vectors.
    pub fn estimate_distance_bruteforce(&self) -> Result<DistanceReport> {
        let n = self.n();
        if n > MAX_BRUTE_FORCE_QUBITS {
            return Err(Error::TooLarge {
                what: "qubits for exhaustive distance",
                value: n,
                limit: MAX_BRUTE_FORCE_QUBITS,
            });
        }
        let k = self.logical_qubits();
        let d_z = min_logical_weight(&self.h_x, &self.h_z);
        let d_x = min_logical_weight(&self.h_z, &self.h_x);
        Ok(DistanceReport { k, d_x, d_z })
    }
}

/// Minimum weight of a vector in `ker(checks)` outside `rowspace(stabilizers)`.
fn min_logical_weight(checks: &BitMatrix, stabilizers: &BitMatrix) -> Option<usize> {
    let n = checks.num_cols();
    let cols = checks.transpose();
    let columns: Vec<BitVector> = (0..n).map(|q| cols.row_vector(q)).collect();
    let stab = RowSpace::new(stabilizers);
    let mut v = BitVector::zeros(n);
    let mut syn = BitVector::zeros(checks.num_rows());
    let mut weight = 0usize;
    let mut best: Option<usize> = None;
    for i in 1u64..(1u64 << n) {
        let q = i.trailing_zeros() as usize;
        v.flip(q);
        weight = if v.bit(q) { weight + 1 } else { weight - 1 };
        syn.xor_assign(&columns[q]).expect("column length");
        if syn.is_zero()
            && best.map_or(true, |b| weight < b)
            && !stab.contains(&v).expect("length")
        {
            best = Some(weight);
        }
    }
    best
}

/// Code dimension and distances; a distance is `None` when `k = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistanceReport {
    pub k: usize,
    /// Minimum weight of an X-type logical operator.
    pub d_x: Option<usize>,
    /// Minimum weight of a Z-type logical operator.
    pub d_z: Option<usize>,
}

impl DistanceReport {
    pub fn distance(&self) -> Option<usize> {
        match (self.d_x, self.d_z) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Builds the (N, N/2) projective code.
pub fn build_projective_code(cube_dim: usize) -> Result<CssCode> {
    if cube_dim < 2 || cube_dim % 2 != 0 {
        return Err(Error::OddDimension(cube_dim));
    }
    if cube_dim > MAX_BUILD_DIM {
        return Err(Error::TooLarge {
            what: "cube dimension",
            value: cube_dim,
            limit: MAX_BUILD_DIM,
        });
    }
    let p = cube_dim / 2;
    let faces = FaceIndex::new(cube_dim, p)?;
    let qubits = &faces.middle;
    let boundary_row = |shadow: Vec<crate::cube::Face>| -> Vec<usize> {
        let mut ids: Vec<usize> = shadow
            .into_iter()
            .map(|f| qubits.id(&ProjFace::of(f)).expect("shadow class is a qubit"))
            .collect();
        ids.sort_unstable();
        // Coefficients are mod 2.
        let mut row = Vec::with_capacity(ids.len());
        for id in ids {
            if row.last() == Some(&id) {
                row.pop();
            } else {
                row.push(id);
            }
        }
        row
    };
    let x_rows = faces
        .lower
        .faces()
        .iter()
        .map(|g| boundary_row(g.rep().upper_shadow().expect("p-1 < N")))
        .collect();
    let z_rows = faces
        .upper
        .faces()
        .iter()
        .map(|h| boundary_row(h.rep().lower_shadow().expect("p+1 > 0")))
        .collect();
    let n = qubits.len();
    let h_x = BitMatrix::from_rows(n, x_rows)?;
    let h_z = BitMatrix::from_rows(n, z_rows)?;
    Ok(CssCode::assemble(
        h_x,
        h_z,
        Some(Geometry {
            cube_dim,
            p,
            faces,
        }),
    ))
}
