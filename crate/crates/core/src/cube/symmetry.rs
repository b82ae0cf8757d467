//! Face-set generators for expansion checks at large cube dimension.
//!
//! Shadow sizes are invariant under the hyperoctahedral group (coordinate
//! permutations and per-coordinate reflections), which commutes with the
//! antipodal map. Ordered pairs of d-faces fall into orbits indexed by two
//! counts once the first face is normalised to `*^d 0^(N-d)`:
//! `shared` star positions and `opposed` fixed positions where the second face
//! carries a 1. One representative per orbit covers every pair.

use rand::Rng;

use super::{full_mask, Face, ProjFace};

/// One representative `(f1, f2)` per orbit of ordered pairs of distinct
/// d-faces lying in distinct antipodal classes.
pub fn pair_orbit_representatives(n: usize, d: usize) -> Vec<(Face, Face)> {
    assert!(d <= n && n <= super::MAX_CUBE_DIM);
    let mut out = Vec::new();
    let lo = (2 * d).saturating_sub(n);
    for shared in lo..=d {
        let only_first = d - shared;
        let only_second = d - shared;
        let fixed_both = n - shared - only_first - only_second;
        for opposed in 0..=fixed_both {
            // Layout: [shared stars][stars of f1 only][stars of f2 only][fixed].
            let f1_stars = full_mask(shared + only_first);
            let f2_stars = full_mask(shared) | full_mask(only_second).checked_shl((shared + only_first) as u32).unwrap_or(0);
            let fixed_start = shared + only_first + only_second;
            let f2_values = full_mask(opposed).checked_shl(fixed_start as u32).unwrap_or(0);
            let f1 = Face::from_masks(n, f1_stars, 0);
            let f2 = Face::from_masks(n, f2_stars, f2_values);
            if ProjFace::of(f1) == ProjFace::of(f2) {
                continue;
            }
            out.push((f1, f2));
        }
    }
    out
}

/// A uniformly random face of dimension `d` in the n-cube.
pub fn random_face<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Face {
    let positions = rand::seq::index::sample(rng, n, d);
    let mut stars = 0u128;
    for i in positions.iter() {
        stars |= 1 << i;
    }
    let values = (rng.gen::<u128>()) & full_mask(n) & !stars;
    Face::from_masks(n, stars, values)
}

/// `size` distinct classes of d-faces, each either uniform or a near neighbour
/// of an earlier member (sharing a face one dimension up or down), so that
/// overlapping shadows occur often.
pub fn random_clustered_set<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    size: usize,
    locality: f64,
) -> Vec<ProjFace> {
    let mut out: Vec<ProjFace> = Vec::with_capacity(size);
    let mut guard = 0;
    while out.len() < size && guard < 100 * size + 100 {
        guard += 1;
        let candidate = if out.is_empty() || !rng.gen_bool(locality) {
            random_face(rng, n, d)
        } else {
            let base = out[rng.gen_range(0..out.len())].rep();
            neighbour(rng, base)
        };
        let class = ProjFace::of(candidate);
        if !out.contains(&class) {
            out.push(class);
        }
    }
    out
}

fn neighbour<R: Rng + ?Sized>(rng: &mut R, face: Face) -> Face {
    let n = face.dim();
    let d = face.star_count();
    let go_up_first = d == 0 || (d < n && rng.gen_bool(0.5));
    if go_up_first {
        let ups = face.upper_shadow().expect("d < n");
        let h = ups[rng.gen_range(0..ups.len())];
        let downs = h.lower_shadow().expect("h has a star");
        downs[rng.gen_range(0..downs.len())]
    } else {
        let downs = face.lower_shadow().expect("d > 0");
        let g = downs[rng.gen_range(0..downs.len())];
        let ups = g.upper_shadow().expect("g is not the full cube");
        ups[rng.gen_range(0..ups.len())]
    }
}
