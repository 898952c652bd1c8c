//! Constellations, bit mapping and position matrices.
//!
//! A block of `k_ssk + n_iba * log2(M)` bits becomes one [`SpatialSymbol`]:
//! the leading `k_ssk` bits pick the pattern (natural binary, MSB first, over
//! the canonical order of the set) and the remaining bits are Gray-mapped to
//! `n_iba` constellation points placed on the active antennas in ascending
//! antenna order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GpsmError, Result};
use crate::pattern_space::{Pattern, PatternSet};

/// Unit-energy constellation with Gray labels.
///
/// `points[label]` is the point carrying `label`, so label order and point
/// order coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Bit label of point `label`, MSB first.
    pub fn label_bits(&self, label: usize) -> Vec<bool> {
        uint_to_bits(label as u64, self.bits_per_symbol)
    }

    /// Label of the point nearest to `z`; equidistant points resolve to the
    /// smallest label.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

/// BPSK or Gray-labeled QPSK with unit average energy.
pub fn make_constellation(m: usize) -> Result<Constellation> {
    let points = match m {
        2 => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        4 => {
            // Label b0 b1 -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2); adjacent
            // points differ in one bit.
            let a = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                Complex64::new(a, a),
                Complex64::new(a, -a),
                Complex64::new(-a, a),
                Complex64::new(-a, -a),
            ]
        }
        _ => return Err(GpsmError::UnsupportedModulation(m)),
    };
    Ok(Constellation {
        bits_per_symbol: m.trailing_zeros() as usize,
        points,
    })
}

/// Interprets `bits` as an unsigned integer, MSB first.
pub fn bits_to_uint(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// The `width` low bits of `value`, MSB first.
pub fn uint_to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Identity columns kept for the active antennas of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMatrix {
    n_r: usize,
    selected: Vec<usize>,
}

impl PositionMatrix {
    /// Zero-based antenna index of each column.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Dense `n_r × n_iba` 0/1 matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.n_r, self.selected.len());
        for (col, &row) in self.selected.iter().enumerate() {
            u[(row, col)] = 1.0;
        }
        u
    }

    /// `U b`.
    pub fn apply(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.selected.len() {
            return Err(GpsmError::DimensionMismatch {
                what: "symbol vector",
                expected: self.selected.len(),
                got: b.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_r];
        for (&row, &v) in self.selected.iter().zip(b) {
            out[row] = v;
        }
        Ok(out)
    }
}

pub fn position_matrix(q: &Pattern) -> PositionMatrix {
    PositionMatrix {
        n_r: q.n_r(),
        selected: q.active().to_vec(),
    }
}

/// A pattern choice together with the symbols placed on its active antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSymbol {
    pub pattern_index: usize,
    /// Constellation labels, one per active antenna.
    pub labels: Vec<usize>,
    pub symbols: Vec<Complex64>,
}

/// Bits carried per channel use by one user.
pub fn bits_per_use(set: &PatternSet, c: &Constellation) -> usize {
    set.spatial_bits() as usize + set.n_iba() * c.bits_per_symbol()
}

/// Maps one user's bit block to a pattern index and symbol vector.
pub fn map_bits(bits: &[bool], set: &PatternSet, c: &Constellation) -> Result<SpatialSymbol> {
    let expected = bits_per_use(set, c);
    if bits.len() != expected {
        return Err(GpsmError::DimensionMismatch {
            what: "bit block",
            expected,
            got: bits.len(),
        });
    }
    let k_ssk = set.spatial_bits() as usize;
    let pattern_index = bits_to_uint(&bits[..k_ssk]) as usize;
    let labels: Vec<usize> = bits[k_ssk..]
        .chunks(c.bits_per_symbol())
        .map(|chunk| bits_to_uint(chunk) as usize)
        .collect();
    let symbols = labels.iter().map(|&l| c.point(l)).collect();
    Ok(SpatialSymbol {
        pattern_index,
        labels,
        symbols,
    })
}

/// Inverse of [`map_bits`]. Symbols are read back through their nearest
/// constellation point, so exact points round-trip.
pub fn demap(det: &SpatialSymbol, set: &PatternSet, c: &Constellation) -> Vec<bool> {
    let mut bits = uint_to_bits(det.pattern_index as u64, set.spatial_bits() as usize);
    for &s in &det.symbols {
        bits.extend(c.label_bits(c.nearest(s)));
    }
    bits
}

/// `√e_k · U(q) · b`.
pub fn assemble_user_vector(e_k: f64, q: &Pattern, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if !(e_k > 0.0) {
        return Err(GpsmError::InvalidArgument(format!(
            "symbol energy must be positive, got {e_k}"
        )));
    }
    let amp = e_k.sqrt();
    let mut v = position_matrix(q).apply(b)?;
    v.iter_mut().for_each(|z| *z *= amp);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern_space::{enumerate_patterns, PatternSpaceSpec};
    use proptest::prelude::*;

    #[test]
    fn qpsk_points() {
        let c = make_constellation(4).unwrap();
        assert_eq!(c.order(), 4);
        let mean: Complex64 = c.points().iter().sum::<Complex64>() / 4.0;
        let energy: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 4.0;
        assert!(mean.norm() < 1e-12);
        assert!((energy - 1.0).abs() < 1e-12);
        for p in c.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        // Gray: nearest neighbours (distance sqrt 2) differ in exactly one bit.
        for a in 0..4 {
            for b in 0..4 {
                let d = (c.point(a) - c.point(b)).norm();
                if (d - 2f64.sqrt()).abs() < 1e-9 {
                    assert_eq!((a ^ b).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn bpsk_points() {
        let c = make_constellation(2).unwrap();
        assert_eq!(c.points(), &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert!(matches!(
            make_constellation(8),
            Err(GpsmError::UnsupportedModulation(8))
        ));
    }

    #[test]
    fn position_matrices() {
        let u = position_matrix(&Pattern::from_bits(&[true, true, false, false]).unwrap()).matrix();
        let want = DMatrix::from_row_slice(4, 2, &[1., 0., 0., 1., 0., 0., 0., 0.]);
        assert_eq!(u, want);
        let u = position_matrix(&Pattern::from_bits(&[true; 4]).unwrap()).matrix();
        assert_eq!(u, DMatrix::identity(4, 4));
        let u = position_matrix(&Pattern::from_bits(&[false, true, false, true]).unwrap()).matrix();
        let want = DMatrix::from_row_slice(4, 2, &[0., 0., 1., 0., 0., 0., 0., 1.]);
        assert_eq!(u, want);
    }

    #[test]
    fn selector_columns_are_orthonormal_and_match_diagonal_form() {
        let c = make_constellation(4).unwrap();
        for n_r in 1..=6 {
            for n_iba in 1..=n_r {
                for q in enumerate_patterns(n_r, n_iba).unwrap() {
                    let u = position_matrix(&q);
                    let m = u.matrix();
                    assert_eq!(m.transpose() * &m, DMatrix::identity(n_iba, n_iba));
                    // D(q) s_dot == U b with b the active entries of s_dot.
                    let s_dot: Vec<Complex64> =
                        (0..n_r).map(|i| c.point((i * 7 + n_iba) % 4)).collect();
                    let d_s: Vec<Complex64> = s_dot
                        .iter()
                        .enumerate()
                        .map(|(i, &z)| if q.is_active(i) { z } else { Complex64::new(0.0, 0.0) })
                        .collect();
                    let b: Vec<Complex64> = q.active().iter().map(|&i| s_dot[i]).collect();
                    assert_eq!(u.apply(&b).unwrap(), d_s);
                }
            }
        }
    }

    #[test]
    fn mapping_examples() {
        let spec = PatternSpaceSpec::new(4, 2).unwrap();
        let set = spec.set_at(0).unwrap();
        let c = make_constellation(4).unwrap();
        let s = map_bits(&[false; 6], &set, &c).unwrap();
        assert_eq!(s.pattern_index, 0);
        assert_eq!(s.symbols, vec![c.point(0), c.point(0)]);
        assert_eq!(demap(&s, &set, &c), vec![false; 6]);

        let s = map_bits(&[true, true, false, true, true, false], &set, &c).unwrap();
        assert_eq!(s.pattern_index, 3);
        assert_eq!(s.labels, vec![1, 2]);
        assert_eq!(&demap(&s, &set, &c)[..2], &[true, true]);

        assert!(map_bits(&[false; 5], &set, &c).is_err());
    }

    #[test]
    fn user_vector_assembly() {
        let c = make_constellation(4).unwrap();
        let q = Pattern::from_bits(&[true, true, false, false]).unwrap();
        let b = [c.point(1), c.point(2)];
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(assemble_user_vector(1.0, &q, &b).unwrap(), vec![b[0], b[1], z, z]);
        let v4 = assemble_user_vector(4.0, &q, &b).unwrap();
        assert_eq!(v4, vec![b[0] * 2.0, b[1] * 2.0, z, z]);
        assert!(assemble_user_vector(0.0, &q, &b).is_err());
        assert!(assemble_user_vector(1.0, &q, &b[..1]).is_err());
    }

    fn space() -> impl Strategy<Value = (usize, usize, usize)> {
        (1usize..=5)
            .prop_flat_map(|n_r| (Just(n_r), 1..=n_r))
            .prop_flat_map(|(n_r, n_iba)| {
                let l = PatternSpaceSpec::new(n_r, n_iba).unwrap().l.unwrap() as usize;
                (Just(n_r), Just(n_iba), 0..l)
            })
    }

    proptest! {
        #[test]
        fn map_demap_roundtrip(
            (n_r, n_iba, set_idx) in space(),
            m in prop::sample::select(vec![2usize, 4]),
            raw in prop::collection::vec(any::<bool>(), 64),
        ) {
            let spec = PatternSpaceSpec::new(n_r, n_iba).unwrap();
            let set = spec.set_at(set_idx as u64).unwrap();
            let c = make_constellation(m).unwrap();
            let bits = &raw[..bits_per_use(&set, &c)];
            let sym = map_bits(bits, &set, &c).unwrap();
            prop_assert!(sym.pattern_index < set.len());
            prop_assert_eq!(demap(&sym, &set, &c), bits.to_vec());
        }

        #[test]
        fn assembled_energy(e_k in 0.01f64..100.0, labels in prop::collection::vec(0usize..4, 3)) {
            let c = make_constellation(4).unwrap();
            let q = Pattern::new(5, vec![0, 2, 4]).unwrap();
            let b: Vec<Complex64> = labels.iter().map(|&l| c.point(l)).collect();
            let v = assemble_user_vector(e_k, &q, &b).unwrap();
            let lhs: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let rhs = e_k * b.iter().map(|z| z.norm_sqr()).sum::<f64>();
            prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn exhaustive_roundtrip_small_spaces() {
        // Full bit-string domain for every set of every space with n_r <= 5.
        let c = make_constellation(4).unwrap();
        for n_r in 1..=5 {
            for n_iba in 1..=n_r {
                let spec = PatternSpaceSpec::new(n_r, n_iba).unwrap();
                if n_iba > 3 {
                    // 4^n_iba * 2^k_ssk grows quickly; one set suffices there.
                    let set = spec.set_at(0).unwrap();
                    check_all_blocks(&set, &c);
                    continue;
                }
                for set in spec.candidate_sets(1_000).unwrap() {
                    check_all_blocks(&set, &c);
                }
            }
        }
    }

    fn check_all_blocks(set: &PatternSet, c: &Constellation) {
        let n = bits_per_use(set, c);
        for v in 0..(1u64 << n) {
            let bits = uint_to_bits(v, n);
            let sym = map_bits(&bits, set, c).unwrap();
            assert_eq!(demap(&sym, set, c), bits);
        }
    }
}
