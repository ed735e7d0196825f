//! The Desarguesian projective plane PG(2,q) as an explicit incidence structure.
//!
//! Homogeneous coordinate triples are normalized so the first nonzero coordinate
//! (scanning left to right) equals 1, and both points and lines are indexed in
//! ascending order of their encoded triples. The first coordinate is the
//! homogenizing one: the affine point (a,b) sits at (1:a:b), the line at infinity
//! is [1:0:0], the direction of slope d is (0:1:d) and the vertical direction is
//! (0:0:1).

use crate::gf::{Fe, FieldCtx};
use std::cmp::Ordering;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlaneError {
    #[error("coincident points span no line")]
    CoincidentPoints,
    #[error("coincident lines have no unique meet")]
    CoincidentLines,
    #[error("point is not affine")]
    NotAffine,
}

/// Slope of an affine line: an element of GF(q) or the vertical slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slope {
    Finite(Fe),
    Vertical,
}

/// A point read through the standard affine chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartPoint {
    Affine(Fe, Fe),
    /// On the line at infinity: the direction of slope d.
    Dir(Fe),
    /// The direction of vertical lines.
    DirInf,
}

/// Fixed-length bitset over point indices. Ordering is set-lexicographic:
/// at the lowest differing index, the set containing it compares Less.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn test(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn and_count(&self, other: &Bitset) -> u32 {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn from_indices(len: usize, idx: &[u32]) -> Self {
        let mut b = Bitset::new(len);
        for &i in idx {
            b.set(i as usize);
        }
        b
    }
}

impl PartialOrd for Bitset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bitset {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let low = diff.trailing_zeros();
                // The set containing the lowest differing index sorts first.
                return if a >> low & 1 == 1 { Ordering::Less } else { Ordering::Greater };
            }
        }
        Ordering::Equal
    }
}

/// PG(2,q) with dense incidence caches.
pub struct Plane {
    field: FieldCtx,
    q: u32,
    points: Vec<[Fe; 3]>,
    lines: Vec<[Fe; 3]>,
    point_idx: HashMap<[u32; 3], u32>,
    line_idx: HashMap<[u32; 3], u32>,
    line_points: Vec<Vec<u32>>,
    point_lines: Vec<Vec<u32>>,
    line_bits: Vec<Bitset>,
}

impl Plane {
    pub fn new(field: FieldCtx) -> Plane {
        let q = field.order();
        let n = (q * q + q + 1) as usize;

        let mut points = Vec::with_capacity(n);
        points.push([Fe(0), Fe(0), Fe(1)]);
        for d in field.elements() {
            points.push([Fe(0), Fe(1), d]);
        }
        for a in field.elements() {
            for b in field.elements() {
                points.push([Fe(1), a, b]);
            }
        }
        points.sort_by_key(|c| [c[0].0, c[1].0, c[2].0]);
        assert_eq!(points.len(), n);
        let lines = points.clone();

        let point_idx: HashMap<[u32; 3], u32> = points
            .iter()
            .enumerate()
            .map(|(i, c)| ([c[0].0, c[1].0, c[2].0], i as u32))
            .collect();
        let line_idx = point_idx.clone();

        let mut line_points: Vec<Vec<u32>> = vec![Vec::with_capacity(q as usize + 1); n];
        let mut point_lines: Vec<Vec<u32>> = vec![Vec::with_capacity(q as usize + 1); n];
        let mut line_bits: Vec<Bitset> = vec![Bitset::new(n); n];
        for (li, l) in lines.iter().enumerate() {
            for (pi, p) in points.iter().enumerate() {
                let dot = field.add(
                    field.add(field.mul(l[0], p[0]), field.mul(l[1], p[1])),
                    field.mul(l[2], p[2]),
                );
                if dot == Fe(0) {
                    line_points[li].push(pi as u32);
                    point_lines[pi].push(li as u32);
                    line_bits[li].set(pi);
                }
            }
        }

        let plane = Plane {
            field,
            q,
            points,
            lines,
            point_idx,
            line_idx,
            line_points,
            point_lines,
            line_bits,
        };
        plane.verify();
        plane
    }

    /// Structural axioms: counts, degrees, and unique joins/meets
    /// (exhaustive through q = 9, deterministically sampled above).
    fn verify(&self) {
        let n = self.num_points();
        assert_eq!(self.num_lines(), n);
        for i in 0..n {
            assert_eq!(self.line_points[i].len() as u32, self.q + 1);
            assert_eq!(self.point_lines[i].len() as u32, self.q + 1);
        }
        let check_pair = |a: usize, b: usize| {
            let common = self.point_lines[a]
                .iter()
                .filter(|&&l| self.line_bits[l as usize].test(b))
                .count();
            assert_eq!(common, 1, "points {a},{b} lie on exactly one common line");
            let meets = self.line_points[a]
                .iter()
                .filter(|&&p| self.line_points[b].contains(&p))
                .count();
            assert_eq!(meets, 1, "lines {a},{b} meet in exactly one point");
        };
        if self.q <= 9 {
            for a in 0..n {
                for b in a + 1..n {
                    check_pair(a, b);
                }
            }
        } else {
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize
            };
            for _ in 0..2000 {
                let a = next() % n;
                let b = next() % n;
                if a != b {
                    check_pair(a, b);
                }
            }
        }
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn point(&self, i: u32) -> [Fe; 3] {
        self.points[i as usize]
    }

    pub fn line(&self, i: u32) -> [Fe; 3] {
        self.lines[i as usize]
    }

    /// First nonzero coordinate scaled to 1.
    pub fn normalize(&self, c: [Fe; 3]) -> [Fe; 3] {
        let lead = c.iter().find(|x| x.0 != 0).expect("nonzero triple");
        let inv = self.field.inv(*lead).unwrap();
        [self.field.mul(c[0], inv), self.field.mul(c[1], inv), self.field.mul(c[2], inv)]
    }

    pub fn index_of_point(&self, c: [Fe; 3]) -> u32 {
        let nc = self.normalize(c);
        self.point_idx[&[nc[0].0, nc[1].0, nc[2].0]]
    }

    pub fn index_of_line(&self, c: [Fe; 3]) -> u32 {
        let nc = self.normalize(c);
        self.line_idx[&[nc[0].0, nc[1].0, nc[2].0]]
    }

    #[inline]
    pub fn incident(&self, point: u32, line: u32) -> bool {
        self.line_bits[line as usize].test(point as usize)
    }

    pub fn points_on_line(&self, line: u32) -> &[u32] {
        &self.line_points[line as usize]
    }

    pub fn lines_through(&self, point: u32) -> &[u32] {
        &self.point_lines[point as usize]
    }

    pub fn line_bits(&self, line: u32) -> &Bitset {
        &self.line_bits[line as usize]
    }

    fn cross(&self, a: [Fe; 3], b: [Fe; 3]) -> [Fe; 3] {
        let f = &self.field;
        [
            f.sub(f.mul(a[1], b[2]), f.mul(a[2], b[1])),
            f.sub(f.mul(a[2], b[0]), f.mul(a[0], b[2])),
            f.sub(f.mul(a[0], b[1]), f.mul(a[1], b[0])),
        ]
    }

    pub fn line_through(&self, p: u32, r: u32) -> Result<u32, PlaneError> {
        if p == r {
            return Err(PlaneError::CoincidentPoints);
        }
        Ok(self.index_of_line(self.cross(self.point(p), self.point(r))))
    }

    pub fn meet(&self, l1: u32, l2: u32) -> Result<u32, PlaneError> {
        if l1 == l2 {
            return Err(PlaneError::CoincidentLines);
        }
        Ok(self.index_of_point(self.cross(self.line(l1), self.line(l2))))
    }

    // Affine chart.

    pub fn affine_point(&self, a: Fe, b: Fe) -> u32 {
        self.point_idx[&[1, a.0, b.0]]
    }

    pub fn direction(&self, d: Fe) -> u32 {
        self.point_idx[&[0, 1, d.0]]
    }

    pub fn direction_inf(&self) -> u32 {
        self.point_idx[&[0, 0, 1]]
    }

    pub fn line_at_infinity(&self) -> u32 {
        self.line_idx[&[1, 0, 0]]
    }

    /// Projective closure of Y = dX + k, or X = k for the vertical slope.
    pub fn line_of_slope(&self, d: Slope, k: Fe) -> u32 {
        match d {
            Slope::Finite(d) => self.index_of_line([k, d, self.field.neg(Fe(1))]),
            Slope::Vertical => self.index_of_line([k, self.field.neg(Fe(1)), Fe(0)]),
        }
    }

    pub fn chart(&self, point: u32) -> ChartPoint {
        let c = self.point(point);
        match (c[0].0, c[1].0) {
            (0, 0) => ChartPoint::DirInf,
            (0, _) => ChartPoint::Dir(c[2]),
            _ => ChartPoint::Affine(c[1], c[2]),
        }
    }

    pub fn is_affine(&self, point: u32) -> bool {
        self.point(point)[0].0 != 0
    }

    /// Slope of the secant of two distinct affine points.
    pub fn slope_between(&self, p: u32, r: u32) -> Result<Slope, PlaneError> {
        let (cp, cr) = (self.chart(p), self.chart(r));
        match (cp, cr) {
            (ChartPoint::Affine(a1, b1), ChartPoint::Affine(a2, b2)) => {
                if p == r {
                    Err(PlaneError::CoincidentPoints)
                } else if a1 == a2 {
                    Ok(Slope::Vertical)
                } else {
                    let num = self.field.sub(b2, b1);
                    let den = self.field.sub(a2, a1);
                    Ok(Slope::Finite(self.field.div(num, den).unwrap()))
                }
            }
            _ => Err(PlaneError::NotAffine),
        }
    }

    /// The point at infinity of the secant of two distinct affine points.
    pub fn secant_direction(&self, p: u32, r: u32) -> Result<u32, PlaneError> {
        Ok(match self.slope_between(p, r)? {
            Slope::Finite(d) => self.direction(d),
            Slope::Vertical => self.direction_inf(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(q: u64) -> Plane {
        Plane::new(FieldCtx::of_order(q).unwrap())
    }

    #[test]
    fn fano_counts() {
        let pi = plane(2);
        assert_eq!(pi.num_points(), 7);
        assert_eq!(pi.num_lines(), 7);
        assert!((0..7).all(|l| pi.points_on_line(l).len() == 3));
    }

    #[test]
    fn counts_q4_and_q9() {
        let pi = plane(4);
        assert_eq!(pi.num_points(), 21);
        assert!((0..21).all(|l| pi.points_on_line(l).len() == 5));
        let pi = plane(9);
        assert_eq!(pi.num_points(), 91);
        assert!((0..91).all(|p| pi.lines_through(p).len() == 10));
    }

    #[test]
    fn builds_with_sampled_verification_above_nine() {
        let pi = plane(16);
        assert_eq!(pi.num_points(), 273);
    }

    #[test]
    fn axes_join_and_meet() {
        let pi = plane(5);
        let origin = pi.index_of_point([Fe(1), Fe(0), Fe(0)]);
        let dir0 = pi.index_of_point([Fe(0), Fe(1), Fe(0)]);
        let l = pi.line_through(origin, dir0).unwrap();
        assert_eq!(pi.line(l), [Fe(0), Fe(0), Fe(1)]);
        let l2 = pi.index_of_line([Fe(0), Fe(1), Fe(0)]);
        assert_eq!(pi.point(pi.meet(l, l2).unwrap()), [Fe(1), Fe(0), Fe(0)]);
    }

    #[test]
    fn normalization_scales_first_nonzero_to_one() {
        let pi = plane(3);
        let i = pi.index_of_point([Fe(0), Fe(2), Fe(2)]);
        assert_eq!(pi.point(i), [Fe(0), Fe(1), Fe(1)]);
    }

    #[test]
    fn point_ordering_starts_at_infinity_block() {
        let pi = plane(4);
        assert_eq!(pi.point(0), [Fe(0), Fe(0), Fe(1)]);
        assert_eq!(pi.point(1), [Fe(0), Fe(1), Fe(0)]);
        assert_eq!(pi.direction_inf(), 0);
        assert!(pi.incident(pi.direction_inf(), pi.line_at_infinity()));
    }

    #[test]
    fn slope_lines_partition_affine_points() {
        let pi = plane(5);
        let f = pi.field().clone();
        for d in f.elements() {
            let mut seen = vec![false; pi.num_points()];
            for k in f.elements() {
                let l = pi.line_of_slope(Slope::Finite(d), k);
                assert!(pi.incident(pi.direction(d), l));
                for &p in pi.points_on_line(l) {
                    if pi.is_affine(p) {
                        assert!(!seen[p as usize]);
                        seen[p as usize] = true;
                    }
                }
            }
            assert_eq!(seen.iter().filter(|&&s| s).count(), 25);
        }
        // Verticals hit the common direction and partition as well.
        let mut seen = vec![false; pi.num_points()];
        for k in f.elements() {
            let l = pi.line_of_slope(Slope::Vertical, k);
            assert!(pi.incident(pi.direction_inf(), l));
            for &p in pi.points_on_line(l) {
                if pi.is_affine(p) {
                    seen[p as usize] = true;
                }
            }
        }
        assert_eq!(seen.iter().filter(|&&s| s).count(), 25);
    }

    #[test]
    fn slope_between_matches_line_of_slope() {
        let pi = plane(4);
        let f = pi.field().clone();
        for a1 in f.elements() {
            for b1 in f.elements() {
                for a2 in f.elements() {
                    for b2 in f.elements() {
                        let (p, r) = (pi.affine_point(a1, b1), pi.affine_point(a2, b2));
                        if p == r {
                            continue;
                        }
                        let d = pi.slope_between(p, r).unwrap();
                        let l = pi.line_through(p, r).unwrap();
                        let k = match d {
                            Slope::Finite(s) => f.sub(b1, f.mul(s, a1)),
                            Slope::Vertical => a1,
                        };
                        assert_eq!(pi.line_of_slope(d, k), l);
                    }
                }
            }
        }
    }

    #[test]
    fn chart_roundtrip() {
        let pi = plane(9);
        for i in 0..pi.num_points() as u32 {
            let back = match pi.chart(i) {
                ChartPoint::Affine(a, b) => pi.affine_point(a, b),
                ChartPoint::Dir(d) => pi.direction(d),
                ChartPoint::DirInf => pi.direction_inf(),
            };
            assert_eq!(back, i);
        }
    }

    #[test]
    fn bitset_ordering_is_set_lexicographic() {
        let mk = |idx: &[u32]| Bitset::from_indices(100, idx);
        assert!(mk(&[0, 5]) < mk(&[1, 2]));
        assert!(mk(&[1, 2]) < mk(&[1, 3]));
        assert!(mk(&[1, 2, 99]) < mk(&[1, 3]));
        assert_eq!(mk(&[7, 64]).iter_ones().collect::<Vec<_>>(), vec![7, 64]);
        assert_eq!(mk(&[7, 64]).count(), 2);
        assert_eq!(mk(&[7, 64]).and_count(&mk(&[64, 65])), 1);
    }
}
