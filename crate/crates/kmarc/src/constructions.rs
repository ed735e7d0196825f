//! Deterministic constructions of the classical families: collinear sets, line
//! pencils, conics and hyperovals, Hermitian unitals, subfield subplanes and
//! their complements, maximal arcs, subplane line pencils, trace graphs,
//! punctured mod-p sets, and sharply focused arcs.

use crate::analysis::{classify_modp, line_counts, AnalysisError, PointMultiset};
use crate::gf::{is_prime, Fe, FieldCtx};
use crate::plane::{Plane, Slope};
use std::collections::BTreeSet;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructError {
    #[error("parameter {0} out of range")]
    OutOfRange(&'static str),
    #[error("plane order must be even")]
    EvenOrderRequired,
    #[error("plane order must be a square")]
    SquareOrderRequired,
    #[error("anchor point must lie in the subfield subplane")]
    PointNotInSubplane,
    #[error("no proper subfield of that order")]
    BadSubfield,
    #[error("input is not c mod p intersecting for any c")]
    NotModpIntersecting,
    #[error("point is not in the support")]
    PointNotInSupport,
    #[error("multiplicity shape violated: {0}")]
    MultiplicityShape(&'static str),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn int_sqrt(q: u32) -> Option<u32> {
    let r = (q as f64).sqrt().round() as u32;
    (r * r == q).then_some(r)
}

/// The first t points of a line, in point-index order.
pub fn collinear_set(plane: &Arc<Plane>, line: u32, t: u32) -> Result<PointMultiset, ConstructError> {
    let q = plane.order();
    if t < 1 || t > q + 1 {
        return Err(ConstructError::OutOfRange("t"));
    }
    let pts = &plane.points_on_line(line)[..t as usize];
    Ok(PointMultiset::from_indices(plane.clone(), pts))
}

/// Union of the first m lines through a vertex, with the vertex removed.
pub fn pencil_minus_vertex(plane: &Arc<Plane>, vertex: u32, m: u32) -> Result<PointMultiset, ConstructError> {
    let q = plane.order();
    if m < 1 || m > q + 1 {
        return Err(ConstructError::OutOfRange("m"));
    }
    let mut s = PointMultiset::empty(plane.clone());
    for &l in &plane.lines_through(vertex)[..m as usize] {
        for &pt in plane.points_on_line(l) {
            if pt != vertex {
                s.set_multiplicity(pt, 1)?;
            }
        }
    }
    Ok(s)
}

/// The conic {(1 : t : t²)} together with the vertical direction (0:0:1).
pub fn conic_oval(plane: &Arc<Plane>) -> PointMultiset {
    let f = plane.field().clone();
    let mut idx: Vec<u32> = f
        .elements()
        .map(|t| plane.affine_point(t, f.mul(t, t)))
        .collect();
    idx.push(plane.direction_inf());
    PointMultiset::from_indices(plane.clone(), &idx)
}

/// For q even, the conic plus its nucleus (0:1:0).
pub fn hyperoval(plane: &Arc<Plane>) -> Result<PointMultiset, ConstructError> {
    if plane.field().p() != 2 {
        return Err(ConstructError::EvenOrderRequired);
    }
    let mut s = conic_oval(plane);
    s.set_multiplicity(plane.direction(Fe(0)), 1)?;
    Ok(s)
}

/// Zero set of X^(r+1) + Y^(r+1) + Z^(r+1) where r² = q.
pub fn hermitian_unital(plane: &Arc<Plane>) -> Result<PointMultiset, ConstructError> {
    let f = plane.field();
    let r = int_sqrt(plane.order()).ok_or(ConstructError::SquareOrderRequired)?;
    let e = r as u64 + 1;
    let idx: Vec<u32> = (0..plane.num_points() as u32)
        .filter(|&i| {
            let c = plane.point(i);
            let v = f.add(
                f.add(f.pow(c[0], e), f.pow(c[1], e)),
                f.pow(c[2], e),
            );
            v == Fe(0)
        })
        .collect();
    Ok(PointMultiset::from_indices(plane.clone(), &idx))
}

fn subplane_indices(plane: &Plane) -> Result<Vec<u32>, ConstructError> {
    let f = plane.field();
    let r = int_sqrt(plane.order()).ok_or(ConstructError::SquareOrderRequired)?;
    let sub = FieldCtx::of_order(r as u64).map_err(|_| ConstructError::SquareOrderRequired)?;
    let map = f.embed_subfield(&sub).map_err(|_| ConstructError::BadSubfield)?;
    Ok((0..plane.num_points() as u32)
        .filter(|&i| plane.point(i).iter().all(|&c| map.contains(c)))
        .collect())
}

/// Points whose normalized coordinates all lie in the index-√q subfield.
pub fn baer_subplane(plane: &Arc<Plane>) -> Result<PointMultiset, ConstructError> {
    let idx = subplane_indices(plane)?;
    Ok(PointMultiset::from_indices(plane.clone(), &idx))
}

pub fn complement_baer(plane: &Arc<Plane>) -> Result<PointMultiset, ConstructError> {
    let inside: BTreeSet<u32> = subplane_indices(plane)?.into_iter().collect();
    let idx: Vec<u32> = (0..plane.num_points() as u32)
        .filter(|i| !inside.contains(i))
        .collect();
    Ok(PointMultiset::from_indices(plane.clone(), &idx))
}

/// Degree-m maximal arc for q even: {(x,y) : x² + bxy + y² ∈ H} with t² + bt + 1
/// irreducible and H the additive subgroup of the m smallest encodings.
pub fn denniston_maximal_arc(plane: &Arc<Plane>, m: u32) -> Result<PointMultiset, ConstructError> {
    let f = plane.field().clone();
    let q = plane.order();
    if f.p() != 2 {
        return Err(ConstructError::EvenOrderRequired);
    }
    if m < 2 || m > q / 2 || q % m != 0 {
        return Err(ConstructError::OutOfRange("m"));
    }
    let b = f
        .elements()
        .find(|&b| {
            f.elements()
                .all(|t| f.add(f.add(f.mul(t, t), f.mul(b, t)), f.from_int(1)) != Fe(0))
        })
        .ok_or(ConstructError::OutOfRange("m"))?;
    let mut idx = Vec::new();
    for x in f.elements() {
        for y in f.elements() {
            let v = f.add(f.add(f.mul(x, x), f.mul(b, f.mul(x, y))), f.mul(y, y));
            if v.0 < m {
                idx.push(plane.affine_point(x, y));
            }
        }
    }
    Ok(PointMultiset::from_indices(plane.clone(), &idx))
}

/// Maximal arc with its first point removed, realizing t = m − 1.
pub fn punctured_denniston(plane: &Arc<Plane>, m: u32) -> Result<PointMultiset, ConstructError> {
    let arc = denniston_maximal_arc(plane, m)?;
    let first = arc.support()[0];
    Ok(arc.without(first))
}

/// Union of the √q+1 extended subplane lines through a subplane point, minus
/// the subplane itself.
pub fn baer_pencil_arc(plane: &Arc<Plane>, vertex: u32) -> Result<PointMultiset, ConstructError> {
    let inside: BTreeSet<u32> = subplane_indices(plane)?.into_iter().collect();
    if !inside.contains(&vertex) {
        return Err(ConstructError::PointNotInSubplane);
    }
    let r = int_sqrt(plane.order()).expect("square order checked");
    let mut s = PointMultiset::empty(plane.clone());
    let mut pencil = 0;
    for &l in plane.lines_through(vertex) {
        let sub_on = plane
            .points_on_line(l)
            .iter()
            .filter(|pt| inside.contains(pt))
            .count() as u32;
        if sub_on == r + 1 {
            pencil += 1;
            for &pt in plane.points_on_line(l) {
                if !inside.contains(&pt) {
                    s.set_multiplicity(pt, 1)?;
                }
            }
        }
    }
    assert_eq!(pencil, r + 1, "a subplane point lies on √q+1 subplane lines");
    Ok(s)
}

/// Pencil of the horizontal subfield-intercept lines and the line at infinity,
/// minus the trace graph U = {(x, Tr x)} and its determined directions D.
pub fn trace_arc(plane: &Arc<Plane>, sub_order: u64) -> Result<PointMultiset, ConstructError> {
    let f = plane.field().clone();
    if sub_order >= f.order() as u64 {
        return Err(ConstructError::BadSubfield);
    }
    let sub = FieldCtx::of_order(sub_order).map_err(|_| ConstructError::BadSubfield)?;
    let map = f.embed_subfield(&sub).map_err(|_| ConstructError::BadSubfield)?;
    let tr = |x: Fe| map.fwd(f.trace_onto(&map, x));
    let rel_deg = f.degree() / sub.degree();

    let mut in_l = vec![false; plane.num_points()];
    for &pt in plane.points_on_line(plane.line_at_infinity()) {
        in_l[pt as usize] = true;
    }
    for c in sub.elements() {
        let l = plane.line_of_slope(Slope::Finite(Fe(0)), map.fwd(c));
        for &pt in plane.points_on_line(l) {
            in_l[pt as usize] = true;
        }
    }

    let directions: BTreeSet<u32> = f
        .elements()
        .filter(|&z| z != Fe(0))
        .map(|z| plane.direction(f.div(tr(z), z).expect("z nonzero")))
        .collect();
    assert_eq!(
        directions.len() as u64,
        sub_order.pow(rel_deg - 1) + 1,
        "determined directions of the trace graph"
    );

    for &d in &directions {
        in_l[d as usize] = false;
    }
    for x in f.elements() {
        in_l[plane.affine_point(x, tr(x)) as usize] = false;
    }
    let idx: Vec<u32> = (0..plane.num_points() as u32)
        .filter(|&i| in_l[i as usize])
        .collect();
    Ok(PointMultiset::from_indices(plane.clone(), &idx))
}

fn is_cmodp(s: &PointMultiset) -> Result<(), ConstructError> {
    let modp = classify_modp(s)?;
    if modp.iter().any(|ty| ty.m == ty.t) {
        Ok(())
    } else {
        Err(ConstructError::NotModpIntersecting)
    }
}

/// A c mod p intersecting set with one point removed.
pub fn punctured_cmodp(s: &PointMultiset, removed: u32) -> Result<PointMultiset, ConstructError> {
    if s.multiplicity(removed) == 0 {
        return Err(ConstructError::PointNotInSupport);
    }
    is_cmodp(s)?;
    Ok(s.without(removed))
}

/// A c mod p intersecting multiset whose unique point of multiplicity r
/// (0 < r < p) is deleted entirely.
pub fn multiplicity_puncture(c: &PointMultiset, heavy: u32) -> Result<PointMultiset, ConstructError> {
    let r = c.multiplicity(heavy);
    let p = c.plane().field().p();
    if r == 0 {
        return Err(ConstructError::PointNotInSupport);
    }
    if r >= p {
        return Err(ConstructError::MultiplicityShape("multiplicity must be below p"));
    }
    if c.support().iter().any(|&pt| pt != heavy && c.multiplicity(pt) == r) {
        return Err(ConstructError::MultiplicityShape(
            "several points share the deleted multiplicity",
        ));
    }
    is_cmodp(c)?;
    Ok(c.without(heavy))
}

/// A verified sharply focused arc: k affine points determining k directions,
/// the concurrency point of its k tangents, and the union S ∪ D.
#[derive(Clone, Debug)]
pub struct SharplyFocused {
    pub arc: Vec<u32>,
    pub directions: Vec<u32>,
    pub completion: u32,
    pub union_set: PointMultiset,
}

fn k_subsets(items: &[u32], k: usize, f: &mut dyn FnMut(&[u32])) {
    fn rec(items: &[u32], k: usize, start: usize, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=items.len() - need {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    if items.len() >= k {
        let mut cur = Vec::with_capacity(k);
        rec(items, k, 0, &mut cur, f);
    }
}

fn check_sharply_focused(plane: &Arc<Plane>, arc: &[u32], k: u32) -> Option<SharplyFocused> {
    let mut dirs = BTreeSet::new();
    for (i, &a) in arc.iter().enumerate() {
        for &b in &arc[i + 1..] {
            dirs.insert(plane.secant_direction(a, b).expect("distinct points"));
        }
    }
    if dirs.len() as u32 != k {
        return None;
    }
    let s = PointMultiset::from_indices(plane.clone(), arc);
    let counts = line_counts(&s);
    if counts.iter().any(|&c| c > 2) {
        return None; // three collinear points: not an arc
    }

    // k odd: each determined direction carries exactly one tangent.
    let tangents: Vec<u32> = dirs
        .iter()
        .map(|&d| {
            let t: Vec<u32> = plane
                .lines_through(d)
                .iter()
                .copied()
                .filter(|&l| counts[l as usize] == 1)
                .collect();
            assert_eq!(t.len(), 1, "unique tangent per determined direction");
            t[0]
        })
        .collect();
    let completion = match crate::analysis::concurrency_of(plane, &tangents) {
        crate::analysis::Concurrency::At(r) => r,
        other => panic!("tangents of a sharply focused arc must concur, got {other:?}"),
    };
    assert!(!arc.contains(&completion) && !dirs.contains(&completion));

    // The completion extends the arc to a hyperfocused one with the same
    // direction set.
    let mut ext_dirs = BTreeSet::new();
    let mut ext = arc.to_vec();
    ext.push(completion);
    for (i, &a) in ext.iter().enumerate() {
        for &b in &ext[i + 1..] {
            ext_dirs.insert(plane.secant_direction(a, b).expect("distinct points"));
        }
    }
    assert_eq!(ext_dirs, dirs, "completion must not enlarge the direction set");
    let ext_set = PointMultiset::from_indices(plane.clone(), &ext);
    assert!(line_counts(&ext_set).iter().all(|&c| c <= 2));

    let mut union = arc.to_vec();
    union.extend(dirs.iter().copied());
    let union_set = PointMultiset::from_indices(plane.clone(), &union);
    let modp = classify_modp(&union_set).expect("proper nonempty");
    assert!(
        modp.iter().any(|ty| ty.m == 1 && ty.t == 0),
        "arc plus directions must be a (1,0) mod-2 set"
    );

    Some(SharplyFocused {
        arc: arc.to_vec(),
        directions: dirs.into_iter().collect(),
        completion,
        union_set,
    })
}

/// Search for sharply focused k-arcs, q even, k odd: first among subsets of
/// the standard hyperoval's affine points, then (for q ≤ 8) all affine k-arcs.
pub fn sharply_focused_search(plane: &Arc<Plane>, k: u32) -> Result<Vec<SharplyFocused>, ConstructError> {
    let q = plane.order();
    if plane.field().p() != 2 {
        return Err(ConstructError::EvenOrderRequired);
    }
    if k % 2 == 0 || k < 3 || k > q {
        return Err(ConstructError::OutOfRange("k"));
    }
    let hyper = hyperoval(plane)?;
    let affine: Vec<u32> = hyper
        .support()
        .into_iter()
        .filter(|&pt| plane.is_affine(pt))
        .collect();
    let mut out = Vec::new();
    k_subsets(&affine, k as usize, &mut |arc| {
        if let Some(sf) = check_sharply_focused(plane, arc, k) {
            out.push(sf);
        }
    });
    if out.is_empty() && q <= 8 {
        arc_dfs(plane, k, &mut out);
    }
    Ok(out)
}

/// Exhaustive DFS over affine k-arcs pruned by the determined-direction count.
fn arc_dfs(plane: &Arc<Plane>, k: u32, out: &mut Vec<SharplyFocused>) {
    let affine: Vec<u32> = (0..plane.num_points() as u32)
        .filter(|&pt| plane.is_affine(pt))
        .collect();
    fn rec(
        plane: &Arc<Plane>,
        affine: &[u32],
        k: usize,
        start: usize,
        chosen: &mut Vec<u32>,
        dirs: &mut Vec<u32>,
        out: &mut Vec<SharplyFocused>,
    ) {
        if chosen.len() == k {
            let distinct: BTreeSet<u32> = dirs.iter().copied().collect();
            if distinct.len() == k {
                if let Some(sf) = check_sharply_focused(plane, chosen, k as u32) {
                    out.push(sf);
                }
            }
            return;
        }
        let need = k - chosen.len();
        for i in start..affine.len() {
            if affine.len() - i < need {
                break;
            }
            let pt = affine[i];
            let mut new_dirs: Vec<u32> = chosen
                .iter()
                .map(|&c| plane.secant_direction(pt, c).expect("distinct"))
                .collect();
            new_dirs.sort_unstable();
            if new_dirs.windows(2).any(|w| w[0] == w[1]) {
                continue; // would create three collinear points
            }
            let before = dirs.len();
            let mut distinct: BTreeSet<u32> = dirs.iter().copied().collect();
            distinct.extend(new_dirs.iter().copied());
            if distinct.len() > k {
                continue;
            }
            dirs.extend(new_dirs);
            chosen.push(pt);
            rec(plane, affine, k, i + 1, chosen, dirs, out);
            chosen.pop();
            dirs.truncate(before);
        }
    }
    rec(plane, &affine, k as usize, 0, &mut Vec::new(), &mut Vec::new(), out);
}

/// Parameter arithmetic for the three-0-secant family: type
/// (p^n − p^m, p^n − 2p^m + 1) of size (p^n − p^m)(p^n − 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MasonParameters {
    pub q: u64,
    pub m: u64,
    /// t exactly as quoted: p^n − 2p^m + 1.
    pub quoted_t: u64,
    pub size: u64,
    /// The t forced by size = q(m−1) + t; works out to p^m.
    pub km_t: u64,
    pub quoted_matches_km: bool,
    pub zero_secants: u64,
    /// size / km_t when integral.
    pub t_secant_count: Option<u64>,
}

pub fn mason_parameter_check(p: u32, n: u32, m_exp: u32) -> Result<MasonParameters, ConstructError> {
    if !is_prime(p) {
        return Err(ConstructError::NotPrime(p));
    }
    if m_exp >= n {
        return Err(ConstructError::OutOfRange("m"));
    }
    let q = (p as u64).pow(n);
    let pm = (p as u64).pow(m_exp);
    let m = q - pm;
    let quoted_t = q - 2 * pm + 1;
    let size = (q - pm) * (q - 1);
    let km_t = size - q * (m - 1);
    Ok(MasonParameters {
        q,
        m,
        quoted_t,
        size,
        km_t,
        quoted_matches_km: quoted_t == km_t,
        zero_secants: 3,
        t_secant_count: (size % km_t == 0).then(|| size / km_t),
    })
}
