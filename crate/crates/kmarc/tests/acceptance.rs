//! Acceptance gate: one test per acceptance criterion, numbered. Each test
//! pins its expected values and its wall-clock budget in code, so the
//! harness output gives a single pass/fail line per criterion.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kmarc::analysis::{
    audit_combinatorial, classify_exact, classify_modp, completion_points, concurrency_of,
    line_count, proper_residue_secants, spectrum, Concurrency, ModpType, PointMultiset,
};
use kmarc::constructions::{
    baer_pencil_arc, baer_subplane, collinear_set, complement_baer, conic_oval,
    denniston_maximal_arc, hermitian_unital, hyperoval, mason_parameter_check,
    pencil_minus_vertex, punctured_cmodp, sharply_focused_search, trace_arc,
};
use kmarc::designs::{gdd_from_km, gdd_verify};
use kmarc::gf::{Fe, FieldCtx};
use kmarc::plane::{Bitset, Plane, Slope};
use kmarc::redei::{verify_renitent_lemma, RenitentVerdict};
use kmarc::search::{
    exact_candidate_pairs, match_family, search, SearchMode, SearchSpec,
};

fn plane_of(q: u64) -> Arc<Plane> {
    Arc::new(Plane::new(FieldCtx::of_order(q).unwrap()))
}

fn budget(t0: Instant, secs: u64, what: &str) {
    let el = t0.elapsed();
    assert!(
        el < Duration::from_secs(secs),
        "{what}: took {el:?}, budget {secs}s"
    );
}

/// Visit every k-subset of 0..n in lexicographic order.
fn each_subset(n: u32, k: usize, f: &mut dyn FnMut(&[u32])) {
    fn rec(n: u32, k: usize, start: u32, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = (k - cur.len()) as u32;
        for i in start..=n - need {
            cur.push(i);
            rec(n, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut Vec::new(), f);
}

#[test]
fn criterion_01_baer_pencil_type_three_six() {
    let t0 = Instant::now();
    let plane = plane_of(9);
    let vertex = baer_subplane(&plane).unwrap().support()[0];
    let s = baer_pencil_arc(&plane, vertex).unwrap();
    assert_eq!(s.size(), 24, "pencil over a subplane point has 4*6 points");
    assert!(s.is_set());
    let types = classify_exact(&s).unwrap();
    assert!(
        types.iter().any(|ty| ty.m == 3 && ty.t == 6 && !ty.degenerate),
        "expected exact type (3,6), got {types:?}"
    );
    budget(t0, 1, "criterion 1");
}

#[test]
fn criterion_02_trace_graph_directions_and_concurrency() {
    let t0 = Instant::now();
    let plane = plane_of(8);
    let s = trace_arc(&plane, 2).unwrap();
    assert_eq!(s.size(), 12);
    let types = classify_exact(&s).unwrap();
    assert!(
        types.iter().any(|ty| ty.m == 2 && ty.t == 4 && !ty.degenerate),
        "expected exact type (2,4), got {types:?}"
    );

    // The graph of the absolute trace determines 2^2 + 1 = 5 directions.
    let f = plane.field();
    let sub = FieldCtx::new(2, 1).unwrap();
    let map = f.embed_subfield(&sub).unwrap();
    let tr = |x: Fe| map.fwd(f.trace_onto(&map, x));
    let xs: Vec<Fe> = f.elements().collect();
    let mut dirs: BTreeSet<Fe> = BTreeSet::new();
    for i in 0..xs.len() {
        for j in 0..i {
            let dx = f.sub(xs[i], xs[j]);
            let dy = f.sub(tr(xs[i]), tr(xs[j]));
            dirs.insert(f.mul(dy, f.inv(dx).unwrap()));
        }
    }
    assert_eq!(dirs.len(), 5, "direction count of the trace graph");

    // The three 4-secants pass through one common point.
    let fours: Vec<u32> = (0..plane.num_lines() as u32)
        .filter(|&l| line_count(&s, l) == 4)
        .collect();
    assert_eq!(fours.len(), 3);
    assert!(
        matches!(concurrency_of(&plane, &fours), Concurrency::At(_)),
        "4-secants should be concurrent"
    );
    budget(t0, 1, "criterion 2");
}

#[test]
fn criterion_03_renitent_lemma_randomized() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut verified = 0u64;
    for &q in &[3u64, 4, 5, 7, 8, 9] {
        let f = FieldCtx::of_order(q).unwrap();
        let p = f.p() as usize;
        let els: Vec<Fe> = f.elements().collect();
        for _ in 0..1700 {
            // Random affine set whose size is prime to the characteristic.
            let pts: Vec<(Fe, Fe)> = loop {
                let target = rng.gen_range(1..=2 * q as usize);
                let mut set = BTreeSet::new();
                while set.len() < target {
                    let a = els[rng.gen_range(0..els.len())];
                    let b = els[rng.gen_range(0..els.len())];
                    set.insert((a, b));
                }
                if set.len() % p != 0 {
                    break set.into_iter().collect();
                }
            };
            match verify_renitent_lemma(&f, &pts).unwrap() {
                RenitentVerdict::Verified { .. } => verified += 1,
                RenitentVerdict::Counterexample { nucleus, line } => {
                    panic!("q={q} pts={pts:?}: line {line:?} misses the nucleus {nucleus:?}")
                }
            }
        }
    }
    assert!(verified >= 10_000, "only {verified} instances verified");
    budget(t0, 60, "criterion 3");
}

#[test]
fn criterion_04_worked_nucleus_instance() {
    let t0 = Instant::now();
    let f = FieldCtx::of_order(5).unwrap();
    let (z, o) = (f.zero(), f.one());
    let mut pts: Vec<(Fe, Fe)> = f.elements().map(|x| (x, z)).collect();
    pts.push((z, o));
    match verify_renitent_lemma(&f, &pts).unwrap() {
        RenitentVerdict::Verified { nucleus, lines } => {
            assert_eq!(nucleus, (z, o));
            assert_eq!(lines.len(), 6, "one renitent line per direction");
            for l in &lines {
                // Passing through (0,1) means intercept 1 for y = dx + c,
                // intercept 0 for the vertical line x = c.
                match l.direction {
                    Slope::Finite(_) => assert_eq!(l.intercept, o, "line {l:?}"),
                    Slope::Vertical => assert_eq!(l.intercept, z, "line {l:?}"),
                }
            }
        }
        RenitentVerdict::Counterexample { nucleus, line } => {
            panic!("line {line:?} misses the nucleus {nucleus:?}")
        }
    }
    budget(t0, 1, "criterion 4");
}

#[test]
fn criterion_05_exact_census_trivial_or_divisible() {
    let t0 = Instant::now();
    for &q in &[2u64, 3, 4] {
        let plane = plane_of(q);
        let p = plane.field().p();
        let candidates: BTreeSet<(u32, u32)> =
            exact_candidate_pairs(q as u32).into_iter().collect();
        let out = search(&SearchSpec::new(plane.clone(), SearchMode::ExactAll)).unwrap();
        assert!(out.complete);

        // Every solution is a recognized trivial family or has p | m, p | t.
        for s in &out.sets {
            let fam = match_family(s).unwrap();
            let types = classify_exact(s).unwrap();
            let divisible = types.iter().any(|ty| ty.m % p == 0 && ty.t % p == 0);
            assert!(
                fam.family.is_trivial() || divisible,
                "q={q} support={:?} family={:?} types={types:?}",
                s.support(),
                fam.family
            );
        }

        // Completeness against blind enumeration: full at q <= 3, sizes <= 10
        // at q = 4. Also check nothing classifies outside the screened pairs.
        let np = plane.num_points() as u32;
        let small_cap = if q <= 3 { np as usize } else { 10 };
        let found: BTreeSet<Bitset> = out
            .sets
            .iter()
            .filter(|s| s.support_size() <= small_cap)
            .map(|s| s.support_bits())
            .collect();
        let mut naive: BTreeSet<Bitset> = BTreeSet::new();
        for mask in 1u32..(1u32 << np) - 1 {
            let k = mask.count_ones() as usize;
            if k > small_cap {
                continue;
            }
            let idx: Vec<u32> = (0..np).filter(|i| mask >> i & 1 == 1).collect();
            let s = PointMultiset::from_indices(plane.clone(), &idx);
            let types = classify_exact(&s).unwrap();
            for ty in &types {
                assert!(
                    candidates.contains(&(ty.m, ty.t)),
                    "q={q} support={idx:?} classifies as unscreened pair {ty:?}"
                );
            }
            if !types.is_empty() {
                naive.insert(s.support_bits());
            }
        }
        assert_eq!(found, naive, "q={q}: search census disagrees with enumeration");
    }
    budget(t0, 600, "criterion 5");
}

#[test]
fn criterion_06_hyperoval_census_two_routes() {
    let plane = plane_of(4);

    let t0 = Instant::now();
    let out = search(&SearchSpec::new(plane.clone(), SearchMode::Exact { m: 2, t: 2 })).unwrap();
    assert!(out.complete);
    assert_eq!(out.sets.len(), 168, "hyperoval count by backtracking");
    budget(t0, 5, "criterion 6 (search route)");

    let t1 = Instant::now();
    let mut count = 0u64;
    each_subset(plane.num_points() as u32, 6, &mut |pts| {
        let mut lines = BTreeSet::new();
        let mut arc = true;
        'outer: for i in 0..pts.len() {
            for j in 0..i {
                let l = plane.line_through(pts[i], pts[j]).unwrap();
                if !lines.insert(l) {
                    arc = false;
                    break 'outer;
                }
            }
        }
        if arc {
            count += 1;
        }
    });
    assert_eq!(count, 168, "hyperoval count by 6-subset enumeration");
    budget(t1, 300, "criterion 6 (blind route)");
}

#[test]
fn criterion_07_spectrum_identities_randomized() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut checked = 0u64;
    for &q in &[4u64, 5, 7, 8, 9] {
        let plane = plane_of(q);
        let np = plane.num_points() as u32;
        let mut done = 0u32;
        while done < 20_000 {
            let mut s = PointMultiset::empty(plane.clone());
            let picks = rng.gen_range(1..=np);
            let sets_only = done % 2 == 0;
            for _ in 0..picks {
                let pt = rng.gen_range(0..np);
                let m = if sets_only { 1 } else { rng.gen_range(0..=plane.order()) };
                s.set_multiplicity(pt, m).unwrap();
            }
            if s.is_empty() || !s.is_proper() {
                continue;
            }
            let ids = spectrum(&s).identities();
            assert!(ids.line_total, "line total failed for {s:?}");
            assert!(ids.incidence_total, "incidence total failed for {s:?}");
            if s.is_set() {
                assert_eq!(ids.pair_total, Some(true), "pair total failed for {s:?}");
            } else {
                assert_eq!(ids.pair_total, None);
            }
            done += 1;
            checked += 1;
        }
    }
    assert!(checked >= 100_000);
    budget(t0, 60, "criterion 7");
}

#[test]
fn criterion_08_divisibility_audits_on_families() {
    let t0 = Instant::now();
    let mut audited = 0u32;
    let mut audit_all = |s: &PointMultiset, label: &str| {
        let types = classify_exact(s).unwrap();
        let proper: Vec<_> = types.iter().filter(|ty| !ty.degenerate).collect();
        assert!(!proper.is_empty(), "{label}: no nondegenerate exact type");
        for ty in proper {
            let audit = audit_combinatorial(s, ty.m, ty.t).unwrap();
            assert!(audit.all_pass(), "{label} ({},{}): {audit:?}", ty.m, ty.t);
            audited += 1;
        }
    };

    let p4 = plane_of(4);
    audit_all(&trace_arc(&p4, 2).unwrap(), "trace q=4");
    audit_all(&hyperoval(&p4).unwrap(), "hyperoval q=4");
    audit_all(&pencil_minus_vertex(&p4, 0, 2).unwrap(), "pencil q=4");
    audit_all(&collinear_set(&p4, 0, 3).unwrap(), "collinear q=4");
    audit_all(&denniston_maximal_arc(&p4, 2).unwrap(), "maximal arc q=4");

    let p5 = plane_of(5);
    audit_all(&conic_oval(&p5), "conic q=5");
    audit_all(&pencil_minus_vertex(&p5, 0, 3).unwrap(), "pencil q=5");
    audit_all(&collinear_set(&p5, 0, 4).unwrap(), "collinear q=5");

    let p8 = plane_of(8);
    let tr8 = trace_arc(&p8, 2).unwrap();
    audit_all(&tr8, "trace q=8");
    // Neither count is q here, so the zero-secant count must be even.
    let tr8_audit = audit_combinatorial(&tr8, 2, 4).unwrap();
    assert_eq!(tr8_audit.zero_secants_div_p, Some(true));
    audit_all(&hyperoval(&p8).unwrap(), "hyperoval q=8");
    audit_all(&denniston_maximal_arc(&p8, 2).unwrap(), "maximal arc q=8");
    audit_all(&pencil_minus_vertex(&p8, 0, 4).unwrap(), "pencil q=8");
    audit_all(&collinear_set(&p8, 0, 5).unwrap(), "collinear q=8");

    let p9 = plane_of(9);
    let vertex = baer_subplane(&p9).unwrap().support()[0];
    let bp = baer_pencil_arc(&p9, vertex).unwrap();
    audit_all(&bp, "subplane pencil q=9");
    let bp_audit = audit_combinatorial(&bp, 3, 6).unwrap();
    assert!(bp_audit.gcd_divides, "gcd(3,6) must divide 9");
    audit_all(&complement_baer(&p9).unwrap(), "subplane complement q=9");
    audit_all(&hermitian_unital(&p9).unwrap(), "unital q=9");
    audit_all(&collinear_set(&p9, 0, 5).unwrap(), "collinear q=9");
    audit_all(&pencil_minus_vertex(&p9, 0, 4).unwrap(), "pencil q=9");

    let p16 = plane_of(16);
    audit_all(&trace_arc(&p16, 2).unwrap(), "trace q=16 over GF(2)");
    audit_all(&trace_arc(&p16, 4).unwrap(), "trace q=16 over GF(4)");
    audit_all(&denniston_maximal_arc(&p16, 4).unwrap(), "maximal arc q=16");

    assert!(audited >= 20);
    budget(t0, 10, "criterion 8");
}

#[test]
fn criterion_09_puncture_concurrency_and_completion() {
    let t0 = Instant::now();
    let cases: Vec<(PointMultiset, &str, usize)> = {
        let p9 = plane_of(9);
        let p25 = plane_of(25);
        vec![
            (baer_subplane(&p9).unwrap(), "subplane q=9", 4),
            (hermitian_unital(&p9).unwrap(), "unital q=9", 9),
            (baer_subplane(&p25).unwrap(), "subplane q=25", 6),
        ]
    };
    for (whole, label, expect_lines) in cases {
        let removed = whole.support()[0];
        let s = punctured_cmodp(&whole, removed).unwrap();
        let modp = classify_modp(&s).unwrap();
        assert!(
            modp.contains(&ModpType { m: 1, t: 0 }),
            "{label}: puncture should be of pointwise type (1,0), got {modp:?}"
        );
        let (lines, conc) = proper_residue_secants(&s, 0);
        assert_eq!(lines.len(), expect_lines, "{label}: residue-0 secants");
        assert_eq!(
            conc,
            Concurrency::At(removed),
            "{label}: residue-0 secants should meet at the removed point"
        );
        let comps = completion_points(&s, 1, 0).unwrap();
        assert_eq!(
            comps,
            vec![vec![removed]],
            "{label}: the removed point is the unique completion"
        );
    }
    budget(t0, 30, "criterion 9");
}

#[test]
fn criterion_10_gdd_from_two_families() {
    let t0 = Instant::now();

    let p9 = plane_of(9);
    let vertex = baer_subplane(&p9).unwrap().support()[0];
    let bp = baer_pencil_arc(&p9, vertex).unwrap();
    let g = gdd_from_km(&bp, 3, 6).unwrap();
    assert_eq!((g.k, g.group_size), (3, 6));
    assert_eq!(g.points.len(), 24);
    assert_eq!(g.groups.len(), 4);
    assert_eq!(g.blocks.len(), 72);
    assert!(gdd_verify(&g));

    let p8 = plane_of(8);
    let tr = trace_arc(&p8, 2).unwrap();
    let g2 = gdd_from_km(&tr, 2, 4).unwrap();
    assert_eq!((g2.k, g2.group_size), (2, 4));
    assert_eq!(g2.points.len(), 12);
    assert_eq!(g2.groups.len(), 3);
    assert_eq!(g2.blocks.len(), 48);
    assert!(gdd_verify(&g2));

    budget(t0, 1, "criterion 10");
}

#[test]
fn criterion_11_zero_secant_forces_minimal_case() {
    let t0 = Instant::now();
    for &q in &[3u64, 4, 5] {
        let plane = plane_of(q);
        let p = plane.field().p();
        let mut zero_seen = false;
        for c in 1..p {
            let out =
                search(&SearchSpec::new(plane.clone(), SearchMode::Modp { m: c, t: c })).unwrap();
            assert!(out.complete);
            for s in &out.sets {
                let has_zero =
                    (0..plane.num_lines() as u32).any(|l| line_count(s, l) == 0);
                if !has_zero {
                    continue;
                }
                zero_seen = true;
                assert_eq!(
                    c, 1,
                    "q={q}: a skew line forces c=1, support {:?}",
                    s.support()
                );
                assert!(
                    s.size() <= q - p as u64 + 1,
                    "q={q}: skew line bounds the size by q-p+1, support {:?}",
                    s.support()
                );
            }
        }
        assert!(zero_seen, "q={q}: expected at least one solution with a skew line");
    }
    budget(t0, 300, "criterion 11");
}

#[test]
fn criterion_12_sharply_focused_arcs() {
    let t0 = Instant::now();
    for &q in &[4u64, 8] {
        let plane = plane_of(q);
        let found = sharply_focused_search(&plane, 3).unwrap();
        assert!(!found.is_empty(), "q={q}: no sharply focused 3-arcs");
        if q == 8 {
            assert_eq!(found.len(), 56);
        }
        let zero = plane.field().zero();
        for sf in &found {
            assert_eq!(sf.arc.len(), 3);
            assert_eq!(sf.directions.len(), 3, "3-arc focused on 3 directions");

            // Tangents meet at the completion point: the line joining an arc
            // point to it hits the arc exactly once.
            for &a in &sf.arc {
                let l = plane.line_through(a, sf.completion).unwrap();
                let hits = sf.arc.iter().filter(|&&x| plane.incident(x, l)).count();
                assert_eq!(hits, 1, "q={q}: {l} is not a tangent");
            }

            // Adding the completion keeps it an arc and adds no direction.
            let mut four = sf.arc.clone();
            four.push(sf.completion);
            let mut secant_dirs = BTreeSet::new();
            let mut seen_lines = BTreeSet::new();
            for i in 0..four.len() {
                for j in 0..i {
                    let l = plane.line_through(four[i], four[j]).unwrap();
                    assert!(seen_lines.insert(l), "q={q}: three of {four:?} collinear");
                    let dir = plane
                        .points_on_line(l)
                        .iter()
                        .copied()
                        .find(|&pt| plane.point(pt)[0] == zero)
                        .expect("affine secant meets the far line");
                    secant_dirs.insert(dir);
                }
            }
            let listed: BTreeSet<u32> = sf.directions.iter().copied().collect();
            assert_eq!(secant_dirs, listed, "q={q}: extended arc changes directions");

            // The union with the direction set is even through every point.
            let modp = classify_modp(&sf.union_set).unwrap();
            assert!(
                modp.contains(&ModpType { m: 1, t: 0 }),
                "q={q}: union should be of pointwise type (1,0), got {modp:?}"
            );
        }
    }
    budget(t0, 60, "criterion 12");
}

#[test]
fn criterion_13_parameter_quote_check() {
    let t0 = Instant::now();
    let m = mason_parameter_check(3, 2, 1).unwrap();
    assert_eq!(m.q, 9);
    assert_eq!(m.m, 6);
    assert_eq!(m.quoted_t, 4);
    assert_eq!(m.km_t, 3);
    assert!(!m.quoted_matches_km, "the quoted t differs from the one the size forces");
    assert_eq!(m.size, 48);
    assert_eq!(m.size, m.q * (m.m - 1) + m.km_t);
    assert_eq!(m.zero_secants, 3);
    assert_eq!(m.t_secant_count, Some(16));
    assert_eq!(m.t_secant_count, Some(2 * (m.q - 1)));
    budget(t0, 1, "criterion 13");
}
