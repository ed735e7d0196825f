//! Exhaustive DFS searches for two-intersection structures in small planes.
//!
//! Both engines decide points in index order and keep per-line running
//! counts. Exact mode prunes a branch as soon as some line can no longer
//! close on a count in {0, m, t}; mod-p mode checks residues as lines
//! finalize and tracks each support point's single permitted t-residue
//! line. Every candidate that survives to a leaf is re-verified through
//! the classifiers before being emitted, and results are returned in
//! set-lexicographic bitset order regardless of worker scheduling.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, Concurrency, PointMultiset};
use crate::constructions;
use crate::gf::Fe;
use crate::plane::{Bitset, Plane};

const EXACT_CEILING: u32 = 9;
const EXACT_ALL_CEILING: u32 = 8;
const MODP_CEILING: u32 = 9;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("plane order {0} exceeds the search ceiling {1}")]
    OrderTooLarge(u32, u32),
    #[error("bad search parameters: {0}")]
    BadParameters(&'static str),
    #[error("projectivity matrix is singular")]
    SingularMatrix,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Proper sets of size q(m-1)+t meeting every line in 0, m, or t points.
    Exact { m: u32, t: u32 },
    /// Every exact pair surviving the arithmetic screens.
    ExactAll,
    /// Proper sets where each support point lies on exactly one line with
    /// count ≡ t and q lines with count ≡ m (mod p); for m = t, all q+1.
    Modp { m: u32, t: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_solutions: usize,
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_solutions: usize::MAX, node_budget: u64::MAX, time_budget: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dedupe {
    #[default]
    None,
    Orbit,
}

#[derive(Clone)]
pub struct SearchSpec {
    pub plane: Arc<Plane>,
    pub mode: SearchMode,
    pub limits: SearchLimits,
    pub dedupe: Dedupe,
    /// Worker threads; 0 uses the global pool default.
    pub jobs: usize,
}

impl SearchSpec {
    pub fn new(plane: Arc<Plane>, mode: SearchMode) -> Self {
        SearchSpec { plane, mode, limits: SearchLimits::default(), dedupe: Dedupe::None, jobs: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub sets: Vec<PointMultiset>,
    pub nodes: u64,
    /// False when a budget or the solution cap cut the walk short.
    pub complete: bool,
}

/// Ordered (m, t) pairs with 1 ≤ m, t ≤ q+1 passing the screens every
/// proper set of size q(m-1)+t with line counts in {0, m, t} must satisfy:
/// the size fits in the plane, gcd(m, t) | q, t | q(m-1), and m | q(q-t).
pub fn exact_candidate_pairs(q: u32) -> Vec<(u32, u32)> {
    let qi = q as i64;
    let mut out = Vec::new();
    for m in 1..=q + 1 {
        for t in 1..=q + 1 {
            let size = q as u64 * (m as u64 - 1) + t as u64;
            if size > (q * q + q) as u64 {
                continue;
            }
            if q % gcd(m, t) != 0 {
                continue;
            }
            if (qi * (m as i64 - 1)) % t as i64 != 0 {
                continue;
            }
            if (qi * (qi - t as i64)).rem_euclid(m as i64) != 0 {
                continue;
            }
            out.push((m, t));
        }
    }
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn search(spec: &SearchSpec) -> Result<SearchOutcome, SearchError> {
    match spec.mode {
        SearchMode::Exact { .. } | SearchMode::ExactAll => search_exact(spec),
        SearchMode::Modp { .. } => search_modp(spec),
    }
}

pub fn search_exact(spec: &SearchSpec) -> Result<SearchOutcome, SearchError> {
    check_limits(&spec.limits)?;
    let q = spec.plane.order();
    let pairs = match spec.mode {
        SearchMode::Exact { m, t } => {
            if q > EXACT_CEILING {
                return Err(SearchError::OrderTooLarge(q, EXACT_CEILING));
            }
            if m < 1 || m > q + 1 || t < 1 || t > q + 1 {
                return Err(SearchError::BadParameters("exact parameters must lie in [1, q+1]"));
            }
            vec![(m, t)]
        }
        SearchMode::ExactAll => {
            if q > EXACT_ALL_CEILING {
                return Err(SearchError::OrderTooLarge(q, EXACT_ALL_CEILING));
            }
            exact_candidate_pairs(q)
        }
        SearchMode::Modp { .. } => {
            return Err(SearchError::BadParameters("mod-p mode belongs to search_modp"))
        }
    };
    let ctl = Ctl::new(&spec.limits);
    let n = spec.plane.num_points() as u64;
    let mut sets = Vec::new();
    for (m, t) in pairs {
        let target = q as u64 * (m as u64 - 1) + t as u64;
        if target == 0 || target >= n {
            continue;
        }
        if ctl.stop.load(Ordering::Relaxed) {
            break;
        }
        sets.extend(run(ExactWalker::new(&spec.plane, m, t), &ctl, spec.jobs));
    }
    Ok(finish(sets, &ctl, spec))
}

pub fn search_modp(spec: &SearchSpec) -> Result<SearchOutcome, SearchError> {
    check_limits(&spec.limits)?;
    let SearchMode::Modp { m, t } = spec.mode else {
        return Err(SearchError::BadParameters("exact modes belong to search_exact"));
    };
    let q = spec.plane.order();
    if q > MODP_CEILING {
        return Err(SearchError::OrderTooLarge(q, MODP_CEILING));
    }
    let p = spec.plane.field().p();
    if m >= p || t >= p {
        return Err(SearchError::BadParameters("mod-p residues must lie in [0, p)"));
    }
    let ctl = Ctl::new(&spec.limits);
    let sets = run(ModpWalker::new(&spec.plane, m, t), &ctl, spec.jobs);
    Ok(finish(sets, &ctl, spec))
}

fn check_limits(l: &SearchLimits) -> Result<(), SearchError> {
    if l.max_solutions == 0 || l.node_budget == 0 || l.time_budget.is_some_and(|d| d.is_zero()) {
        return Err(SearchError::BadParameters("limits must be positive"));
    }
    Ok(())
}

fn finish(mut sets: Vec<PointMultiset>, ctl: &Ctl, spec: &SearchSpec) -> SearchOutcome {
    if spec.dedupe == Dedupe::Orbit {
        sets = orbit_dedupe(&sets);
    }
    sets.sort_by_cached_key(|s| s.support_bits());
    sets.dedup();
    if sets.len() > spec.limits.max_solutions {
        sets.truncate(spec.limits.max_solutions);
    }
    SearchOutcome {
        sets,
        nodes: ctl.nodes.load(Ordering::Relaxed),
        complete: !ctl.stop.load(Ordering::Relaxed),
    }
}

struct Ctl {
    nodes: AtomicU64,
    stop: AtomicBool,
    found: AtomicUsize,
    node_budget: u64,
    max_solutions: usize,
    deadline: Option<Instant>,
}

impl Ctl {
    fn new(limits: &SearchLimits) -> Ctl {
        Ctl {
            nodes: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            found: AtomicUsize::new(0),
            node_budget: limits.node_budget,
            max_solutions: limits.max_solutions,
            deadline: limits.time_budget.map(|d| Instant::now() + d),
        }
    }

    /// Fold a worker's pending node count into the shared total and report
    /// whether the walk must stop.
    fn flush(&self, pending: u64) -> bool {
        let total = self.nodes.fetch_add(pending, Ordering::Relaxed) + pending;
        if total >= self.node_budget || self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop.store(true, Ordering::Relaxed);
        }
        self.stop.load(Ordering::Relaxed)
    }

    fn record_solution(&self) {
        if self.found.fetch_add(1, Ordering::Relaxed) + 1 >= self.max_solutions {
            self.stop.store(true, Ordering::Relaxed);
        }
    }
}

const FLUSH_EVERY: u64 = 1024;

struct Tally<'c> {
    ctl: &'c Ctl,
    pending: u64,
    stopped: bool,
}

impl<'c> Tally<'c> {
    fn new(ctl: &'c Ctl) -> Self {
        Tally { ctl, pending: 0, stopped: ctl.stop.load(Ordering::Relaxed) }
    }

    fn step(&mut self) -> bool {
        self.pending += 1;
        if self.pending >= FLUSH_EVERY {
            self.stopped = self.ctl.flush(self.pending);
            self.pending = 0;
        }
        self.stopped
    }
}

impl Drop for Tally<'_> {
    fn drop(&mut self) {
        self.ctl.flush(self.pending);
    }
}

/// One binary-decision search state. `decide` commits the next undecided
/// point and reports whether the branch stays feasible; it must be undone
/// with `undo` either way.
trait Walker: Clone + Send + Sync {
    fn total(&self) -> u32;
    fn depth(&self) -> u32;
    fn decide(&mut self, include: bool) -> bool;
    fn undo(&mut self, include: bool);
    fn leaf(&self) -> Option<PointMultiset>;
}

fn dfs<W: Walker>(w: &mut W, tally: &mut Tally<'_>, out: &mut Vec<PointMultiset>) {
    if tally.step() {
        return;
    }
    if w.depth() == w.total() {
        if let Some(sol) = w.leaf() {
            out.push(sol);
            tally.ctl.record_solution();
        }
        return;
    }
    for include in [true, false] {
        if w.decide(include) {
            dfs(w, tally, out);
        }
        w.undo(include);
        if tally.stopped {
            return;
        }
    }
}

/// Split on the first few points and walk the branches in parallel.
fn run<W: Walker>(root: W, ctl: &Ctl, jobs: usize) -> Vec<PointMultiset> {
    let prefix = root.total().min(8);
    let body = || {
        (0u32..1 << prefix)
            .into_par_iter()
            .map(|mask| {
                let mut w = root.clone();
                let mut tally = Tally::new(ctl);
                let mut out = Vec::new();
                let mut live = true;
                for step in 0..prefix {
                    if tally.step() || !w.decide(mask >> step & 1 == 1) {
                        live = false;
                        break;
                    }
                }
                if live {
                    dfs(&mut w, &mut tally, &mut out);
                }
                out
            })
            .reduce(Vec::new, |mut a, mut b| {
                a.append(&mut b);
                a
            })
    };
    match jobs {
        0 => body(),
        j => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .expect("worker pool")
            .install(body),
    }
}

#[derive(Clone)]
struct ExactWalker {
    plane: Arc<Plane>,
    m: u32,
    t: u32,
    target: u64,
    counts: Vec<u32>,
    undecided: Vec<u32>,
    included: Vec<u32>,
    depth: u32,
    n: u32,
}

impl ExactWalker {
    fn new(plane: &Arc<Plane>, m: u32, t: u32) -> ExactWalker {
        let q = plane.order();
        ExactWalker {
            plane: plane.clone(),
            m,
            t,
            target: q as u64 * (m as u64 - 1) + t as u64,
            counts: vec![0; plane.num_lines()],
            undecided: vec![q + 1; plane.num_lines()],
            included: Vec::new(),
            depth: 0,
            n: plane.num_points() as u32,
        }
    }

    /// Some final count in {0, m, t} must stay reachable on the line.
    fn line_ok(&self, l: usize) -> bool {
        let c = self.counts[l];
        let top = c + self.undecided[l];
        c == 0 || (c <= self.m && self.m <= top) || (c <= self.t && self.t <= top)
    }
}

impl Walker for ExactWalker {
    fn total(&self) -> u32 {
        self.n
    }

    fn depth(&self) -> u32 {
        self.depth
    }

    fn decide(&mut self, include: bool) -> bool {
        let pt = self.depth;
        self.depth += 1;
        if include {
            self.included.push(pt);
        }
        for &l in self.plane.lines_through(pt) {
            self.undecided[l as usize] -= 1;
            if include {
                self.counts[l as usize] += 1;
            }
        }
        let chosen = self.included.len() as u64;
        chosen <= self.target
            && chosen + (self.n - self.depth) as u64 >= self.target
            && self.plane.lines_through(pt).iter().all(|&l| self.line_ok(l as usize))
    }

    fn undo(&mut self, include: bool) {
        self.depth -= 1;
        let pt = self.depth;
        for &l in self.plane.lines_through(pt) {
            self.undecided[l as usize] += 1;
            if include {
                self.counts[l as usize] -= 1;
            }
        }
        if include {
            self.included.pop();
        }
    }

    fn leaf(&self) -> Option<PointMultiset> {
        debug_assert_eq!(self.included.len() as u64, self.target);
        let s = PointMultiset::from_indices(self.plane.clone(), &self.included);
        let types = analysis::classify_exact(&s).ok()?;
        types.iter().any(|ty| ty.m == self.m && ty.t == self.t).then_some(s)
    }
}

#[derive(Clone)]
struct ModpWalker {
    plane: Arc<Plane>,
    p: u32,
    m: u32,
    t: u32,
    lo: u64,
    hi: u64,
    counts: Vec<u32>,
    undecided: Vec<u32>,
    in_set: Vec<bool>,
    t_seen: Vec<u32>,
    included: Vec<u32>,
    depth: u32,
    n: u32,
}

impl ModpWalker {
    fn new(plane: &Arc<Plane>, m: u32, t: u32) -> ModpWalker {
        let q = plane.order();
        let p = plane.field().p();
        let n = plane.num_points() as u32;
        // When a residue class admits a single count value in [1, q+1], the
        // support size is forced by any one point's pencil.
        let forced = |v: u32| v >= 1 && v + p > q + 1;
        let (lo, hi) = if m == t && forced(m) {
            let s = 1 + (q as u64 + 1) * (m as u64 - 1);
            (s, s)
        } else if m != t && forced(m) && forced(t) {
            let s = q as u64 * (m as u64 - 1) + t as u64;
            (s, s)
        } else {
            (1, n as u64 - 1)
        };
        ModpWalker {
            plane: plane.clone(),
            p,
            m,
            t,
            lo,
            hi: hi.min(n as u64 - 1),
            counts: vec![0; plane.num_lines()],
            undecided: vec![q + 1; plane.num_lines()],
            in_set: vec![false; n as usize],
            t_seen: vec![0; n as usize],
            included: Vec::new(),
            depth: 0,
            n,
        }
    }

    /// A populated line must still be able to close on residue m or t.
    fn residue_ok(&self, c: u32, undecided: u32) -> bool {
        if undecided >= self.p - 1 {
            return true;
        }
        (0..=undecided).any(|d| {
            let r = (c + d) % self.p;
            r == self.m || r == self.t
        })
    }

    /// Check a fully decided line and burn t-slots of its support points.
    fn finalize(&mut self, l: usize) -> bool {
        let r = self.counts[l] % self.p;
        if r == self.m {
            return true;
        }
        if self.m != self.t && r == self.t {
            let mut ok = true;
            let plane = self.plane.clone();
            for &pt in plane.points_on_line(l as u32) {
                if self.in_set[pt as usize] {
                    self.t_seen[pt as usize] += 1;
                    ok &= self.t_seen[pt as usize] <= 1;
                }
            }
            return ok;
        }
        false
    }
}

impl Walker for ModpWalker {
    fn total(&self) -> u32 {
        self.n
    }

    fn depth(&self) -> u32 {
        self.depth
    }

    fn decide(&mut self, include: bool) -> bool {
        let pt = self.depth;
        self.depth += 1;
        if include {
            self.included.push(pt);
            self.in_set[pt as usize] = true;
        }
        let mut ok = true;
        let plane = self.plane.clone();
        for &l in plane.lines_through(pt) {
            let l = l as usize;
            self.undecided[l] -= 1;
            if include {
                self.counts[l] += 1;
            }
            let c = self.counts[l];
            if c == 0 {
                continue;
            }
            if self.undecided[l] == 0 {
                ok &= self.finalize(l);
            } else {
                ok &= self.residue_ok(c, self.undecided[l]);
            }
        }
        let chosen = self.included.len() as u64;
        ok && chosen <= self.hi && chosen + (self.n - self.depth) as u64 >= self.lo
    }

    fn undo(&mut self, include: bool) {
        self.depth -= 1;
        let pt = self.depth;
        let plane = self.plane.clone();
        for &l in plane.lines_through(pt) {
            let l = l as usize;
            if self.undecided[l] == 0 {
                let c = self.counts[l];
                if c > 0 && self.m != self.t && c % self.p == self.t {
                    for &r in plane.points_on_line(l as u32) {
                        if self.in_set[r as usize] {
                            self.t_seen[r as usize] -= 1;
                        }
                    }
                }
            }
            self.undecided[l] += 1;
            if include {
                self.counts[l] -= 1;
            }
        }
        if include {
            self.included.pop();
            self.in_set[pt as usize] = false;
        }
    }

    fn leaf(&self) -> Option<PointMultiset> {
        let chosen = self.included.len() as u64;
        if chosen == 0 || chosen >= self.n as u64 {
            return None;
        }
        if self.m != self.t && self.included.iter().any(|&pt| self.t_seen[pt as usize] != 1) {
            return None;
        }
        let s = PointMultiset::from_indices(self.plane.clone(), &self.included);
        let verdicts = analysis::classify_modp(&s).ok()?;
        verdicts.iter().any(|v| v.m == self.m && v.t == self.t).then_some(s)
    }
}

pub type Projectivity = [[Fe; 3]; 3];

pub fn projectivity_group_order(q: u64) -> u64 {
    q * q * q * (q * q * q - 1) * (q * q - 1)
}

/// Generators of the projectivity group: a shear, two coordinate
/// permutations, and a one-axis scaling by a multiplicative generator.
pub fn projectivity_generators(plane: &Plane) -> Vec<Projectivity> {
    let f = plane.field();
    let (z, o, g) = (f.zero(), f.one(), f.generator());
    vec![
        [[o, o, z], [z, o, z], [z, z, o]],
        [[z, o, z], [o, z, z], [z, z, o]],
        [[z, z, o], [o, z, z], [z, o, z]],
        [[g, z, z], [z, o, z], [z, z, o]],
    ]
}

fn det3(plane: &Plane, m: &Projectivity) -> Fe {
    let f = plane.field();
    let term = |r: usize, s: usize, u: usize| f.mul(m[0][r], f.mul(m[1][s], m[2][u]));
    let pos = f.add(f.add(term(0, 1, 2), term(1, 2, 0)), term(2, 0, 1));
    let neg = f.add(f.add(term(2, 1, 0), term(0, 2, 1)), term(1, 0, 2));
    f.sub(pos, neg)
}

fn point_map(plane: &Plane, mat: &Projectivity) -> Vec<u32> {
    let f = plane.field();
    (0..plane.num_points() as u32)
        .map(|pt| {
            let c = plane.point(pt);
            let img = [0, 1, 2].map(|r| {
                f.add(f.add(f.mul(mat[r][0], c[0]), f.mul(mat[r][1], c[1])), f.mul(mat[r][2], c[2]))
            });
            plane.index_of_point(img)
        })
        .collect()
}

pub fn apply_projectivity(s: &PointMultiset, mat: &Projectivity) -> Result<PointMultiset, SearchError> {
    let plane = s.plane().clone();
    if det3(&plane, mat) == plane.field().zero() {
        return Err(SearchError::SingularMatrix);
    }
    let map = point_map(&plane, mat);
    let mut out = PointMultiset::empty(plane);
    for (pt, &mu) in s.multiplicities().iter().enumerate() {
        if mu > 0 {
            out.set_multiplicity(map[pt], mu)?;
        }
    }
    Ok(out)
}

fn multiset_from(plane: Arc<Plane>, mult: &[u32]) -> PointMultiset {
    let mut out = PointMultiset::empty(plane);
    for (pt, &mu) in mult.iter().enumerate() {
        if mu > 0 {
            out.set_multiplicity(pt as u32, mu).expect("orbit member multiplicity");
        }
    }
    out
}

fn support_of(mult: &[u32]) -> Bitset {
    let idx: Vec<u32> =
        mult.iter().enumerate().filter(|(_, &m)| m > 0).map(|(i, _)| i as u32).collect();
    Bitset::from_indices(mult.len(), &idx)
}

/// Collapse each projectivity orbit to its set-lexicographically least
/// member, computed by breadth-first closure under the generator action.
pub fn orbit_dedupe(sets: &[PointMultiset]) -> Vec<PointMultiset> {
    let Some(first) = sets.first() else {
        return Vec::new();
    };
    let plane = first.plane().clone();
    let maps: Vec<Vec<u32>> =
        projectivity_generators(&plane).iter().map(|g| point_map(&plane, g)).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut reps = Vec::new();
    for s in sets {
        let key = s.multiplicities().to_vec();
        if !seen.insert(key.clone()) {
            continue;
        }
        let mut members = vec![key.clone()];
        let mut queue = VecDeque::from([key]);
        while let Some(cur) = queue.pop_front() {
            for map in &maps {
                let mut img = vec![0u32; cur.len()];
                for (pt, &mu) in cur.iter().enumerate() {
                    if mu > 0 {
                        img[map[pt] as usize] = mu;
                    }
                }
                if seen.insert(img.clone()) {
                    members.push(img.clone());
                    queue.push_back(img);
                }
            }
        }
        let best = members
            .into_iter()
            .map(|mv| (support_of(&mv), mv))
            .min()
            .expect("orbit is nonempty");
        reps.push(multiset_from(plane.clone(), &best.1));
    }
    reps
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    FullLine,
    Collinear,
    ComplementOfPoint,
    Oval,
    Hyperoval,
    Unital,
    PencilMinusVertex,
    ComplementOfBaer,
    BaerPencil,
    Trace,
    PuncturedMaximalArc,
    MaximalArc,
    Other,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::FullLine => "full-line",
            Family::Collinear => "collinear",
            Family::ComplementOfPoint => "complement-of-point",
            Family::Oval => "oval",
            Family::Hyperoval => "hyperoval",
            Family::Unital => "unital",
            Family::PencilMinusVertex => "pencil-minus-vertex",
            Family::ComplementOfBaer => "complement-of-baer",
            Family::BaerPencil => "baer-pencil",
            Family::Trace => "trace",
            Family::PuncturedMaximalArc => "punctured-maximal-arc",
            Family::MaximalArc => "maximal-arc",
            Family::Other => "other",
        }
    }

    /// Whether the family belongs to the ever-present catalog: subsets of a
    /// line, pencils, ovals, unitals, maximal arcs with at most one point
    /// removed, and complements of a point or of an order-√q subplane.
    /// Matches outside this catalog are the structurally interesting ones.
    pub fn is_trivial(self) -> bool {
        !matches!(self, Family::BaerPencil | Family::Trace | Family::Other)
    }
}

#[derive(Clone, Debug)]
pub struct FamilyMatch {
    pub family: Family,
    pub params: Vec<(&'static str, u64)>,
}

fn exact_sqrt(q: u32) -> Option<u32> {
    let r = (q as f64).sqrt().round() as u32;
    (r * r == q).then_some(r)
}

/// Name a proper two-intersection set by structure tests, first match wins.
/// The catalog order puts the most specific shapes first, so a set matching
/// several descriptions gets the earliest one.
pub fn match_family(s: &PointMultiset) -> Result<FamilyMatch, SearchError> {
    let types = analysis::classify_exact(s)?;
    if types.is_empty() {
        return Err(SearchError::BadParameters("not an exact two-intersection arc"));
    }
    let plane = s.plane().clone();
    let q = plane.order();
    let n = plane.num_points() as u64;
    let k = s.size();
    let counts = analysis::line_counts(s);
    let hit = |family, params| Ok(FamilyMatch { family, params });

    if let Some(l) = (0..counts.len()).find(|&l| counts[l] as u64 == k) {
        return if k == (q + 1) as u64 {
            hit(Family::FullLine, vec![("line", l as u64)])
        } else {
            hit(Family::Collinear, vec![("line", l as u64), ("t", k)])
        };
    }
    if k == n - 1 {
        let pt = (0..plane.num_points() as u32)
            .find(|&p| s.multiplicity(p) == 0)
            .expect("proper set misses a point");
        return hit(Family::ComplementOfPoint, vec![("point", pt as u64)]);
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    if max == 2 && k == (q + 1) as u64 {
        return hit(Family::Oval, vec![]);
    }
    if max == 2 && k == (q + 2) as u64 {
        return hit(Family::Hyperoval, vec![]);
    }
    if let Some(r) = exact_sqrt(q) {
        if k == (q * r + 1) as u64 && counts.iter().all(|&c| c == 1 || c == r + 1) {
            return hit(Family::Unital, vec![("order", r as u64)]);
        }
    }
    let q_lines: Vec<u32> =
        (0..counts.len() as u32).filter(|&l| counts[l as usize] == q).collect();
    if q_lines.len() >= 2 && k == q as u64 * q_lines.len() as u64 {
        if let Concurrency::At(v) = analysis::concurrency_of(&plane, &q_lines) {
            if s.multiplicity(v) == 0 {
                let mut union = Bitset::new(plane.num_points());
                for &l in &q_lines {
                    for &pt in plane.points_on_line(l) {
                        union.set(pt as usize);
                    }
                }
                union.clear(v as usize);
                if union == s.support_bits() {
                    return hit(
                        Family::PencilMinusVertex,
                        vec![("m", q_lines.len() as u64), ("vertex", v as u64)],
                    );
                }
            }
        }
    }
    if let Some(r) = exact_sqrt(q) {
        if k == n - (q + r + 1) as u64
            && counts.iter().all(|&c| q + 1 - c == 1 || q + 1 - c == r + 1)
        {
            return hit(Family::ComplementOfBaer, vec![("order", r as u64)]);
        }
        if k == ((r + 1) * (q - r)) as u64 {
            if let Ok(sub) = constructions::baer_subplane(&plane) {
                for v in sub.support() {
                    if constructions::baer_pencil_arc(&plane, v).is_ok_and(|cand| cand == *s) {
                        return hit(Family::BaerPencil, vec![("vertex", v as u64)]);
                    }
                }
            }
        }
    }
    let f = plane.field();
    for d in 1..f.degree() {
        if f.degree() % d == 0 {
            let q0 = (f.p() as u64).pow(d);
            if constructions::trace_arc(&plane, q0).is_ok_and(|cand| cand == *s) {
                return hit(Family::Trace, vec![("subfield", q0)]);
            }
        }
    }
    if max >= 2
        && counts.iter().all(|&c| c == 0 || c == max || c == max - 1)
        && k == q as u64 * (max as u64 - 1) + max as u64 - 1
    {
        let short: Vec<u32> =
            (0..counts.len() as u32).filter(|&l| counts[l as usize] == max - 1).collect();
        if short.len() == (q + 1) as usize {
            if let Concurrency::At(v) = analysis::concurrency_of(&plane, &short) {
                if s.multiplicity(v) == 0 {
                    return hit(
                        Family::PuncturedMaximalArc,
                        vec![("degree", max as u64), ("point", v as u64)],
                    );
                }
            }
        }
    }
    if counts.iter().all(|&c| c == 0 || c == max) && k == q as u64 * (max as u64 - 1) + max as u64 {
        return hit(Family::MaximalArc, vec![("degree", max as u64)]);
    }
    hit(Family::Other, vec![])
}
