//! Line-intersection analysis of point multisets: spectra, exact and mod-p type
//! classification, per-point residue profiles, renitent-line trichotomy, and the
//! counting identities that constrain two-intersection parameters.

use crate::plane::{Bitset, Plane};
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("support is empty")]
    EmptySupport,
    #[error("support is the whole plane; a proper subset is required")]
    FullSupport,
    #[error("operation requires a set; input has a multiplicity above 1")]
    NotASet,
    #[error("multiplicity {0} exceeds the cap {1}")]
    MultiplicityCap(u32, u32),
    #[error("point multisets live on different planes")]
    PlaneMismatch,
    #[error("point {0} is not in the support")]
    PointNotInSupport(u32),
    #[error("set does not have exact type ({0},{1})")]
    TypeNotSatisfied(u32, u32),
    #[error("set does not have mod-p type ({0},{1})")]
    ModpTypeNotSatisfied(u32, u32),
    #[error("parameters m and t must differ")]
    EqualParameters,
}

/// A multiset of points of a fixed plane, stored as per-point multiplicities.
#[derive(Clone)]
pub struct PointMultiset {
    plane: Arc<Plane>,
    mult: Vec<u32>,
    size: u64,
    cap: u32,
}

impl PartialEq for PointMultiset {
    fn eq(&self, other: &Self) -> bool {
        self.plane.order() == other.plane.order() && self.mult == other.mult
    }
}
impl Eq for PointMultiset {}

impl std::fmt::Debug for PointMultiset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PointMultiset(q={}, size={})", self.plane.order(), self.size)
    }
}

impl PointMultiset {
    pub fn empty(plane: Arc<Plane>) -> Self {
        let n = plane.num_points();
        let cap = plane.order();
        PointMultiset { plane, mult: vec![0; n], size: 0, cap }
    }

    pub fn from_indices(plane: Arc<Plane>, idx: &[u32]) -> Self {
        let mut s = PointMultiset::empty(plane);
        for &i in idx {
            s.mult[i as usize] = 1;
        }
        s.size = s.mult.iter().map(|&m| m as u64).sum();
        s
    }

    pub fn plane(&self) -> &Arc<Plane> {
        &self.plane
    }

    pub fn multiplicity(&self, point: u32) -> u32 {
        self.mult[point as usize]
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// Total size counted with multiplicity.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn set_multiplicity(&mut self, point: u32, m: u32) -> Result<(), AnalysisError> {
        if m > self.cap {
            return Err(AnalysisError::MultiplicityCap(m, self.cap));
        }
        let old = self.mult[point as usize];
        self.mult[point as usize] = m;
        self.size = self.size + m as u64 - old as u64;
        Ok(())
    }

    pub fn insert(&mut self, point: u32) -> Result<(), AnalysisError> {
        self.set_multiplicity(point, self.multiplicity(point) + 1)
    }

    pub fn support(&self) -> Vec<u32> {
        (0..self.mult.len() as u32).filter(|&i| self.mult[i as usize] > 0).collect()
    }

    pub fn support_bits(&self) -> Bitset {
        let mut b = Bitset::new(self.mult.len());
        for (i, &m) in self.mult.iter().enumerate() {
            if m > 0 {
                b.set(i);
            }
        }
        b
    }

    pub fn support_size(&self) -> usize {
        self.mult.iter().filter(|&&m| m > 0).count()
    }

    pub fn is_set(&self) -> bool {
        self.mult.iter().all(|&m| m <= 1)
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Non-empty and misses at least one point.
    pub fn is_proper(&self) -> bool {
        let sup = self.support_size();
        sup > 0 && sup < self.plane.num_points()
    }

    /// Copy with one point deleted entirely (all its multiplicity).
    pub fn without(&self, point: u32) -> Self {
        let mut s = self.clone();
        let old = s.mult[point as usize];
        s.mult[point as usize] = 0;
        s.size -= old as u64;
        s
    }

    /// Multiset sum.
    pub fn sum(&self, other: &PointMultiset) -> Result<Self, AnalysisError> {
        if self.plane.order() != other.plane.order() {
            return Err(AnalysisError::PlaneMismatch);
        }
        let mut s = self.clone();
        for (i, &m) in other.mult.iter().enumerate() {
            let tot = s.mult[i] + m;
            if tot > s.cap {
                return Err(AnalysisError::MultiplicityCap(tot, s.cap));
            }
            s.mult[i] = tot;
        }
        s.size += other.size;
        Ok(s)
    }
}

/// Intersection number of one line, counted with multiplicity.
pub fn line_count(s: &PointMultiset, line: u32) -> u32 {
    s.plane()
        .points_on_line(line)
        .iter()
        .map(|&p| s.multiplicity(p))
        .sum()
}

/// Intersection numbers of every line.
pub fn line_counts(s: &PointMultiset) -> Vec<u32> {
    (0..s.plane().num_lines() as u32).map(|l| line_count(s, l)).collect()
}

/// The multiset {| |l ∩ S| : l a line |} as a count-indexed tally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub tau: BTreeMap<u32, u32>,
    q: u32,
    size: u64,
    is_set: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectrumIdentities {
    /// Σ τ_i = q² + q + 1.
    pub line_total: bool,
    /// Σ i·τ_i = (q+1)·|S|.
    pub incidence_total: bool,
    /// Σ i(i−1)·τ_i = |S|(|S|−1); only defined for sets.
    pub pair_total: Option<bool>,
}

impl Spectrum {
    pub fn identities(&self) -> SpectrumIdentities {
        let q = self.q as u64;
        let lines: u64 = self.tau.values().map(|&c| c as u64).sum();
        let inc: u64 = self.tau.iter().map(|(&i, &c)| i as u64 * c as u64).sum();
        let pairs: u64 = self
            .tau
            .iter()
            .map(|(&i, &c)| i as u64 * (i as u64).saturating_sub(1) * c as u64)
            .sum();
        SpectrumIdentities {
            line_total: lines == q * q + q + 1,
            incidence_total: inc == (q + 1) * self.size,
            pair_total: self
                .is_set
                .then(|| pairs == self.size * self.size.saturating_sub(1)),
        }
    }

    /// Number of lines whose intersection count is not congruent to k mod p.
    pub fn lines_not_congruent(&self, k: u32, p: u32) -> u32 {
        self.tau
            .iter()
            .filter(|(&i, _)| i % p != k % p)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn count(&self, i: u32) -> u32 {
        self.tau.get(&i).copied().unwrap_or(0)
    }

    /// Distinct nonzero intersection sizes.
    pub fn realized(&self) -> Vec<u32> {
        self.tau.keys().copied().filter(|&i| i > 0).collect()
    }
}

pub fn spectrum(s: &PointMultiset) -> Spectrum {
    let mut tau = BTreeMap::new();
    for c in line_counts(s) {
        *tau.entry(c).or_insert(0) += 1;
    }
    let sp = Spectrum { tau, q: s.plane().order(), size: s.size(), is_set: s.is_set() };
    debug_assert!({
        let id = sp.identities();
        id.line_total && id.incidence_total && id.pair_total != Some(false)
    });
    sp
}

/// An exact two-intersection verdict: every line meets S in 0, m or t points
/// and |S| = q(m−1)+t. `degenerate` marks a verdict with an unrealized class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactType {
    pub m: u32,
    pub t: u32,
    pub degenerate: bool,
}

fn require_proper(s: &PointMultiset) -> Result<(), AnalysisError> {
    if s.is_empty() {
        return Err(AnalysisError::EmptySupport);
    }
    if !s.is_proper() {
        return Err(AnalysisError::FullSupport);
    }
    Ok(())
}

/// All ordered pairs (m,t), 1 ≤ m,t ≤ q+1, under which S is an exact
/// generalized two-intersection arc. Input must be a proper nonempty set.
pub fn classify_exact(s: &PointMultiset) -> Result<Vec<ExactType>, AnalysisError> {
    require_proper(s)?;
    if !s.is_set() {
        return Err(AnalysisError::NotASet);
    }
    let q = s.plane().order() as u64;
    let sp = spectrum(s);
    let realized = sp.realized();
    let mut out = Vec::new();
    for m in 1..=q as u32 + 1 {
        for t in 1..=q as u32 + 1 {
            if q * (m as u64 - 1) + t as u64 != s.size() {
                continue;
            }
            if realized.iter().all(|&r| r == m || r == t) {
                let degenerate = !realized.contains(&m) || !realized.contains(&t);
                out.push(ExactType { m, t, degenerate });
            }
        }
    }
    Ok(out)
}

/// A mod-p two-intersection verdict: every support point lies on exactly one
/// line with count ≡ t and q lines with count ≡ m (mod p); for m = t, all
/// q+1 lines are ≡ m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModpType {
    pub m: u32,
    pub t: u32,
}

fn residue_hist(s: &PointMultiset, counts: &[u32], point: u32) -> Vec<u32> {
    let p = s.plane().field().p();
    let mut hist = vec![0u32; p as usize];
    for &l in s.plane().lines_through(point) {
        hist[(counts[l as usize] % p) as usize] += 1;
    }
    hist
}

/// All ordered pairs (m,t) in [0,p)² under which S is a mod-p arc.
/// Multiplicities participate in the counts.
pub fn classify_modp(s: &PointMultiset) -> Result<Vec<ModpType>, AnalysisError> {
    require_proper(s)?;
    let p = s.plane().field().p();
    let q = s.plane().order();
    let counts = line_counts(s);
    let hists: Vec<Vec<u32>> =
        s.support().iter().map(|&pt| residue_hist(s, &counts, pt)).collect();
    let mut out = Vec::new();
    for m in 0..p {
        for t in 0..p {
            let ok = hists.iter().all(|h| {
                if m == t {
                    h[m as usize] == q + 1
                } else {
                    h[t as usize] == 1 && h[m as usize] == q
                }
            });
            if ok {
                out.push(ModpType { m, t });
            }
        }
    }
    Ok(out)
}

/// Residue shape of the pencil through one support point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointProfile {
    /// One line ≡ t, the remaining q lines ≡ m (mod p), t ≠ m.
    Regular { m: u32, t: u32, renitent_line: u32 },
    /// All q+1 lines share one residue.
    Irregular { m: u32 },
    /// More than one exceptional residue class; fits no (m,t) shape.
    Unstructured,
}

pub fn point_profile(s: &PointMultiset, point: u32) -> Result<PointProfile, AnalysisError> {
    if s.multiplicity(point) == 0 {
        return Err(AnalysisError::PointNotInSupport(point));
    }
    let counts = line_counts(s);
    Ok(profile_from_counts(s, &counts, point))
}

fn profile_from_counts(s: &PointMultiset, counts: &[u32], point: u32) -> PointProfile {
    let p = s.plane().field().p();
    let q = s.plane().order();
    let hist = residue_hist(s, counts, point);
    let nonzero: Vec<u32> = (0..p).filter(|&r| hist[r as usize] > 0).collect();
    if nonzero.len() == 1 {
        return PointProfile::Irregular { m: nonzero[0] };
    }
    for &t in &nonzero {
        if hist[t as usize] != 1 {
            continue;
        }
        for &m in &nonzero {
            if m != t && hist[m as usize] == q {
                let renitent_line = *s
                    .plane()
                    .lines_through(point)
                    .iter()
                    .find(|&&l| counts[l as usize] % p == t)
                    .expect("residue t occurs");
                return PointProfile::Regular { m, t, renitent_line };
            }
        }
    }
    PointProfile::Unstructured
}

/// Global shape of the per-point profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trichotomy {
    AllRegular { m: u32, t: u32 },
    AllIrregular { c: u32 },
    /// Exactly one irregular point; `renitent_concurrent` records whether every
    /// regular point's renitent line passes through it.
    UniqueIrregular { point: u32, renitent_concurrent: bool },
    None,
}

pub fn trichotomy(s: &PointMultiset) -> Result<Trichotomy, AnalysisError> {
    require_proper(s)?;
    let counts = line_counts(s);
    let support = s.support();
    let mut regular: Vec<(u32, u32, u32, u32)> = Vec::new(); // (pt, m, t, line)
    let mut irregular: Vec<(u32, u32)> = Vec::new(); // (pt, c)
    for &pt in &support {
        match profile_from_counts(s, &counts, pt) {
            PointProfile::Regular { m, t, renitent_line } => regular.push((pt, m, t, renitent_line)),
            PointProfile::Irregular { m } => irregular.push((pt, m)),
            PointProfile::Unstructured => return Ok(Trichotomy::None),
        }
    }
    if irregular.is_empty() {
        let (m, t) = (regular[0].1, regular[0].2);
        if regular.iter().all(|&(_, rm, rt, _)| rm == m && rt == t) {
            return Ok(Trichotomy::AllRegular { m, t });
        }
        return Ok(Trichotomy::None);
    }
    if regular.is_empty() {
        let c = irregular[0].1;
        if irregular.iter().all(|&(_, rc)| rc == c) {
            return Ok(Trichotomy::AllIrregular { c });
        }
        return Ok(Trichotomy::None);
    }
    if irregular.len() == 1 {
        let point = irregular[0].0;
        let renitent_concurrent = regular
            .iter()
            .all(|&(_, _, _, l)| s.plane().incident(point, l));
        return Ok(Trichotomy::UniqueIrregular { point, renitent_concurrent });
    }
    Ok(Trichotomy::None)
}

/// Concurrency status of a family of lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Concurrency {
    Empty,
    /// One line is trivially concurrent at each of its points.
    SingleLine(u32),
    At(u32),
    No,
}

/// Lines with positive intersection count ≡ t (mod p), and their concurrency.
pub fn proper_residue_secants(s: &PointMultiset, t: u32) -> (Vec<u32>, Concurrency) {
    let p = s.plane().field().p();
    let counts = line_counts(s);
    let lines: Vec<u32> = (0..counts.len() as u32)
        .filter(|&l| counts[l as usize] > 0 && counts[l as usize] % p == t % p)
        .collect();
    let concurrency = concurrency_of(s.plane(), &lines);
    (lines, concurrency)
}

pub fn concurrency_of(plane: &Plane, lines: &[u32]) -> Concurrency {
    match lines {
        [] => Concurrency::Empty,
        [l] => Concurrency::SingleLine(*l),
        [l0, l1, rest @ ..] => {
            let pt = plane.meet(*l0, *l1).expect("distinct lines");
            if rest.iter().all(|&l| plane.incident(pt, l)) {
                Concurrency::At(pt)
            } else {
                Concurrency::No
            }
        }
    }
}

/// Divisibility and counting checks for an exact type (m,t). Option items are
/// None when their hypothesis does not apply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialAudit {
    pub m_divides: bool,                       // m | q(q−t)
    pub gcd_divides: bool,                     // gcd(m,t) | q
    pub external_congruence: bool,             // t(P)·t ≡ t−q (mod m) for all P ∉ S
    pub t_divides: bool,                       // t | q(m−1)
    pub small_forces_m_div_q: Option<bool>,    // q(m−1) < (q+1−t)t ⇒ m | q
    pub zero_secants_div_p: Option<bool>,      // m,t ≠ q ⇒ p | τ_0
    pub t_secants_minimal_blocking: Option<bool>, // m ∤ (q−t) ⇒ dual minimal blocking set
    pub interior_t_forces_m_div_q: Option<bool>, // 1<t<q, t ≢ m (mod p) ⇒ m | q
}

impl CombinatorialAudit {
    pub fn all_pass(&self) -> bool {
        self.m_divides
            && self.gcd_divides
            && self.external_congruence
            && self.t_divides
            && self.small_forces_m_div_q != Some(false)
            && self.zero_secants_div_p != Some(false)
            && self.t_secants_minimal_blocking != Some(false)
            && self.interior_t_forces_m_div_q != Some(false)
    }
}

fn gcd64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd64(b, a % b)
    }
}

pub fn audit_combinatorial(
    s: &PointMultiset,
    m: u32,
    t: u32,
) -> Result<CombinatorialAudit, AnalysisError> {
    let types = classify_exact(s)?;
    if !types.iter().any(|ty| ty.m == m && ty.t == t) {
        return Err(AnalysisError::TypeNotSatisfied(m, t));
    }
    let plane = s.plane();
    let q = plane.order() as u64;
    let p = plane.field().p();
    let (m64, t64) = (m as u64, t as u64);
    let counts = line_counts(s);
    let sp = spectrum(s);

    // q − t may be negative (t can be q+1), so work in signed arithmetic.
    let m_divides = (q as i64 * (q as i64 - t as i64)).rem_euclid(m as i64) == 0;
    let gcd_divides = q % gcd64(m64, t64) == 0;

    let external_congruence = (0..plane.num_points() as u32)
        .filter(|&pt| s.multiplicity(pt) == 0)
        .all(|pt| {
            let tp = plane
                .lines_through(pt)
                .iter()
                .filter(|&&l| counts[l as usize] == t)
                .count() as i64;
            (tp * t as i64 - (t as i64 - q as i64)).rem_euclid(m as i64) == 0
        });

    let t_divides = (q * (m64 - 1)) % t64 == 0;

    let small_forces_m_div_q = ((q as i64) * (m as i64 - 1)
        < (q as i64 + 1 - t as i64) * t as i64)
        .then(|| q % m64 == 0);

    let zero_secants_div_p =
        (m64 != q && t64 != q).then(|| sp.count(0) % p == 0);

    let t_secants_minimal_blocking = ((q as i64 - t as i64).rem_euclid(m as i64) != 0).then(|| {
        let tsec: Vec<u32> = (0..counts.len() as u32)
            .filter(|&l| counts[l as usize] == t)
            .collect();
        let on_count = |pt: u32| {
            plane
                .lines_through(pt)
                .iter()
                .filter(|&&l| counts[l as usize] == t)
                .count()
        };
        let blocking = (0..plane.num_points() as u32).all(|pt| on_count(pt) >= 1);
        let minimal = tsec.iter().all(|&l| {
            plane.points_on_line(l).iter().any(|&pt| on_count(pt) == 1)
        });
        blocking && minimal
    });

    let interior_t_forces_m_div_q =
        (1 < t && t64 < q && m % p != t % p).then(|| q % m64 == 0);

    Ok(CombinatorialAudit {
        m_divides,
        gcd_divides,
        external_congruence,
        t_divides,
        small_forces_m_div_q,
        zero_secants_div_p,
        t_secants_minimal_blocking,
        interior_t_forces_m_div_q,
    })
}

/// The pencil-vs-plane residue bound q·s_P − s_P(s_P−1) ≤ δ, where s_P counts
/// lines through P with intersection ≢ k (mod p) and δ counts them globally.
/// The bound is a theorem only for q > 17 and support points; everything else
/// is reported informationally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexBound {
    pub k: u32,
    pub delta: u32,
    /// True when q > 17 and the support-point bound is therefore asserted.
    pub asserted: bool,
    pub support_holds: bool,
    pub support_violations: Vec<u32>,
    pub external_violations: Vec<u32>,
}

pub fn index_bound_check(s: &PointMultiset, k: u32) -> Result<IndexBound, AnalysisError> {
    require_proper(s)?;
    let plane = s.plane();
    let q = plane.order();
    let p = plane.field().p();
    let counts = line_counts(s);
    let delta = counts.iter().filter(|&&c| c % p != k % p).count() as u32;
    let s_p = |pt: u32| {
        plane
            .lines_through(pt)
            .iter()
            .filter(|&&l| counts[l as usize] % p != k % p)
            .count() as u64
    };
    let holds = |pt: u32| {
        let sp = s_p(pt);
        q as u64 * sp <= delta as u64 + sp * sp.saturating_sub(1)
    };
    let mut support_violations = Vec::new();
    let mut external_violations = Vec::new();
    for pt in 0..plane.num_points() as u32 {
        if !holds(pt) {
            if s.multiplicity(pt) > 0 {
                support_violations.push(pt);
            } else {
                external_violations.push(pt);
            }
        }
    }
    Ok(IndexBound {
        k,
        delta,
        asserted: q > 17,
        support_holds: support_violations.is_empty(),
        support_violations,
        external_violations,
    })
}

/// Count of lines ≡ t (mod p) through an external point under the hypotheses
/// of the 1-mod-p pencil lemma.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TpCount {
    Valid { count: u32, one_mod_p: bool },
    HypothesisViolated(&'static str),
}

pub fn t_secant_count_residue(
    s: &PointMultiset,
    m: u32,
    t: u32,
    point: u32,
) -> Result<TpCount, AnalysisError> {
    let modp = classify_modp(s)?;
    if !modp.contains(&ModpType { m, t }) {
        return Err(AnalysisError::ModpTypeNotSatisfied(m, t));
    }
    if t == m {
        return Err(AnalysisError::EqualParameters);
    }
    if s.multiplicity(point) > 0 {
        return Ok(TpCount::HypothesisViolated("point lies in the support"));
    }
    let plane = s.plane();
    let p = plane.field().p();
    let counts = line_counts(s);
    let zero_through = plane
        .lines_through(point)
        .iter()
        .any(|&l| counts[l as usize] == 0);
    if zero_through && m != 0 {
        return Ok(TpCount::HypothesisViolated(
            "a 0-secant passes through the point and m is nonzero",
        ));
    }
    let count = plane
        .lines_through(point)
        .iter()
        .filter(|&&l| counts[l as usize] % p == t % p)
        .count() as u32;
    Ok(TpCount::Valid { count, one_mod_p: count % p == 1 % p })
}

/// All point sets N, |N| ≤ 3, such that adding each point of N with
/// multiplicity m−t turns S into a multiset met by every line in ≡ m (mod p)
/// points. A line covered c times by N then needs count + c(m−t) ≡ m.
pub fn completion_points(
    s: &PointMultiset,
    m: u32,
    t: u32,
) -> Result<Vec<Vec<u32>>, AnalysisError> {
    let modp = classify_modp(s)?;
    if t == m {
        return Err(AnalysisError::EqualParameters);
    }
    if !modp.contains(&ModpType { m, t }) {
        return Err(AnalysisError::ModpTypeNotSatisfied(m, t));
    }
    let plane = s.plane();
    let p = plane.field().p();
    let counts = line_counts(s);

    let step = (m + p - t % p) % p; // multiplicity of each added point, mod p
    let satisfied = |l: u32, cov: u32| (counts[l as usize] + cov * step) % p == m % p;
    let off_lines: Vec<u32> = (0..counts.len() as u32)
        .filter(|&l| !satisfied(l, 0))
        .collect();

    // A point of any solution N lies on few lines already ≡ m: such a line
    // through x needs coverage ≡ 0 (mod p) with |N| ≤ 3, so it must also carry
    // the rest of N; at most 2 such lines for p = 2, 1 for p = 3, none beyond.
    let m_limit = match p {
        2 => 2,
        3 => 1,
        _ => 0,
    };
    let pool: Vec<u32> = (0..plane.num_points() as u32)
        .filter(|&pt| {
            plane
                .lines_through(pt)
                .iter()
                .filter(|&&l| counts[l as usize] % p == m % p)
                .count()
                <= m_limit
        })
        .collect();

    let valid = |n: &[u32]| {
        let mut touched: BTreeMap<u32, u32> = BTreeMap::new();
        for &pt in n {
            for &l in plane.lines_through(pt) {
                *touched.entry(l).or_insert(0) += 1;
            }
        }
        touched.iter().all(|(&l, &cov)| satisfied(l, cov))
            && off_lines.iter().all(|l| touched.contains_key(l))
    };

    let mut out = Vec::new();
    for (i, &a) in pool.iter().enumerate() {
        if valid(&[a]) {
            out.push(vec![a]);
        }
        for (j, &b) in pool.iter().enumerate().skip(i + 1) {
            if valid(&[a, b]) {
                out.push(vec![a, b]);
            }
            for &c in pool.iter().skip(j + 1) {
                if valid(&[a, b, c]) {
                    out.push(vec![a, b, c]);
                }
            }
        }
    }
    out.sort_by(|x, y| (x.len(), x.as_slice()).cmp(&(y.len(), y.as_slice())));
    Ok(out)
}

/// Exact evaluation of the three parameter identities for a k-set of type
/// (m,t) with no 0-secants: the quadratic in k, the external t-secant count
/// (which must equal 1 − q/(t−m) and be a non-negative integer), and the
/// quadratic relation in m and t alone.
pub fn two_intersection_identities(
    q: u32,
    m: u32,
    t: u32,
    k: u64,
) -> Result<(bool, bool, bool), AnalysisError> {
    if t == m {
        return Err(AnalysisError::EqualParameters);
    }
    let (qi, mi, ti, ki) = (q as i128, m as i128, t as i128, k as i128);
    let eq_k = ki * ki - ki * (qi * (mi + ti - 1) + mi + ti) + mi * ti * (qi * qi + qi + 1) == 0;

    let lhs = Ratio::new(ki as i64 - mi as i64 * (qi as i64 + 1), t as i64 - m as i64);
    let rhs = Ratio::from_integer(1) - Ratio::new(q as i64, t as i64 - m as i64);
    let eq_external = lhs == rhs && rhs.is_integer() && rhs >= Ratio::from_integer(0);

    let eq_mt = mi * mi - mi * ti - mi - qi * ti + ti * ti == 0;
    Ok((eq_k, eq_external, eq_mt))
}

/// Summary verdict for one multiset: spectrum, both classifications, per-point
/// profiles, trichotomy, and the concurrency of the relevant t-secants.
#[derive(Clone, Debug)]
pub struct KMReport {
    pub q: u32,
    pub p: u32,
    pub size: u64,
    pub is_set: bool,
    pub spectrum: Spectrum,
    pub exact_types: Vec<ExactType>,
    pub modp_types: Vec<ModpType>,
    pub profiles: Vec<(u32, PointProfile)>,
    pub trichotomy: Trichotomy,
    /// (t, counted mod p?, lines, concurrency) for the first type with t ≠ m.
    pub tsecants: Option<(u32, bool, Vec<u32>, Concurrency)>,
}

pub fn report(s: &PointMultiset) -> Result<KMReport, AnalysisError> {
    require_proper(s)?;
    let plane = s.plane();
    let sp = spectrum(s);
    let exact_types = if s.is_set() { classify_exact(s)? } else { Vec::new() };
    let modp_types = classify_modp(s)?;
    let counts = line_counts(s);
    let profiles = s
        .support()
        .iter()
        .map(|&pt| (pt, profile_from_counts(s, &counts, pt)))
        .collect();
    let tri = trichotomy(s)?;

    let tsecants = if let Some(ty) = exact_types.iter().find(|ty| ty.m != ty.t) {
        let lines: Vec<u32> = (0..counts.len() as u32)
            .filter(|&l| counts[l as usize] == ty.t)
            .collect();
        let conc = concurrency_of(plane, &lines);
        Some((ty.t, false, lines, conc))
    } else {
        modp_types.iter().find(|ty| ty.m != ty.t).map(|ty| {
            let (lines, conc) = proper_residue_secants(s, ty.t);
            (ty.t, true, lines, conc)
        })
    };

    Ok(KMReport {
        q: plane.order(),
        p: plane.field().p(),
        size: s.size(),
        is_set: s.is_set(),
        spectrum: sp,
        exact_types,
        modp_types,
        profiles,
        trichotomy: tri,
        tsecants,
    })
}
