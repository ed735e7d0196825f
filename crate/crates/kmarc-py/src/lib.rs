//! Python bindings for the kmarc library: planes, point sets, the family
//! constructions, classification, searches, nucleus verification, and group
//! divisible designs. Every fallible call raises ValueError with the
//! underlying error text.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kmarc::analysis::{self, Concurrency, PointMultiset};
use kmarc::constructions;
use kmarc::designs;
use kmarc::gf::{Fe, FieldCtx};
use kmarc::io;
use kmarc::plane::{Plane as CorePlane, Slope};
use kmarc::redei;
use kmarc::search::{self, Dedupe, SearchMode, SearchSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// The projective plane over the field of order q, with q a prime power.
/// Points and lines are handled by index; index 0..q^2+q+1.
#[pyclass(frozen, name = "Plane")]
struct PyPlane {
    inner: Arc<CorePlane>,
}

impl PyPlane {
    fn check_point(&self, i: u32) -> PyResult<()> {
        if (i as usize) < self.inner.num_points() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("point index {i} out of range")))
        }
    }

    fn check_line(&self, l: u32) -> PyResult<()> {
        if (l as usize) < self.inner.num_lines() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("line index {l} out of range")))
        }
    }

    fn check_fe(&self, label: &str, v: u32) -> PyResult<Fe> {
        if v < self.inner.order() {
            Ok(Fe(v))
        } else {
            Err(PyValueError::new_err(format!(
                "{label}={v} is not a field element of GF({})",
                self.inner.order()
            )))
        }
    }
}

#[pymethods]
impl PyPlane {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        let f = FieldCtx::of_order(q).map_err(err)?;
        Ok(PyPlane { inner: Arc::new(CorePlane::new(f)) })
    }

    /// Field order q.
    #[getter]
    fn order(&self) -> u32 {
        self.inner.order()
    }

    /// Field characteristic p.
    #[getter]
    fn characteristic(&self) -> u32 {
        self.inner.field().p()
    }

    fn num_points(&self) -> usize {
        self.inner.num_points()
    }

    fn num_lines(&self) -> usize {
        self.inner.num_lines()
    }

    /// Normalized homogeneous coordinates of a point, first entry the
    /// homogenizing one.
    fn point(&self, i: u32) -> PyResult<(u32, u32, u32)> {
        self.check_point(i)?;
        let c = self.inner.point(i);
        Ok((c[0].0, c[1].0, c[2].0))
    }

    /// Index of the affine point (a, b), embedded as (1 : a : b).
    fn affine_point(&self, a: u32, b: u32) -> PyResult<u32> {
        let a = self.check_fe("a", a)?;
        let b = self.check_fe("b", b)?;
        Ok(self.inner.affine_point(a, b))
    }

    fn line_through(&self, p: u32, r: u32) -> PyResult<u32> {
        self.check_point(p)?;
        self.check_point(r)?;
        self.inner.line_through(p, r).map_err(err)
    }

    fn points_on_line(&self, l: u32) -> PyResult<Vec<u32>> {
        self.check_line(l)?;
        Ok(self.inner.points_on_line(l).to_vec())
    }

    fn lines_through(&self, p: u32) -> PyResult<Vec<u32>> {
        self.check_point(p)?;
        Ok(self.inner.lines_through(p).to_vec())
    }

    fn incident(&self, p: u32, l: u32) -> PyResult<bool> {
        self.check_point(p)?;
        self.check_line(l)?;
        Ok(self.inner.incident(p, l))
    }

    /// A point set on this plane; duplicate indices collapse. Use insert
    /// or set_multiplicity afterwards for multiplicities above one.
    fn set_of(&self, points: Vec<u32>) -> PyResult<PyPointSet> {
        for &p in &points {
            self.check_point(p)?;
        }
        Ok(PyPointSet { inner: PointMultiset::from_indices(self.inner.clone(), &points) })
    }

    fn __repr__(&self) -> String {
        format!("Plane(q={})", self.inner.order())
    }
}

/// A multiset of points of a plane, the object every classification and
/// search routine works on.
#[pyclass(name = "PointSet")]
struct PyPointSet {
    inner: PointMultiset,
}

fn concurrency_tuple(c: &Concurrency) -> (&'static str, Option<u32>) {
    match c {
        Concurrency::Empty => ("empty", None),
        Concurrency::SingleLine(l) => ("single-line", Some(*l)),
        Concurrency::At(p) => ("at", Some(*p)),
        Concurrency::No => ("no", None),
    }
}

#[pymethods]
impl PyPointSet {
    #[new]
    fn new(plane: PyRef<'_, PyPlane>, points: Vec<u32>) -> PyResult<Self> {
        plane.set_of(points)
    }

    #[getter]
    fn plane(&self) -> PyPlane {
        PyPlane { inner: self.inner.plane().clone() }
    }

    /// Total size counted with multiplicity.
    fn size(&self) -> u64 {
        self.inner.size()
    }

    fn support(&self) -> Vec<u32> {
        self.inner.support()
    }

    fn multiplicity(&self, point: u32) -> PyResult<u32> {
        if (point as usize) < self.inner.plane().num_points() {
            Ok(self.inner.multiplicity(point))
        } else {
            Err(PyValueError::new_err(format!("point index {point} out of range")))
        }
    }

    fn is_set(&self) -> bool {
        self.inner.is_set()
    }

    fn insert(&mut self, point: u32) -> PyResult<()> {
        if (point as usize) >= self.inner.plane().num_points() {
            return Err(PyValueError::new_err(format!("point index {point} out of range")));
        }
        self.inner.insert(point).map_err(err)
    }

    fn set_multiplicity(&mut self, point: u32, m: u32) -> PyResult<()> {
        if (point as usize) >= self.inner.plane().num_points() {
            return Err(PyValueError::new_err(format!("point index {point} out of range")));
        }
        self.inner.set_multiplicity(point, m).map_err(err)
    }

    fn without(&self, point: u32) -> PyPointSet {
        PyPointSet { inner: self.inner.without(point) }
    }

    fn line_count(&self, line: u32) -> PyResult<u32> {
        if (line as usize) < self.inner.plane().num_lines() {
            Ok(analysis::line_count(&self.inner, line))
        } else {
            Err(PyValueError::new_err(format!("line index {line} out of range")))
        }
    }

    /// Line intersection tally {count: lines}.
    fn spectrum(&self) -> BTreeMap<u32, u32> {
        analysis::spectrum(&self.inner).tau
    }

    /// Exact two-intersection types as (m, t, degenerate) triples.
    fn classify_exact(&self) -> PyResult<Vec<(u32, u32, bool)>> {
        let types = analysis::classify_exact(&self.inner).map_err(err)?;
        Ok(types.into_iter().map(|ty| (ty.m, ty.t, ty.degenerate)).collect())
    }

    /// Pointwise mod-p types as (m, t) pairs.
    fn classify_modp(&self) -> PyResult<Vec<(u32, u32)>> {
        let types = analysis::classify_modp(&self.inner).map_err(err)?;
        Ok(types.into_iter().map(|ty| (ty.m, ty.t)).collect())
    }

    /// Point sets N that restore residue m on every line when added with
    /// the forced multiplicity.
    fn completion_points(&self, m: u32, t: u32) -> PyResult<Vec<Vec<u32>>> {
        analysis::completion_points(&self.inner, m, t).map_err(err)
    }

    /// Lines with positive count congruent to t mod p, and their
    /// concurrency status as (kind, index).
    fn residue_secants(&self, t: u32) -> (Vec<u32>, (&'static str, Option<u32>)) {
        let (lines, conc) = analysis::proper_residue_secants(&self.inner, t);
        (lines, concurrency_tuple(&conc))
    }

    /// Divisibility and counting checks for an exact type, as a dict of
    /// check name to bool or None when the hypothesis does not apply.
    fn audit(&self, py: Python<'_>, m: u32, t: u32) -> PyResult<Py<PyDict>> {
        let a = analysis::audit_combinatorial(&self.inner, m, t).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("m_divides", a.m_divides)?;
        d.set_item("gcd_divides", a.gcd_divides)?;
        d.set_item("external_congruence", a.external_congruence)?;
        d.set_item("t_divides", a.t_divides)?;
        d.set_item("small_forces_m_div_q", a.small_forces_m_div_q)?;
        d.set_item("zero_secants_div_p", a.zero_secants_div_p)?;
        d.set_item("t_secants_minimal_blocking", a.t_secants_minimal_blocking)?;
        d.set_item("interior_t_forces_m_div_q", a.interior_t_forces_m_div_q)?;
        d.set_item("all_pass", a.all_pass())?;
        Ok(d.unbind())
    }

    /// Catalog name of the first structural description this set matches,
    /// with its parameters.
    fn family(&self, py: Python<'_>) -> PyResult<Py<PyDict>> {
        let fam = search::match_family(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("name", fam.family.name())?;
        d.set_item("trivial", fam.family.is_trivial())?;
        let params = PyDict::new(py);
        for (k, v) in fam.params {
            params.set_item(k, v)?;
        }
        d.set_item("params", params)?;
        Ok(d.unbind())
    }

    /// Full analysis report as canonical JSON text.
    fn analyze_json(&self) -> PyResult<String> {
        let value = io::analysis_json(&self.inner).map_err(err)?;
        Ok(io::canonical_json(&value))
    }

    fn __len__(&self) -> usize {
        self.inner.size() as usize
    }

    fn __repr__(&self) -> String {
        format!("PointSet(q={}, size={})", self.inner.plane().order(), self.inner.size())
    }
}

/// Build a cataloged family on a plane; params is a dict of the family's
/// parameters, e.g. construct(plane, "pencil", {"m": 3}).
#[pyfunction]
#[pyo3(signature = (plane, family, params = None))]
fn construct(
    plane: PyRef<'_, PyPlane>,
    family: &str,
    params: Option<BTreeMap<String, u64>>,
) -> PyResult<PyPointSet> {
    let params = params.unwrap_or_default();
    let set = io::construct_family(&plane.inner, family, &params).map_err(err)?;
    Ok(PyPointSet { inner: set })
}

fn run_search(
    plane: &Arc<CorePlane>,
    mode: SearchMode,
    max_solutions: Option<usize>,
    node_budget: Option<u64>,
    time_budget_ms: Option<u64>,
    jobs: usize,
    dedupe: &str,
) -> PyResult<(Vec<PyPointSet>, u64, bool)> {
    let mut spec = SearchSpec::new(plane.clone(), mode);
    spec.dedupe = match dedupe {
        "none" => Dedupe::None,
        "orbit" => Dedupe::Orbit,
        other => return Err(PyValueError::new_err(format!("unknown dedupe mode {other:?}"))),
    };
    let budgeted = max_solutions.is_some() || node_budget.is_some() || time_budget_ms.is_some();
    if let Some(n) = max_solutions {
        spec.limits.max_solutions = n;
    }
    if let Some(n) = node_budget {
        spec.limits.node_budget = n;
    }
    if let Some(ms) = time_budget_ms {
        spec.limits.time_budget = Some(Duration::from_millis(ms));
    }
    // A budgeted walk is only reproducible single-threaded.
    spec.jobs = if budgeted { 1 } else { jobs };
    let out = search::search(&spec).map_err(err)?;
    let sets = out.sets.into_iter().map(|s| PyPointSet { inner: s }).collect();
    Ok((sets, out.nodes, out.complete))
}

/// Exhaust proper sets of size q(m-1)+t meeting every line in 0, m, or t
/// points. Returns (sets, nodes, complete).
#[pyfunction]
#[pyo3(signature = (plane, m, t, *, max_solutions = None, node_budget = None, time_budget_ms = None, jobs = 0, dedupe = "none"))]
#[allow(clippy::too_many_arguments)]
fn search_exact(
    plane: PyRef<'_, PyPlane>,
    m: u32,
    t: u32,
    max_solutions: Option<usize>,
    node_budget: Option<u64>,
    time_budget_ms: Option<u64>,
    jobs: usize,
    dedupe: &str,
) -> PyResult<(Vec<PyPointSet>, u64, bool)> {
    run_search(
        &plane.inner,
        SearchMode::Exact { m, t },
        max_solutions,
        node_budget,
        time_budget_ms,
        jobs,
        dedupe,
    )
}

/// Run the exact search over every (m, t) pair passing the arithmetic
/// screens. Returns (sets, nodes, complete).
#[pyfunction]
#[pyo3(signature = (plane, *, max_solutions = None, node_budget = None, time_budget_ms = None, jobs = 0, dedupe = "none"))]
fn search_exact_all(
    plane: PyRef<'_, PyPlane>,
    max_solutions: Option<usize>,
    node_budget: Option<u64>,
    time_budget_ms: Option<u64>,
    jobs: usize,
    dedupe: &str,
) -> PyResult<(Vec<PyPointSet>, u64, bool)> {
    run_search(
        &plane.inner,
        SearchMode::ExactAll,
        max_solutions,
        node_budget,
        time_budget_ms,
        jobs,
        dedupe,
    )
}

/// Exhaust proper sets where each support point lies on exactly one line
/// with count = t and q lines with count = m, both mod p. Returns
/// (sets, nodes, complete).
#[pyfunction]
#[pyo3(signature = (plane, m, t, *, max_solutions = None, node_budget = None, time_budget_ms = None, jobs = 0, dedupe = "none"))]
#[allow(clippy::too_many_arguments)]
fn search_modp(
    plane: PyRef<'_, PyPlane>,
    m: u32,
    t: u32,
    max_solutions: Option<usize>,
    node_budget: Option<u64>,
    time_budget_ms: Option<u64>,
    jobs: usize,
    dedupe: &str,
) -> PyResult<(Vec<PyPointSet>, u64, bool)> {
    run_search(
        &plane.inner,
        SearchMode::Modp { m, t },
        max_solutions,
        node_budget,
        time_budget_ms,
        jobs,
        dedupe,
    )
}

/// The ordered (m, t) pairs the exact-all search screens admit for order q.
#[pyfunction]
fn candidate_pairs(q: u32) -> Vec<(u32, u32)> {
    search::exact_candidate_pairs(q)
}

/// Order of the projectivity group of the plane of order q.
#[pyfunction]
fn group_order(q: u64) -> u64 {
    search::projectivity_group_order(q)
}

/// Keep one representative per projectivity orbit.
#[pyfunction]
fn orbit_dedupe(sets: Vec<PyRef<'_, PyPointSet>>) -> Vec<PyPointSet> {
    let inner: Vec<PointMultiset> = sets.iter().map(|s| s.inner.clone()).collect();
    search::orbit_dedupe(&inner).into_iter().map(|s| PyPointSet { inner: s }).collect()
}

fn slope_value(s: &Slope) -> Option<u32> {
    match s {
        Slope::Finite(d) => Some(d.0),
        Slope::Vertical => None,
    }
}

/// Check the renitent-line concurrency statement for a set of affine
/// points, given as (a, b) pairs over GF(q). Returns a dict with the
/// nucleus, the renitent lines, and whether all of them pass through it.
#[pyfunction]
fn verify_renitent(
    py: Python<'_>,
    plane: PyRef<'_, PyPlane>,
    points: Vec<(u32, u32)>,
) -> PyResult<Py<PyDict>> {
    let f = plane.inner.field();
    let mut pts = Vec::with_capacity(points.len());
    for &(a, b) in &points {
        pts.push((plane.check_fe("a", a)?, plane.check_fe("b", b)?));
    }
    let verdict = redei::verify_renitent_lemma(f, &pts).map_err(err)?;
    let d = PyDict::new(py);
    let line_dict = |l: &redei::RenitentLine| -> PyResult<Py<PyDict>> {
        let ld = PyDict::new(py);
        ld.set_item("slope", slope_value(&l.direction))?;
        ld.set_item("intercept", l.intercept.0)?;
        ld.set_item("mu", l.mu)?;
        ld.set_item("tau", l.tau)?;
        Ok(ld.unbind())
    };
    match verdict {
        redei::RenitentVerdict::Verified { nucleus, lines } => {
            d.set_item("verified", true)?;
            d.set_item("nucleus", (nucleus.0 .0, nucleus.1 .0))?;
            let ls: Vec<Py<PyDict>> = lines.iter().map(line_dict).collect::<PyResult<_>>()?;
            d.set_item("lines", ls)?;
        }
        redei::RenitentVerdict::Counterexample { nucleus, line } => {
            d.set_item("verified", false)?;
            d.set_item("nucleus", (nucleus.0 .0, nucleus.1 .0))?;
            d.set_item("counterexample", line_dict(&line)?)?;
        }
    }
    Ok(d.unbind())
}

/// Group divisible design from an exact type (m, t) with t != m: groups are
/// the t-secant traces, blocks the m-secant traces. Returns a dict with the
/// design and its pairwise verification.
#[pyfunction]
fn gdd(py: Python<'_>, set: PyRef<'_, PyPointSet>, m: u32, t: u32) -> PyResult<Py<PyDict>> {
    let g = designs::gdd_from_km(&set.inner, m, t).map_err(err)?;
    let verified = designs::gdd_verify(&g);
    let d = PyDict::new(py);
    d.set_item("k", g.k)?;
    d.set_item("group_size", g.group_size)?;
    d.set_item("points", g.points)?;
    d.set_item("groups", g.groups)?;
    d.set_item("blocks", g.blocks)?;
    d.set_item("verified", verified)?;
    Ok(d.unbind())
}

/// Arcs of size k whose secants use exactly k directions and whose
/// tangents concur. Each entry reports the arc, its directions, the
/// tangent meeting point, and the union set with the directions.
#[pyfunction]
fn sharply_focused(
    py: Python<'_>,
    plane: PyRef<'_, PyPlane>,
    k: u32,
) -> PyResult<Vec<Py<PyDict>>> {
    let found = constructions::sharply_focused_search(&plane.inner, k).map_err(err)?;
    let mut out = Vec::with_capacity(found.len());
    for sf in found {
        let d = PyDict::new(py);
        d.set_item("arc", sf.arc)?;
        d.set_item("directions", sf.directions)?;
        d.set_item("completion", sf.completion)?;
        d.set_item("union", PyPointSet { inner: sf.union_set })?;
        out.push(d.unbind());
    }
    Ok(out)
}

/// Recompute the parameters quoted for the pencil-of-conics example with
/// q = p^n and m = p^n - p^m_exp, and report the values the size actually
/// forces.
#[pyfunction]
fn parameter_quote_check(
    py: Python<'_>,
    p: u32,
    n: u32,
    m_exp: u32,
) -> PyResult<Py<PyDict>> {
    let m = constructions::mason_parameter_check(p, n, m_exp).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("q", m.q)?;
    d.set_item("m", m.m)?;
    d.set_item("quoted_t", m.quoted_t)?;
    d.set_item("size", m.size)?;
    d.set_item("km_t", m.km_t)?;
    d.set_item("quoted_matches_km", m.quoted_matches_km)?;
    d.set_item("zero_secants", m.zero_secants)?;
    d.set_item("t_secant_count", m.t_secant_count)?;
    Ok(d.unbind())
}

/// Serialize a point set as a canonical JSON document; family and params
/// fill the optional metadata block.
#[pyfunction]
#[pyo3(signature = (set, family = None, params = None))]
fn dump_document(
    set: PyRef<'_, PyPointSet>,
    family: Option<String>,
    params: Option<BTreeMap<String, u64>>,
) -> String {
    let metadata = family.map(|family| io::Metadata {
        family,
        parameters: params.unwrap_or_default(),
    });
    io::canonical_json(&io::document_from_set(&set.inner, metadata))
}

/// Parse a JSON document, rebuild its plane from the header, and return
/// (plane, set).
#[pyfunction]
fn load_document(text: &str) -> PyResult<(PyPlane, PyPointSet)> {
    let doc = io::parse_document(text).map_err(err)?;
    let plane = io::plane_from_header(&doc.header).map_err(err)?;
    let set = io::set_from_document(&doc).map_err(err)?;
    Ok((PyPlane { inner: plane }, PyPointSet { inner: set }))
}

#[pymodule]
fn kmarc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPlane>()?;
    m.add_class::<PyPointSet>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(search_exact, m)?)?;
    m.add_function(wrap_pyfunction!(search_exact_all, m)?)?;
    m.add_function(wrap_pyfunction!(search_modp, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(group_order, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_dedupe, m)?)?;
    m.add_function(wrap_pyfunction!(verify_renitent, m)?)?;
    m.add_function(wrap_pyfunction!(gdd, m)?)?;
    m.add_function(wrap_pyfunction!(sharply_focused, m)?)?;
    m.add_function(wrap_pyfunction!(parameter_quote_check, m)?)?;
    m.add_function(wrap_pyfunction!(dump_document, m)?)?;
    m.add_function(wrap_pyfunction!(load_document, m)?)?;
    m.add("FAMILIES", io::FAMILY_NAMES.to_vec())?;
    m.add("FORMAT_VERSION", io::FORMAT_VERSION)?;
    Ok(())
}
