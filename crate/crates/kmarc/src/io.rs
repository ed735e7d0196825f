//! Interchange documents and canonical JSON serialization.
//!
//! A point-set document carries enough header data to rebuild the exact
//! plane it was written against: characteristic, extension degree, and the
//! modulus coefficients, which are pinned rather than trusted. Bodies list
//! normalized coordinate triples with an optional multiplicity. All JSON
//! is emitted with sorted keys and integer values only, so equal inputs
//! produce byte-equal outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{
    self, AnalysisError, CombinatorialAudit, Concurrency, KMReport, PointMultiset, PointProfile,
    Trichotomy,
};
use crate::constructions::{self, ConstructError};
use crate::gf::{Fe, FieldCtx, GfError};
use crate::plane::{Plane, Slope};
use crate::redei::RenitentLine;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format version {0}, expected {FORMAT_VERSION}")]
    Version(u32),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("header modulus {got:?} does not match the canonical modulus {want:?} for p={p}, n={n}")]
    ModulusMismatch { p: u32, n: u32, got: Vec<u32>, want: Vec<u32> },
    #[error("body entry {0:?} must hold three coordinates and an optional multiplicity")]
    BadEntry(Vec<u32>),
    #[error("coordinate {0} is not an element encoding below {1}")]
    BadCoordinate(u32, u64),
    #[error("body entry {0:?} is not normalized")]
    NotNormalized([u32; 3]),
    #[error("body lists point {0:?} more than once")]
    DuplicateEntry([u32; 3]),
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {family} requires parameter {name}")]
    MissingParameter { family: &'static str, name: &'static str },
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub p: u32,
    pub n: u32,
    pub modulus: Vec<u32>,
    pub format_version: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub header: Header,
    /// Normalized triples `[x, y, z]`, optionally `[x, y, z, multiplicity]`.
    pub body: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

/// Serialize with sorted keys and a trailing newline; the backing map is
/// ordered, so equal values give byte-equal text.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("in-memory serialization");
    let mut s = serde_json::to_string_pretty(&v).expect("in-memory serialization");
    s.push('\n');
    s
}

/// Single-line rendering for JSON-lines streams, same key order rules.
pub fn json_line<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("in-memory serialization");
    serde_json::to_string(&v).expect("in-memory serialization")
}

pub fn document_from_set(s: &PointMultiset, metadata: Option<Metadata>) -> Document {
    let plane = s.plane();
    let f = plane.field();
    let header = Header {
        p: f.p(),
        n: f.degree(),
        modulus: f.modulus().to_vec(),
        format_version: FORMAT_VERSION,
    };
    let body = s
        .support()
        .into_iter()
        .map(|pt| {
            let c = plane.point(pt);
            let mut entry = vec![c[0].0, c[1].0, c[2].0];
            let mu = s.multiplicity(pt);
            if mu > 1 {
                entry.push(mu);
            }
            entry
        })
        .collect();
    Document { header, body, metadata }
}

/// Rebuild the plane named by the header, refusing headers whose modulus
/// does not match the one this library derives for (p, n).
pub fn plane_from_header(h: &Header) -> Result<Arc<Plane>, IoError> {
    if h.format_version != FORMAT_VERSION {
        return Err(IoError::Version(h.format_version));
    }
    let f = FieldCtx::new(h.p, h.n)?;
    if f.modulus() != h.modulus.as_slice() {
        return Err(IoError::ModulusMismatch {
            p: h.p,
            n: h.n,
            got: h.modulus.clone(),
            want: f.modulus().to_vec(),
        });
    }
    Ok(Arc::new(Plane::new(f)))
}

pub fn set_from_document(doc: &Document) -> Result<PointMultiset, IoError> {
    let plane = plane_from_header(&doc.header)?;
    let q = plane.order() as u64;
    let mut s = PointMultiset::empty(plane.clone());
    for entry in &doc.body {
        let (coords, mult) = match entry.len() {
            3 => (&entry[..3], 1),
            4 if entry[3] >= 1 => (&entry[..3], entry[3]),
            _ => return Err(IoError::BadEntry(entry.clone())),
        };
        for &c in coords {
            if c as u64 >= q {
                return Err(IoError::BadCoordinate(c, q));
            }
        }
        let triple = [Fe(coords[0]), Fe(coords[1]), Fe(coords[2])];
        if triple.iter().all(|c| c.0 == 0) {
            return Err(IoError::BadEntry(entry.clone()));
        }
        let raw = [triple[0].0, triple[1].0, triple[2].0];
        let idx = plane.index_of_point(triple);
        let canon = plane.point(idx);
        if [canon[0].0, canon[1].0, canon[2].0] != raw {
            return Err(IoError::NotNormalized(raw));
        }
        if s.multiplicity(idx) > 0 {
            return Err(IoError::DuplicateEntry(raw));
        }
        s.set_multiplicity(idx, mult)?;
    }
    Ok(s)
}

pub fn write_document(doc: &Document, path: &Path) -> Result<(), IoError> {
    fs::write(path, canonical_json(doc))?;
    Ok(())
}

pub fn read_document(path: &Path) -> Result<Document, IoError> {
    let text = fs::read_to_string(path)?;
    parse_document(&text)
}

pub fn parse_document(text: &str) -> Result<Document, IoError> {
    Ok(serde_json::from_str(text)?)
}

/// Construct a cataloged family on the given plane. Parameters are free-form
/// key/value pairs; unknown keys are ignored, missing required ones error.
pub fn construct_family(
    plane: &Arc<Plane>,
    family: &str,
    params: &BTreeMap<String, u64>,
) -> Result<PointMultiset, IoError> {
    let need = |family: &'static str, name: &'static str| -> Result<u64, IoError> {
        params.get(name).copied().ok_or(IoError::MissingParameter { family, name })
    };
    let set = match family {
        "collinear" => {
            let t = need("collinear", "t")? as u32;
            let line = params.get("line").copied().unwrap_or(0) as u32;
            constructions::collinear_set(plane, line, t)?
        }
        "pencil" => {
            let m = need("pencil", "m")? as u32;
            let vertex = params.get("vertex").copied().unwrap_or(0) as u32;
            constructions::pencil_minus_vertex(plane, vertex, m)?
        }
        "conic" | "oval" => constructions::conic_oval(plane),
        "hyperoval" => constructions::hyperoval(plane)?,
        "unital" => constructions::hermitian_unital(plane)?,
        "baer-subplane" => constructions::baer_subplane(plane)?,
        "complement-baer" => constructions::complement_baer(plane)?,
        "maximal-arc" => {
            let m = need("maximal-arc", "m")? as u32;
            constructions::denniston_maximal_arc(plane, m)?
        }
        "punctured-maximal-arc" => {
            let m = need("punctured-maximal-arc", "m")? as u32;
            constructions::punctured_denniston(plane, m)?
        }
        "baer-pencil" => {
            let vertex = match params.get("vertex") {
                Some(&v) => v as u32,
                None => constructions::baer_subplane(plane)?.support()[0],
            };
            constructions::baer_pencil_arc(plane, vertex)?
        }
        "trace" => {
            let sub = params.get("sub").copied().unwrap_or(plane.field().p() as u64);
            constructions::trace_arc(plane, sub)?
        }
        other => return Err(IoError::UnknownFamily(other.to_string())),
    };
    Ok(set)
}

pub const FAMILY_NAMES: &[&str] = &[
    "collinear",
    "pencil",
    "conic",
    "hyperoval",
    "unital",
    "baer-subplane",
    "complement-baer",
    "maximal-arc",
    "punctured-maximal-arc",
    "baer-pencil",
    "trace",
];

fn concurrency_json(c: &Concurrency) -> Value {
    match c {
        Concurrency::Empty => json!({ "kind": "empty" }),
        Concurrency::SingleLine(l) => json!({ "kind": "single-line", "line": l }),
        Concurrency::At(pt) => json!({ "kind": "at", "point": pt }),
        Concurrency::No => json!({ "kind": "no" }),
    }
}

fn profile_json(pt: u32, p: &PointProfile) -> Value {
    match p {
        PointProfile::Regular { m, t, renitent_line } => json!({
            "point": pt, "kind": "regular", "m": m, "t": t, "renitent_line": renitent_line,
        }),
        PointProfile::Irregular { m } => json!({ "point": pt, "kind": "irregular", "m": m }),
        PointProfile::Unstructured => json!({ "point": pt, "kind": "unstructured" }),
    }
}

fn trichotomy_json(t: &Trichotomy) -> Value {
    match t {
        Trichotomy::AllRegular { m, t } => json!({ "kind": "all-regular", "m": m, "t": t }),
        Trichotomy::AllIrregular { c } => json!({ "kind": "all-irregular", "c": c }),
        Trichotomy::UniqueIrregular { point, renitent_concurrent } => json!({
            "kind": "unique-irregular", "point": point, "renitent_concurrent": renitent_concurrent,
        }),
        Trichotomy::None => json!({ "kind": "none" }),
    }
}

fn audit_json(m: u32, t: u32, a: &CombinatorialAudit) -> Value {
    json!({
        "m": m,
        "t": t,
        "m_divides": a.m_divides,
        "gcd_divides": a.gcd_divides,
        "external_congruence": a.external_congruence,
        "t_divides": a.t_divides,
        "small_forces_m_div_q": a.small_forces_m_div_q,
        "zero_secants_div_p": a.zero_secants_div_p,
        "t_secants_minimal_blocking": a.t_secants_minimal_blocking,
        "interior_t_forces_m_div_q": a.interior_t_forces_m_div_q,
        "all_pass": a.all_pass(),
    })
}

pub fn report_json(r: &KMReport) -> Value {
    let tau: Vec<Value> = r.spectrum.tau.iter().map(|(&i, &c)| json!([i, c])).collect();
    let idents = r.spectrum.identities();
    json!({
        "q": r.q,
        "p": r.p,
        "size": r.size,
        "is_set": r.is_set,
        "spectrum": {
            "tau": tau,
            "identities": {
                "line_total": idents.line_total,
                "incidence_total": idents.incidence_total,
                "pair_total": idents.pair_total,
            },
        },
        "exact_types": r.exact_types.iter().map(|ty| json!({
            "m": ty.m, "t": ty.t, "degenerate": ty.degenerate,
        })).collect::<Vec<_>>(),
        "modp_types": r.modp_types.iter().map(|ty| json!({
            "m": ty.m, "t": ty.t,
        })).collect::<Vec<_>>(),
        "profiles": r.profiles.iter().map(|(pt, p)| profile_json(*pt, p)).collect::<Vec<_>>(),
        "trichotomy": trichotomy_json(&r.trichotomy),
        "t_secants": r.tsecants.as_ref().map(|(t, modp, lines, conc)| json!({
            "t": t,
            "mod_p": modp,
            "lines": lines,
            "concurrency": concurrency_json(conc),
        })),
    })
}

/// The full analysis object the `analyze` verb prints: the report plus one
/// arithmetic audit per exact type.
pub fn analysis_json(s: &PointMultiset) -> Result<Value, IoError> {
    let report = analysis::report(s)?;
    let mut v = report_json(&report);
    let audits: Vec<Value> = report
        .exact_types
        .iter()
        .map(|ty| {
            analysis::audit_combinatorial(s, ty.m, ty.t).map(|a| audit_json(ty.m, ty.t, &a))
        })
        .collect::<Result<_, _>>()?;
    v.as_object_mut()
        .expect("report is an object")
        .insert("audits".to_string(), Value::Array(audits));
    Ok(v)
}

pub fn solution_json(seq: usize, s: &PointMultiset) -> Value {
    let plane = s.plane();
    let triples: Vec<Value> = s
        .support()
        .into_iter()
        .map(|pt| {
            let c = plane.point(pt);
            json!([c[0].0, c[1].0, c[2].0])
        })
        .collect();
    json!({
        "record": "solution",
        "seq": seq,
        "size": s.size(),
        "support": s.support(),
        "triples": triples,
    })
}

pub fn summary_json(count: usize, nodes: u64, complete: bool) -> Value {
    json!({
        "record": "summary",
        "count": count,
        "nodes": nodes,
        "complete": complete,
    })
}

fn slope_json(s: &Slope) -> Value {
    match s {
        Slope::Finite(d) => json!({ "kind": "finite", "slope": d.0 }),
        Slope::Vertical => json!({ "kind": "vertical" }),
    }
}

pub fn renitent_line_json(l: &RenitentLine) -> Value {
    json!({
        "direction": slope_json(&l.direction),
        "intercept": l.intercept.0,
        "mu": l.mu,
        "tau": l.tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldCtx;

    fn plane_of(q: u64) -> Arc<Plane> {
        Arc::new(Plane::new(FieldCtx::of_order(q).unwrap()))
    }

    fn temp_path(tag: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("kmarc-io-{tag}-{}", std::process::id()));
        p
    }

    #[test]
    fn canonical_json_sorts_keys() {
        #[derive(Serialize)]
        struct Scrambled {
            zeta: u32,
            alpha: u32,
            mid: u32,
        }
        let text = canonical_json(&Scrambled { zeta: 1, alpha: 2, mid: 3 });
        let za = text.find("zeta").unwrap();
        let al = text.find("alpha").unwrap();
        let mi = text.find("mid").unwrap();
        assert!(al < mi && mi < za);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn document_round_trip_is_byte_exact() {
        let plane = plane_of(8);
        let s = construct_family(&plane, "trace", &BTreeMap::new()).unwrap();
        let meta = Metadata { family: "trace".into(), parameters: BTreeMap::from([("sub".into(), 2)]) };
        let doc = document_from_set(&s, Some(meta));
        assert_eq!(doc.body.len(), 12);

        let path = temp_path("roundtrip");
        write_document(&doc, &path).unwrap();
        let text1 = fs::read_to_string(&path).unwrap();
        let back = read_document(&path).unwrap();
        assert_eq!(back, doc);
        write_document(&back, &path).unwrap();
        let text2 = fs::read_to_string(&path).unwrap();
        assert_eq!(text1, text2);
        fs::remove_file(&path).ok();

        let s2 = set_from_document(&back).unwrap();
        assert_eq!(s2, s);
        let a1 = canonical_json(&analysis_json(&s).unwrap());
        let a2 = canonical_json(&analysis_json(&s2).unwrap());
        assert_eq!(a1, a2);
    }

    #[test]
    fn multiplicities_survive_the_document() {
        let plane = plane_of(4);
        let mut s = PointMultiset::empty(plane.clone());
        s.set_multiplicity(0, 3).unwrap();
        s.set_multiplicity(5, 1).unwrap();
        let doc = document_from_set(&s, None);
        assert!(doc.body.iter().any(|e| e.len() == 4 && e[3] == 3));
        let back = set_from_document(&doc).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let plane = plane_of(4);
        let s = construct_family(&plane, "hyperoval", &BTreeMap::new()).unwrap();
        let good = document_from_set(&s, None);

        let mut version = good.clone();
        version.header.format_version = 99;
        assert!(matches!(set_from_document(&version), Err(IoError::Version(99))));

        let mut modulus = good.clone();
        modulus.header.modulus = vec![0, 1, 1];
        assert!(matches!(set_from_document(&modulus), Err(IoError::ModulusMismatch { .. })));

        let mut entry = good.clone();
        entry.body.push(vec![1, 2]);
        assert!(matches!(set_from_document(&entry), Err(IoError::BadEntry(_))));

        let mut coord = good.clone();
        coord.body.push(vec![0, 9, 1]);
        assert!(matches!(set_from_document(&coord), Err(IoError::BadCoordinate(9, 4))));

        let mut zero = good.clone();
        zero.body.push(vec![0, 0, 0]);
        assert!(matches!(set_from_document(&zero), Err(IoError::BadEntry(_))));

        let mut unnorm = good.clone();
        unnorm.body.push(vec![0, 2, 1]);
        assert!(matches!(set_from_document(&unnorm), Err(IoError::NotNormalized(_))));

        let mut dup = good.clone();
        dup.body.push(good.body[0].clone());
        assert!(matches!(set_from_document(&dup), Err(IoError::DuplicateEntry(_))));
    }

    #[test]
    fn family_dispatch_matches_direct_construction() {
        let p9 = plane_of(9);
        let direct = constructions::hermitian_unital(&p9).unwrap();
        let named = construct_family(&p9, "unital", &BTreeMap::new()).unwrap();
        assert_eq!(direct, named);
        assert_eq!(named.size(), 28);

        let params = BTreeMap::from([("m".to_string(), 4u64)]);
        let p8 = plane_of(8);
        let arc = construct_family(&p8, "maximal-arc", &params).unwrap();
        assert_eq!(arc.size(), 28);

        assert!(matches!(
            construct_family(&p8, "septic", &BTreeMap::new()),
            Err(IoError::UnknownFamily(_))
        ));
        assert!(matches!(
            construct_family(&p8, "pencil", &BTreeMap::new()),
            Err(IoError::MissingParameter { name: "m", .. })
        ));
        assert!(matches!(
            construct_family(&p9, "hyperoval", &BTreeMap::new()),
            Err(IoError::Construct(ConstructError::EvenOrderRequired))
        ));
    }

    #[test]
    fn analysis_json_has_integer_leaves_only() {
        fn no_floats(v: &Value) -> bool {
            match v {
                Value::Number(n) => n.is_u64() || n.is_i64(),
                Value::Array(a) => a.iter().all(no_floats),
                Value::Object(o) => o.values().all(no_floats),
                _ => true,
            }
        }
        let plane = plane_of(9);
        let s = construct_family(&plane, "baer-pencil", &BTreeMap::new()).unwrap();
        let v = analysis_json(&s).unwrap();
        assert!(no_floats(&v));
        assert_eq!(v["size"], json!(24));
        assert!(v["exact_types"]
            .as_array()
            .unwrap()
            .iter()
            .any(|ty| ty["m"] == json!(3) && ty["t"] == json!(6)));
        assert!(v["audits"].as_array().unwrap().iter().all(|a| a["all_pass"] == json!(true)));
    }
}
