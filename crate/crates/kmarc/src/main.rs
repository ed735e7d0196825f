use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use kmarc::analysis::{self, PointMultiset, Trichotomy};
use kmarc::constructions;
use kmarc::designs;
use kmarc::gf::{Fe, FieldCtx};
use kmarc::io::{self, Metadata};
use kmarc::plane::Plane;
use kmarc::redei::{self, RenitentVerdict};
use kmarc::search::{self, Dedupe, SearchLimits, SearchMode, SearchSpec};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "kmarc",
    about = "Construct, analyze, and exhaustively search two-intersection point sets in PG(2, q)",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format for reports and streams.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DedupeArg {
    None,
    Orbit,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a cataloged point set and emit it as a document.
    Construct {
        /// Family name; see `construct --help` for the catalog.
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(io::FAMILY_NAMES))]
        family: String,
        /// Plane order (prime power).
        #[arg(long)]
        q: Option<u64>,
        /// Characteristic, together with --n.
        #[arg(long)]
        p: Option<u32>,
        /// Extension degree, together with --p.
        #[arg(long)]
        n: Option<u32>,
        /// Family parameter as key=value (repeatable
        /// e.g. --param m=4, --param t=3, --param vertex=0, --param sub=4).
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, u64)>,
        /// Write the document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a document and print its full analysis report.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Exhaustive search; solutions stream in deterministic order.
    Search {
        /// Plane order (prime power).
        #[arg(long)]
        q: u64,
        /// Exact line-count type: every line meets the set in 0, M, or T points.
        #[arg(long, num_args = 2, value_names = ["M", "T"])]
        exact: Option<Vec<u32>>,
        /// All exact types surviving the arithmetic screens.
        #[arg(long)]
        exact_all: bool,
        /// Mod-p type: one line ≡ T and q lines ≡ M (mod p) through each point.
        #[arg(long, num_args = 2, value_names = ["M", "T"])]
        modp: Option<Vec<u32>>,
        /// Print only the summary count.
        #[arg(long)]
        count_only: bool,
        /// Worker threads (0 = all cores). Budgeted runs are forced
        /// single-threaded so their truncated output is reproducible.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Collapse projective orbits to their least representative.
        #[arg(long, value_enum, default_value_t = DedupeArg::None)]
        dedupe: DedupeArg,
        /// Stop after this many solutions.
        #[arg(long)]
        max_solutions: Option<usize>,
        /// Stop after visiting this many search nodes.
        #[arg(long)]
        node_budget: Option<u64>,
        /// Wall-clock budget in milliseconds (inherently not reproducible).
        #[arg(long)]
        time_budget_ms: Option<u64>,
    },
    /// Treat a document as an affine point set and verify that its renitent
    /// lines all pass through the coordinate-sum nucleus.
    Nucleus {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Export the group divisible design induced by a two-intersection set.
    Gdd {
        #[arg(long = "in")]
        input: PathBuf,
        /// Block parameter; defaults to the classified type.
        #[arg(long, requires = "t")]
        m: Option<u32>,
        /// Group parameter; defaults to the classified type.
        #[arg(long, requires = "m")]
        t: Option<u32>,
    },
    /// Run the built-in verification battery.
    Selftest {
        /// Shuffles the order checks run in; never affects their results.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_param(s: &str) -> Result<(String, u64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("{s:?} is not key=value"))?;
    let v = v.parse().map_err(|_| format!("{v:?} is not an unsigned integer"))?;
    Ok((k.to_string(), v))
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe such as `head` closes early
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = e.exit_code() == 0;
            let _ = e.print();
            return ExitCode::from(if ok { EXIT_OK } else { EXIT_USAGE });
        }
    };
    let format = cli.format;
    let outcome = match cli.cmd {
        Cmd::Construct { family, q, p, n, params, out } => {
            construct(format, &family, q, p, n, params, out)
        }
        Cmd::Analyze { input } => analyze(format, &input),
        Cmd::Search {
            q,
            exact,
            exact_all,
            modp,
            count_only,
            jobs,
            dedupe,
            max_solutions,
            node_budget,
            time_budget_ms,
        } => run_search(
            format,
            q,
            exact,
            exact_all,
            modp,
            count_only,
            jobs,
            dedupe,
            max_solutions,
            node_budget,
            time_budget_ms,
        ),
        Cmd::Nucleus { input } => nucleus(format, &input),
        Cmd::Gdd { input, m, t } => gdd(format, &input, m, t),
        Cmd::Selftest { seed } => Ok(selftest(seed)),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn plane_for(q: Option<u64>, p: Option<u32>, n: Option<u32>) -> Result<Arc<Plane>, String> {
    let field = match (q, p, n) {
        (_, Some(p), Some(n)) => {
            let f = FieldCtx::new(p, n).map_err(|e| e.to_string())?;
            if let Some(q) = q {
                if q != f.order() as u64 {
                    return Err(format!("--q {q} contradicts --p {p} --n {n}"));
                }
            }
            f
        }
        (Some(q), None, None) => FieldCtx::of_order(q).map_err(|e| e.to_string())?,
        _ => return Err("give --q, or both --p and --n".to_string()),
    };
    Ok(Arc::new(Plane::new(field)))
}

fn load_set(input: &PathBuf) -> Result<PointMultiset, String> {
    let doc = io::read_document(input).map_err(|e| e.to_string())?;
    io::set_from_document(&doc).map_err(|e| e.to_string())
}

fn construct(
    format: Format,
    family: &str,
    q: Option<u64>,
    p: Option<u32>,
    n: Option<u32>,
    params: Vec<(String, u64)>,
    out: Option<PathBuf>,
) -> Result<u8, String> {
    let plane = plane_for(q, p, n)?;
    let params: BTreeMap<String, u64> = params.into_iter().collect();
    let s = io::construct_family(&plane, family, &params).map_err(|e| e.to_string())?;
    let meta = Metadata { family: family.to_string(), parameters: params };
    let doc = io::document_from_set(&s, Some(meta));
    match out {
        Some(path) => {
            io::write_document(&doc, &path).map_err(|e| e.to_string())?;
            if format == Format::Text {
                println!("wrote {} points to {}", s.size(), path.display());
            }
        }
        None => print!("{}", io::canonical_json(&doc)),
    }
    Ok(EXIT_OK)
}

fn analyze(format: Format, input: &PathBuf) -> Result<u8, String> {
    let s = load_set(input)?;
    let v = io::analysis_json(&s).map_err(|e| match e {
        io::IoError::Analysis(analysis::AnalysisError::EmptySupport) => {
            "a non-empty proper subset is required".to_string()
        }
        other => other.to_string(),
    })?;
    match format {
        Format::Json => print!("{}", io::canonical_json(&v)),
        Format::Text => print!("{}", analysis_text(&s)?),
    }
    Ok(EXIT_OK)
}

fn analysis_text(s: &PointMultiset) -> Result<String, String> {
    use std::fmt::Write;
    let r = analysis::report(s).map_err(|e| match e {
        analysis::AnalysisError::EmptySupport => "a non-empty proper subset is required".to_string(),
        other => other.to_string(),
    })?;
    let mut out = String::new();
    let kind = if r.is_set { "set" } else { "multiset" };
    let _ = writeln!(out, "plane: PG(2, {}), characteristic {}", r.q, r.p);
    let _ = writeln!(out, "size: {} ({kind})", r.size);
    let spectrum: Vec<String> =
        r.spectrum.tau.iter().map(|(i, c)| format!("{i}:{c}")).collect();
    let _ = writeln!(out, "spectrum: {}", spectrum.join(" "));
    let ids = r.spectrum.identities();
    let _ = writeln!(
        out,
        "spectrum identities: lines {}, incidences {}, pairs {}",
        pass(ids.line_total),
        pass(ids.incidence_total),
        ids.pair_total.map_or("n/a".to_string(), |b| pass(b).to_string()),
    );
    if r.exact_types.is_empty() {
        let _ = writeln!(out, "exact types: none");
    }
    for ty in &r.exact_types {
        let tag = if ty.degenerate { " (degenerate)" } else { "" };
        let _ = writeln!(out, "exact type: ({}, {}){tag}", ty.m, ty.t);
        let audit = analysis::audit_combinatorial(s, ty.m, ty.t).map_err(|e| e.to_string())?;
        let _ = writeln!(
            out,
            "  audit: {}",
            if audit.all_pass() { "all checks pass" } else { "CHECK FAILED" }
        );
    }
    if r.modp_types.is_empty() {
        let _ = writeln!(out, "mod-{} types: none", r.p);
    }
    for ty in &r.modp_types {
        let _ = writeln!(out, "mod-{} type: ({}, {})", r.p, ty.m, ty.t);
    }
    let _ = match &r.trichotomy {
        Trichotomy::AllRegular { m, t } => {
            writeln!(out, "points: all regular with residues ({m}, {t})")
        }
        Trichotomy::AllIrregular { c } => {
            writeln!(out, "points: all irregular with residue {c}")
        }
        Trichotomy::UniqueIrregular { point, renitent_concurrent } => writeln!(
            out,
            "points: unique irregular point {point}, renitent lines concurrent there: {renitent_concurrent}"
        ),
        Trichotomy::None => writeln!(out, "points: no regular/irregular structure"),
    };
    if let Some((t, modp, lines, conc)) = &r.tsecants {
        let how = if *modp { format!("≡ {t} (mod {})", r.p) } else { format!("= {t}") };
        let _ = writeln!(out, "t-secants ({how}): {} lines, {}", lines.len(), concurrency_text(conc));
    }
    Ok(out)
}

fn pass(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn concurrency_text(c: &analysis::Concurrency) -> String {
    match c {
        analysis::Concurrency::Empty => "no such lines".to_string(),
        analysis::Concurrency::SingleLine(l) => format!("single line {l}"),
        analysis::Concurrency::At(pt) => format!("concurrent at point {pt}"),
        analysis::Concurrency::No => "not concurrent".to_string(),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_search(
    format: Format,
    q: u64,
    exact: Option<Vec<u32>>,
    exact_all: bool,
    modp: Option<Vec<u32>>,
    count_only: bool,
    jobs: usize,
    dedupe: DedupeArg,
    max_solutions: Option<usize>,
    node_budget: Option<u64>,
    time_budget_ms: Option<u64>,
) -> Result<u8, String> {
    let mode = match (&exact, exact_all, &modp) {
        (Some(mt), false, None) => SearchMode::Exact { m: mt[0], t: mt[1] },
        (None, true, None) => SearchMode::ExactAll,
        (None, false, Some(mt)) => SearchMode::Modp { m: mt[0], t: mt[1] },
        _ => return Err("give exactly one of --exact M T, --exact-all, --modp M T".to_string()),
    };
    let plane = plane_for(Some(q), None, None)?;
    let mut spec = SearchSpec::new(plane, mode);
    let budgeted = max_solutions.is_some() || node_budget.is_some();
    spec.jobs = if budgeted { 1 } else { jobs };
    spec.dedupe = match dedupe {
        DedupeArg::None => Dedupe::None,
        DedupeArg::Orbit => Dedupe::Orbit,
    };
    spec.limits = SearchLimits {
        max_solutions: max_solutions.unwrap_or(usize::MAX),
        node_budget: node_budget.unwrap_or(u64::MAX),
        time_budget: time_budget_ms.map(Duration::from_millis),
    };
    let outcome = search::search(&spec).map_err(|e| e.to_string())?;
    match format {
        Format::Json => {
            if !count_only {
                for (i, s) in outcome.sets.iter().enumerate() {
                    println!("{}", io::json_line(&io::solution_json(i, s)));
                }
            }
            println!(
                "{}",
                io::json_line(&io::summary_json(outcome.sets.len(), outcome.nodes, outcome.complete))
            );
        }
        Format::Text => {
            if count_only {
                println!("{}", outcome.sets.len());
            } else {
                for (i, s) in outcome.sets.iter().enumerate() {
                    println!("solution {i}: size {}, support {:?}", s.size(), s.support());
                }
                println!(
                    "count: {} ({}, {} nodes)",
                    outcome.sets.len(),
                    if outcome.complete { "complete" } else { "truncated" },
                    outcome.nodes
                );
            }
        }
    }
    Ok(if outcome.complete { EXIT_OK } else { EXIT_BUDGET })
}

fn nucleus(format: Format, input: &PathBuf) -> Result<u8, String> {
    let s = load_set(input)?;
    let plane = s.plane().clone();
    let f = plane.field();
    let mut pts: Vec<(Fe, Fe)> = Vec::new();
    for pt in s.support() {
        let c = plane.point(pt);
        if c[0] != f.one() {
            return Err(format!(
                "point {:?} lies at infinity; the nucleus verb needs an affine set",
                [c[0].0, c[1].0, c[2].0]
            ));
        }
        pts.push((c[1], c[2]));
    }
    let verdict = redei::verify_renitent_lemma(f, &pts).map_err(|e| e.to_string())?;
    let (nucleus, lines, concurrent) = match verdict {
        RenitentVerdict::Verified { nucleus, lines } => (nucleus, lines, true),
        RenitentVerdict::Counterexample { nucleus, line } => (nucleus, vec![line], false),
    };
    match format {
        Format::Json => {
            let v = json!({
                "record": "nucleus",
                "size": pts.len(),
                "nucleus": [nucleus.0.0, nucleus.1.0],
                "renitent_lines": lines.iter().map(io::renitent_line_json).collect::<Vec<_>>(),
                "all_concurrent": concurrent,
            });
            print!("{}", io::canonical_json(&v));
        }
        Format::Text => {
            println!("set size: {}", pts.len());
            println!("nucleus: ({}, {})", nucleus.0.0, nucleus.1.0);
            println!("renitent lines: {}", lines.len());
            println!("all renitent lines concurrent: {concurrent}");
        }
    }
    Ok(if concurrent { EXIT_OK } else { EXIT_VERIFY })
}

fn gdd(format: Format, input: &PathBuf, m: Option<u32>, t: Option<u32>) -> Result<u8, String> {
    let s = load_set(input)?;
    let pairs: Vec<(u32, u32)> = match (m, t) {
        (Some(m), Some(t)) => vec![(m, t)],
        _ => {
            let types = analysis::classify_exact(&s).map_err(|e| e.to_string())?;
            let found: Vec<(u32, u32)> =
                types.iter().filter(|ty| ty.m != ty.t).map(|ty| (ty.m, ty.t)).collect();
            if found.is_empty() {
                return Err("no exact type with distinct parameters; pass --m and --t".to_string());
            }
            found
        }
    };
    let mut last = String::new();
    for (m, t) in pairs {
        match designs::gdd_from_km(&s, m, t) {
            Ok(g) => {
                let verified = designs::gdd_verify(&g);
                match format {
                    Format::Json => {
                        let v = json!({
                            "record": "gdd",
                            "k": g.k,
                            "group_size": g.group_size,
                            "points": g.points,
                            "groups": g.groups,
                            "blocks": g.blocks,
                            "verified": verified,
                        });
                        print!("{}", io::canonical_json(&v));
                    }
                    Format::Text => {
                        println!("{}-GDD on {} points", g.k, g.points.len());
                        println!("groups ({} of size {}):", g.groups.len(), g.group_size);
                        for gr in &g.groups {
                            println!("  {gr:?}");
                        }
                        println!("blocks ({} of size {}):", g.blocks.len(), g.k);
                        for b in &g.blocks {
                            println!("  {b:?}");
                        }
                        println!("verified: {verified}");
                    }
                }
                return Ok(if verified { EXIT_OK } else { EXIT_VERIFY });
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(last)
}

struct Check {
    name: &'static str,
    run: fn() -> Result<String, String>,
}

fn selftest(seed: u64) -> u8 {
    let mut checks = vec![
        Check { name: "spectrum-identities", run: check_spectrum },
        Check { name: "renitent-nucleus", run: check_renitent },
        Check { name: "hyperoval-census", run: check_hyperovals },
        Check { name: "gdd-pair-axiom", run: check_gdd },
        Check { name: "document-roundtrip", run: check_roundtrip },
        Check { name: "family-catalog", run: check_families },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    checks.shuffle(&mut rng);
    let mut ok = true;
    for check in &checks {
        match (check.run)() {
            Ok(detail) => println!("check {}: ok ({detail})", check.name),
            Err(detail) => {
                ok = false;
                println!("check {}: FAILED ({detail})", check.name);
            }
        }
    }
    println!("selftest: {}", if ok { "all checks passed" } else { "FAILURES" });
    if ok {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn check_spectrum() -> Result<String, String> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total = 0u32;
    for q in [4u64, 5] {
        let plane = Arc::new(Plane::new(FieldCtx::of_order(q).unwrap()));
        for _ in 0..500 {
            let mut s = PointMultiset::empty(plane.clone());
            let picks = rng.gen_range(1..plane.num_points() as u32);
            for _ in 0..picks {
                let pt = rng.gen_range(0..plane.num_points() as u32);
                let mu = rng.gen_range(1..=plane.order());
                s.set_multiplicity(pt, mu).map_err(|e| e.to_string())?;
            }
            let ids = analysis::spectrum(&s).identities();
            if !ids.line_total || !ids.incidence_total || ids.pair_total == Some(false) {
                return Err(format!("identity violated on a random multiset at q={q}"));
            }
            total += 1;
        }
    }
    Ok(format!("{total} random multisets"))
}

fn check_renitent() -> Result<String, String> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut total = 0u32;
    for q in [3u64, 5, 7, 9] {
        let f = FieldCtx::of_order(q).unwrap();
        for _ in 0..100 {
            let mut pts: Vec<(Fe, Fe)> = Vec::new();
            loop {
                pts.clear();
                let size = rng.gen_range(1..2 * q as u32);
                for _ in 0..size {
                    pts.push((
                        Fe(rng.gen_range(0..q as u32)),
                        Fe(rng.gen_range(0..q as u32)),
                    ));
                }
                pts.sort();
                pts.dedup();
                if pts.len() as u32 % f.p() != 0 {
                    break;
                }
            }
            match redei::verify_renitent_lemma(&f, &pts) {
                Ok(RenitentVerdict::Verified { .. }) => total += 1,
                Ok(RenitentVerdict::Counterexample { .. }) => {
                    return Err(format!("renitent line misses the nucleus at q={q}"))
                }
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(format!("{total} random affine sets"))
}

fn check_hyperovals() -> Result<String, String> {
    let plane = Arc::new(Plane::new(FieldCtx::of_order(4).unwrap()));
    let out = search::search(&SearchSpec::new(plane, SearchMode::Exact { m: 2, t: 2 }))
        .map_err(|e| e.to_string())?;
    if out.sets.len() == 168 && out.complete {
        Ok("168 six-point sets of type (2, 2) at q=4".to_string())
    } else {
        Err(format!("expected 168 complete, got {} (complete: {})", out.sets.len(), out.complete))
    }
}

fn check_gdd() -> Result<String, String> {
    let plane = Arc::new(Plane::new(FieldCtx::of_order(8).unwrap()));
    let s = constructions::trace_arc(&plane, 2).map_err(|e| e.to_string())?;
    let g = designs::gdd_from_km(&s, 2, 4).map_err(|e| e.to_string())?;
    if designs::gdd_verify(&g) {
        Ok(format!("{} groups of {} on {} points", g.groups.len(), g.group_size, g.points.len()))
    } else {
        Err("pair axiom violated on the trace-arc design".to_string())
    }
}

fn check_roundtrip() -> Result<String, String> {
    let plane = Arc::new(Plane::new(FieldCtx::of_order(9).unwrap()));
    let s = io::construct_family(&plane, "baer-pencil", &BTreeMap::new())
        .map_err(|e| e.to_string())?;
    let doc = io::document_from_set(&s, None);
    let text = io::canonical_json(&doc);
    let back: io::Document = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let s2 = io::set_from_document(&back).map_err(|e| e.to_string())?;
    if s2 != s {
        return Err("parsed document disagrees with the source set".to_string());
    }
    let a1 = io::canonical_json(&io::analysis_json(&s).map_err(|e| e.to_string())?);
    let a2 = io::canonical_json(&io::analysis_json(&s2).map_err(|e| e.to_string())?);
    if a1 == a2 {
        Ok("write/read/analyze is byte-stable".to_string())
    } else {
        Err("analysis differs after a document round trip".to_string())
    }
}

fn check_families() -> Result<String, String> {
    let p8 = Arc::new(Plane::new(FieldCtx::of_order(8).unwrap()));
    let trace = constructions::trace_arc(&p8, 2).map_err(|e| e.to_string())?;
    let fam = search::match_family(&trace).map_err(|e| e.to_string())?;
    if fam.family != search::Family::Trace {
        return Err(format!("trace arc classified as {}", fam.family.name()));
    }
    let p9 = Arc::new(Plane::new(FieldCtx::of_order(9).unwrap()));
    let unital = constructions::hermitian_unital(&p9).map_err(|e| e.to_string())?;
    let fam = search::match_family(&unital).map_err(|e| e.to_string())?;
    if fam.family != search::Family::Unital {
        return Err(format!("unital classified as {}", fam.family.name()));
    }
    Ok("constructed families land in their catalog entries".to_string())
}
