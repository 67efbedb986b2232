//! The `lax-glue` command line. Every run reads JSON documents, executes one
//! operation and emits a JSON report: command echo, per-check verdicts, an
//! output payload and, for every failing check, a witness that `replay`
//! re-runs on its own.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::concretecats::sets::CopshDoc;
use crate::concretecats::{Category, CoPresheaf, CopshCat, Matrix, PresheafMap};
use crate::extendable::{
    extend, for_each_section, gamma_restrict, is_extendable, is_one_generated, MultiplicityDiagram, MultiplicityDoc,
    Sd1Section,
};
use crate::laxdiagram::{validate, LaxDiagram, Mor, Obj, SetDiagram, SetDiagramDoc, ValidateOptions};
use crate::poset::{Decomposition, FinPoset, PosetDoc, PosetError};
use crate::rlaxsections::{
    confluence_defects, fracture, i_lower_star, is_iso_map, j_lower_shriek, j_lower_star, random_sections,
    recollement_report, section_homs, validate_section, CheckResult, EnumOptions, Section, SectionMap, SectionOf,
};
use crate::strattopos::{SpaceDoc, StratSpace};
use crate::subdivision::{
    jx, max_preserving_inclusions, sd_originating, subdivide, Chain, SdPoset, SubdivisionError, DEFAULT_CHAIN_LIMIT,
};

/// Environment variable capping the number of chains any subdivision may hold.
pub const SIZE_LIMIT_VAR: &str = "LAXGLUE_SIZE_LIMIT";

#[derive(Debug, Parser)]
#[command(name = "lax-glue", version, about = "Gluing, recollements and reconstruction over finite posets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    /// Downward-closed subset `a,b,...` selecting the open part.
    #[arg(long, global = true, value_name = "a,b,...")]
    pub sieve: Option<String>,
    /// Upward-closed subset `a,b,...` selecting the closed part.
    #[arg(long, global = true, value_name = "a,b,...")]
    pub cosieve: Option<String>,
    /// A chain `a,b,...` of the base.
    #[arg(long, global = true, value_name = "a,b,...")]
    pub at: Option<String>,
    /// Pointwise cardinality bound for enumerated set-valued objects.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_size: u64,
    /// Dimension bound for enumerated vector spaces.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_dim: u64,
    /// Number of randomly drawn sections per sampled check.
    #[arg(long, global = true, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Field characteristic overriding the one in a multiplicity document.
    #[arg(long, global = true)]
    pub field: Option<u32>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sieve: None,
            cosieve: None,
            at: None,
            max_size: 2,
            max_dim: 1,
            samples: 50,
            seed: 0,
            field: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Barycentric subdivision with its max labels and cocartesian edges;
    /// with --sieve also sd(P)_0 and every J_x.
    Subdivide { input: PathBuf },
    /// The index poset J_x of the chain given by --at.
    Jx { input: PathBuf },
    /// j^*, j_*, j_!, i^*, i_* and the gluing functor on one section.
    Glue { diagram: PathBuf, section: PathBuf },
    /// The fracture square of one section and whether its comparison is invertible.
    Fracture { diagram: PathBuf, section: PathBuf },
    /// Extendability, 1-generation and round trips for a multiplicity diagram
    /// over Δⁿ, on one section or on every section up to --max-dim.
    Extendable {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ExtCheck::Extendable)]
        check: ExtCheck,
        #[arg(long)]
        section: Option<PathBuf>,
    },
    /// Gluing diagram, transport and Θ for a stratified space.
    Reconstruct {
        space: PathBuf,
        #[arg(long, conflicts_with = "enumerate")]
        sheaf: Option<PathBuf>,
        /// Round-trip every sheaf of pointwise size at most this bound.
        #[arg(long)]
        enumerate: Option<usize>,
    },
    /// Runs a verification suite.
    Verify {
        input: PathBuf,
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Re-runs the single instance recorded in a witness.
    Replay { witness: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ExtCheck {
    Extendable,
    OneGenerated,
    Roundtrip,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Recollement,
    Confluence,
    Reconstruction,
    Extendable,
    Adjunction,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}: parse error at {locus}: {msg}")]
    Parse { file: String, locus: String, msg: String },
    #[error("{file}: validation failed at {locus}: {msg}")]
    ValidationFailed { file: String, locus: String, msg: String },
    #[error("{file}: size limit exceeded: {msg}")]
    SizeLimit { file: String, msg: String },
    #[error("{file}: {msg}")]
    Io { file: String, msg: String },
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::ValidationFailed { .. } => "ValidationFailed",
            CliError::SizeLimit { .. } => "SizeLimit",
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }
}

fn invalid(file: &str, locus: impl Into<String>, msg: impl ToString) -> CliError {
    let msg = msg.to_string();
    let msg = msg.strip_prefix("invalid data: ").unwrap_or(&msg).to_string();
    CliError::ValidationFailed { file: file.to_string(), locus: locus.into(), msg }
}

/// Splits `"a.b: message"` into its locus and message when the prefix looks
/// like a field path.
fn split_locus(msg: &str) -> (String, String) {
    match msg.split_once(": ") {
        Some((l, m)) if !l.is_empty() && !l.contains(' ') => (l.to_string(), m.to_string()),
        _ => (String::new(), msg.to_string()),
    }
}

fn join(prefix: &str, locus: &str) -> String {
    match (prefix.is_empty(), locus.is_empty()) {
        (true, _) => locus.to_string(),
        (false, true) => prefix.trim_end_matches('.').to_string(),
        (false, false) => format!("{prefix}{locus}"),
    }
}

/// Verdict of one family of checks, with the witness of its first failure.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub verdict: String,
    pub instances: usize,
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Totals {
    pub checks: usize,
    pub instances: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: Value,
    pub checks: Vec<CheckEntry>,
    pub totals: Totals,
    pub verdict: String,
    pub output: Value,
    /// Wall-clock time; the only field that varies between identical runs.
    pub elapsed_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }

    /// Plain-text view for humans.
    pub fn summary(&self) -> String {
        let name = self.command.get("name").and_then(Value::as_str).unwrap_or("?");
        let inner = self.command.get("replayed").unwrap_or(&self.command);
        let seed = inner.pointer("/config/seed").and_then(Value::as_u64).unwrap_or(0);
        let mut s = format!(
            "lax-glue {name}: {} ({} checks, {} instances, {} failures) in {} ms, seed {seed}\n",
            self.verdict, self.totals.checks, self.totals.instances, self.totals.failures, self.elapsed_ms
        );
        for c in &self.checks {
            s.push_str(&format!("  {}  {} ({})", c.verdict, c.name, c.instances));
            if let Some(f) = &c.first_failure {
                s.push_str(&format!("  first failure: {f}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Self-contained re-run of one failing instance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Witness {
    pub replay: ReplayDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReplayDoc {
    pub command: Command,
    pub config: RunConfig,
    pub inputs: BTreeMap<String, Value>,
    pub check: String,
    pub instance: Value,
}

#[derive(Default)]
struct Checks {
    list: Vec<(CheckResult, Option<Value>)>,
}

impl Checks {
    fn slot(&mut self, name: &str) -> &mut (CheckResult, Option<Value>) {
        let i = match self.list.iter().position(|(c, _)| c.name == name) {
            Some(i) => i,
            None => {
                self.list.push((CheckResult::new(name), None));
                self.list.len() - 1
            }
        };
        &mut self.list[i]
    }

    fn record(&mut self, name: &str, ok: bool, locus: impl FnOnce() -> String, inst: &dyn Fn() -> Value) {
        let slot = self.slot(name);
        let first = slot.0.failures == 0;
        slot.0.record(ok, locus);
        if !ok && first {
            slot.1 = Some(inst());
        }
    }

    fn merge(&mut self, r: &CheckResult, inst: &dyn Fn() -> Value) {
        let slot = self.slot(&r.name);
        let first = slot.0.failures == 0;
        slot.0.instances += r.instances;
        slot.0.failures += r.failures;
        if slot.0.first_failure.is_none() {
            slot.0.first_failure.clone_from(&r.first_failure);
        }
        if r.failures > 0 && first {
            slot.1 = Some(inst());
        }
    }
}

struct Doc {
    file: String,
    value: Value,
}

impl Doc {
    fn parse<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        parse_at(&self.file, "", &self.value)
    }
}

fn parse_at<T: DeserializeOwned>(file: &str, prefix: &str, v: &Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        CliError::Parse { file: file.to_string(), locus: join(prefix, &path), msg: e.into_inner().to_string() }
    })
}

/// Input documents, read from disk or supplied inline by a witness.
struct Sources {
    inline: BTreeMap<String, Value>,
    used: BTreeMap<String, Value>,
}

impl Sources {
    fn load(&mut self, role: &str, path: &Path) -> Result<Doc, CliError> {
        let file = path.display().to_string();
        let value = match self.inline.get(role) {
            Some(v) => v.clone(),
            None => {
                let text =
                    fs::read_to_string(path).map_err(|e| CliError::Io { file: file.clone(), msg: e.to_string() })?;
                serde_json::from_str(&text).map_err(|e| CliError::Parse {
                    file: file.clone(),
                    locus: format!("line {}, column {}", e.line(), e.column()),
                    msg: e.to_string(),
                })?
            }
        };
        self.used.insert(role.to_string(), value.clone());
        Ok(Doc { file, value })
    }
}

/// Chain cap from `LAXGLUE_SIZE_LIMIT`, defaulting to [`DEFAULT_CHAIN_LIMIT`].
pub fn chain_limit() -> usize {
    std::env::var(SIZE_LIMIT_VAR).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CHAIN_LIMIT)
}

fn size_err(file: &str, e: SubdivisionError) -> CliError {
    match e {
        SubdivisionError::SizeLimit { .. } => CliError::SizeLimit { file: file.to_string(), msg: e.to_string() },
        other => invalid(file, "", other),
    }
}

fn guarded_subdivide(file: &str, p: &FinPoset) -> Result<SdPoset, CliError> {
    subdivide(p, chain_limit()).map_err(|e| size_err(file, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Poset,
    Sets,
    Vect,
    Space,
}

fn kind_of(doc: &Doc) -> Result<Kind, CliError> {
    let obj = doc.value.as_object().ok_or_else(|| CliError::Parse {
        file: doc.file.clone(),
        locus: String::new(),
        msg: "expected a JSON object".into(),
    })?;
    if obj.contains_key("space") {
        Ok(Kind::Space)
    } else if obj.contains_key("mult") {
        Ok(Kind::Vect)
    } else if obj.contains_key("fibers") {
        Ok(Kind::Sets)
    } else if obj.contains_key("elements") {
        Ok(Kind::Poset)
    } else {
        Err(CliError::Parse {
            file: doc.file.clone(),
            locus: String::new(),
            msg: "unrecognised document: expected a key `space`, `mult`, `fibers` or `elements`".into(),
        })
    }
}

fn poset_locus(e: &PosetError) -> &'static str {
    match e {
        PosetError::DuplicateElement(_) => "elements",
        _ => "leq",
    }
}

fn load_poset_at(file: &str, prefix: &str, v: &Value) -> Result<FinPoset, CliError> {
    let pd: PosetDoc = parse_at(file, prefix, v)?;
    FinPoset::from_doc(&pd).map_err(|e| invalid(file, join(prefix, poset_locus(&e)), e))
}

fn load_poset(doc: &Doc) -> Result<FinPoset, CliError> {
    load_poset_at(&doc.file, "", &doc.value)
}

fn check_diagram<D: LaxDiagram>(file: &str, d: &D, seed: u64) -> Result<(), CliError> {
    guarded_subdivide(file, d.base())?;
    let rep = validate(d, &ValidateOptions { seed, ..ValidateOptions::default() });
    match rep.violations.first() {
        None => Ok(()),
        Some(v) => Err(invalid(file, v.locus.clone(), format!("{:?} violated", v.kind))),
    }
}

fn load_sets(doc: &Doc, cfg: &RunConfig) -> Result<SetDiagram, CliError> {
    let sd: SetDiagramDoc = doc.parse()?;
    let d = SetDiagram::from_doc(&sd).map_err(|e| {
        let (l, m) = split_locus(e.to_string().trim_start_matches("invalid data: "));
        invalid(&doc.file, l, m)
    })?;
    check_diagram(&doc.file, &d, cfg.seed)?;
    Ok(d)
}

fn load_vect(doc: &Doc, cfg: &RunConfig) -> Result<MultiplicityDiagram, CliError> {
    let mut md: MultiplicityDoc = doc.parse()?;
    if let Some(p) = cfg.field {
        md.field = p;
    }
    let d = MultiplicityDiagram::from_doc(&md).map_err(|e| {
        use crate::extendable::ExtendError as E;
        let locus = match &e {
            E::Shape(k) => format!("can.{k}"),
            E::Cocycle(_) => "can".to_string(),
            E::Parse(m) if m.contains("prime") => "field".to_string(),
            _ => "mult".to_string(),
        };
        invalid(&doc.file, locus, e)
    })?;
    check_diagram(&doc.file, &d, cfg.seed)?;
    Ok(d)
}

fn load_space(doc: &Doc) -> Result<StratSpace, CliError> {
    let sd: SpaceDoc = doc.parse()?;
    load_poset_at(&doc.file, "space.", &doc.value["space"])?;
    let p = load_poset_at(&doc.file, "strat_poset.", &doc.value["strat_poset"])?;
    let s = StratSpace::from_doc(&sd).map_err(|e| invalid(&doc.file, "pi", e))?;
    guarded_subdivide(&doc.file, &p.opposite())?;
    guarded_subdivide(&doc.file, s.space())?;
    Ok(s)
}

/// JSON encodings of fiber objects and morphisms for the section format
/// `{"x": {p: object}, "phi": {"p<q": morphism}}`.
pub trait SectionCodec: LaxDiagram {
    fn obj_to_json(&self, p: usize, x: &Obj<Self>) -> Value;
    fn mor_to_json(&self, f: &Mor<Self>) -> Value;
    fn obj_from_json(&self, p: usize, v: &Value) -> Result<Obj<Self>, String>;
    fn mor_from_json(&self, q: usize, src: &Obj<Self>, tgt: &Obj<Self>, v: &Value) -> Result<Mor<Self>, String>;
    /// The enumeration bound the config selects for this kind of fiber.
    fn bound(cfg: &RunConfig) -> usize;
}

impl SectionCodec for SetDiagram {
    fn obj_to_json(&self, _p: usize, x: &CoPresheaf) -> Value {
        serde_json::to_value(x.to_doc(false)).expect("serializable")
    }

    fn mor_to_json(&self, f: &PresheafMap) -> Value {
        serde_json::to_value(f.to_doc()).expect("serializable")
    }

    fn obj_from_json(&self, p: usize, v: &Value) -> Result<CoPresheaf, String> {
        let doc: CopshDoc = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        CoPresheaf::from_doc(&doc, Some(self.fiber_shape(p))).map_err(|e| e.to_string())
    }

    fn mor_from_json(&self, _q: usize, src: &CoPresheaf, tgt: &CoPresheaf, v: &Value) -> Result<PresheafMap, String> {
        let doc: BTreeMap<String, BTreeMap<String, String>> =
            serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        PresheafMap::from_doc(src, tgt, &doc).map_err(|e| e.to_string())
    }

    fn bound(cfg: &RunConfig) -> usize {
        cfg.max_size as usize
    }
}

impl SectionCodec for MultiplicityDiagram {
    fn obj_to_json(&self, _p: usize, x: &usize) -> Value {
        json!(x)
    }

    fn mor_to_json(&self, f: &Matrix) -> Value {
        json!(f.to_rows())
    }

    fn obj_from_json(&self, _p: usize, v: &Value) -> Result<usize, String> {
        serde_json::from_value(v.clone()).map_err(|e| e.to_string())
    }

    fn mor_from_json(&self, _q: usize, src: &usize, tgt: &usize, v: &Value) -> Result<Matrix, String> {
        let rows: Vec<Vec<i64>> = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        if rows.len() != *tgt {
            return Err(format!("expected {tgt} rows, found {}", rows.len()));
        }
        Matrix::from_rows(self.field(), *src, &rows).ok_or_else(|| format!("every row must have {src} entries"))
    }

    fn bound(cfg: &RunConfig) -> usize {
        cfg.max_dim as usize
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    x: BTreeMap<String, Value>,
    #[serde(default)]
    phi: BTreeMap<String, Value>,
}

pub fn section_to_json<D: SectionCodec>(d: &D, s: &SectionOf<D>) -> Value {
    let b = d.base();
    let x: serde_json::Map<String, Value> =
        s.x.iter().map(|(&p, v)| (b.name(p).to_string(), d.obj_to_json(p, v))).collect();
    let phi: serde_json::Map<String, Value> =
        s.phi.iter().map(|(&(p, q), f)| (format!("{}<{}", b.name(p), b.name(q)), d.mor_to_json(f))).collect();
    json!({"x": x, "phi": phi})
}

pub fn section_map_to_json<D: SectionCodec>(d: &D, m: &SectionMap<Mor<D>>) -> Value {
    let b = d.base();
    let psi: serde_json::Map<String, Value> =
        m.psi.iter().map(|(&p, f)| (b.name(p).to_string(), d.mor_to_json(f))).collect();
    Value::Object(psi)
}

/// Parses a section document. φ may be given on any set of pairs; the
/// cocycle is checked only when every pair of the domain is present.
pub fn section_from_json<D: SectionCodec>(
    d: &D,
    v: &Value,
    file: &str,
    prefix: &str,
) -> Result<SectionOf<D>, CliError> {
    let raw: RawSection = parse_at(file, prefix, v)?;
    let base = d.base();
    let mut x = BTreeMap::new();
    for (k, val) in &raw.x {
        let locus = join(prefix, &format!("x.{k}"));
        let p = base.index_of(k).map_err(|_| invalid(file, locus.clone(), "unknown base element"))?;
        x.insert(p, d.obj_from_json(p, val).map_err(|m| invalid(file, locus, m))?);
    }
    let mut phi = BTreeMap::new();
    for (k, val) in &raw.phi {
        let locus = join(prefix, &format!("phi.{k}"));
        let (a, b) = k.split_once('<').ok_or_else(|| invalid(file, locus.clone(), "expected `p<q`"))?;
        let p = base.index_of(a.trim()).map_err(|_| invalid(file, locus.clone(), "unknown base element"))?;
        let q = base.index_of(b.trim()).map_err(|_| invalid(file, locus.clone(), "unknown base element"))?;
        if !base.lt(p, q) {
            return Err(invalid(file, locus, "not a strict relation of the base"));
        }
        let (Some(xp), Some(xq)) = (x.get(&p), x.get(&q)) else {
            return Err(invalid(file, locus, "endpoint missing from x"));
        };
        let tgt = d.push(p, q, xp);
        phi.insert((p, q), d.mor_from_json(q, xq, &tgt, val).map_err(|m| invalid(file, locus, m))?);
    }
    let s = Section { x, phi };
    let dom = s.domain();
    let complete = dom.iter().all(|&p| dom.iter().all(|&q| !base.lt(p, q) || s.phi.contains_key(&(p, q))));
    if complete {
        validate_section(d, &s).map_err(|e| {
            let (l, m) = split_locus(&e.to_string());
            invalid(file, join(prefix, if l.is_empty() { "phi" } else { &l }), m)
        })?;
    }
    Ok(s)
}

fn names(b: &FinPoset, subset: &[usize]) -> Vec<String> {
    subset.iter().map(|&a| b.name(a).to_string()).collect()
}

fn parse_subset(file: &str, flag: &str, b: &FinPoset, list: &str) -> Result<Vec<usize>, CliError> {
    b.parse_subset(list).map_err(|e| invalid(file, flag, e))
}

/// The decomposition named by --sieve or --cosieve, if any.
fn selected_decomposition(file: &str, b: &FinPoset, cfg: &RunConfig) -> Result<Option<Decomposition>, CliError> {
    match (&cfg.sieve, &cfg.cosieve) {
        (Some(_), Some(_)) => Err(CliError::Usage("give at most one of --sieve and --cosieve".into())),
        (Some(s), None) => {
            let v = parse_subset(file, "--sieve", b, s)?;
            Ok(Some(Decomposition::from_sieve(b, &v).map_err(|e| invalid(file, "--sieve", e))?))
        }
        (None, Some(s)) => {
            let v = parse_subset(file, "--cosieve", b, s)?;
            Ok(Some(Decomposition::from_cosieve(b, &v).map_err(|e| invalid(file, "--cosieve", e))?))
        }
        (None, None) => Ok(None),
    }
}

fn all_decompositions(file: &str, b: &FinPoset, cfg: &RunConfig) -> Result<Vec<Decomposition>, CliError> {
    match selected_decomposition(file, b, cfg)? {
        Some(d) => Ok(vec![d]),
        None => Ok(b.sieves().iter().map(|s| Decomposition::from_sieve(b, s).expect("sieve")).collect()),
    }
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    only: Option<Vec<Value>>,
    checks: Checks,
}

fn instance_list<T>(
    only: &Option<Vec<Value>>,
    generate: impl FnOnce() -> Vec<T>,
    parse: impl Fn(&Value) -> Result<T, CliError>,
) -> Result<Vec<T>, CliError> {
    match only {
        Some(v) => v.iter().map(parse).collect(),
        None => Ok(generate()),
    }
}

/// Parses and runs `cli`, printing the report and returning the exit code:
/// 0 when every check passes, 1 when one fails, 2 on an input error.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command, &cli.config) {
        Ok(report) => {
            let body = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
            let written = match &cli.config.out {
                Some(p) => fs::write(p, &body).map_err(|e| e.to_string()),
                None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            eprint!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}

/// Executes one command.
pub fn run(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    if let Command::Replay { witness } = command {
        let mut src = Sources { inline: BTreeMap::new(), used: BTreeMap::new() };
        let doc = src.load("witness", witness)?;
        let v = doc.value.get("witness").unwrap_or(&doc.value);
        let w: Witness = parse_at(&doc.file, "", v)?;
        let r = w.replay;
        let inner = Sources { inline: r.inputs.clone(), used: BTreeMap::new() };
        let mut report = execute(&r.command, &r.config, inner, Some(vec![r.instance.clone()]))?;
        report.command = json!({"name": "replay", "witness": witness, "check": r.check, "replayed": report.command});
        return Ok(report);
    }
    execute(command, cfg, Sources { inline: BTreeMap::new(), used: BTreeMap::new() }, None)
}

fn execute(command: &Command, cfg: &RunConfig, mut src: Sources, only: Option<Vec<Value>>) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut ctx = Ctx { cfg, only, checks: Checks::default() };
    let output = match command {
        Command::Subdivide { input } => cmd_subdivide(&mut ctx, &src.load("input", input)?)?,
        Command::Jx { input } => cmd_jx(&mut ctx, &src.load("input", input)?)?,
        Command::Glue { diagram, section } | Command::Fracture { diagram, section } => {
            let dd = src.load("diagram", diagram)?;
            let sd = src.load("section", section)?;
            let frac = matches!(command, Command::Fracture { .. });
            match kind_of(&dd)? {
                Kind::Sets => cmd_glue(&mut ctx, &load_sets(&dd, cfg)?, &sd, frac)?,
                Kind::Vect => cmd_glue(&mut ctx, &load_vect(&dd, cfg)?, &sd, frac)?,
                _ => return Err(invalid(&dd.file, "", "expected a lax diagram (`fibers` or `mult`)")),
            }
        }
        Command::Extendable { input, check, section } => {
            let dd = src.load("input", input)?;
            let d = load_vect(&dd, cfg)?;
            let sec = match section {
                Some(p) => Some(src.load("section", p)?),
                None => None,
            };
            cmd_extendable(&mut ctx, &d, *check, sec.as_ref())?
        }
        Command::Reconstruct { space, sheaf, enumerate } => {
            let sd = src.load("space", space)?;
            let s = load_space(&sd)?;
            let sh = match sheaf {
                Some(p) => Some(src.load("sheaf", p)?),
                None => None,
            };
            cmd_reconstruct(&mut ctx, &s, &sd.file, sh.as_ref(), *enumerate)?
        }
        Command::Verify { input, suite } => {
            let dd = src.load("input", input)?;
            let kind = kind_of(&dd)?;
            match (suite, kind) {
                (Suite::Reconstruction, Kind::Space) => suite_reconstruction(&mut ctx, &load_space(&dd)?, &dd.file)?,
                (Suite::Extendable, Kind::Vect) => suite_extendable(&mut ctx, &load_vect(&dd, cfg)?, &dd.file)?,
                (Suite::Recollement | Suite::Adjunction, Kind::Sets) => {
                    suite_recollement(&mut ctx, &load_sets(&dd, cfg)?, &dd.file, *suite == Suite::Adjunction)?
                }
                (Suite::Recollement | Suite::Adjunction, Kind::Vect) => {
                    suite_recollement(&mut ctx, &load_vect(&dd, cfg)?, &dd.file, *suite == Suite::Adjunction)?
                }
                (Suite::Confluence, Kind::Sets) => suite_confluence(&mut ctx, &load_sets(&dd, cfg)?, &dd.file)?,
                (Suite::Confluence, Kind::Vect) => suite_confluence(&mut ctx, &load_vect(&dd, cfg)?, &dd.file)?,
                (s, k) => {
                    return Err(invalid(&dd.file, "", format!("suite {s:?} does not apply to a {k:?} document")));
                }
            }
        }
        Command::Replay { .. } => return Err(CliError::Usage("a witness cannot replay another witness".into())),
    };
    let inputs = src.used;
    let mut checks = Vec::new();
    for (r, inst) in ctx.checks.list {
        let witness = inst.map(|instance| {
            let w = Witness {
                replay: ReplayDoc {
                    command: command.clone(),
                    config: cfg.clone(),
                    inputs: inputs.clone(),
                    check: r.name.clone(),
                    instance,
                },
            };
            serde_json::to_value(w).expect("serializable")
        });
        checks.push(CheckEntry {
            verdict: if r.passed() { "PASS" } else { "FAIL" }.to_string(),
            name: r.name,
            instances: r.instances,
            failures: r.failures,
            first_failure: r.first_failure,
            witness,
        });
    }
    let totals = Totals {
        checks: checks.len(),
        instances: checks.iter().map(|c| c.instances).sum(),
        failures: checks.iter().map(|c| c.failures).sum(),
    };
    let verdict = if totals.failures == 0 { "PASS" } else { "FAIL" }.to_string();
    let mut echo = serde_json::to_value(command).expect("serializable");
    echo["config"] = serde_json::to_value(cfg).expect("serializable");
    Ok(Report { command: echo, checks, totals, verdict, output, elapsed_ms: start.elapsed().as_millis() as u64 })
}

fn cmd_subdivide(ctx: &mut Ctx, doc: &Doc) -> Result<Value, CliError> {
    let p = load_poset(doc)?;
    let sd = guarded_subdivide(&doc.file, &p)?;
    let none = || Value::Null;
    for &(a, b) in sd.poset().covers() {
        let (ca, cb) = (sd.chain(a), sd.chain(b));
        ctx.checks.record("max label monotone", p.leq(ca.top(), cb.top()), || format!("{ca:?} <= {cb:?}"), &none);
        let raises = p.lt(ca.top(), cb.top()) && cb.len() == ca.len() + 1;
        ctx.checks.record(
            "cocartesian edges append a new maximum",
            sd.is_cocartesian(a, b) == raises,
            || format!("{ca:?} <= {cb:?}"),
            &none,
        );
    }
    let mut out = json!({
        "count": sd.len(),
        "subdivision": sd.to_doc(),
        "dot": sd.to_dot("sd"),
    });
    if let Some(dec) = selected_decomposition(&doc.file, &p, ctx.cfg)? {
        let sd0 = sd_originating(&sd, &dec);
        out["sieve"] = json!(names(&p, &dec.sieve()));
        out["sd0"] = json!(sd0.poset().names());
        let mut all = serde_json::Map::new();
        for c in sd.chains() {
            if c.elems().iter().all(|&a| dec.in_cosieve(a)) {
                let j = jx(&dec, c).map_err(|e| size_err(&doc.file, e))?;
                all.insert(c.label(&p), json!(j.poset().names()));
            }
        }
        out["jx"] = Value::Object(all);
    }
    Ok(out)
}

fn cmd_jx(ctx: &mut Ctx, doc: &Doc) -> Result<Value, CliError> {
    let p = load_poset(doc)?;
    guarded_subdivide(&doc.file, &p)?;
    let dec = selected_decomposition(&doc.file, &p, ctx.cfg)?
        .ok_or_else(|| CliError::Usage("jx needs --sieve or --cosieve".into()))?;
    let at = ctx.cfg.at.as_deref().ok_or_else(|| CliError::Usage("jx needs --at".into()))?;
    let x = Chain::parse(&p, at).map_err(|e| invalid(&doc.file, "--at", e))?;
    let j = jx(&dec, &x).map_err(|e| invalid(&doc.file, "--at", e))?;
    let none = || Value::Null;
    for c in j.chains() {
        let extra: Vec<usize> = c.elems().iter().copied().filter(|&a| !x.contains(a)).collect();
        let ok = x.is_subchain_of(c)
            && !extra.is_empty()
            && extra.iter().all(|&a| dec.in_sieve(a) && p.lt(a, x.bottom()));
        ctx.checks.record("J_x chains are a sieve chain followed by x", ok, || c.label(&p), &none);
    }
    Ok(json!({
        "x": x.label(&p),
        "sieve": names(&p, &dec.sieve()),
        "chains": j.poset().names(),
        "order": j.poset().to_doc().leq,
        "dot": j.poset().to_dot("J_x"),
    }))
}

fn cmd_glue<D: SectionCodec>(ctx: &mut Ctx, d: &D, sdoc: &Doc, frac: bool) -> Result<Value, CliError> {
    let b = d.base();
    let dec = selected_decomposition(&sdoc.file, b, ctx.cfg)?
        .ok_or_else(|| CliError::Usage("needs --sieve or --cosieve".into()))?;
    let s = section_from_json(d, &sdoc.value, &sdoc.file, "")?;
    let (sieve, cosieve) = (dec.sieve(), dec.cosieve());
    let dom = s.domain();
    let all: Vec<usize> = (0..b.len()).collect();
    let none = || Value::Null;
    if frac {
        if dom != all {
            return Err(invalid(&sdoc.file, "x", "fracture needs a section over the whole base"));
        }
        return Ok(match fracture(d, &dec, &s) {
            Ok(f) => {
                ctx.checks.record("fracture comparison invertible", f.is_iso, || "comparison".into(), &none);
                json!({
                    "sieve": names(b, &sieve),
                    "open_part": section_to_json(d, &f.open_part),
                    "closed_part": section_to_json(d, &f.closed_part),
                    "glued": section_to_json(d, &f.glued),
                    "pullback": section_to_json(d, &f.pullback),
                    "comparison": section_map_to_json(d, &f.comparison),
                    "is_iso": f.is_iso,
                })
            }
            Err(e) => {
                ctx.checks.record("fracture comparison invertible", false, || e.to_string(), &none);
                Value::Null
            }
        });
    }
    let mut out = json!({"sieve": names(b, &sieve), "cosieve": names(b, &cosieve)});
    let has_open = sieve.iter().all(|p| dom.contains(p));
    let has_closed = cosieve.iter().all(|p| dom.contains(p));
    if !has_open && !has_closed {
        return Err(invalid(&sdoc.file, "x", "section covers neither the sieve nor the cosieve"));
    }
    if has_open {
        let u = s.restrict(&sieve);
        out["j_upper_star"] = section_to_json(d, &u);
        match j_lower_star(d, &dec, &u) {
            Ok(jp) => {
                ctx.checks.record("j^*j_* = id", jp.section.restrict(&sieve) == u, String::new, &none);
                out["j_lower_star"] = section_to_json(d, &jp.section);
                out["gluing"] = section_to_json(d, &jp.section.restrict(&cosieve));
            }
            Err(e) => ctx.checks.record("constructions", false, || format!("j_*: {e}"), &none),
        }
        match j_lower_shriek(d, &dec, &u) {
            Ok(js) => {
                ctx.checks.record("j^*j_! = id", js.restrict(&sieve) == u, String::new, &none);
                out["j_lower_shriek"] = section_to_json(d, &js);
            }
            Err(e) => ctx.checks.record("constructions", false, || format!("j_!: {e}"), &none),
        }
    }
    if has_closed {
        let w = s.restrict(&cosieve);
        out["i_upper_star"] = section_to_json(d, &w);
        match i_lower_star(d, &dec, &w) {
            Ok(is) => {
                ctx.checks.record("i^*i_* = id", is.restrict(&cosieve) == w, String::new, &none);
                let jt = is.restrict(&sieve).x.iter().all(|(&p, v)| d.fiber(p).is_terminal(v));
                ctx.checks.record("j^*i_* terminal", jt, String::new, &none);
                out["i_lower_star"] = section_to_json(d, &is);
            }
            Err(e) => ctx.checks.record("constructions", false, || format!("i_*: {e}"), &none),
        }
    }
    Ok(out)
}

fn spine_of(s: &SectionOf<MultiplicityDiagram>, n: usize) -> Option<Sd1Section> {
    if s.x.len() != n + 1 || (0..n).any(|k| !s.phi.contains_key(&(k, k + 1))) {
        return None;
    }
    let t = gamma_restrict(s);
    Some(t)
}

fn is_full(d: &MultiplicityDiagram, s: &SectionOf<MultiplicityDiagram>) -> bool {
    s.x.len() == d.n() + 1 && s.phi.len() == d.base().strict_pairs().len()
}

/// Checks on one section (or spine) of a multiplicity diagram. Returns
/// (one-generated, extendable) where defined.
fn extendable_checks(
    checks: &mut Checks,
    d: &MultiplicityDiagram,
    s: &SectionOf<MultiplicityDiagram>,
    which: &[ExtCheck],
) -> (Option<bool>, Option<bool>) {
    let inst = || section_to_json(d, s);
    let Some(t) = spine_of(s, d.n()) else {
        checks.record("spine data present", false, || "phi".into(), &inst);
        return (None, None);
    };
    let ext = is_extendable(d, &t);
    let mut one_gen = None;
    if is_full(d, s) {
        match is_one_generated(d, s) {
            Ok(og) => {
                one_gen = Some(og.method_b);
                if which.contains(&ExtCheck::OneGenerated) {
                    checks.record("method A = method B", og.method_a == og.method_b, || format!("{og:?}"), &inst);
                }
                if which.contains(&ExtCheck::Extendable) {
                    checks.record(
                        "one-generated iff spine extendable",
                        og.method_b == ext.is_ok(),
                        || format!("one-generated {} but failing strings {:?}", og.method_b, ext.failing),
                        &inst,
                    );
                }
                if which.contains(&ExtCheck::Roundtrip) && og.method_b {
                    let back = extend(d, &t);
                    checks.record(
                        "extend(gamma s) = s",
                        back.as_ref().is_ok_and(|b| b == s),
                        || format!("{:?}", back.err()),
                        &inst,
                    );
                }
            }
            Err(e) => checks.record("constructions", false, || e.to_string(), &inst),
        }
    }
    if which.contains(&ExtCheck::Roundtrip) && ext.is_ok() {
        let ok = extend(d, &t).is_ok_and(|e| gamma_restrict(&e) == t);
        checks.record("gamma(extend t) = t", ok, || "spine".into(), &inst);
    }
    if which.contains(&ExtCheck::Extendable) && ext.is_ok() {
        let r = extend(d, &t);
        checks.record("extension validates", r.is_ok(), || format!("{:?}", r.err()), &inst);
    }
    (one_gen, Some(ext.is_ok()))
}

fn cmd_extendable(
    ctx: &mut Ctx,
    d: &MultiplicityDiagram,
    check: ExtCheck,
    sec: Option<&Doc>,
) -> Result<Value, CliError> {
    if let Some(doc) = sec {
        let s = section_from_json(d, &doc.value, &doc.file, "")?;
        let t = spine_of(&s, d.n()).ok_or_else(|| invalid(&doc.file, "phi", "spine maps p<p+1 are missing"))?;
        let (og, ext) = extendable_checks(&mut ctx.checks, d, &s, &[check]);
        let failing = is_extendable(d, &t).failing;
        let mut out = json!({"extendable": ext, "failing": failing});
        if let Some(og) = og {
            let rep = is_one_generated(d, &s).map_err(|e| invalid(&doc.file, "phi", e))?;
            out["one_generated"] = json!(og);
            out["method_a"] = json!(rep.method_a);
            out["method_b"] = json!(rep.method_b);
        }
        if let Ok(e) = extend(d, &t) {
            out["extension"] = section_to_json(d, &e);
        }
        return Ok(out);
    }
    let (mut total, mut n_og, mut n_ext) = (0usize, 0usize, 0usize);
    let mut tally = |checks: &mut Checks, s: &SectionOf<MultiplicityDiagram>| {
        let (og, ext) = extendable_checks(checks, d, s, &[check]);
        total += 1;
        n_og += usize::from(og == Some(true));
        n_ext += usize::from(ext == Some(true));
    };
    match &ctx.only {
        Some(list) => {
            for v in list {
                let s = section_from_json(d, v, "witness", "instance.")?;
                tally(&mut ctx.checks, &s);
            }
        }
        None => {
            let checks = &mut ctx.checks;
            let _ = for_each_section(d, ctx.cfg.max_dim as usize, &mut |s| {
                tally(checks, s);
                ControlFlow::Continue(())
            });
        }
    }
    Ok(json!({"max_dim": ctx.cfg.max_dim, "sections": total, "one_generated": n_og, "extendable_spines": n_ext}))
}

fn sheaf_json(x: &CoPresheaf) -> Value {
    serde_json::to_value(x.to_doc(false)).expect("serializable")
}

fn sheaf_from_json(s: &StratSpace, file: &str, prefix: &str, v: &Value) -> Result<CoPresheaf, CliError> {
    let doc: CopshDoc = parse_at(file, prefix, v)?;
    CoPresheaf::from_doc(&doc, Some(s.space())).map_err(|e| {
        let (l, m) = split_locus(e.to_string().trim_start_matches("invalid data: "));
        invalid(file, join(prefix, &l), m)
    })
}

/// Unit and counit round trips for one sheaf.
fn round_trip_sheaf(checks: &mut Checks, s: &StratSpace, d: &SetDiagram, x: &CoPresheaf) -> Option<CoPresheaf> {
    let inst = || json!({"sheaf": sheaf_json(x)});
    let t = s.transport(x);
    checks.record("transport validates", validate_section(d, &t).is_ok(), || format!("{x:?}"), &inst);
    match s.theta_unit(d, x) {
        Ok((th, unit)) => {
            checks.record("theta(transport x) = x", unit.is_iso(), || format!("{x:?}"), &inst);
            Some(th.sheaf)
        }
        Err(e) => {
            checks.record("theta(transport x) = x", false, || e.to_string(), &inst);
            None
        }
    }
}

fn round_trip_section(checks: &mut Checks, s: &StratSpace, d: &SetDiagram, sec: &SectionOf<SetDiagram>) {
    let inst = || json!({"section": section_to_json(d, sec)});
    let ok = s.theta(d, sec).and_then(|th| s.theta_counit(d, sec, &th)).map(|m| is_iso_map(d, &m));
    match ok {
        Ok(iso) => checks.record("transport(theta s) = s", iso, || "counit".into(), &inst),
        Err(e) => checks.record("transport(theta s) = s", false, || e.to_string(), &inst),
    }
}

fn cmd_reconstruct(
    ctx: &mut Ctx,
    s: &StratSpace,
    file: &str,
    sheaf: Option<&Doc>,
    enumerate: Option<usize>,
) -> Result<Value, CliError> {
    let d = s.gluing_diagram().map_err(|e| invalid(file, "", e))?;
    check_diagram(file, &d, ctx.cfg.seed)?;
    let strata: serde_json::Map<String, Value> = (0..s.strat().len())
        .map(|p| (s.strat().name(p).to_string(), json!(s.stratum(p).names())))
        .collect();
    let mut out = json!({"strata": strata});
    if let Some(doc) = sheaf {
        let x = sheaf_from_json(s, &doc.file, "", &doc.value)?;
        let t = s.transport(&x);
        round_trip_section(&mut ctx.checks, s, &d, &t);
        if let Some(back) = round_trip_sheaf(&mut ctx.checks, s, &d, &x) {
            out["theta"] = sheaf_json(&back);
        }
        out["transport"] = section_to_json(&d, &t);
        return Ok(out);
    }
    if let Some(k) = enumerate {
        let xs = instance_list(
            &ctx.only,
            || CopshCat::new(s.space().clone()).objects(k),
            |v| sheaf_from_json(s, "witness", "instance.sheaf.", &v["sheaf"]),
        )?;
        for x in &xs {
            round_trip_sheaf(&mut ctx.checks, s, &d, x);
        }
        out["sheaves"] = json!(xs.len());
        return Ok(out);
    }
    let mut recovered = serde_json::Map::new();
    for o in s.strat().cosieves() {
        let label = s.strat().subset_label(&o);
        match s.recover_stratification(&d, &o) {
            Ok(r) => {
                ctx.checks.record("stratification recovery", r.matches && r.subterminal, || label.clone(), &|| {
                    Value::Null
                });
                let pts: Vec<String> =
                    (0..s.space().len()).filter(|&z| r.theta.size(z) == 1).map(|z| s.space().name(z).into()).collect();
                recovered.insert(label, json!(pts));
            }
            Err(e) => ctx.checks.record("stratification recovery", false, || e.to_string(), &|| Value::Null),
        }
    }
    out["recovered"] = Value::Object(recovered);
    Ok(out)
}

#[derive(Clone)]
enum RecInst<D: LaxDiagram> {
    One { sieve: Vec<usize>, section: SectionOf<D>, partners: Vec<SectionOf<D>> },
}

fn rec_to_json<D: SectionCodec>(d: &D, i: &RecInst<D>) -> Value {
    let RecInst::One { sieve, section, partners } = i;
    json!({
        "sieve": names(d.base(), sieve),
        "section": section_to_json(d, section),
        "partners": partners.iter().map(|p| section_to_json(d, p)).collect::<Vec<_>>(),
    })
}

fn rec_from_json<D: SectionCodec>(d: &D, v: &Value) -> Result<RecInst<D>, CliError> {
    let b = d.base();
    let sieve: Vec<String> = parse_at("witness", "instance.sieve", &v["sieve"])?;
    let sieve = parse_subset("witness", "instance.sieve", b, &sieve.join(","))?;
    let section = section_from_json(d, &v["section"], "witness", "instance.section.")?;
    let list: Vec<Value> = parse_at("witness", "instance.partners", &v["partners"])?;
    let partners = list
        .iter()
        .enumerate()
        .map(|(k, p)| section_from_json(d, p, "witness", &format!("instance.partners[{k}].")))
        .collect::<Result<_, _>>()?;
    Ok(RecInst::One { sieve, section, partners })
}

fn suite_recollement<D: SectionCodec>(ctx: &mut Ctx, d: &D, file: &str, adjunction_only: bool) -> Result<Value, CliError> {
    let bound = D::bound(ctx.cfg);
    let decs = all_decompositions(file, d.base(), ctx.cfg)?;
    let cfg = ctx.cfg;
    let insts = instance_list(
        &ctx.only,
        || {
            let mut r = rng(cfg);
            let pool = random_sections(d, bound, cfg.samples as usize, &mut r);
            let mut partners = pool.clone();
            partners.shuffle(&mut r);
            partners.truncate(3);
            let mut v = Vec::new();
            for dec in &decs {
                for s in &pool {
                    v.push(RecInst::One { sieve: dec.sieve(), section: s.clone(), partners: partners.clone() });
                }
            }
            v
        },
        |v| rec_from_json(d, v),
    )?;
    for inst in &insts {
        let RecInst::One { sieve, section, partners } = inst;
        let dec = Decomposition::from_sieve(d.base(), sieve).map_err(|e| invalid("witness", "instance.sieve", e))?;
        let w = || rec_to_json(d, inst);
        let rep = recollement_report(d, &dec, std::slice::from_ref(section), partners);
        for c in &rep.checks {
            if !adjunction_only || c.name.contains("bijection") {
                ctx.checks.merge(c, &w);
            }
        }
        if !adjunction_only {
            let f = fracture(d, &dec, section);
            ctx.checks.record(
                "fracture comparison invertible",
                f.as_ref().is_ok_and(|f| f.is_iso),
                || format!("sieve {}", d.base().subset_label(sieve)),
                &w,
            );
        }
    }
    Ok(json!({
        "sieves": decs.iter().map(|x| names(d.base(), &x.sieve())).collect::<Vec<_>>(),
        "instances": insts.len(),
        "bound": bound,
    }))
}

fn suite_confluence<D: SectionCodec>(ctx: &mut Ctx, d: &D, file: &str) -> Result<Value, CliError> {
    let bound = D::bound(ctx.cfg);
    let incl = max_preserving_inclusions(d.base(), 5, chain_limit()).map_err(|e| size_err(file, e))?;
    let cfg = ctx.cfg;
    let secs = instance_list(
        &ctx.only,
        || random_sections(d, bound, cfg.samples as usize, &mut rng(cfg)),
        |v| section_from_json(d, &v["section"], "witness", "instance.section."),
    )?;
    let b = d.base();
    for s in &secs {
        let w = || json!({"section": section_to_json(d, s)});
        for (sigma, tau) in &incl {
            let res = confluence_defects(d, s, sigma, tau);
            let locus = || match &res {
                Ok(bad) => format!("{} <= {}: order {:?}", sigma.label(b), tau.label(b), names(b, &bad[0])),
                Err(e) => e.to_string(),
            };
            ctx.checks.record("all factorization orders agree", res.as_ref().is_ok_and(Vec::is_empty), locus, &w);
        }
    }
    Ok(json!({"sections": secs.len(), "inclusions": incl.len()}))
}

fn suite_extendable(ctx: &mut Ctx, d: &MultiplicityDiagram, _file: &str) -> Result<Value, CliError> {
    let all = [ExtCheck::Extendable, ExtCheck::OneGenerated, ExtCheck::Roundtrip];
    let (mut total, mut n_og) = (0usize, 0usize);
    let mut one = |checks: &mut Checks, s: &SectionOf<MultiplicityDiagram>| {
        let (og, _) = extendable_checks(checks, d, s, &all);
        total += 1;
        n_og += usize::from(og == Some(true));
    };
    match &ctx.only {
        Some(list) => {
            for v in list {
                let s = section_from_json(d, v, "witness", "instance.")?;
                one(&mut ctx.checks, &s);
            }
        }
        None => {
            let checks = &mut ctx.checks;
            let _ = for_each_section(d, ctx.cfg.max_dim as usize, &mut |s| {
                one(checks, s);
                ControlFlow::Continue(())
            });
        }
    }
    Ok(json!({"max_dim": ctx.cfg.max_dim, "sections": total, "one_generated": n_og}))
}

enum ReconInst {
    Sheaf(CoPresheaf),
    Section(SectionOf<SetDiagram>),
    Pair(CoPresheaf, CoPresheaf),
    Cosieve(Vec<usize>),
    Global,
}

fn recon_from_json(s: &StratSpace, d: &SetDiagram, v: &Value) -> Result<ReconInst, CliError> {
    let f = "witness";
    if let Some(x) = v.get("sheaf") {
        Ok(ReconInst::Sheaf(sheaf_from_json(s, f, "instance.sheaf.", x)?))
    } else if let Some(x) = v.get("section") {
        Ok(ReconInst::Section(section_from_json(d, x, f, "instance.section.")?))
    } else if let Some(x) = v.get("pair") {
        Ok(ReconInst::Pair(
            sheaf_from_json(s, f, "instance.pair[0].", &x[0])?,
            sheaf_from_json(s, f, "instance.pair[1].", &x[1])?,
        ))
    } else if let Some(x) = v.get("cosieve") {
        let l: Vec<String> = parse_at(f, "instance.cosieve", x)?;
        Ok(ReconInst::Cosieve(parse_subset(f, "instance.cosieve", s.strat(), &l.join(","))?))
    } else {
        Ok(ReconInst::Global)
    }
}

fn suite_reconstruction(ctx: &mut Ctx, s: &StratSpace, file: &str) -> Result<Value, CliError> {
    let d = s.gluing_diagram().map_err(|e| invalid(file, "", e))?;
    check_diagram(file, &d, ctx.cfg.seed)?;
    let bound = ctx.cfg.max_size as usize;
    let cfg = ctx.cfg;
    let insts = instance_list(
        &ctx.only,
        || {
            let sheaves = CopshCat::new(s.space().clone()).objects(bound);
            let sections =
                crate::rlaxsections::enumerate_sections(&d, EnumOptions { bound, limit: usize::MAX }, None);
            let mut r = rng(cfg);
            let mut v: Vec<ReconInst> = Vec::new();
            for _ in 0..cfg.samples {
                let a = sheaves.choose(&mut r).expect("nonempty").clone();
                let b = sheaves.choose(&mut r).expect("nonempty").clone();
                v.push(ReconInst::Pair(a, b));
            }
            v.extend(sheaves.into_iter().map(ReconInst::Sheaf));
            v.extend(sections.into_iter().map(ReconInst::Section));
            v.extend(s.strat().cosieves().into_iter().map(ReconInst::Cosieve));
            v.push(ReconInst::Global);
            v
        },
        |v| recon_from_json(s, &d, v),
    )?;
    let (mut n_sheaves, mut n_sections) = (0usize, 0usize);
    for inst in &insts {
        match inst {
            ReconInst::Sheaf(x) => {
                n_sheaves += 1;
                round_trip_sheaf(&mut ctx.checks, s, &d, x);
            }
            ReconInst::Section(sec) => {
                n_sections += 1;
                round_trip_section(&mut ctx.checks, s, &d, sec);
            }
            ReconInst::Pair(x, y) => {
                let cat = CopshCat::new(s.space().clone());
                let lhs = cat.homs(x, y).len();
                let rhs = section_homs(&d, &s.transport(x), &s.transport(y)).len();
                let w = || json!({"pair": [sheaf_json(x), sheaf_json(y)]});
                ctx.checks.record("hom cardinality", lhs == rhs, || format!("{lhs} sheaf maps vs {rhs} section maps"), &w);
            }
            ReconInst::Cosieve(o) => {
                let w = || json!({"cosieve": names(s.strat(), o)});
                let label = s.strat().subset_label(o);
                match s.recover_stratification(&d, o) {
                    Ok(r) => ctx.checks.record("stratification recovery", r.matches && r.subterminal, || label, &w),
                    Err(e) => ctx.checks.record("stratification recovery", false, || e.to_string(), &w),
                }
            }
            ReconInst::Global => {
                let w = || json!({"global": true});
                for c in s.stratification_axioms() {
                    ctx.checks.merge(&c, &w);
                }
                ctx.checks.merge(&s.out_of_position(bound), &w);
            }
        }
    }
    Ok(json!({"max_size": bound, "sheaves": n_sheaves, "sections": n_sections}))
}
