//! The `dslab` command line.
//!
//! Every run prints one document whose `config` header records the full
//! argument set, the seed and the generator, so identical invocations give
//! identical bytes. The worker count is not part of the header: results do
//! not depend on it.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::ackermann::{alpha2, min_j, table, AckValue};
use crate::bounds::{
    best_upper_bound, check_feather_ineqs, check_happiness, default_c, upper_bound_blocked,
};
use crate::constructions::{predict_stats, s4, s5, DEFAULT_MAX_SYMBOLS};
use crate::envelope::{lower_envelope, parse_segments, random_lines, random_segments, Segment};
use crate::error::{Error, Result};
use crate::oracle::{lambda_blocked_exact, lambda_exact, SearchBudget};
use crate::random::{rng, PRNG_NAME};
use crate::selftest::{self, Scale};
use crate::sequence::{ds_order, max_alternation, order_violation, BlockedSequence, SequenceJson};
use crate::tree::{build_ensemble, build_tree, check_nesting, check_nesting5, count_feathers, LeafLabels, Strategy};

/// Environment variable overriding the default symbol cap.
pub const MAX_SYMBOLS_VAR: &str = "DSLAB_MAX_SYMBOLS";

#[derive(Parser, Debug)]
#[command(name = "dslab", version, about = "Davenport-Schinzel sequence laboratory")]
pub struct Cli {
    /// Seed of the ChaCha8 generator used by every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; `csv` is available for `ackermann` and `bounds --table`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Build the order-4 or order-5 lower-bound sequence S(i,j).
    Generate(GenerateArgs),
    /// Check a sequence file: repetitions, blocks, DS order.
    Verify(VerifyArgs),
    /// Build a derivation tree and report feathers or nesting.
    Tree(TreeArgs),
    /// Exhaustive search for lambda_s(n) or lambda_s(n,m).
    Oracle(OracleArgs),
    /// Closed-form upper bounds and the appendix inequality suite.
    Bounds(BoundsArgs),
    /// Lower envelope of segments and its transcript.
    Envelope(EnvelopeArgs),
    /// Run the acceptance checks.
    Selftest(SelftestArgs),
    /// Table of the Ackermann hierarchy a(i,j) up to saturation, or an alpha grid.
    Ackermann(AckermannArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..=5))]
    pub order: u32,
    #[arg(short = 'i', value_parser = clap::value_parser!(u32).range(1..))]
    pub i: u32,
    #[arg(short = 'j', value_parser = clap::value_parser!(u64).range(1..))]
    pub j: u64,
    /// Print the predicted statistics only.
    #[arg(long)]
    pub stats_only: bool,
    /// Refuse sequences longer than this (default 10^7 or $DSLAB_MAX_SYMBOLS).
    #[arg(long)]
    pub max_symbols: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Fail unless the sequence has DS order at most this.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeReport {
    Feathers,
    Nesting,
    Ensemble,
}

#[derive(Args, Debug, Serialize)]
pub struct TreeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// halving | ackermann:i,c | permissible:r
    #[arg(long, default_value = "permissible:1")]
    pub strategy: String,
    #[arg(long, value_enum, default_value = "feathers")]
    pub report: TreeReport,
    /// Delete symbols occurring once instead of failing.
    #[arg(long)]
    pub drop_singletons: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub n: usize,
    /// Number of blocks; omit for the unblocked value.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated `nodes=N`, `secs=T`, `depth=D`.
    #[arg(long, default_value = "nodes=1e8")]
    pub budget: String,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long, required_unless_present = "verify_appendices")]
    pub s: Option<u32>,
    #[arg(long, required_unless_present = "verify_appendices")]
    pub n: Option<u64>,
    #[arg(long, required_unless_present = "verify_appendices")]
    pub m: Option<u64>,
    /// Bound at this Ackermann level.
    #[arg(long, conflicts_with = "best")]
    pub i: Option<u32>,
    /// Best bound over levels (the default).
    #[arg(long)]
    pub best: bool,
    /// Exponent constant (default max(3, s-2)).
    #[arg(long)]
    pub c: Option<u32>,
    /// One row per level 1..=imax.
    #[arg(long)]
    pub table: bool,
    /// Check the recurrence inequalities of the bound families.
    #[arg(long)]
    pub verify_appendices: bool,
    #[arg(long, default_value_t = 12)]
    pub smax: u32,
    #[arg(long, default_value_t = 12)]
    pub imax: u32,
    /// Levels for the order-5 feather inequalities.
    #[arg(long, default_value_t = 20)]
    pub feather_imax: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lines,
    Segments,
}

#[derive(Args, Debug, Serialize)]
#[command(after_help = "Random instances: lines have slope and intercept p/q with |p| <= 1000, 1 <= q <= 20; \
segments additionally have endpoints p/q with 0 <= p <= 1000, 1 <= q <= 4 (redrawn until x1 < x2). \
All values are drawn uniformly from the seeded generator.")]
pub struct EnvelopeArgs {
    /// JSON list of {x1, x2, a, b} with rationals as [p, q]; null ends are unbounded.
    #[arg(long = "in", required_unless_present = "random", conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Draw random instances instead of reading a file.
    #[arg(long, value_enum)]
    pub random: Option<Family>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Fail unless every transcript has order at most this.
    #[arg(long)]
    pub check_order: Option<usize>,
    /// Add length, order and the order-3 bound at (n, 2n-1).
    #[arg(long)]
    pub stats: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Small instances only.
    #[arg(long)]
    pub quick: bool,
    /// Run only these criteria (1-9).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct AckermannArgs {
    #[arg(long, default_value_t = 4)]
    pub imax: u32,
    #[arg(long, default_value_t = 64)]
    pub jmax: u64,
    /// Values at or above this are reported as saturated.
    #[arg(long, default_value_t = u64::MAX)]
    pub threshold: u64,
    /// Print alpha(n,m) on powers of ten up to this instead.
    #[arg(long)]
    pub alpha_grid: Option<u64>,
}

/// Result of one invocation.
#[derive(Debug, Default)]
pub struct Output {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

/// Exit status 1: the command ran and found a failed check.
struct Body {
    doc: Doc,
    failed: bool,
}

enum Doc {
    Json(Value),
    Csv { header: Vec<&'static str>, rows: Vec<Vec<Value>> },
}

fn max_symbols_default() -> u64 {
    std::env::var(MAX_SYMBOLS_VAR).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_SYMBOLS)
}

fn big_json(x: &BigUint) -> Value {
    crate::constructions::json_num(x)
}

fn read(path: &PathBuf) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Reads a sequence file; a `generate` output with an embedded sequence
/// is accepted too.
fn read_sequence(path: &PathBuf) -> Result<(BlockedSequence, bool)> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Malformed(e.to_string()))?;
    let inner = if v.get("symbols").is_some() { v } else { v.get("sequence").cloned().unwrap_or(v) };
    let sj: SequenceJson = serde_json::from_value(inner).map_err(|e| Error::Malformed(e.to_string()))?;
    Ok((sj.to_blocked()?, sj.blocks.is_some()))
}

fn generate(a: &GenerateArgs) -> Result<Body> {
    let st = predict_stats(a.order, a.i, a.j)?;
    let mut out = match st.to_json() {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if !a.stats_only {
        let cap = a.max_symbols.unwrap_or_else(max_symbols_default);
        let seq = if a.order == 4 { s4(a.i, a.j, cap)? } else { s5(a.i, a.j, cap)? };
        out.insert("sequence".into(), serde_json::to_value(SequenceJson::from_blocked(&seq)).expect("json"));
    }
    Ok(Body { doc: Doc::Json(Value::Object(out)), failed: false })
}

fn verify(a: &VerifyArgs) -> Result<Body> {
    let (b, blocked) = read_sequence(&a.input)?;
    let repetition_free = !b.to_sequence().has_repetition();
    let mut out = json!({
        "length": b.len(),
        "alphabet": b.alphabet_size(),
        "blocks": b.num_blocks(),
        "repetition_free": repetition_free,
    });
    // blocks may repeat a symbol across a boundary
    let mut valid = blocked || repetition_free;
    match a.order {
        Some(s) => {
            let w = order_violation(b.flat(), s);
            valid &= w.is_none();
            out["order"] = json!(s);
            out["violation"] = json!(w.map(|w| json!({"a": w.a, "b": w.b, "length": w.length})));
        }
        None => {
            let (alt, w) = max_alternation(b.flat());
            out["ds_order"] = json!(ds_order(b.flat()));
            out["max_alternation"] = json!(w.map(|w| json!({"a": w.a, "b": w.b, "length": alt})));
        }
    }
    out["valid"] = json!(valid);
    Ok(Body { doc: Doc::Json(out), failed: !valid })
}

#[derive(Serialize, Default, Clone)]
struct SymbolRow {
    symbol: u32,
    occurrences: u64,
    feathers: u64,
    double_feathers: Option<u64>,
    wingtips: u64,
}

fn per_symbol(seq: &BlockedSequence, labels: &LeafLabels, doubles: bool) -> Vec<SymbolRow> {
    let mut rows: std::collections::BTreeMap<u32, SymbolRow> = std::collections::BTreeMap::new();
    for (p, &a) in seq.flat().iter().enumerate() {
        let r = rows.entry(a).or_insert_with(|| SymbolRow {
            symbol: a,
            double_feathers: doubles.then_some(0),
            ..Default::default()
        });
        let f = labels.flags[p];
        r.occurrences += 1;
        r.feathers += (f & LeafLabels::FEATHER != 0) as u64;
        r.wingtips += (f & (LeafLabels::WINGTIP | LeafLabels::SINGLE) != 0) as u64;
        if let Some(d) = r.double_feathers.as_mut() {
            *d += (f & LeafLabels::DFEATHER != 0) as u64;
        }
    }
    rows.into_values().collect()
}

fn tree(a: &TreeArgs) -> Result<Body> {
    let strategy: Strategy = a.strategy.parse()?;
    let (mut b, _) = read_sequence(&a.input)?;
    if a.drop_singletons {
        b = b.drop_rare(2);
    }
    let (rows, violations, summary) = match a.report {
        TreeReport::Feathers | TreeReport::Nesting => {
            let t = build_tree(&b, strategy)?;
            let labels = t.leaf_labels();
            let nest = check_nesting(&t);
            let summary = if a.report == TreeReport::Feathers {
                serde_json::to_value(count_feathers(&t)).expect("json")
            } else {
                json!({"pairs_checked": nest.pairs_checked, "violation_count": nest.violation_count})
            };
            (per_symbol(&t.sequence(), &labels, false), tag(nest.violations, "nesting"), summary)
        }
        TreeReport::Ensemble => {
            let e = build_ensemble(&b, strategy)?;
            let nest = check_nesting5(&e);
            let mut summary = serde_json::to_value(&e.report).expect("json");
            summary["pairs_checked"] = json!(nest.pairs_checked);
            summary["violation_count"] = json!(nest.violation_count);
            (per_symbol(&e.tree.sequence(), &e.labels, true), tag(nest.violations, "nesting5"), summary)
        }
    };
    let failed = !violations.is_empty();
    Ok(Body {
        doc: Doc::Json(json!({
            "strategy": strategy.to_string(),
            "report": a.report,
            "alphabet": b.alphabet_size(),
            "blocks": b.num_blocks(),
            "summary": summary,
            "per_symbol": rows,
            "violations": violations,
        })),
        failed,
    })
}

fn tag<T: Serialize>(vs: Vec<T>, check: &str) -> Vec<Value> {
    vs.into_iter()
        .map(|v| {
            let mut x = serde_json::to_value(v).expect("json");
            x["check"] = json!(check);
            x
        })
        .collect()
}

fn parse_budget(text: &str) -> Result<SearchBudget> {
    let mut b = SearchBudget::default();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("bad budget item `{part}`")))?;
        let x: f64 = v.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad budget value `{v}`")))?;
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad budget value `{v}`")));
        }
        match k.trim() {
            "nodes" => b.max_nodes = x as u64,
            "secs" => b.max_secs = Some(x),
            "depth" => b.max_depth = Some(x as usize),
            other => return Err(Error::InvalidArgument(format!("unknown budget key `{other}`"))),
        }
    }
    Ok(b)
}

fn oracle(a: &OracleArgs) -> Result<Body> {
    let budget = parse_budget(&a.budget)?;
    let r = match a.m {
        Some(m) => lambda_blocked_exact(a.s, a.n, m, budget)?,
        None => lambda_exact(a.s, a.n, budget)?,
    };
    let witness = match a.m {
        Some(_) => SequenceJson::from_blocked(&r.witness),
        None => SequenceJson::from_sequence(&r.witness.to_sequence()),
    };
    let doc = json!({"value": r.value, "exact": r.exact, "nodes": r.nodes, "witness": witness});
    if !r.exact {
        // the partial answer is still printed
        return Ok(Body { doc: Doc::Json(doc), failed: true });
    }
    Ok(Body { doc: Doc::Json(doc), failed: false })
}

fn bounds(a: &BoundsArgs) -> Result<Body> {
    if a.verify_appendices {
        let h = check_happiness(a.smax, a.imax)?;
        let f = check_feather_ineqs(a.feather_imax)?;
        let mut failures = h.failures.clone();
        failures.extend(f.failures.iter().cloned());
        let mut notes = h.notes.clone();
        notes.extend(f.notes.iter().cloned());
        let pass = failures.is_empty();
        return Ok(Body {
            doc: Doc::Json(json!({
                "pass": pass,
                "checked": h.checked + f.checked,
                "failures": failures,
                "notes": notes,
            })),
            failed: !pass,
        });
    }
    let (s, n, m) = match (a.s, a.n, a.m) {
        (Some(s), Some(n), Some(m)) => (s, n, m),
        _ => return Err(Error::InvalidArgument("--s, --n and --m are required".into())),
    };
    let c = a.c.unwrap_or_else(|| default_c(s));
    if a.table {
        let mut rows = Vec::new();
        for i in 1..=a.imax {
            rows.push(vec![json!(i), json!(min_j(i, c, m)), big_json(&upper_bound_blocked(s, n, m, c, i)?)]);
        }
        return Ok(Body { doc: Doc::Csv { header: vec!["i", "j", "bound"], rows }, failed: false });
    }
    let doc = match a.i {
        Some(i) => json!({
            "bound": big_json(&upper_bound_blocked(s, n, m, c, i)?),
            "i": i,
            "c": c,
            "j": min_j(i, c, m),
            "alpha": alpha2(n.max(1), m)?,
        }),
        None => {
            let b = best_upper_bound(s, n, m)?;
            serde_json::to_value(b).expect("json")
        }
    };
    Ok(Body { doc: Doc::Json(doc), failed: false })
}

fn envelope_doc(segs: &[Segment], a: &EnvelopeArgs) -> Result<(Value, bool)> {
    let t = lower_envelope(segs)?.transcript();
    let seq = t.sequence();
    let order = ds_order(&seq);
    let mut v = t.to_json();
    v["sequence"] = json!(seq);
    let mut ok = true;
    if let Some(s) = a.check_order {
        ok = order <= s;
        v["check_order"] = json!({"order": s, "ok": ok});
    }
    if a.stats {
        let n = segs.len() as u64;
        let bound = best_upper_bound(3, n, (2 * n).saturating_sub(1).max(1))?.bound;
        v["stats"] = json!({
            "n": n,
            "length": seq.len(),
            "order": order,
            "bound": big_json(&bound),
            "within_bound": BigUint::from(seq.len()) <= bound,
        });
    }
    Ok((v, ok))
}

fn envelope(a: &EnvelopeArgs, seed: u64) -> Result<Body> {
    if let Some(path) = &a.input {
        let segs = parse_segments(&read(path)?)?;
        let (v, ok) = envelope_doc(&segs, a)?;
        return Ok(Body { doc: Doc::Json(v), failed: !ok });
    }
    let family = a.random.expect("clap enforces --in or --random");
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let mut g = rng(seed);
    let mut instances = Vec::with_capacity(a.trials);
    let mut all_ok = true;
    for _ in 0..a.trials {
        let segs = match family {
            Family::Lines => random_lines(&mut g, a.n),
            Family::Segments => random_segments(&mut g, a.n),
        };
        let (v, ok) = envelope_doc(&segs, a)?;
        all_ok &= ok;
        instances.push(v);
    }
    Ok(Body { doc: Doc::Json(json!({"family": family, "n": a.n, "instances": instances})), failed: !all_ok })
}

fn run_selftest(a: &SelftestArgs, seed: u64) -> Result<Body> {
    let scale = if a.quick { Scale::Quick } else { Scale::Full };
    let ids: Vec<u32> = if a.only.is_empty() { (1..=9).collect() } else { a.only.clone() };
    if let Some(bad) = ids.iter().find(|&&k| !(1..=9).contains(&k)) {
        return Err(Error::InvalidArgument(format!("no criterion {bad}")));
    }
    let outcomes: Vec<_> = ids.iter().map(|&k| selftest::run(k, scale, seed)).collect();
    let pass = outcomes.iter().all(|o| o.pass);
    Ok(Body { doc: Doc::Json(json!({"scale": scale, "pass": pass, "criteria": outcomes})), failed: !pass })
}

fn ackermann_cmd(a: &AckermannArgs) -> Result<Body> {
    if let Some(max) = a.alpha_grid {
        let mut pts = vec![1u64];
        while let Some(&p) = pts.last() {
            match p.checked_mul(10) {
                Some(q) if q <= max => pts.push(q),
                _ => break,
            }
        }
        let mut rows = Vec::new();
        for &n in &pts {
            for &m in &pts {
                rows.push(vec![json!(n), json!(m), json!(alpha2(n, m)?)]);
            }
        }
        return Ok(Body { doc: Doc::Csv { header: vec!["n", "m", "alpha"], rows }, failed: false });
    }
    let mut rows = Vec::new();
    let mut done_row = u32::MAX;
    for (i, j, v) in table(a.imax, a.jmax, a.threshold)? {
        if done_row == i {
            continue;
        }
        let (val, sat) = match v {
            AckValue::Exact(x) => (x, false),
            AckValue::AtLeast(x) => (x, true),
        };
        rows.push(vec![json!(i), json!(j), json!(val), json!(sat)]);
        if sat {
            done_row = i;
        }
    }
    Ok(Body { doc: Doc::Csv { header: vec!["i", "j", "value", "saturated"], rows }, failed: false })
}

fn config(cli: &Cli) -> Value {
    let (name, args) = match serde_json::to_value(&cli.command).expect("json") {
        Value::Object(m) => m.into_iter().next().expect("one subcommand"),
        other => (String::new(), other),
    };
    json!({
        "tool": "dslab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "args": args,
        "seed": cli.seed,
        "prng": PRNG_NAME,
        "max_symbols": max_symbols_default(),
    })
}

fn render(cli: &Cli, body: Body) -> Result<Vec<u8>> {
    let cfg = config(cli);
    let default_csv = matches!(body.doc, Doc::Csv { .. });
    let format = cli.format.unwrap_or(if default_csv { Format::Csv } else { Format::Json });
    let mut out = Vec::new();
    match (body.doc, format) {
        (Doc::Json(v), Format::Json) => {
            let mut m = Map::new();
            m.insert("config".into(), cfg);
            match v {
                Value::Object(o) => m.extend(o),
                other => {
                    m.insert("result".into(), other);
                }
            }
            serde_json::to_writer(&mut out, &Value::Object(m)).expect("json");
            out.push(b'\n');
        }
        (Doc::Json(_), Format::Csv) => {
            return Err(Error::InvalidArgument("this command has no csv output".into()));
        }
        (Doc::Csv { header, rows }, Format::Csv) => {
            writeln!(out, "# config: {cfg}")?;
            writeln!(out, "{}", header.join(","))?;
            for r in rows {
                let cells: Vec<String> = r
                    .iter()
                    .map(|v| match v {
                        Value::String(x) => x.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        (Doc::Csv { header, rows }, Format::Json) => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|r| Value::Object(header.iter().map(|h| h.to_string()).zip(r).collect()))
                .collect();
            serde_json::to_writer(&mut out, &json!({"config": cfg, "rows": rows})).expect("json");
            out.push(b'\n');
        }
    }
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<Body> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Verify(a) => verify(a),
        Command::Tree(a) => tree(a),
        Command::Oracle(a) => oracle(a),
        Command::Bounds(a) => bounds(a),
        Command::Envelope(a) => envelope(a, cli.seed),
        Command::Selftest(a) => run_selftest(a, cli.seed),
        Command::Ackermann(a) => ackermann_cmd(a),
    }
}

fn run_parsed(cli: &Cli) -> Result<(Vec<u8>, bool)> {
    let body = match cli.workers {
        Some(0) => return Err(Error::InvalidArgument("--workers must be positive".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };
    let failed = body.failed;
    Ok((render(cli, body)?, failed))
}

/// Runs the command line and captures what would be printed.
pub fn execute<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text.into_bytes(), stderr: String::new() }
            } else {
                Output { code: 2, stdout: Vec::new(), stderr: text }
            };
        }
    };
    match run_parsed(&cli) {
        Ok((bytes, failed)) => {
            let code = if failed { 1 } else { 0 };
            match &cli.out {
                Some(path) => match std::fs::write(path, &bytes) {
                    Ok(()) => Output { code, ..Default::default() },
                    Err(e) => Output { code: 2, stdout: Vec::new(), stderr: format!("error: io: {e}\n") },
                },
                None => Output { code, stdout: bytes, stderr: String::new() },
            }
        }
        Err(e) => Output { code: e.exit_code(), stdout: Vec::new(), stderr: format!("error: {e}\n") },
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let out = execute(argv);
    let _ = std::io::stdout().write_all(&out.stdout);
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    out.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn json_of(args: &[&str]) -> (i32, Value) {
        let o = execute(std::iter::once("dslab").chain(args.iter().copied()));
        assert!(o.stderr.is_empty() || o.code != 0, "{}", o.stderr);
        (o.code, serde_json::from_slice(&o.stdout).unwrap_or(Value::Null))
    }

    #[test]
    fn generate_stats() {
        let (code, v) = json_of(&["generate", "--order", "4", "-i", "2", "-j", "2", "--stats-only"]);
        assert_eq!(code, 0);
        assert_eq!((v["N"].as_u64(), v["B"].as_u64(), v["length"].as_u64(), v["mult"].as_u64()), (Some(8), Some(16), Some(32), Some(4)));
        assert_eq!(v["config"]["prng"], "ChaCha8");
        assert_eq!(v["config"]["command"], "generate");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let o = execute(["dslab", "bounds", "--bogus"]);
        assert_eq!(o.code, 2);
        assert!(o.stdout.is_empty());
        assert!(o.stderr.contains("Usage"));
        assert_eq!(execute(["dslab", "oracle", "--s", "3", "--n", "3", "--budget", "nodes"]).code, 2);
        assert_eq!(execute(["dslab", "tree", "--in", "x.json", "--strategy", "weird"]).code, 2);
    }

    #[test]
    fn resource_limits() {
        let o = execute(["dslab", "generate", "--order", "4", "-i", "3", "-j", "4"]);
        assert_eq!(o.code, 3, "{}", o.stderr);
        let o = execute(["dslab", "oracle", "--s", "3", "--n", "12"]);
        assert_eq!(o.code, 3);
    }

    #[test]
    fn oracle_and_bounds() {
        let (code, v) = json_of(&["oracle", "--s", "3", "--n", "4"]);
        assert_eq!(code, 0);
        assert_eq!(v["value"], 12);
        assert_eq!(v["exact"], true);
        let (code, v) = json_of(&["bounds", "--s", "2", "--n", "5", "--m", "3", "--i", "1"]);
        assert_eq!(code, 0);
        assert_eq!(v["bound"], 11);
        let (code, v) = json_of(&["bounds", "--verify-appendices", "--smax", "6", "--imax", "5"]);
        assert_eq!(code, 0);
        assert_eq!(v["pass"], true);
        let (code, v) = json_of(&["oracle", "--s", "4", "--n", "6", "--budget", "nodes=1000"]);
        assert_eq!(code, 1);
        assert_eq!(v["exact"], false);
    }

    #[test]
    fn csv_tables() {
        let o = execute(["dslab", "ackermann", "--imax", "3", "--jmax", "5"]);
        assert_eq!(o.code, 0);
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with("# config: "));
        assert!(text.contains("\ni,j,value,saturated\n1,1,2,false\n"));
        assert!(text.contains("\n2,3,2048,false\n2,4,18446744073709551615,true\n3,1,2,false\n"));
        let o = execute(["dslab", "bounds", "--s", "4", "--n", "10", "--m", "5", "--table", "--imax", "3"]);
        assert_eq!(o.code, 0);
        assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
        assert_eq!(execute(["dslab", "verify", "--in", "x", "--format", "csv"]).code, 2);
    }

    #[test]
    fn files_round_trip() {
        let dir = std::env::temp_dir().join(format!("dslab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let seq = dir.join("s.json");
        let o = execute(["dslab", "generate", "--order", "4", "-i", "2", "-j", "2", "--out", seq.to_str().unwrap()]);
        assert_eq!(o.code, 0);
        let (code, v) = json_of(&["verify", "--in", seq.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(v["ds_order"], 5);
        let (code, v) = json_of(&["verify", "--in", seq.to_str().unwrap(), "--order", "5"]);
        assert_eq!((code, v["valid"].as_bool()), (0, Some(true)));
        let (code, _) = json_of(&["verify", "--in", seq.to_str().unwrap(), "--order", "4"]);
        assert_eq!(code, 1);
        for report in ["feathers", "nesting", "ensemble"] {
            let (code, v) = json_of(&["tree", "--in", seq.to_str().unwrap(), "--strategy", "halving", "--report", report]);
            assert_eq!(code, 0, "{v}");
            assert_eq!(v["per_symbol"].as_array().unwrap().len(), 8);
            assert!(v["violations"].as_array().unwrap().is_empty());
        }
        let segs = dir.join("segs.json");
        std::fs::write(&segs, r#"[{"x1":[0,1],"x2":[10,1],"a":[0,1],"b":[0,1]},{"x1":[4,1],"x2":[6,1],"a":[0,1],"b":[-1,1]}]"#).unwrap();
        let (code, v) = json_of(&["envelope", "--in", segs.to_str().unwrap(), "--check-order", "3", "--stats"]);
        assert_eq!(code, 0);
        assert_eq!(v["pieces"], json!([0, 1, 0]));
        assert_eq!(v["breakpoints"], json!([[4, 1], [6, 1]]));
        let (code, _) = json_of(&["envelope", "--in", segs.to_str().unwrap(), "--check-order", "1"]);
        assert_eq!(code, 1);
        std::fs::write(&segs, "[{]").unwrap();
        assert_eq!(json_of(&["envelope", "--in", segs.to_str().unwrap()]).0, 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn random_envelopes_are_seeded() {
        let a = execute(["dslab", "envelope", "--random", "segments", "--n", "40", "--trials", "3", "--seed", "5", "--stats"]);
        let b = execute(["dslab", "envelope", "--random", "segments", "--n", "40", "--trials", "3", "--seed", "5", "--stats", "--workers", "2"]);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        let c = execute(["dslab", "envelope", "--random", "segments", "--n", "40", "--trials", "3", "--seed", "6", "--stats"]);
        assert_ne!(a.stdout, c.stdout);
    }
}
