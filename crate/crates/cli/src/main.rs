use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use koszulab::complexes::{bar_block, cobar_block, koszul_report_with, ChainComplexBlock, ComplexError, Ranges, Verdict};
use koszulab::graphs::GraphError;
use koszulab::presentations::{builtin, parse, quadratic_dual, to_json, Presentation, PresentationError};
use koszulab::span_engine::{BlockKey, SpanEngine, SpanError};
use koszulab::twisted::{bar_tw, bar_tw_partitions, TwBlockKey, TwComplex, TwVerdict, TwistedAlgebra, TwistedError};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Exact computations with quadratic dioperads and properads.
#[derive(Parser)]
#[command(name = "koszulab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quotient dimension table.
    Dims(DimsArgs),
    /// Quadratic dual presentation (JSON).
    Dual(Common),
    /// Diamond bar complex blocks.
    Bar(ComplexArgs),
    /// Diamond cobar complex blocks (of the given, typically dual, presentation).
    Cobar(ComplexArgs),
    /// Bar complex of the twisted algebra ∂in∂out of the quotient.
    TwBar(TwArgs),
    /// Cobar-of-dual concentration check over a range of blocks.
    VerifyKoszul(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct Common {
    /// Presentation file (same as --file).
    #[arg(value_name = "FILE", conflicts_with_all = ["builtin", "file"])]
    path: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long, conflicts_with = "builtin")]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Block cache directory (overridden by KOSZULAB_CACHE).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Cap on rigid graphs enumerated per block.
    #[arg(long, value_parser = positive)]
    max_rigid: Option<usize>,
    /// Accepted for reproducible scripting; every command is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DimsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = range, default_value = "1..3")]
    m: (usize, usize),
    #[arg(long, value_parser = range, default_value = "1..3")]
    n: (usize, usize),
    /// Weight range; omitted means the total over all weights (unit included).
    #[arg(long, value_parser = range)]
    weight: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    max_genus: usize,
}

#[derive(Args)]
struct ComplexArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = range)]
    m: (usize, usize),
    #[arg(long, value_parser = range)]
    n: (usize, usize),
    /// Defaults to the largest weight a block of that arity and genus can have.
    #[arg(long, value_parser = positive)]
    max_weight: Option<usize>,
    #[arg(long, default_value_t = 0)]
    max_genus: usize,
}

#[derive(Args)]
struct TwArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "N", value_parser = range)]
    big_n: (usize, usize),
    /// Use the right module ∂in²∂out as coefficients.
    #[arg(long)]
    module: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = positive, default_value_t = 3)]
    max_arity: usize,
    #[arg(long, default_value_t = 1)]
    max_genus: usize,
    #[arg(long, value_parser = positive, default_value_t = 3)]
    max_weight: usize,
    /// Restrict to blocks with inputs + outputs at most this.
    #[arg(long, value_parser = positive)]
    max_arity_sum: Option<usize>,
    #[arg(long)]
    diagonal: bool,
    /// Also check the twisted bar complexes of the dual up to this N.
    #[arg(long = "N", value_parser = positive)]
    big_n: Option<usize>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// `a..b` (inclusive) or a single integer.
fn range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (positive(a)?, positive(b)?),
        None => {
            let v = positive(s)?;
            (v, v)
        }
    };
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

/// Bad command-line usage not caught by the argument parser (exit 2).
#[derive(Debug, thiserror::Error)]
enum Usage {
    #[error("{0}")]
    Invalid(String),
}

impl Common {
    fn presentation(&self) -> Result<Presentation> {
        match (&self.builtin, self.file.as_ref().or(self.path.as_ref())) {
            (Some(name), None) => Ok(builtin(name)?),
            (None, Some(path)) => {
                let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(parse(&src)?)
            }
            _ => Err(Usage::Invalid("give a presentation with --builtin NAME or --file PATH".into()).into()),
        }
    }

    fn engine(&self, p: &Presentation) -> SpanEngine {
        let cache = std::env::var_os("KOSZULAB_CACHE").map(PathBuf::from).or_else(|| self.cache.clone());
        let mut e = SpanEngine::new(p).with_cache(cache);
        if let Some(cap) = self.max_rigid {
            e.cap = cap;
        }
        e
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Runs `f` over `items` on a bounded pool of scoped threads; results come
/// back in input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let mut out: Vec<(usize, R)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break done;
                        }
                        done.push((i, f(&items[i])));
                    }
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}

// each vertex has at least three legs, so it lowers m + n − 2 + 2g by one
fn weight_bound(m: usize, n: usize, genus: usize) -> usize {
    (m + n + 2 * genus).saturating_sub(2).max(1)
}

fn block_json(k: BlockKey) -> Value {
    json!({ "m": k.m, "n": k.n, "W": k.weight, "g": k.genus })
}

fn cmd_dims(a: &DimsArgs) -> Result<ExitCode> {
    let p = a.common.presentation()?;
    let e = a.common.engine(&p);
    let mut cells = Vec::new();
    for m in a.m.0..=a.m.1 {
        for n in a.n.0..=a.n.1 {
            for genus in 0..=a.max_genus {
                cells.push((m, n, genus));
            }
        }
    }
    let mut table: Vec<(usize, usize, Option<usize>, usize, usize)> = Vec::new();
    match a.weight {
        None => {
            let totals = par_map(&cells, |&(m, n, genus)| -> Result<usize, SpanError> {
                let mut d = usize::from(m == 1 && n == 1 && genus == 0);
                for weight in 1..=weight_bound(m, n, genus) {
                    d += e.block(BlockKey { m, n, weight, genus })?.quotient_dim();
                }
                Ok(d)
            });
            for (&(m, n, g), d) in cells.iter().zip(totals) {
                table.push((m, n, None, g, d?));
            }
        }
        Some((lo, hi)) => {
            let mut keys = Vec::new();
            for &(m, n, genus) in &cells {
                for weight in lo..=hi {
                    keys.push(BlockKey { m, n, weight, genus });
                }
            }
            for (k, d) in keys.iter().zip(par_map(&keys, |&k| e.block(k).map(|b| b.quotient_dim()))) {
                table.push((k.m, k.n, Some(k.weight), k.genus, d?));
            }
        }
    }
    let text = match a.common.format {
        Format::Tsv => {
            let mut s = String::from("m\tn\tweight\tgenus\tdim\n");
            for (m, n, w, g, d) in &table {
                let w = w.map_or_else(|| "*".to_string(), |w| w.to_string());
                s.push_str(&format!("{m}\t{n}\t{w}\t{g}\t{d}\n"));
            }
            s
        }
        Format::Json => pretty(&json!({
            "presentation": p.name,
            "rows": table.iter().map(|(m, n, w, g, d)| json!({"m": m, "n": n, "weight": w, "genus": g, "dim": d})).collect::<Vec<_>>(),
        })),
    };
    a.common.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dual(c: &Common) -> Result<ExitCode> {
    let p = c.presentation()?;
    c.emit(&to_json(&quadratic_dual(&p)))?;
    Ok(ExitCode::SUCCESS)
}

fn complex_json(b: &ChainComplexBlock) -> Result<Value> {
    let h = b.homology()?;
    let verdict = match h.support().into_iter().find(|&k| k > 0) {
        Some(degree) => json!({"status": "fail", "degree": degree}),
        None => json!({"status": "pass"}),
    };
    Ok(json!({
        "presentation": b.presentation,
        "kind": b.kind,
        "block": block_json(b.key),
        "chain_dims": b.dims(),
        "dims_by_syzygy": h.dims,
        "verdict": verdict,
    }))
}

fn cmd_complex(a: &ComplexArgs, cobar: bool) -> Result<ExitCode> {
    let p = a.common.presentation()?;
    let e = a.common.engine(&p);
    let mut keys = Vec::new();
    for m in a.m.0..=a.m.1 {
        for n in a.n.0..=a.n.1 {
            for genus in 0..=a.max_genus {
                for weight in 1..=a.max_weight.unwrap_or_else(|| weight_bound(m, n, genus)) {
                    keys.push(BlockKey { m, n, weight, genus });
                }
            }
        }
    }
    let blocks = par_map(&keys, |&k| if cobar { cobar_block(&e, k) } else { bar_block(&e, k) });
    let mut reports = Vec::new();
    for b in blocks {
        reports.push(complex_json(&b?)?);
    }
    let text = match a.common.format {
        // one row per block: the homology in syzygy degree 0
        Format::Tsv => {
            let mut s = String::from("m\tn\tweight\tgenus\tdim\n");
            for r in &reports {
                let b = &r["block"];
                let h0 = r["dims_by_syzygy"].get("0").and_then(Value::as_u64).unwrap_or(0);
                s.push_str(&format!("{}\t{}\t{}\t{}\t{h0}\n", b["m"], b["n"], b["W"], b["g"]));
            }
            s
        }
        Format::Json => pretty(&Value::Array(reports)),
    };
    a.common.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn tw_complex(alg: &TwistedAlgebra, n: usize, module: bool) -> Result<TwComplex, TwistedError> {
    if module {
        let md = alg.module();
        return bar_tw(alg, TwBlockKey::koszul(n, true), Some(&md));
    }
    // the partition-pair model applies to one-dimensional diagonal algebras
    match bar_tw_partitions(alg, n) {
        Err(TwistedError::NotDiagonal(_)) => bar_tw(alg, TwBlockKey::koszul(n, false), None),
        other => other,
    }
}

fn tw_reports(alg: &TwistedAlgebra, ns: (usize, usize), module: bool) -> Result<(Vec<Value>, bool)> {
    let name = alg.source().name.clone();
    let mut out = Vec::new();
    let mut pass = true;
    for n in ns.0..=ns.1 {
        let c = tw_complex(alg, n, module)?;
        pass &= c.verdict()? == TwVerdict::Pass;
        let mut j = c.to_json(&name)?;
        j["chain_dims"] = json!(c.dims());
        out.push(j);
    }
    Ok((out, pass))
}

fn tw_tsv(reports: &[Value]) -> String {
    // TSV for twisted blocks: m = n = N, weight N, genus 0, H in syzygy 0
    let mut s = String::from("m\tn\tweight\tgenus\tdim\n");
    for r in reports {
        let n = &r["block"]["N"];
        let h0 = r["dims_by_syzygy"].get("0").and_then(Value::as_u64).unwrap_or(0);
        s.push_str(&format!("{n}\t{n}\t{n}\t0\t{h0}\n"));
    }
    s
}

fn cmd_tw_bar(a: &TwArgs) -> Result<ExitCode> {
    let p = a.common.presentation()?;
    let alg = TwistedAlgebra::new(&p);
    let (reports, pass) = tw_reports(&alg, a.big_n, a.module)?;
    let text = match a.common.format {
        Format::Tsv => tw_tsv(&reports),
        Format::Json => pretty(&Value::Array(reports)),
    };
    a.common.emit(&text)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(a: &VerifyArgs) -> Result<ExitCode> {
    let p = a.common.presentation()?;
    let dual = quadratic_dual(&p);
    let (pe, de) = (a.common.engine(&p), a.common.engine(&dual));
    let ranges = Ranges {
        m: (1, a.max_arity),
        n: (1, a.max_arity),
        max_genus: a.max_genus,
        max_weight: a.max_weight,
        diagonal_only: a.diagonal,
        max_arity_sum: a.max_arity_sum,
    };
    let report = koszul_report_with(&pe, &de, &ranges);
    let mut verdict = report.verdict.clone();
    let mut doc = report.to_json();
    if let Some(big_n) = a.big_n {
        let alg = TwistedAlgebra::new(&dual);
        let mut twisted = Vec::new();
        for module in [false, true] {
            let (r, pass) = tw_reports(&alg, (1, big_n), module)?;
            twisted.extend(r);
            if !pass && !matches!(verdict, Verdict::Fail { .. }) {
                verdict = Verdict::Fail { block: BlockKey { m: 0, n: 0, weight: 0, genus: 0 }, degree: 0 };
            }
        }
        doc["twisted"] = Value::Array(twisted);
        doc["verdict"] = serde_json::to_value(&verdict)?;
    }
    let text = match a.common.format {
        Format::Tsv => {
            let mut s = String::from("m\tn\tweight\tgenus\tdim\n");
            for b in &report.blocks {
                let k = b.block;
                s.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", k.m, k.n, k.weight, k.genus, b.homology.get(0)));
            }
            s
        }
        Format::Json => pretty(&doc),
    };
    a.common.emit(&text)?;
    match &verdict {
        Verdict::Pass => Ok(ExitCode::SUCCESS),
        Verdict::Fail { block, degree } => {
            if block.weight == 0 {
                eprintln!("FAIL: twisted bar complex not concentrated");
            } else {
                eprintln!("FAIL: block {block}: homology in syzygy degree {degree}");
            }
            Ok(ExitCode::from(1))
        }
        Verdict::Inconclusive { reason } => {
            eprintln!("INCONCLUSIVE: {reason}");
            Ok(ExitCode::from(3))
        }
    }
}

fn is_resource(e: &anyhow::Error) -> bool {
    let span = |s: &SpanError| matches!(s, SpanError::Graph(GraphError::ResourceLimit(_)));
    e.chain().any(|c| {
        c.downcast_ref::<SpanError>().is_some_and(span)
            || c.downcast_ref::<GraphError>().is_some_and(|g| matches!(g, GraphError::ResourceLimit(_)))
            || matches!(c.downcast_ref::<ComplexError>(), Some(ComplexError::Span(s)) if span(s))
            || matches!(c.downcast_ref::<TwistedError>(), Some(TwistedError::Span(s)) if span(s))
    })
}

fn is_invalid(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.is::<PresentationError>() || c.is::<Usage>())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Dims(a) => cmd_dims(a),
        Cmd::Dual(c) => cmd_dual(c),
        Cmd::Bar(a) => cmd_complex(a, false),
        Cmd::Cobar(a) => cmd_complex(a, true),
        Cmd::TwBar(a) => cmd_tw_bar(a),
        Cmd::VerifyKoszul(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_resource(&e) {
                ExitCode::from(3)
            } else if is_invalid(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
