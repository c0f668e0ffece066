//! Command-line front end for the centralizer W-algebra engine.
//!
//! Data subcommands (basis, form, structure-consts, generators, hilbert)
//! print structure attached to a pyramid; verification subcommands (verify,
//! rank) run exact checks and report pass or fail. Every subcommand writes a
//! stable human summary to stdout and, with `--out`, a versioned JSON report
//! ("schema": 1). Output is deterministic: the same configuration produces
//! byte-identical text and JSON, and any internally drawn random level is
//! recorded in the report together with its seed.
//!
//! Exit codes: 0 when everything requested passed, 1 on a verification
//! failure, 2 on bad configuration or I/O trouble.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use centw_core::brst::{verify_lemma, LEMMA_IDS};
use centw_core::miura::{critical_commutativity, injectivity_rank, verify_miura};
use centw_core::pyramid::{GenIndex, Pyramid};
use centw_core::scalar::{form, rat};
use centw_core::statespace::{Algebra, Realization};
use centw_core::walgebra::{
    certify_generators, generator_monomial_counts, generator_table, hilbert_series,
};

#[derive(Parser)]
#[command(name = "centw", version, about = "Exact W-algebra engine for centralizer pyramids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the admissible generator triples of the centralizer
    Basis(ShapeArgs),
    /// Print the nonzero invariant-form pairs on the centralizer
    Form(ShapeArgs),
    /// Print the nonzero brackets between centralizer basis elements
    StructureConsts(ShapeArgs),
    /// Expand the determinant generators and report their certification
    Generators(GeneratorsArgs),
    /// Run a verification sweep and report pass or fail per check
    Verify(VerifyArgs),
    /// Graded generator count, cross-checked against direct enumeration
    Hilbert(CapArgs),
    /// Rank of the ordered generator monomials at a generic rational level
    Rank(CapArgs),
}

#[derive(Args)]
struct ShapeArgs {
    /// Pyramid shape as comma-separated row lengths, ascending, e.g. 2,3,4
    #[arg(long, value_name = "SHAPE")]
    pyramid: String,
    /// Write the JSON report to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeneratorsArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Realization the expansion runs in
    #[arg(long, value_enum, default_value_t = Backend::Full)]
    backend: Backend,
    /// Evaluate coefficients at a rational level such as -3 or 5/2
    /// instead of keeping k symbolic
    #[arg(long, value_name = "K", allow_hyphen_values = true)]
    level: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which check to run
    #[arg(value_enum)]
    which: Check,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Degree cap for the state sweep (d2 and lemmas; others ignore it)
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(i32).range(0..))]
    cap: i32,
}

#[derive(Args)]
struct CapArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Largest conformal degree included
    #[arg(long, value_parser = clap::value_parser!(i32).range(0..))]
    cap: i32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Full,
    Reduced,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    /// Square of the differential and its two summands
    D2,
    /// Closedness of every determinant generator
    Dw,
    /// All operator-identity sweeps
    Lemmas,
    /// Projection onto the diagonal Heisenberg subalgebra
    Miura,
    /// Commutativity of generator products at the critical level
    Critical,
}

/// What a subcommand produced: the stdout text, the JSON report, where to
/// put it, and whether everything requested passed.
struct Outcome {
    text: String,
    doc: Value,
    out: Option<PathBuf>,
    pass: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let outcome = match cli.command {
        Command::Basis(args) => basis_cmd(args),
        Command::Form(args) => form_cmd(args),
        Command::StructureConsts(args) => structure_consts_cmd(args),
        Command::Generators(args) => generators_cmd(args),
        Command::Verify(args) => verify_cmd(args),
        Command::Hilbert(args) => hilbert_cmd(args),
        Command::Rank(args) => rank_cmd(args),
    }?;
    emit(&outcome.text)?;
    if let Some(path) = &outcome.out {
        let report = serde_json::to_string_pretty(&outcome.doc).expect("report serializes") + "\n";
        fs::write(path, report).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(if outcome.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Print the summary in one write. A broken pipe is not an error: the
/// reader has seen all it wants, and the exit code still reflects the run.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e).context("cannot write stdout"),
        _ => Ok(()),
    }
}

fn parse_pyramid(spec: &str) -> Result<Pyramid> {
    Pyramid::parse(spec).with_context(|| format!("invalid pyramid {spec:?}"))
}

fn gen_json(g: &GenIndex) -> Value {
    json!([g.i, g.j, g.r])
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn basis_cmd(args: ShapeArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.pyramid)?;
    let rows = p.basis_e();
    let mut text = format!(
        "# centralizer basis for pyramid {p}: {} generator{}\n",
        rows.len(),
        plural(rows.len())
    );
    for g in &rows {
        writeln!(text, "{g}").expect("string write");
    }
    let doc = json!({
        "schema": 1,
        "command": "basis",
        "pyramid": p.to_json(),
        "count": rows.len(),
        "basis": rows.iter().map(gen_json).collect::<Vec<_>>(),
    });
    Ok(Outcome { text, doc, out: args.out, pass: true })
}

fn form_cmd(args: ShapeArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.pyramid)?;
    let basis = p.basis_e();
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    for (xi, x) in basis.iter().enumerate() {
        for y in &basis[xi..] {
            let value = form(&p, x, y);
            if value != rat(0, 1) {
                lines.push(format!("<{x}, {y}> = {value}"));
                entries.push(json!({"x": gen_json(x), "y": gen_json(y), "value": value.to_string()}));
            }
        }
    }
    let mut text =
        format!("# invariant form for pyramid {p}: {} nonzero unordered pairs\n", lines.len());
    for line in &lines {
        writeln!(text, "{line}").expect("string write");
    }
    let doc = json!({
        "schema": 1,
        "command": "form",
        "pyramid": p.to_json(),
        "count": entries.len(),
        "entries": entries,
    });
    Ok(Outcome { text, doc, out: args.out, pass: true })
}

/// Integer combination of basis elements in print form, e.g.
/// `E(1,1,0) - 2 E(2,2,0)`.
fn format_combination(terms: &BTreeMap<GenIndex, i64>) -> String {
    let mut text = String::new();
    for (idx, (g, c)) in terms.iter().enumerate() {
        if idx == 0 {
            if *c < 0 {
                text.push('-');
            }
        } else if *c < 0 {
            text.push_str(" - ");
        } else {
            text.push_str(" + ");
        }
        if c.abs() != 1 {
            write!(text, "{} ", c.abs()).expect("string write");
        }
        write!(text, "{g}").expect("string write");
    }
    text
}

fn structure_consts_cmd(args: ShapeArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.pyramid)?;
    let basis = p.basis_e();
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    for x in &basis {
        for y in &basis {
            // bracket_e may list a target twice with opposite signs; fold
            // like terms so vacuous brackets drop out of the table.
            let mut terms: BTreeMap<GenIndex, i64> = BTreeMap::new();
            for (g, c) in p.bracket_e(x, y) {
                let entry = terms.entry(g).or_insert(0);
                *entry += c;
                if *entry == 0 {
                    terms.remove(&g);
                }
            }
            if terms.is_empty() {
                continue;
            }
            lines.push(format!("[{x}, {y}] = {}", format_combination(&terms)));
            let term_json: Vec<Value> = terms
                .iter()
                .map(|(g, c)| json!({"gen": gen_json(g), "coeff": c}))
                .collect();
            entries.push(json!({"x": gen_json(x), "y": gen_json(y), "terms": term_json}));
        }
    }
    let mut text = format!(
        "# structure constants for pyramid {p}: {} nonzero brackets among {} basis elements\n",
        lines.len(),
        basis.len()
    );
    for line in &lines {
        writeln!(text, "{line}").expect("string write");
    }
    let doc = json!({
        "schema": 1,
        "command": "structure-consts",
        "pyramid": p.to_json(),
        "count": entries.len(),
        "entries": entries,
    });
    Ok(Outcome { text, doc, out: args.out, pass: true })
}

fn generators_cmd(args: GeneratorsArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.shape.pyramid)?;
    let (realization, backend_name) = match args.backend {
        Backend::Full => (Realization::Full, "full"),
        Backend::Reduced => (Realization::Reduced, "reduced"),
    };
    let level = match &args.level {
        None => None,
        Some(spec) => Some(parse_level(spec)?),
    };
    let level_name = level.as_ref().map_or("symbolic".to_string(), |k| k.to_string());

    let alg = Algebra::new(p.clone(), realization);
    let mut table = generator_table(&alg);
    if let Some(k) = &level {
        for state in table.values_mut() {
            *state = state.evaluate_level(k);
        }
    }
    let certificate = certify_generators(&p);
    let certified = certificate["status"] == "pass";

    let mut text = format!(
        "# generators for pyramid {p} ({backend_name} realization, level {level_name}): {} generator{}\n",
        table.len(),
        plural(table.len())
    );
    for ((l, r), state) in &table {
        let nt = state.num_terms();
        writeln!(text, "w[{l},{r}]: {nt} term{}", plural(nt)).expect("string write");
    }
    writeln!(text, "certified: {certified}").expect("string write");

    let gens: Vec<Value> = table
        .iter()
        .map(|((l, r), state)| json!({"l": l, "r": r, "state": state.to_json()}))
        .collect();
    let doc = json!({
        "schema": 1,
        "command": "generators",
        "pyramid": p.to_json(),
        "backend": backend_name,
        "level": level_name,
        "count": gens.len(),
        "generators": gens,
        "certified": certified,
    });
    Ok(Outcome { text, doc, out: args.shape.out, pass: certified })
}

/// Parse a rational level such as `-3` or `5/2`; the return value feeds
/// `State::evaluate_level`.
fn parse_level(spec: &str) -> Result<BigRational> {
    let (num, den) = match spec.split_once('/') {
        Some((a, b)) => (
            a.trim().parse::<i64>().with_context(|| format!("bad level {spec:?}"))?,
            b.trim().parse::<i64>().with_context(|| format!("bad level {spec:?}"))?,
        ),
        None => (spec.trim().parse::<i64>().with_context(|| format!("bad level {spec:?}"))?, 1),
    };
    if den == 0 {
        bail!("bad level {spec:?}: zero denominator");
    }
    Ok(rat(num, den))
}

/// One stdout line per report: the check tag, the shape, and the verdict,
/// plus the extras a given check records (generator count, rank data,
/// critical-level witness).
fn describe(report: &Value, pyramid: &Pyramid) -> String {
    let tag = report["lemma"].as_str().unwrap_or("?");
    let status = report["status"].as_str().unwrap_or("?");
    let mut line = format!("check {tag} pyramid {pyramid}");
    if let Some(cap) = report["cap"].as_i64() {
        write!(line, " (cap {cap})").expect("string write");
    }
    write!(line, ": {status}").expect("string write");
    if let Some(count) = report["generators"].as_u64() {
        write!(line, " ({count} generator{} certified)", plural(count as usize)).expect("string write");
    }
    if let Some(rank) = report["rank"].as_u64() {
        write!(
            line,
            " (rank {rank} over {} monomials at level {} with seed {})",
            report["monomials"],
            report["level"].as_str().unwrap_or("?"),
            report["seed"]
        )
        .expect("string write");
    }
    if let Some(level) = report["critical_level"].as_str() {
        write!(line, " (critical level {level}, witness {})", report["witness"].as_str().unwrap_or("none"))
            .expect("string write");
    }
    if let Some(counter) = report.get("counterexample") {
        write!(line, "\n  counterexample: {counter}").expect("string write");
    }
    line
}

fn verify_cmd(args: VerifyArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.shape.pyramid)?;
    let (which, reports) = match args.which {
        Check::D2 => ("d2", vec![verify_lemma("2.1", &p, args.cap)]),
        Check::Lemmas => (
            "lemmas",
            LEMMA_IDS.iter().map(|id| verify_lemma(id, &p, args.cap)).collect(),
        ),
        Check::Dw => ("dw", vec![certify_generators(&p)]),
        Check::Miura => ("miura", vec![verify_miura(&p)]),
        Check::Critical => ("critical", vec![critical_commutativity(&p)]),
    };
    let passed = reports.iter().filter(|r| r["status"] == "pass").count();
    let mut text = String::new();
    for report in &reports {
        writeln!(text, "{}", describe(report, &p)).expect("string write");
    }
    writeln!(text, "checks passed: {passed} of {}", reports.len()).expect("string write");
    let all_pass = passed == reports.len();
    let doc = json!({
        "schema": 1,
        "command": "verify",
        "which": which,
        "pyramid": p.to_json(),
        "status": if all_pass { "pass" } else { "fail" },
        "reports": reports,
    });
    Ok(Outcome { text, doc, out: args.shape.out, pass: all_pass })
}

fn hilbert_cmd(args: CapArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.shape.pyramid)?;
    let cap = args.cap as usize;
    let series = hilbert_series(&p, cap);
    let tally = generator_monomial_counts(&p, cap);
    let coeffs: Vec<String> = series.iter().map(|c| c.to_string()).collect();
    let text = coeffs.join(" ") + "\n";
    let matches = series == tally;
    if !matches {
        let tally_text: Vec<String> = tally.iter().map(|c| c.to_string()).collect();
        eprintln!(
            "hilbert mismatch for pyramid {p}: direct enumeration gives {}",
            tally_text.join(" ")
        );
    }
    let doc = json!({
        "schema": 1,
        "command": "hilbert",
        "pyramid": p.to_json(),
        "cap": cap,
        "series": series,
        "tally": tally,
        "status": if matches { "pass" } else { "fail" },
    });
    Ok(Outcome { text, doc, out: args.shape.out, pass: matches })
}

fn rank_cmd(args: CapArgs) -> Result<Outcome> {
    let p = parse_pyramid(&args.shape.pyramid)?;
    let report = injectivity_rank(&p, args.cap);
    let pass = report["status"] == "pass";
    let text = describe(&report, &p) + "\n";
    let doc = json!({
        "schema": 1,
        "command": "rank",
        "pyramid": p.to_json(),
        "cap": args.cap,
        "status": report["status"].clone(),
        "report": report,
    });
    Ok(Outcome { text, doc, out: args.shape.out, pass })
}
