//! `afm`: command-line front end for afm-core.
//!
//! Data goes to stdout, diagnostics to stderr. Exit status is 0 on success,
//! 1 on parse, validation or analysis errors, and 2 when results disagree with
//! the expectations recorded in a corpus entry.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use afm_core::classify::{analyze, AnalyzeOptions};
use afm_core::corpus::{self, Document, Outcome, Status};
use afm_core::crystal::DEFAULT_MAX_GROUP_ORDER;
use afm_core::forms::{self, SymForm};
use afm_core::grouppres::{abelian_invariants, Presentation};
use afm_core::linalg::{smith_normal_form, IntMatrix};
use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "afm", version, about = "Betti numbers and intersection forms of flat and almost-flat 4-manifolds")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads for corpus-run (1 runs serially).
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,

    /// Treat a non-spin descriptor with b1 != 1 as an error.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set,
          num_args = 0..=1, default_missing_value = "true")]
    strict_spin: bool,

    /// Largest holonomy group enumerated before giving up.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_GROUP_ORDER)]
    max_group_order: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormOp {
    Classify,
    Signature,
    Even,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a descriptor or corpus entry file.
    Analyze { path: PathBuf },
    /// Smith normal form of a matrix file ("rows cols" then entries).
    Snf { path: PathBuf },
    /// Abelian invariants of a presentation such as "< a, b | [a,b] >".
    Abelianize { presentation: String },
    /// Classify a symmetric form, or report its signature or parity.
    Form { path: PathBuf, op: FormOp },
    /// Run every entry of a corpus directory and print a summary table.
    CorpusRun { dir: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(message: impl Display) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn big_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn matrix_json(m: &IntMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|r| Value::Array(m.row(r).iter().map(big_json).collect()))
        .collect();
    Value::Array(rows)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn cmd_analyze(cli: &Cli, opts: &AnalyzeOptions, path: &Path) -> Result<u8, Failure> {
    let text = read(path)?;
    let doc = corpus::parse_document(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let (outcome, problems) = match doc {
        Document::Descriptor(d) => {
            let report = analyze(&d, opts).map_err(fail)?;
            (Outcome::Manifold(report), Vec::new())
        }
        Document::Entry(entry) => {
            let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let result = corpus::evaluate_entry(&name, &entry, opts);
            match (result.status, result.report) {
                (Status::Error, _) | (_, None) => {
                    return Err(fail(result.problems.join("; ")));
                }
                (_, Some(outcome)) => (outcome, result.problems),
            }
        }
    };
    match (cli.format, &outcome) {
        (Format::Json, o) => println!("{}", to_json(o)),
        (Format::Text, Outcome::Manifold(r)) => println!("{r}"),
        (Format::Text, Outcome::Group(r)) => println!("{r}"),
    }
    for p in &problems {
        eprintln!("expectation mismatch: {p}");
    }
    Ok(if problems.is_empty() { 0 } else { 2 })
}

fn cmd_snf(cli: &Cli, path: &Path) -> Result<u8, Failure> {
    let m: IntMatrix = read(path)?
        .parse()
        .map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let snf = smith_normal_form(&m);
    match cli.format {
        Format::Json => {
            let v = json!({
                "d": snf.d.iter().map(big_json).collect::<Vec<_>>(),
                "u": matrix_json(&snf.u),
                "v": matrix_json(&snf.v),
            });
            println!("{}", to_json(&v));
        }
        Format::Text => {
            let d: Vec<String> = snf.d.iter().map(ToString::to_string).collect();
            println!("d: {}", d.join(" "));
            print!("u:\n{}", snf.u);
            print!("v:\n{}", snf.v);
        }
    }
    Ok(0)
}

fn cmd_abelianize(cli: &Cli, text: &str) -> Result<u8, Failure> {
    let p = Presentation::parse(text).map_err(fail)?;
    let inv = abelian_invariants(&p);
    match cli.format {
        Format::Json => {
            let v = json!({
                "free_rank": inv.free_rank,
                "torsion": inv.torsion.iter().map(big_json).collect::<Vec<_>>(),
                "group": inv.to_string(),
            });
            println!("{}", to_json(&v));
        }
        Format::Text => println!("{inv}"),
    }
    Ok(0)
}

fn cmd_form(cli: &Cli, path: &Path, op: FormOp) -> Result<u8, Failure> {
    let f: SymForm = read(path)?
        .parse()
        .map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let (text, value) = match op {
        FormOp::Classify => {
            let c = forms::classify(&f);
            (c.to_string(), json!({ "class": c }))
        }
        FormOp::Signature => {
            let s = forms::signature(&f);
            (s.to_string(), json!({ "signature": s }))
        }
        FormOp::Even => {
            let e = forms::is_even(&f);
            (e.to_string(), json!({ "even": e }))
        }
    };
    match cli.format {
        Format::Json => println!("{}", to_json(&value)),
        Format::Text => println!("{text}"),
    }
    Ok(0)
}

fn cmd_corpus_run(cli: &Cli, opts: &AnalyzeOptions, dir: &Path) -> Result<u8, Failure> {
    let threads = (cli.parallel > 1).then_some(cli.parallel);
    let run = corpus::run_corpus(dir, opts, threads)
        .map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    match cli.format {
        Format::Json => println!("{}", to_json(&run)),
        Format::Text => print!("{}", run.render_table()),
    }
    Ok(run.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = AnalyzeOptions {
        strict_spin: cli.strict_spin,
        max_group_order: cli.max_group_order,
    };
    let result = match &cli.command {
        Command::Analyze { path } => cmd_analyze(&cli, &opts, path),
        Command::Snf { path } => cmd_snf(&cli, path),
        Command::Abelianize { presentation } => cmd_abelianize(&cli, presentation),
        Command::Form { path, op } => cmd_form(&cli, path, *op),
        Command::CorpusRun { dir } => cmd_corpus_run(&cli, &opts, dir),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
