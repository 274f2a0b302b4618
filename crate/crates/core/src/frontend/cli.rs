use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::{evaluate, line_column, parse, print, EvalContext};
use crate::deriv::DerivationSpec;
use crate::error::Error;
use crate::oracle::{find_relation, DEFAULT_MONOMIAL_CAP};
use crate::schanuel::check_corollary;
use crate::selftest;
use crate::series::Series;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hahnfield",
    version,
    about = "Exact generalized power series, series derivations and transcendence certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Engine {
    /// Derivation, e.g. case1:shift=1, case2max:f=affine(1,0),phiM=10,
    /// case2cof:f=affine(1,1),seq=powers2, el:shift=1
    #[arg(long)]
    spec: Option<String>,
    /// Terms kept by exp, log, inv and division
    #[arg(long, default_value_t = 8)]
    depth: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an expression to a canonical series
    Eval {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[command(flatten)]
        engine: Engine,
        /// Emit JSON instead of the canonical rendering
        #[arg(long)]
        json: bool,
    },
    /// Decide linear independence of y_i - co_A(y_i) and print a certificate
    Check {
        /// Files with one expression per line; `#` starts a comment
        files: Vec<PathBuf>,
        #[arg(short = 'e', long = "expr")]
        exprs: Vec<String>,
        #[command(flatten)]
        engine: Engine,
        /// Accepted for symmetry; the certificate is always JSON
        #[arg(long)]
        json: bool,
    },
    /// Search for a polynomial relation of bounded degree
    FindRelation {
        #[arg(short = 'e', long = "expr", required = true)]
        exprs: Vec<String>,
        #[arg(long)]
        degree: u32,
        /// Largest number of monomials to expand
        #[arg(long, default_value_t = DEFAULT_MONOMIAL_CAP)]
        cap: usize,
        #[command(flatten)]
        engine: Engine,
        /// Accepted for symmetry; the report is always JSON
        #[arg(long)]
        json: bool,
    },
    /// Run the randomized invariant suites
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn engine(error: &Error, context: String) -> Self {
        let code = match error {
            Error::Usage(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        };
        Failure {
            code,
            message: format!("{context}{error}"),
        }
    }
}

type CliResult = Result<(), Failure>;

/// Runs the command line `argv` (program name first) and returns the
/// exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn context(engine: &Engine) -> Result<EvalContext, Failure> {
    if engine.depth == 0 {
        return Err(Failure::usage("--depth must be at least 1"));
    }
    let spec = engine
        .spec
        .as_deref()
        .map(str::parse::<DerivationSpec>)
        .transpose()
        .map_err(|e| Failure::engine(&e, "--spec: ".into()))?;
    Ok(EvalContext {
        spec,
        depth: engine.depth,
    })
}

/// An input expression and where it came from.
struct Source {
    label: String,
    text: String,
    /// Line and column of the first character of `text` in its origin.
    origin: (usize, usize),
}

fn eval_source(src: &Source, ctx: &EvalContext) -> Result<Series, Failure> {
    let locate = |offset: usize| {
        let (l, c) = line_column(&src.text, offset);
        let column = if l == 1 { c + src.origin.1 - 1 } else { c };
        (l + src.origin.0 - 1, column)
    };
    let expr = parse(&src.text).map_err(|p| {
        let (line, column) = locate(p.offset);
        let mut msg = format!("{}: line {line}, column {column}: {}", src.label, p.message);
        if !p.expected.is_empty() {
            msg.push_str(&format!("; expected one of: {}", p.expected.join(", ")));
        }
        Failure::usage(msg)
    })?;
    evaluate(&expr, ctx).map_err(|e| {
        let (line, column) = locate(e.span.start);
        Failure::engine(
            &e.error,
            format!("{}: line {line}, column {column}: ", src.label),
        )
    })
}

fn expr_sources(exprs: &[String]) -> Vec<Source> {
    exprs
        .iter()
        .enumerate()
        .map(|(i, text)| Source {
            label: format!("expression {}", i + 1),
            text: text.clone(),
            origin: (1, 1),
        })
        .collect()
}

fn file_sources(path: &PathBuf) -> Result<Vec<Source>, Failure> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in content.lines().enumerate() {
        let code = line.split('#').next().unwrap_or("");
        let trimmed = code.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = code[..code.len() - trimmed.len()].chars().count();
        out.push(Source {
            label: path.display().to_string(),
            text: trimmed.trim_end().to_string(),
            origin: (n + 1, indent + 1),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct TermJson {
    exponent: String,
    coefficient: String,
}

#[derive(Serialize)]
struct EvalJson {
    input: String,
    series: String,
    terms: Vec<TermJson>,
    guarantee: Option<String>,
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    writeln!(out, "{text}").map_err(|e| Failure::usage(format!("write failed: {e}")))
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Eval { expr, engine, json } => {
            let ctx = context(&engine)?;
            let src = &expr_sources(&[expr])[0];
            let value = eval_source(src, &ctx)?;
            if json {
                let report = EvalJson {
                    input: parse(&src.text).map(|e| print(&e)).unwrap_or_default(),
                    series: value.to_string(),
                    terms: value
                        .terms()
                        .iter()
                        .map(|(g, q)| TermJson {
                            exponent: g.to_string(),
                            coefficient: q.to_string(),
                        })
                        .collect(),
                    guarantee: value.guarantee().map(ToString::to_string),
                };
                emit(
                    out,
                    &serde_json::to_string_pretty(&report).expect("serializable"),
                )
            } else {
                emit(out, &value.to_string())?;
                match value.guarantee() {
                    Some(w) => emit(out, &format!("exact below: t^{{{w}}}")),
                    None => Ok(()),
                }
            }
        }
        Command::Check {
            files,
            exprs,
            engine,
            json: _,
        } => {
            let ctx = context(&engine)?;
            let mut sources = Vec::new();
            for f in &files {
                sources.extend(file_sources(f)?);
            }
            sources.extend(expr_sources(&exprs));
            if sources.is_empty() {
                return Err(Failure::usage("check needs at least one expression"));
            }
            let ys = sources
                .iter()
                .map(|s| eval_source(s, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            let cert = check_corollary(&ys).map_err(|e| Failure::engine(&e, String::new()))?;
            emit(out, &cert.to_json())
        }
        Command::FindRelation {
            exprs,
            degree,
            cap,
            engine,
            json: _,
        } => {
            let ctx = context(&engine)?;
            let ws = expr_sources(&exprs)
                .iter()
                .map(|s| eval_source(s, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            let report =
                find_relation(&ws, degree, cap).map_err(|e| Failure::engine(&e, String::new()))?;
            emit(out, &report.to_json())
        }
        Command::Selftest { seed, json } => {
            let report = selftest::run(seed);
            if json {
                let suites: Vec<serde_json::Value> = report
                    .suites
                    .iter()
                    .map(|s| {
                        serde_json::json!({
                            "name": s.name,
                            "passed": s.passed,
                            "failed": s.failed,
                            "first_failure": s.first_failure,
                        })
                    })
                    .collect();
                let doc = serde_json::json!({
                    "seed": seed,
                    "suites": suites,
                    "passed": report.passed(),
                    "failed": report.failed(),
                });
                emit(
                    out,
                    &serde_json::to_string_pretty(&doc).expect("serializable"),
                )?;
            } else {
                for s in &report.suites {
                    emit(
                        out,
                        &format!("{}: {} passed, {} failed", s.name, s.passed, s.failed),
                    )?;
                    if let Some(f) = &s.first_failure {
                        emit(out, &format!("  first failure: {f}"))?;
                    }
                }
                emit(
                    out,
                    &format!(
                        "total: {} passed, {} failed in {:.2}s",
                        report.passed(),
                        report.failed(),
                        report.elapsed.as_secs_f64()
                    ),
                )?;
            }
            if report.failed() == 0 {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_DOMAIN,
                    message: format!("{} self-test cases failed", report.failed()),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("hahnfield").chain(args.iter().copied());
        let code = run_cli(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn eval_exp() {
        let (code, out, _) = run(&["eval", "-e", "exp(t^{1*e(0)})", "--depth", "3"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(
            lines.next(),
            Some("1 + 1*t^{1*e(0)} + 1/2*t^{2*e(0)} + 1/6*t^{3*e(0)}")
        );
        assert_eq!(lines.next(), Some("exact below: t^{4*e(0)}"));
    }

    #[test]
    fn exit_codes() {
        let (code, _, err) = run(&["eval", "-e", "log("]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("line 1, column 5"));
        let (code, _, _) = run(&["eval", "-e", "exp(1 + t)"]);
        assert_eq!(code, EXIT_DOMAIN);
        let (code, _, _) = run(&["eval", "-e", "D(t)"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run(&["eval", "-e", "t", "--spec", "case9:x=1"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("find-relation"));
    }

    #[test]
    fn check_certifies() {
        let (code, out, _) = run(&["check", "-e", "t^{-1*e(0)} + 3", "-e", "t^{-2*e(0)}"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["outcome"], "certified");
        assert_eq!(v["conclusion"], "td >= 3");
    }

    #[test]
    fn check_reads_files() {
        let dir = std::env::temp_dir().join(format!("hahnfield-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ys.txt");
        std::fs::write(
            &path,
            "# family\nt^{-1*e(0)} + 3\n\n  2*t^{-1*e(0)} - 1  # same direction\n",
        )
        .unwrap();
        let (code, out, _) = run(&["check", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["outcome"], "dependent");
        assert_eq!(v["witness"], serde_json::json!([2, -1]));

        std::fs::write(&path, "t\n   exp(\n").unwrap();
        let (code, _, err) = run(&["check", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("line 2, column 8"), "{err}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn find_relation_report() {
        let (code, out, _) = run(&["find-relation", "-e", "t", "-e", "t^2", "--degree", "2"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["outcome"], "verified");
        assert_eq!(v["relation"], "w2 - w1^2");
        let (code, _, _) = run(&["find-relation", "-e", "t", "--degree", "3", "--cap", "2"]);
        assert_eq!(code, EXIT_DOMAIN);
    }
}
