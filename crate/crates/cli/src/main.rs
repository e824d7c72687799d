use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wright_core::analyzer::AnalyzerOptions;
use wright_core::diag::Diagnostic;
use wright_core::engine::{self, CheckOptions, Discharged, ViolationKind, DEFAULT_MAX_STATES};
use wright_core::parser::parse_source;
use wright_core::pipeline::{check_parsed, emit_checked, Checked, Compiled, PipelineError};

/// Translate Wright architecture descriptions to CSPM and check the
/// generated refinement assertions.
#[derive(Parser)]
#[command(name = "wright2csp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the CSPM translation of a .wrt file.
    Translate { input: PathBuf, output: PathBuf },
    /// Translate, then discharge every assertion with the built-in checker.
    Check {
        input: PathBuf,
        /// Also write the translation here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        /// Check assertions one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Run the static rules only.
    Lint {
        input: PathBuf,
        /// Report unattached ports and roles as errors.
        #[arg(long)]
        strict_attachments: bool,
    },
}

const SUBCOMMANDS: &[&str] = &["translate", "check", "lint", "help"];

/// `wright2csp <in> <out>` is accepted as `translate <in> <out>`.
fn normalize_args(mut args: Vec<OsString>) -> Vec<OsString> {
    if args.len() == 3 {
        let first = args[1].to_string_lossy();
        if !first.starts_with('-') && !SUBCOMMANDS.contains(&first.as_ref()) {
            args.insert(1, "translate".into());
        }
    }
    args
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(normalize_args(std::env::args_os().collect()));
    let ok = match cli.command {
        Command::Translate { input, output } => translate(&input, &output),
        Command::Check { input, output, max_states, sequential } => {
            let mode = if sequential { engine::Mode::Sequential } else { engine::Mode::Parallel };
            check(&input, output.as_deref(), CheckOptions { max_states, mode })
        }
        Command::Lint { input, strict_attachments } => lint(&input, strict_attachments),
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(file: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", file.display());
    }
}

/// Parses and runs the static rules, printing whatever is found.
fn front_end(input: &Path, opts: AnalyzerOptions) -> Option<Checked> {
    let src = match std::fs::read_to_string(input) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", input.display());
            return None;
        }
    };
    let parsed = match parse_source(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: {e}", input.display());
            return None;
        }
    };
    eprintln!("Parsing complete.");
    match check_parsed(parsed, opts) {
        Ok(c) => {
            report(input, &c.diagnostics);
            Some(c)
        }
        Err(PipelineError::Semantic(diags)) => {
            report(input, &diags);
            None
        }
        Err(e) => {
            eprintln!("{}: {e}", input.display());
            None
        }
    }
}

/// Emits, reporting only what the emitter itself adds.
fn compile(input: &Path, checked: Checked) -> Compiled {
    let seen = checked.diagnostics.len();
    let compiled = emit_checked(checked);
    report(input, &compiled.diagnostics[seen..]);
    compiled
}

/// Writes through a temporary file in the destination directory, so a
/// failed run never leaves a truncated output behind.
fn write_atomically(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_output(path: &Path, text: &str) -> bool {
    match write_atomically(path, text) {
        Ok(()) => true,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            false
        }
    }
}

fn translate(input: &Path, output: &Path) -> bool {
    let Some(checked) = front_end(input, AnalyzerOptions::default()) else { return false };
    let compiled = compile(input, checked);
    if !write_output(output, &compiled.plan.text) {
        return false;
    }
    eprintln!("wr2fdr done.");
    true
}

fn verdict_line(d: &Discharged) -> String {
    let label = &d.assertion.label;
    match &d.verdict {
        Ok(v) if v.holds => format!("PASS {label}  ({} states)", v.explored),
        Ok(v) => {
            let mut line = format!("FAIL {label}  ({} states)", v.explored);
            if let Some(cx) = &v.counterexample {
                let kind = match cx.kind {
                    ViolationKind::Failure => "failure",
                    ViolationKind::Divergence => "divergence",
                };
                line.push_str(&format!("\n     {kind} after <{}>: {}", cx.trace.join(", "), cx.detail));
            }
            line
        }
        Err(e) => format!("FAIL {label}\n     error: {e}"),
    }
}

fn check(input: &Path, output: Option<&Path>, opts: CheckOptions) -> bool {
    let Some(checked) = front_end(input, AnalyzerOptions::default()) else { return false };
    let compiled = compile(input, checked);
    if let Some(out) = output {
        if !write_output(out, &compiled.plan.text) {
            return false;
        }
    }
    let results = match engine::discharge_assertions(&compiled.plan, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", input.display());
            return false;
        }
    };
    for d in &results {
        println!("{}", verdict_line(d));
    }
    let passed = results.iter().filter(|d| d.holds()).count();
    eprintln!("{passed}/{} assertions hold", results.len());
    passed == results.len()
}

fn lint(input: &Path, strict_attachments: bool) -> bool {
    let opts = AnalyzerOptions { strict_attachments, ..Default::default() };
    front_end(input, opts).is_some()
}
