use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prooflint_core::corpus::parse_corpus;
use prooflint_core::doc::{build_doc_database, emit_html, emit_json, is_database_json, resolve_description, DocDatabase};
use prooflint_core::lint::{format_report, run_linters, RunOptions, Scope};
use prooflint_core::stats::stats;
use prooflint_core::Environment;

/// Exit status for corpus, usage and I/O errors; 1 is reserved for lint findings.
const FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "prooflint", version, about = "Lint and document an exported proof-library corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the linters and print a report; exits 1 when anything is found.
    Lint {
        corpus: PathBuf,
        /// Only check declarations from this source file.
        #[arg(long, value_name = "FILE", conflicts_with = "upto")]
        module: Option<String>,
        /// Only check declarations of FILE at or before LINE.
        #[arg(long, value_name = "FILE:LINE", value_parser = parse_upto)]
        upto: Option<(String, u32)>,
        /// Comma-separated linter names to run.
        #[arg(long, value_name = "L1,L2", value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Report findings even on declarations that opt out with `nolint`.
        #[arg(long)]
        no_respect_nolint: bool,
        #[arg(long, env = "PROOFLINT_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// Write the documentation database as JSON.
    DocJson {
        corpus: PathBuf,
        #[arg(short = 'o', value_name = "FILE")]
        output: PathBuf,
        #[arg(long, env = "PROOFLINT_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// Write the static documentation site from a corpus or an emitted db.json.
    DocHtml {
        input: PathBuf,
        #[arg(short = 'o', value_name = "DIR")]
        output: PathBuf,
        #[arg(long, env = "PROOFLINT_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// Print declaration counts.
    Stats {
        corpus: PathBuf,
        /// Count auto-generated declarations too.
        #[arg(long)]
        include_auto: bool,
    },
}

fn parse_upto(s: &str) -> Result<(String, u32), String> {
    let (file, line) = s.rsplit_once(':').ok_or("expected FILE:LINE")?;
    let line = line.parse().map_err(|_| format!("`{line}` is not a line number"))?;
    if file.is_empty() {
        return Err("expected FILE:LINE".into());
    }
    Ok((file.to_owned(), line))
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Environment, String> {
    let bytes = read(path)?;
    parse_corpus(bytes.as_slice()).map_err(|e| format!("{}: {e}", path.display()))
}

fn database(env: &Environment, jobs: usize) -> Result<DocDatabase, String> {
    let errors: Vec<String> = env.tactic_docs().iter().filter_map(|t| resolve_description(t, env).err()).map(|e| e.to_string()).collect();
    if !errors.is_empty() {
        return Err(errors.join("\n"));
    }
    let build = build_doc_database(env, jobs).map_err(|e| e.to_string())?;
    for w in &build.warnings {
        eprintln!("warning: {w}");
    }
    Ok(build.db)
}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Lint { corpus, module, upto, only, no_respect_nolint, jobs } => {
            let env = load(&corpus)?;
            let scope = match (module, upto) {
                (Some(file), _) => Scope::File(file),
                (_, Some((file, line))) => Scope::UpToLine { file, line },
                _ => Scope::All,
            };
            let options = RunOptions { scope, only, respect_nolint: !no_respect_nolint, jobs: jobs as usize };
            let report = run_linters(&env, &options).map_err(|e| e.to_string())?;
            print!("{}", format_report(&report));
            Ok(u8::from(report.total_findings() > 0))
        }
        Command::DocJson { corpus, output, jobs } => {
            let db = database(&load(&corpus)?, jobs as usize)?;
            fs::write(&output, emit_json(&db)).map_err(|e| format!("cannot write {}: {e}", output.display()))?;
            Ok(0)
        }
        Command::DocHtml { input, output, jobs } => {
            let bytes = read(&input)?;
            let db = if is_database_json(&bytes) {
                DocDatabase::from_json(&bytes).map_err(|e| format!("{}: {e}", input.display()))?
            } else {
                let env = parse_corpus(bytes.as_slice()).map_err(|e| format!("{}: {e}", input.display()))?;
                database(&env, jobs as usize)?
            };
            let assets = std::env::var_os("PROOFLINT_FRONTEND_DIR").map(PathBuf::from);
            emit_html(&db, &output, assets.as_deref(), jobs as usize).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Stats { corpus, include_auto } => {
            print!("{}", stats(&load(&corpus)?, include_auto));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(FAILURE)
        }
    }
}
