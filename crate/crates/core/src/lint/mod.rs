//! Linter registry, runner and report formatting.

mod basic;
mod simp;
mod typeclass;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::env::Environment;
use crate::name::Name;
use crate::simp::{SimpError, SimpSet};
use crate::typeclass::{InstanceDb, InstanceError};
use crate::Declaration;

pub use basic::{lint_def_lemma, lint_doc_blame, lint_dup_namespace, lint_illegal_constants, lint_unused_arguments};
pub use simp::{ground_lhs, lint_simp_comm, lint_simp_nf, lint_simp_var_head};
pub use typeclass::{
    lint_dangerous_instance, lint_has_inhabited_instance, lint_impossible_instance, lint_incorrect_type_class_argument,
    lint_inhabited_nonempty, lint_instance_priority,
};

pub type LintTest = fn(&LintContext<'_>, &Declaration) -> Option<String>;

/// A named check over single declarations.
#[derive(Clone, Copy)]
pub struct Linter {
    pub name: &'static str,
    /// Returns a message when the declaration fails.
    pub test: LintTest,
    pub no_errors_found: &'static str,
    pub errors_found: &'static str,
    /// Report sections are ordered by descending priority.
    pub priority: u32,
    pub auto_decls: bool,
}

impl std::fmt::Debug for Linter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Linter").field("name", &self.name).field("priority", &self.priority).finish()
    }
}

/// What a linter sees: the environment and indexes built on first use.
pub struct LintContext<'a> {
    pub env: &'a Environment,
    instances: OnceLock<(InstanceDb, Vec<InstanceError>)>,
    simp: OnceLock<(SimpSet, Vec<SimpError>)>,
}

impl<'a> LintContext<'a> {
    pub fn new(env: &'a Environment) -> Self {
        LintContext { env, instances: OnceLock::new(), simp: OnceLock::new() }
    }

    pub fn instances(&self) -> &InstanceDb {
        &self.instances.get_or_init(|| InstanceDb::build_partial(self.env)).0
    }

    pub fn simp_set(&self) -> &SimpSet {
        &self.simp_index().0
    }

    /// Simp lemmas that failed to compile.
    pub fn simp_errors(&self) -> &[SimpError] {
        &self.simp_index().1
    }

    fn simp_index(&self) -> &(SimpSet, Vec<SimpError>) {
        self.simp.get_or_init(|| SimpSet::build_partial(self.env))
    }
}

pub fn builtin_linters() -> Vec<Linter> {
    fn linter(name: &'static str, test: LintTest, no_errors_found: &'static str, errors_found: &'static str) -> Linter {
        Linter { name, test, no_errors_found, errors_found, priority: 1000, auto_decls: false }
    }
    vec![
        Linter {
            priority: 1450,
            ..linter(
                "doc_blame",
                |_, d| lint_doc_blame(d),
                "No definitions are missing documentation.",
                "DEFINITIONS ARE MISSING DOCUMENTATION STRINGS",
            )
        },
        linter(
            "dup_namespace",
            |_, d| lint_dup_namespace(d),
            "No declarations have a duplicate namespace.",
            "DUPLICATED NAMESPACES IN NAME",
        ),
        linter("def_lemma", |c, d| lint_def_lemma(c.env, d), "All declarations correctly marked as def/lemma.", "INCORRECT DEF/LEMMA"),
        linter("ge_or_gt", |_, d| lint_illegal_constants(d), "Not using ≥/> in declarations.", "USING ≥/> IN DECLARATIONS"),
        linter("unused_arguments", |c, d| lint_unused_arguments(c.env, d), "No unused arguments.", "UNUSED ARGUMENTS"),
        linter(
            "instance_priority",
            |c, d| lint_instance_priority(c.env, d),
            "All instance priorities are good.",
            "DANGEROUS INSTANCE PRIORITIES. These instances always apply and should have a priority below 1000",
        ),
        linter(
            "dangerous_instance",
            |c, d| lint_dangerous_instance(c.env, d),
            "No dangerous instances.",
            "DANGEROUS INSTANCES FOUND. These instances create subgoals containing metavariables",
        ),
        linter(
            "impossible_instance",
            |c, d| lint_impossible_instance(c.env, d),
            "All instances are applicable.",
            "IMPOSSIBLE INSTANCES FOUND. These instances have an argument that type-class resolution can never find",
        ),
        linter(
            "incorrect_type_class_argument",
            |c, d| lint_incorrect_type_class_argument(c.env, d),
            "All declarations have correct type-class arguments.",
            "INCORRECT TYPE-CLASS ARGUMENTS. Some declarations have non-classes between [square brackets]",
        ),
        linter(
            "has_inhabited_instance",
            |c, d| lint_has_inhabited_instance(c.env, c.instances(), d),
            "All types have inhabited instances.",
            "TYPES ARE MISSING INHABITED INSTANCES",
        ),
        linter(
            "inhabited_nonempty",
            |c, d| lint_inhabited_nonempty(c.env, d),
            "No uses of `inhabited` arguments should be replaced with `nonempty`.",
            "USES OF `inhabited` SHOULD BE REPLACED WITH `nonempty`",
        ),
        linter(
            "simp_nf",
            lint_simp_nf,
            "All left-hand sides of simp lemmas are in simp-normal form.",
            "SOME SIMP LEMMAS ARE REDUNDANT OR HAVE LEFT-HAND SIDES NOT IN SIMP-NORMAL FORM",
        ),
        linter("simp_comm", lint_simp_comm, "No commutativity lemma is marked simp.", "COMMUTATIVITY LEMMAS ARE MARKED SIMP"),
        linter(
            "simp_var_head",
            lint_simp_var_head,
            "No left-hand side of a simp lemma has a variable as head symbol.",
            "LEFT-HAND SIDE HAS A VARIABLE AS HEAD SYMBOL",
        ),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    File(String),
    /// Declarations of the file at or before the line.
    UpToLine {
        file: String,
        line: u32,
    },
}

impl Scope {
    fn contains(&self, d: &Declaration) -> bool {
        match self {
            Scope::All => true,
            Scope::File(f) => d.source.file == *f,
            Scope::UpToLine { file, line } => d.source.file == *file && d.source.line <= *line,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Scope::All => "all declarations".to_owned(),
            Scope::File(f) => format!("declarations in {f}"),
            Scope::UpToLine { file, line } => format!("declarations in {file} up to line {line}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub scope: Scope,
    /// Run only these linters.
    pub only: Option<Vec<String>>,
    pub respect_nolint: bool,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { scope: Scope::All, only: None, respect_nolint: true, jobs: 1 }
    }
}

#[derive(Debug, Error)]
pub enum LintError {
    #[error("unknown linter `{0}`")]
    UnknownLinter(String),
    #[error("no declaration comes from file `{0}`")]
    UnknownFile(String),
    #[error("could not start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub decl: Name,
    pub file: String,
    pub line: u32,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bucket {
    pub linter: String,
    pub priority: u32,
    pub errors_found: String,
    pub no_errors_found: String,
    /// In declaration order.
    pub findings: Vec<Finding>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LintReport {
    pub scope: String,
    pub buckets: Vec<Bucket>,
}

impl LintReport {
    pub fn total_findings(&self) -> usize {
        self.buckets.iter().map(|b| b.findings.len()).sum()
    }

    pub fn bucket(&self, linter: &str) -> Option<&Bucket> {
        self.buckets.iter().find(|b| b.linter == linter)
    }
}

pub fn run_linters(env: &Environment, options: &RunOptions) -> Result<LintReport, LintError> {
    run_with(env, &builtin_linters(), options)
}

/// Run `linters` over the declarations in scope.
pub fn run_with(env: &Environment, linters: &[Linter], options: &RunOptions) -> Result<LintReport, LintError> {
    let selected: Vec<&Linter> = match &options.only {
        None => linters.iter().collect(),
        Some(names) => {
            let mut out = Vec::new();
            for n in names {
                let l = linters.iter().find(|l| l.name == n).ok_or_else(|| LintError::UnknownLinter(n.clone()))?;
                if !out.iter().any(|o: &&Linter| o.name == l.name) {
                    out.push(l);
                }
            }
            out
        }
    };
    match &options.scope {
        Scope::File(f) | Scope::UpToLine { file: f, .. } if !env.declarations().iter().any(|d| d.source.file == *f) => {
            return Err(LintError::UnknownFile(f.clone()));
        }
        _ => {}
    }

    let ctx = LintContext::new(env);
    let in_scope: Vec<&Declaration> = env.declarations().iter().filter(|d| options.scope.contains(d)).collect();
    let test = |l: &Linter, d: &&Declaration| -> Option<Finding> {
        if (d.auto && !l.auto_decls) || (options.respect_nolint && d.nolint().any(|n| n == l.name)) {
            return None;
        }
        (l.test)(&ctx, d).map(|message| Finding { decl: d.name.clone(), file: d.source.file.clone(), line: d.source.line, message })
    };
    let results: Vec<Vec<Finding>> = if options.jobs == 1 {
        selected.iter().map(|l| in_scope.iter().filter_map(|d| test(l, d)).collect()).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(options.jobs).build()?;
        pool.install(|| selected.par_iter().map(|l| in_scope.par_iter().filter_map(|d| test(l, d)).collect()).collect())
    };

    let mut buckets: Vec<Bucket> = selected
        .iter()
        .zip(results)
        .map(|(l, findings)| Bucket {
            linter: l.name.to_owned(),
            priority: l.priority,
            errors_found: l.errors_found.to_owned(),
            no_errors_found: l.no_errors_found.to_owned(),
            findings,
        })
        .collect();
    buckets.sort_by(|a, b| b.priority.cmp(&a.priority).then_with(|| a.linter.cmp(&b.linter)));
    Ok(LintReport { scope: options.scope.describe(), buckets })
}

/// One section per linter: its header, then `file:line name : message`
/// lines, or the passing message.
pub fn format_report(report: &LintReport) -> String {
    let mut out = String::new();
    for b in &report.buckets {
        if b.findings.is_empty() {
            let _ = writeln!(out, "-- {}: {}", b.linter, b.no_errors_found);
            continue;
        }
        let _ = writeln!(out, "-- {}: {}", b.linter, b.errors_found);
        for f in &b.findings {
            let _ = writeln!(out, "{}:{} {} : {}", f.file, f.line, f.decl, f.message);
        }
    }
    out
}

/// The set of (linter, declaration) pairs flagged in a report.
pub fn finding_pairs(report: &LintReport) -> HashSet<(String, Name)> {
    report.buckets.iter().flat_map(|b| b.findings.iter().map(move |f| (b.linter.clone(), f.decl.clone()))).collect()
}
