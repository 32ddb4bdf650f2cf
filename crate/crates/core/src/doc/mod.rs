//! Documentation database: one record per source file with its entries,
//! resolved tactic docs, library notes and an alphabetical index.

mod html;

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{DocCategory, Environment, LibraryNote, TacticDocEntry};
use crate::name::Name;
use crate::pretty::pretty;
use crate::typeclass::InstanceDb;
use crate::{Declaration, DeclarationKind};

pub use html::{emit_html, page_path, ASSET_STYLE};

/// Attributes shown on an entry; everything else stays internal.
pub const SHOWN_ATTRIBUTES: [&str; 5] = ["simp", "class", "instance", "nolint", "priority"];

#[derive(Debug, Error)]
pub enum DocError {
    #[error("tactic doc entry `{0}` has no description and none can be inherited")]
    NoDescription(String),
    #[error("tactic doc entry refers to unknown declaration `{0}`")]
    MissingDeclaration(Name),
    #[error("cannot write {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub type_compact: String,
    pub type_full: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEntry {
    pub name: String,
    pub kind: String,
    pub type_compact: String,
    pub type_full: String,
    pub doc: Option<String>,
    pub attrs: Vec<String>,
    pub instances: Option<Vec<String>>,
    pub eq_lemmas: Vec<String>,
    pub members: Vec<Member>,
    pub file: String,
    pub line: u32,
    pub namespace: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleRecord {
    pub file: String,
    pub doc: Option<String>,
    pub decls: Vec<DocEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticDocRecord {
    pub name: String,
    pub category: DocCategory,
    pub decl_names: Vec<String>,
    pub tags: Vec<String>,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteRecord {
    pub name: String,
    pub content: String,
    pub file: String,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub name: String,
    pub href: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocDatabase {
    pub modules: Vec<ModuleRecord>,
    pub tactic_docs: Vec<TacticDocRecord>,
    pub notes: Vec<NoteRecord>,
    pub index: Vec<IndexEntry>,
}

impl DocDatabase {
    pub fn entry_count(&self) -> usize {
        self.modules.iter().map(|m| m.decls.len()).sum()
    }

    pub fn entry(&self, name: &str) -> Option<&DocEntry> {
        self.modules.iter().flat_map(|m| &m.decls).find(|e| e.name == name)
    }

    pub fn from_json(bytes: &[u8]) -> serde_json::Result<Self> {
        serde_json::from_slice(bytes)
    }
}

/// A database together with the `Note [...]` references that did not resolve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocBuild {
    pub db: DocDatabase,
    pub warnings: Vec<String>,
}

pub fn kind_label(kind: DeclarationKind) -> &'static str {
    match kind {
        DeclarationKind::Definition => "def",
        other => other.as_str(),
    }
}

pub fn note_slug(name: &str) -> String {
    let mut slug = String::new();
    for ch in name.chars().flat_map(char::to_lowercase) {
        if ch.is_alphanumeric() {
            slug.push(ch);
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    format!("note-{slug}")
}

pub fn resolve_description(entry: &TacticDocEntry, env: &Environment) -> Result<String, DocError> {
    if let Some(missing) = entry.inherit_description_from.iter().chain(&entry.decl_names).find(|n| !env.contains(n)) {
        return Err(DocError::MissingDeclaration(missing.clone()));
    }
    if !entry.description.is_empty() {
        return Ok(entry.description.clone());
    }
    let doc_of = |n: &Name| env.get(n).and_then(|d| d.doc.clone()).filter(|s| !s.is_empty());
    let single = match entry.decl_names.as_slice() {
        [only] => Some(only),
        _ => None,
    };
    entry
        .inherit_description_from
        .as_ref()
        .and_then(doc_of)
        .or_else(|| single.and_then(doc_of))
        .ok_or_else(|| DocError::NoDescription(entry.entry_name.clone()))
}

/// Rewrites each `Note [X]` naming a known note to `[Note: X](#note-<slug>)`.
/// Unknown names are left alone and returned as warnings.
pub fn link_notes(text: &str, notes: &[LibraryNote]) -> (String, Vec<String>) {
    const OPEN: &str = "Note [";
    let known: HashSet<&str> = notes.iter().map(|n| n.name.as_str()).collect();
    let mut out = String::with_capacity(text.len());
    let mut warnings = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find(OPEN) {
        out.push_str(&rest[..start]);
        let after = &rest[start + OPEN.len()..];
        match after.find(']') {
            Some(end) if known.contains(&after[..end]) => {
                let name = &after[..end];
                out.push_str(&format!("[Note: {name}](#{})", note_slug(name)));
                rest = &after[end + 1..];
            }
            Some(end) => {
                warnings.push(format!("unknown library note `{}`", &after[..end]));
                out.push_str(&rest[start..start + OPEN.len() + end + 1]);
                rest = &after[end + 1..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    (out, warnings)
}

fn shown_attributes(d: &Declaration) -> Vec<String> {
    d.attributes
        .iter()
        .filter(|a| SHOWN_ATTRIBUTES.contains(&a.name.as_str()))
        .map(|a| {
            let mut parts = vec![a.name.clone()];
            parts.extend(a.priority.map(|p| p.to_string()));
            parts.extend(a.args.iter().cloned());
            parts.join(" ")
        })
        .collect()
}

pub fn module_href(file: &str) -> String {
    page_path(file)
}

struct Builder<'a> {
    env: &'a Environment,
    /// class name → its instances in declaration order
    instances: HashMap<&'a Name, Vec<String>>,
    /// member name → owning declaration
    owner: HashMap<&'a str, &'a Name>,
}

impl<'a> Builder<'a> {
    fn new(env: &'a Environment, db: &InstanceDb) -> Self {
        let mut instances: HashMap<&Name, Vec<String>> = HashMap::new();
        for d in env.declarations() {
            if let Some(e) = db.entry(&d.name) {
                if let Some(class) = env.get(e.class()) {
                    instances.entry(&class.name).or_default().push(d.name.to_string());
                }
            }
        }
        let mut owner = HashMap::new();
        for d in env.declarations() {
            for m in d.members() {
                if Name::parse(m).is_ok_and(|n| env.contains(&n)) && m != d.name.as_str() {
                    owner.entry(m).or_insert(&d.name);
                }
            }
        }
        Builder { env, instances, owner }
    }

    fn is_folded(&self, d: &Declaration) -> bool {
        self.owner.contains_key(d.name.as_str())
    }

    fn entry(&self, d: &Declaration) -> (DocEntry, Vec<String>) {
        let env = self.env;
        let notes = env.notes();
        let (doc, warnings) = match &d.doc {
            Some(text) => {
                let (linked, w) = link_notes(text, notes);
                (Some(linked), w.into_iter().map(|w| format!("{}: {w}", d.name)).collect())
            }
            None => (None, Vec::new()),
        };
        let prefix = format!("{}.equations.", d.name);
        let eq_lemmas = env.declarations().iter().filter(|e| e.name.as_str().starts_with(&prefix)).map(|e| e.name.to_string()).collect();
        let members = d
            .members()
            .filter(|m| self.owner.get(m) == Some(&&d.name))
            .filter_map(|m| Name::parse(m).ok().and_then(|n| env.get(&n)))
            .map(|m| Member { name: m.name.to_string(), type_compact: pretty(env, &m.ty, false), type_full: pretty(env, &m.ty, true) })
            .collect();
        let instances = d.is_class().then(|| self.instances.get(&d.name).cloned().unwrap_or_default());
        let entry = DocEntry {
            name: d.name.to_string(),
            kind: kind_label(d.kind).to_owned(),
            type_compact: pretty(env, &d.ty, false),
            type_full: pretty(env, &d.ty, true),
            doc,
            attrs: shown_attributes(d),
            instances,
            eq_lemmas,
            members,
            file: d.source.file.clone(),
            line: d.source.line,
            namespace: d.name.namespace().to_owned(),
        };
        (entry, warnings)
    }
}

/// Builds the database on `jobs` worker threads; the result does not depend on `jobs`.
pub fn build_doc_database(env: &Environment, jobs: usize) -> Result<DocBuild, DocError> {
    let (db, _) = InstanceDb::build_partial(env);
    let builder = Builder::new(env, &db);

    let mut files: Vec<&str> = Vec::new();
    let mut by_file: HashMap<&str, Vec<&Declaration>> = HashMap::new();
    for d in env.declarations().iter().filter(|d| !d.auto && !builder.is_folded(d)) {
        let file = d.source.file.as_str();
        if !by_file.contains_key(file) {
            files.push(file);
        }
        by_file.entry(file).or_default().push(d);
    }

    let build_module = |file: &&str| {
        let (decls, warnings): (Vec<DocEntry>, Vec<Vec<String>>) = by_file[file].iter().map(|d| builder.entry(d)).unzip();
        let (doc, doc_warnings) = match env.module_docs().iter().find(|m| m.file == *file) {
            Some(m) => {
                let (linked, w) = link_notes(&m.text, env.notes());
                (Some(linked), w)
            }
            None => (None, Vec::new()),
        };
        let warnings: Vec<String> =
            doc_warnings.into_iter().map(|w| format!("{file}: {w}")).chain(warnings.into_iter().flatten()).collect();
        (ModuleRecord { file: file.to_string(), doc, decls }, warnings)
    };
    let built: Vec<(ModuleRecord, Vec<String>)> = if jobs <= 1 {
        files.iter().map(build_module).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| DocError::Pool(e.to_string()))?
            .install(|| files.par_iter().map(build_module).collect())
    };
    let (modules, module_warnings): (Vec<ModuleRecord>, Vec<Vec<String>>) = built.into_iter().unzip();
    let mut warnings: Vec<String> = module_warnings.into_iter().flatten().collect();

    let mut tactic_docs = Vec::new();
    for category in DocCategory::ALL {
        for t in env.tactic_docs().iter().filter(|t| t.category == category) {
            let (description, w) = link_notes(&resolve_description(t, env)?, env.notes());
            warnings.extend(w.into_iter().map(|w| format!("{}: {w}", t.entry_name)));
            tactic_docs.push(TacticDocRecord {
                name: t.entry_name.clone(),
                category,
                decl_names: t.decl_names.iter().map(Name::to_string).collect(),
                tags: t.tags.clone(),
                description,
            });
        }
    }

    let notes = env
        .notes()
        .iter()
        .map(|n| {
            let (content, w) = link_notes(&n.content, env.notes());
            warnings.extend(w.into_iter().map(|w| format!("Note [{}]: {w}", n.name)));
            NoteRecord { name: n.name.clone(), content, file: n.origin.file.clone(), line: n.origin.line }
        })
        .collect();

    let mut index: Vec<IndexEntry> = modules
        .iter()
        .flat_map(|m| {
            let page = module_href(&m.file);
            m.decls.iter().flat_map(move |e| {
                let page = page.clone();
                std::iter::once(e.name.clone())
                    .chain(e.members.iter().map(|mem| mem.name.clone()))
                    .map(move |name| IndexEntry { href: format!("{page}#{name}"), name })
            })
        })
        .collect();
    index.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.href.cmp(&b.href)));

    Ok(DocBuild { db: DocDatabase { modules, tactic_docs, notes, index }, warnings })
}

/// Is `bytes` one JSON object with a top-level `modules` key, i.e. a
/// previously emitted database rather than a corpus?
pub fn is_database_json(bytes: &[u8]) -> bool {
    matches!(serde_json::from_slice::<serde_json::Value>(bytes), Ok(serde_json::Value::Object(m)) if m.contains_key("modules"))
}

pub fn emit_json(db: &DocDatabase) -> Vec<u8> {
    serde_json::to_vec(db).expect("doc database serializes")
}
