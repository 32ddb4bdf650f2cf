use std::collections::BTreeSet;
use std::path::Path;

use prooflint_core::corpus::parse_corpus_str;
use prooflint_core::doc::{build_doc_database, emit_html, emit_json, note_slug, DocDatabase, DocError};
use prooflint_core::env::{DocCategory, EnvParts, LibraryNote, ModuleDoc, SourceLocation};
use prooflint_core::typeclass::InstanceDb;
use prooflint_core::Environment;

fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn load(name: &str) -> Environment {
    parse_corpus_str(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

fn db(env: &Environment) -> DocDatabase {
    build_doc_database(env, 1).unwrap().db
}

#[test]
fn prelude_matches_the_golden_database() {
    let golden = std::fs::read(fixture_path("db.json")).unwrap();
    assert_eq!(emit_json(&db(&load("prelude.pcorpus"))), golden);
    assert_eq!(DocDatabase::from_json(&golden).unwrap(), db(&load("prelude.pcorpus")));
}

#[test]
fn every_declaration_is_documented_once() {
    for name in ["prelude.pcorpus", "seeded.pcorpus", "simp_nf.pcorpus", "empty.pcorpus"] {
        let env = load(name);
        let db = db(&env);
        let mut shown: Vec<String> = Vec::new();
        for e in db.modules.iter().flat_map(|m| &m.decls) {
            shown.push(e.name.clone());
            shown.extend(e.members.iter().map(|m| m.name.clone()));
        }
        let unique: BTreeSet<&String> = shown.iter().collect();
        assert_eq!(unique.len(), shown.len(), "{name}");
        let expected: BTreeSet<String> = env.declarations().iter().filter(|d| !d.auto).map(|d| d.name.to_string()).collect();
        assert_eq!(unique.into_iter().cloned().collect::<BTreeSet<_>>(), expected, "{name}");
        let indexed: BTreeSet<String> = db.index.iter().map(|i| i.name.clone()).collect();
        assert_eq!(indexed, expected, "{name}");
    }
}

#[test]
fn class_entries_list_their_instances() {
    for name in ["prelude.pcorpus", "seeded.pcorpus"] {
        let env = load(name);
        let db = db(&env);
        let (instances, _) = InstanceDb::build_partial(&env);
        for d in env.declarations().iter().filter(|d| !d.auto) {
            let Some(entry) = db.entry(d.name.as_str()) else { continue };
            if !d.is_class() {
                assert!(entry.instances.is_none(), "{}", d.name);
                continue;
            }
            let listed: BTreeSet<String> = entry.instances.clone().unwrap().into_iter().collect();
            let expected: BTreeSet<String> = instances.instances_of(&d.name).iter().map(|e| e.decl.to_string()).collect();
            assert_eq!(listed, expected, "{}", d.name);
        }
    }
}

#[test]
fn tactic_descriptions_are_inherited() {
    let db = db(&load("prelude.pcorpus"));
    let linarith = db.tactic_docs.iter().find(|t| t.name == "linarith").unwrap();
    let env = load("prelude.pcorpus");
    let source = env.get(&"tactic.interactive.linarith".into()).unwrap();
    assert_eq!(Some(&linarith.description), source.doc.as_ref());
    assert!(!linarith.description.is_empty());
}

#[test]
fn missing_description_is_an_error() {
    let mut parts = load("prelude.pcorpus").into_parts();
    let t = parts.tactic_docs.iter_mut().find(|t| t.entry_name == "#lint").unwrap();
    t.description.clear();
    let env = Environment::new(parts).unwrap();
    assert!(matches!(build_doc_database(&env, 1), Err(DocError::NoDescription(n)) if n == "#lint"));
}

fn emit(db: &DocDatabase, dir: &Path, jobs: usize) -> Vec<String> {
    emit_html(db, dir, None, jobs).unwrap()
}

#[test]
fn html_site_layout() {
    let dir = tempfile::tempdir().unwrap();
    let db = db(&load("prelude.pcorpus"));
    emit(&db, dir.path(), 2);
    for page in ["index.html", "notes.html", "db.json", "assets/style.css"] {
        assert!(dir.path().join(page).is_file(), "{page}");
    }
    for category in DocCategory::ALL {
        assert!(dir.path().join(format!("tactics/{}.html", category.as_str())).is_file());
    }

    let group = std::fs::read_to_string(dir.path().join("module/algebra.group.html")).unwrap();
    let href = format!("../notes.html#{}", note_slug("lower instance priority"));
    assert!(group.contains(&format!("href=\"{href}\"")), "{group}");
    let notes = std::fs::read_to_string(dir.path().join("notes.html")).unwrap();
    assert!(notes.contains(&format!("id=\"{}\"", note_slug("lower instance priority"))));

    let tactics = std::fs::read_to_string(dir.path().join("tactics/tactic.html")).unwrap();
    assert!(tactics.contains("data-tags=\"[&quot;arithmetic&quot;,&quot;decision procedure&quot;]\""), "{tactics}");
}

/// Every literal `Note [X]` left in the generated pages names a note that
/// does not exist and was reported.
#[test]
fn note_references_are_linked_or_reported() {
    let mut parts: EnvParts = load("prelude.pcorpus").into_parts();
    parts
        .module_docs
        .push(ModuleDoc { file: "data/int.lean".into(), text: "See Note [no such note] and Note [lower instance priority].".into() });
    parts.notes.push(LibraryNote {
        name: "second".into(),
        content: "Extends Note [lower instance priority].".into(),
        origin: SourceLocation { file: "data/int.lean".into(), line: 2 },
    });
    let env = Environment::new(parts).unwrap();
    let build = build_doc_database(&env, 1).unwrap();
    assert_eq!(build.warnings.len(), 1);
    assert!(build.warnings[0].contains("unknown library note `no such note`"), "{:?}", build.warnings);

    let dir = tempfile::tempdir().unwrap();
    let written = emit(&build.db, dir.path(), 1);
    let mut leftovers = BTreeSet::new();
    for page in written.iter().filter(|p| p.ends_with(".html")) {
        let html = std::fs::read_to_string(dir.path().join(page)).unwrap();
        let mut rest = html.as_str();
        while let Some(i) = rest.find("Note [") {
            let after = &rest[i + 6..];
            let end = after.find(']').unwrap();
            leftovers.insert(after[..end].to_owned());
            rest = &after[end..];
        }
    }
    assert_eq!(leftovers, BTreeSet::from(["no such note".to_owned()]));
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let env = load("seeded.pcorpus");
    let serial = emit_json(&db(&env));
    let a = tempfile::tempdir().unwrap();
    let written = emit(&db(&env), a.path(), 1);
    for jobs in [2, 4, 8] {
        assert_eq!(emit_json(&build_doc_database(&env, jobs).unwrap().db), serial);
        let b = tempfile::tempdir().unwrap();
        assert_eq!(emit(&db(&env), b.path(), jobs), written);
        for page in &written {
            assert_eq!(std::fs::read(a.path().join(page)).unwrap(), std::fs::read(b.path().join(page)).unwrap(), "{page}");
        }
    }
}
