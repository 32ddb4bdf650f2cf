//! The `.pcorpus` format: newline-delimited JSON, one entry per line.
//!
//! ```text
//! {"decl":{"name":"nat.zero","kind":"constant","type":["const","nat"],"doc":"zero","auto":false,"file":"init/nat.lean","line":3}}
//! {"notation":{"symbol":"0","const":"nat.zero","fixity":"prefix","precedence":1024}}
//! {"module_doc":{"file":"init/nat.lean","text":"..."}}
//! {"tactic_doc":{"entry_name":"linarith","category":"tactic","decl_names":["tactic.interactive.linarith"]}}
//! {"note":{"name":"lower instance priority","content":"...","file":"...","line":1}}
//! ```
//!
//! Terms are nested arrays: `["var", n]`, `["const", "a.b"]`, `["app", f, a]`,
//! `["lam", "x", "e|i|si|ii", dom, body]`, `["pi", ...]`, and `["sort", l]`
//! with levels `0`, `["succ", l]` or `["param", "u"]`.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::env::{
    AttributeInstance, DeclarationKind, DocCategory, EnvError, EnvParts, Environment, Fixity, LibraryNote, ModuleDoc, Notation,
    SourceLocation, TacticDocEntry,
};
use crate::name::Name;
use crate::term::{BinderInfo, Level, Term};
use crate::Declaration;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("duplicate declaration name `{0}`")]
    DuplicateName(Name),
    #[error("unresolved constant `{name}` (first used on line {line})")]
    UnresolvedConstant { name: Name, line: usize },
    #[error("reading corpus: {0}")]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EntryRepr {
    Decl(DeclRepr),
    Notation(NotationRepr),
    ModuleDoc(ModuleDocRepr),
    TacticDoc(TacticDocRepr),
    Note(NoteRepr),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeclRepr {
    name: String,
    kind: String,
    #[serde(rename = "type")]
    ty: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attrs: Vec<AttrRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    doc: Option<String>,
    #[serde(default)]
    auto: bool,
    file: String,
    line: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttrRepr {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    priority: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    args: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NotationRepr {
    symbol: String,
    #[serde(rename = "const")]
    constant: String,
    fixity: Fixity,
    precedence: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuleDocRepr {
    file: String,
    text: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TacticDocRepr {
    entry_name: String,
    category: DocCategory,
    decl_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tags: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inherit_description_from: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoteRepr {
    name: String,
    content: String,
    file: String,
    line: u32,
}

pub fn parse_corpus_str(input: &str) -> Result<Environment, CorpusError> {
    parse_corpus(input.as_bytes())
}

/// Parse and link a corpus. Declarations keep line order; constants may be
/// referenced before the line that declares them.
pub fn parse_corpus<R: BufRead>(mut reader: R) -> Result<Environment, CorpusError> {
    let mut parts = EnvParts::default();
    // line of each declaration and of each notation, for error reporting
    let mut decl_lines = Vec::new();
    let mut notation_lines = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let malformed = |message: String| CorpusError::MalformedLine { line: line_no, message };
        let text = std::str::from_utf8(&buf).map_err(|e| malformed(format!("invalid UTF-8: {e}")))?;
        if text.trim().is_empty() {
            continue;
        }
        let entry: EntryRepr = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        match entry {
            EntryRepr::Decl(d) => {
                parts.declarations.push(decode_decl(d).map_err(malformed)?);
                decl_lines.push(line_no);
            }
            EntryRepr::Notation(n) => {
                parts.notations.push(Notation {
                    symbol: n.symbol,
                    constant: parse_name(&n.constant).map_err(malformed)?,
                    fixity: n.fixity,
                    precedence: n.precedence,
                });
                notation_lines.push(line_no);
            }
            EntryRepr::ModuleDoc(m) => parts.module_docs.push(ModuleDoc { file: m.file, text: m.text }),
            EntryRepr::TacticDoc(t) => parts.tactic_docs.push(TacticDocEntry {
                entry_name: t.entry_name,
                category: t.category,
                decl_names: t.decl_names.iter().map(|n| parse_name(n)).collect::<Result<_, _>>().map_err(malformed)?,
                tags: t.tags,
                description: t.description,
                inherit_description_from: t.inherit_description_from.as_deref().map(parse_name).transpose().map_err(malformed)?,
            }),
            EntryRepr::Note(n) => {
                if parts.notes.iter().any(|m| m.name == n.name) {
                    return Err(malformed(format!("duplicate library note `{}`", n.name)));
                }
                parts.notes.push(LibraryNote { name: n.name, content: n.content, origin: SourceLocation { file: n.file, line: n.line } });
            }
        }
    }

    let mut declared = HashSet::new();
    for d in &parts.declarations {
        if !declared.insert(&d.name) {
            return Err(CorpusError::DuplicateName(d.name.clone()));
        }
    }
    let mut uses: Vec<(usize, &Name)> = Vec::new();
    for (d, &line) in parts.declarations.iter().zip(&decl_lines) {
        for t in std::iter::once(&d.ty).chain(d.value.as_ref()) {
            uses.extend(t.constants().into_iter().map(|c| (line, c)));
        }
    }
    uses.extend(parts.notations.iter().zip(&notation_lines).map(|(n, &line)| (line, &n.constant)));
    uses.sort_by_key(|(line, _)| *line);
    if let Some((line, name)) = uses.into_iter().find(|(_, c)| !declared.contains(c)) {
        return Err(CorpusError::UnresolvedConstant { name: name.clone(), line });
    }
    Environment::new(parts).map_err(|e| match e {
        EnvError::DuplicateName(n) => CorpusError::DuplicateName(n),
        other => CorpusError::MalformedLine { line: 0, message: other.to_string() },
    })
}

fn parse_name(s: &str) -> Result<Name, String> {
    Name::parse(s).map_err(|e| format!("bad name `{s}`: {e}"))
}

fn decode_decl(d: DeclRepr) -> Result<Declaration, String> {
    let name = parse_name(&d.name)?;
    let kind = DeclarationKind::parse(&d.kind).ok_or_else(|| format!("unknown declaration kind `{}`", d.kind))?;
    let ty = decode_term(&d.ty, 0)?;
    let value = d.value.as_ref().map(|v| decode_term(v, 0)).transpose()?;
    if kind.has_value() != value.is_some() {
        return Err(match value {
            Some(_) => format!("a {kind} cannot carry a value"),
            None => format!("a {kind} needs a value"),
        });
    }
    let mut attributes = Vec::with_capacity(d.attrs.len());
    for a in d.attrs {
        if attributes.iter().any(|b: &AttributeInstance| b.name == a.name) {
            return Err(format!("attribute `{}` given twice", a.name));
        }
        if a.priority == Some(0) {
            return Err(format!("attribute `{}` has priority 0; priorities are positive", a.name));
        }
        attributes.push(AttributeInstance { name: a.name, priority: a.priority, args: a.args });
    }
    Ok(Declaration { name, kind, ty, value, attributes, doc: d.doc, auto: d.auto, source: SourceLocation { file: d.file, line: d.line } })
}

fn decode_term(v: &Value, depth: u32) -> Result<Term, String> {
    let arr = v.as_array().ok_or_else(|| format!("expected a term array, found {v}"))?;
    let tag = arr.first().and_then(Value::as_str).ok_or("term array must start with a tag")?;
    let arity = |n: usize| {
        if arr.len() == n + 1 {
            Ok(())
        } else {
            Err(format!("`{tag}` takes {n} fields, found {}", arr.len() - 1))
        }
    };
    match tag {
        "var" => {
            arity(1)?;
            let i = arr[1].as_u64().ok_or("var index must be a natural")?;
            if i >= u64::from(depth) {
                return Err(format!("variable #{i} escapes its {depth} enclosing binders"));
            }
            Ok(Term::Var(i as u32))
        }
        "const" => {
            arity(1)?;
            let s = arr[1].as_str().ok_or("const name must be a string")?;
            Ok(Term::Const(parse_name(s)?))
        }
        "app" => {
            arity(2)?;
            Ok(Term::app(decode_term(&arr[1], depth)?, decode_term(&arr[2], depth)?))
        }
        "lam" | "pi" => {
            arity(4)?;
            let name = arr[1].as_str().ok_or("binder name must be a string")?;
            let code = arr[2].as_str().ok_or("binder info must be a string")?;
            let info = BinderInfo::from_code(code).ok_or_else(|| format!("unknown binder info `{code}`"))?;
            let dom = decode_term(&arr[3], depth)?;
            let body = decode_term(&arr[4], depth + 1)?;
            Ok(if tag == "lam" { Term::lam(name, info, dom, body) } else { Term::pi(name, info, dom, body) })
        }
        "sort" => {
            arity(1)?;
            Ok(Term::Sort(decode_level(&arr[1])?))
        }
        other => Err(format!("unknown term tag `{other}`")),
    }
}

fn decode_level(v: &Value) -> Result<Level, String> {
    if v.as_u64() == Some(0) {
        return Ok(Level::Zero);
    }
    match v.as_array().map(Vec::as_slice) {
        Some([tag, inner]) if tag == "succ" => Ok(decode_level(inner)?.succ()),
        Some([tag, Value::String(p)]) if tag == "param" => Ok(Level::Param(p.clone())),
        _ => Err(format!("malformed level {v}")),
    }
}

pub fn encode_term(t: &Term) -> Value {
    match t {
        Term::Var(i) => json!(["var", i]),
        Term::Const(n) => json!(["const", n.as_str()]),
        Term::App(f, a) => json!(["app", encode_term(f), encode_term(a)]),
        Term::Lam(n, bi, d, b) => json!(["lam", n, bi.code(), encode_term(d), encode_term(b)]),
        Term::Pi(n, bi, d, b) => json!(["pi", n, bi.code(), encode_term(d), encode_term(b)]),
        Term::Sort(l) => json!(["sort", encode_level(l)]),
    }
}

fn encode_level(l: &Level) -> Value {
    match l {
        Level::Zero => json!(0),
        Level::Succ(inner) => json!(["succ", encode_level(inner)]),
        Level::Param(p) => json!(["param", p]),
    }
}

/// Write the environment back out: declarations, then notations, module
/// docs, tactic docs and notes, each group in corpus order.
pub fn write_corpus<W: Write>(env: &Environment, mut out: W) -> io::Result<()> {
    let mut emit = |entry: EntryRepr| -> io::Result<()> {
        serde_json::to_writer(&mut out, &entry)?;
        out.write_all(b"\n")
    };
    for d in env.declarations() {
        emit(EntryRepr::Decl(DeclRepr {
            name: d.name.to_string(),
            kind: d.kind.as_str().to_owned(),
            ty: encode_term(&d.ty),
            value: d.value.as_ref().map(encode_term),
            attrs: d.attributes.iter().map(|a| AttrRepr { name: a.name.clone(), priority: a.priority, args: a.args.clone() }).collect(),
            doc: d.doc.clone(),
            auto: d.auto,
            file: d.source.file.clone(),
            line: d.source.line,
        }))?;
    }
    for n in env.notations() {
        emit(EntryRepr::Notation(NotationRepr {
            symbol: n.symbol.clone(),
            constant: n.constant.to_string(),
            fixity: n.fixity,
            precedence: n.precedence,
        }))?;
    }
    for m in env.module_docs() {
        emit(EntryRepr::ModuleDoc(ModuleDocRepr { file: m.file.clone(), text: m.text.clone() }))?;
    }
    for t in env.tactic_docs() {
        emit(EntryRepr::TacticDoc(TacticDocRepr {
            entry_name: t.entry_name.clone(),
            category: t.category,
            decl_names: t.decl_names.iter().map(Name::to_string).collect(),
            tags: t.tags.clone(),
            description: t.description.clone(),
            inherit_description_from: t.inherit_description_from.as_ref().map(Name::to_string),
        }))?;
    }
    for n in env.notes() {
        emit(EntryRepr::Note(NoteRepr {
            name: n.name.clone(),
            content: n.content.clone(),
            file: n.origin.file.clone(),
            line: n.origin.line,
        }))?;
    }
    Ok(())
}

pub fn serialize_corpus(env: &Environment) -> Vec<u8> {
    let mut out = Vec::new();
    write_corpus(env, &mut out).expect("writing to a Vec cannot fail");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        let env = parse_corpus_str("").unwrap();
        assert!(env.declarations().is_empty());
        assert!(serialize_corpus(&env).is_empty());
    }

    #[test]
    fn forward_references_resolve() {
        let src = r#"{"decl":{"name":"zero","kind":"constant","type":["const","nat"],"file":"a.lean","line":2}}
{"decl":{"name":"nat","kind":"inductive","type":["sort",["succ",0]],"file":"a.lean","line":1}}
"#;
        let env = parse_corpus_str(src).unwrap();
        assert_eq!(env.declarations()[0].name, Name::from("zero"));
        assert_eq!(env.declarations()[1].ty, Term::type0());
    }

    #[test]
    fn open_term_is_malformed() {
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["pi","x","e",["sort",0],["var",1]],"file":"a.lean","line":1}}"#;
        match parse_corpus_str(src) {
            Err(CorpusError::MalformedLine { line: 1, message }) => assert!(message.contains("escapes")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["sort",0],"file":"a.lean","line":1,"colour":"red"}}"#;
        assert!(matches!(parse_corpus_str(src), Err(CorpusError::MalformedLine { line: 1, .. })));
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["sort",0],"attrs":[{"name":"simp","prio":3}],"file":"a.lean","line":1}}"#;
        assert!(matches!(parse_corpus_str(src), Err(CorpusError::MalformedLine { line: 1, .. })));
    }

    #[test]
    fn duplicate_and_unresolved() {
        let a = r#"{"decl":{"name":"a","kind":"axiom","type":["sort",0],"file":"a.lean","line":1}}"#;
        let src = format!("{a}\n{a}\n");
        assert!(matches!(parse_corpus_str(&src), Err(CorpusError::DuplicateName(n)) if n == Name::from("a")));
        let src = format!("{a}\n{}\n", r#"{"decl":{"name":"b","kind":"axiom","type":["const","ghost"],"file":"a.lean","line":2}}"#);
        match parse_corpus_str(&src) {
            Err(CorpusError::UnresolvedConstant { name, line }) => {
                assert_eq!(name, Name::from("ghost"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn value_presence_follows_kind() {
        let src = r#"{"decl":{"name":"a","kind":"theorem","type":["sort",0],"file":"a.lean","line":1}}"#;
        assert!(matches!(parse_corpus_str(src), Err(CorpusError::MalformedLine { .. })));
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["sort",0],"value":["sort",0],"file":"a.lean","line":1}}"#;
        assert!(matches!(parse_corpus_str(src), Err(CorpusError::MalformedLine { .. })));
    }

    #[test]
    fn absent_doc_differs_from_empty_doc() {
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["sort",0],"doc":"","file":"a.lean","line":1}}
{"decl":{"name":"b","kind":"axiom","type":["sort",0],"file":"a.lean","line":2}}
"#;
        let env = parse_corpus_str(src).unwrap();
        assert_eq!(env.declarations()[0].doc.as_deref(), Some(""));
        assert_eq!(env.declarations()[1].doc, None);
        let again = parse_corpus(serialize_corpus(&env).as_slice()).unwrap();
        assert_eq!(again, env);
    }

    #[test]
    fn levels_and_binder_codes() {
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["pi","u","si",["sort",["param","u"]],["pi","v","ii",["sort",["succ",["succ",0]]],["sort",0]]],"file":"a.lean","line":1}}"#;
        let env = parse_corpus_str(src).unwrap();
        let (bs, _) = env.declarations()[0].ty.strip_binders();
        assert_eq!(bs[0].info, BinderInfo::StrictImplicit);
        assert_eq!(bs[1].ty, Term::sort(Level::of_nat(2)));
        let src = r#"{"decl":{"name":"a","kind":"axiom","type":["sort",1],"file":"a.lean","line":1}}"#;
        assert!(parse_corpus_str(src).is_err());
    }
}
