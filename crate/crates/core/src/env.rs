//! Declarations and the immutable environment they live in.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::name::Name;
use crate::term::{BinderInfo, Level, Term};

/// Priority assumed by instances and simp lemmas that carry none.
pub const DEFAULT_PRIORITY: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclarationKind {
    Definition,
    Theorem,
    Axiom,
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "inductive")]
    Inductive,
    #[serde(rename = "structure")]
    Structure,
}

impl DeclarationKind {
    pub const ALL: [DeclarationKind; 6] = [
        DeclarationKind::Definition,
        DeclarationKind::Theorem,
        DeclarationKind::Axiom,
        DeclarationKind::Constant,
        DeclarationKind::Inductive,
        DeclarationKind::Structure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DeclarationKind::Definition => "definition",
            DeclarationKind::Theorem => "theorem",
            DeclarationKind::Axiom => "axiom",
            DeclarationKind::Constant => "constant",
            DeclarationKind::Inductive => "inductive",
            DeclarationKind::Structure => "structure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        DeclarationKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn has_value(self) -> bool {
        matches!(self, DeclarationKind::Definition | DeclarationKind::Theorem)
    }
}

impl fmt::Display for DeclarationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AttributeInstance {
    pub name: String,
    pub priority: Option<u32>,
    pub args: Vec<String>,
}

impl AttributeInstance {
    pub fn new(name: &str) -> Self {
        AttributeInstance { name: name.to_owned(), priority: None, args: Vec::new() }
    }

    pub fn with_priority(mut self, priority: u32) -> Self {
        self.priority = Some(priority);
        self
    }

    pub fn with_args<I: IntoIterator<Item = S>, S: Into<String>>(mut self, args: I) -> Self {
        self.args = args.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Declaration {
    pub name: Name,
    pub kind: DeclarationKind,
    pub ty: Term,
    pub value: Option<Term>,
    pub attributes: Vec<AttributeInstance>,
    pub doc: Option<String>,
    pub auto: bool,
    pub source: SourceLocation,
}

impl Declaration {
    pub fn new(name: impl Into<Name>, kind: DeclarationKind, ty: Term) -> Self {
        Declaration {
            name: name.into(),
            kind,
            ty,
            value: None,
            attributes: Vec::new(),
            doc: None,
            auto: false,
            source: SourceLocation { file: String::new(), line: 0 },
        }
    }

    pub fn with_value(mut self, value: Term) -> Self {
        self.value = Some(value);
        self
    }

    pub fn with_attr(mut self, attr: AttributeInstance) -> Self {
        self.attributes.push(attr);
        self
    }

    pub fn with_doc(mut self, doc: &str) -> Self {
        self.doc = Some(doc.to_owned());
        self
    }

    pub fn at(mut self, file: &str, line: u32) -> Self {
        self.source = SourceLocation { file: file.to_owned(), line };
        self
    }

    pub fn attr(&self, name: &str) -> Option<&AttributeInstance> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attr(name).is_some()
    }

    pub fn is_instance(&self) -> bool {
        self.has_attr("instance")
    }

    pub fn is_class(&self) -> bool {
        self.has_attr("class")
    }

    pub fn is_simp(&self) -> bool {
        self.has_attr("simp")
    }

    /// Priority of the `simp` or `instance` tag: the tag's own priority,
    /// else a standalone `priority` attribute, else the default.
    pub fn priority_of(&self, tag: &str) -> u32 {
        if let Some(p) = self.attr(tag).and_then(|a| a.priority) {
            return p;
        }
        self.attr("priority").and_then(|a| a.priority.or_else(|| a.args.first().and_then(|s| s.parse().ok()))).unwrap_or(DEFAULT_PRIORITY)
    }

    /// Linter names listed in a `nolint` attribute.
    pub fn nolint(&self) -> impl Iterator<Item = &str> {
        self.attr("nolint").into_iter().flat_map(|a| a.args.iter().map(String::as_str))
    }

    /// Names listed by an inductive's `constructors` or a structure's
    /// `fields` attribute.
    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().filter(|a| a.name == "constructors" || a.name == "fields").flat_map(|a| a.args.iter().map(String::as_str))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixity {
    Infixl,
    Infixr,
    Prefix,
    Postfix,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Notation {
    pub symbol: String,
    pub constant: Name,
    pub fixity: Fixity,
    pub precedence: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocCategory {
    Tactic,
    Command,
    HoleCommand,
    Attribute,
}

impl DocCategory {
    pub const ALL: [DocCategory; 4] = [DocCategory::Tactic, DocCategory::Command, DocCategory::HoleCommand, DocCategory::Attribute];

    pub fn as_str(self) -> &'static str {
        match self {
            DocCategory::Tactic => "tactic",
            DocCategory::Command => "command",
            DocCategory::HoleCommand => "hole_command",
            DocCategory::Attribute => "attribute",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TacticDocEntry {
    pub entry_name: String,
    pub category: DocCategory,
    pub decl_names: Vec<Name>,
    pub tags: Vec<String>,
    pub description: String,
    pub inherit_description_from: Option<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LibraryNote {
    pub name: String,
    pub content: String,
    pub origin: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleDoc {
    pub file: String,
    pub text: String,
}

/// Everything an environment is built from, in corpus order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnvParts {
    pub declarations: Vec<Declaration>,
    pub notations: Vec<Notation>,
    pub module_docs: Vec<ModuleDoc>,
    pub tactic_docs: Vec<TacticDocEntry>,
    pub notes: Vec<LibraryNote>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("duplicate declaration name `{0}`")]
    DuplicateName(Name),
    #[error("duplicate library note `{0}`")]
    DuplicateNote(String),
    #[error("unresolved constant `{name}` (first used by {used_by})")]
    UnresolvedConstant { name: Name, used_by: String },
    #[error("declaration `{0}` has a term with an unbound variable")]
    OpenTerm(Name),
}

/// The ordered, immutable collection of declarations plus documentation
/// metadata.
#[derive(Clone, Debug)]
pub struct Environment {
    parts: EnvParts,
    by_name: HashMap<Name, usize>,
    notation_by_const: HashMap<Name, usize>,
}

impl PartialEq for Environment {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for Environment {}

impl Default for Environment {
    fn default() -> Self {
        Environment::new(EnvParts::default()).expect("the empty environment is valid")
    }
}

impl Environment {
    /// Link the parts: names must be unique, terms closed, and every
    /// referenced constant declared somewhere in the parts.
    pub fn new(parts: EnvParts) -> Result<Self, EnvError> {
        let mut by_name = HashMap::with_capacity(parts.declarations.len());
        for (i, d) in parts.declarations.iter().enumerate() {
            if by_name.insert(d.name.clone(), i).is_some() {
                return Err(EnvError::DuplicateName(d.name.clone()));
            }
        }
        let mut note_names = HashSet::new();
        for n in &parts.notes {
            if !note_names.insert(n.name.as_str()) {
                return Err(EnvError::DuplicateNote(n.name.clone()));
            }
        }
        for d in &parts.declarations {
            for t in std::iter::once(&d.ty).chain(d.value.as_ref()) {
                if !t.is_closed() {
                    return Err(EnvError::OpenTerm(d.name.clone()));
                }
                if let Some(missing) = t.constants().into_iter().find(|c| !by_name.contains_key(*c)) {
                    return Err(EnvError::UnresolvedConstant { name: missing.clone(), used_by: format!("declaration `{}`", d.name) });
                }
            }
        }
        let mut notation_by_const = HashMap::new();
        for (i, n) in parts.notations.iter().enumerate() {
            if !by_name.contains_key(&n.constant) {
                return Err(EnvError::UnresolvedConstant { name: n.constant.clone(), used_by: format!("notation `{}`", n.symbol) });
            }
            notation_by_const.insert(n.constant.clone(), i);
        }
        Ok(Environment { parts, by_name, notation_by_const })
    }

    pub fn declarations(&self) -> &[Declaration] {
        &self.parts.declarations
    }

    pub fn get(&self, name: &Name) -> Option<&Declaration> {
        self.by_name.get(name).map(|&i| &self.parts.declarations[i])
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.by_name.contains_key(name)
    }

    /// Position of a declaration in corpus order.
    pub fn index_of(&self, name: &Name) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn notations(&self) -> &[Notation] {
        &self.parts.notations
    }

    /// The notation in force for a constant; later entries win.
    pub fn notation_for(&self, name: &Name) -> Option<&Notation> {
        self.notation_by_const.get(name).map(|&i| &self.parts.notations[i])
    }

    pub fn module_docs(&self) -> &[ModuleDoc] {
        &self.parts.module_docs
    }

    pub fn tactic_docs(&self) -> &[TacticDocEntry] {
        &self.parts.tactic_docs
    }

    pub fn notes(&self) -> &[LibraryNote] {
        &self.parts.notes
    }

    pub fn parts(&self) -> &EnvParts {
        &self.parts
    }

    pub fn into_parts(self) -> EnvParts {
        self.parts
    }

    pub fn is_class(&self, name: &Name) -> bool {
        self.get(name).is_some_and(Declaration::is_class)
    }

    /// Binder infos of the leading Pi binders of a constant's type.
    pub fn arg_infos(&self, name: &Name) -> Vec<BinderInfo> {
        self.get(name).map(|d| d.ty.strip_binders().0.into_iter().map(|b| b.info).collect()).unwrap_or_default()
    }

    /// Source files mentioned by declarations or module docs.
    pub fn files(&self) -> HashSet<&str> {
        self.parts
            .declarations
            .iter()
            .map(|d| d.source.file.as_str())
            .chain(self.parts.module_docs.iter().map(|m| m.file.as_str()))
            .collect()
    }
}

/// Universe a type lives in, as far as declared codomains tell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SortClass {
    Prop,
    TypeSort,
    Unknown,
}

const RESULT_SORT_DEPTH: u32 = 100;

/// Classify the sort that `ty` inhabits.
///
/// Pi binders are stripped (a Pi lives where its body lives). A conclusion
/// that is itself a `Sort` is a universe and so lives in a `Type`. A
/// conclusion headed by a constant lives in the codomain of that constant's
/// declared type; codomains that are constants with a value are unfolded,
/// at most 100 times. Variable heads and anything else yield `Unknown`.
pub fn result_sort(env: &Environment, ty: &Term) -> SortClass {
    let (_, concl) = ty.strip_binders();
    match concl {
        Term::Sort(_) => SortClass::TypeSort,
        _ => match concl.head_const().and_then(|c| env.get(c)) {
            Some(d) => classify_universe(env, d.ty.strip_binders().1, 0),
            None => SortClass::Unknown,
        },
    }
}

fn classify_universe(env: &Environment, codomain: &Term, depth: u32) -> SortClass {
    match codomain {
        Term::Sort(Level::Zero) => SortClass::Prop,
        Term::Sort(Level::Succ(_)) => SortClass::TypeSort,
        Term::Sort(Level::Param(_)) => SortClass::Unknown,
        _ if depth >= RESULT_SORT_DEPTH => SortClass::Unknown,
        _ => {
            let alias = codomain.head_const().and_then(|c| env.get(c));
            match alias.and_then(|d| d.value.as_ref()) {
                Some(v) => classify_universe(env, v.strip_lambdas(usize::MAX).1, depth + 1),
                None => SortClass::Unknown,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::BinderInfo::*;

    fn c(n: &str) -> Term {
        Term::cnst(n)
    }

    fn tiny_env() -> Environment {
        let sort_u = Term::sort(Level::Param("u".into()));
        // Π {α : Sort u} (a b : α), Prop
        let eq_ty =
            Term::pi("α", Implicit, sort_u, Term::pi("a", Explicit, Term::Var(0), Term::pi("b", Explicit, Term::Var(1), Term::prop())));
        let decls = vec![
            Declaration::new("nat", DeclarationKind::Inductive, Term::type0()),
            Declaration::new("nat.zero", DeclarationKind::Constant, c("nat")),
            Declaration::new("eq", DeclarationKind::Inductive, eq_ty),
            Declaration::new("list", DeclarationKind::Inductive, Term::arrow(Term::type0(), Term::type0())),
            Declaration::new("my_sort", DeclarationKind::Definition, Term::type0()).with_value(Term::prop()),
            Declaration::new("my_prop", DeclarationKind::Constant, c("my_sort")),
            Declaration::new("loop_a", DeclarationKind::Definition, Term::type0()).with_value(c("loop_b")),
            Declaration::new("loop_b", DeclarationKind::Definition, Term::type0()).with_value(c("loop_a")),
            Declaration::new("loopy", DeclarationKind::Constant, c("loop_a")),
            Declaration::new("is_even", DeclarationKind::Definition, Term::arrow(c("nat"), Term::prop())).with_value(Term::lam(
                "n",
                Explicit,
                c("nat"),
                Term::app(Term::app(Term::app(c("eq"), c("nat")), Term::Var(0)), Term::Var(0)),
            )),
        ];
        Environment::new(EnvParts { declarations: decls, ..Default::default() }).unwrap()
    }

    #[test]
    fn result_sort_examples() {
        let env = tiny_env();
        let eq_stmt = Term::apps(c("eq"), [c("nat"), c("nat.zero"), c("nat.zero")]);
        assert_eq!(result_sort(&env, &eq_stmt), SortClass::Prop);
        assert_eq!(result_sort(&env, &Term::app(c("list"), c("nat"))), SortClass::TypeSort);
        assert_eq!(result_sort(&env, &Term::arrow(c("nat"), c("nat"))), SortClass::TypeSort);
        // a universe lives in a Type, so predicates are not propositions
        assert_eq!(result_sort(&env, &Term::prop()), SortClass::TypeSort);
        assert_eq!(result_sort(&env, &Term::arrow(c("nat"), Term::prop())), SortClass::TypeSort);
        assert_eq!(result_sort(&env, &Term::app(c("is_even"), c("nat.zero"))), SortClass::Prop);
        // codomain alias unfolded through its value
        assert_eq!(result_sort(&env, &c("my_prop")), SortClass::Prop);
        assert_eq!(result_sort(&env, &c("loopy")), SortClass::Unknown);
        assert_eq!(result_sort(&env, &Term::Var(0)), SortClass::Unknown);
    }

    #[test]
    fn rejects_duplicates_and_dangling_constants() {
        let d = Declaration::new("a", DeclarationKind::Axiom, Term::prop());
        let parts = EnvParts { declarations: vec![d.clone(), d], ..Default::default() };
        assert_eq!(Environment::new(parts), Err(EnvError::DuplicateName(Name::from("a"))));
        let parts = EnvParts { declarations: vec![Declaration::new("a", DeclarationKind::Axiom, c("missing"))], ..Default::default() };
        assert!(matches!(Environment::new(parts), Err(EnvError::UnresolvedConstant { .. })));
        let parts = EnvParts { declarations: vec![Declaration::new("a", DeclarationKind::Axiom, Term::Var(0))], ..Default::default() };
        assert_eq!(Environment::new(parts), Err(EnvError::OpenTerm(Name::from("a"))));
    }

    #[test]
    fn priorities() {
        let d = Declaration::new("i", DeclarationKind::Constant, Term::prop());
        assert_eq!(d.priority_of("instance"), DEFAULT_PRIORITY);
        let d2 = d.clone().with_attr(AttributeInstance::new("instance").with_priority(100));
        assert_eq!(d2.priority_of("instance"), 100);
        let d3 = d.with_attr(AttributeInstance::new("instance")).with_attr(AttributeInstance::new("priority").with_args(["90"]));
        assert_eq!(d3.priority_of("instance"), 90);
    }
}
