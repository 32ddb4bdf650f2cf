//! The term language: a small dependent type theory with de Bruijn indices.
//!
//! Binder names are carried for printing only. Everything that needs
//! "syntactic equality" uses the derived structural equality, which is
//! insensitive to alpha-renaming because bound variables are indices.

use std::collections::BTreeSet;
use std::fmt;

use crate::name::Name;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Zero,
    Succ(Box<Level>),
    Param(String),
}

impl Level {
    pub fn succ(self) -> Level {
        Level::Succ(Box::new(self))
    }

    pub fn of_nat(n: u32) -> Level {
        (0..n).fold(Level::Zero, |l, _| l.succ())
    }

    /// Peels `Succ` constructors: returns the base and how many were removed.
    pub fn peel(&self) -> (&Level, u32) {
        let mut l = self;
        let mut k = 0;
        while let Level::Succ(inner) = l {
            l = inner;
            k += 1;
        }
        (l, k)
    }

    /// The natural number denoted by a closed `Succ` chain over `Zero`.
    pub fn to_nat(&self) -> Option<u32> {
        match self.peel() {
            (Level::Zero, k) => Some(k),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Level::Zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinderInfo {
    Explicit,
    Implicit,
    StrictImplicit,
    InstanceImplicit,
}

impl BinderInfo {
    pub fn code(self) -> &'static str {
        match self {
            BinderInfo::Explicit => "e",
            BinderInfo::Implicit => "i",
            BinderInfo::StrictImplicit => "si",
            BinderInfo::InstanceImplicit => "ii",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Some(match code {
            "e" => BinderInfo::Explicit,
            "i" => BinderInfo::Implicit,
            "si" => BinderInfo::StrictImplicit,
            "ii" => BinderInfo::InstanceImplicit,
            _ => return None,
        })
    }

    pub fn is_explicit(self) -> bool {
        self == BinderInfo::Explicit
    }

    pub fn is_inst_implicit(self) -> bool {
        self == BinderInfo::InstanceImplicit
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(u32),
    Const(Name),
    App(Box<Term>, Box<Term>),
    Lam(String, BinderInfo, Box<Term>, Box<Term>),
    Pi(String, BinderInfo, Box<Term>, Box<Term>),
    Sort(Level),
}

/// One entry of a Pi telescope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binder {
    pub name: String,
    pub info: BinderInfo,
    /// Lives under all preceding binders of the telescope.
    pub ty: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head<'a> {
    Const(&'a Name),
    Var(u32),
    Other,
}

impl Term {
    pub fn var(i: u32) -> Term {
        Term::Var(i)
    }

    pub fn cnst(name: impl Into<Name>) -> Term {
        Term::Const(name.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(name: &str, info: BinderInfo, dom: Term, body: Term) -> Term {
        Term::Lam(name.to_owned(), info, Box::new(dom), Box::new(body))
    }

    pub fn pi(name: &str, info: BinderInfo, dom: Term, body: Term) -> Term {
        Term::Pi(name.to_owned(), info, Box::new(dom), Box::new(body))
    }

    /// Non-dependent function type; `body` is written outside the binder.
    pub fn arrow(dom: Term, body: Term) -> Term {
        Term::pi("a", BinderInfo::Explicit, dom, body.lift(1, 0))
    }

    pub fn sort(level: Level) -> Term {
        Term::Sort(level)
    }

    pub fn prop() -> Term {
        Term::Sort(Level::Zero)
    }

    pub fn type0() -> Term {
        Term::Sort(Level::Zero.succ())
    }

    /// Shift every variable with index `>= cutoff` up by `by`.
    pub fn lift(&self, by: u32, cutoff: u32) -> Term {
        if by == 0 || self.loose_bound() <= cutoff {
            return self.clone();
        }
        match self {
            Term::Var(i) if *i >= cutoff => Term::Var(i + by),
            Term::Var(_) | Term::Const(_) | Term::Sort(_) => self.clone(),
            Term::App(f, a) => Term::app(f.lift(by, cutoff), a.lift(by, cutoff)),
            Term::Lam(n, bi, d, b) => Term::lam(n, *bi, d.lift(by, cutoff), b.lift(by, cutoff + 1)),
            Term::Pi(n, bi, d, b) => Term::pi(n, *bi, d.lift(by, cutoff), b.lift(by, cutoff + 1)),
        }
    }

    /// Shift every variable with index `>= cutoff + by` down by `by`.
    /// Variables in `cutoff..cutoff + by` must not occur.
    pub fn lower(&self, by: u32, cutoff: u32) -> Term {
        if by == 0 || self.loose_bound() <= cutoff {
            return self.clone();
        }
        match self {
            Term::Var(i) if *i >= cutoff => {
                debug_assert!(*i >= cutoff + by, "lowering over an occurring variable");
                Term::Var(i - by)
            }
            Term::Var(_) | Term::Const(_) | Term::Sort(_) => self.clone(),
            Term::App(f, a) => Term::app(f.lower(by, cutoff), a.lower(by, cutoff)),
            Term::Lam(n, bi, d, b) => Term::lam(n, *bi, d.lower(by, cutoff), b.lower(by, cutoff + 1)),
            Term::Pi(n, bi, d, b) => Term::pi(n, *bi, d.lower(by, cutoff), b.lower(by, cutoff + 1)),
        }
    }

    /// Substitute `arg` for index 0 of a binder body, shifting the other
    /// indices down by one.
    pub fn instantiate(&self, arg: &Term) -> Term {
        self.instantiate_rev(std::slice::from_ref(arg))
    }

    /// Substitute for the innermost `args.len()` indices at once.
    ///
    /// `args` is ordered outermost first: index `i` (relative to the current
    /// depth) is replaced by `args[len - 1 - i]`, and indices past the block
    /// are shifted down by `len`. This is how a telescope body is closed over
    /// an assignment of its binders.
    pub fn instantiate_rev(&self, args: &[Term]) -> Term {
        self.inst_rev_at(args, 0)
    }

    fn inst_rev_at(&self, args: &[Term], depth: u32) -> Term {
        if self.loose_bound() <= depth {
            return self.clone();
        }
        let n = args.len() as u32;
        match self {
            Term::Var(i) => {
                if *i < depth {
                    Term::Var(*i)
                } else if *i < depth + n {
                    args[(n - 1 - (i - depth)) as usize].lift(depth, 0)
                } else {
                    Term::Var(i - n)
                }
            }
            Term::Const(_) | Term::Sort(_) => self.clone(),
            Term::App(f, a) => Term::app(f.inst_rev_at(args, depth), a.inst_rev_at(args, depth)),
            Term::Lam(nm, bi, d, b) => Term::lam(nm, *bi, d.inst_rev_at(args, depth), b.inst_rev_at(args, depth + 1)),
            Term::Pi(nm, bi, d, b) => Term::pi(nm, *bi, d.inst_rev_at(args, depth), b.inst_rev_at(args, depth + 1)),
        }
    }

    /// One more than the largest loose variable index, or 0 for a closed term.
    pub fn loose_bound(&self) -> u32 {
        match self {
            Term::Var(i) => i + 1,
            Term::Const(_) | Term::Sort(_) => 0,
            Term::App(f, a) => f.loose_bound().max(a.loose_bound()),
            Term::Lam(_, _, d, b) | Term::Pi(_, _, d, b) => d.loose_bound().max(b.loose_bound().saturating_sub(1)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.loose_bound() == 0
    }

    /// Whether `Var(index)` (counted from outside this term) occurs free.
    pub fn occurs(&self, index: u32) -> bool {
        match self {
            Term::Var(i) => *i == index,
            Term::Const(_) | Term::Sort(_) => false,
            Term::App(f, a) => f.occurs(index) || a.occurs(index),
            Term::Lam(_, _, d, b) | Term::Pi(_, _, d, b) => d.occurs(index) || b.occurs(index + 1),
        }
    }

    /// Whether any loose variable in `lo..hi` occurs.
    pub fn occurs_in_range(&self, lo: u32, hi: u32) -> bool {
        (lo..hi).any(|i| self.occurs(i))
    }

    /// Split off the leading Pi binders.
    pub fn strip_binders(&self) -> (Vec<Binder>, &Term) {
        let mut binders = Vec::new();
        let mut t = self;
        while let Term::Pi(name, info, dom, body) = t {
            binders.push(Binder { name: name.clone(), info: *info, ty: (**dom).clone() });
            t = body;
        }
        (binders, t)
    }

    /// Split off leading lambdas, at most `limit` of them.
    pub fn strip_lambdas(&self, limit: usize) -> (Vec<Binder>, &Term) {
        let mut binders = Vec::new();
        let mut t = self;
        while let Term::Lam(name, info, dom, body) = t {
            if binders.len() == limit {
                break;
            }
            binders.push(Binder { name: name.clone(), info: *info, ty: (**dom).clone() });
            t = body;
        }
        (binders, t)
    }

    /// Rebuild a Pi telescope; inverse of [`Term::strip_binders`].
    pub fn fold_pis(binders: &[Binder], body: Term) -> Term {
        binders.iter().rev().fold(body, |acc, b| Term::pi(&b.name, b.info, b.ty.clone(), acc))
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn head(&self) -> Head<'_> {
        match self.spine().0 {
            Term::Const(n) => Head::Const(n),
            Term::Var(i) => Head::Var(*i),
            _ => Head::Other,
        }
    }

    pub fn head_const(&self) -> Option<&Name> {
        match self.head() {
            Head::Const(n) => Some(n),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Sort(_) => 1,
            Term::App(f, a) => 1 + f.node_count() + a.node_count(),
            Term::Lam(_, _, d, b) | Term::Pi(_, _, d, b) => 1 + d.node_count() + b.node_count(),
        }
    }

    pub fn constants(&self) -> BTreeSet<&Name> {
        let mut out = BTreeSet::new();
        self.collect_consts(&mut out);
        out
    }

    fn collect_consts<'a>(&'a self, out: &mut BTreeSet<&'a Name>) {
        match self {
            Term::Const(n) => {
                out.insert(n);
            }
            Term::Var(_) | Term::Sort(_) => {}
            Term::App(f, a) => {
                f.collect_consts(out);
                a.collect_consts(out);
            }
            Term::Lam(_, _, d, b) | Term::Pi(_, _, d, b) => {
                d.collect_consts(out);
                b.collect_consts(out);
            }
        }
    }

    pub fn mentions_const(&self, name: &Name) -> bool {
        match self {
            Term::Const(n) => n == name,
            Term::Var(_) | Term::Sort(_) => false,
            Term::App(f, a) => f.mentions_const(name) || a.mentions_const(name),
            Term::Lam(_, _, d, b) | Term::Pi(_, _, d, b) => d.mentions_const(name) || b.mentions_const(name),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.peel() {
            (Level::Zero, k) => write!(f, "{k}"),
            (Level::Param(p), 0) => f.write_str(p),
            (Level::Param(p), k) => write!(f, "{p}+{k}"),
            (Level::Succ(_), _) => unreachable!("peel removes every Succ"),
        }
    }
}
