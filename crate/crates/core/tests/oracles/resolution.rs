//! Random instance databases checked against a brute-force derivation search.

use prooflint_core::env::{AttributeInstance, EnvParts};
use prooflint_core::typeclass::{resolve_term, InstanceDb};
use prooflint_core::{BinderInfo, Declaration, DeclarationKind, Environment, Term};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const ATOMS: usize = 3;
pub const DEPTH_LIMIT: u32 = 5;

/// Argument patterns: a ground atom, the instance's single variable, or `w p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pat {
    Atom(usize),
    X,
    W(Box<Pat>),
}

/// Ground arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Atom(usize),
    W(Box<Arg>),
}

#[derive(Clone, Debug)]
pub struct Inst {
    pub class: usize,
    pub arg: Pat,
    pub hyps: Vec<(usize, Pat)>,
    pub priority: u32,
}

impl Pat {
    pub fn has_x(&self) -> bool {
        match self {
            Pat::Atom(_) => false,
            Pat::X => true,
            Pat::W(p) => p.has_x(),
        }
    }

    pub fn to_term(&self, x: u32) -> Term {
        match self {
            Pat::Atom(k) => Term::cnst(format!("a{k}").as_str()),
            Pat::X => Term::Var(x),
            Pat::W(p) => Term::app(Term::cnst("w"), p.to_term(x)),
        }
    }

    pub fn matches(&self, g: &Arg, x: &mut Option<Arg>) -> bool {
        match (self, g) {
            (Pat::Atom(a), Arg::Atom(b)) => a == b,
            (Pat::W(p), Arg::W(h)) => p.matches(h, x),
            (Pat::X, _) => match x {
                Some(bound) => bound == g,
                None => {
                    *x = Some(g.clone());
                    true
                }
            },
            _ => false,
        }
    }

    pub fn subst(&self, x: &Arg) -> Arg {
        match self {
            Pat::Atom(k) => Arg::Atom(*k),
            Pat::X => x.clone(),
            Pat::W(p) => Arg::W(Box::new(p.subst(x))),
        }
    }
}

impl Arg {
    pub fn to_term(&self) -> Term {
        match self {
            Arg::Atom(k) => Term::cnst(format!("a{k}").as_str()),
            Arg::W(a) => Term::app(Term::cnst("w"), a.to_term()),
        }
    }
}

pub fn class_name(i: usize) -> String {
    format!("C{i}")
}

pub fn build_env(classes: usize, insts: &[Inst]) -> Environment {
    let mut decls = Vec::new();
    for k in 0..ATOMS {
        decls.push(Declaration::new(format!("a{k}").as_str(), DeclarationKind::Constant, Term::type0()));
    }
    decls.push(Declaration::new("w", DeclarationKind::Constant, Term::arrow(Term::type0(), Term::type0())));
    for c in 0..classes {
        decls.push(
            Declaration::new(class_name(c).as_str(), DeclarationKind::Structure, Term::arrow(Term::type0(), Term::type0()))
                .with_attr(AttributeInstance::new("class")),
        );
    }
    for (i, inst) in insts.iter().enumerate() {
        let with_x = inst.arg.has_x();
        let n = inst.hyps.len() as u32;
        let mut ty = Term::app(Term::cnst(class_name(inst.class).as_str()), inst.arg.to_term(n));
        for (j, (c, p)) in inst.hyps.iter().enumerate().rev() {
            let hyp = Term::app(Term::cnst(class_name(*c).as_str()), p.to_term(j as u32));
            ty = Term::pi(&format!("h{j}"), BinderInfo::InstanceImplicit, hyp, ty);
        }
        if with_x {
            ty = Term::pi("x", BinderInfo::Implicit, Term::type0(), ty);
        }
        decls.push(
            Declaration::new(format!("i{i}").as_str(), DeclarationKind::Constant, ty)
                .with_attr(AttributeInstance::new("instance").with_priority(inst.priority)),
        );
    }
    Environment::new(EnvParts { declarations: decls, ..Default::default() }).unwrap()
}

/// Is `class arg` derivable with every node at depth ≤ `DEPTH_LIMIT`?
pub fn derivable(insts: &[Inst], class: usize, arg: &Arg, depth: u32) -> bool {
    if depth > DEPTH_LIMIT {
        return false;
    }
    insts.iter().filter(|i| i.class == class).any(|inst| {
        let mut x = None;
        if !inst.arg.matches(arg, &mut x) {
            return false;
        }
        // Every hypothesis mentioning x has x bound, since x occurs in the conclusion.
        let x = x.unwrap_or(Arg::Atom(0));
        inst.hyps.iter().all(|(c, p)| derivable(insts, *c, &p.subst(&x), depth + 1))
    })
}

pub fn pat(with_x: bool) -> impl Strategy<Value = Pat> {
    let leaf = if with_x {
        prop_oneof![(0..ATOMS).prop_map(Pat::Atom), Just(Pat::X), Just(Pat::X)].boxed()
    } else {
        (0..ATOMS).prop_map(Pat::Atom).boxed()
    };
    prop_oneof![leaf.clone(), leaf.prop_map(|p| Pat::W(Box::new(p)))]
}

pub fn inst(classes: usize) -> impl Strategy<Value = Inst> {
    (any::<bool>(), 0..classes, prop::sample::select(vec![100u32, 1000, 1000, 2000])).prop_flat_map(move |(with_x, class, priority)| {
        let arg = pat(with_x).prop_filter("variable must occur in the conclusion", move |p| p.has_x() == with_x);
        let hyps = prop::collection::vec((0..classes, pat(with_x)), 0..=2);
        (arg, hyps).prop_map(move |(arg, hyps)| Inst { class, arg, hyps, priority })
    })
}

pub fn ground_arg() -> impl Strategy<Value = Arg> {
    (0..ATOMS).prop_map(Arg::Atom).prop_recursive(2, 3, 1, |inner| inner.prop_map(|a| Arg::W(Box::new(a))))
}

pub fn system() -> impl Strategy<Value = (usize, Vec<Inst>, usize, Arg)> {
    (1usize..=4).prop_flat_map(|classes| (Just(classes), prop::collection::vec(inst(classes), 0..=10), 0..classes, ground_arg()))
}

/// Resolve's verdict matches the derivation search, and attempts at each
/// node go by priority, then most recent first.
pub fn check_resolution(classes: usize, insts: &[Inst], goal_class: usize, goal_arg: &Arg) -> Result<(), TestCaseError> {
    let env = build_env(classes, insts);
    let db = InstanceDb::build(&env).unwrap();
    let goal = Term::app(Term::cnst(class_name(goal_class).as_str()), goal_arg.to_term());
    let trace = resolve_term(&env, &db, &goal, DEPTH_LIMIT);
    prop_assert_eq!(trace.is_solved(), derivable(insts, goal_class, goal_arg, 0));

    let key = |name: &str| {
        let i: usize = name[1..].parse().unwrap();
        (insts[i].priority, i)
    };
    for pair in trace.tried.windows(2) {
        if pair[0].node == pair[1].node {
            prop_assert!(key(pair[0].instance.as_str()) > key(pair[1].instance.as_str()), "{:?}", pair);
        }
    }
    Ok(())
}
