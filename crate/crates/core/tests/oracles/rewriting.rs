//! Random terminating rewrite systems checked against exhaustive rewriting,
//! and ordered rewriting with a commutativity lemma.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use prooflint_core::env::{AttributeInstance, EnvParts};
use prooflint_core::simp::{replay, simp, term_order, SimpSet, DEFAULT_FUEL};
use prooflint_core::{BinderInfo, Declaration, DeclarationKind, Environment, Term};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn c(n: &str) -> Term {
    Term::cnst(n)
}

pub fn nat_to(n: usize) -> Term {
    (0..n).fold(c("nat"), |t, _| Term::arrow(c("nat"), t))
}

pub fn eq_nat(l: Term, r: Term) -> Term {
    Term::apps(c("eq"), [c("nat"), l, r])
}

/// `nat`, `eq`, then `extra` constants and the given simp axioms.
pub fn env_with(extra: &[(&str, Term)], lemmas: Vec<(String, Term)>) -> Environment {
    let eq_ty = Term::pi("α", BinderInfo::Implicit, Term::type0(), Term::arrow(Term::Var(0), Term::arrow(Term::Var(0), Term::prop())));
    let mut decls =
        vec![Declaration::new("nat", DeclarationKind::Inductive, Term::type0()), Declaration::new("eq", DeclarationKind::Inductive, eq_ty)];
    for (n, ty) in extra {
        decls.push(Declaration::new(*n, DeclarationKind::Constant, ty.clone()));
    }
    for (n, ty) in lemmas {
        decls.push(Declaration::new(n.as_str(), DeclarationKind::Axiom, ty).with_attr(AttributeInstance::new("simp")));
    }
    Environment::new(EnvParts { declarations: decls, ..Default::default() }).unwrap()
}

// ---- rewriting oracle over the signature a : nat, f : nat → nat, g : nat → nat → nat ----

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum T {
    A,
    F(Box<T>),
    G(Box<T>, Box<T>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum P {
    V(usize),
    A,
    F(Box<P>),
    G(Box<P>, Box<P>),
}

impl T {
    fn to_term(&self) -> Term {
        match self {
            T::A => c("a"),
            T::F(x) => Term::app(c("f"), x.to_term()),
            T::G(x, y) => Term::apps(c("g"), [x.to_term(), y.to_term()]),
        }
    }

    /// Every term reachable in one rewrite step, at any position.
    pub fn successors(&self, rules: &[(P, P)], out: &mut Vec<T>) {
        for (l, r) in rules {
            let mut sub = [None, None];
            if l.matches(self, &mut sub) {
                out.push(r.build(&sub));
            }
        }
        match self {
            T::A => {}
            T::F(x) => {
                let mut inner = Vec::new();
                x.successors(rules, &mut inner);
                out.extend(inner.into_iter().map(|x| T::F(Box::new(x))));
            }
            T::G(x, y) => {
                let mut inner = Vec::new();
                x.successors(rules, &mut inner);
                out.extend(inner.into_iter().map(|x2| T::G(Box::new(x2), y.clone())));
                let mut inner = Vec::new();
                y.successors(rules, &mut inner);
                out.extend(inner.into_iter().map(|y2| T::G(x.clone(), Box::new(y2))));
            }
        }
    }
}

impl P {
    pub fn size(&self) -> usize {
        match self {
            P::V(_) | P::A => 1,
            P::F(x) => 1 + x.size(),
            P::G(x, y) => 1 + x.size() + y.size(),
        }
    }

    pub fn var_counts(&self, counts: &mut [usize; 2]) {
        match self {
            P::V(i) => counts[*i] += 1,
            P::A => {}
            P::F(x) => x.var_counts(counts),
            P::G(x, y) => {
                x.var_counts(counts);
                y.var_counts(counts);
            }
        }
    }

    pub fn matches(&self, t: &T, sub: &mut [Option<T>; 2]) -> bool {
        match (self, t) {
            (P::V(i), _) => match &sub[*i] {
                Some(bound) => bound == t,
                None => {
                    sub[*i] = Some(t.clone());
                    true
                }
            },
            (P::A, T::A) => true,
            (P::F(p), T::F(x)) => p.matches(x, sub),
            (P::G(p, q), T::G(x, y)) => p.matches(x, sub) && q.matches(y, sub),
            _ => false,
        }
    }

    pub fn build(&self, sub: &[Option<T>; 2]) -> T {
        match self {
            P::V(i) => sub[*i].clone().expect("rhs variables occur in the lhs"),
            P::A => T::A,
            P::F(x) => T::F(Box::new(x.build(sub))),
            P::G(x, y) => T::G(Box::new(x.build(sub)), Box::new(y.build(sub))),
        }
    }

    /// The term with variable `i` as de Bruijn index `depth_of(i)`.
    fn to_term(&self, var: &dyn Fn(usize) -> Term) -> Term {
        match self {
            P::V(i) => var(*i),
            P::A => c("a"),
            P::F(x) => Term::app(c("f"), x.to_term(var)),
            P::G(x, y) => Term::apps(c("g"), [x.to_term(var), y.to_term(var)]),
        }
    }
}

/// Normal forms reachable from `t` under every rewriting strategy.
pub fn normal_forms(t: &T, rules: &[(P, P)]) -> BTreeSet<T> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![t.clone()];
    let mut normal = BTreeSet::new();
    while let Some(t) = stack.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        let mut next = Vec::new();
        t.successors(rules, &mut next);
        if next.is_empty() {
            normal.insert(t);
        }
        stack.extend(next);
    }
    normal
}

pub fn rule_statement(l: &P, r: &P) -> Term {
    let mut counts = [0; 2];
    l.var_counts(&mut counts);
    let bound: Vec<usize> = (0..2).filter(|i| counts[*i] > 0).collect();
    let n = bound.len();
    let var = |i: usize| Term::Var((n - 1 - bound.iter().position(|b| *b == i).unwrap()) as u32);
    let body = eq_nat(l.to_term(&var), r.to_term(&var));
    bound.iter().rev().fold(body, |t, i| Term::pi(["x", "y"][*i], BinderInfo::Explicit, c("nat"), t))
}

pub fn pattern(depth: u32) -> BoxedStrategy<P> {
    let leaf = prop_oneof![Just(P::A), (0usize..2).prop_map(P::V)];
    leaf.prop_recursive(depth, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| P::F(Box::new(x))),
            (inner.clone(), inner).prop_map(|(x, y)| P::G(Box::new(x), Box::new(y))),
        ]
    })
    .boxed()
}

pub fn rule() -> impl Strategy<Value = (P, P)> {
    (pattern(2), pattern(2)).prop_filter("lhs must be headed by f or g", |(l, _)| matches!(l, P::F(_) | P::G(..))).prop_filter(
        "rhs must be strictly smaller under every substitution",
        |(l, r)| {
            let (mut cl, mut cr) = ([0; 2], [0; 2]);
            l.var_counts(&mut cl);
            r.var_counts(&mut cr);
            r.size() < l.size() && cr.iter().zip(cl).all(|(r, l)| *r <= l)
        },
    )
}

pub fn ground(depth: u32) -> BoxedStrategy<T> {
    Just(T::A)
        .prop_recursive(depth, 15, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|x| T::F(Box::new(x))),
                (inner.clone(), inner).prop_map(|(x, y)| T::G(Box::new(x), Box::new(y))),
            ]
        })
        .boxed()
}

pub fn signature() -> Vec<(&'static str, Term)> {
    vec![("a", c("nat")), ("f", nat_to(1)), ("g", nat_to(2))]
}

/// Simp on `t` terminates, replays, is idempotent, and lands on a normal
/// form of the system (the normal form, when it is unique).
pub fn check_rewriting(rules: &[(P, P)], t: &T) -> Result<(), TestCaseError> {
    let lemmas = rules.iter().enumerate().map(|(i, (l, r))| (format!("r{i}"), rule_statement(l, r))).collect();
    let env = env_with(&signature(), lemmas);
    let set = SimpSet::build(&env).unwrap();
    let result = simp(&env, &set, &t.to_term(), DEFAULT_FUEL);
    prop_assert!(!result.fuel_exhausted);
    prop_assert_eq!(replay(&result).unwrap(), result.output.clone());
    prop_assert!(simp(&env, &set, &result.output, DEFAULT_FUEL).steps.is_empty(), "simp is idempotent");

    let normal = normal_forms(t, rules);
    if normal.len() == 1 {
        prop_assert_eq!(&result.output, &normal.first().unwrap().to_term());
    } else {
        prop_assert!(normal.iter().any(|nf| nf.to_term() == result.output));
    }
    Ok(())
}

pub fn comm_env() -> Environment {
    let comm = Term::pi(
        "a",
        BinderInfo::Explicit,
        c("nat"),
        Term::pi(
            "b",
            BinderInfo::Explicit,
            c("nat"),
            eq_nat(Term::apps(c("nat.add"), [Term::Var(1), Term::Var(0)]), Term::apps(c("nat.add"), [Term::Var(0), Term::Var(1)])),
        ),
    );
    let mut extra = vec![("nat.add", nat_to(2)), ("f", nat_to(1)), ("nat.zero", c("nat"))];
    extra.extend(["k0", "k1", "k2", "k3"].map(|k| (k, c("nat"))));
    env_with(&extra, vec![("add_comm".into(), comm)])
}

pub fn sum() -> impl Strategy<Value = Term> {
    prop::sample::select(vec!["k0", "k1", "k2", "k3", "nat.zero"])
        .prop_map(c)
        .prop_recursive(4, 12, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| Term::apps(c("nat.add"), [a, b])))
}

/// With `add_comm` alone: termination, strictly decreasing steps, and equal
/// normal forms for `f (m + n)` and `f (n + m)`.
pub fn check_commutativity(t: &Term, m: &Term, n: &Term) -> Result<(), TestCaseError> {
    let env = comm_env();
    let set = SimpSet::build(&env).unwrap();
    prop_assert!(set.lemmas()[0].permutative);
    let result = simp(&env, &set, t, DEFAULT_FUEL);
    prop_assert!(!result.fuel_exhausted);
    for step in &result.steps {
        prop_assert_eq!(term_order(&step.after, &step.before), Ordering::Less);
    }
    prop_assert_eq!(replay(&result).unwrap(), result.output.clone());

    let side = |x: &Term, y: &Term| Term::app(c("f"), Term::apps(c("nat.add"), [x.clone(), y.clone()]));
    let left = simp(&env, &set, &side(m, n), DEFAULT_FUEL);
    let right = simp(&env, &set, &side(n, m), DEFAULT_FUEL);
    prop_assert!(!left.fuel_exhausted && !right.fuel_exhausted);
    prop_assert_eq!(left.output, right.output);
    Ok(())
}
