//! Conditional term rewriting with simp lemmas.
//!
//! Simplification works from the inside out: the arguments of an
//! application are simplified before its head, then lemmas are tried at the
//! root. Within a head bucket the last-declared lemma wins unless a priority
//! says otherwise. Permutative lemmas (like commutativity) only fire when the
//! result is smaller in [`term_order`]. Every rewrite is recorded so the
//! result can be replayed and audited.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::env::{result_sort, Environment, SortClass};
use crate::name::Name;
use crate::term::{Binder, Term};
use crate::typeclass::{resolve_term, InstanceDb, DEFAULT_DEPTH_LIMIT};
use crate::Declaration;

pub const DEFAULT_FUEL: u64 = 10_000;
pub const DEFAULT_DISCHARGE_DEPTH: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimpError {
    #[error("`{0}` is not an equation, iff or proposition and cannot be a simp lemma")]
    NotAnEquation(Name),
    #[error("trace step {0} does not apply to the term it should rewrite")]
    BrokenTrace(usize),
}

/// How a lemma binder gets its value when the lemma is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotKind {
    /// Bound by matching the left-hand side.
    Pattern,
    /// A propositional hypothesis, discharged by simplifying it to `true`.
    Condition,
    /// An instance-implicit argument, found by matching or instance search.
    Instance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpLemma {
    pub decl: Name,
    /// The whole telescope. `lhs`, `rhs` live under all of it.
    pub binders: Vec<Binder>,
    pub slots: Vec<SlotKind>,
    pub lhs: Term,
    pub rhs: Term,
    pub permutative: bool,
    pub priority: u32,
    pub order_index: usize,
}

impl SimpLemma {
    pub fn pattern_vars(&self) -> impl Iterator<Item = &Binder> {
        self.binders.iter().zip(&self.slots).filter(|(_, k)| **k == SlotKind::Pattern).map(|(b, _)| b)
    }

    /// Hypotheses to discharge, each living under the binders before it.
    pub fn conditions(&self) -> impl Iterator<Item = &Term> {
        self.binders.iter().zip(&self.slots).filter(|(_, k)| **k == SlotKind::Condition).map(|(b, _)| &b.ty)
    }

    /// The binder a loose variable of `lhs`/`rhs` refers to.
    pub fn slot_of_var(&self, index: u32) -> Option<usize> {
        let n = self.binders.len();
        ((index as usize) < n).then(|| n - 1 - index as usize)
    }

    /// The slot heading the left-hand side, if it is a variable.
    pub fn var_head(&self) -> Option<usize> {
        match self.lhs.spine().0 {
            Term::Var(i) => self.slot_of_var(*i),
            _ => None,
        }
    }

    pub fn head(&self) -> Option<&Name> {
        self.lhs.head_const()
    }
}

pub fn compile_simp_lemma(env: &Environment, index: usize, d: &Declaration) -> Result<SimpLemma, SimpError> {
    let (binders, concl) = d.ty.strip_binders();
    let (head, args) = concl.spine();
    let (lhs, rhs) = match (head.head_const().map(Name::as_str), args.as_slice()) {
        (Some("eq"), [_, l, r]) => ((*l).clone(), (*r).clone()),
        (Some("iff"), [l, r]) => ((*l).clone(), (*r).clone()),
        _ if result_sort(env, concl) == SortClass::Prop => (concl.clone(), Term::cnst("true")),
        _ => return Err(SimpError::NotAnEquation(d.name.clone())),
    };
    let slots = binders
        .iter()
        .map(|b| {
            if b.info.is_inst_implicit() {
                SlotKind::Instance
            } else if result_sort(env, &b.ty) == SortClass::Prop {
                SlotKind::Condition
            } else {
                SlotKind::Pattern
            }
        })
        .collect();
    let permutative = is_permutation(&lhs, &rhs, binders.len() as u32);
    Ok(SimpLemma { decl: d.name.clone(), binders, slots, lhs, rhs, permutative, priority: d.priority_of("simp"), order_index: index })
}

/// True when `rhs` is `lhs` with its telescope variables (indices `>= depth`
/// at the top, `n` of them) renamed by a non-identity bijection.
fn is_permutation(lhs: &Term, rhs: &Term, n: u32) -> bool {
    fn go(a: &Term, b: &Term, depth: u32, n: u32, map: &mut HashMap<u32, u32>) -> bool {
        match (a, b) {
            (Term::Var(i), Term::Var(j)) if *i >= depth && *j >= depth && *i - depth < n && *j - depth < n => {
                let (i, j) = (*i - depth, *j - depth);
                match map.get(&i) {
                    Some(&k) => k == j,
                    None if map.values().any(|&v| v == j) => false,
                    None => {
                        map.insert(i, j);
                        true
                    }
                }
            }
            (Term::App(f1, a1), Term::App(f2, a2)) => go(f1, f2, depth, n, map) && go(a1, a2, depth, n, map),
            (Term::Lam(_, i1, d1, b1), Term::Lam(_, i2, d2, b2)) | (Term::Pi(_, i1, d1, b1), Term::Pi(_, i2, d2, b2)) => {
                i1 == i2 && go(d1, d2, depth, n, map) && go(b1, b2, depth + 1, n, map)
            }
            _ => a == b,
        }
    }
    let mut map = HashMap::new();
    go(lhs, rhs, 0, n, &mut map) && map.iter().any(|(i, j)| i != j)
}

/// Simp lemmas bucketed by the head constant of their left-hand side.
#[derive(Clone, Debug, Default)]
pub struct SimpSet {
    lemmas: Vec<SimpLemma>,
    by_head: HashMap<Name, Vec<usize>>,
}

impl SimpSet {
    pub fn build(env: &Environment) -> Result<Self, SimpError> {
        let (set, mut errors) = Self::build_partial(env);
        match errors.is_empty() {
            true => Ok(set),
            false => Err(errors.swap_remove(0)),
        }
    }

    /// Compile every simp lemma that can be compiled, collecting the rest.
    pub fn build_partial(env: &Environment) -> (Self, Vec<SimpError>) {
        let mut lemmas = Vec::new();
        let mut errors = Vec::new();
        for (i, d) in env.declarations().iter().enumerate() {
            if d.is_simp() {
                match compile_simp_lemma(env, i, d) {
                    Ok(l) => lemmas.push(l),
                    Err(e) => errors.push(e),
                }
            }
        }
        (Self::from_lemmas(lemmas), errors)
    }

    pub fn from_lemmas(lemmas: Vec<SimpLemma>) -> Self {
        let mut by_head: HashMap<Name, Vec<usize>> = HashMap::new();
        for (i, l) in lemmas.iter().enumerate() {
            if let Some(h) = l.head() {
                by_head.entry(h.clone()).or_default().push(i);
            }
        }
        for bucket in by_head.values_mut() {
            bucket.sort_by(|&a, &b| {
                let (a, b) = (&lemmas[a], &lemmas[b]);
                b.priority.cmp(&a.priority).then(b.order_index.cmp(&a.order_index))
            });
        }
        SimpSet { lemmas, by_head }
    }

    /// The same set with one lemma removed.
    pub fn without(&self, decl: &Name) -> Self {
        Self::from_lemmas(self.lemmas.iter().filter(|l| &l.decl != decl).cloned().collect())
    }

    /// All lemmas, in declaration order.
    pub fn lemmas(&self) -> &[SimpLemma] {
        &self.lemmas
    }

    pub fn lemma(&self, decl: &Name) -> Option<&SimpLemma> {
        self.lemmas.iter().find(|l| &l.decl == decl)
    }

    /// Lemmas whose left-hand side is headed by `head`, in the order they are tried.
    pub fn bucket(&self, head: &Name) -> impl Iterator<Item = &SimpLemma> {
        self.by_head.get(head).into_iter().flatten().map(|&i| &self.lemmas[i])
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

/// Match the left-hand side of `lemma` against `term`. Returns one entry
/// per telescope binder; only slots occurring in the pattern get a value.
pub fn match_pattern(lemma: &SimpLemma, term: &Term) -> Option<Vec<Option<Term>>> {
    if lemma.var_head().is_some() || matches!(lemma.lhs, Term::Var(_)) {
        return None;
    }
    let n = lemma.binders.len() as u32;
    let mut subst = vec![None; n as usize];
    matches(&lemma.lhs, term, 0, n, &mut subst).then_some(subst)
}

fn matches(pat: &Term, t: &Term, depth: u32, n: u32, subst: &mut [Option<Term>]) -> bool {
    match (pat, t) {
        (Term::Var(i), _) if *i >= depth => {
            let slot = (n - 1 - (*i - depth)) as usize;
            if t.occurs_in_range(0, depth) {
                return false;
            }
            let value = t.lower(depth, 0);
            match &subst[slot] {
                Some(v) => *v == value,
                None => {
                    subst[slot] = Some(value);
                    true
                }
            }
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => matches(f1, f2, depth, n, subst) && matches(a1, a2, depth, n, subst),
        (Term::Lam(_, i1, d1, b1), Term::Lam(_, i2, d2, b2)) | (Term::Pi(_, i1, d1, b1), Term::Pi(_, i2, d2, b2)) => {
            i1 == i2 && matches(d1, d2, depth, n, subst) && matches(b1, b2, depth + 1, n, subst)
        }
        (Term::Lam(..), _) | (Term::Pi(..), _) | (Term::App(..), _) => false,
        _ => pat == t,
    }
}

/// A total order on terms: size first, then constructor, then the node's
/// own data, then children left to right. Binder infos and names break the
/// remaining ties so that `Equal` coincides with `==`.
pub fn term_order(a: &Term, b: &Term) -> Ordering {
    a.node_count().cmp(&b.node_count()).then_with(|| structural_order(a, b))
}

fn tag_rank(t: &Term) -> u8 {
    match t {
        Term::Var(_) => 0,
        Term::Const(_) => 1,
        Term::Sort(_) => 2,
        Term::App(..) => 3,
        Term::Lam(..) => 4,
        Term::Pi(..) => 5,
    }
}

fn structural_order(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Term::Var(i), Term::Var(j)) => i.cmp(j),
        (Term::Const(x), Term::Const(y)) => x.as_str().cmp(y.as_str()),
        (Term::Sort(x), Term::Sort(y)) => x.cmp(y),
        (Term::App(f1, a1), Term::App(f2, a2)) => term_order(f1, f2).then_with(|| term_order(a1, a2)),
        (Term::Lam(n1, i1, d1, b1), Term::Lam(n2, i2, d2, b2)) | (Term::Pi(n1, i1, d1, b1), Term::Pi(n2, i2, d2, b2)) => {
            term_order(d1, d2).then_with(|| term_order(b1, b2)).then(i1.cmp(i2)).then_with(|| n1.cmp(n2))
        }
        _ => tag_rank(a).cmp(&tag_rank(b)),
    }
}

/// One rewrite: `before` (the subterm at `position`) became `after`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub lemma: Name,
    /// Child indices from the root. In an application `f a1 ... an`, index 0
    /// is the head `f` and `i` is `ai`; under a binder, 0 is the domain and 1
    /// the body.
    pub position: Vec<usize>,
    pub before: Term,
    pub after: Term,
    /// One simplification per discharged condition, in telescope order.
    pub condition_traces: Vec<SimpResult>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpResult {
    pub input: Term,
    pub output: Term,
    pub steps: Vec<RewriteStep>,
    pub fuel_exhausted: bool,
    pub lemmas_used: BTreeSet<Name>,
}

pub fn simp(env: &Environment, set: &SimpSet, term: &Term, fuel: u64) -> SimpResult {
    Simplifier::new(env, set).with_fuel(fuel).run(term)
}

/// Simplification settings. Each [`Simplifier::run`] has its own fuel.
pub struct Simplifier<'a> {
    env: &'a Environment,
    set: &'a SimpSet,
    instances: Option<&'a InstanceDb>,
    fuel: u64,
    discharge_depth: u32,
}

impl<'a> Simplifier<'a> {
    pub fn new(env: &'a Environment, set: &'a SimpSet) -> Self {
        Simplifier { env, set, instances: None, fuel: DEFAULT_FUEL, discharge_depth: DEFAULT_DISCHARGE_DEPTH }
    }

    /// Resolve instance-implicit lemma arguments that matching leaves open.
    pub fn with_instances(mut self, db: &'a InstanceDb) -> Self {
        self.instances = Some(db);
        self
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    /// How deeply condition discharge may nest.
    pub fn with_discharge_depth(mut self, depth: u32) -> Self {
        self.discharge_depth = depth;
        self
    }

    pub fn run(&self, term: &Term) -> SimpResult {
        let mut run = Run { cfg: self, fuel: self.fuel, exhausted: false };
        run.simplify(term, 0)
    }
}

struct Run<'s, 'a> {
    cfg: &'s Simplifier<'a>,
    fuel: u64,
    exhausted: bool,
}

impl Run<'_, '_> {
    fn simplify(&mut self, term: &Term, discharge_level: u32) -> SimpResult {
        let mut steps = Vec::new();
        let mut path = Vec::new();
        let output = self.visit(term.clone(), &mut path, &mut steps, discharge_level);
        let mut lemmas_used = BTreeSet::new();
        collect_lemmas(&steps, &mut lemmas_used);
        SimpResult { input: term.clone(), output, steps, fuel_exhausted: self.exhausted, lemmas_used }
    }

    fn visit(&mut self, term: Term, path: &mut Vec<usize>, steps: &mut Vec<RewriteStep>, level: u32) -> Term {
        let mut t = self.visit_children(term, path, steps, level);
        while !self.exhausted {
            match self.rewrite_root(&t, path, level) {
                Some(step) => {
                    let next = step.after.clone();
                    steps.push(step);
                    t = self.visit_children(next, path, steps, level);
                }
                None => break,
            }
        }
        t
    }

    fn visit_children(&mut self, term: Term, path: &mut Vec<usize>, steps: &mut Vec<RewriteStep>, level: u32) -> Term {
        let mut at = |this: &mut Self, i: usize, t: Term, steps: &mut Vec<RewriteStep>| {
            path.push(i);
            let out = this.visit(t, path, steps, level);
            path.pop();
            out
        };
        match term {
            Term::App(..) => {
                let (head, args) = term.spine();
                let args: Vec<Term> = args.into_iter().cloned().collect();
                let head = head.clone();
                let mut new_args = Vec::with_capacity(args.len());
                for (i, a) in args.into_iter().enumerate() {
                    new_args.push(at(self, i + 1, a, steps));
                }
                let head = at(self, 0, head, steps);
                Term::apps(head, new_args)
            }
            Term::Lam(n, bi, d, b) => {
                let d = at(self, 0, *d, steps);
                let b = at(self, 1, *b, steps);
                Term::lam(&n, bi, d, b)
            }
            Term::Pi(n, bi, d, b) => {
                let d = at(self, 0, *d, steps);
                let b = at(self, 1, *b, steps);
                Term::pi(&n, bi, d, b)
            }
            other => other,
        }
    }

    fn rewrite_root(&mut self, t: &Term, path: &[usize], level: u32) -> Option<RewriteStep> {
        let head = t.head_const()?;
        let set = self.cfg.set;
        for lemma in set.bucket(head) {
            if let Some(step) = self.try_lemma(lemma, t, path, level) {
                return Some(step);
            }
            if self.exhausted {
                return None;
            }
        }
        None
    }

    fn try_lemma(&mut self, lemma: &SimpLemma, t: &Term, path: &[usize], level: u32) -> Option<RewriteStep> {
        let mut subst = match_pattern(lemma, t)?;
        let n = lemma.binders.len();
        let needed = |i: usize| {
            let later = lemma.binders[i + 1..].iter().enumerate().any(|(k, b)| b.ty.occurs(k as u32));
            later || lemma.rhs.occurs((n - 1 - i) as u32)
        };
        let mut condition_traces = Vec::new();
        for i in 0..n {
            if subst[i].is_some() {
                continue;
            }
            match lemma.slots[i] {
                SlotKind::Pattern => {
                    if needed(i) {
                        return None;
                    }
                    subst[i] = Some(Term::prop());
                }
                SlotKind::Instance => {
                    let goal = instantiate_prefix(&lemma.binders[i].ty, &subst[..i])?;
                    if !goal.is_closed() {
                        return None;
                    }
                    let db = self.cfg.instances?;
                    let trace = resolve_term(self.cfg.env, db, &goal, DEFAULT_DEPTH_LIMIT);
                    subst[i] = Some(trace.witness()?.term.clone());
                }
                SlotKind::Condition => {
                    if level >= self.cfg.discharge_depth {
                        return None;
                    }
                    let goal = instantiate_prefix(&lemma.binders[i].ty, &subst[..i])?;
                    let result = self.simplify(&goal, level + 1);
                    if self.exhausted || result.output != Term::cnst("true") {
                        return None;
                    }
                    condition_traces.push(result);
                    subst[i] = Some(Term::cnst("true.intro"));
                }
            }
        }
        let args: Vec<Term> = subst.into_iter().map(|v| v.expect("all slots filled")).collect();
        let after = lemma.rhs.instantiate_rev(&args);
        if lemma.permutative && term_order(&after, t) != Ordering::Less {
            return None;
        }
        if self.fuel == 0 {
            self.exhausted = true;
            return None;
        }
        self.fuel -= 1;
        Some(RewriteStep { lemma: lemma.decl.clone(), position: path.to_vec(), before: t.clone(), after, condition_traces })
    }
}

/// Instantiate a binder type living under the first `prefix.len()` binders.
fn instantiate_prefix(ty: &Term, prefix: &[Option<Term>]) -> Option<Term> {
    let args: Option<Vec<Term>> = prefix.iter().cloned().collect();
    Some(ty.instantiate_rev(&args?))
}

fn collect_lemmas(steps: &[RewriteStep], out: &mut BTreeSet<Name>) {
    for s in steps {
        out.insert(s.lemma.clone());
        for c in &s.condition_traces {
            collect_lemmas(&c.steps, out);
        }
    }
}

pub fn subterm_at<'t>(t: &'t Term, path: &[usize]) -> Option<&'t Term> {
    let Some((&i, rest)) = path.split_first() else { return Some(t) };
    let child = match t {
        Term::App(..) => {
            let (head, args) = t.spine();
            if i == 0 {
                head
            } else {
                *args.get(i - 1)?
            }
        }
        Term::Lam(_, _, d, b) | Term::Pi(_, _, d, b) => match i {
            0 => d,
            1 => b,
            _ => return None,
        },
        _ => return None,
    };
    subterm_at(child, rest)
}

pub fn replace_at(t: &Term, path: &[usize], new: Term) -> Option<Term> {
    let Some((&i, rest)) = path.split_first() else { return Some(new) };
    match t {
        Term::App(..) => {
            let (head, args) = t.spine();
            let mut head = head.clone();
            let mut args: Vec<Term> = args.into_iter().cloned().collect();
            if i == 0 {
                head = replace_at(&head, rest, new)?;
            } else {
                let slot = args.get_mut(i - 1)?;
                *slot = replace_at(slot, rest, new)?;
            }
            Some(Term::apps(head, args))
        }
        Term::Lam(n, bi, d, b) | Term::Pi(n, bi, d, b) => {
            let (d, b) = match i {
                0 => (replace_at(d, rest, new)?, (**b).clone()),
                1 => ((**d).clone(), replace_at(b, rest, new)?),
                _ => return None,
            };
            Some(if matches!(t, Term::Lam(..)) { Term::lam(n, *bi, d, b) } else { Term::pi(n, *bi, d, b) })
        }
        _ => None,
    }
}

/// Apply the recorded steps to the input, checking each one.
pub fn replay(result: &SimpResult) -> Result<Term, SimpError> {
    let mut t = result.input.clone();
    for (i, step) in result.steps.iter().enumerate() {
        if subterm_at(&t, &step.position) != Some(&step.before) {
            return Err(SimpError::BrokenTrace(i));
        }
        t = replace_at(&t, &step.position, step.after.clone()).ok_or(SimpError::BrokenTrace(i))?;
    }
    Ok(t)
}
