//! Instance database and depth-first backward search over it.
//!
//! Instances are tried in priority order (most recently declared first among
//! equal priorities). Matching is first-order unification between the goal
//! and the instance conclusion, whose binders become fresh metavariables.
//! Instance-implicit hypotheses become subgoals, solved left to right with
//! full backtracking.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::env::Environment;
use crate::name::Name;
use crate::pretty::pretty;
use crate::term::{Binder, BinderInfo, Level, Term};

pub const DEFAULT_DEPTH_LIMIT: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance `{0}` does not conclude with an application of a type class")]
    InstanceWithoutClassHead(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceEntry {
    pub decl: Name,
    pub binders: Vec<Binder>,
    pub conclusion: Term,
    pub priority: u32,
    pub order_index: usize,
}

impl InstanceEntry {
    pub fn from_decl(env: &Environment, order_index: usize, decl: &crate::Declaration) -> Result<Self, InstanceError> {
        let (binders, conclusion) = decl.ty.strip_binders();
        match conclusion.head_const() {
            Some(c) if env.is_class(c) => Ok(InstanceEntry {
                decl: decl.name.clone(),
                binders,
                conclusion: conclusion.clone(),
                priority: decl.priority_of("instance"),
                order_index,
            }),
            _ => Err(InstanceError::InstanceWithoutClassHead(decl.name.clone())),
        }
    }

    pub fn class(&self) -> &Name {
        self.conclusion.head_const().expect("instance conclusions are class-headed")
    }

    /// Telescope variable of binder `i`, as seen from the conclusion.
    fn var_in_conclusion(&self, i: usize) -> u32 {
        (self.binders.len() - 1 - i) as u32
    }

    /// Does binder `i` occur in the type of binder `j > i`?
    fn occurs_in_binder(&self, i: usize, j: usize) -> bool {
        self.binders[j].ty.occurs((j - 1 - i) as u32)
    }
}

/// Instances grouped by class, each group in search order.
#[derive(Clone, Debug, Default)]
pub struct InstanceDb {
    by_class: HashMap<Name, Vec<InstanceEntry>>,
    by_decl: HashMap<Name, (Name, usize)>,
}

impl InstanceDb {
    pub fn build(env: &Environment) -> Result<Self, InstanceError> {
        let (db, mut errors) = Self::build_partial(env);
        match errors.is_empty() {
            true => Ok(db),
            false => Err(errors.swap_remove(0)),
        }
    }

    /// Build from every well-formed instance, collecting the rest as errors.
    pub fn build_partial(env: &Environment) -> (Self, Vec<InstanceError>) {
        let mut errors = Vec::new();
        let mut entries = Vec::new();
        for (i, d) in env.declarations().iter().enumerate() {
            if !d.is_instance() {
                continue;
            }
            match InstanceEntry::from_decl(env, i, d) {
                Ok(e) => entries.push(e),
                Err(e) => errors.push(e),
            }
        }
        (Self::from_entries(entries), errors)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = InstanceEntry>) -> Self {
        let mut by_class: HashMap<Name, Vec<InstanceEntry>> = HashMap::new();
        for e in entries {
            by_class.entry(e.class().clone()).or_default().push(e);
        }
        let mut by_decl = HashMap::new();
        for (class, list) in &mut by_class {
            list.sort_by(|a, b| b.priority.cmp(&a.priority).then(b.order_index.cmp(&a.order_index)));
            for (i, e) in list.iter().enumerate() {
                by_decl.insert(e.decl.clone(), (class.clone(), i));
            }
        }
        InstanceDb { by_class, by_decl }
    }

    pub fn instances_of(&self, class: &Name) -> &[InstanceEntry] {
        self.by_class.get(class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entry(&self, decl: &Name) -> Option<&InstanceEntry> {
        let (class, i) = self.by_decl.get(decl)?;
        Some(&self.by_class[class][*i])
    }

    pub fn len(&self) -> usize {
        self.by_decl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_decl.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &Name> {
        self.by_class.keys()
    }
}

/// Binders that occur in an instance-implicit hypothesis but not in the
/// conclusion: resolving through the instance leaves them as metavariables
/// in a subgoal.
pub fn introduced_metavariables(inst: &InstanceEntry) -> Vec<String> {
    (0..inst.binders.len())
        .filter(|&i| !inst.conclusion.occurs(inst.var_in_conclusion(i)))
        .filter(|&i| (i + 1..inst.binders.len()).any(|j| inst.binders[j].info.is_inst_implicit() && inst.occurs_in_binder(i, j)))
        .map(|i| inst.binders[i].name.clone())
        .collect()
}

/// True when the class arguments of the conclusion are pairwise distinct
/// binder variables, so the instance matches every goal of its class.
pub fn is_forgetful(inst: &InstanceEntry) -> bool {
    let (_, args) = inst.conclusion.spine();
    let mut seen = Vec::with_capacity(args.len());
    args.iter().all(|a| match a {
        Term::Var(i) if !seen.contains(i) => {
            seen.push(*i);
            true
        }
        _ => false,
    })
}

/// A term that may contain metavariables `?n`. Metavariables stand for
/// closed terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MetaTerm {
    Meta(u32),
    Var(u32),
    Const(Name),
    App(Box<MetaTerm>, Box<MetaTerm>),
    Lam(String, BinderInfo, Box<MetaTerm>, Box<MetaTerm>),
    Pi(String, BinderInfo, Box<MetaTerm>, Box<MetaTerm>),
    Sort(Level),
}

impl MetaTerm {
    pub fn from_term(t: &Term) -> MetaTerm {
        Self::abstract_telescope(t, &[])
    }

    /// Read `t`, which lives under a telescope, replacing the telescope
    /// variables by the given metavariables (outermost binder first).
    pub fn abstract_telescope(t: &Term, metas: &[u32]) -> MetaTerm {
        fn go(t: &Term, metas: &[u32], depth: u32) -> MetaTerm {
            match t {
                Term::Var(i) if *i >= depth => {
                    let k = (*i - depth) as usize;
                    MetaTerm::Meta(metas[metas.len() - 1 - k])
                }
                Term::Var(i) => MetaTerm::Var(*i),
                Term::Const(n) => MetaTerm::Const(n.clone()),
                Term::Sort(l) => MetaTerm::Sort(l.clone()),
                Term::App(f, a) => MetaTerm::App(Box::new(go(f, metas, depth)), Box::new(go(a, metas, depth))),
                Term::Lam(n, bi, d, b) => MetaTerm::Lam(n.clone(), *bi, Box::new(go(d, metas, depth)), Box::new(go(b, metas, depth + 1))),
                Term::Pi(n, bi, d, b) => MetaTerm::Pi(n.clone(), *bi, Box::new(go(d, metas, depth)), Box::new(go(b, metas, depth + 1))),
            }
        }
        go(t, metas, 0)
    }

    /// The underlying term, if no metavariable remains.
    pub fn to_term(&self) -> Option<Term> {
        Some(match self {
            MetaTerm::Meta(_) => return None,
            MetaTerm::Var(i) => Term::Var(*i),
            MetaTerm::Const(n) => Term::Const(n.clone()),
            MetaTerm::Sort(l) => Term::Sort(l.clone()),
            MetaTerm::App(f, a) => Term::app(f.to_term()?, a.to_term()?),
            MetaTerm::Lam(n, bi, d, b) => Term::lam(n, *bi, d.to_term()?, b.to_term()?),
            MetaTerm::Pi(n, bi, d, b) => Term::pi(n, *bi, d.to_term()?, b.to_term()?),
        })
    }

    /// Like `to_term`, but metavariables become placeholder constants `?m_n`.
    pub fn to_display_term(&self) -> Term {
        match self {
            MetaTerm::Meta(m) => Term::Const(Name::parse(&format!("?m_{m}")).expect("placeholder names are valid")),
            MetaTerm::Var(i) => Term::Var(*i),
            MetaTerm::Const(n) => Term::Const(n.clone()),
            MetaTerm::Sort(l) => Term::Sort(l.clone()),
            MetaTerm::App(f, a) => Term::app(f.to_display_term(), a.to_display_term()),
            MetaTerm::Lam(n, bi, d, b) => Term::lam(n, *bi, d.to_display_term(), b.to_display_term()),
            MetaTerm::Pi(n, bi, d, b) => Term::pi(n, *bi, d.to_display_term(), b.to_display_term()),
        }
    }

    pub fn head_const(&self) -> Option<&Name> {
        match self {
            MetaTerm::App(f, _) => f.head_const(),
            MetaTerm::Const(n) => Some(n),
            _ => None,
        }
    }

    pub fn contains_meta(&self) -> bool {
        match self {
            MetaTerm::Meta(_) => true,
            MetaTerm::App(a, b) | MetaTerm::Lam(_, _, a, b) | MetaTerm::Pi(_, _, a, b) => a.contains_meta() || b.contains_meta(),
            _ => false,
        }
    }

    fn mentions_meta(&self, m: u32) -> bool {
        match self {
            MetaTerm::Meta(n) => *n == m,
            MetaTerm::App(a, b) | MetaTerm::Lam(_, _, a, b) | MetaTerm::Pi(_, _, a, b) => a.mentions_meta(m) || b.mentions_meta(m),
            _ => false,
        }
    }

    fn has_loose_var(&self, depth: u32) -> bool {
        match self {
            MetaTerm::Var(i) => *i >= depth,
            MetaTerm::App(a, b) => a.has_loose_var(depth) || b.has_loose_var(depth),
            MetaTerm::Lam(_, _, a, b) | MetaTerm::Pi(_, _, a, b) => a.has_loose_var(depth) || b.has_loose_var(depth + 1),
            _ => false,
        }
    }
}

/// Assignments for the metavariables of one search.
#[derive(Clone, Debug, Default)]
pub struct MetaStore {
    slots: Vec<Option<MetaTerm>>,
}

impl MetaStore {
    pub fn fresh(&mut self) -> u32 {
        self.slots.push(None);
        (self.slots.len() - 1) as u32
    }

    pub fn get(&self, m: u32) -> Option<&MetaTerm> {
        self.slots.get(m as usize).and_then(Option::as_ref)
    }

    pub fn is_assigned(&self, m: u32) -> bool {
        self.get(m).is_some()
    }

    /// Expand assigned metavariables everywhere in `t`.
    pub fn instantiate(&self, t: &MetaTerm) -> MetaTerm {
        match t {
            MetaTerm::Meta(m) => match self.get(*m) {
                Some(v) => self.instantiate(v),
                None => t.clone(),
            },
            MetaTerm::App(f, a) => MetaTerm::App(Box::new(self.instantiate(f)), Box::new(self.instantiate(a))),
            MetaTerm::Lam(n, bi, d, b) => MetaTerm::Lam(n.clone(), *bi, Box::new(self.instantiate(d)), Box::new(self.instantiate(b))),
            MetaTerm::Pi(n, bi, d, b) => MetaTerm::Pi(n.clone(), *bi, Box::new(self.instantiate(d)), Box::new(self.instantiate(b))),
            _ => t.clone(),
        }
    }

    pub fn is_ground(&self, t: &MetaTerm) -> bool {
        !self.instantiate(t).contains_meta()
    }

    fn resolve_head<'t>(&'t self, mut t: &'t MetaTerm) -> &'t MetaTerm {
        while let MetaTerm::Meta(m) = t {
            match self.get(*m) {
                Some(v) => t = v,
                None => break,
            }
        }
        t
    }

    /// First-order unification. On failure the store may hold partial
    /// assignments, so callers unify against a copy.
    pub fn unify(&mut self, a: &MetaTerm, b: &MetaTerm) -> bool {
        let a = self.resolve_head(a).clone();
        let b = self.resolve_head(b).clone();
        match (&a, &b) {
            (MetaTerm::Meta(x), MetaTerm::Meta(y)) if x == y => true,
            (MetaTerm::Meta(m), t) | (t, MetaTerm::Meta(m)) => self.assign(*m, t),
            (MetaTerm::Var(x), MetaTerm::Var(y)) => x == y,
            (MetaTerm::Const(x), MetaTerm::Const(y)) => x == y,
            (MetaTerm::Sort(x), MetaTerm::Sort(y)) => x == y,
            (MetaTerm::App(f1, a1), MetaTerm::App(f2, a2)) => self.unify(f1, f2) && self.unify(a1, a2),
            (MetaTerm::Lam(_, i1, d1, b1), MetaTerm::Lam(_, i2, d2, b2)) | (MetaTerm::Pi(_, i1, d1, b1), MetaTerm::Pi(_, i2, d2, b2)) => {
                i1 == i2 && self.unify(d1, d2) && self.unify(b1, b2)
            }
            _ => false,
        }
    }

    fn assign(&mut self, m: u32, t: &MetaTerm) -> bool {
        let t = self.instantiate(t);
        if t.mentions_meta(m) || t.has_loose_var(0) {
            return false;
        }
        self.slots[m as usize] = Some(t);
        true
    }
}

/// A goal `C a1 ... an`, possibly mentioning metavariables of `store`.
#[derive(Clone, Debug)]
pub struct ClassGoal {
    pub term: MetaTerm,
    pub store: MetaStore,
}

impl ClassGoal {
    pub fn ground(t: &Term) -> Self {
        ClassGoal { term: MetaTerm::from_term(t), store: MetaStore::default() }
    }
}

/// How a goal was solved: the instance applied, the resulting instance
/// term, and the witnesses of its instance-implicit hypotheses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub instance: Name,
    pub term: Term,
    pub children: Vec<Witness>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.instance)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solved(Witness),
    Failed,
    DepthExceeded,
}

/// One instance tried at one search node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attempt {
    /// Index of the node in expansion order (the root is 0).
    pub node: usize,
    pub depth: u32,
    pub goal: String,
    pub instance: Name,
}

#[derive(Clone, Debug)]
pub struct ResolutionTrace {
    pub outcome: Outcome,
    pub nodes_visited: usize,
    pub tried: Vec<Attempt>,
}

impl ResolutionTrace {
    pub fn is_solved(&self) -> bool {
        matches!(self.outcome, Outcome::Solved(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Solved(w) => Some(w),
            _ => None,
        }
    }
}

pub fn resolve(env: &Environment, db: &InstanceDb, goal: &ClassGoal, depth_limit: u32) -> ResolutionTrace {
    let mut search = Search { env, db, limit: depth_limit, nodes: 0, tried: Vec::new(), exceeded: false };
    let mut found = None;
    search.solve(&goal.term, 0, goal.store.clone(), &mut |_, _, w| {
        found = Some(w);
        true
    });
    let outcome = match found {
        Some(w) => Outcome::Solved(w),
        None if search.exceeded => Outcome::DepthExceeded,
        None => Outcome::Failed,
    };
    ResolutionTrace { outcome, nodes_visited: search.nodes, tried: search.tried }
}

pub fn resolve_term(env: &Environment, db: &InstanceDb, goal: &Term, depth_limit: u32) -> ResolutionTrace {
    resolve(env, db, &ClassGoal::ground(goal), depth_limit)
}

type Cont<'k, 'a> = dyn FnMut(&mut Search<'a>, MetaStore, Witness) -> bool + 'k;

struct Search<'a> {
    env: &'a Environment,
    db: &'a InstanceDb,
    limit: u32,
    nodes: usize,
    tried: Vec<Attempt>,
    exceeded: bool,
}

impl<'a> Search<'a> {
    /// Solve `goal`, calling `k` with each solution until it returns true.
    fn solve(&mut self, goal: &MetaTerm, depth: u32, store: MetaStore, k: &mut Cont<'_, 'a>) -> bool {
        if !store.is_ground(goal) {
            return self.expand(goal, depth, store, k);
        }
        // A ground goal binds nothing, so its first solution is as good as any.
        let mut first = None;
        self.expand(goal, depth, store.clone(), &mut |_, _, w| {
            first = Some(w);
            true
        });
        match first {
            Some(w) => k(self, store, w),
            None => false,
        }
    }

    fn expand(&mut self, goal: &MetaTerm, depth: u32, store: MetaStore, k: &mut Cont<'_, 'a>) -> bool {
        if depth > self.limit {
            self.exceeded = true;
            return false;
        }
        let node = self.nodes;
        self.nodes += 1;
        let goal = store.instantiate(goal);
        let Some(class) = goal.head_const() else { return false };
        let db = self.db;
        let rendering = pretty(self.env, &goal.to_display_term(), false);
        for entry in db.instances_of(class) {
            self.tried.push(Attempt { node, depth, goal: rendering.clone(), instance: entry.decl.clone() });
            let mut s = store.clone();
            let metas: Vec<u32> = entry.binders.iter().map(|_| s.fresh()).collect();
            if !s.unify(&MetaTerm::abstract_telescope(&entry.conclusion, &metas), &goal) {
                continue;
            }
            let subgoals: Vec<(usize, MetaTerm)> = entry
                .binders
                .iter()
                .enumerate()
                .filter(|(_, b)| b.info.is_inst_implicit())
                .map(|(i, b)| (i, MetaTerm::abstract_telescope(&b.ty, &metas[..i])))
                .collect();
            let undetermined = entry.binders.iter().enumerate().any(|(i, b)| {
                !b.info.is_inst_implicit()
                    && !s.is_assigned(metas[i])
                    && !subgoals.iter().any(|(_, g)| s.instantiate(g).mentions_meta(metas[i]))
            });
            if undetermined {
                continue;
            }
            if self.solve_all(entry, &metas, &subgoals, depth + 1, s, Vec::new(), k) {
                return true;
            }
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_all(
        &mut self,
        entry: &'a InstanceEntry,
        metas: &[u32],
        subgoals: &[(usize, MetaTerm)],
        depth: u32,
        store: MetaStore,
        done: Vec<Witness>,
        k: &mut Cont<'_, 'a>,
    ) -> bool {
        let Some(((slot, goal), rest)) = subgoals.split_first() else {
            let args: Option<Vec<Term>> = metas.iter().map(|&m| store.instantiate(&MetaTerm::Meta(m)).to_term()).collect();
            let Some(args) = args else { return false };
            let witness = Witness { instance: entry.decl.clone(), term: Term::apps(Term::Const(entry.decl.clone()), args), children: done };
            return k(self, store, witness);
        };
        self.solve(goal, depth, store, &mut |this, mut s, w| {
            if !s.assign(metas[*slot], &MetaTerm::from_term(&w.term)) {
                return false;
            }
            let mut done = done.clone();
            done.push(w);
            this.solve_all(entry, metas, rest, depth, s, done, k)
        })
    }
}
