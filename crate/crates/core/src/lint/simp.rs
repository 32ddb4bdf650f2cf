//! Checks on the simp set.

use std::collections::HashSet;

use super::LintContext;
use crate::name::Name;
use crate::simp::{SimpError, SimpLemma, Simplifier};
use crate::term::Term;
use crate::{Declaration, Environment};

/// The left-hand side with every binder replaced by a fresh constant
/// `_nf.<binder>` that the environment does not declare.
pub fn ground_lhs(env: &Environment, lemma: &SimpLemma) -> Term {
    let mut taken = HashSet::new();
    let args: Vec<Term> = lemma
        .binders
        .iter()
        .map(|b| {
            let base = match b.name.replace('.', "_") {
                s if s.is_empty() => "x".to_owned(),
                s => s,
            };
            let name = (0..)
                .map(|k| if k == 0 { base.clone() } else { format!("{base}_{k}") })
                .map(|s| Name::from_components(["_nf", s.as_str()]).expect("nonempty, dot-free components"))
                .find(|n| !env.contains(n) && !taken.contains(n))
                .expect("some suffix is free");
            taken.insert(name.clone());
            Term::Const(name)
        })
        .collect();
    lemma.lhs.instantiate_rev(&args)
}

/// Simplifies the grounded left-hand side with the whole simp set. The
/// lemma passes if that uses the lemma itself or does nothing at all.
pub fn lint_simp_nf(ctx: &LintContext<'_>, d: &Declaration) -> Option<String> {
    if !d.is_simp() {
        return None;
    }
    let Some(lemma) = ctx.simp_set().lemma(&d.name) else {
        let rejected = ctx.simp_errors().iter().any(|e| matches!(e, SimpError::NotAnEquation(n) if *n == d.name));
        return rejected.then(|| "not an equation, iff or proposition, so simp cannot use it".to_owned());
    };
    let lhs = ground_lhs(ctx.env, lemma);
    let result = Simplifier::new(ctx.env, ctx.simp_set()).with_instances(ctx.instances()).run(&lhs);
    if result.steps.is_empty() || result.lemmas_used.contains(&d.name) {
        return None;
    }
    let used: Vec<&str> = result.lemmas_used.iter().map(Name::as_str).collect();
    Some(format!("simp can rewrite the left-hand side without this lemma, using: {}", used.join(", ")))
}

pub fn lint_simp_comm(ctx: &LintContext<'_>, d: &Declaration) -> Option<String> {
    let lemma = ctx.simp_set().lemma(&d.name).filter(|_| d.is_simp())?;
    lemma.permutative.then(|| "the right-hand side permutes the variables of the left-hand side".to_owned())
}

pub fn lint_simp_var_head(ctx: &LintContext<'_>, d: &Declaration) -> Option<String> {
    let lemma = ctx.simp_set().lemma(&d.name).filter(|_| d.is_simp())?;
    let slot = lemma.var_head()?;
    Some(format!("the left-hand side is headed by the variable `{}`", lemma.binders[slot].name))
}
