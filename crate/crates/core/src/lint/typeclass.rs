//! Checks on instances and instance-implicit arguments.

use crate::env::{result_sort, Environment, SortClass, DEFAULT_PRIORITY};
use crate::name::Name;
use crate::pretty::pretty_in;
use crate::term::{Binder, Level, Term};
use crate::typeclass::{introduced_metavariables, is_forgetful, InstanceDb, InstanceEntry};
use crate::{Declaration, DeclarationKind};

fn entry(env: &Environment, d: &Declaration) -> Option<InstanceEntry> {
    if !d.is_instance() {
        return None;
    }
    InstanceEntry::from_decl(env, 0, d).ok()
}

fn describe(env: &Environment, binders: &[Binder], i: usize) -> String {
    let names: Vec<String> = binders[..i].iter().map(|b| b.name.clone()).collect();
    format!("argument {} ({} : {})", i + 1, binders[i].name, pretty_in(env, &binders[i].ty, &names, false))
}

/// Is binder `i` mentioned by a later binder type or the conclusion?
fn occurs_after(binders: &[Binder], concl: &Term, i: usize) -> bool {
    (i + 1..binders.len()).any(|j| binders[j].ty.occurs((j - 1 - i) as u32)) || concl.occurs((binders.len() - 1 - i) as u32)
}

fn is_class_type(env: &Environment, ty: &Term) -> bool {
    ty.strip_binders().1.head_const().is_some_and(|c| env.is_class(c))
}

pub fn lint_instance_priority(env: &Environment, d: &Declaration) -> Option<String> {
    let e = entry(env, d)?;
    if !is_forgetful(&e) || e.priority < DEFAULT_PRIORITY {
        return None;
    }
    Some(format!(
        "applies to every goal of class `{}` at priority {}; assign a priority below the default (see Note [lower instance priority])",
        e.class(),
        e.priority
    ))
}

pub fn lint_dangerous_instance(env: &Environment, d: &Declaration) -> Option<String> {
    let metas = introduced_metavariables(&entry(env, d)?);
    if metas.is_empty() {
        return None;
    }
    let list: Vec<String> = metas.iter().map(|m| format!("`{m}`")).collect();
    Some(format!("the following arguments become metavariables in a type-class subgoal: {}", list.join(", ")))
}

pub fn lint_impossible_instance(env: &Environment, d: &Declaration) -> Option<String> {
    if !d.is_instance() {
        return None;
    }
    let (binders, concl) = d.ty.strip_binders();
    if !concl.head_const().is_some_and(|c| env.is_class(c)) {
        return Some("the conclusion is not a type class, so the instance is never found".to_owned());
    }
    let impossible: Vec<String> = (0..binders.len())
        .filter(|&i| {
            let b = &binders[i];
            !(b.info.is_inst_implicit() && is_class_type(env, &b.ty)) && !occurs_after(&binders, concl, i)
        })
        .map(|i| describe(env, &binders, i))
        .collect();
    if impossible.is_empty() {
        return None;
    }
    Some(format!("{} cannot be found by type-class resolution", impossible.join(", ")))
}

pub fn lint_incorrect_type_class_argument(env: &Environment, d: &Declaration) -> Option<String> {
    let (binders, _) = d.ty.strip_binders();
    let bad: Vec<String> = (0..binders.len())
        .filter(|&i| binders[i].info.is_inst_implicit() && !is_class_type(env, &binders[i].ty))
        .map(|i| describe(env, &binders, i))
        .collect();
    if bad.is_empty() {
        return None;
    }
    Some(format!("instance-implicit {} is not a type class", bad.join(", ")))
}

/// Checks type formers (declarations ending in `Type u`) for an
/// `inhabited` or `nonempty` instance about them.
pub fn lint_has_inhabited_instance(_env: &Environment, db: &InstanceDb, d: &Declaration) -> Option<String> {
    let kind_ok =
        matches!(d.kind, DeclarationKind::Definition | DeclarationKind::Constant | DeclarationKind::Inductive | DeclarationKind::Structure);
    if !kind_ok || d.is_class() || d.auto || !matches!(d.ty.strip_binders().1, Term::Sort(Level::Succ(_))) {
        return None;
    }
    let about_d = |e: &InstanceEntry| e.conclusion.spine().1.iter().any(|a| a.head_const() == Some(&d.name));
    let covered = ["inhabited", "nonempty"].iter().any(|c| db.instances_of(&Name::from(*c)).iter().any(about_d));
    if covered {
        return None;
    }
    Some(format!("no `inhabited` or `nonempty` instance for `{}`", d.name))
}

pub fn lint_inhabited_nonempty(env: &Environment, d: &Declaration) -> Option<String> {
    if result_sort(env, &d.ty) != SortClass::Prop {
        return None;
    }
    let (binders, concl) = d.ty.strip_binders();
    let weakenable: Vec<String> = (0..binders.len())
        .filter(|&i| binders[i].ty.head_const().is_some_and(|c| c.as_str() == "inhabited"))
        .filter(|&i| !occurs_after(&binders, concl, i))
        .map(|i| describe(env, &binders, i))
        .collect();
    if weakenable.is_empty() {
        return None;
    }
    Some(format!("{} can be weakened to `nonempty`", weakenable.join(", ")))
}
