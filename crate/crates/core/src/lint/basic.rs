//! Checks on names, kinds, documentation and arguments.

use crate::env::{result_sort, Environment, SortClass};
use crate::pretty::pretty_in;
use crate::term::Binder;
use crate::{Declaration, DeclarationKind};

/// Flags a name in which some component occurs twice, adjacent or not.
pub fn lint_dup_namespace(d: &Declaration) -> Option<String> {
    let components: Vec<&str> = d.name.components().collect();
    let repeated = components.iter().enumerate().find(|(i, c)| components[..*i].contains(c))?.1;
    Some(format!("the namespace `{repeated}` is repeated"))
}

pub fn lint_def_lemma(env: &Environment, d: &Declaration) -> Option<String> {
    if d.is_instance() {
        return None;
    }
    match (d.kind, result_sort(env, &d.ty)) {
        (DeclarationKind::Definition, SortClass::Prop) => Some("is a def, should be a lemma/theorem".to_owned()),
        (DeclarationKind::Theorem, SortClass::TypeSort) => Some("is a lemma/theorem, should be a def".to_owned()),
        _ => None,
    }
}

/// Flags statements mentioning `gt` or `ge`; values are not inspected.
pub fn lint_illegal_constants(d: &Declaration) -> Option<String> {
    let found: Vec<&str> = d.ty.constants().into_iter().map(|c| c.as_str()).filter(|c| matches!(*c, "gt" | "ge")).collect();
    if found.is_empty() {
        return None;
    }
    let list: Vec<String> = found.iter().map(|c| format!("`{c}`")).collect();
    Some(format!("the type uses {}; state it with `<`/`≤` instead", list.join(" and ")))
}

/// Flags binders used nowhere after themselves: not in a later binder type,
/// the conclusion, or the value. Only declarations with a value are checked,
/// since the binders of an opaque constant are its interface.
pub fn lint_unused_arguments(env: &Environment, d: &Declaration) -> Option<String> {
    let value = d.value.as_ref()?;
    let (binders, concl) = d.ty.strip_binders();
    let n = binders.len();
    let (lams, body) = value.strip_lambdas(n);
    let k = lams.len();
    let used_later = |tel: &[Binder], i: usize| (i + 1..tel.len()).any(|j| tel[j].ty.occurs((j - 1 - i) as u32));
    let unused: Vec<usize> = (0..n)
        .filter(|&i| {
            let in_type = used_later(&binders, i) || concl.occurs((n - 1 - i) as u32);
            let in_value = i >= k || body.occurs((k - 1 - i) as u32) || used_later(&lams, i);
            !in_type && !in_value
        })
        .collect();
    if unused.is_empty() {
        return None;
    }
    let names: Vec<String> = binders.iter().map(|b| b.name.clone()).collect();
    let described: Vec<String> = unused
        .iter()
        .map(|&i| {
            let ty = pretty_in(env, &binders[i].ty, &names[..i], false);
            format!("argument {} ({} : {})", i + 1, binders[i].name, ty)
        })
        .collect();
    Some(format!("unused {}", described.join(", ")))
}

pub fn lint_doc_blame(d: &Declaration) -> Option<String> {
    if d.doc.is_some() || d.is_instance() {
        return None;
    }
    match d.kind {
        DeclarationKind::Definition => Some("def missing doc string".to_owned()),
        DeclarationKind::Constant => Some("constant missing doc string".to_owned()),
        _ => None,
    }
}
