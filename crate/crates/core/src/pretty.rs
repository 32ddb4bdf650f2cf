//! Single-line rendering of terms using the environment's notation table.

use crate::env::{result_sort, Environment, Fixity, SortClass};
use crate::term::{BinderInfo, Level, Term};

const ATOM: u32 = 1025;
const APP: u32 = 1024;
const ARROW: u32 = 25;
const BINDER: u32 = 0;

/// Render a closed term.
///
/// With `expand_implicits` false, non-explicit arguments of applications
/// are dropped and each run of implicit Pi binders collapses to `{...}`.
/// With it true, applications that hide arguments print as `@c a b ...`.
pub fn pretty(env: &Environment, term: &Term, expand_implicits: bool) -> String {
    pretty_in(env, term, &[], expand_implicits)
}

/// Render a term whose loose variables are named by `context`
/// (outermost binder first).
pub fn pretty_in(env: &Environment, term: &Term, context: &[String], expand_implicits: bool) -> String {
    let mut p = Printer { env, expand: expand_implicits, names: context.to_vec() };
    p.render(term).0
}

struct Printer<'a> {
    env: &'a Environment,
    expand: bool,
    names: Vec<String>,
}

impl Printer<'_> {
    fn at(&mut self, t: &Term, min: u32) -> String {
        let (s, prec) = self.render(t);
        if prec < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn render(&mut self, t: &Term) -> (String, u32) {
        match t {
            Term::Var(i) => {
                let n = self.names.len();
                match n.checked_sub(*i as usize + 1) {
                    Some(k) => (self.names[k].clone(), ATOM),
                    None => (format!("#{i}"), ATOM),
                }
            }
            Term::Sort(l) => render_sort(l),
            Term::Const(_) | Term::App(..) => self.render_app(t),
            Term::Pi(..) => self.render_pi(t),
            Term::Lam(..) => self.render_lam(t),
        }
    }

    fn render_app(&mut self, t: &Term) -> (String, u32) {
        let (head, args) = t.spine();
        let Term::Const(c) = head else {
            let mut out = self.at(head, APP);
            for a in &args {
                out.push(' ');
                out.push_str(&self.at(a, ATOM));
            }
            return (out, APP);
        };
        let infos = self.env.arg_infos(c);
        let info_of = |i: usize| infos.get(i).copied().unwrap_or(BinderInfo::Explicit);
        let hides = (0..args.len()).any(|i| !info_of(i).is_explicit());
        if self.expand && hides {
            let mut out = format!("@{c}");
            for a in &args {
                out.push(' ');
                out.push_str(&self.at(a, ATOM));
            }
            return (out, APP);
        }
        let explicit: Vec<&Term> = args.iter().enumerate().filter(|(i, _)| info_of(*i).is_explicit()).map(|(_, a)| *a).collect();
        if let Some(n) = self.env.notation_for(c) {
            let arity = infos.iter().filter(|b| b.is_explicit()).count();
            let sym = n.symbol.as_str();
            let p = n.precedence;
            match (n.fixity, explicit.as_slice()) {
                (_, []) if arity == 0 => return (sym.to_owned(), ATOM),
                (Fixity::Infixl, [a, b]) => {
                    let s = format!("{} {sym} {}", self.at(a, p), self.at(b, p + 1));
                    return (s, p);
                }
                (Fixity::Infixr, [a, b]) => {
                    let s = format!("{} {sym} {}", self.at(a, p + 1), self.at(b, p));
                    return (s, p);
                }
                (Fixity::Prefix, [a]) => {
                    let sep = if sym.ends_with(|ch: char| ch.is_alphanumeric()) { " " } else { "" };
                    return (format!("{sym}{sep}{}", self.at(a, p)), p);
                }
                (Fixity::Postfix, [a]) => return (format!("{}{sym}", self.at(a, p)), p),
                _ => {}
            }
        }
        if explicit.is_empty() {
            return (c.to_string(), ATOM);
        }
        let mut out = c.to_string();
        for a in explicit {
            out.push(' ');
            out.push_str(&self.at(a, ATOM));
        }
        (out, APP)
    }

    fn fresh(&self, name: &str) -> String {
        let base = if name.is_empty() || name == "_" { "x" } else { name };
        if !self.names.iter().any(|n| n == base) {
            return base.to_owned();
        }
        (1..).map(|k| format!("{base}_{k}")).find(|cand| !self.names.iter().any(|n| n == cand)).expect("unbounded suffixes")
    }

    fn render_pi(&mut self, t: &Term) -> (String, u32) {
        let depth = self.names.len();
        let quantifier = if result_sort(self.env, t) == SortClass::Prop { "∀" } else { "Π" };
        // (name, info, rendered type) of the binder group
        let mut group: Vec<(String, BinderInfo, String)> = Vec::new();
        let mut cur = t;
        let mut arrow = None;
        while let Term::Pi(name, info, dom, body) = cur {
            if info.is_explicit() && !body.occurs(0) {
                arrow = Some((&**dom, &**body));
                break;
            }
            let ty = self.at(dom, BINDER);
            let n = self.fresh(name);
            self.names.push(n.clone());
            group.push((n, *info, ty));
            cur = body;
        }
        let out = match (group.is_empty(), arrow) {
            (true, Some((dom, body))) => {
                let lhs = self.at(dom, ARROW + 1);
                self.names.push(String::new());
                let rhs = self.at(body, ARROW);
                (format!("{lhs} → {rhs}"), ARROW)
            }
            _ => {
                let rest = self.at(cur, BINDER);
                (format!("{quantifier} {}, {rest}", self.binder_list(&group)), BINDER)
            }
        };
        self.names.truncate(depth);
        out
    }

    fn binder_list(&self, group: &[(String, BinderInfo, String)]) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < group.len() {
            let (_, info, ty) = &group[i];
            let hidden = matches!(info, BinderInfo::Implicit | BinderInfo::StrictImplicit);
            if hidden && !self.expand {
                while i < group.len() && matches!(group[i].1, BinderInfo::Implicit | BinderInfo::StrictImplicit) {
                    i += 1;
                }
                parts.push("{...}".to_owned());
                continue;
            }
            let mut j = i + 1;
            while j < group.len() && group[j].1 == *info && group[j].2 == *ty {
                j += 1;
            }
            let names: Vec<&str> = group[i..j].iter().map(|g| g.0.as_str()).collect();
            let names = names.join(" ");
            parts.push(match info {
                BinderInfo::Explicit => format!("({names} : {ty})"),
                BinderInfo::Implicit => format!("{{{names} : {ty}}}"),
                BinderInfo::StrictImplicit => format!("⦃{names} : {ty}⦄"),
                BinderInfo::InstanceImplicit => format!("[{names} : {ty}]"),
            });
            i = j;
        }
        parts.join(" ")
    }

    fn render_lam(&mut self, t: &Term) -> (String, u32) {
        let depth = self.names.len();
        let mut group = Vec::new();
        let mut cur = t;
        while let Term::Lam(name, info, dom, body) = cur {
            let ty = self.at(dom, BINDER);
            let n = self.fresh(name);
            self.names.push(n.clone());
            group.push((n, *info, ty));
            cur = body;
        }
        let expand = std::mem::replace(&mut self.expand, true);
        let binders = self.binder_list(&group);
        self.expand = expand;
        let body = self.at(cur, BINDER);
        self.names.truncate(depth);
        (format!("λ {binders}, {body}"), BINDER)
    }
}

fn render_sort(l: &Level) -> (String, u32) {
    match l.peel() {
        (Level::Zero, 0) => ("Prop".into(), ATOM),
        (Level::Zero, 1) => ("Type".into(), ATOM),
        (Level::Zero, k) => (format!("Type {}", k - 1), APP),
        (Level::Param(p), 0) => (format!("Sort {p}"), APP),
        (Level::Param(p), 1) => (format!("Type {p}"), APP),
        (Level::Param(p), k) => (format!("Type ({p}+{})", k - 1), APP),
        (Level::Succ(_), _) => unreachable!("peel removes every Succ"),
    }
}
