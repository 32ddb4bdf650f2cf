//! Declaration counts for the `stats` command.

use std::fmt;

use crate::{DeclarationKind, Environment};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub include_auto: bool,
    /// Counts in [`DeclarationKind::ALL`] order.
    pub by_kind: [usize; 6],
    pub simp_lemmas: usize,
    pub classes: usize,
    pub instances: usize,
    pub auto_generated: usize,
}

impl Stats {
    pub fn declarations(&self) -> usize {
        self.by_kind.iter().sum()
    }

    pub fn count(&self, kind: DeclarationKind) -> usize {
        self.by_kind[DeclarationKind::ALL.iter().position(|k| *k == kind).expect("kind is listed")]
    }
}

/// Counts declarations; auto-generated ones only when `include_auto` is set.
pub fn stats(env: &Environment, include_auto: bool) -> Stats {
    let mut s = Stats { include_auto, ..Stats::default() };
    for d in env.declarations() {
        if d.auto {
            s.auto_generated += 1;
            if !include_auto {
                continue;
            }
        }
        s.by_kind[DeclarationKind::ALL.iter().position(|k| *k == d.kind).expect("kind is listed")] += 1;
        s.simp_lemmas += usize::from(d.is_simp());
        s.classes += usize::from(d.is_class());
        s.instances += usize::from(d.is_instance());
    }
    s
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "declarations: {}", self.declarations())?;
        for (kind, n) in DeclarationKind::ALL.iter().zip(self.by_kind) {
            writeln!(f, "  {kind}: {n}")?;
        }
        writeln!(f, "simp lemmas: {}", self.simp_lemmas)?;
        writeln!(f, "classes: {}", self.classes)?;
        writeln!(f, "instances: {}", self.instances)?;
        let verb = if self.include_auto { "included" } else { "excluded" };
        writeln!(f, "auto-generated: {} ({verb})", self.auto_generated)
    }
}
