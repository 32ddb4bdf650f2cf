//! Semantic linting and documentation generation over an exported,
//! fully elaborated proof-library corpus.

pub mod corpus;
pub mod doc;
pub mod env;
pub mod lint;
pub mod name;
pub mod pretty;
pub mod simp;
pub mod stats;
pub mod term;
pub mod typeclass;

pub use env::{Declaration, DeclarationKind, Environment};
pub use name::Name;
pub use term::{BinderInfo, Level, Term};
