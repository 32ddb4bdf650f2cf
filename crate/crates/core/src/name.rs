//! Hierarchical declaration names.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A dot-separated hierarchical name such as `list.reverse`.
///
/// The rendered string is the canonical representation: components are
/// nonempty and never contain `.`, so splitting on `.` recovers them.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("a name needs at least one component")]
    Empty,
    #[error("name component {index} of `{name}` is empty")]
    EmptyComponent { name: String, index: usize },
    #[error("name component `{0}` contains `.`")]
    DottedComponent(String),
}

impl Name {
    pub fn parse(s: &str) -> Result<Self, NameError> {
        if s.is_empty() {
            return Err(NameError::Empty);
        }
        if let Some(index) = s.split('.').position(str::is_empty) {
            return Err(NameError::EmptyComponent { name: s.to_owned(), index });
        }
        Ok(Name(Arc::from(s)))
    }

    pub fn from_components<I, S>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = String::new();
        for (index, c) in components.into_iter().enumerate() {
            let c = c.as_ref();
            if c.is_empty() {
                return Err(NameError::EmptyComponent { name: out, index });
            }
            if c.contains('.') {
                return Err(NameError::DottedComponent(c.to_owned()));
            }
            if index > 0 {
                out.push('.');
            }
            out.push_str(c);
        }
        if out.is_empty() {
            return Err(NameError::Empty);
        }
        Ok(Name(Arc::from(out)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn components(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.split('.')
    }

    pub fn last(&self) -> &str {
        self.0.rsplit('.').next().unwrap_or(&self.0)
    }

    /// Everything but the final component, or `""` for a root name.
    pub fn namespace(&self) -> &str {
        match self.0.rfind('.') {
            Some(i) => &self.0[..i],
            None => "",
        }
    }

    /// Append one component.
    pub fn child(&self, component: &str) -> Result<Self, NameError> {
        if component.is_empty() {
            return Err(NameError::EmptyComponent { name: self.0.to_string(), index: self.components().count() });
        }
        if component.contains('.') {
            return Err(NameError::DottedComponent(component.to_owned()));
        }
        Ok(Name(Arc::from(format!("{}.{}", self.0, component))))
    }

    pub fn starts_with(&self, prefix: &Name) -> bool {
        self.0.len() > prefix.0.len() && self.0.starts_with(&*prefix.0) && self.0.as_bytes()[prefix.0.len()] == b'.'
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.0)
    }
}

/// Convenience for literals in tests and builders; panics on malformed names.
impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::parse(s).unwrap_or_else(|e| panic!("invalid name `{s}`: {e}"))
    }
}
