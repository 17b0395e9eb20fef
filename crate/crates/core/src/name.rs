//! Hierarchical content names.

use std::fmt;

use thiserror::Error;

pub const SCHEME: &str = "ccnx:/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("name must start with \"{SCHEME}\" (offset 0)")]
    MissingScheme,
    #[error("name has no components (offset {offset})")]
    NoComponents { offset: usize },
    #[error("empty name component at offset {offset}")]
    EmptyComponent { offset: usize },
}

/// A name prefix: an ordered list of non-empty components, possibly empty
/// (the root prefix `ccnx:/`, used for default routes).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Prefix(Vec<Vec<u8>>);

impl Prefix {
    pub fn root() -> Self {
        Prefix(Vec::new())
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff this prefix is a leading sublist of `name`'s components.
    pub fn matches(&self, name: &ContentName) -> bool {
        name.components().starts_with(&self.0)
    }

    /// Accepts `ccnx:/` (root) as well as any valid content name text.
    pub fn parse(text: &str) -> Result<Self, NameError> {
        if text == SCHEME {
            return Ok(Prefix::root());
        }
        ContentName::parse(text).map(|n| Prefix(n.components))
    }
}

impl From<&ContentName> for Prefix {
    fn from(name: &ContentName) -> Self {
        Prefix(name.components.clone())
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_components(f, &self.0)
    }
}

/// Name of a piece of content, optionally narrowed to one segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentName {
    components: Vec<Vec<u8>>,
    segment: Option<u64>,
}

impl ContentName {
    /// Builds a name from raw components. Returns `None` if there are no
    /// components or one of them is empty.
    pub fn from_components(components: Vec<Vec<u8>>) -> Option<Self> {
        if components.is_empty() || components.iter().any(|c| c.is_empty()) {
            return None;
        }
        Some(ContentName {
            components,
            segment: None,
        })
    }

    pub fn parse(text: &str) -> Result<Self, NameError> {
        let rest = text.strip_prefix(SCHEME).ok_or(NameError::MissingScheme)?;
        if rest.is_empty() {
            return Err(NameError::NoComponents {
                offset: SCHEME.len(),
            });
        }
        let mut components = Vec::new();
        let mut offset = SCHEME.len();
        for part in rest.split('/') {
            if part.is_empty() {
                return Err(NameError::EmptyComponent { offset });
            }
            components.push(part.as_bytes().to_vec());
            offset += part.len() + 1;
        }
        Ok(ContentName {
            components,
            segment: None,
        })
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn segment(&self) -> Option<u64> {
        self.segment
    }

    pub fn with_segment(mut self, segment: u64) -> Self {
        self.segment = Some(segment);
        self
    }

    pub fn without_segment(&self) -> Self {
        ContentName {
            components: self.components.clone(),
            segment: None,
        }
    }

    /// Appends one component. Panics on an empty component.
    pub fn child(&self, component: impl Into<Vec<u8>>) -> Self {
        let component = component.into();
        assert!(!component.is_empty(), "empty name component");
        let mut components = self.components.clone();
        components.push(component);
        ContentName {
            components,
            segment: self.segment,
        }
    }

    /// True iff `self`'s components are a leading sublist of `name`'s.
    /// Segments are ignored; a name is a prefix of itself.
    pub fn is_prefix_of(&self, name: &ContentName) -> bool {
        name.components.starts_with(&self.components)
    }
}

fn write_components(f: &mut fmt::Formatter<'_>, components: &[Vec<u8>]) -> fmt::Result {
    f.write_str(SCHEME)?;
    for (i, c) in components.iter().enumerate() {
        if i > 0 {
            f.write_str("/")?;
        }
        f.write_str(&String::from_utf8_lossy(c))?;
    }
    Ok(())
}

impl fmt::Display for ContentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_components(f, &self.components)?;
        if let Some(seg) = self.segment {
            write!(f, "#{seg}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(s: &str) -> ContentName {
        ContentName::parse(s).unwrap()
    }

    #[test]
    fn parse_valid_name() {
        let name = n("ccnx:/site/content0");
        assert_eq!(name.components(), &[b"site".to_vec(), b"content0".to_vec()]);
        assert_eq!(name.segment(), None);
        assert_eq!(name.to_string(), "ccnx:/site/content0");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            ContentName::parse("ccnx:/"),
            Err(NameError::NoComponents { offset: 6 })
        );
        assert_eq!(
            ContentName::parse("ccnx:/a//b"),
            Err(NameError::EmptyComponent { offset: 8 })
        );
        assert_eq!(ContentName::parse("ccnx:/a/"), Err(NameError::EmptyComponent { offset: 8 }));
        assert_eq!(ContentName::parse("http:/a"), Err(NameError::MissingScheme));
    }

    #[test]
    fn prefix_relation() {
        assert!(n("ccnx:/a/b").is_prefix_of(&n("ccnx:/a/b/c")));
        assert!(!n("ccnx:/a/b").is_prefix_of(&n("ccnx:/a")));
        assert!(n("ccnx:/a").is_prefix_of(&n("ccnx:/a")));
        assert!(!n("ccnx:/a/c").is_prefix_of(&n("ccnx:/a/b/c")));
        assert!(Prefix::root().matches(&n("ccnx:/x")));
        assert_eq!(Prefix::parse("ccnx:/").unwrap().to_string(), "ccnx:/");
    }

    fn arb_name() -> impl Strategy<Value = ContentName> {
        proptest::collection::vec(proptest::collection::vec(0u8..3, 1..3), 1..5)
            .prop_map(|c| ContentName::from_components(c).unwrap())
    }

    proptest! {
        #[test]
        fn prefix_is_reflexive_and_transitive(a in arb_name(), b in arb_name(), c in arb_name()) {
            prop_assert!(a.is_prefix_of(&a));
            if a.is_prefix_of(&b) && b.is_prefix_of(&c) {
                prop_assert!(a.is_prefix_of(&c));
            }
            if a.is_prefix_of(&b) {
                prop_assert!(a.len() <= b.len());
            }
        }

        #[test]
        fn display_parse_round_trip(parts in proptest::collection::vec("[a-z0-9]{1,6}", 1..5)) {
            let text = format!("{SCHEME}{}", parts.join("/"));
            prop_assert_eq!(n(&text).to_string(), text);
        }
    }
}
