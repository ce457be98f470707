use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Name-keyed table of strategy constructors.
pub struct Registry<T> {
    kind: &'static str,
    entries: BTreeMap<String, T>,
}

impl<T> Registry<T> {
    /// `kind` names the strategy family in lookup errors.
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Adds or replaces an entry.
    pub fn register(&mut self, name: impl Into<String>, item: T) -> &mut Self {
        self.entries.insert(name.into(), item);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries.get(name).ok_or_else(|| Error::Unknown {
            kind: self.kind,
            name: name.to_string(),
            available: self.names().collect::<Vec<_>>().join(", "),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_lists_alternatives() {
        let mut r: Registry<u8> = Registry::new("thing");
        r.register("b", 2).register("a", 1);
        assert_eq!(*r.get("a").unwrap(), 1);
        match r.get("c") {
            Err(Error::Unknown { available, .. }) => assert_eq!(available, "a, b"),
            _ => panic!(),
        }
    }
}
