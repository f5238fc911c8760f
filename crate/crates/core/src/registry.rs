//! Name-keyed registries of interchangeable algorithm variants.

use std::collections::BTreeMap;
use std::fmt;

/// Anything that can be stored in a [`Registry`].
pub trait Named {
    /// Registry key. Must be stable across releases since the CLI exposes it.
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str {
        ""
    }
}

/// Trait objects registered under their [`Named::name`].
pub struct Registry<T: ?Sized + Named> {
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: ?Sized + Named> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics on a duplicate name: registration happens at startup and a
    /// clash is a programming error.
    pub fn register(&mut self, item: Box<T>) -> &mut Self {
        let name = item.name();
        assert!(
            self.entries.insert(name, item).is_none(),
            "duplicate registry entry {name}"
        );
        self
    }

    pub fn get(&self, name: &str) -> Option<&T> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.values().map(|b| b.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Splits `name:1,2` into the key and its integer parameters.
pub fn parse_keyed(text: &str) -> Result<(&str, Vec<u64>), String> {
    let (key, rest) = match text.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (text, None),
    };
    let params = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("bad parameter {p:?} in {text:?}"))
            })
            .collect::<Result<_, _>>()?,
    };
    Ok((key, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }

    struct Hello;
    impl Named for Hello {
        fn name(&self) -> &'static str {
            "hello"
        }
    }
    impl Greeter for Hello {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    #[test]
    fn register_and_lookup() {
        let mut r: Registry<dyn Greeter> = Registry::new();
        r.register(Box::new(Hello));
        assert_eq!(r.get("hello").unwrap().greet(), "hi");
        assert!(r.get("bye").is_none());
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["hello"]);
    }

    #[test]
    #[should_panic(expected = "duplicate")]
    fn duplicate_names_panic() {
        let mut r: Registry<dyn Greeter> = Registry::new();
        r.register(Box::new(Hello)).register(Box::new(Hello));
    }

    #[test]
    fn keyed_parameters() {
        assert_eq!(parse_keyed("bell").unwrap(), ("bell", vec![]));
        assert_eq!(parse_keyed("phiMp:3").unwrap(), ("phiMp", vec![3]));
        assert_eq!(parse_keyed("x:1,2").unwrap(), ("x", vec![1, 2]));
        assert!(parse_keyed("x:y").is_err());
    }
}
