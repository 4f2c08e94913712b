/// Named strategy objects selectable at runtime, kept in registration order.
pub struct Registry<T: ?Sized> {
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new() -> Self {
        Registry {
            entries: Vec::new(),
        }
    }

    /// Registers `item`, replacing any entry with the same name.
    pub fn register(&mut self, name: &'static str, item: Box<T>) {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, item)| item.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_replace() {
        let mut r: Registry<dyn Fn() -> u8> = Registry::new();
        r.register("a", Box::new(|| 1));
        r.register("b", Box::new(|| 2));
        r.register("a", Box::new(|| 3));
        assert_eq!(r.names(), ["a", "b"]);
        assert_eq!((r.get("a").unwrap())(), 3);
        assert!(r.get("c").is_none());
    }
}
