use serde::Serialize;

/// Every violation found by a validator. Empty iff the object is valid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
}

impl<V> ValidationReport<V> {
    pub fn new(violations: Vec<V>) -> Self {
        ValidationReport { violations }
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<V> Default for ValidationReport<V> {
    fn default() -> Self {
        ValidationReport { violations: Vec::new() }
    }
}
