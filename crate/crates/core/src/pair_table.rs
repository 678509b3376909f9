//! Functions on unordered pairs with values below the pair's minimum.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::set::{pair_key, FinSet, Ordinal};

pub(crate) static EMPTY: FinSet = FinSet::new();

/// A function `f` from unordered pairs `{ξ, η}` of a finite universe to
/// finite sets, with `f({ξ, η}) ⊆ min{ξ, η}`. Absent pairs map to `∅`; empty
/// values are never stored, so structural equality is equality of functions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PairTable {
    universe: u32,
    entries: BTreeMap<(Ordinal, Ordinal), FinSet>,
}

impl PairTable {
    pub fn new(universe: u32) -> Self {
        PairTable { universe, entries: BTreeMap::new() }
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn get(&self, x: Ordinal, y: Ordinal) -> &FinSet {
        self.entries.get(&pair_key(x, y)).unwrap_or(&EMPTY)
    }

    /// Sets `f({x, y}) = value`, enforcing the table invariant.
    pub fn set(&mut self, x: Ordinal, y: Ordinal, value: FinSet) -> Result<()> {
        let (lo, hi) = self.check_pair(x, y)?;
        if let Some(element) = value.iter().find(|&z| z >= lo) {
            return Err(Error::ValueNotBelowMin { lo, hi, element });
        }
        if value.is_empty() {
            self.entries.remove(&(lo, hi));
        } else {
            self.entries.insert((lo, hi), value);
        }
        Ok(())
    }

    /// Adds `extra` to `f({x, y})`.
    pub fn extend(&mut self, x: Ordinal, y: Ordinal, extra: &FinSet) -> Result<()> {
        let merged = self.get(x, y).union(extra);
        self.set(x, y, merged)
    }

    /// Nonempty entries in lexicographic pair order.
    pub fn entries(&self) -> impl Iterator<Item = ((Ordinal, Ordinal), &FinSet)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_pair(&self, x: Ordinal, y: Ordinal) -> Result<(Ordinal, Ordinal)> {
        if x == y {
            return Err(Error::DegeneratePair(x, y));
        }
        let (lo, hi) = pair_key(x, y);
        if hi >= self.universe {
            return Err(Error::OutOfUniverse { value: hi, universe: self.universe });
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_pairs_are_empty_and_order_is_irrelevant() {
        let mut f = PairTable::new(5);
        f.set(4, 2, FinSet::from([0, 1])).unwrap();
        assert_eq!(f.get(2, 4), &FinSet::from([0, 1]));
        assert!(f.get(0, 1).is_empty());
        f.set(2, 4, FinSet::new()).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn values_must_lie_below_the_minimum() {
        let mut f = PairTable::new(5);
        assert_eq!(
            f.set(2, 4, FinSet::from([2])),
            Err(Error::ValueNotBelowMin { lo: 2, hi: 4, element: 2 })
        );
        assert_eq!(f.set(1, 1, FinSet::new()), Err(Error::DegeneratePair(1, 1)));
        assert_eq!(f.set(1, 5, FinSet::new()), Err(Error::OutOfUniverse { value: 5, universe: 5 }));
    }
}
