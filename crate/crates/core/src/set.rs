//! Finite sets of ordinals and the `*` operation.

use std::fmt;

use serde::Serialize;

use crate::error::Error;

/// A finite stand-in for an ordinal below the universe size.
pub type Ordinal = u32;

/// A finite set of ordinals, stored as a strictly increasing sequence.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FinSet(Vec<Ordinal>);

impl FinSet {
    pub const fn new() -> Self {
        FinSet(Vec::new())
    }

    pub fn singleton(x: Ordinal) -> Self {
        FinSet(vec![x])
    }

    /// Builds a set from a sequence that must already be strictly increasing.
    pub fn from_sorted(elements: Vec<Ordinal>) -> Result<Self, Error> {
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(if w[0] == w[1] {
                Error::DuplicateElement(w[0])
            } else {
                Error::Unsorted(w[0], w[1])
            });
        }
        Ok(FinSet(elements))
    }

    /// Builds a set from arbitrary input, rejecting duplicates.
    pub fn from_unsorted(mut elements: Vec<Ordinal>) -> Result<Self, Error> {
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateElement(w[0]));
        }
        Ok(FinSet(elements))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: Ordinal) -> Self {
        FinSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[Ordinal] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Ordinal> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Ordinal> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, x: Ordinal) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn min(&self) -> Option<Ordinal> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<Ordinal> {
        self.0.last().copied()
    }

    /// Position of `x` in increasing order.
    pub fn position(&self, x: Ordinal) -> Option<usize> {
        self.0.binary_search(&x).ok()
    }

    pub fn insert(&mut self, x: Ordinal) -> bool {
        match self.0.binary_search(&x) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, x);
                true
            }
        }
    }

    pub fn remove(&mut self, x: Ordinal) -> bool {
        match self.0.binary_search(&x) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        FinSet(out)
    }

    pub fn union_with(&mut self, other: &FinSet) {
        if !other.is_empty() {
            *self = self.union(other);
        }
    }

    pub fn intersection(&self, other: &FinSet) -> FinSet {
        FinSet(self.iter().filter(|&x| other.contains(x)).collect())
    }

    pub fn difference(&self, other: &FinSet) -> FinSet {
        FinSet(self.iter().filter(|&x| !other.contains(x)).collect())
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    pub fn is_disjoint(&self, other: &FinSet) -> bool {
        self.iter().all(|x| !other.contains(x))
    }

    /// `self ∩ bound`, reading the ordinal `bound` as the set of its predecessors.
    pub fn below(&self, bound: Ordinal) -> FinSet {
        let end = self.0.partition_point(|&x| x < bound);
        FinSet(self.0[..end].to_vec())
    }

    /// Least element of `self` missing from `other`.
    pub fn first_outside(&self, other: &FinSet) -> Option<Ordinal> {
        self.iter().find(|&x| !other.contains(x))
    }

    pub fn map(&self, f: impl Fn(Ordinal) -> Ordinal) -> FinSet {
        let mut v: Vec<Ordinal> = self.iter().map(f).collect();
        v.sort_unstable();
        v.dedup();
        FinSet(v)
    }

    pub fn filter(&self, f: impl Fn(Ordinal) -> bool) -> FinSet {
        FinSet(self.iter().filter(|&x| f(x)).collect())
    }

    /// All unordered pairs `(lo, hi)` with `lo < hi`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (Ordinal, Ordinal)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(move |(k, &lo)| self.0[k + 1..].iter().map(move |&hi| (lo, hi)))
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Ordinal> for FinSet {
    fn from_iter<I: IntoIterator<Item = Ordinal>>(iter: I) -> Self {
        let mut v: Vec<Ordinal> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FinSet(v)
    }
}

impl<const N: usize> From<[Ordinal; N]> for FinSet {
    fn from(a: [Ordinal; N]) -> Self {
        a.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a FinSet {
    type Item = Ordinal;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Ordinal>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Canonical key of the unordered pair `{x, y}`.
pub fn pair_key(x: Ordinal, y: Ordinal) -> (Ordinal, Ordinal) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// The `*` operation on nonempty finite sets with `max x < max y`:
/// `x \ y` when `max x ∈ y`, otherwise `x ∩ y`.
pub fn star(x: &FinSet, y: &FinSet) -> Result<FinSet, Error> {
    let (mx, my) = match (x.max(), y.max()) {
        (Some(mx), Some(my)) => (mx, my),
        _ => return Err(Error::EmptyStarOperand),
    };
    if mx >= my {
        return Err(Error::StarOrder { left: mx, right: my });
    }
    Ok(if y.contains(mx) {
        x.difference(y)
    } else {
        x.intersection(y)
    })
}
