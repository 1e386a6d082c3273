//! Bitmask sets over global type indices and over candidates.

use std::fmt;

/// Maximum number of types an environment may carry.
pub const MAX_TYPES: usize = 64;
/// Maximum number of candidates an environment may carry.
pub const MAX_CANDIDATES: usize = 32;

/// A set of global type indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeSet(pub u64);

impl TypeSet {
    pub const EMPTY: TypeSet = TypeSet(0);

    pub fn full(len: usize) -> Self {
        debug_assert!(len <= MAX_TYPES);
        if len == 64 {
            TypeSet(u64::MAX)
        } else {
            TypeSet((1u64 << len) - 1)
        }
    }

    pub fn singleton(t: usize) -> Self {
        TypeSet(1u64 << t)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Self {
        TypeSet(items.into_iter().fold(0u64, |acc, t| acc | (1u64 << t)))
    }

    pub fn contains(self, t: usize) -> bool {
        self.0 >> t & 1 == 1
    }

    pub fn insert(&mut self, t: usize) {
        self.0 |= 1u64 << t;
    }

    pub fn remove(&mut self, t: usize) {
        self.0 &= !(1u64 << t);
    }

    pub fn with(self, t: usize) -> Self {
        TypeSet(self.0 | 1u64 << t)
    }

    pub fn without(self, t: usize) -> Self {
        TypeSet(self.0 & !(1u64 << t))
    }

    pub fn union(self, other: Self) -> Self {
        TypeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        TypeSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        TypeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        BitIter(self.0)
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = TypeSet> {
        SubsetIter {
            universe: self.0,
            next: Some(0),
        }
        .map(TypeSet)
    }
}

impl fmt::Debug for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A set of candidate indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandSet(pub u32);

impl CandSet {
    pub const EMPTY: CandSet = CandSet(0);

    pub fn full(len: usize) -> Self {
        debug_assert!(len <= MAX_CANDIDATES);
        if len == 32 {
            CandSet(u32::MAX)
        } else {
            CandSet((1u32 << len) - 1)
        }
    }

    pub fn singleton(c: usize) -> Self {
        CandSet(1u32 << c)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Self {
        CandSet(items.into_iter().fold(0u32, |acc, c| acc | (1u32 << c)))
    }

    pub fn contains(self, c: usize) -> bool {
        self.0 >> c & 1 == 1
    }

    pub fn with(self, c: usize) -> Self {
        CandSet(self.0 | 1u32 << c)
    }

    pub fn without(self, c: usize) -> Self {
        CandSet(self.0 & !(1u32 << c))
    }

    pub fn union(self, other: Self) -> Self {
        CandSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        CandSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        BitIter(self.0 as u64)
    }

    pub fn subsets(self) -> impl Iterator<Item = CandSet> {
        SubsetIter {
            universe: self.0 as u64,
            next: Some(0),
        }
        .map(|m| CandSet(m as u32))
    }
}

impl fmt::Debug for CandSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(bit)
    }
}

// Gosper-free submask walk: enumerates submasks in increasing numeric order.
struct SubsetIter {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for SubsetIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        self.next = if current == self.universe {
            None
        } else {
            Some((current.wrapping_sub(self.universe)) & self.universe)
        };
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_all_submasks() {
        let s = TypeSet::from_indices([1, 3, 4]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        assert_eq!(subs[0], TypeSet::EMPTY);
        assert_eq!(*subs.last().unwrap(), s);
        assert_eq!(TypeSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn set_algebra() {
        let a = CandSet::from_indices([0, 2]);
        let b = CandSet::from_indices([2, 3]);
        assert_eq!(a.union(b), CandSet::from_indices([0, 2, 3]));
        assert_eq!(a.intersection(b), CandSet::singleton(2));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(TypeSet::full(64).len(), 64);
    }
}
