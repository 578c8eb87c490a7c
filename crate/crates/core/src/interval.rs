//! Half-open period intervals `(a, b]`.
//!
//! Periods are numbered `1..=T`. An interval over `[T]` is `(a, b]` with
//! `0 <= a < b <= T` and holds the periods `a+1 ..= b`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub a: usize,
    pub b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Self {
        assert!(a < b, "empty interval ({a}, {b}]");
        Interval { a, b }
    }

    pub fn contains(&self, s: usize) -> bool {
        self.a < s && s <= self.b
    }

    pub fn len(&self) -> usize {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn periods(&self) -> impl Iterator<Item = usize> {
        self.a + 1..=self.b
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.a <= self.a && self.b <= other.b
    }

    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.b <= other.a || other.b <= self.a
    }

    /// Nested or disjoint.
    pub fn is_laminar_with(&self, other: &Interval) -> bool {
        self.is_disjoint(other) || self.is_subset_of(other) || other.is_subset_of(self)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.a, self.b)
    }
}

/// All `T(T+1)/2` intervals over `[T]`, ascending by `a` then `b`.
pub fn all_intervals(horizon: usize) -> impl Iterator<Item = Interval> {
    (0..horizon).flat_map(move |a| (a + 1..=horizon).map(move |b| Interval { a, b }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order_and_count() {
        let all: Vec<_> = all_intervals(3).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], Interval::new(0, 1));
        assert_eq!(all[2], Interval::new(0, 3));
        assert_eq!(all[5], Interval::new(2, 3));
    }

    #[test]
    fn set_relations() {
        let outer = Interval::new(0, 4);
        let left = Interval::new(0, 2);
        let right = Interval::new(2, 4);
        let cross = Interval::new(1, 3);
        assert!(left.is_subset_of(&outer));
        assert!(left.is_disjoint(&right));
        assert!(!left.is_laminar_with(&cross));
        assert!(outer.is_laminar_with(&cross));
        assert_eq!(cross.periods().collect::<Vec<_>>(), vec![2, 3]);
        assert!(cross.contains(2) && !cross.contains(1));
    }
}
