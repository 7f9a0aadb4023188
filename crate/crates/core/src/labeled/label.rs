use std::fmt;

use serde::{Deserialize, Serialize};

use super::LabelError;

/// Track label `(birth step, index)`; ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub birth_time: u32,
    pub index: u32,
}

impl Label {
    pub const fn new(birth_time: u32, index: u32) -> Self {
        Self { birth_time, index }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.birth_time, self.index)
    }
}

/// Sorted, duplicate-free set of labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LabelSet(Vec<Label>);

impl LabelSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Fails on duplicate labels.
    pub fn from_labels(mut labels: Vec<Label>) -> Result<Self, LabelError> {
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(LabelError::DuplicateLabel(w[0]));
        }
        Ok(Self(labels))
    }

    /// For callers that already hold sorted distinct labels.
    pub(crate) fn from_sorted_unchecked(labels: Vec<Label>) -> Self {
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        Self(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.0.binary_search(l).is_ok()
    }

    pub fn position(&self, l: &Label) -> Option<usize> {
        self.0.binary_search(l).ok()
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.0.iter()
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        let mut v: Vec<Label> = self.0.iter().chain(other.0.iter()).cloned().collect();
        v.sort_unstable();
        v.dedup();
        LabelSet(v)
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = &'a Label;
    type IntoIter = std::slice::Iter<'a, Label>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_fail_loudly() {
        let l = Label::new(1, 2);
        assert_eq!(
            LabelSet::from_labels(vec![l, Label::new(0, 1), l]),
            Err(LabelError::DuplicateLabel(l))
        );
    }

    #[test]
    fn equality_is_set_equality() {
        let a = LabelSet::from_labels(vec![Label::new(2, 1), Label::new(0, 3)]).unwrap();
        let b = LabelSet::from_labels(vec![Label::new(0, 3), Label::new(2, 1)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.as_slice()[0], Label::new(0, 3));
    }

    #[test]
    fn labels_order_lexicographically() {
        assert!(Label::new(0, 9) < Label::new(1, 1));
        assert!(Label::new(1, 1) < Label::new(1, 2));
    }
}
