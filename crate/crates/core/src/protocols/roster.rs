use serde::Serialize;

/// A finite set kept as a sorted, deduplicated vector.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Roster<T: Ord>(Vec<T>);

impl<T: Ord + Copy> Roster<T> {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(x: T) -> Self {
        Self(vec![x])
    }

    pub fn from_items(items: impl IntoIterator<Item = T>) -> Self {
        let mut v: Vec<T> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &T) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// 1-based position of `x` in ascending order, or of where it would be
    /// inserted.
    pub fn position(&self, x: &T) -> usize {
        self.0.partition_point(|y| y < x) + 1
    }

    pub fn union(&self, other: &Self) -> Self {
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
        Self(out)
    }

    /// Size of the union without building it.
    pub fn union_len(&self, other: &Self) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        a.len() + b.len() - common
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.iter().all(|x| other.contains(x))
    }
}

impl<T: Ord + Copy> FromIterator<T> for Roster<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Self::from_items(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn union_matches_btreeset(a in proptest::collection::vec(0u32..50, 0..20),
                                  b in proptest::collection::vec(0u32..50, 0..20)) {
            let ra = Roster::from_items(a.iter().copied());
            let rb = Roster::from_items(b.iter().copied());
            let expected: std::collections::BTreeSet<u32> = a.iter().chain(b.iter()).copied().collect();
            let u = ra.union(&rb);
            let want: Vec<u32> = expected.iter().copied().collect();
            prop_assert_eq!(u.as_slice(), want.as_slice());
            prop_assert_eq!(ra.union_len(&rb), expected.len());
            prop_assert!(ra.is_subset(&u) && rb.is_subset(&u));
        }
    }

    #[test]
    fn positions_are_one_based() {
        let r = Roster::from_items([2u64, 9, 14]);
        assert_eq!(r.position(&2), 1);
        assert_eq!(r.position(&14), 3);
        assert_eq!(r.position(&1), 1);
        assert_eq!(r.position(&10), 3);
    }
}
