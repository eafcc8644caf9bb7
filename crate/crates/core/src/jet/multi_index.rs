use std::cmp::Ordering;
use std::fmt;

/// A symmetric multi-index: a multiset of base-axis indices kept in
/// canonical non-decreasing order, so that two index sequences naming the
/// same mixed jet compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    /// Canonicalize an arbitrary index sequence (entries are 1-based).
    pub fn new(entries: impl IntoIterator<Item = u8>) -> Self {
        let mut v: Vec<u8> = entries.into_iter().collect();
        v.sort_unstable();
        MultiIndex(v)
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// `|mu|`.
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    /// `mu + 1_j`: insert one derivative in direction `j`, re-canonicalized.
    pub fn plus(&self, j: u8) -> Self {
        let pos = self.0.partition_point(|&e| e <= j);
        let mut v = self.0.clone();
        v.insert(pos, j);
        MultiIndex(v)
    }

    /// Remove one occurrence of `j`; `None` if absent.
    pub fn minus(&self, j: u8) -> Option<Self> {
        let pos = self.0.iter().position(|&e| e == j)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(MultiIndex(v))
    }

    /// The distinct axes occurring in the index.
    pub fn distinct_entries(&self) -> Vec<u8> {
        let mut v = self.0.clone();
        v.dedup();
        v
    }

    /// Digit-string form used in coordinate names and file keys (`"12"`);
    /// empty for the order-0 index.
    pub fn digits(&self) -> String {
        self.0.iter().map(|d| d.to_string()).collect()
    }

    /// Parse a digit string such as `"112"`; entries are canonicalized.
    pub fn from_digits(s: &str) -> Option<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            let d = c.to_digit(10)?;
            if d == 0 {
                return None;
            }
            v.push(d as u8);
        }
        Some(MultiIndex::new(v))
    }
}

impl Ord for MultiIndex {
    // Order first, then lexicographic on the canonical digits: the order
    // used for coordinate enumeration.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digits())
    }
}

/// All canonical multi-indices of exactly the given order over axes
/// `1..=n`, in lexicographic order.
pub fn multi_indices(n: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(order);
    gen_nondecreasing(n as u8, order, 1, &mut current, &mut out);
    out
}

/// All canonical multi-indices of order `0..=k`, grouped by ascending order.
pub fn multi_indices_up_to(n: usize, k: usize) -> Vec<MultiIndex> {
    (0..=k).flat_map(|l| multi_indices(n, l)).collect()
}

fn gen_nondecreasing(
    n: u8,
    remaining: usize,
    min: u8,
    current: &mut Vec<u8>,
    out: &mut Vec<MultiIndex>,
) {
    if remaining == 0 {
        out.push(MultiIndex(current.clone()));
        return;
    }
    for d in min..=n {
        current.push(d);
        gen_nondecreasing(n, remaining - 1, d, current, out);
        current.pop();
    }
}
