//! Coordinate supports and lexicographic enumeration of fixed-size subsets.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

/// Strictly increasing, nonempty list of coordinates.
///
/// Stored 0-based; serialized and displayed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("support must be nonempty"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!("support indices must be strictly increasing: {indices:?}")));
        }
        Ok(Self { indices })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(invalid("1-based support contains index 0"));
        }
        Self::new(indices.iter().map(|i| i - 1).collect())
    }

    pub fn full(d: usize) -> Self {
        Self { indices: (0..d).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Applies a coordinate relabelling `old -> map[old]`.
    pub fn relabel(&self, map: &[usize]) -> Self {
        Self::from_unsorted(self.indices.iter().map(|&i| map[i]).collect()).expect("relabelled support")
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SupportSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SupportSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        SupportSet::from_one_based(&raw).map_err(serde::de::Error::custom)
    }
}

/// `C(n, k)` as a float; exact for every count this crate can enumerate.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Exact `C(n, k)`; `None` on overflow.
pub fn binomial_u64(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(mut rank: u64, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot;
        let mut c = next;
        loop {
            let count = binomial_u64(n - c - 1, remaining - 1).expect("rank in range");
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
/// Returns `false` after the last subset.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lexicographic iterator over the `k`-subsets of `0..n`.
pub struct Combinations {
    current: Vec<usize>,
    n: usize,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self { current: (0..k).collect(), n, done: k > n || k == 0 }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        self.done = !next_combination(&mut self.current, self.n);
        Some(out)
    }
}
