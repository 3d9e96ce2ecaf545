//! Sparse integer multi-indices over a window of basis indices.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Finitely supported integer vector. Only nonzero entries are stored, so
/// equality, ordering and hashing are canonical.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(BTreeMap<i32, i32>);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex(BTreeMap::new())
    }

    pub fn unit(idx: i32) -> Self {
        let mut m = BTreeMap::new();
        m.insert(idx, 1);
        MultiIndex(m)
    }

    pub fn from_pairs(pairs: &[(i32, i32)]) -> Result<Self> {
        let mut m = BTreeMap::new();
        for &(i, v) in pairs {
            if v == 0 {
                continue;
            }
            if m.insert(i, v).is_some() {
                return Err(Error::domain(format!("duplicate index {i} in multi-index")));
            }
        }
        Ok(MultiIndex(m))
    }

    pub fn get(&self, idx: i32) -> i32 {
        self.0.get(&idx).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// l1 order `|k|`.
    pub fn order(&self) -> u64 {
        self.0.values().map(|v| v.unsigned_abs() as u64).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.0.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.0.iter().map(|(&i, &v)| (i, v))
    }

    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|(&i, &v)| (i, -v)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.0.clone();
        for (&i, &v) in &other.0 {
            let e = m.entry(i).or_insert(0);
            *e += v;
            if *e == 0 {
                m.remove(&i);
            }
        }
        MultiIndex(m)
    }

    pub fn scaled(&self, c: i32) -> Self {
        if c == 0 {
            return MultiIndex::zero();
        }
        MultiIndex(self.0.iter().map(|(&i, &v)| (i, c * v)).collect())
    }

    /// Restriction to the given support indices.
    pub fn restrict<I: IntoIterator<Item = i32>>(&self, idxs: I) -> Self {
        let mut m = BTreeMap::new();
        for i in idxs {
            if let Some(&v) = self.0.get(&i) {
                m.insert(i, v);
            }
        }
        MultiIndex(m)
    }

    /// All nonzero multi-indices with support in `[lo, hi]` and order at most
    /// `kmax`, in a fixed deterministic order.
    pub fn enumerate(lo: i32, hi: i32, kmax: u64) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current: Vec<(i32, i32)> = Vec::new();
        fn rec(
            idx: i32,
            hi: i32,
            budget: i64,
            current: &mut Vec<(i32, i32)>,
            out: &mut Vec<MultiIndex>,
        ) {
            if idx > hi {
                if !current.is_empty() {
                    out.push(MultiIndex(current.iter().copied().collect()));
                }
                return;
            }
            for v in -budget..=budget {
                if v != 0 {
                    current.push((idx, v as i32));
                }
                rec(idx + 1, hi, budget - v.abs(), current, out);
                if v != 0 {
                    current.pop();
                }
            }
        }
        rec(lo, hi, kmax as i64, &mut current, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Parse the textual form produced by `Display`: `0` or a comma list of
    /// `index:value` pairs.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "0" {
            return Ok(MultiIndex::zero());
        }
        let mut pairs = Vec::new();
        for part in t.split(',') {
            let (i, v) = part
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("bad multi-index entry {part:?}")))?;
            let i: i32 = i
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad index in {part:?}")))?;
            let v: i32 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad value in {part:?}")))?;
            pairs.push((i, v));
        }
        MultiIndex::from_pairs(&pairs)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&i, &v) in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}:{v}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parse_roundtrip() {
        let k = MultiIndex::from_pairs(&[(-1, 2), (3, -1)]).unwrap();
        assert_eq!(k.to_string(), "-1:2,3:-1");
        assert_eq!(MultiIndex::parse("-1:2,3:-1").unwrap(), k);
        assert_eq!(MultiIndex::parse("0").unwrap(), MultiIndex::zero());
    }

    #[test]
    fn order_and_support() {
        let k = MultiIndex::from_pairs(&[(0, -3), (2, 1)]).unwrap();
        assert_eq!(k.order(), 4);
        assert_eq!(k.support().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn add_cancels_to_zero() {
        let k = MultiIndex::from_pairs(&[(1, 1)]).unwrap();
        assert!(k.add(&k.neg()).is_zero());
    }

    #[test]
    fn enumeration_count_window3_order2() {
        // |k| <= 2 over three indices: 3x2 order-one, plus order-two choices.
        let all = MultiIndex::enumerate(-1, 1, 2);
        assert!(all.iter().all(|k| k.order() <= 2 && !k.is_zero()));
        // Delannoy-style count for d = 3, K = 2 minus the zero vector: 24.
        assert_eq!(all.len(), 24);
    }

    #[test]
    fn enumeration_is_sorted_unique() {
        let all = MultiIndex::enumerate(-1, 1, 3);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all, sorted);
    }
}
