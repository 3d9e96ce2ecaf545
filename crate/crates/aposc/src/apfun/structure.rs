//! Spatial structure: a finite family of finite index sets with a
//! logarithmic weight.
//!
//! The weight of a set A is `[A] = 1 + sum_{i in A} log^rho(1 + |i|)` with a
//! fixed exponent `rho > 2`. Because the per-index contributions are
//! nonnegative, `[.]` is monotone under inclusion, and the union/intersection
//! pair `[A u B] + [A n B] = [A] + [B]` is a multiset identity, so
//! subadditivity holds with equality. Both facts are still verified on every
//! pair at construction, up to summation roundoff.
//!
//! The support weight of a multi-index k is `[[k]] = min { [A] : supp k in A }`.
//! The zero index has empty support and receives the minimum weight over the
//! whole family; this convention is part of the public contract and the chosen
//! set participates in term grouping.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::index::MultiIndex;
use crate::error::{Error, Result};
use crate::num::neumaier_sum;

/// Nonempty finite set of basis indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet(BTreeSet<i32>);

impl IndexSet {
    pub fn new<I: IntoIterator<Item = i32>>(iter: I) -> Result<Self> {
        let s: BTreeSet<i32> = iter.into_iter().collect();
        if s.is_empty() {
            return Err(Error::domain("index sets must be nonempty"));
        }
        Ok(IndexSet(s))
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i32) -> bool {
        self.0.contains(&i)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn contains_support(&self, k: &MultiIndex) -> bool {
        k.support().all(|i| self.0.contains(&i))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &IndexSet) -> Option<IndexSet> {
        let s: BTreeSet<i32> = self.0.intersection(&other.0).copied().collect();
        (!s.is_empty()).then_some(IndexSet(s))
    }

    /// Parse the `Display` form `{i1,i2,...}`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::parse(format!("bad set label {s:?}")))?;
        let mut items = Vec::new();
        for part in t.split(',') {
            items.push(
                part.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::parse(format!("bad set element {part:?}")))?,
            );
        }
        IndexSet::new(items)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Per-index weight contribution `log^rho(1 + |i|)`.
fn index_weight(i: i32, rho: f64) -> f64 {
    (1.0 + i.unsigned_abs() as f64).ln().powf(rho)
}

/// Slack for the construction-time axiom checks, relative to the magnitudes
/// involved; covers reordering of compensated sums only.
const AXIOM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialStructure {
    sets: Vec<IndexSet>,
    rho: f64,
}

impl SpatialStructure {
    /// Requires `rho > 2`, a nonempty family, and closure of the family under
    /// union of intersecting members. Weight monotonicity and subadditivity
    /// are checked on all pairs.
    pub fn new(mut sets: Vec<IndexSet>, rho: f64) -> Result<Arc<Self>> {
        if !(rho > 2.0) {
            return Err(Error::domain(format!("weight exponent rho = {rho} must exceed 2")));
        }
        if sets.is_empty() {
            return Err(Error::domain("spatial structure needs at least one set"));
        }
        sets.sort();
        sets.dedup();
        let s = SpatialStructure { sets, rho };
        for (i, a) in s.sets.iter().enumerate() {
            for b in s.sets.iter().skip(i + 1) {
                if a.intersection(b).is_some() {
                    let u = a.union(b);
                    if !s.sets.contains(&u) {
                        return Err(Error::invariant(format!(
                            "family not closed: {a} and {b} intersect but {u} is missing"
                        )));
                    }
                }
                let wa = s.weight(a);
                let wb = s.weight(b);
                let slack = AXIOM_SLACK * (wa + wb);
                if a.is_subset(b) && wa > wb + slack {
                    return Err(Error::invariant(format!("weight not monotone on {a} in {b}")));
                }
                if b.is_subset(a) && wb > wa + slack {
                    return Err(Error::invariant(format!("weight not monotone on {b} in {a}")));
                }
                let mut lhs = s.weight(&a.union(b));
                if let Some(cap) = a.intersection(b) {
                    lhs += s.weight(&cap);
                } else {
                    lhs += 1.0;
                }
                if lhs > wa + wb + slack {
                    return Err(Error::invariant(format!(
                        "weight not subadditive on {a}, {b}"
                    )));
                }
            }
        }
        Ok(Arc::new(s))
    }

    /// Family of all nonempty subsets of `elems`; convenient for small tests
    /// and closed under union by construction.
    pub fn power_family(elems: &[i32], rho: f64) -> Result<Arc<Self>> {
        if elems.is_empty() || elems.len() > 16 {
            return Err(Error::domain("power family wants 1..=16 elements"));
        }
        let mut sets = Vec::new();
        for mask in 1u32..(1 << elems.len()) {
            let members = elems
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, &e)| e);
            sets.push(IndexSet::new(members)?);
        }
        SpatialStructure::new(sets, rho)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    /// `[A] = 1 + sum_{i in A} log^rho(1 + |i|)`, ascending index order.
    pub fn weight(&self, a: &IndexSet) -> f64 {
        1.0 + neumaier_sum(a.iter().map(|i| index_weight(i, self.rho)))
    }

    /// Membership of the support of `k` in some declared set.
    pub fn contains_support(&self, k: &MultiIndex) -> bool {
        self.sets.iter().any(|a| a.contains_support(k))
    }

    /// The declared set attaining `[[k]]`; ties resolve to the
    /// lexicographically smallest label. The zero index minimizes over the
    /// whole family.
    pub fn assign(&self, k: &MultiIndex) -> Result<&IndexSet> {
        let mut best: Option<(f64, &IndexSet)> = None;
        for a in &self.sets {
            if !a.contains_support(k) {
                continue;
            }
            let w = self.weight(a);
            best = match best {
                None => Some((w, a)),
                Some((bw, bs)) => {
                    if w < bw || (w == bw && a < bs) {
                        Some((w, a))
                    } else {
                        Some((bw, bs))
                    }
                }
            };
        }
        best.map(|(_, a)| a).ok_or_else(|| {
            Error::membership(format!("support of {k} fits no declared set"))
        })
    }

    /// `[[k]] = min { [A] : supp k in A }`.
    pub fn support_weight(&self, k: &MultiIndex) -> Result<f64> {
        Ok(self.weight(self.assign(k)?))
    }

    /// Number of declared sets with `card(A) = n` and `[A] <= t`.
    pub fn distribution_count(&self, n: usize, t: f64) -> usize {
        self.sets
            .iter()
            .filter(|a| a.len() == n && self.weight(a) <= t)
            .count()
    }
}
