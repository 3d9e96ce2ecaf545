//! Frequency basis: finitely many real frequencies indexed by a window of
//! integers, with optional exact rational relations.
//!
//! A relation declares the exact value of one integer combination of the
//! frequencies, either as a plain rational or as a rational multiple of 2*pi.
//! Relations are required to have pairwise disjoint supports, which keeps
//! exact evaluation of `<k, omega>` a greedy decomposition instead of linear
//! algebra over the rationals.

use std::fmt;
use std::sync::Arc;

use super::index::MultiIndex;
use crate::error::{Error, Result};
use crate::num::neumaier_sum;

/// Exact rational with i128 arithmetic, always reduced, denominator positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("rational with zero denominator"));
        }
        Ok(Self::reduce(num as i128, den as i128))
    }

    fn reduce(mut n: i128, mut d: i128) -> Self {
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()).max(1) as i128;
        Ratio { num: n / g, den: d / g }
    }

    pub fn zero() -> Self {
        Ratio { num: 0, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn add(&self, o: &Ratio) -> Ratio {
        Ratio::reduce(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn mul(&self, o: &Ratio) -> Ratio {
        Ratio::reduce(self.num * o.num, self.den * o.den)
    }

    pub fn scale_int(&self, c: i64) -> Ratio {
        Ratio::reduce(self.num * c as i128, self.den)
    }

    pub fn as_integer(&self) -> Option<i128> {
        (self.den == 1).then_some(self.num)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Declared exact value of a frequency combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelationValue {
    /// `<q, omega> = num/den`
    Rational(Ratio),
    /// `<q, omega> = 2*pi*num/den`
    TwoPiRational(Ratio),
}

impl RelationValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            RelationValue::Rational(r) => r.to_f64(),
            RelationValue::TwoPiRational(r) => 2.0 * std::f64::consts::PI * r.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalRelation {
    pub combo: MultiIndex,
    pub value: RelationValue,
}

/// Exact value of `<k, omega>` split into a plain rational part and a
/// rational multiple of 2*pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactInner {
    pub plain: Ratio,
    pub two_pi: Ratio,
}

impl ExactInner {
    pub fn to_f64(&self) -> f64 {
        self.plain.to_f64() + 2.0 * std::f64::consts::PI * self.two_pi.to_f64()
    }
}

/// Frequencies `omega_lambda` for `lambda` in the window `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBasis {
    lo: i32,
    hi: i32,
    omega: Vec<f64>,
    relations: Vec<RationalRelation>,
}

/// Agreement tolerance between a declared relation and float evaluation.
pub const RELATION_TOL: f64 = 1e-12;

impl FrequencyBasis {
    pub fn new(lo: i32, hi: i32, omega: Vec<f64>) -> Result<Arc<Self>> {
        if lo > hi {
            return Err(Error::domain("frequency window is empty"));
        }
        let len = (hi - lo + 1) as usize;
        if omega.len() != len {
            return Err(Error::domain(format!(
                "window [{lo}, {hi}] needs {len} frequencies, got {}",
                omega.len()
            )));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("frequencies must be finite"));
        }
        Ok(Arc::new(FrequencyBasis {
            lo,
            hi,
            omega,
            relations: Vec::new(),
        }))
    }

    pub fn with_relations(
        lo: i32,
        hi: i32,
        omega: Vec<f64>,
        relations: Vec<RationalRelation>,
    ) -> Result<Arc<Self>> {
        let base = FrequencyBasis::new(lo, hi, omega)?;
        let mut b = (*base).clone();
        for (i, rel) in relations.iter().enumerate() {
            if rel.combo.is_zero() {
                return Err(Error::domain("relation combination must be nonzero"));
            }
            for j in 0..i {
                let other = &relations[j];
                if rel.combo.support().any(|s| other.combo.get(s) != 0) {
                    return Err(Error::domain(format!(
                        "relations {} and {} overlap in support",
                        other.combo, rel.combo
                    )));
                }
            }
            let float = b.inner_frequency(&rel.combo)?;
            let declared = rel.value.to_f64();
            if (float - declared).abs() > RELATION_TOL * declared.abs().max(1.0) {
                return Err(Error::invariant(format!(
                    "relation <{}, omega> declared {declared} but evaluates to {float}",
                    rel.combo
                )));
            }
        }
        b.relations = relations;
        Ok(Arc::new(b))
    }

    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega(&self, idx: i32) -> Result<f64> {
        if idx < self.lo || idx > self.hi {
            return Err(Error::domain(format!(
                "index {idx} outside window [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(self.omega[(idx - self.lo) as usize])
    }

    pub fn relations(&self) -> &[RationalRelation] {
        &self.relations
    }

    /// `<k, omega>` by compensated summation in ascending index order.
    pub fn inner_frequency(&self, k: &MultiIndex) -> Result<f64> {
        for i in k.support() {
            if i < self.lo || i > self.hi {
                return Err(Error::domain(format!(
                    "multi-index {k} touches index {i} outside window [{}, {}]",
                    self.lo, self.hi
                )));
            }
        }
        Ok(neumaier_sum(
            k.entries()
                .map(|(i, v)| v as f64 * self.omega[(i - self.lo) as usize]),
        ))
    }

    /// Exact value of `<k, omega>` when `k` decomposes over the declared
    /// relations as integer multiples; `None` when it does not.
    pub fn exact_inner(&self, k: &MultiIndex) -> Option<ExactInner> {
        if k.is_zero() {
            return Some(ExactInner {
                plain: Ratio::zero(),
                two_pi: Ratio::zero(),
            });
        }
        let mut rest = k.clone();
        let mut plain = Ratio::zero();
        let mut two_pi = Ratio::zero();
        for rel in &self.relations {
            let sub = rest.restrict(rel.combo.support());
            if sub.is_zero() {
                continue;
            }
            // integer multiple test: sub == m * combo for a single integer m
            let mut m: Option<i32> = None;
            let mut ok = true;
            for (i, q) in rel.combo.entries() {
                let v = sub.get(i);
                if v % q != 0 {
                    ok = false;
                    break;
                }
                let mi = v / q;
                match m {
                    None => m = Some(mi),
                    Some(prev) if prev != mi => {
                        ok = false;
                        break;
                    }
                    _ => {}
                }
            }
            let m = match (ok, m) {
                (true, Some(m)) if m != 0 => m,
                _ => return None,
            };
            if sub != rel.combo.scaled(m) {
                return None;
            }
            rest = rest.add(&rel.combo.scaled(-m));
            match rel.value {
                RelationValue::Rational(r) => plain = plain.add(&r.scale_int(m as i64)),
                RelationValue::TwoPiRational(r) => two_pi = two_pi.add(&r.scale_int(m as i64)),
            }
        }
        rest.is_zero().then_some(ExactInner { plain, two_pi })
    }

    /// Basis with every frequency divided by `beta`. Declared relations do not
    /// scale exactly in general, so the result carries none.
    pub fn scaled(&self, beta: f64) -> Result<Arc<Self>> {
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::domain("scale factor must be finite and nonzero"));
        }
        FrequencyBasis::new(
            self.lo,
            self.hi,
            self.omega.iter().map(|w| w / beta).collect(),
        )
    }
}
