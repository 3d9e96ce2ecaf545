//! Almost periodic series with finite support.
//!
//! A series is a finite sum `f(t) = sum_k f_k exp(i <k, omega> t)` where every
//! multi-index k must have its support inside some declared structure set.
//! Coefficients are complex scalars or polynomial profiles in the action
//! variable.
//!
//! Norm conventions. The shell majorant of a set A at radius r is
//! `sum_{supp k in A} |f_k| e^{r |k|}`, an upper bound for the sup of the
//! shell on the complex strip of width r. The weighted norm at `(m, r)` groups
//! every term under the set attaining its support weight (ties to the
//! lexicographically smallest label) and charges `e^{m [A]}` per group, which
//! is the same as summing `|f_k| e^{r |k|} e^{m [[k]]}` term by term. An empty
//! series has norm 0.
//!
//! Text form. One record per term, ordered by multi-index:
//! `set={labels} k=index:value,... re=0x... im=0x...` with hexadecimal float
//! coefficients, preceded by a `# apfun series v1` header. Only scalar
//! coefficients have a text form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use super::basis::FrequencyBasis;
use super::index::MultiIndex;
use super::profile::ActionProfile;
use super::structure::{IndexSet, SpatialStructure};
use crate::error::{Error, Result};
use crate::num::{hexf, neumaier_sum};

/// Imaginary residue allowance for real evaluation, relative to the
/// coefficient sum.
pub const REALITY_TOL: f64 = 1e-12;

/// Default coefficient drop threshold after products.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Coef {
    Scalar(Complex64),
    Profile(ActionProfile),
}

impl Coef {
    /// Modulus for scalars, majorant for profiles.
    pub fn magnitude(&self) -> f64 {
        match self {
            Coef::Scalar(c) => c.norm(),
            Coef::Profile(p) => p.majorant(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Coef {
        match self {
            Coef::Scalar(a) => Coef::Scalar(a * c),
            Coef::Profile(p) => Coef::Profile(p.scale(c)),
        }
    }

    fn add(&self, other: &Coef) -> Result<Coef> {
        match (self, other) {
            (Coef::Scalar(a), Coef::Scalar(b)) => Ok(Coef::Scalar(a + b)),
            (Coef::Profile(a), Coef::Profile(b)) => Ok(Coef::Profile(a.add(b)?)),
            _ => Err(Error::domain(
                "cannot add a scalar coefficient to a profile coefficient",
            )),
        }
    }

    fn mul(&self, other: &Coef) -> Result<Coef> {
        match (self, other) {
            (Coef::Scalar(a), Coef::Scalar(b)) => Ok(Coef::Scalar(a * b)),
            (Coef::Scalar(a), Coef::Profile(p)) | (Coef::Profile(p), Coef::Scalar(a)) => {
                Ok(Coef::Profile(p.scale(*a)))
            }
            (Coef::Profile(a), Coef::Profile(b)) => Ok(Coef::Profile(a.mul(b)?)),
        }
    }

    fn eval(&self, y: f64) -> Complex64 {
        match self {
            Coef::Scalar(c) => *c,
            Coef::Profile(p) => p.eval(y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct APSeries {
    basis: Arc<FrequencyBasis>,
    structure: Arc<SpatialStructure>,
    terms: BTreeMap<MultiIndex, Coef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Mul,
}

impl APSeries {
    pub fn zero(basis: Arc<FrequencyBasis>, structure: Arc<SpatialStructure>) -> Self {
        APSeries {
            basis,
            structure,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(
        basis: Arc<FrequencyBasis>,
        structure: Arc<SpatialStructure>,
        c: f64,
    ) -> Result<Self> {
        let mut s = APSeries::zero(basis, structure);
        if c != 0.0 {
            s.insert(MultiIndex::zero(), Coef::Scalar(Complex64::new(c, 0.0)))?;
        }
        Ok(s)
    }

    pub fn from_scalar_terms(
        basis: Arc<FrequencyBasis>,
        structure: Arc<SpatialStructure>,
        terms: Vec<(MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut s = APSeries::zero(basis, structure);
        for (k, c) in terms {
            s.add_term(k, c)?;
        }
        Ok(s)
    }

    /// Real series `c0 + sum amp * cos(<k, omega> t + phase)`.
    pub fn from_cosines(
        basis: Arc<FrequencyBasis>,
        structure: Arc<SpatialStructure>,
        constant: f64,
        cosines: &[(MultiIndex, f64, f64)],
    ) -> Result<Self> {
        let mut s = APSeries::constant(basis, structure, constant)?;
        for (k, amp, phase) in cosines {
            if k.is_zero() {
                return Err(Error::domain(
                    "cosine terms need a nonzero multi-index; fold constants into the constant part",
                ));
            }
            let half = 0.5 * amp;
            let c = Complex64::from_polar(half, *phase);
            s.add_term(k.clone(), c)?;
            s.add_term(k.neg(), c.conj())?;
        }
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<FrequencyBasis> {
        &self.basis
    }

    pub fn structure(&self) -> &Arc<SpatialStructure> {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coef)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Option<&Coef> {
        self.terms.get(k)
    }

    /// Insert or replace; the support of `k` must fit a declared set and the
    /// basis window.
    pub fn insert(&mut self, k: MultiIndex, c: Coef) -> Result<()> {
        self.basis.inner_frequency(&k)?;
        self.structure.assign(&k)?;
        self.terms.insert(k, c);
        Ok(())
    }

    /// Accumulate a scalar term.
    pub fn add_term(&mut self, k: MultiIndex, c: Complex64) -> Result<()> {
        self.basis.inner_frequency(&k)?;
        self.structure.assign(&k)?;
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(Coef::Scalar(c));
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().add(&Coef::Scalar(c))?;
                e.insert(merged);
            }
        }
        Ok(())
    }

    pub fn remove(&mut self, k: &MultiIndex) -> Option<Coef> {
        self.terms.remove(k)
    }

    fn compatible(&self, other: &APSeries) -> Result<()> {
        if self.basis != other.basis || self.structure != other.structure {
            return Err(Error::domain(
                "series live on different bases or structures",
            ));
        }
        Ok(())
    }

    /// Coefficient magnitude sum; dominates the sup over real time.
    pub fn abs_sum(&self) -> f64 {
        neumaier_sum(self.terms.values().map(|c| c.magnitude()))
    }

    pub fn evaluate_complex(&self, t: f64) -> Result<Complex64> {
        self.evaluate_complex_at(t, None)
    }

    fn evaluate_complex_at(&self, t: f64, y: Option<f64>) -> Result<Complex64> {
        let mut re_parts = Vec::with_capacity(self.terms.len());
        let mut im_parts = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            let coef = match (c, y) {
                (Coef::Scalar(c), _) => *c,
                (Coef::Profile(_), None) => {
                    return Err(Error::domain(
                        "profile coefficients need an action value to evaluate",
                    ));
                }
                (Coef::Profile(_), Some(y)) => c.eval(y),
            };
            let nu = self.basis.inner_frequency(k)?;
            let ph = Complex64::from_polar(1.0, nu * t);
            let v = coef * ph;
            re_parts.push(v.re);
            im_parts.push(v.im);
        }
        Ok(Complex64::new(
            neumaier_sum(re_parts),
            neumaier_sum(im_parts),
        ))
    }

    /// Real evaluation. The imaginary residue must stay below
    /// `REALITY_TOL * abs_sum` or the series is declared non-real.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let v = self.evaluate_complex(t)?;
        let scale = self.abs_sum();
        if v.im.abs() > REALITY_TOL * scale.max(1e-300) {
            return Err(Error::invariant(format!(
                "imaginary residue {} exceeds {} * {scale} at t = {t}",
                v.im, REALITY_TOL
            )));
        }
        Ok(v.re)
    }

    /// Real evaluation with profile coefficients resolved at action `y`.
    pub fn evaluate_at(&self, t: f64, y: f64) -> Result<f64> {
        let v = self.evaluate_complex_at(t, Some(y))?;
        let scale = neumaier_sum(self.terms.values().map(|c| c.eval(y).norm()));
        if v.im.abs() > REALITY_TOL * scale.max(1e-300) {
            return Err(Error::invariant(format!(
                "imaginary residue {} at (t, y) = ({t}, {y})",
                v.im
            )));
        }
        Ok(v.re)
    }

    /// `sum_{supp k in A} |f_k| e^{r |k|}`.
    pub fn shell_sup_norm(&self, a: &IndexSet, r: f64) -> f64 {
        neumaier_sum(self.terms.iter().filter_map(|(k, c)| {
            a.contains_support(k)
                .then(|| c.magnitude() * (r * k.order() as f64).exp())
        }))
    }

    /// Weighted norm at `(m, r)`, both nonnegative.
    pub fn weighted_norm(&self, m: f64, r: f64) -> Result<f64> {
        if m < 0.0 || r < 0.0 {
            return Err(Error::domain("weighted norm wants m >= 0 and r >= 0"));
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            let w = self.structure.support_weight(k)?;
            parts.push(c.magnitude() * (r * k.order() as f64).exp() * (m * w).exp());
        }
        Ok(neumaier_sum(parts))
    }

    pub fn add(&self, other: &APSeries) -> Result<APSeries> {
        self.compatible(other)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            match terms.entry(k.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let merged = e.get().add(c)?;
                    e.insert(merged);
                }
            }
        }
        Ok(APSeries {
            basis: self.basis.clone(),
            structure: self.structure.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: Complex64) -> APSeries {
        APSeries {
            basis: self.basis.clone(),
            structure: self.structure.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(c)))
                .collect(),
        }
    }

    pub fn sub(&self, other: &APSeries) -> Result<APSeries> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Convolution product. Every product index must stay inside the declared
    /// structure; coefficients of magnitude at most `drop_tol` are discarded
    /// afterwards.
    pub fn multiply(&self, other: &APSeries, drop_tol: f64) -> Result<APSeries> {
        self.compatible(other)?;
        let mut terms: BTreeMap<MultiIndex, Coef> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let k = ka.add(kb);
                let p = ca.mul(cb)?;
                match terms.entry(k) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let merged = e.get().add(&p)?;
                        e.insert(merged);
                    }
                }
            }
        }
        terms.retain(|_, c| c.magnitude() > drop_tol);
        for k in terms.keys() {
            self.basis.inner_frequency(k)?;
            if self.structure.assign(k).is_err() {
                return Err(Error::membership(format!(
                    "product mode {k} fits no declared set"
                )));
            }
        }
        Ok(APSeries {
            basis: self.basis.clone(),
            structure: self.structure.clone(),
            terms,
        })
    }

    pub fn combine(op: CombineOp, a: &APSeries, b: &APSeries, drop_tol: f64) -> Result<APSeries> {
        match op {
            CombineOp::Add => a.add(b),
            CombineOp::Mul => a.multiply(b, drop_tol),
        }
    }

    /// Replace every scalar coefficient `c` by the profile `c * p`.
    pub fn times_profile(&self, p: &ActionProfile) -> Result<APSeries> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let Coef::Scalar(c) = c else {
                return Err(Error::domain("times_profile expects scalar coefficients"));
            };
            terms.insert(k.clone(), Coef::Profile(p.scale(*c)));
        }
        Ok(APSeries {
            basis: self.basis.clone(),
            structure: self.structure.clone(),
            terms,
        })
    }

    /// Time derivative: multiply each coefficient by `i <k, omega>`.
    pub fn derivative_t(&self) -> Result<APSeries> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let nu = self.basis.inner_frequency(k)?;
            terms.insert(k.clone(), c.scale(Complex64::new(0.0, nu)));
        }
        Ok(APSeries {
            basis: self.basis.clone(),
            structure: self.structure.clone(),
            terms,
        })
    }

    /// Largest conjugate-symmetry defect `|f_k - conj(f_{-k})|`.
    pub fn reality_defect(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (k, c) in &self.terms {
            let Coef::Scalar(c) = c else {
                return Err(Error::domain("reality defect applies to scalar series"));
            };
            let mirror = match self.terms.get(&k.neg()) {
                Some(Coef::Scalar(m)) => *m,
                Some(Coef::Profile(_)) => unreachable!("mixed series rejected above"),
                None => Complex64::new(0.0, 0.0),
            };
            worst = worst.max((c - mirror.conj()).norm());
        }
        Ok(worst)
    }

    /// Canonical text form; scalar series only.
    pub fn serialize(&self) -> Result<String> {
        let mut out = String::from("# apfun series v1\n");
        for (k, c) in &self.terms {
            let Coef::Scalar(c) = c else {
                return Err(Error::domain("profile coefficients have no text form"));
            };
            let set = self.structure.assign(k)?;
            let _ = writeln!(
                out,
                "set={set} k={k} re={} im={}",
                hexf::format_hex(c.re)?,
                hexf::format_hex(c.im)?
            );
        }
        Ok(out)
    }

    pub fn deserialize(
        basis: Arc<FrequencyBasis>,
        structure: Arc<SpatialStructure>,
        text: &str,
    ) -> Result<APSeries> {
        let mut s = APSeries::zero(basis, structure);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut set_txt = None;
            let mut k_txt = None;
            let mut re_txt = None;
            let mut im_txt = None;
            for field in line.split_whitespace() {
                if let Some(v) = field.strip_prefix("set=") {
                    set_txt = Some(v);
                } else if let Some(v) = field.strip_prefix("k=") {
                    k_txt = Some(v);
                } else if let Some(v) = field.strip_prefix("re=") {
                    re_txt = Some(v);
                } else if let Some(v) = field.strip_prefix("im=") {
                    im_txt = Some(v);
                } else {
                    return Err(Error::parse(format!(
                        "line {}: unknown field {field:?}",
                        lineno + 1
                    )));
                }
            }
            let (Some(set_txt), Some(k_txt), Some(re_txt), Some(im_txt)) =
                (set_txt, k_txt, re_txt, im_txt)
            else {
                return Err(Error::parse(format!(
                    "line {}: record needs set=, k=, re=, im=",
                    lineno + 1
                )));
            };
            let k = MultiIndex::parse(k_txt)?;
            let declared = IndexSet::parse(set_txt)?;
            let c = Complex64::new(hexf::parse_hex(re_txt)?, hexf::parse_hex(im_txt)?);
            s.add_term(k.clone(), c)?;
            let assigned = s.structure.assign(&k)?;
            if assigned != &declared {
                return Err(Error::invariant(format!(
                    "line {}: mode {k} is grouped under {assigned}, record says {declared}",
                    lineno + 1
                )));
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfun::basis::FrequencyBasis;
    use crate::apfun::structure::SpatialStructure;
    use approx::assert_relative_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    fn setup() -> (Arc<FrequencyBasis>, Arc<SpatialStructure>) {
        let basis = FrequencyBasis::new(-1, 1, vec![1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[-1, 0, 1], 3.0).unwrap();
        (basis, structure)
    }

    fn cosine_e1(amp: f64) -> APSeries {
        let (b, s) = setup();
        APSeries::from_cosines(b, s, 0.0, &[(MultiIndex::unit(-1), amp, 0.0)]).unwrap()
    }

    #[test]
    fn evaluate_cosine() {
        // frequency at index -1 is 1, so f(t) = cos(t)
        let f = cosine_e1(1.0);
        for &t in &[0.0, 0.5, 1.0, 2.0, -3.0] {
            assert_relative_eq!(f.evaluate(t).unwrap(), t.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn evaluate_sqrt2_cosine() {
        let (b, s) = setup();
        let f =
            APSeries::from_cosines(b, s, 0.0, &[(MultiIndex::unit(0), 1.0, 0.0)]).unwrap();
        let t = 1.0;
        // frozen: cos(sqrt(2)) = 0.15594369476537437
        assert_relative_eq!(f.evaluate(t).unwrap(), 0.15594369476537437, epsilon = 1e-13);
    }

    #[test]
    fn shell_majorant_of_unit_cosine() {
        // terms +-1/2 at k = +-e_{-1}, both supported in {-1}; at r = 1 the
        // shell majorant is e.
        let f = cosine_e1(1.0);
        let a = IndexSet::new([-1]).unwrap();
        assert_relative_eq!(f.shell_sup_norm(&a, 1.0), std::f64::consts::E, epsilon = 1e-14);
        // a disjoint set sees nothing
        let b = IndexSet::new([1]).unwrap();
        assert_eq!(f.shell_sup_norm(&b, 1.0), 0.0);
    }

    #[test]
    fn weighted_norm_groups_under_singleton() {
        // both modes of cos(omega t) sit at support {-1} with weight
        // 1 + log^3 2, so the norm is e^{r} * e^{m (1 + log^3 2)}.
        let f = cosine_e1(1.0);
        let expect = (1.0f64).exp() * (1.0 + LN2.powi(3)).exp();
        assert_relative_eq!(f.weighted_norm(1.0, 1.0).unwrap(), expect, epsilon = 1e-12);
        assert_relative_eq!(
            f.weighted_norm(1.0, 1.0).unwrap(),
            10.309075790754697,
            epsilon = 1e-12
        );
    }

    #[test]
    fn norm_dominates_sup() {
        let (b, s) = setup();
        let f = APSeries::from_cosines(
            b,
            s,
            0.3,
            &[
                (MultiIndex::unit(-1), 1.0, 0.2),
                (MultiIndex::unit(0), 0.5, -0.4),
                (MultiIndex::from_pairs(&[(-1, 1), (1, -1)]).unwrap(), 0.25, 0.0),
            ],
        )
        .unwrap();
        let norm = f.weighted_norm(0.5, 0.25).unwrap();
        for j in 0..200 {
            let t = j as f64 * 0.37;
            assert!(f.evaluate(t).unwrap().abs() <= norm);
        }
    }

    #[test]
    fn product_of_conjugate_waves_is_constant() {
        let (b, s) = setup();
        let pos = APSeries::from_scalar_terms(
            b.clone(),
            s.clone(),
            vec![(MultiIndex::unit(-1), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let neg = APSeries::from_scalar_terms(
            b,
            s,
            vec![(MultiIndex::unit(-1).neg(), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let prod = pos.multiply(&neg, DROP_TOL).unwrap();
        assert_eq!(prod.len(), 1);
        let c = prod.coefficient(&MultiIndex::zero()).unwrap();
        assert_eq!(c, &Coef::Scalar(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn cosine_square_halves() {
        let f = cosine_e1(1.0);
        let sq = f.multiply(&f, DROP_TOL).unwrap();
        // cos^2 = 1/2 + cos(2t)/2: modes 0, +-2e_{-1}
        assert_eq!(sq.len(), 3);
        for &t in &[0.1, 0.9, 4.0] {
            assert_relative_eq!(sq.evaluate(t).unwrap(), t.cos().powi(2), epsilon = 1e-13);
        }
    }

    #[test]
    fn product_membership_enforced() {
        // structure with singletons only: the cross mode has support {-1, 0}
        let basis = FrequencyBasis::new(-1, 0, vec![1.0, 2f64.sqrt()]).unwrap();
        let sets = vec![IndexSet::new([-1]).unwrap(), IndexSet::new([0]).unwrap()];
        let structure = SpatialStructure::new(sets, 3.0).unwrap();
        let f = APSeries::from_cosines(
            basis.clone(),
            structure.clone(),
            0.0,
            &[(MultiIndex::unit(-1), 1.0, 0.0)],
        )
        .unwrap();
        let g = APSeries::from_cosines(
            basis,
            structure,
            0.0,
            &[(MultiIndex::unit(0), 1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            f.multiply(&g, DROP_TOL),
            Err(Error::Membership(_))
        ));
    }

    #[test]
    fn triangle_inequality_spot() {
        let (b, s) = setup();
        let f = APSeries::from_cosines(b.clone(), s.clone(), 0.2, &[(MultiIndex::unit(-1), 1.0, 0.0)])
            .unwrap();
        let g = APSeries::from_cosines(b, s, -0.1, &[(MultiIndex::unit(0), 0.7, 0.5)]).unwrap();
        let lhs = f.add(&g).unwrap().weighted_norm(0.7, 0.3).unwrap();
        let rhs = f.weighted_norm(0.7, 0.3).unwrap() + g.weighted_norm(0.7, 0.3).unwrap();
        assert!(lhs <= rhs + 1e-12 * rhs);
    }

    #[test]
    fn serialize_roundtrip() {
        let (b, s) = setup();
        let f = APSeries::from_cosines(
            b.clone(),
            s.clone(),
            1.25,
            &[
                (MultiIndex::unit(-1), 0.3, 0.0),
                (MultiIndex::unit(1), 0.2, 1.1),
            ],
        )
        .unwrap();
        let text = f.serialize().unwrap();
        let g = APSeries::deserialize(b, s, &text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn deserialize_rejects_wrong_label() {
        let (b, s) = setup();
        let text = "# apfun series v1\nset={-1,0} k=-1:1 re=0x1p-1 im=0x0p+0\n";
        assert!(APSeries::deserialize(b, s, text).is_err());
    }

    #[test]
    fn evaluate_additivity() {
        let (b, s) = setup();
        let f = APSeries::from_cosines(b.clone(), s.clone(), 0.5, &[(MultiIndex::unit(0), 1.0, 0.3)])
            .unwrap();
        let g = APSeries::from_cosines(b, s, -0.2, &[(MultiIndex::unit(1), 0.4, -0.9)]).unwrap();
        let sum = f.add(&g).unwrap();
        for &t in &[0.0, 1.7, 13.1] {
            let lhs = sum.evaluate(t).unwrap();
            let rhs = f.evaluate(t).unwrap() + g.evaluate(t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * (f.abs_sum() + g.abs_sum()));
        }
    }

    #[test]
    fn profile_series_evaluates_at_action() {
        let (b, s) = setup();
        let f = APSeries::from_cosines(b, s, 1.0, &[(MultiIndex::unit(-1), 0.5, 0.0)]).unwrap();
        let p = ActionProfile::linear(1.0, 2.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let fp = f.times_profile(&p).unwrap();
        let t: f64 = 0.7;
        let y = 1.5;
        let expect = (1.0 + 0.5 * t.cos()) * y;
        assert_relative_eq!(fp.evaluate_at(t, y).unwrap(), expect, epsilon = 1e-13);
    }

    #[test]
    fn derivative_multiplies_by_frequency() {
        let f = cosine_e1(2.0);
        let d = f.derivative_t().unwrap();
        for &t in &[0.0, 0.4, 2.2] {
            assert_relative_eq!(d.evaluate(t).unwrap(), -2.0 * t.sin(), epsilon = 1e-13);
        }
    }
}
