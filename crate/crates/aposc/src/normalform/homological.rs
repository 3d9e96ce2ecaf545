//! Truncation and the small-divisor difference equation, plus the one-step
//! near-identity conjugation that trades the x-dependent drift for a
//! quadratically small remainder.

use num_complex::Complex64;

use crate::apfun::{APSeries, Coef};
use crate::error::{Error, Result};
use crate::normalform::{shift_series, TwistMapModel};

/// Split of a series by the graded cutoff mu [[k]] + rho |k| < n.
#[derive(Debug, Clone)]
pub struct Truncation {
    /// The constant mode, kept aside: it drives the twist, not the solve.
    pub constant: APSeries,
    /// Modes with 0 < mu [[k]] + rho |k| < n.
    pub head: APSeries,
    /// Everything at or beyond the cutoff.
    pub tail: APSeries,
    /// Measured norm of the tail at the shrunken weights (m - mu, r - rho).
    pub tail_norm: f64,
    /// e^{-n} times the full-weight norm of the input: the analytic bound
    /// the measured tail must respect.
    pub tail_bound: f64,
}

pub fn truncate_series(
    l: &APSeries,
    m: f64,
    r: f64,
    mu: f64,
    rho: f64,
    n: f64,
) -> Result<Truncation> {
    if !(mu > 0.0) || mu >= m || !(rho > 0.0) || rho >= r {
        return Err(Error::domain(
            "truncation weights must satisfy 0 < mu < m and 0 < rho < r",
        ));
    }
    if !(n >= 0.0) {
        return Err(Error::domain("cutoff must be nonnegative"));
    }
    let mut constant = APSeries::zero(l.basis().clone(), l.structure().clone());
    let mut head = APSeries::zero(l.basis().clone(), l.structure().clone());
    let mut tail = APSeries::zero(l.basis().clone(), l.structure().clone());
    for (k, coef) in l.terms() {
        if k.is_zero() {
            constant.insert(k.clone(), coef.clone())?;
            continue;
        }
        let grade = mu * l.structure().support_weight(k)? + rho * k.order() as f64;
        if grade < n {
            head.insert(k.clone(), coef.clone())?;
        } else {
            tail.insert(k.clone(), coef.clone())?;
        }
    }
    let tail_norm = tail.weighted_norm(m - mu, r - rho)?;
    let tail_bound = (-n).exp() * l.weighted_norm(m, r)?;
    Ok(Truncation { constant, head, tail, tail_norm, tail_bound })
}

/// Solve Phi(x + beta, y) - Phi(x, y) + h(x, y) = 0 mode by mode:
/// Phi_k = -h_k / (e^{i <k, omega> beta} - 1). Returns the solution and the
/// smallest divisor modulus encountered.
pub fn solve_homological(h: &APSeries, beta: f64, divisor_min: f64) -> Result<(APSeries, f64)> {
    if !(divisor_min > 0.0) {
        return Err(Error::domain("divisor floor must be positive"));
    }
    let mut phi = APSeries::zero(h.basis().clone(), h.structure().clone());
    let mut floor = f64::INFINITY;
    for (k, coef) in h.terms() {
        if k.is_zero() {
            return Err(Error::resonance(
                format!("{k}"),
                "constant mode has divisor zero; remove it before solving",
            ));
        }
        let nu = h.basis().inner_frequency(k)?;
        let d = Complex64::new(0.0, nu * beta).exp() - 1.0;
        let dn = d.norm();
        if dn < divisor_min {
            return Err(Error::resonance(
                format!("{k}"),
                format!("divisor {dn:.3e} below the floor {divisor_min:.3e}"),
            ));
        }
        floor = floor.min(dn);
        phi.insert(k.clone(), coef.scale(-1.0 / d))?;
    }
    if phi.is_empty() {
        floor = f64::INFINITY;
    }
    Ok((phi, floor))
}

/// Coefficient-space residual of the difference equation: the largest
/// relative magnitude of Phi_k (e^{i nu beta} - 1) + h_k.
pub fn difference_residual(phi: &APSeries, h: &APSeries, beta: f64) -> Result<f64> {
    let shifted = shift_series(phi, beta)?;
    let lhs = shifted.sub(phi)?.add(h)?;
    let mut worst = 0.0f64;
    for (k, coef) in lhs.terms() {
        let scale = h
            .coefficient(k)
            .map(|c| c.magnitude())
            .unwrap_or(0.0)
            .max(1e-300);
        worst = worst.max(coef.magnitude() / scale);
    }
    Ok(worst)
}

/// The solved generator pair for the two difference equations.
#[derive(Debug, Clone)]
pub struct HomologicalSolution {
    pub phi: APSeries,
    pub psi: APSeries,
    /// Smallest divisor modulus across both solves.
    pub divisor_floor: f64,
}

pub fn solve_homological_pair(
    h_l: &APSeries,
    h_m: &APSeries,
    beta: f64,
    divisor_min: f64,
) -> Result<HomologicalSolution> {
    let (phi, f1) = solve_homological(h_l, beta, divisor_min)?;
    let (psi, f2) = solve_homological(h_m, beta, divisor_min)?;
    Ok(HomologicalSolution { phi, psi, divisor_floor: f1.min(f2) })
}

/// The conjugated sampler U o M o U^{-1} with U = id + delta (Phi, Psi).
pub struct ConjugatedMap<'a> {
    pub model: &'a TwistMapModel,
    pub sol: &'a HomologicalSolution,
    /// Analytic bound on the contraction factor of the inverse iteration.
    pub contraction: f64,
    pub l0: crate::apfun::ActionProfile,
    pub l0_prime: crate::apfun::ActionProfile,
}

/// Majorant of the x- and y-derivatives of a series over its action band.
fn gradient_majorant(s: &APSeries) -> Result<(f64, f64)> {
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (k, coef) in s.terms() {
        let nu = s.basis().inner_frequency(k)?.abs();
        dx += nu * coef.magnitude();
        if let Coef::Profile(p) = coef {
            dy += p.derivative().majorant();
        }
    }
    Ok((dx, dy))
}

#[allow(non_snake_case)]
pub fn conjugate_U<'a>(
    model: &'a TwistMapModel,
    sol: &'a HomologicalSolution,
) -> Result<ConjugatedMap<'a>> {
    let (px, py) = gradient_majorant(&sol.phi)?;
    let (qx, qy) = gradient_majorant(&sol.psi)?;
    let contraction = model.delta * (px + py).max(qx + qy);
    if !(contraction < 0.5) {
        return Err(Error::domain(format!(
            "inverse iteration is not a contraction: factor {contraction:.3e}"
        )));
    }
    let l0 = model.l0_profile()?;
    let l0_prime = l0.derivative();
    Ok(ConjugatedMap { model, sol, contraction, l0, l0_prime })
}

impl ConjugatedMap<'_> {
    /// U(x, y) = (x + delta Phi, y + delta Psi).
    pub fn forward(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let d = self.model.delta;
        Ok((
            x + d * self.sol.phi.evaluate_at(x, y)?,
            y + d * self.sol.psi.evaluate_at(x, y)?,
        ))
    }

    /// U^{-1} by fixed-point iteration.
    pub fn inverse(&self, theta: f64, r: f64) -> Result<(f64, f64)> {
        let d = self.model.delta;
        let (mut x, mut y) = (theta, r);
        let tol = 1e-14 * (1.0 + theta.abs() + r.abs());
        for _ in 0..200 {
            let xn = theta - d * self.sol.phi.evaluate_at(x, y)?;
            let yn = r - d * self.sol.psi.evaluate_at(x, y)?;
            let step = (xn - x).abs().max((yn - y).abs());
            x = xn;
            y = yn;
            if step <= tol {
                return Ok((x, y));
            }
        }
        Err(Error::convergence("inverse iteration failed to settle"))
    }

    /// One application of the conjugated map.
    pub fn apply(&self, theta: f64, r: f64) -> Result<(f64, f64)> {
        let (x, y) = self.inverse(theta, r)?;
        let (x1, y1) = self.model.eval(x, y)?;
        self.forward(x1, y1)
    }
}

/// Before/after measurement of the x-dependent drift: sup over a grid of
/// |x1 - x - beta - delta l0(y)|, for the raw model and its conjugation.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub raw: f64,
    pub conjugated: f64,
    pub ratio: f64,
}

pub fn drift_reduction(
    conj: &ConjugatedMap<'_>,
    x_span: f64,
    x_n: usize,
    y_n: usize,
) -> Result<DriftReport> {
    if x_n < 8 || y_n < 2 {
        return Err(Error::domain("drift grid too coarse"));
    }
    let model = conj.model;
    let d = model.delta;
    // Keep clear of the band edges so the inverse iteration stays inside.
    let pad = 0.1 * (model.y_hi - model.y_lo);
    let mut raw = 0.0f64;
    let mut after = 0.0f64;
    for i in 0..x_n {
        let x = x_span * i as f64 / x_n as f64;
        for j in 0..y_n {
            let y = model.y_lo + pad + (model.y_hi - model.y_lo - 2.0 * pad) * j as f64 / (y_n - 1) as f64;
            let base = x + model.beta + d * conj.l0.eval(y).re;
            let (x1, _) = model.eval(x, y)?;
            raw = raw.max((x1 - base).abs());
            let (t1, _) = conj.apply(x, y)?;
            after = after.max((t1 - base).abs());
        }
    }
    let ratio = if after > 0.0 { raw / after } else { f64::INFINITY };
    Ok(DriftReport { raw, conjugated: after, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfun::{
        ActionProfile, FrequencyBasis, MultiIndex, Ratio, RationalRelation, RelationValue,
        SpatialStructure,
    };
    use crate::normalform::model_from_oscillator;
    use crate::oscillator::OscParams;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn sqrt2_series(amp: f64, phase: f64) -> APSeries {
        let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        APSeries::from_cosines(
            Arc::clone(&basis),
            Arc::clone(&structure),
            0.0,
            &[(MultiIndex::unit(1), amp, phase)],
        )
        .unwrap()
    }

    #[test]
    fn truncation_partitions_exactly() {
        let basis = FrequencyBasis::new(1, 2, vec![2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1, 2], 3.0).unwrap();
        let s = APSeries::from_cosines(
            Arc::clone(&basis),
            Arc::clone(&structure),
            0.5,
            &[
                (MultiIndex::unit(1), 1.0, 0.0),
                (MultiIndex::unit(2), 0.5, 0.2),
                (MultiIndex::from_pairs(&[(1, 2), (2, 1)]).unwrap(), 0.25, 0.9),
            ],
        )
        .unwrap();
        // Large cutoff: everything nonconstant lands in the head.
        let t = truncate_series(&s, 2.0, 1.0, 0.5, 0.25, 1e9).unwrap();
        assert_eq!(t.head.len(), s.len() - 1);
        assert!(t.tail.is_empty());
        assert_eq!(t.tail_norm, 0.0);
        // Zero cutoff: empty head.
        let t0 = truncate_series(&s, 2.0, 1.0, 0.5, 0.25, 0.0).unwrap();
        assert!(t0.head.is_empty());
        // Reconstruction is exact term by term.
        let t1 = truncate_series(&s, 2.0, 1.0, 0.5, 0.25, 2.0).unwrap();
        let back = t1.constant.add(&t1.head).unwrap().add(&t1.tail).unwrap();
        for i in 0..30 {
            let x = 0.41 * i as f64;
            assert_relative_eq!(back.evaluate(x).unwrap(), s.evaluate(x).unwrap(), epsilon = 1e-13);
        }
        assert!(t1.tail_norm <= t1.tail_bound * (1.0 + 1e-12));
        assert!(truncate_series(&s, 2.0, 1.0, 2.5, 0.25, 1.0).is_err());
    }

    #[test]
    fn single_mode_beyond_cutoff_obeys_the_bound() {
        let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        let s = APSeries::from_cosines(
            Arc::clone(&basis),
            Arc::clone(&structure),
            0.0,
            &[(MultiIndex::unit(1), 0.8, 0.0)],
        )
        .unwrap();
        // Weight of {1}: 1 + ln^3 2; grade with mu = rho = 1: [[k]] + |k|.
        let w = 1.0 + (2f64.ln()).powi(3);
        let grade = w + 1.0;
        let t = truncate_series(&s, 2.0, 2.0, 1.0, 1.0, grade - 0.1).unwrap();
        assert!(t.head.is_empty());
        assert_eq!(t.tail.len(), 2);
        assert!(t.tail_norm <= t.tail_bound);
        // Just above the grade the modes flip into the head.
        let t2 = truncate_series(&s, 2.0, 2.0, 1.0, 1.0, grade + 0.1).unwrap();
        assert_eq!(t2.head.len(), 2);
        assert!(t2.tail.is_empty());
    }

    #[test]
    fn homological_solution_is_exact_in_coefficients() {
        let h = sqrt2_series(1.0, 0.0);
        let beta = 1.0;
        let (phi, floor) = solve_homological(&h, beta, 1e-8).unwrap();
        // Divisor for nu = sqrt 2, beta = 1: |e^{i sqrt 2} - 1| = 2 sin(sqrt2 / 2).
        let expected = 2.0 * (2f64.sqrt() / 2.0).sin();
        assert_relative_eq!(floor, expected, epsilon = 1e-14);
        let k = MultiIndex::unit(1);
        let d = Complex64::new(0.0, 2f64.sqrt()).exp() - 1.0;
        let want = Complex64::new(-0.5, 0.0) / d;
        match phi.coefficient(&k).unwrap() {
            Coef::Scalar(c) => {
                assert_relative_eq!(c.re, want.re, epsilon = 1e-15);
                assert_relative_eq!(c.im, want.im, epsilon = 1e-15);
            }
            _ => panic!("expected scalar"),
        }
        assert!(difference_residual(&phi, &h, beta).unwrap() <= 1e-14);
        // Empty input gives the empty solution.
        let z = APSeries::zero(h.basis().clone(), h.structure().clone());
        let (phi0, _) = solve_homological(&z, beta, 1e-8).unwrap();
        assert!(phi0.is_empty());
    }

    #[test]
    fn random_series_residuals_stay_tiny() {
        let basis = FrequencyBasis::new(1, 2, vec![2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1, 2], 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let beta = 1.5 * std::f64::consts::PI;
        for _ in 0..10 {
            let mut h = APSeries::zero(Arc::clone(&basis), Arc::clone(&structure));
            for k in MultiIndex::enumerate(1, 2, 3) {
                if rng.gen_bool(0.6) {
                    h.add_term(
                        k,
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                    .unwrap();
                }
            }
            if h.is_empty() {
                continue;
            }
            let (phi, _) = solve_homological(&h, beta, 1e-8).unwrap();
            assert!(difference_residual(&phi, &h, beta).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn declared_resonance_is_rejected_by_name() {
        let basis = FrequencyBasis::with_relations(
            1,
            1,
            vec![4.0 / 3.0],
            vec![RationalRelation {
                combo: MultiIndex::unit(1),
                value: RelationValue::Rational(Ratio::new(4, 3).unwrap()),
            }],
        )
        .unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        let mut h = APSeries::zero(Arc::clone(&basis), Arc::clone(&structure));
        h.add_term(MultiIndex::unit(1), Complex64::new(0.3, 0.0)).unwrap();
        // nu beta = (4/3)(3 pi / 2) = 2 pi: divisor vanishes.
        let err = solve_homological(&h, 1.5 * std::f64::consts::PI, 1e-8).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("1:1"), "message should name the mode: {msg}");
    }

    #[test]
    fn constant_mode_cannot_be_solved() {
        let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        let h = APSeries::constant(Arc::clone(&basis), Arc::clone(&structure), 1.0).unwrap();
        assert!(solve_homological(&h, 1.0, 1e-8).is_err());
    }

    #[test]
    fn integrable_model_is_untouched() {
        let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        let mut l = APSeries::zero(Arc::clone(&basis), Arc::clone(&structure));
        let profile = ActionProfile::linear(1.0, 2.0, 0.25, Complex64::new(0.9, 0.0)).unwrap();
        l.insert(MultiIndex::zero(), Coef::Profile(profile)).unwrap();
        let m = APSeries::zero(Arc::clone(&basis), Arc::clone(&structure));
        let model = TwistMapModel::new(
            1.5 * std::f64::consts::PI,
            1e-3,
            l,
            m.clone(),
            m.clone(),
            m,
            1.0,
            2.0,
            0.25,
        )
        .unwrap();
        // Nothing to remove: the generator pair is empty.
        let zero = APSeries::zero(model.l.basis().clone(), model.l.structure().clone());
        let sol = solve_homological_pair(&zero, &zero, model.beta, 1e-8).unwrap();
        let conj = conjugate_U(&model, &sol).unwrap();
        assert_eq!(conj.contraction, 0.0);
        for (x, y) in [(0.0, 1.5), (2.2, 1.2)] {
            let direct = model.eval(x, y).unwrap();
            let via = conj.apply(x, y).unwrap();
            assert_eq!(direct, via);
        }
        // l0' is reported for the twist hypothesis.
        assert_relative_eq!(conj.l0_prime.eval(1.5).re, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn conjugation_reduces_oscillator_drift_tenfold() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        let f = APSeries::from_cosines(
            Arc::clone(&basis),
            Arc::clone(&structure),
            1.0,
            &[(MultiIndex::unit(1), 0.3, 0.0)],
        )
        .unwrap();
        let model = model_from_oscillator(&p, &f, 1e-3, 1.0, 2.0, 0.25).unwrap();
        let zero = MultiIndex::zero();
        let mut h_l = model.l.clone();
        h_l.remove(&zero);
        let mut h_m = model.m.clone();
        h_m.remove(&zero);
        let sol = solve_homological_pair(&h_l, &h_m, model.beta, 1e-8).unwrap();
        let conj = conjugate_U(&model, &sol).unwrap();
        let report = drift_reduction(&conj, 60.0, 96, 5).unwrap();
        assert!(report.raw > 1e-5, "raw drift too small: {}", report.raw);
        assert!(
            report.ratio >= 10.0,
            "reduction {} (raw {:.3e} -> {:.3e})",
            report.ratio,
            report.raw,
            report.conjugated
        );
    }

    #[test]
    fn contraction_guard_trips_on_large_generators() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let mut f = sqrt2_series(0.3, 0.0);
        f.add_term(MultiIndex::zero(), Complex64::new(1.0, 0.0)).unwrap();
        let model = model_from_oscillator(&p, &f, 0.9, 1.0, 2.0, 0.25).unwrap();
        let mut phi = APSeries::zero(model.l.basis().clone(), model.l.structure().clone());
        phi.add_term(MultiIndex::unit(1), Complex64::new(10.0, 0.0)).unwrap();
        let sol = HomologicalSolution {
            phi,
            psi: APSeries::zero(model.l.basis().clone(), model.l.structure().clone()),
            divisor_floor: 1.0,
        };
        // delta * sup|d Phi / dx| = 0.9 * 10 sqrt 2: far past the guard.
        assert!(conjugate_U(&model, &sol).is_err());
    }
}
