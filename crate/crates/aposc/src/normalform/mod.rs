//! Normal-form transformations for the near-integrable twist model: Fourier
//! truncation, small-divisor difference equations, one near-identity
//! conjugation step, and the resonant first-integral frame.

mod homological;
mod resonant;

pub use homological::{
    conjugate_U, difference_residual, drift_reduction, solve_homological, solve_homological_pair,
    truncate_series, ConjugatedMap, DriftReport, HomologicalSolution, Truncation,
};
pub use resonant::{
    build_resonant_frame, oscillator_resonant_integral, resonant_split, FrameInput, FrameTables,
    ResonantFrame, ResonantIntegral, SplitSeries, TrigTable,
};

use num_complex::Complex64;

use crate::apfun::{APSeries, ActionProfile, Coef};
use crate::error::{Error, Result};
use crate::oscillator::OscParams;
use crate::poincare::{phi_scale, twist_series};

/// The near-integrable section-map model: x1 = x + beta + delta (l + f),
/// y1 = y + delta (m + g), with l, m carrying action profiles over the band
/// [y_lo, y_hi] and f, g reserved for higher-order perturbations.
#[derive(Debug, Clone)]
pub struct TwistMapModel {
    pub beta: f64,
    pub delta: f64,
    pub l: APSeries,
    pub m: APSeries,
    pub fpert: APSeries,
    pub gpert: APSeries,
    pub y_lo: f64,
    pub y_hi: f64,
    /// Analyticity halfwidth carried by the action profiles.
    pub strip: f64,
}

impl TwistMapModel {
    pub fn new(
        beta: f64,
        delta: f64,
        l: APSeries,
        m: APSeries,
        fpert: APSeries,
        gpert: APSeries,
        y_lo: f64,
        y_hi: f64,
        strip: f64,
    ) -> Result<Self> {
        if !beta.is_finite() || beta == 0.0 {
            return Err(Error::domain("rotation beta must be finite and nonzero"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain("delta must lie in (0, 1)"));
        }
        if !(y_lo < y_hi) || !(strip > 0.0) {
            return Err(Error::domain("action band must be a proper interval"));
        }
        for other in [&m, &fpert, &gpert] {
            if !std::sync::Arc::ptr_eq(l.basis(), other.basis())
                || !std::sync::Arc::ptr_eq(l.structure(), other.structure())
            {
                return Err(Error::domain(
                    "model components must share one basis and structure",
                ));
            }
        }
        Ok(TwistMapModel { beta, delta, l, m, fpert, gpert, y_lo, y_hi, strip })
    }

    /// Apply the model map to a point.
    pub fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let lx = self.l.evaluate_at(x, y)? + self.fpert.evaluate_at(x, y)?;
        let mx = self.m.evaluate_at(x, y)? + self.gpert.evaluate_at(x, y)?;
        Ok((x + self.beta + self.delta * lx, y + self.delta * mx))
    }

    /// The x-independent drift profile l0(y): the constant mode of l.
    pub fn l0_profile(&self) -> Result<ActionProfile> {
        let zero = crate::apfun::MultiIndex::zero();
        match self.l.coefficient(&zero) {
            None => ActionProfile::constant(self.y_lo, self.y_hi, self.strip, Complex64::new(0.0, 0.0)),
            Some(Coef::Scalar(c)) => ActionProfile::constant(self.y_lo, self.y_hi, self.strip, *c),
            Some(Coef::Profile(p)) => Ok(p.clone()),
        }
    }

    /// Model with the same geometry but new series content.
    pub fn with_series(&self, l: APSeries, m: APSeries) -> Result<Self> {
        TwistMapModel::new(
            self.beta,
            self.delta,
            l,
            m,
            self.fpert.clone(),
            self.gpert.clone(),
            self.y_lo,
            self.y_hi,
            self.strip,
        )
    }
}

/// Build the first-order section-map model of the forced oscillator on the
/// scaled band: l = Phi(t0) v, m = Psi(t0) v^2, beta the base period.
pub fn model_from_oscillator(
    p: &OscParams,
    f: &APSeries,
    delta: f64,
    y_lo: f64,
    y_hi: f64,
    strip: f64,
) -> Result<TwistMapModel> {
    let beta = std::f64::consts::TAU * p.omega_tilde();
    let (l_series, m_series) = twist_series(p, f)?;
    let s = phi_scale(p);
    let lin = ActionProfile::linear(y_lo, y_hi, strip, Complex64::new(1.0, 0.0))?;
    let quad = lin.mul(&lin)?;
    let l = l_series.scale(Complex64::new(s, 0.0)).times_profile(&lin)?;
    let m = m_series.scale(Complex64::new(-s, 0.0)).times_profile(&quad)?;
    let zero = APSeries::zero(f.basis().clone(), f.structure().clone());
    TwistMapModel::new(beta, delta, l, m, zero.clone(), zero, y_lo, y_hi, strip)
}

/// Multiply each mode by e^{i <k, omega> beta}: the series precomposed with
/// the rigid shift x -> x + beta.
pub fn shift_series(s: &APSeries, beta: f64) -> Result<APSeries> {
    let mut out = APSeries::zero(s.basis().clone(), s.structure().clone());
    for (k, coef) in s.terms() {
        let nu = s.basis().inner_frequency(k)?;
        let rot = Complex64::new(0.0, nu * beta).exp();
        out.insert(k.clone(), coef.scale(rot))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfun::{FrequencyBasis, MultiIndex, SpatialStructure};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn shift_matches_pointwise_translation() {
        let basis = FrequencyBasis::new(0, 1, vec![2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[0, 1], 3.0).unwrap();
        let s = APSeries::from_cosines(
            Arc::clone(&basis),
            Arc::clone(&structure),
            0.2,
            &[
                (MultiIndex::unit(0), 0.7, 0.3),
                (MultiIndex::unit(1), 0.4, 1.9),
            ],
        )
        .unwrap();
        let beta = 1.5 * std::f64::consts::PI;
        let shifted = shift_series(&s, beta).unwrap();
        for i in 0..20 {
            let x = 0.37 * i as f64 - 3.0;
            assert_relative_eq!(
                shifted.evaluate(x).unwrap(),
                s.evaluate(x + beta).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn oscillator_model_matches_twist_values() {
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
        let forcing = crate::oscillator::Forcing::compile(&f).unwrap();
        let sc = phi_scale(&p);
        for (x, y) in [(0.0, 1.5), (0.8, 1.2), (2.9, 1.9)] {
            let (lv, mv) = crate::poincare::twist_value(&p, &forcing, x).unwrap();
            let (x1, y1) = model.eval(x, y).unwrap();
            assert_relative_eq!(x1, x + model.beta + 1e-3 * sc * lv * y, epsilon = 1e-9);
            assert_relative_eq!(y1, y - 1e-3 * sc * mv * y * y, epsilon = 1e-9);
        }
        // l0 profile: constant Fourier mode times the linear action factor.
        let l0 = model.l0_profile().unwrap();
        let (lv_const, _) =
            crate::poincare::twist_value(&p, &crate::oscillator::Forcing::constant(1.0), 0.0)
                .unwrap();
        assert_relative_eq!(l0.eval(1.7).re, sc * lv_const * 1.7, epsilon = 1e-9);
    }

    #[test]
    fn model_validation() {
        let basis = FrequencyBasis::new(0, 0, vec![1.0]).unwrap();
        let structure = SpatialStructure::power_family(&[0], 3.0).unwrap();
        let z = APSeries::zero(Arc::clone(&basis), Arc::clone(&structure));
        assert!(TwistMapModel::new(
            1.0, 0.5, z.clone(), z.clone(), z.clone(), z.clone(), 1.0, 2.0, 0.2
        )
        .is_ok());
        assert!(TwistMapModel::new(
            1.0, 1.5, z.clone(), z.clone(), z.clone(), z.clone(), 1.0, 2.0, 0.2
        )
        .is_err());
        assert!(TwistMapModel::new(
            0.0, 0.5, z.clone(), z.clone(), z.clone(), z.clone(), 1.0, 2.0, 0.2
        )
        .is_err());
        let other_basis = FrequencyBasis::new(0, 0, vec![1.0]).unwrap();
        let w = APSeries::zero(other_basis, Arc::clone(&structure));
        assert!(TwistMapModel::new(1.0, 0.5, z.clone(), w, z.clone(), z, 1.0, 2.0, 0.2).is_err());
    }
}
