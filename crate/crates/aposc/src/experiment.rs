//! Long-run experiments on top of the section map: rotation numbers,
//! boundedness ensembles, and invariant curves fitted from orbits.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::apfun::{APSeries, FrequencyBasis, MultiIndex, SpatialStructure};
use crate::error::{Error, Result};
use crate::oscillator::{energy, integrate_cartesian, Forcing, OscParams, State};
use crate::poincare::scaled_map;

/// Rotation number of a section orbit from its crossing times.
#[derive(Debug, Clone)]
pub struct RotationEstimate {
    /// Richardson-accelerated value from the N and N/2 averages
    pub value: f64,
    /// plain average (t_N - t_0) / N
    pub plain: f64,
    /// spread between the two averages entering the acceleration
    pub error_estimate: f64,
    pub iterates: usize,
}

/// `(t_N - t_0) / N`, accelerated by the N/2 average; wants at least 1000
/// iterates.
pub fn rotation_number(times: &[f64]) -> Result<RotationEstimate> {
    if times.len() < 1001 {
        return Err(Error::domain(format!(
            "rotation number wants at least 1000 iterates, got {}",
            times.len().saturating_sub(1)
        )));
    }
    let n = times.len() - 1;
    let half = n / 2;
    let full = (times[n] - times[0]) / n as f64;
    let part = (times[half] - times[0]) / half as f64;
    Ok(RotationEstimate {
        value: 2.0 * full - part,
        plain: full,
        error_estimate: (full - part).abs(),
        iterates: n,
    })
}

/// One orbit of a boundedness ensemble.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    /// section seed: crossing time and scaled action
    pub t0: f64,
    pub v0: f64,
    pub r0: f64,
    /// Cartesian start
    pub start: State,
    /// final running sup of |x| + |y|
    pub max_sup: f64,
    /// (elapsed time, running sup) at log-spaced checkpoints
    pub checkpoints: Vec<(f64, f64)>,
    /// log-log growth slope of the running sup over the last two decades
    pub slope: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BoundednessReport {
    /// "ok", or "hypothesis-unmet" when the twist predicate failed upstream
    pub label: String,
    pub orbits: Vec<OrbitRecord>,
    /// largest growth slope over the clean orbits
    pub max_slope: f64,
    pub t_end: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BoundednessSetup {
    pub ensemble: usize,
    /// coupling: seeds are placed on the band r = 1 / (delta v)^2, v in (1, 2)
    pub delta: f64,
    pub t_end: f64,
    pub tol: f64,
    pub seed: u64,
    pub checkpoints: usize,
}

impl Default for BoundednessSetup {
    fn default() -> Self {
        BoundednessSetup {
            ensemble: 20,
            delta: 1e-3,
            t_end: 1e4,
            tol: 1e-10,
            seed: 42,
            checkpoints: 33,
        }
    }
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Integrate an ensemble of section-band seeds to `t_end` and track the
/// running sup of |x| + |y|. Orbits run in parallel; integrator failures are
/// recorded per orbit and the rest continue.
pub fn run_boundedness(
    p: &OscParams,
    f: &Forcing,
    twist_ok: bool,
    setup: &BoundednessSetup,
) -> Result<BoundednessReport> {
    if setup.ensemble == 0 {
        return Err(Error::domain("boundedness wants at least one orbit"));
    }
    if !(setup.delta > 0.0 && setup.delta < 1.0) {
        return Err(Error::domain(format!("bad coupling {}", setup.delta)));
    }
    if setup.checkpoints < 4 {
        return Err(Error::domain("boundedness wants at least 4 checkpoints"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let seeds: Vec<(f64, f64)> = (0..setup.ensemble)
        .map(|_| {
            (
                rng.gen_range(0.0..p.period()),
                rng.gen_range(1.05..1.95),
            )
        })
        .collect();
    let marks: Vec<f64> = (0..setup.checkpoints)
        .map(|k| {
            let frac = k as f64 / (setup.checkpoints - 1) as f64;
            setup.t_end.powf(frac)
        })
        .collect();
    let stride = p.period() / 48.0;

    let orbits: Vec<OrbitRecord> = seeds
        .par_iter()
        .map(|&(t0, v0)| {
            let r0 = 1.0 / (setup.delta * v0 * (setup.delta * v0));
            let start = State {
                x: p.rho_scale() * r0.sqrt(),
                y: 0.0,
                t: t0,
            };
            let mut rec = OrbitRecord {
                t0,
                v0,
                r0,
                start: start.clone(),
                max_sup: start.x.abs() + start.y.abs(),
                checkpoints: Vec::with_capacity(marks.len()),
                slope: 0.0,
                error: None,
            };
            match integrate_cartesian(p, &start, f, t0 + setup.t_end, setup.tol, Some(stride)) {
                Ok(traj) => {
                    let mut sup = rec.max_sup;
                    let mut next = 0usize;
                    for s in &traj.samples {
                        let elapsed = s.t - t0;
                        while next < marks.len() && elapsed >= marks[next] {
                            rec.checkpoints.push((marks[next], sup));
                            next += 1;
                        }
                        sup = sup.max(s.x.abs() + s.y.abs());
                    }
                    while next < marks.len() {
                        rec.checkpoints.push((marks[next], sup));
                        next += 1;
                    }
                    rec.max_sup = sup;
                    let tail: Vec<(f64, f64)> = rec
                        .checkpoints
                        .iter()
                        .filter(|(t, _)| *t >= setup.t_end / 100.0)
                        .map(|&(t, s)| (t.ln(), s.ln()))
                        .collect();
                    rec.slope = fit_slope(&tail);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();

    let max_slope = orbits
        .iter()
        .filter(|o| o.error.is_none())
        .fold(0.0f64, |acc, o| acc.max(o.slope));
    Ok(BoundednessReport {
        label: if twist_ok { "ok" } else { "hypothesis-unmet" }.to_string(),
        orbits,
        max_slope,
        t_end: setup.t_end,
        seed: setup.seed,
    })
}

/// Upper bound on sup |x| + |y| over the energy level of `s0` under constant
/// forcing `f0`; conserved energy makes it a bound for all time.
pub fn energy_sup_bound(p: &OscParams, s0: &State, f0: f64) -> f64 {
    let e = energy(p, s0, f0);
    let (a, b) = (p.a, p.b);
    let v_min = if f0 >= 0.0 {
        -f0 * f0 / (2.0 * a)
    } else {
        -f0 * f0 / (2.0 * b)
    };
    let x_plus = ((f0 + (f0 * f0 + 2.0 * a * e).max(0.0).sqrt()) / a).max(0.0);
    let x_minus = ((f0 - (f0 * f0 + 2.0 * b * e).max(0.0).sqrt()) / b).min(0.0);
    let y_max = (2.0 * (e - v_min)).max(0.0).sqrt();
    x_plus.max(-x_minus) + y_max
}

/// Invariant curve fitted from a section orbit.
#[derive(Debug, Clone)]
pub struct CurveFit {
    /// fitted curve v = phi(t) over the declared basis plus the return mode
    pub phi: APSeries,
    /// max pointwise deviation of the orbit from the fit
    pub residual: f64,
    pub rotation: RotationEstimate,
    /// drift rate of the crossing times: (rotation - beta) / delta
    pub alpha: f64,
    /// the extra fit frequency beta / rotation
    pub return_frequency: f64,
    /// residual within 10x the integrator tolerance and the orbit stayed in band
    pub success: bool,
    /// the orbit itself, for reporting
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct CurveSetup {
    pub t0: f64,
    pub v0: f64,
    pub delta: f64,
    pub iters: usize,
    /// order cap for the fit modes drawn from the basis
    pub kmax: u32,
    pub tol: f64,
}

impl Default for CurveSetup {
    fn default() -> Self {
        CurveSetup {
            t0: 0.0,
            v0: 1.5,
            delta: 1e-3,
            iters: 2000,
            kmax: 2,
            tol: 1e-10,
        }
    }
}

/// Iterate the scaled section map and fit `v = phi(t)` by least squares over
/// the basis modes of order at most `kmax` plus the section-return mode.
pub fn find_invariant_curve(
    p: &OscParams,
    f: &Forcing,
    basis: &Arc<FrequencyBasis>,
    structure: &Arc<SpatialStructure>,
    setup: &CurveSetup,
) -> Result<CurveFit> {
    if setup.iters < 1001 {
        return Err(Error::domain("curve fit wants at least 1001 iterates"));
    }
    let beta = p.period();
    let mut ts = Vec::with_capacity(setup.iters + 1);
    let mut vs = Vec::with_capacity(setup.iters + 1);
    let (mut t, mut v) = (setup.t0, setup.v0);
    ts.push(t);
    vs.push(v);
    for j in 0..setup.iters {
        if !(1.0..=2.0).contains(&v) {
            return Err(Error::domain(format!(
                "escape at iterate {j}: v = {v} left [1, 2]"
            )));
        }
        let step = scaled_map(p, t, v, setup.delta, f, setup.tol)?;
        t = step.t1;
        v = step.v1;
        ts.push(t);
        vs.push(v);
    }
    let rotation = rotation_number(&ts)?;
    let alpha = (rotation.value - beta) / setup.delta;
    let return_frequency = beta / rotation.value;

    // fit modes: half-space basis modes of order <= kmax, plus the return mode
    let (lo, hi) = basis.window();
    let mut modes: Vec<(MultiIndex, f64)> = Vec::new();
    for k in MultiIndex::enumerate(lo, hi, setup.kmax as u64) {
        if k.is_zero() || structure.assign(&k).is_err() || k < k.neg() {
            continue;
        }
        modes.push((k.clone(), basis.inner_frequency(&k)?));
    }
    let ret_idx = hi + 1;
    modes.push((MultiIndex::unit(ret_idx), return_frequency));

    let rows = ts.len();
    let cols = 1 + 2 * modes.len();
    let mut a = DMatrix::zeros(rows, cols);
    for (j, &tj) in ts.iter().enumerate() {
        a[(j, 0)] = 1.0;
        for (m, &(_, nu)) in modes.iter().enumerate() {
            let (sn, cs) = (nu * tj).sin_cos();
            a[(j, 1 + 2 * m)] = cs;
            a[(j, 2 + 2 * m)] = sn;
        }
    }
    let rhs = DVector::from_iterator(rows, vs.iter().copied());
    let svd = a.svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::convergence(format!("curve fit solve failed: {e}")))?;

    // assemble phi over the basis extended with the return mode
    let mut omega = Vec::with_capacity((hi - lo + 1) as usize + 1);
    for idx in lo..=hi {
        omega.push(basis.inner_frequency(&MultiIndex::unit(idx))?);
    }
    omega.push(return_frequency);
    let fit_basis = FrequencyBasis::new(lo, ret_idx, omega)?;
    let fit_elems: Vec<i32> = (lo..=ret_idx).collect();
    let fit_structure = SpatialStructure::power_family(&fit_elems, structure.rho())?;
    let mut phi = APSeries::zero(fit_basis, fit_structure);
    if coef[0] != 0.0 {
        phi.add_term(MultiIndex::zero(), Complex64::new(coef[0], 0.0))?;
    }
    for (m, (k, _)) in modes.iter().enumerate() {
        let c = Complex64::new(0.5 * coef[1 + 2 * m], -0.5 * coef[2 + 2 * m]);
        if c.norm() == 0.0 {
            continue;
        }
        phi.add_term(k.clone(), c)?;
        phi.add_term(k.neg(), c.conj())?;
    }

    let mut residual = 0.0f64;
    for (&tj, &vj) in ts.iter().zip(&vs) {
        residual = residual.max((vj - phi.evaluate(tj)?).abs());
    }
    let success = residual <= 10.0 * setup.tol;
    Ok(CurveFit {
        phi,
        residual,
        rotation,
        alpha,
        return_frequency,
        success,
        samples: ts.into_iter().zip(vs).collect(),
    })
}

/// Re-test invariance: apply the scaled map to fresh points on the fitted
/// curve and measure how far the images fall from it.
pub fn invariance_defect(
    p: &OscParams,
    f: &Forcing,
    delta: f64,
    fit: &CurveFit,
    n_points: usize,
    tol: f64,
) -> Result<f64> {
    if n_points == 0 {
        return Err(Error::domain("invariance re-test wants points"));
    }
    let t_base = fit.samples.first().map(|s| s.0).unwrap_or(0.0);
    let span = fit.rotation.value * fit.samples.len() as f64;
    let mut worst = 0.0f64;
    for i in 0..n_points {
        let t = t_base + 0.37 + span * (i as f64 + 0.5) / n_points as f64;
        let v = fit.phi.evaluate(t)?;
        let step = scaled_map(p, t, v, delta, f, tol)?;
        worst = worst.max((step.v1 - fit.phi.evaluate(step.t1)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::r_star_from_majorant;

    #[test]
    fn rotation_number_is_exact_on_a_rigid_shift() {
        let beta = 1.5 * std::f64::consts::PI;
        let times: Vec<f64> = (0..=1500).map(|j| 0.3 + j as f64 * beta).collect();
        let r = rotation_number(&times).unwrap();
        assert!((r.value - beta).abs() < 1e-12);
        assert!(r.error_estimate < 1e-12);
        assert_eq!(r.iterates, 1500);

        let short: Vec<f64> = (0..=900).map(|j| j as f64).collect();
        assert!(rotation_number(&short).is_err());
    }

    #[test]
    fn rotation_of_the_constant_forced_map_tracks_the_twist() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::constant(1.0);
        let delta = 1e-3;
        let v0 = 1.5;
        let mut ts = vec![0.0];
        let (mut t, mut v) = (0.0, v0);
        for _ in 0..1200 {
            let step = scaled_map(&p, t, v, delta, &f, 1e-10).unwrap();
            t = step.t1;
            v = step.v1;
            ts.push(t);
        }
        let rot = rotation_number(&ts).unwrap();
        let mean_phi = 0.9185586535436918;
        let predicted = p.period() + delta * mean_phi * v0;
        assert!(
            (rot.value - predicted).abs() < 5.0 * delta * delta,
            "rotation {} vs {}",
            rot.value,
            predicted
        );
    }

    #[test]
    fn unforced_ensemble_plateaus_after_one_period() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::zero();
        let setup = BoundednessSetup {
            ensemble: 3,
            delta: 0.05,
            t_end: 200.0,
            tol: 1e-10,
            seed: 9,
            checkpoints: 17,
        };
        let report = run_boundedness(&p, &f, true, &setup).unwrap();
        assert_eq!(report.label, "ok");
        assert_eq!(report.orbits.len(), 3);
        for orbit in &report.orbits {
            assert!(orbit.error.is_none());
            let after_period: Vec<f64> = orbit
                .checkpoints
                .iter()
                .filter(|(t, _)| *t >= p.period())
                .map(|&(_, s)| s)
                .collect();
            let last = *after_period.last().unwrap();
            for s in &after_period {
                assert!(
                    (s - last).abs() < 5e-3 * last,
                    "sup creeps: {s} vs {last}"
                );
            }
        }
        assert!(report.max_slope.abs() < 5e-3, "slope {}", report.max_slope);
    }

    #[test]
    fn constant_forcing_respects_the_energy_diameter() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::constant(1.0);
        let setup = BoundednessSetup {
            ensemble: 3,
            delta: 0.05,
            t_end: 300.0,
            tol: 1e-10,
            seed: 4,
            checkpoints: 9,
        };
        let report = run_boundedness(&p, &f, true, &setup).unwrap();
        for orbit in &report.orbits {
            assert!(orbit.error.is_none());
            let bound = energy_sup_bound(&p, &orbit.start, 1.0);
            assert!(
                orbit.max_sup <= bound,
                "sup {} above the energy bound {bound}",
                orbit.max_sup
            );
        }
    }

    #[test]
    fn hypothesis_unmet_label_is_passed_through() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::zero();
        let setup = BoundednessSetup {
            ensemble: 1,
            t_end: 50.0,
            checkpoints: 5,
            ..BoundednessSetup::default()
        };
        let report = run_boundedness(&p, &f, false, &setup).unwrap();
        assert_eq!(report.label, "hypothesis-unmet");
    }

    fn sqrt2_objects() -> (Arc<FrequencyBasis>, Arc<SpatialStructure>) {
        let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
        let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
        (basis, structure)
    }

    #[test]
    fn constant_forcing_fits_a_flat_curve() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::constant(1.0);
        let (basis, structure) = sqrt2_objects();
        let setup = CurveSetup {
            iters: 1100,
            ..CurveSetup::default()
        };
        let fit = find_invariant_curve(&p, &f, &basis, &structure, &setup).unwrap();
        assert!(fit.success);
        assert!(fit.residual < 1e-8, "residual {}", fit.residual);
        // phi is constant: every oscillatory coefficient is negligible
        for (k, c) in fit.phi.terms() {
            if !k.is_zero() {
                assert!(c.magnitude() < 1e-8, "mode {k} with {}", c.magnitude());
            }
        }
        let c0 = fit.phi.coefficient(&MultiIndex::zero()).unwrap();
        assert!((c0.magnitude() - 1.5).abs() < 1e-6);
    }

    #[test]
    fn zero_forcing_keeps_every_line_invariant() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::zero();
        let (basis, structure) = sqrt2_objects();
        let setup = CurveSetup {
            iters: 1100,
            v0: 1.25,
            ..CurveSetup::default()
        };
        let fit = find_invariant_curve(&p, &f, &basis, &structure, &setup).unwrap();
        assert!(fit.success);
        assert!(fit.residual < 1e-9);
        assert!((fit.rotation.value - p.period()).abs() < 1e-9);
        let defect = invariance_defect(&p, &f, setup.delta, &fit, 50, setup.tol).unwrap();
        assert!(defect <= (2.0 * fit.residual).max(1e-12), "defect {defect}");
    }

    #[test]
    fn violent_kicks_escape_the_band() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::cosine(0.0, 1.0, 2f64.sqrt());
        let floor = r_star_from_majorant(&p, 1.0);
        let delta = (0.25 / floor.sqrt()) * 0.8;
        let (mut t, mut v) = (0.0, 1.02);
        let mut escaped = None;
        for j in 0..500 {
            if !(1.0..=2.0).contains(&v) {
                escaped = Some(j);
                break;
            }
            match scaled_map(&p, t, v, delta, &f, 1e-9) {
                Ok(step) => {
                    t = step.t1;
                    v = step.v1;
                }
                Err(_) => {
                    escaped = Some(j);
                    break;
                }
            }
        }
        assert!(escaped.is_some(), "orbit unexpectedly stayed in band");
    }
}
