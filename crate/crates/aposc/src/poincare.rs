//! Section map of the forced oscillator: one revolution of the angle flow
//! between successive passages of the positive x-axis, its first-order twist
//! coefficients, the scaled (v, delta) chart, and the expansion-order checks
//! that pin down the remainder sizes.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::apfun::{APSeries, Coef};
use crate::error::{Error, Result};
use crate::num::linear_fit;
use crate::num::quad::{quad_complex, quad_pieces};
use crate::num::rk::Stats;
use crate::oscillator::{integrate_theta, r_star_from_majorant, Forcing, OscParams};

/// Endpoint of one revolution of the section flow.
#[derive(Debug, Clone)]
pub struct PoincareResult {
    pub t1: f64,
    pub r1: f64,
    /// Deviations: t1 = t0 + 2 pi omega_tilde + w1, sqrt(r1) = sqrt(r0) + u1.
    pub w1: f64,
    pub u1: f64,
    pub min_r: f64,
    pub stats: Stats,
}

/// The map (t0, r0) -> (t1, r1): follow the angle flow through one full
/// revolution. Requires working clearance above the action floor.
pub fn poincare_map(
    p: &OscParams,
    t0: f64,
    r0: f64,
    f: &Forcing,
    tol: f64,
) -> Result<PoincareResult> {
    let floor = r_star_from_majorant(p, f.majorant());
    if r0 < 4.0 * floor {
        return Err(Error::domain(format!(
            "initial action {r0:.3e} below the working clearance {:.3e}",
            4.0 * floor
        )));
    }
    let run = integrate_theta(p, t0, r0, f, tol, None, 0)?;
    Ok(PoincareResult {
        t1: run.t1,
        r1: run.r1,
        w1: run.w1,
        u1: run.u1,
        min_r: run.min_r,
        stats: run.stats,
    })
}

/// L and M at a single section time: integrals of f(t0 + omega_tilde theta)
/// against C and S over one revolution, split at the kink angles.
pub fn twist_value(p: &OscParams, f: &Forcing, t0: f64) -> Result<(f64, f64)> {
    let wt = p.omega_tilde();
    let breaks = p.kink_thetas();
    let lc = quad_pieces(
        &|theta: f64| f.eval(t0 + wt * theta) * p.base_c(wt * theta),
        0.0,
        TAU,
        &breaks,
        1e-11,
    )?;
    let ms = quad_pieces(
        &|theta: f64| f.eval(t0 + wt * theta) * p.base_s(wt * theta),
        0.0,
        TAU,
        &breaks,
        1e-11,
    )?;
    Ok((lc, ms))
}

/// First-order coefficient scale: Phi = (omega_tilde^2 rho / 2) L and
/// Psi = -(omega_tilde^2 rho / 2) M.
pub fn phi_scale(p: &OscParams) -> f64 {
    let wt = p.omega_tilde();
    0.5 * wt * wt * p.rho_scale()
}

/// Twist tables over a uniform section-time grid.
#[derive(Debug, Clone)]
pub struct TwistCoefficients {
    pub t0: Vec<f64>,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub min_abs_l: f64,
    pub span: f64,
}

pub fn twist_coefficients(
    p: &OscParams,
    f: &Forcing,
    grid_n: usize,
    span: f64,
) -> Result<TwistCoefficients> {
    if grid_n < 64 {
        return Err(Error::domain("twist grid needs at least 64 points"));
    }
    if !(span > 0.0) {
        return Err(Error::domain("twist grid span must be positive"));
    }
    let t0: Vec<f64> = (0..grid_n).map(|i| span * i as f64 / grid_n as f64).collect();
    let rows: Vec<Result<(f64, f64)>> = t0.par_iter().map(|&t| twist_value(p, f, t)).collect();
    let mut l = Vec::with_capacity(grid_n);
    let mut m = Vec::with_capacity(grid_n);
    for row in rows {
        let (lv, mv) = row?;
        l.push(lv);
        m.push(mv);
    }
    let s = phi_scale(p);
    let phi: Vec<f64> = l.iter().map(|&v| s * v).collect();
    let psi: Vec<f64> = m.iter().map(|&v| -s * v).collect();
    let min_abs_l = l.iter().fold(f64::INFINITY, |acc, &v| acc.min(v.abs()));
    Ok(TwistCoefficients { t0, l, m, phi, psi, min_abs_l, span })
}

/// Result of the grid-doubling twist audit.
#[derive(Debug, Clone)]
pub struct TwistCheck {
    pub min_abs_l: f64,
    pub grid_n: usize,
    pub stable: bool,
    pub twist_ok: bool,
}

/// Threshold that operationalizes "L(t0) never vanishes" on a finite grid.
pub const TWIST_FLOOR: f64 = 1e-6;

/// Double the grid until min |L| moves by less than one percent, then apply
/// the floor.
pub fn twist_check(p: &OscParams, f: &Forcing, grid_n0: usize, span: f64) -> Result<TwistCheck> {
    let mut n = grid_n0.max(64);
    let mut prev = twist_coefficients(p, f, n, span)?.min_abs_l;
    let mut stable = false;
    for _ in 0..6 {
        n *= 2;
        let cur = twist_coefficients(p, f, n, span)?.min_abs_l;
        let scale = prev.abs().max(cur.abs()).max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= 0.01 * scale {
            stable = true;
            prev = cur;
            break;
        }
        prev = cur;
    }
    Ok(TwistCheck { min_abs_l: prev, grid_n: n, stable, twist_ok: prev > TWIST_FLOOR })
}

/// Weighted long-grid average standing in for the time mean: a Gaussian
/// window (sigma = span/13) kills every oscillatory mode to far below any
/// tolerance of interest, which a flat average over a finite span cannot do.
fn windowed_mean(t: &[f64], v: &[f64], span: f64) -> f64 {
    let center = 0.5 * span;
    let sigma = span / 13.0;
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for (&ti, &vi) in t.iter().zip(v) {
        let z = (ti - center) / sigma;
        let w = (-0.5 * z * z).exp();
        acc += w * vi;
        wsum += w;
    }
    acc / wsum
}

/// Time means of Phi and Psi over the table's grid.
pub fn mean_values(c: &TwistCoefficients) -> (f64, f64) {
    (
        windowed_mean(&c.t0, &c.phi, c.span),
        windowed_mean(&c.t0, &c.psi, c.span),
    )
}

/// Per-mode transfer factors: G_C(nu) = int_0^{2pi} e^{i nu omega_tilde
/// theta} C(omega_tilde theta) dtheta and the S-counterpart. They satisfy
/// G_S = (e^{i nu beta} - 1)/omega_tilde - i nu G_C with beta the period.
pub fn mode_transfer(p: &OscParams, nu: f64) -> Result<(Complex64, Complex64)> {
    let wt = p.omega_tilde();
    let breaks = p.kink_thetas();
    let gc = quad_complex(
        &|theta: f64| {
            let (s, c) = (nu * wt * theta).sin_cos();
            let base = p.base_c(wt * theta);
            (c * base, s * base)
        },
        0.0,
        TAU,
        &breaks,
        1e-12,
    )?;
    let gs = quad_complex(
        &|theta: f64| {
            let (s, c) = (nu * wt * theta).sin_cos();
            let base = p.base_s(wt * theta);
            (c * base, s * base)
        },
        0.0,
        TAU,
        &breaks,
        1e-12,
    )?;
    Ok((Complex64::new(gc.0, gc.1), Complex64::new(gs.0, gs.1)))
}

/// L and M as series over the forcing's own spectrum: each mode of f is
/// scaled by its transfer factor. Evaluating these matches the pointwise
/// quadratures.
pub fn twist_series(p: &OscParams, f: &APSeries) -> Result<(APSeries, APSeries)> {
    let mut l = APSeries::zero(f.basis().clone(), f.structure().clone());
    let mut m = APSeries::zero(f.basis().clone(), f.structure().clone());
    for (k, coef) in f.terms() {
        let c = match coef {
            Coef::Scalar(c) => *c,
            Coef::Profile(_) => {
                return Err(Error::domain("twist transfer expects scalar coefficients"))
            }
        };
        let nu = f.basis().inner_frequency(k)?;
        let (gc, gs) = mode_transfer(p, nu)?;
        l.add_term(k.clone(), c * gc)?;
        m.add_term(k.clone(), c * gs)?;
    }
    Ok((l, m))
}

/// The section map in the scaled chart r = 1/(delta v)^2, v in [1, 2].
#[derive(Debug, Clone)]
pub struct ScaledStep {
    pub t1: f64,
    pub v1: f64,
    pub r0: f64,
    pub result: PoincareResult,
}

/// Largest delta keeping the whole band v in [1, 2] above the clearance
/// 4 r_star.
pub fn delta_max(p: &OscParams, f: &Forcing) -> f64 {
    let floor = r_star_from_majorant(p, f.majorant());
    if floor == 0.0 {
        1.0
    } else {
        (0.25 / floor.sqrt()).min(1.0)
    }
}

pub fn scaled_map(
    p: &OscParams,
    t0: f64,
    v0: f64,
    delta: f64,
    f: &Forcing,
    tol: f64,
) -> Result<ScaledStep> {
    if !(1.0..=2.0).contains(&v0) {
        return Err(Error::domain("scaled action must lie in [1, 2]"));
    }
    if !(delta > 0.0) || delta > delta_max(p, f) {
        return Err(Error::domain(format!(
            "delta {delta:.3e} outside (0, {:.3e}]",
            delta_max(p, f)
        )));
    }
    let r0 = 1.0 / (delta * v0 * (delta * v0));
    let result = poincare_map(p, t0, r0, f, tol)?;
    // Exact in the deviation: v1 = v0 / (1 + delta v0 u1).
    let v1 = v0 / (1.0 + delta * v0 * result.u1);
    Ok(ScaledStep { t1: result.t1, v1, r0, result })
}

/// Central-difference Jacobian of (t, z = sqrt r) -> (t1, z1) at a section
/// point, with the determinant mapped back to the (t, r) chart.
#[derive(Debug, Clone)]
pub struct SectionJacobian {
    /// Rows: (t1, z1) derivatives; columns: (t0, z0) perturbations.
    pub j: [[f64; 2]; 2],
    pub det_tz: f64,
    /// Determinant of the (t, r) -> (t1, r1) map: det_tz * z1 / z0.
    pub det_tr: f64,
    pub z0: f64,
    pub z1: f64,
}

pub fn section_jacobian(
    p: &OscParams,
    t0: f64,
    r0: f64,
    f: &Forcing,
    tol: f64,
    h_t: f64,
    h_z: f64,
) -> Result<SectionJacobian> {
    if !(h_t > 0.0) || !(h_z > 0.0) {
        return Err(Error::domain("difference steps must be positive"));
    }
    let z0 = r0.sqrt();
    let eval = |t: f64, z: f64| -> Result<(f64, f64)> {
        let res = poincare_map(p, t, z * z, f, tol)?;
        Ok((res.t1, z + res.u1))
    };
    let (tp, zp) = eval(t0 + h_t, z0)?;
    let (tm, zm) = eval(t0 - h_t, z0)?;
    let (tq, zq) = eval(t0, z0 + h_z)?;
    let (tr, zr) = eval(t0, z0 - h_z)?;
    let (_tc, zc) = eval(t0, z0)?;
    let j = [
        [(tp - tm) / (2.0 * h_t), (tq - tr) / (2.0 * h_z)],
        [(zp - zm) / (2.0 * h_t), (zq - zr) / (2.0 * h_z)],
    ];
    let det_tz = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    Ok(SectionJacobian { j, det_tz, det_tr: det_tz * zc / z0, z0, z1: zc })
}

/// Density of the invariant 2-form on the section: the map transports
/// D(t, r) dr wedge dt, with D = 1/omega_tilde - rho f(t) / (2 sqrt r).
pub fn section_form_factor(p: &OscParams, f: &Forcing, t: f64, r: f64) -> f64 {
    1.0 / p.omega_tilde() - 0.5 * p.rho_scale() * f.eval(t) / r.sqrt()
}

/// Remainder-order fit over an action ladder.
#[derive(Debug, Clone)]
pub struct ExpansionFit {
    /// (r0, t-remainder, z-remainder) per rung.
    pub rungs: Vec<(f64, f64, f64)>,
    pub t_slope: f64,
    pub z_slope: f64,
    /// Set when the remainders sit at integrator noise so no slope is fit.
    pub exact: bool,
}

/// Fit log-residual slopes of the first-order expansion: the t-remainder
/// after the Phi r^{-1/2} term decays like r^{-1}, the sqrt(r)-remainder
/// after -Psi like r^{-1/2}.
pub fn expansion_order(
    p: &OscParams,
    f: &Forcing,
    t0: f64,
    r_ladder: &[f64],
    tol: f64,
) -> Result<ExpansionFit> {
    if r_ladder.len() < 3 {
        return Err(Error::domain("ladder needs at least 3 rungs"));
    }
    let lo = r_ladder.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = r_ladder.iter().cloned().fold(0.0f64, f64::max);
    if hi / lo < 0.999e3 {
        return Err(Error::domain("ladder must span at least three decades"));
    }
    let floor = 4.0 * r_star_from_majorant(p, f.majorant());
    if lo < floor {
        return Err(Error::domain("ladder dips below the working clearance"));
    }
    let (lv, mv) = twist_value(p, f, t0)?;
    let s = phi_scale(p);
    let (phi, psi) = (s * lv, -s * mv);
    let beta = TAU * p.omega_tilde();
    let rows: Vec<Result<(f64, f64, f64)>> = r_ladder
        .par_iter()
        .map(|&r0| {
            let res = poincare_map(p, t0, r0, f, tol)?;
            let res_t = (res.t1 - t0 - beta - phi / r0.sqrt()).abs();
            let res_z = (res.u1 + psi).abs();
            Ok((r0, res_t, res_z))
        })
        .collect();
    let mut rungs = Vec::with_capacity(r_ladder.len());
    for row in rows {
        rungs.push(row?);
    }
    let noise = 1e-10;
    if rungs.iter().all(|&(_, rt, rz)| rt < noise && rz < noise) {
        return Ok(ExpansionFit { rungs, t_slope: 0.0, z_slope: 0.0, exact: true });
    }
    let xs: Vec<f64> = rungs.iter().map(|&(r, _, _)| r.ln()).collect();
    let yt: Vec<f64> = rungs.iter().map(|&(_, rt, _)| rt.max(1e-300).ln()).collect();
    let yz: Vec<f64> = rungs.iter().map(|&(_, _, rz)| rz.max(1e-300).ln()).collect();
    let (t_slope, _) = linear_fit(&xs, &yt)?;
    let (z_slope, _) = linear_fit(&xs, &yz)?;
    Ok(ExpansionFit { rungs, t_slope, z_slope, exact: false })
}
