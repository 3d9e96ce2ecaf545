//! Inversion of near-identity time changes.
//!
//! For `tau = beta t + f(t)` with almost periodic `f`, the inverse relation is
//! `t = tau / beta + g(tau)` with `g` almost periodic on the rescaled basis
//! `omega / beta`. The inverse is computed pointwise by fixed-point iteration
//! and then projected onto a finite mode set by least squares; the composed
//! identity is verified on a check grid before returning.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::index::MultiIndex;
use super::series::{APSeries, Coef};
use crate::error::{Error, Result};
use crate::num::solve_lsq;

#[derive(Debug, Clone)]
pub struct InvertOptions {
    /// Largest order |k| admitted in the mode closure for the fit.
    pub kmax: u32,
    /// Check-grid residual bound for the composed identity.
    pub tol: f64,
    /// Points on the verification grid.
    pub check_points: usize,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            kmax: 12,
            tol: 1e-10,
            check_points: 1000,
        }
    }
}

/// Inverse of `tau = beta t + f(t)`: returns `g` with `t = tau / beta + g(tau)`.
pub fn invert_near_identity(f: &APSeries, beta: f64) -> Result<APSeries> {
    invert_near_identity_with(f, beta, &InvertOptions::default())
}

pub fn invert_near_identity_with(
    f: &APSeries,
    beta: f64,
    opts: &InvertOptions,
) -> Result<APSeries> {
    if !(beta > 0.0) {
        return Err(Error::domain("time change needs beta > 0"));
    }
    let scaled_basis = f.basis().scaled(beta)?;
    let structure = f.structure().clone();

    if f.is_empty() {
        return Ok(APSeries::zero(scaled_basis, structure));
    }

    let fp = f.derivative_t()?;
    // monotonicity of beta t + f(t) on a long sample grid
    let t_probe = 0.7318;
    let mut sup_fp = 0.0f64;
    for j in 0..4096 {
        let t = j as f64 * t_probe;
        let d = fp.evaluate(t)?;
        if beta + d <= 0.0 {
            return Err(Error::domain(format!(
                "time change is not monotone: beta + f'({t}) = {}",
                beta + d
            )));
        }
        sup_fp = sup_fp.max(d.abs());
    }
    let contraction = sup_fp / beta;
    if contraction >= 0.98 {
        return Err(Error::convergence(format!(
            "fixed point does not contract: sup|f'| / beta = {contraction:.3}"
        )));
    }

    // mode closure: sums of f's modes up to order kmax, membership kept
    let f_modes: Vec<MultiIndex> = f.terms().map(|(k, _)| k.clone()).collect();
    let mut closure: BTreeSet<MultiIndex> = BTreeSet::new();
    closure.insert(MultiIndex::zero());
    let mut frontier: Vec<MultiIndex> = vec![MultiIndex::zero()];
    while let Some(base) = frontier.pop() {
        for m in &f_modes {
            let k = base.add(m);
            if k.order() > opts.kmax as u64 {
                continue;
            }
            if structure.assign(&k).is_err() && !k.is_zero() {
                continue;
            }
            if scaled_basis.inner_frequency(&k).is_err() {
                continue;
            }
            if closure.insert(k.clone()) {
                frontier.push(k);
            }
        }
        if closure.len() > 4000 {
            return Err(Error::domain(
                "mode closure too rich for the inverse fit; lower kmax",
            ));
        }
    }
    // one representative per conjugate pair
    let mut reps: Vec<MultiIndex> = Vec::new();
    for k in &closure {
        if k.is_zero() {
            continue;
        }
        if *k > k.neg() {
            reps.push(k.clone());
        }
    }

    // pointwise inverse by fixed point, sampled for the least squares fit
    let freqs: Vec<f64> = reps
        .iter()
        .map(|k| scaled_basis.inner_frequency(k))
        .collect::<Result<_>>()?;
    let nu_min = freqs
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min)
        .max(1e-6);
    let span = (40.0 * std::f64::consts::TAU / nu_min).clamp(200.0, 1e6);
    let ncols = 1 + 2 * reps.len();
    let nsamp = (6 * ncols).max(1200);

    let solve_t = |tau: f64| -> Result<f64> {
        let mut t = tau / beta;
        for _ in 0..500 {
            let next = (tau - f.evaluate(t)?) / beta;
            if (next - t).abs() <= 1e-15 * t.abs().max(1.0) {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::convergence("inverse fixed point stalled"))
    };

    let mut design = DMatrix::zeros(nsamp, ncols);
    let mut rhs = DVector::zeros(nsamp);
    for j in 0..nsamp {
        let tau = span * (j as f64 + 0.5) / nsamp as f64;
        let g_val = solve_t(tau)? - tau / beta;
        rhs[j] = g_val;
        design[(j, 0)] = 1.0;
        for (i, nu) in freqs.iter().enumerate() {
            design[(j, 1 + 2 * i)] = (nu * tau).cos();
            design[(j, 2 + 2 * i)] = (nu * tau).sin();
        }
    }
    let coef = solve_lsq(design, rhs)?;

    let mut g = APSeries::zero(scaled_basis.clone(), structure.clone());
    if coef[0].abs() > 1e-15 {
        g.insert(
            MultiIndex::zero(),
            Coef::Scalar(Complex64::new(coef[0], 0.0)),
        )?;
    }
    for (i, k) in reps.iter().enumerate() {
        let (a, b) = (coef[1 + 2 * i], coef[2 + 2 * i]);
        // a cos + b sin = (a - i b)/2 e^{i nu tau} + conj
        let c = Complex64::new(0.5 * a, -0.5 * b);
        if c.norm() <= 1e-15 {
            continue;
        }
        g.insert(k.clone(), Coef::Scalar(c))?;
        g.insert(k.neg(), Coef::Scalar(c.conj()))?;
    }

    // composed identity on the check grid
    let mut worst = 0.0f64;
    for j in 0..opts.check_points {
        let tau = span * (j as f64 + 0.25) / opts.check_points as f64;
        let t = tau / beta + g.evaluate(tau)?;
        let resid = (beta * t + f.evaluate(t)? - tau).abs();
        worst = worst.max(resid);
    }
    if worst > opts.tol {
        return Err(Error::convergence(format!(
            "composed identity residual {worst:.3e} exceeds {:.1e}",
            opts.tol
        )));
    }
    Ok(g)
}
