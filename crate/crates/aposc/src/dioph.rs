//! Arithmetic hypotheses as executable predicates: approximation functions,
//! nonresonance margins, rotation admissibility, resonance detection, and
//! distribution counts.
//!
//! Exact resonance means a declared rational relation forces
//! `<k, omega> beta` into `2 pi Z`; floating point near-coincidences are
//! reported separately and never promoted.

use std::sync::Arc;

use crate::apfun::{FrequencyBasis, IndexSet, MultiIndex, Ratio, SpatialStructure};
use crate::error::{Error, Result};

/// Approximation function Delta on [1, oo), normalized to Delta(1) = 1.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproxFn {
    /// Delta(t) = exp(sqrt(t) - 1)
    DefaultExpSqrt,
    /// piecewise linear log Delta between (t, Delta) nodes, extended by the
    /// final slope
    Table { nodes: Vec<(f64, f64)> },
}

impl Default for ApproxFn {
    fn default() -> Self {
        ApproxFn::DefaultExpSqrt
    }
}

impl ApproxFn {
    /// Table from a flat `[t0, v0, t1, v1, ...]` list; wants `t0 = 1`,
    /// `v0 = 1`, strictly increasing t, positive values.
    pub fn table(params: &[f64]) -> Result<Self> {
        if params.len() < 4 || params.len() % 2 != 0 {
            return Err(Error::domain("table wants at least two (t, value) pairs"));
        }
        let nodes: Vec<(f64, f64)> = params.chunks(2).map(|c| (c[0], c[1])).collect();
        if (nodes[0].0 - 1.0).abs() > 1e-12 || (nodes[0].1 - 1.0).abs() > 1e-12 {
            return Err(Error::domain("table must start at (1, 1)"));
        }
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::domain("table abscissae must increase"));
            }
        }
        if nodes.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::domain("table values must be positive and finite"));
        }
        Ok(ApproxFn::Table { nodes })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.log_eval(t)?.exp())
    }

    /// `log Delta(t)`; stays finite where `Delta` itself overflows.
    pub fn log_eval(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::domain(format!(
                "approximation function wants t >= 1, got {t}"
            )));
        }
        match self {
            ApproxFn::DefaultExpSqrt => Ok(t.sqrt() - 1.0),
            ApproxFn::Table { nodes } => {
                let logs: Vec<(f64, f64)> = nodes.iter().map(|&(x, v)| (x, v.ln())).collect();
                let n = logs.len();
                let seg = if t <= logs[0].0 {
                    return Ok(logs[0].1);
                } else if t >= logs[n - 1].0 {
                    (n - 2, n - 1)
                } else {
                    let mut i = 0;
                    while logs[i + 1].0 < t {
                        i += 1;
                    }
                    (i, i + 1)
                };
                let (x0, y0) = logs[seg.0];
                let (x1, y1) = logs[seg.1];
                Ok(y0 + (y1 - y0) * (t - x0) / (x1 - x0))
            }
        }
    }
}

/// Outcome of the admissibility checks on an approximation function.
#[derive(Debug, Clone)]
pub struct ApproxReport {
    pub normalized: bool,
    pub nondecreasing: bool,
    /// first t beyond which log Delta(t) / t stops increasing
    pub onset: f64,
    pub decreasing_after_onset: bool,
    /// quadrature of log Delta(t) / t^2 over [1, t_max]
    pub integral: f64,
    /// extrapolated remainder past t_max
    pub tail_estimate: f64,
    pub pass: bool,
}

/// Check the defining conditions of an approximation function on a log-spaced
/// grid up to `t_max >= 10`.
pub fn approx_validate(delta: &ApproxFn, t_max: f64) -> Result<ApproxReport> {
    if !(t_max >= 10.0) {
        return Err(Error::domain("approx_validate wants t_max >= 10"));
    }
    let normalized = delta.log_eval(1.0)?.abs() <= 1e-12;

    let n = 600usize;
    let mut ts = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    for i in 0..n {
        let t = (t_max.ln() * i as f64 / (n - 1) as f64).exp();
        let v = delta.log_eval(t)?;
        if !v.is_finite() {
            return Err(Error::domain(format!("log Delta({t}) is not finite")));
        }
        ts.push(t);
        logs.push(v);
    }
    let slack = 1e-12;
    let nondecreasing = logs.windows(2).all(|w| w[1] >= w[0] - slack);

    // quotient q(t) = log Delta / t: locate its last grid increase, refine the
    // turning point by bisection on the finite-difference slope
    let q: Vec<f64> = ts.iter().zip(&logs).map(|(&t, &v)| v / t).collect();
    let mut last_rise = 0usize;
    for i in 0..n - 1 {
        if q[i + 1] > q[i] + slack {
            last_rise = i + 1;
        }
    }
    let decreasing_after_onset = (last_rise..n - 1).all(|i| q[i + 1] <= q[i] + slack);
    let onset = if last_rise == 0 {
        ts[0]
    } else {
        let qslope = |t: f64| -> f64 {
            let h = 1e-4 * t;
            let a = delta.log_eval(t - h).map(|v| v / (t - h)).unwrap_or(0.0);
            let b = delta.log_eval(t + h).map(|v| v / (t + h)).unwrap_or(0.0);
            b - a
        };
        let lo = ts[last_rise - 1];
        let hi = ts[(last_rise + 1).min(n - 1)];
        if qslope(lo) > 0.0 && qslope(hi) < 0.0 {
            crate::num::bisect(&qslope, lo, hi, 1e-9)?
        } else {
            ts[last_rise]
        }
    };

    let integrand = |t: f64| delta.log_eval(t).unwrap_or(f64::NAN) / (t * t);
    // split at decade boundaries so the adaptive rule sees balanced pieces
    let mut breaks = Vec::new();
    let mut b = 10.0;
    while b < t_max {
        breaks.push(b);
        b *= 10.0;
    }
    let integral = crate::num::quad::quad_pieces(&integrand, 1.0, t_max, &breaks, 1e-10)?;
    if !integral.is_finite() {
        return Err(Error::domain("integral test statistic is not finite"));
    }
    // model log Delta ~ c sqrt(t) past the grid: remainder 2 c / sqrt(t_max)
    let c_end = delta.log_eval(t_max)? / t_max.sqrt();
    let tail_estimate = 2.0 * c_end / t_max.sqrt();

    let pass = normalized && nondecreasing && decreasing_after_onset && tail_estimate.is_finite();
    Ok(ApproxReport {
        normalized,
        nondecreasing,
        onset,
        decreasing_after_onset,
        integral,
        tail_estimate,
        pass,
    })
}

/// Nonresonance margin scan result.
#[derive(Debug, Clone)]
pub struct MarginReport {
    /// `c* = min |<k, omega>| Delta([[k]]) Delta(|k|)`
    pub margin: f64,
    pub attained_at: MultiIndex,
    /// the inner product at the attaining k
    pub inner: f64,
    /// true when a declared relation annihilates the inner product
    pub exact_zero: bool,
    pub kmax: u32,
    pub scanned: usize,
}

/// Scan all structure-supported `0 != k` with `|k| <= kmax` for the smallest
/// Diophantine product; any `c <= margin` certifies the small-divisor bound up
/// to that order.
pub fn nonres_margin(
    basis: &Arc<FrequencyBasis>,
    structure: &Arc<SpatialStructure>,
    delta: &ApproxFn,
    kmax: u32,
) -> Result<MarginReport> {
    if kmax < 1 {
        return Err(Error::domain("nonres_margin wants kmax >= 1"));
    }
    let (lo, hi) = basis.window();
    let mut best: Option<MarginReport> = None;
    let mut scanned = 0usize;
    for k in MultiIndex::enumerate(lo, hi, kmax as u64) {
        if k.is_zero() || structure.assign(&k).is_err() {
            continue;
        }
        scanned += 1;
        if let Some(exact) = basis.exact_inner(&k) {
            if exact.plain.is_zero() && exact.two_pi.is_zero() {
                return Ok(MarginReport {
                    margin: 0.0,
                    attained_at: k,
                    inner: 0.0,
                    exact_zero: true,
                    kmax,
                    scanned,
                });
            }
        }
        let inner = basis.inner_frequency(&k)?;
        let w = structure.support_weight(&k)?;
        let value = inner.abs() * delta.eval(w)? * delta.eval(k.order() as f64)?;
        if best.as_ref().map_or(true, |b| value < b.margin) {
            best = Some(MarginReport {
                margin: value,
                attained_at: k,
                inner,
                exact_zero: false,
                kmax,
                scanned,
            });
        }
    }
    let mut report = best.ok_or_else(|| Error::domain("no candidate k within the window"))?;
    report.scanned = scanned;
    Ok(report)
}

/// True iff every structure-supported `0 != k` with `|k| <= kmax` keeps the
/// nearest-integer defect of `<k, omega> rotation_total / (2 pi)` at or above
/// `gamma / (Delta([[k]]) Delta(|k|))`. Callers pass the full rotation, e.g.
/// `beta + delta * alpha`.
pub fn rotation_admissible(
    rotation_total: f64,
    basis: &Arc<FrequencyBasis>,
    structure: &Arc<SpatialStructure>,
    gamma: f64,
    delta: &ApproxFn,
    kmax: u32,
) -> Result<bool> {
    if !(gamma > 0.0) {
        return Err(Error::domain("rotation admissibility wants gamma > 0"));
    }
    let (lo, hi) = basis.window();
    for k in MultiIndex::enumerate(lo, hi, kmax as u64) {
        if k.is_zero() || structure.assign(&k).is_err() {
            continue;
        }
        let x = basis.inner_frequency(&k)? * rotation_total / std::f64::consts::TAU;
        let defect = (x - x.round()).abs();
        let w = structure.support_weight(&k)?;
        let bound = gamma / (delta.eval(w)? * delta.eval(k.order() as f64)?);
        if defect < bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct RotationScan {
    pub fraction: f64,
    pub admissible: Vec<f64>,
    pub grid: usize,
    pub gamma: f64,
    pub kmax: u32,
}

/// Evaluate admissibility of `beta + delta_coupling * alpha` on a uniform
/// alpha grid.
#[allow(clippy::too_many_arguments)]
pub fn scan_rotation_interval(
    alpha_lo: f64,
    alpha_hi: f64,
    grid_n: usize,
    beta: f64,
    delta_coupling: f64,
    basis: &Arc<FrequencyBasis>,
    structure: &Arc<SpatialStructure>,
    gamma: f64,
    delta: &ApproxFn,
    kmax: u32,
) -> Result<RotationScan> {
    if !(alpha_lo < alpha_hi) {
        return Err(Error::domain("scan wants alpha_lo < alpha_hi"));
    }
    if grid_n < 10 {
        return Err(Error::domain("scan wants at least 10 grid points"));
    }
    let mut admissible = Vec::new();
    for i in 0..grid_n {
        let alpha = alpha_lo + (alpha_hi - alpha_lo) * (i as f64 + 0.5) / grid_n as f64;
        let total = beta + delta_coupling * alpha;
        if rotation_admissible(total, basis, structure, gamma, delta, kmax)? {
            admissible.push(alpha);
        }
    }
    Ok(RotationScan {
        fraction: admissible.len() as f64 / grid_n as f64,
        admissible,
        grid: grid_n,
        gamma,
        kmax,
    })
}

/// Exact form of the rotation beta, when declared.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSpec {
    pub value: f64,
    /// declared rational beta / (2 pi)
    pub over_two_pi: Option<Ratio>,
    /// declared rational beta
    pub plain: Option<Ratio>,
}

impl BetaSpec {
    pub fn numeric(value: f64) -> Self {
        BetaSpec {
            value,
            over_two_pi: None,
            plain: None,
        }
    }

    pub fn two_pi_rational(r: Ratio) -> Self {
        BetaSpec {
            value: std::f64::consts::TAU * r.to_f64(),
            over_two_pi: Some(r),
            plain: None,
        }
    }

    pub fn plain_rational(r: Ratio) -> Self {
        BetaSpec {
            value: r.to_f64(),
            over_two_pi: None,
            plain: Some(r),
        }
    }

    fn check(&self) -> Result<()> {
        let mut declared = 0.0;
        if let Some(r) = &self.over_two_pi {
            declared += std::f64::consts::TAU * r.to_f64();
        }
        if let Some(r) = &self.plain {
            declared += r.to_f64();
        }
        if (self.over_two_pi.is_some() || self.plain.is_some())
            && (declared - self.value).abs() > 1e-12 * self.value.abs().max(1.0)
        {
            return Err(Error::domain(format!(
                "declared beta {declared} disagrees with value {}",
                self.value
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ResonantMode {
    pub k: MultiIndex,
    pub j: i64,
    pub defect: f64,
}

#[derive(Debug, Clone)]
pub struct ResonanceReport {
    /// modes with `<k, omega> beta` in 2 pi Z by declared rational arithmetic
    pub exact: Vec<ResonantMode>,
    /// undeclared modes whose numeric defect is at most tol
    pub near: Vec<ResonantMode>,
    /// smallest defect among the remaining scanned modes
    pub margin: f64,
    pub kmax: u32,
    pub tol: f64,
    /// declared sets on which every scanned supported mode is exactly resonant
    pub resonant_sets: Vec<IndexSet>,
    /// numeric value of beta used for the scan
    pub beta: f64,
}

/// Classify all structure-supported `0 != k` with `|k| <= kmax` against
/// `<k, omega> beta in 2 pi Z`. The zero index is resonant by convention and
/// excluded from the report.
pub fn detect_resonances(
    basis: &Arc<FrequencyBasis>,
    structure: &Arc<SpatialStructure>,
    beta: &BetaSpec,
    kmax: u32,
    tol: f64,
) -> Result<ResonanceReport> {
    if kmax < 1 {
        return Err(Error::domain("detect_resonances wants kmax >= 1"));
    }
    beta.check()?;
    let b_plain = beta.plain.unwrap_or_else(Ratio::zero);
    let b_two_pi = beta.over_two_pi.unwrap_or_else(Ratio::zero);
    let declared = beta.plain.is_some() || beta.over_two_pi.is_some();

    let (lo, hi) = basis.window();
    let mut exact = Vec::new();
    let mut near = Vec::new();
    let mut nonexact = Vec::new();
    let mut margin = f64::INFINITY;
    for k in MultiIndex::enumerate(lo, hi, kmax as u64) {
        if k.is_zero() || structure.assign(&k).is_err() {
            continue;
        }
        let mut is_exact = None;
        if declared {
            if let Some(inner) = basis.exact_inner(&k) {
                // <k, omega> beta / (2 pi) with inner = p + 2 pi q and
                // beta = b + 2 pi r splits into p b / (2 pi) + (p r + q b)
                // + 2 pi q r; integrality forces the transcendental parts
                // to vanish exactly
                let pb = inner.plain.mul(&b_plain);
                let qr = inner.two_pi.mul(&b_two_pi);
                let rational = inner.plain.mul(&b_two_pi).add(&inner.two_pi.mul(&b_plain));
                if pb.is_zero() && qr.is_zero() {
                    if let Some(j) = rational.as_integer() {
                        is_exact = Some(j as i64);
                    }
                }
            }
        }
        if let Some(j) = is_exact {
            exact.push(ResonantMode {
                k,
                j,
                defect: 0.0,
            });
            continue;
        }
        let x = basis.inner_frequency(&k)? * beta.value / std::f64::consts::TAU;
        let defect = (x - x.round()).abs();
        if defect <= tol {
            near.push(ResonantMode {
                k,
                j: x.round() as i64,
                defect,
            });
        } else {
            margin = margin.min(defect);
            nonexact.push(k);
        }
    }
    // Totally resonant sets: every scanned mode supported inside the set is
    // exactly resonant (one stray mode disqualifies the whole set).
    let resonant_sets = structure
        .sets()
        .iter()
        .filter(|a| {
            let mut any = false;
            for m in &exact {
                if a.contains_support(&m.k) {
                    any = true;
                    break;
                }
            }
            any && !near.iter().any(|m| a.contains_support(&m.k))
                && !nonexact.iter().any(|k| a.contains_support(k))
        })
        .cloned()
        .collect();
    Ok(ResonanceReport {
        exact,
        near,
        margin,
        kmax,
        tol,
        resonant_sets,
        beta: beta.value,
    })
}

/// Number of declared sets with cardinality `n` and weight at most `t`.
pub fn distribution_count(structure: &SpatialStructure, n: usize, t: f64) -> usize {
    structure.distribution_count(n, t)
}
