//! Resonant side of the normal form: splitting off the periodic part of the
//! twist data, the first integral transported by the averaged flow, and the
//! straightening frame (R, T, Omega, K, tau) built on top of it.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::apfun::APSeries;
use crate::dioph::ResonanceReport;
use crate::error::{Error, Result};
use crate::num::quad::quad;
use crate::oscillator::{Forcing, OscParams};
use crate::poincare::{phi_scale, twist_value};

/// Quadrature tolerance for the frame integrals. Tight, because the shift
/// identity is checked through finite differences of these values.
const FRAME_QTOL: f64 = 1e-13;

/// Decomposition of a series into its resonant part (constant term plus every
/// mode supported inside a totally resonant set) and the rest.
#[derive(Debug, Clone)]
pub struct SplitSeries {
    pub lbar: APSeries,
    pub ltilde: APSeries,
    /// coefficient-space bound on `sup_t |lbar(t + beta) - lbar(t)|`,
    /// relative to the coefficient mass of lbar
    pub periodicity_defect: f64,
}

/// Split `l` over the resonant family of `report`. The constant mode and all
/// modes whose support lies in some reported resonant set go to `lbar`, the
/// rest to `ltilde`; the two parts reconstruct `l` term by term.
pub fn resonant_split(l: &APSeries, report: &ResonanceReport) -> Result<SplitSeries> {
    let mut lbar = APSeries::zero(l.basis().clone(), l.structure().clone());
    let mut ltilde = APSeries::zero(l.basis().clone(), l.structure().clone());
    for (k, c) in l.terms() {
        let resonant = k.is_zero()
            || report
                .resonant_sets
                .iter()
                .any(|a| a.contains_support(k));
        if resonant {
            lbar.insert(k.clone(), c.clone())?;
        } else {
            ltilde.insert(k.clone(), c.clone())?;
        }
    }
    // periodicity bound: each mode contributes |c_k| |e^{i nu beta} - 1|
    let mut defect = 0.0;
    let mut mass = 0.0;
    for (k, c) in lbar.terms() {
        let nu = lbar.basis().inner_frequency(k)?;
        let wobble = 2.0 * (0.5 * nu * report.beta).sin().abs();
        defect += c.magnitude() * wobble;
        mass += c.magnitude();
    }
    Ok(SplitSeries {
        lbar,
        ltilde,
        periodicity_defect: defect / mass.max(1e-300),
    })
}

/// Real trigonometric polynomial of a fixed period, fitted from equispaced
/// samples. Evaluation, spectral derivative and the exact antiderivative of
/// the fit are all closed-form.
#[derive(Debug, Clone)]
pub struct TrigTable {
    period: f64,
    c0: f64,
    cos_c: Vec<f64>,
    sin_c: Vec<f64>,
}

impl TrigTable {
    /// Fit from `samples[j] = g(j * period / n)`. Harmonics up to
    /// `(n - 1) / 2` are kept; the Nyquist bin is dropped.
    pub fn fit(samples: &[f64], period: f64) -> Result<TrigTable> {
        let n = samples.len();
        if n < 4 {
            return Err(Error::domain("TrigTable::fit wants at least 4 samples"));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::domain(format!("bad period {period}")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("non-finite sample in TrigTable::fit"));
        }
        let mmax = (n - 1) / 2;
        let c0 = samples.iter().sum::<f64>() / n as f64;
        let mut cos_c = vec![0.0; mmax];
        let mut sin_c = vec![0.0; mmax];
        let base = std::f64::consts::TAU / n as f64;
        for m in 1..=mmax {
            let mut ca = 0.0;
            let mut sa = 0.0;
            for (j, s) in samples.iter().enumerate() {
                let (sn, cs) = (base * (m * j % n) as f64).sin_cos();
                ca += s * cs;
                sa += s * sn;
            }
            cos_c[m - 1] = 2.0 * ca / n as f64;
            sin_c[m - 1] = 2.0 * sa / n as f64;
        }
        Ok(TrigTable {
            period,
            c0,
            cos_c,
            sin_c,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mean(&self) -> f64 {
        self.c0
    }

    pub fn harmonics(&self) -> usize {
        self.cos_c.len()
    }

    /// Largest coefficient magnitude over all nonconstant harmonics.
    pub fn max_harmonic_amplitude(&self) -> f64 {
        self.cos_c
            .iter()
            .chain(self.sin_c.iter())
            .fold(0.0, |acc: f64, c| acc.max(c.abs()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = std::f64::consts::TAU * t / self.period;
        let mut acc = self.c0;
        for m in 1..=self.cos_c.len() {
            let (sn, cs) = (m as f64 * x).sin_cos();
            acc += self.cos_c[m - 1] * cs + self.sin_c[m - 1] * sn;
        }
        acc
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let w0 = std::f64::consts::TAU / self.period;
        let x = w0 * t;
        let mut acc = 0.0;
        for m in 1..=self.cos_c.len() {
            let w = m as f64 * w0;
            let (sn, cs) = (m as f64 * x).sin_cos();
            acc += w * (self.sin_c[m - 1] * cs - self.cos_c[m - 1] * sn);
        }
        acc
    }

    /// Exact integral of the fit from 0 to `t`.
    pub fn integral_from_zero(&self, t: f64) -> f64 {
        let w0 = std::f64::consts::TAU / self.period;
        let x = w0 * t;
        let mut acc = self.c0 * t;
        for m in 1..=self.cos_c.len() {
            let w = m as f64 * w0;
            let (sn, cs) = (m as f64 * x).sin_cos();
            acc += self.cos_c[m - 1] * sn / w + self.sin_c[m - 1] * (1.0 - cs) / w;
        }
        acc
    }

    /// Split the antiderivative into its secular slope (the mean) and the
    /// periodic remainder, normalized to vanish at 0.
    pub fn antiderivative(&self) -> (f64, TrigTable) {
        let w0 = std::f64::consts::TAU / self.period;
        let mut cos_c = vec![0.0; self.cos_c.len()];
        let mut sin_c = vec![0.0; self.cos_c.len()];
        let mut c0 = 0.0;
        for m in 1..=self.cos_c.len() {
            let w = m as f64 * w0;
            cos_c[m - 1] = -self.sin_c[m - 1] / w;
            sin_c[m - 1] = self.cos_c[m - 1] / w;
            c0 += self.sin_c[m - 1] / w;
        }
        (
            self.c0,
            TrigTable {
                period: self.period,
                c0,
                cos_c,
                sin_c,
            },
        )
    }
}

/// First integral of the averaged resonant system, represented through fitted
/// tables for Phi_S, Psi_S and the exponent integral of their ratio.
#[derive(Debug, Clone)]
pub struct ResonantIntegral {
    pub beta: f64,
    pub phi: TrigTable,
    pub psi: TrigTable,
    /// periodic part of `int_0^t Psi_S / Phi_S`, vanishing at 0
    pub exponent: TrigTable,
    /// secular slope of that integral; zero when the ratio has true period beta
    pub secular: f64,
    /// resolved exponent sign: the one with the smaller transport residual
    pub sigma: i32,
    /// relative transport residual with the resolved sign
    pub residual: f64,
    /// same residual with the opposite sign
    pub residual_other: f64,
    /// `|exp(sigma * secular * beta) - 1|`: failure of I to repeat after beta
    pub periodicity_defect: f64,
    pub min_abs_phi: f64,
}

impl ResonantIntegral {
    fn exponent_at(&self, t: f64) -> f64 {
        f64::from(self.sigma) * (self.secular * t + self.exponent.eval(t))
    }

    /// `E(t)` with `I(t, v) = E(t) v`.
    pub fn envelope(&self, t: f64) -> f64 {
        self.exponent_at(t).exp()
    }

    pub fn eval(&self, t: f64, v: f64) -> f64 {
        v * self.envelope(t)
    }

    pub fn d_dt(&self, t: f64, v: f64) -> f64 {
        let q = self.secular + self.exponent.deriv(t);
        f64::from(self.sigma) * q * self.eval(t, v)
    }

    pub fn d_dv(&self, t: f64) -> f64 {
        self.envelope(t)
    }

    /// Package the integral and the averaged vector field as frame input on
    /// the action window `bounds = (a, a_in, b_in, b)`.
    pub fn frame_input(&self, bounds: (f64, f64, f64, f64)) -> FrameInput<'_> {
        FrameInput {
            beta: self.beta,
            lbar: Box::new(move |t, v| self.phi.eval(t) * v),
            mbar: Box::new(move |t, v| self.psi.eval(t) * v * v),
            integral: Box::new(move |t, v| self.eval(t, v)),
            di_dtheta: Box::new(move |t, v| self.d_dt(t, v)),
            di_dy: Box::new(move |t, _| self.d_dv(t)),
            y_bounds: bounds,
        }
    }
}

/// Transport residual of `I_sigma(t, v) = exp(sigma A(t)) v` against the
/// averaged field `(Phi v, Psi v^2)`, relative to the term magnitudes.
fn transport_residual(
    phi: &TrigTable,
    psi: &TrigTable,
    exponent: &TrigTable,
    secular: f64,
    sigma: f64,
    beta: f64,
) -> f64 {
    // grid deliberately coprime with the fit nodes so interpolation error counts
    let n = 701;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..n {
        let t = beta * j as f64 / n as f64;
        let e = (sigma * (secular * t + exponent.eval(t))).exp();
        let q = secular + exponent.deriv(t);
        let p = phi.eval(t);
        let s = psi.eval(t);
        for v in [1.0, 1.5, 2.0] {
            let di_dt = sigma * q * e * v;
            let di_dv = e;
            let lb = p * v;
            let mb = s * v * v;
            worst = worst.max((lb * di_dt + mb * di_dv).abs());
            scale = scale.max((lb.abs() + mb.abs()) * (di_dt.abs() + di_dv.abs()));
        }
    }
    worst / scale.max(1e-300)
}

/// Build the candidate first integral for the oscillator from the resonant
/// forcing component: fit Phi_S, Psi_S on one period, integrate their ratio,
/// and resolve the exponent sign by the transport residual.
pub fn oscillator_resonant_integral(p: &OscParams, f_s: &Forcing) -> Result<ResonantIntegral> {
    let beta = p.period();
    let scale = phi_scale(p);
    let n = 256usize;
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let t = beta * j as f64 / n as f64;
            let (l, m) = twist_value(p, f_s, t)?;
            Ok((scale * l, -scale * m))
        })
        .collect::<Result<_>>()?;
    let phis: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let psis: Vec<f64> = rows.iter().map(|r| r.1).collect();

    let max_phi = phis.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    let (min_abs_phi, argmin) = phis
        .iter()
        .enumerate()
        .fold((f64::INFINITY, 0), |(best, arg), (j, p)| {
            if p.abs() < best {
                (p.abs(), j)
            } else {
                (best, arg)
            }
        });
    if min_abs_phi <= 1e-6 * max_phi.max(1e-300) {
        return Err(Error::hypothesis(format!(
            "Phi_S(t0) = {:.3e} at t0 = {:.6} is too close to zero",
            phis[argmin],
            beta * argmin as f64 / n as f64
        )));
    }

    let phi = TrigTable::fit(&phis, beta)?;
    let psi = TrigTable::fit(&psis, beta)?;
    let qs: Vec<f64> = phis.iter().zip(&psis).map(|(p, s)| s / p).collect();
    let q = TrigTable::fit(&qs, beta)?;
    let (secular, exponent) = q.antiderivative();

    let res_minus = transport_residual(&phi, &psi, &exponent, secular, -1.0, beta);
    let res_plus = transport_residual(&phi, &psi, &exponent, secular, 1.0, beta);
    let (sigma, residual, residual_other) = if res_minus <= res_plus {
        (-1, res_minus, res_plus)
    } else {
        (1, res_plus, res_minus)
    };
    let periodicity_defect = ((f64::from(sigma) * secular * beta).exp() - 1.0).abs();
    Ok(ResonantIntegral {
        beta,
        phi,
        psi,
        exponent,
        secular,
        sigma,
        residual,
        residual_other,
        periodicity_defect,
        min_abs_phi,
    })
}

/// Averaged field and first integral handed to the frame builder. All
/// closures must be defined on a neighborhood of the strip
/// `[0, 2 beta] x [a, b]` and periodic data must have period `beta`.
pub struct FrameInput<'a> {
    pub beta: f64,
    pub lbar: Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>,
    pub mbar: Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>,
    pub integral: Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>,
    pub di_dtheta: Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>,
    pub di_dy: Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>,
    /// `(a, a_in, b_in, b)` with the inner interval strictly nested
    pub y_bounds: (f64, f64, f64, f64),
}

/// The straightening frame over the level interval `[h_lo, h_hi]`, together
/// with the verification numbers collected while building it.
///
/// Debug output shows the verification numbers; the input closures are
/// opaque.
pub struct ResonantFrame<'a> {
    input: FrameInput<'a>,
    pub h_lo: f64,
    pub h_hi: f64,
    /// transport residual of the supplied integral, relative
    pub pde_residual: f64,
    /// worst `|I(theta + beta, y) - I(theta, y)|` relative to `sup |I|`
    pub periodicity_defect: f64,
    /// `(I_min(a_in) - I_max(a), I_min(b) - I_max(b_in))`, both positive
    pub nesting_gaps: (f64, f64),
    /// worst `|tau(theta + beta, r) - tau(theta, r) - beta|`
    pub shift_defect: f64,
    /// largest finite-difference `T'(h)` over the check grid (negative)
    pub t_prime_max: f64,
    /// smallest finite-difference `Omega'(h)` over the check grid
    pub omega_prime_min: f64,
    /// worst periodicity defect of the finite-difference tau derivatives
    pub deriv_periodicity_defect: f64,
}

/// Golden-section extremum of `g` over `[lo, hi]`; `want_max` flips the sense.
fn refine_extremum(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, want_max: bool) -> f64 {
    let sign = if want_max { -1.0 } else { 1.0 };
    let inv_phi = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = sign * g(c);
    let mut gd = sign * g(d);
    for _ in 0..80 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = sign * g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = sign * g(d);
        }
        if b - a < 1e-12 * (1.0 + hi.abs()) {
            break;
        }
    }
    g(0.5 * (a + b))
}

/// Extremum of `theta -> I(theta, y)` over one period: grid scan plus a local
/// golden-section polish around the best node.
fn integral_extremum(input: &FrameInput<'_>, y: f64, want_max: bool) -> f64 {
    let n = 96;
    let step = input.beta / n as f64;
    let mut best_j = 0;
    let mut best = f64::NEG_INFINITY;
    let sign = if want_max { 1.0 } else { -1.0 };
    for j in 0..n {
        let v = sign * (input.integral)(step * j as f64, y);
        if v > best {
            best = v;
            best_j = j;
        }
    }
    let center = step * best_j as f64;
    let g = |th: f64| (input.integral)(th, y);
    refine_extremum(&g, center - step, center + step, want_max)
}

pub fn build_resonant_frame(input: FrameInput<'_>) -> Result<ResonantFrame<'_>> {
    let beta = input.beta;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::domain(format!("bad period {beta}")));
    }
    let (a, a_in, b_in, b) = input.y_bounds;
    if !(a.is_finite() && b.is_finite() && a < a_in && a_in < b_in && b_in < b) {
        return Err(Error::domain(format!(
            "action bounds must nest strictly: got ({a}, {a_in}, {b_in}, {b})"
        )));
    }

    // hypothesis battery on a grid
    let n_th = 48;
    let n_y = 17;
    let hy = 1e-6 * (b - a);
    let mut pde_worst = 0.0f64;
    let mut pde_scale = 0.0f64;
    let mut per_worst = 0.0f64;
    let mut i_scale = 0.0f64;
    for j in 0..n_th {
        let th = beta * j as f64 / n_th as f64;
        for i in 0..n_y {
            let y = a + (b - a) * i as f64 / (n_y - 1) as f64;
            let lb = (input.lbar)(th, y);
            if !(lb > 0.0) {
                return Err(Error::hypothesis(format!(
                    "positivity: lbar({th:.6}, {y:.6}) = {lb:.3e} is not > 0"
                )));
            }
            let slope = ((input.lbar)(th, y + hy) - (input.lbar)(th, y - hy)) / (2.0 * hy);
            if !(slope > 0.0) {
                return Err(Error::hypothesis(format!(
                    "monotonicity: d lbar / dy = {slope:.3e} at ({th:.6}, {y:.6}) is not > 0"
                )));
            }
            let diy = (input.di_dy)(th, y);
            if !(diy > 0.0) {
                return Err(Error::hypothesis(format!(
                    "first integral monotonicity: dI/dy = {diy:.3e} at ({th:.6}, {y:.6}) is not > 0"
                )));
            }
            let mb = (input.mbar)(th, y);
            let dit = (input.di_dtheta)(th, y);
            pde_worst = pde_worst.max((lb * dit + mb * diy).abs());
            pde_scale = pde_scale.max((lb.abs() + mb.abs()) * (dit.abs() + diy.abs()));
            let iv = (input.integral)(th, y);
            per_worst = per_worst.max(((input.integral)(th + beta, y) - iv).abs());
            i_scale = i_scale.max(iv.abs());
        }
    }
    let pde_residual = pde_worst / pde_scale.max(1e-300);
    if pde_residual > 1e-8 {
        return Err(Error::hypothesis(format!(
            "first integral transport: relative residual {pde_residual:.3e} exceeds 1e-8"
        )));
    }
    let periodicity_defect = per_worst / i_scale.max(1e-300);
    if periodicity_defect > 1e-8 {
        return Err(Error::hypothesis(format!(
            "periodicity of I: relative defect {periodicity_defect:.3e} exceeds 1e-8"
        )));
    }

    // nesting of the level bands over [a, a_in] and [b_in, b]
    let i_max_a = integral_extremum(&input, a, true);
    let i_min_ain = integral_extremum(&input, a_in, false);
    let i_max_bin = integral_extremum(&input, b_in, true);
    let i_min_b = integral_extremum(&input, b, false);
    if !(i_max_a < i_min_ain) {
        return Err(Error::hypothesis(format!(
            "nesting: I_max(a) = {i_max_a:.6e} is not below I_min(a_in) = {i_min_ain:.6e}"
        )));
    }
    if !(i_max_bin < i_min_b) {
        return Err(Error::hypothesis(format!(
            "nesting: I_max(b_in) = {i_max_bin:.6e} is not below I_min(b) = {i_min_b:.6e}"
        )));
    }
    let h_lo = i_max_a;
    let h_hi = i_min_b;
    if !(h_lo < h_hi) {
        return Err(Error::hypothesis(format!(
            "empty level range: [{h_lo:.6e}, {h_hi:.6e}]"
        )));
    }

    let mut frame = ResonantFrame {
        input,
        h_lo,
        h_hi,
        pde_residual,
        periodicity_defect,
        nesting_gaps: (i_min_ain - i_max_a, i_min_b - i_max_bin),
        shift_defect: 0.0,
        t_prime_max: f64::NEG_INFINITY,
        omega_prime_min: f64::INFINITY,
        deriv_periodicity_defect: 0.0,
    };

    // period monotonicity on an interior h grid
    let n_h = 9;
    let dh = 1e-4 * (h_hi - h_lo);
    let slopes: Vec<(f64, f64)> = (0..n_h)
        .into_par_iter()
        .map(|i| {
            let h = h_lo + (h_hi - h_lo) * (i as f64 + 0.5) / n_h as f64;
            let tm = frame.period(h - dh)?;
            let tp = frame.period(h + dh)?;
            Ok(((tp - tm) / (2.0 * dh), (beta / tp - beta / tm) / (2.0 * dh)))
        })
        .collect::<Result<_>>()?;
    for (tp, op) in slopes {
        frame.t_prime_max = frame.t_prime_max.max(tp);
        frame.omega_prime_min = frame.omega_prime_min.min(op);
    }
    if !(frame.t_prime_max < 0.0) {
        return Err(Error::hypothesis(format!(
            "period monotonicity: T'(h) reaches {:.3e}, not < 0",
            frame.t_prime_max
        )));
    }

    // shift identity tau(theta + beta, r) = tau(theta, r) + beta
    let mut pairs = Vec::new();
    for th_frac in [0.0, 0.3, 0.7] {
        for r_frac in [0.25, 0.5, 0.75] {
            pairs.push((beta * th_frac, a_in + (b_in - a_in) * r_frac));
        }
    }
    let defects: Vec<f64> = pairs
        .par_iter()
        .map(|&(th, r)| {
            let lo = frame.tau(th, r)?;
            let hi = frame.tau(th + beta, r)?;
            Ok((hi - lo - beta).abs())
        })
        .collect::<Result<_>>()?;
    frame.shift_defect = defects.iter().fold(0.0f64, |acc, d| acc.max(*d));
    if frame.shift_defect > 1e-8 * (1.0 + beta) {
        return Err(Error::invariant(format!(
            "shift identity defect {:.3e} exceeds 1e-8",
            frame.shift_defect
        )));
    }

    // periodicity of the tau derivatives, by finite differences
    let th_fd = 1e-5 * beta;
    let r_fd = 1e-5 * (b - a);
    let probes = [(0.2 * beta, 0.4 * (a_in + b_in) + 0.1), (0.6 * beta, 0.5 * (a_in + b_in))];
    let fd_defects: Vec<f64> = probes
        .par_iter()
        .map(|&(th, r)| {
            let d_th = |t0: f64| -> Result<f64> {
                Ok((frame.tau(t0 + th_fd, r)? - frame.tau(t0 - th_fd, r)?) / (2.0 * th_fd))
            };
            let d_r = |t0: f64| -> Result<f64> {
                Ok((frame.tau(t0, r + r_fd)? - frame.tau(t0, r - r_fd)?) / (2.0 * r_fd))
            };
            let a1 = (d_th(th + beta)? - d_th(th)?).abs();
            let a2 = (d_r(th + beta)? - d_r(th)?).abs();
            Ok(a1.max(a2))
        })
        .collect::<Result<_>>()?;
    frame.deriv_periodicity_defect = fd_defects.iter().fold(0.0f64, |acc, d| acc.max(*d));

    Ok(frame)
}

impl std::fmt::Debug for ResonantFrame<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResonantFrame")
            .field("h_lo", &self.h_lo)
            .field("h_hi", &self.h_hi)
            .field("pde_residual", &self.pde_residual)
            .field("periodicity_defect", &self.periodicity_defect)
            .field("nesting_gaps", &self.nesting_gaps)
            .field("shift_defect", &self.shift_defect)
            .field("t_prime_max", &self.t_prime_max)
            .field("omega_prime_min", &self.omega_prime_min)
            .finish_non_exhaustive()
    }
}

impl ResonantFrame<'_> {
    pub fn beta(&self) -> f64 {
        self.input.beta
    }

    fn check_level(&self, h: f64) -> Result<()> {
        let slack = 1e-12 * (1.0 + self.h_hi.abs());
        if !(h >= self.h_lo - slack && h <= self.h_hi + slack) {
            return Err(Error::domain(format!(
                "level h = {h:.6e} outside the working range [{:.6e}, {:.6e}]",
                self.h_lo, self.h_hi
            )));
        }
        Ok(())
    }

    /// Solve `I(theta, y) = h` for `y` in the strip: bisection bracket with
    /// safeguarded Newton refinement.
    pub fn r_of(&self, theta: f64, h: f64) -> Result<f64> {
        let (a, _, _, b) = self.input.y_bounds;
        let slack = 1e-9 * (1.0 + h.abs());
        let fa = (self.input.integral)(theta, a) - h;
        let fb = (self.input.integral)(theta, b) - h;
        if fa > 0.0 {
            return if fa <= slack {
                Ok(a)
            } else {
                Err(Error::domain(format!(
                    "level h = {h:.6e} leaves the strip at theta = {theta:.6}"
                )))
            };
        }
        if fb < 0.0 {
            return if -fb <= slack {
                Ok(b)
            } else {
                Err(Error::domain(format!(
                    "level h = {h:.6e} leaves the strip at theta = {theta:.6}"
                )))
            };
        }
        let mut lo = a;
        let mut hi = b;
        let mut y = 0.5 * (lo + hi);
        for _ in 0..100 {
            let f = (self.input.integral)(theta, y) - h;
            if f == 0.0 {
                return Ok(y);
            }
            if f > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let d = (self.input.di_dy)(theta, y);
            let mut next = if d > 0.0 { y - f / d } else { f64::NAN };
            if !next.is_finite() || next <= lo || next >= hi {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 1e-13 * (1.0 + y.abs()) {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::convergence(format!(
            "level solve for h = {h:.6e} at theta = {theta:.6} did not settle"
        )))
    }

    /// Integral of `1 / lbar(s, R(s, h))` over `[t0, t1]`.
    fn level_time(&self, t0: f64, t1: f64, h: f64) -> Result<f64> {
        if (t1 - t0).abs() == 0.0 {
            return Ok(0.0);
        }
        let pending = RefCell::new(None);
        let f = |s: f64| match self.r_of(s, h) {
            Ok(y) => 1.0 / (self.input.lbar)(s, y),
            Err(e) => {
                *pending.borrow_mut() = Some(e);
                0.0
            }
        };
        let v = quad(&f, t0, t1, FRAME_QTOL)?;
        if let Some(e) = pending.into_inner() {
            return Err(e);
        }
        Ok(v)
    }

    /// `T(h)`: time for the averaged flow to cross one period of the level
    /// curve at height `h`.
    pub fn period(&self, h: f64) -> Result<f64> {
        self.check_level(h)?;
        self.level_time(0.0, self.input.beta, h)
    }

    /// `Omega(h) = beta / T(h)`.
    pub fn frequency(&self, h: f64) -> Result<f64> {
        Ok(self.input.beta / self.period(h)?)
    }

    /// `K` along the level through height `h`, reduced by the period so large
    /// angles stay cheap and exact.
    pub fn k_level(&self, theta: f64, h: f64) -> Result<f64> {
        self.check_level(h)?;
        let beta = self.input.beta;
        let n = (theta / beta).floor();
        let frac = theta - n * beta;
        let head = self.level_time(0.0, frac, h)?;
        if n == 0.0 {
            return Ok(head);
        }
        Ok(n * self.period(h)? + head)
    }

    /// `K(theta, r)`: crossing time from the section to `theta` along the
    /// level curve through `(theta, r)`.
    pub fn k_of(&self, theta: f64, r: f64) -> Result<f64> {
        self.k_level(theta, (self.input.integral)(theta, r))
    }

    /// Straightened angle `tau = Omega(h) K(theta, r)` with `h = I(theta, r)`;
    /// gains exactly `beta` when `theta` does.
    pub fn tau(&self, theta: f64, r: f64) -> Result<f64> {
        let beta = self.input.beta;
        let h = (self.input.integral)(theta, r);
        self.check_level(h)?;
        let t_full = self.period(h)?;
        let n = (theta / beta).floor();
        let frac = theta - n * beta;
        let head = self.level_time(0.0, frac, h)?;
        Ok(beta * (n * t_full + head) / t_full)
    }
}

/// Sampled frame tables for reporting: `r[i][j] = R(theta_i, h_j)`,
/// `k[i][j] = K(theta_i, h_j)` along levels, plus `T` and `Omega` per level.
#[derive(Debug, Clone)]
pub struct FrameTables {
    pub theta: Vec<f64>,
    pub h: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub omega: Vec<f64>,
}

impl ResonantFrame<'_> {
    pub fn tables(&self, n_theta: usize, n_h: usize) -> Result<FrameTables> {
        if n_theta < 2 || n_h < 2 {
            return Err(Error::domain("frame tables want at least a 2 x 2 grid"));
        }
        let theta: Vec<f64> = (0..n_theta)
            .map(|i| self.input.beta * i as f64 / (n_theta - 1) as f64)
            .collect();
        let h: Vec<f64> = (0..n_h)
            .map(|j| self.h_lo + (self.h_hi - self.h_lo) * j as f64 / (n_h - 1) as f64)
            .collect();
        let t: Vec<f64> = h
            .par_iter()
            .map(|&hv| self.period(hv))
            .collect::<Result<_>>()?;
        let omega: Vec<f64> = t.iter().map(|tv| self.input.beta / tv).collect();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = theta
            .par_iter()
            .map(|&th| {
                let mut rrow = Vec::with_capacity(n_h);
                let mut krow = Vec::with_capacity(n_h);
                for &hv in &h {
                    rrow.push(self.r_of(th, hv)?);
                    krow.push(self.k_level(th, hv)?);
                }
                Ok((rrow, krow))
            })
            .collect::<Result<_>>()?;
        let mut r = Vec::with_capacity(n_theta);
        let mut k = Vec::with_capacity(n_theta);
        for (rrow, krow) in rows {
            r.push(rrow);
            k.push(krow);
        }
        Ok(FrameTables {
            theta,
            h,
            r,
            k,
            t,
            omega,
        })
    }
}
