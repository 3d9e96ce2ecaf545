//! Piecewise-linear restoring oscillator x'' + a x+ - b x- = f(t): the base
//! solution pair, action-angle charts, and the two integration backends
//! (cartesian with crossing events, and the angle-parametrized deviation
//! system used by the section map).

use std::f64::consts::{PI, TAU};

use crate::apfun::{APSeries, Coef};
use crate::error::{Error, Result};
use crate::num::rk::{integrate, RkConfig, Stats, Stepper};

/// Stiffness pair of the restoring force. Everything downstream (periods,
/// scale factors, kink locations) is derived from these two numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscParams {
    pub a: f64,
    pub b: f64,
}

impl OscParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("oscillator stiffness must be positive and finite"));
        }
        if a == b {
            return Err(Error::domain(
                "equal stiffness degenerates to the harmonic oscillator; use distinct a, b",
            ));
        }
        Ok(OscParams { a, b })
    }

    /// Half the harmonic mean structure: omega_tilde = (1/sqrt a + 1/sqrt b)/2.
    pub fn omega_tilde(&self) -> f64 {
        0.5 * (1.0 / self.a.sqrt() + 1.0 / self.b.sqrt())
    }

    /// Minimal period of the base pair.
    pub fn period(&self) -> f64 {
        TAU * self.omega_tilde()
    }

    /// Amplitude normalization: rho = sqrt(2/(a omega_tilde)).
    pub fn rho_scale(&self) -> f64 {
        (2.0 / (self.a * self.omega_tilde())).sqrt()
    }

    /// First kink of the base cosine: the positive half-wave ends here.
    pub fn tau1(&self) -> f64 {
        0.5 * PI / self.a.sqrt()
    }

    /// sup |C| = max(1, sqrt(a/b)): 1 on the positive arc, sqrt(a/b) on the
    /// negative one.
    pub fn c_sup(&self) -> f64 {
        (self.a / self.b).sqrt().max(1.0)
    }

    /// Kink angles of theta -> C(omega_tilde theta) inside [0, 2 pi].
    pub fn kink_thetas(&self) -> [f64; 2] {
        let k = self.tau1() / self.omega_tilde();
        [k, TAU - k]
    }

    /// Reduce t into the fundamental window [-tau1, period - tau1).
    fn phase(&self, t: f64) -> f64 {
        let tau1 = self.tau1();
        (t + tau1).rem_euclid(self.period()) - tau1
    }

    /// Base cosine: the solution with C(0) = 1, C'(0) = 0. cos(sqrt(a) t) on
    /// the positive arc, a scaled sine half-wave on the negative one; even and
    /// period-periodic.
    pub fn base_c(&self, t: f64) -> f64 {
        let u = self.phase(t);
        let tau1 = self.tau1();
        if u <= tau1 {
            (self.a.sqrt() * u).cos()
        } else {
            -(self.a / self.b).sqrt() * (self.b.sqrt() * (u - tau1)).sin()
        }
    }

    /// Base sine S = C'.
    pub fn base_s(&self, t: f64) -> f64 {
        let u = self.phase(t);
        let tau1 = self.tau1();
        let sa = self.a.sqrt();
        if u <= tau1 {
            -sa * (sa * u).sin()
        } else {
            -sa * (self.b.sqrt() * (u - tau1)).cos()
        }
    }

    /// max over the grid of |S^2 + a (C+)^2 + b (C-)^2 - a|.
    pub fn energy_identity_residual(&self, grid: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &t in grid {
            let c = self.base_c(t);
            let s = self.base_s(t);
            let cp = c.max(0.0);
            let cm = (-c).max(0.0);
            let res = (s * s + self.a * cp * cp + self.b * cm * cm - self.a).abs();
            worst = worst.max(res);
        }
        worst
    }
}

/// Cartesian phase point at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// Action-angle chart point: theta in [0, 2 pi), r > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleState {
    pub theta: f64,
    pub r: f64,
    pub t: f64,
}

/// Action-angle chart: r is the scaled energy, theta the phase along the base
/// pair. The origin carries no phase and is rejected.
pub fn to_action_angle(p: &OscParams, s: &State) -> Result<AngleState> {
    let xp = s.x.max(0.0);
    let xm = (-s.x).max(0.0);
    let r = 0.5 * p.omega_tilde() * (s.y * s.y + p.a * xp * xp + p.b * xm * xm);
    if r == 0.0 {
        return Err(Error::domain("origin has no defined phase"));
    }
    let z = p.rho_scale() * r.sqrt();
    let cv = s.x / z;
    let sv = s.y / z;
    let sa = p.a.sqrt();
    // Invert the branch the point sits on: ties at x = 0 fall to the cosine
    // branch, whose atan2 limit is consistent from both sides.
    let u = if s.x >= 0.0 {
        (-sv / sa).atan2(cv) / sa
    } else {
        let v = (-cv * (p.b / p.a).sqrt()).atan2(-sv / sa);
        p.tau1() + v / p.b.sqrt()
    };
    let theta = (u / p.omega_tilde()).rem_euclid(TAU);
    Ok(AngleState { theta, r, t: s.t })
}

pub fn from_action_angle(p: &OscParams, a: &AngleState) -> Result<State> {
    if !(a.r > 0.0) {
        return Err(Error::domain("action must be positive"));
    }
    let z = p.rho_scale() * a.r.sqrt();
    let arg = p.omega_tilde() * a.theta;
    Ok(State {
        x: z * p.base_c(arg),
        y: z * p.base_s(arg),
        t: a.t,
    })
}

/// Forcing compiled into a flat cosine/sine table for fast pointwise
/// evaluation inside integrator stages. Only scalar coefficients qualify.
#[derive(Debug, Clone)]
pub struct Forcing {
    constant: f64,
    // (frequency, cosine amplitude, sine amplitude)
    modes: Vec<(f64, f64, f64)>,
    majorant: f64,
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing { constant: 0.0, modes: Vec::new(), majorant: 0.0 }
    }

    pub fn constant(f0: f64) -> Self {
        Forcing { constant: f0, modes: Vec::new(), majorant: f0.abs() }
    }

    /// One pure cosine amp cos(nu t) on top of a mean value.
    pub fn cosine(mean: f64, amp: f64, nu: f64) -> Self {
        Forcing {
            constant: mean,
            modes: vec![(nu, amp, 0.0)],
            majorant: mean.abs() + amp.abs(),
        }
    }

    /// Collapse a real series into the half-spectrum table: conjugate pairs
    /// merge into one cosine/sine mode each.
    pub fn compile(f: &APSeries) -> Result<Self> {
        let scale = f.abs_sum();
        if f.reality_defect()? > 1e-12 * scale.max(1e-300) {
            return Err(Error::invariant("forcing series is not real"));
        }
        let mut constant = 0.0;
        let mut modes = Vec::new();
        for (k, coef) in f.terms() {
            let c = match coef {
                Coef::Scalar(c) => *c,
                Coef::Profile(_) => {
                    return Err(Error::domain(
                        "forcing must have scalar coefficients, not action profiles",
                    ))
                }
            };
            if k.is_zero() {
                constant = c.re;
            } else if *k > k.neg() {
                let nu = f.basis().inner_frequency(k)?;
                // 2 Re(c e^{i nu t}) = 2 re cos(nu t) - 2 im sin(nu t)
                modes.push((nu, 2.0 * c.re, -2.0 * c.im));
            }
        }
        Ok(Forcing { constant, modes, majorant: scale })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.constant;
        for &(nu, cc, sc) in &self.modes {
            let (s, c) = (nu * t).sin_cos();
            acc += cc * c + sc * s;
        }
        acc
    }

    /// Coefficient-sum bound on |f|.
    pub fn majorant(&self) -> f64 {
        self.majorant
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.modes.is_empty()
    }
}

/// Action floor below which the angle parametrization of the flow can stall:
/// (rho omega_tilde sup|C| sup|f| / 2)^2 with ten percent margin on the root.
pub fn r_star(p: &OscParams, f: &APSeries) -> f64 {
    r_star_from_majorant(p, f.abs_sum())
}

pub fn r_star_from_majorant(p: &OscParams, f_sup: f64) -> f64 {
    let base = 0.5 * p.rho_scale() * p.omega_tilde() * p.c_sup() * f_sup;
    base * base * 1.21
}

/// Dense cartesian trajectory with located x = 0 crossing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub crossings: Vec<f64>,
    pub last: State,
    pub max_amplitude: f64,
    pub stats: Stats,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::domain("tolerance must lie in [1e-13, 1e-6]"));
    }
    Ok(())
}

/// Integrate the cartesian system from `s0` to `t_end`, locating every x = 0
/// crossing by in-step bisection and restarting there so no accepted step
/// straddles the kink in the restoring force.
pub fn integrate_cartesian(
    p: &OscParams,
    s0: &State,
    f: &Forcing,
    t_end: f64,
    tol: f64,
    stride: Option<f64>,
) -> Result<Trajectory> {
    check_tol(tol)?;
    let cfg = RkConfig::with_tol(tol);
    integrate_cartesian_cfg(p, s0, f, t_end, &cfg, stride)
}

pub fn integrate_cartesian_cfg(
    p: &OscParams,
    s0: &State,
    f: &Forcing,
    t_end: f64,
    cfg: &RkConfig,
    stride: Option<f64>,
) -> Result<Trajectory> {
    if !(t_end > s0.t) {
        return Err(Error::domain("t_end must be ahead of the initial time"));
    }
    if let Some(dt) = stride {
        if !(dt > 0.0) {
            return Err(Error::domain("sample stride must be positive"));
        }
    }
    let (a, b) = (p.a, p.b);
    let rhs = move |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let xp = y[0].max(0.0);
        let xm = (-y[0]).max(0.0);
        [y[1], f.eval(t) - a * xp + b * xm]
    };
    let mut stepper = Stepper::new(cfg, &rhs, s0.t, [s0.x, s0.y]);
    let mut samples = vec![*s0];
    let mut crossings = Vec::new();
    let mut max_amplitude = s0.x.abs().max(s0.y.abs());
    let mut next_sample = stride.map(|dt| s0.t + dt);
    // Bisection window for the crossing time.
    let time_tol = |t: f64| (4.0 * f64::EPSILON * t.abs()).max(1e-13);

    while stepper.t < t_end {
        let mut cap = t_end;
        let mut cap_is_sample = false;
        if let Some(ts) = next_sample {
            if ts < cap {
                cap = ts;
                cap_is_sample = true;
            } else if ts == cap {
                cap_is_sample = true;
            }
        }
        let taken = stepper.step_to_cap(cap)?;
        let x_old = taken.y_old[0];
        let x_new = stepper.y[0];
        if x_old != 0.0 && x_new != 0.0 && x_old.signum() != x_new.signum() {
            // Bracketed a crossing: bisect the step length from the pre-step
            // state, then restart exactly on the axis.
            let t_here = stepper.t;
            stepper.set_state(taken.t_old, taken.y_old);
            let (mut lo, mut hi) = (0.0f64, taken.h_used);
            let side = x_old.signum();
            while hi - lo > time_tol(taken.t_old + lo) {
                let mid = 0.5 * (lo + hi);
                let ym = stepper.probe(mid);
                if ym[0] == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if ym[0].signum() == side {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let hc = 0.5 * (lo + hi);
            let yc = stepper.probe(hc);
            let tc = taken.t_old + hc;
            crossings.push(tc);
            stepper.set_state(tc, [0.0, yc[1]]);
            max_amplitude = max_amplitude.max(yc[1].abs());
            let _ = t_here;
            continue;
        }
        if x_new == 0.0 && x_old != 0.0 {
            crossings.push(stepper.t);
        }
        max_amplitude = max_amplitude.max(stepper.y[0].abs()).max(stepper.y[1].abs());
        if cap_is_sample && stepper.t == cap {
            samples.push(State { x: stepper.y[0], y: stepper.y[1], t: stepper.t });
            next_sample = Some(cap + stride.unwrap());
        }
    }
    let last = State { x: stepper.y[0], y: stepper.y[1], t: stepper.t };
    if samples.last().map(|s| s.t) != Some(last.t) {
        samples.push(last);
    }
    Ok(Trajectory { samples, crossings, last, max_amplitude, stats: stepper.stats })
}

/// One revolution of the angle-parametrized flow, integrated in deviation
/// form: w = t - t0 - omega_tilde theta, u = sqrt(r) - sqrt(r0).
#[derive(Debug, Clone)]
pub struct ThetaRun {
    pub t1: f64,
    pub r1: f64,
    /// Time deviation after the revolution; t1 = t0 + 2 pi omega_tilde + w1.
    pub w1: f64,
    /// Root-action deviation; r1 - r0 = u1 (2 sqrt(r0) + u1).
    pub u1: f64,
    pub min_r: f64,
    pub samples: Vec<(f64, f64, f64)>,
    pub stats: Stats,
}

/// Integrate theta from 0 to 2 pi with time and action as dependent
/// variables. The vector field is split at the two kink angles; the run
/// aborts if the action falls to `r_floor` (default: the forcing's r_star)
/// or the time derivative dt/dtheta loses positivity.
pub fn integrate_theta(
    p: &OscParams,
    t0: f64,
    r0: f64,
    f: &Forcing,
    tol: f64,
    r_floor: Option<f64>,
    n_samples: usize,
) -> Result<ThetaRun> {
    check_tol(tol)?;
    let cfg = RkConfig::with_tol(tol);
    integrate_theta_cfg(p, t0, r0, f, &cfg, r_floor, n_samples)
}

pub fn integrate_theta_cfg(
    p: &OscParams,
    t0: f64,
    r0: f64,
    f: &Forcing,
    cfg: &RkConfig,
    r_floor: Option<f64>,
    n_samples: usize,
) -> Result<ThetaRun> {
    if !(r0 > 0.0) {
        return Err(Error::domain("initial action must be positive"));
    }
    let floor = r_floor.unwrap_or_else(|| r_star_from_majorant(p, f.majorant()));
    if r0 < floor {
        return Err(Error::domain("initial action below the admissible floor"));
    }
    let wt = p.omega_tilde();
    let rho = p.rho_scale();
    let z0 = r0.sqrt();
    let rhs = move |theta: f64, y: &[f64; 2]| -> [f64; 2] {
        let t = t0 + wt * theta + y[0];
        let z = z0 + y[1];
        let arg = wt * theta;
        let c = p.base_c(arg);
        let s = p.base_s(arg);
        let fv = f.eval(t);
        let d = 1.0 / wt - 0.5 * rho * c * fv / z;
        let dinv = 1.0 / d;
        [0.5 * wt * rho * c * fv / z * dinv, 0.5 * wt * rho * s * fv * dinv]
    };

    // Step caps: both kink angles plus the sample grid.
    let mut caps: Vec<f64> = p.kink_thetas().to_vec();
    if n_samples > 0 {
        for i in 1..=n_samples {
            caps.push(TAU * i as f64 / n_samples as f64);
        }
    }
    caps.push(TAU);
    caps.retain(|&c| c > 0.0 && c <= TAU);
    caps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    caps.dedup();

    // r recovered through the deviation: exact when u = 0, no z0^2 rounding.
    let action_of = |u: f64| r0 + u * (2.0 * z0 + u);
    let sample_here =
        |theta: f64, y: &[f64; 2]| -> (f64, f64, f64) { (theta, t0 + wt * theta + y[0], action_of(y[1])) };

    let mut stepper = Stepper::new(&cfg, &rhs, 0.0, [0.0, 0.0]);
    let mut samples = vec![sample_here(0.0, &[0.0, 0.0])];
    let mut min_r = r0;
    for &cap in &caps {
        while stepper.t < cap {
            stepper.step_to_cap(cap)?;
            let z = z0 + stepper.y[1];
            let r_now = action_of(stepper.y[1]);
            if !(z > 0.0) || r_now < floor {
                return Err(Error::domain(format!(
                    "action fell to the floor at theta = {:.6}: r = {:.6e} < {:.6e}",
                    stepper.t, r_now, floor
                )));
            }
            let d = 1.0 / wt
                - 0.5 * rho * p.base_c(wt * stepper.t)
                    * f.eval(t0 + wt * stepper.t + stepper.y[0])
                    / z;
            if !(d > 0.0) {
                return Err(Error::domain(format!(
                    "time parametrization degenerates at theta = {:.6}",
                    stepper.t
                )));
            }
            min_r = min_r.min(r_now);
        }
        if n_samples > 0 {
            samples.push(sample_here(stepper.t, &stepper.y));
        }
    }
    let w1 = stepper.y[0];
    let u1 = stepper.y[1];
    let run = ThetaRun {
        t1: t0 + wt * TAU + w1,
        r1: action_of(u1),
        w1,
        u1,
        min_r,
        samples,
        stats: stepper.stats,
    };
    Ok(run)
}

/// Closed-form flow check helper: total energy of the cartesian system for a
/// constant forcing level, conserved along exact solutions.
pub fn energy(p: &OscParams, s: &State, f0: f64) -> f64 {
    let xp = s.x.max(0.0);
    let xm = (-s.x).max(0.0);
    0.5 * s.y * s.y + 0.5 * p.a * xp * xp + 0.5 * p.b * xm * xm - f0 * s.x
}

/// Convenience wrapper over the fixed-path integrator for smooth comparisons
/// (no event logic); used by tests that never cross the axis.
pub fn flow_fixed(
    p: &OscParams,
    s0: &State,
    f: &Forcing,
    t_end: f64,
    cfg: &RkConfig,
) -> Result<(State, Stats)> {
    let (a, b) = (p.a, p.b);
    let rhs = move |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let xp = y[0].max(0.0);
        let xm = (-y[0]).max(0.0);
        [y[1], f.eval(t) - a * xp + b * xm]
    };
    let (y, stats) = integrate(cfg, &rhs, s0.t, [s0.x, s0.y], t_end, |_, _| {})?;
    Ok((State { x: y[0], y: y[1], t: t_end }, stats))
}
