//! Embedded Runge-Kutta integration of order 8.
//!
//! Twelve-stage scheme with a blended 5th/3rd order error estimate and
//! proportional step control. Consistency of every tableau row and empirical
//! 8th order convergence are pinned by tests.

use crate::error::{Error, Result};

pub const STAGES: usize = 12;

pub const C: [f64; STAGES] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];

pub const A: [[f64; STAGES - 1]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636],
];

pub const B: [f64; STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];

pub const E5: [f64; STAGES] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];

pub const E3: [f64; STAGES] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
];

/// Adaptive driver configuration.
#[derive(Debug, Clone)]
pub struct RkConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for RkConfig {
    fn default() -> Self {
        RkConfig {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: 1e-2,
            h_min: 1e-13,
            h_max: 1.0,
            max_steps: 50_000_000,
        }
    }
}

impl RkConfig {
    pub fn with_tol(tol: f64) -> Self {
        RkConfig {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub evals: u64,
    pub accepted: u64,
    pub rejected: u64,
}

impl Stats {
    pub fn merge(&mut self, other: &Stats) {
        self.evals += other.evals;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
    }
}

/// One raw step from `(t, y)` with step `h`: the 8th order solution together
/// with the raw 5th and 3rd order error differences (not yet scaled by `h`).
pub fn raw_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let mut k = [[0.0f64; N]; STAGES];
    k[0] = f(t, y);
    for i in 1..STAGES {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            let aij = A[i][j];
            if aij != 0.0 {
                for n in 0..N {
                    yi[n] += h * aij * kj[n];
                }
            }
        }
        k[i] = f(t + C[i] * h, &yi);
    }
    let mut out = *y;
    let mut e5 = [0.0f64; N];
    let mut e3 = [0.0f64; N];
    for (i, ki) in k.iter().enumerate() {
        for n in 0..N {
            out[n] += h * B[i] * ki[n];
            e5[n] += E5[i] * ki[n];
            e3[n] += E3[i] * ki[n];
        }
    }
    (out, e5, e3)
}

/// Integration state with manual stepping, used where the caller interleaves
/// event location with the adaptive loop.
pub struct Stepper<'a, F, const N: usize> {
    pub cfg: &'a RkConfig,
    pub f: &'a F,
    pub t: f64,
    pub y: [f64; N],
    pub h: f64,
    pub stats: Stats,
}

/// Record of one accepted adaptive step.
#[derive(Debug, Clone)]
pub struct StepTaken<const N: usize> {
    pub t_old: f64,
    pub y_old: [f64; N],
    pub h_used: f64,
}

impl<'a, F, const N: usize> Stepper<'a, F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(cfg: &'a RkConfig, f: &'a F, t0: f64, y0: [f64; N]) -> Self {
        Stepper {
            cfg,
            f,
            t: t0,
            y: y0,
            h: cfg.h_init.min(cfg.h_max).max(cfg.h_min),
            stats: Stats::default(),
        }
    }

    /// Blended error norm: the 5th order difference damped by the 3rd order
    /// one, scaled by tolerance per component; accept when below 1.
    fn err_norm(&self, h: f64, y_old: &[f64; N], y_new: &[f64; N], e5: &[f64; N], e3: &[f64; N]) -> f64 {
        let mut s5 = 0.0;
        let mut s3 = 0.0;
        for n in 0..N {
            let sc = self.cfg.atol + self.cfg.rtol * y_old[n].abs().max(y_new[n].abs());
            let a = e5[n] / sc;
            let b = e3[n] / sc;
            s5 += a * a;
            s3 += b * b;
        }
        if s5 == 0.0 && s3 == 0.0 {
            return 0.0;
        }
        let denom = s5 + 0.01 * s3;
        h.abs() * s5 / (denom * N as f64).sqrt()
    }

    /// Take one accepted step without passing `t_cap`. Returns what was left
    /// behind so the caller can bracket events across the step.
    pub fn step_to_cap(&mut self, t_cap: f64) -> Result<StepTaken<N>> {
        if t_cap <= self.t {
            return Err(Error::domain("step_to_cap: cap not ahead of current time"));
        }
        loop {
            if self.stats.accepted + self.stats.rejected >= self.cfg.max_steps {
                return Err(Error::convergence("step budget exhausted"));
            }
            let mut h = self.h.min(self.cfg.h_max).max(self.cfg.h_min);
            let mut clipped = false;
            if self.t + h >= t_cap {
                h = t_cap - self.t;
                clipped = true;
            }
            let (y_new, e5, e3) = raw_step(self.f, self.t, &self.y, h);
            self.stats.evals += STAGES as u64;
            let en = self.err_norm(h, &self.y, &y_new, &e5, &e3);
            if en > 100.0 && h <= self.cfg.h_min * 1.0001 {
                return Err(Error::convergence(format!(
                    "step size underflow at t = {}: error {en:.2e} at minimal step",
                    self.t
                )));
            }
            if en <= 1.0 || h <= self.cfg.h_min * 1.0001 {
                let taken = StepTaken {
                    t_old: self.t,
                    y_old: self.y,
                    h_used: h,
                };
                self.t += h;
                self.y = y_new;
                self.stats.accepted += 1;
                let fac = if en > 0.0 {
                    (0.9 * en.powf(-1.0 / 8.0)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                if !clipped {
                    self.h = (h * fac).clamp(self.cfg.h_min, self.cfg.h_max);
                } else {
                    self.h = (self.h * fac.min(1.5)).clamp(self.cfg.h_min, self.cfg.h_max);
                }
                return Ok(taken);
            }
            self.stats.rejected += 1;
            let fac = (0.9 * en.powf(-1.0 / 8.0)).clamp(0.1, 0.9);
            self.h = (h * fac).max(self.cfg.h_min);
        }
    }

    /// Trial step of exactly `h` from the current state, without committing.
    pub fn probe(&mut self, h: f64) -> [f64; N] {
        let (y, _, _) = raw_step(self.f, self.t, &self.y, h);
        self.stats.evals += STAGES as u64;
        y
    }

    pub fn set_state(&mut self, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t1 >= t0`, invoking `on_step` after
/// each accepted step.
pub fn integrate<const N: usize, F, G>(
    cfg: &RkConfig,
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    mut on_step: G,
) -> Result<([f64; N], Stats)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]),
{
    if t1 < t0 {
        return Err(Error::domain("integrate: t1 must not precede t0"));
    }
    if t1 == t0 {
        return Ok((y0, Stats::default()));
    }
    let mut st = Stepper::new(cfg, f, t0, y0);
    let guard = 1e-14 * t1.abs().max(1.0);
    while t1 - st.t > guard {
        st.step_to_cap(t1)?;
        on_step(st.t, &st.y);
    }
    let stats = st.stats.clone();
    Ok((st.y, stats))
}
