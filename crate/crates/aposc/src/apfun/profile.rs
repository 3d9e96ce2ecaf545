//! Polynomial coefficient profiles over an action interval.
//!
//! A profile stores a complex polynomial in the action variable y as a
//! Chebyshev series on `[lo, hi]`, together with a halfwidth `s` describing
//! the complex neighbourhood the majorant norm must cover. The majorant is
//! `sum_n |c_n| * cosh(n * arccosh-like growth)` on the Bernstein ellipse
//! through the fattened interval: with `sigma = 2 s / (hi - lo)` and
//! `rho_e = 1 + sigma + sqrt(sigma^2 + 2 sigma)`, each degree contributes the
//! factor `(rho_e^n + rho_e^-n) / 2`. At `s = 0` this collapses to the plain
//! coefficient sum.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ActionProfile {
    lo: f64,
    hi: f64,
    s: f64,
    coeffs: Vec<Complex64>,
}

impl ActionProfile {
    pub fn new(lo: f64, hi: f64, s: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain("action interval must be finite with lo < hi"));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::domain("profile halfwidth must be finite and >= 0"));
        }
        let mut p = ActionProfile { lo, hi, s, coeffs };
        p.trim();
        Ok(p)
    }

    pub fn constant(lo: f64, hi: f64, s: f64, c: Complex64) -> Result<Self> {
        ActionProfile::new(lo, hi, s, vec![c])
    }

    /// Chebyshev interpolant of the sampled function at `degree + 1` first
    /// kind nodes; exact for polynomials of that degree.
    pub fn from_fn<F: Fn(f64) -> Complex64>(
        lo: f64,
        hi: f64,
        s: f64,
        degree: usize,
        f: F,
    ) -> Result<Self> {
        if degree > 256 {
            return Err(Error::domain("profile degree capped at 256"));
        }
        let n = degree + 1;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let samples: Vec<Complex64> = (0..n)
            .map(|j| {
                let x = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                f(mid + half * x)
            })
            .collect();
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, fx) in samples.iter().enumerate() {
                let ang = std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64;
                acc += fx * ang.cos();
            }
            let scale = if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 };
            coeffs.push(acc * scale);
        }
        ActionProfile::new(lo, hi, s, coeffs)
    }

    fn trim(&mut self) {
        while self
            .coeffs
            .last()
            .is_some_and(|c| c.norm() == 0.0 && self.coeffs.len() > 1)
        {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Complex64::new(0.0, 0.0));
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn halfwidth(&self) -> f64 {
        self.s
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.s != other.s {
            return Err(Error::domain(
                "profile operands live on different action intervals",
            ));
        }
        Ok(())
    }

    /// Clenshaw evaluation at real y.
    pub fn eval(&self, y: f64) -> Complex64 {
        let w = (2.0 * y - self.lo - self.hi) / (self.hi - self.lo);
        let x = 2.0 * w;
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + w * b1 - b2
    }

    /// Majorant over the fattened interval; an upper bound, not a sup.
    pub fn majorant(&self) -> f64 {
        let sigma = 2.0 * self.s / (self.hi - self.lo);
        let rho_e = 1.0 + sigma + (sigma * sigma + 2.0 * sigma).sqrt();
        let mut total = 0.0;
        let mut grow = 1.0;
        for (n, c) in self.coeffs.iter().enumerate() {
            let factor = if n == 0 { 1.0 } else { 0.5 * (grow + 1.0 / grow) };
            total += c.norm() * factor;
            grow *= rho_e;
        }
        total
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ActionProfile {
            lo: self.lo,
            hi: self.hi,
            s: self.s,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        ActionProfile::new(self.lo, self.hi, self.s, coeffs)
    }

    /// Product via `T_m T_n = (T_{m+n} + T_{|m-n|}) / 2`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let p = a * b * 0.5;
                coeffs[i + j] += p;
                coeffs[i.abs_diff(j)] += p;
            }
        }
        ActionProfile::new(self.lo, self.hi, self.s, coeffs)
    }

    /// Derivative in y, computed by the Chebyshev recurrence and scaled by the
    /// interval map.
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        let mut d = vec![Complex64::new(0.0, 0.0); n.max(2)];
        if n >= 2 {
            d[n - 2] = 2.0 * (n as f64 - 1.0) * self.coeffs[n - 1];
            for k in (0..n.saturating_sub(2)).rev() {
                d[k] = d[k + 2] + 2.0 * (k as f64 + 1.0) * self.coeffs[k + 1];
            }
            d[0] *= 0.5;
        }
        d.truncate(n.max(2) - 1);
        let scale = 2.0 / (self.hi - self.lo);
        let mut out = ActionProfile {
            lo: self.lo,
            hi: self.hi,
            s: self.s,
            coeffs: d.into_iter().map(|c| c * scale).collect(),
        };
        out.trim();
        out
    }

    /// Linear profile `y -> c * y`.
    pub fn linear(lo: f64, hi: f64, s: f64, c: Complex64) -> Result<Self> {
        // y = mid + half * w, so T_0 carries mid and T_1 carries half
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        ActionProfile::new(lo, hi, s, vec![c * mid, c * half])
    }
}
