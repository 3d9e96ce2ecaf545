//! Small numerical substrate: compensated sums, root finding, quadrature,
//! an embedded Runge-Kutta pair, hexadecimal float text, least squares.

pub mod hexf;
pub mod quad;
pub mod rk;

use crate::error::{Error, Result};

/// Neumaier compensated sum. Deterministic for a fixed iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Bisection for a sign change of `f` on `[lo, hi]`, refined to the absolute
/// tolerance `tol` on the abscissa.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::domain(format!(
            "bisect: no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monotone root solve for `f(x) = target` on `[lo, hi]` by bisection with a
/// Newton polish from a central difference slope.
pub fn solve_monotone<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let g = |x: f64| f(x) - target;
    let mut x = bisect(&g, lo, hi, (tol * 1e3).max(1e-9 * (hi - lo).abs()))?;
    let h = 1e-6 * (hi - lo).abs().max(1.0);
    for _ in 0..8 {
        let gx = g(x);
        if gx.abs() == 0.0 {
            break;
        }
        let slope = (g((x + h).min(hi)) - g((x - h).max(lo))) / ((x + h).min(hi) - (x - h).max(lo));
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let step = gx / slope;
        let xn = (x - step).clamp(lo, hi);
        if (xn - x).abs() <= tol {
            x = xn;
            break;
        }
        x = xn;
    }
    Ok(x)
}

/// Least squares line `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("linear_fit needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = neumaier_sum(xs.iter().copied()) / n;
    let my = neumaier_sum(ys.iter().copied()) / n;
    let sxx = neumaier_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    let sxy = neumaier_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    if sxx == 0.0 {
        return Err(Error::domain("linear_fit: degenerate abscissae"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Overdetermined least squares via SVD; returns the minimum-norm solution.
pub fn solve_lsq(a: nalgebra::DMatrix<f64>, b: nalgebra::DVector<f64>) -> Result<Vec<f64>> {
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::convergence(format!("svd least squares: {e}")))?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let s = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn monotone_solve_hits_target() {
        let r = solve_monotone(|x| x * x * x, 8.0, 0.0, 3.0, 1e-13).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (s, i) = linear_fit(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14);
    }
}
