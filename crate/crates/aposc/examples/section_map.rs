//! The section map at large action and its scaled form on the band
//! v in [1, 2], with the first-order expansion made visible.

use aposc::error::Result;
use aposc::oscillator::{Forcing, OscParams};
use aposc::poincare::{delta_max, phi_scale, poincare_map, scaled_map, twist_value};

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;
    let f = Forcing::cosine(1.0, 0.3, 2f64.sqrt());
    let beta = p.period();
    let sc = phi_scale(&p);

    println!("beta = {beta}");
    println!("delta_max for this forcing = {}", delta_max(&p, &f));

    // (t1 - t0 - beta) sqrt(r0) converges to Phi(t0) as r0 grows, and the
    // returned action is recovered exactly from the deviation u1
    let t0 = 0.7;
    let (l, m) = twist_value(&p, &f, t0)?;
    println!("\nPhi(t0) = {}", sc * l);
    println!("Psi(t0) = {}", -sc * m);
    println!("   r0      (t1-t0-beta)*sqrt(r0)     action recovery defect");
    for exp in [4, 6, 8, 10] {
        let r0 = 10f64.powi(exp);
        let res = poincare_map(&p, t0, r0, &f, 1e-12)?;
        let time_slope = (res.t1 - t0 - beta) * r0.sqrt();
        let rebuilt = r0 + res.u1 * (2.0 * r0.sqrt() + res.u1);
        println!(
            "  1e{exp:<3} {time_slope:>20.12}   {:.3e}",
            (res.r1 - rebuilt).abs() / r0
        );
    }

    // scaled orbit: v stays in band, the crossing times drift by about beta
    let delta = 1e-3;
    let (mut t, mut v) = (0.0, 1.5);
    println!("\nscaled orbit with delta = {delta}:");
    for n in 0..8 {
        let step = scaled_map(&p, t, v, delta, &f, 1e-10)?;
        println!(
            "  n = {n}: t = {:>10.6}, v = {:.12}, r0 = {:.4e}",
            step.t1, step.v1, step.r0
        );
        t = step.t1;
        v = step.v1;
    }
    Ok(())
}
