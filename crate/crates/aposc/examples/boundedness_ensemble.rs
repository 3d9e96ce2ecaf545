//! A small boundedness ensemble: seed orbits on the section band, integrate,
//! and watch the running sup of |x| + |y| plateau.

use aposc::error::Result;
use aposc::experiment::{run_boundedness, BoundednessSetup};
use aposc::oscillator::{Forcing, OscParams};
use aposc::poincare::twist_check;

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;
    let f = Forcing::cosine(1.0, 0.3, 2f64.sqrt());

    let tw = twist_check(&p, &f, 64, 600.0)?;
    println!("twist predicate: {}", tw.twist_ok && tw.stable);

    let setup = BoundednessSetup {
        ensemble: 6,
        delta: 5e-3,
        t_end: 2000.0,
        tol: 1e-10,
        seed: 42,
        checkpoints: 17,
    };
    let report = run_boundedness(&p, &f, tw.twist_ok && tw.stable, &setup)?;
    println!("label = {}", report.label);
    println!("\n orbit    t0        v0       max sup     slope");
    for (i, o) in report.orbits.iter().enumerate() {
        println!(
            "  {i}    {:7.4}   {:.4}   {:9.3}   {:+.5}",
            o.t0, o.v0, o.max_sup, o.slope
        );
        if let Some(e) = &o.error {
            println!("       error: {e}");
        }
    }
    println!("\nmax growth slope = {:.5}", report.max_slope);

    let probe = &report.orbits[0];
    println!("\nrunning sup for orbit 0:");
    for &(t, sup) in probe.checkpoints.iter().step_by(2) {
        println!("  t = {t:>9.2}: sup = {sup:.4}");
    }
    Ok(())
}
