//! Round-trip through the action-angle chart and follow the angle flow of a
//! forced orbit, comparing against the cartesian integration.

use aposc::error::Result;
use aposc::oscillator::{
    from_action_angle, integrate_cartesian, integrate_theta, to_action_angle, Forcing, OscParams,
    State,
};

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;

    // chart round trip at scattered states
    let mut worst = 0.0f64;
    for i in 0..50 {
        let s = State {
            x: 3.0 * (0.13 * i as f64).sin(),
            y: 2.0 * (0.29 * i as f64 + 0.4).cos(),
            t: 0.1 * i as f64,
        };
        if s.x.abs() + s.y.abs() < 0.3 {
            continue;
        }
        let aa = to_action_angle(&p, &s)?;
        let back = from_action_angle(&p, &aa)?;
        worst = worst.max((back.x - s.x).abs() + (back.y - s.y).abs());
    }
    println!("chart round-trip defect over 50 states: {worst:.3e}");

    // one forced revolution in both charts
    let f = Forcing::cosine(1.0, 0.3, 2f64.sqrt());
    let r0: f64 = 400.0;
    let s0 = State {
        x: p.rho_scale() * r0.sqrt(),
        y: 0.0,
        t: 0.0,
    };
    let run = integrate_theta(&p, 0.0, r0, &f, 1e-12, None, 0)?;
    println!("\ntheta flow through one revolution from r0 = {r0}:");
    println!("  t1 = {}", run.t1);
    println!("  r1 = {}", run.r1);
    println!("  min r along the way = {}", run.min_r);

    let traj = integrate_cartesian(&p, &s0, &f, run.t1, 1e-12, None)?;
    let end = traj.samples.last().unwrap();
    let aa_end = to_action_angle(&p, end)?;
    println!("  cartesian end action = {}", aa_end.r);
    println!("  chart disagreement = {:.3e}", (aa_end.r - run.r1).abs());
    Ok(())
}
