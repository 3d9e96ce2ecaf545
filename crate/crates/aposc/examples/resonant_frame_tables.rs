//! Totally resonant forcing: build the transported first integral, the level
//! frame (R, T, Omega, K), and print the sampled tables.

use aposc::error::Result;
use aposc::normalform::{build_resonant_frame, oscillator_resonant_integral};
use aposc::oscillator::{Forcing, OscParams};

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;
    // frequency 4/3 closes up over the period 3 pi / 2: every mode resonant
    let f = Forcing::cosine(1.0, 0.04, 4.0 / 3.0);

    let integral = oscillator_resonant_integral(&p, &f)?;
    println!("sigma = {} (competing residual {:.3e})", integral.sigma, integral.residual_other);
    println!("transport residual = {:.3e}", integral.residual);
    println!("secular part of the exponent = {:.6e}", integral.secular);
    println!("envelope at t = 0, beta/3, beta/2:");
    for t in [0.0, p.period() / 3.0, p.period() / 2.0] {
        println!("  I(t, 1) = {:.8}", integral.eval(t, 1.0));
    }

    let input = integral.frame_input((1.0, 1.25, 1.75, 2.0));
    let frame = build_resonant_frame(input)?;
    println!("\nframe over h in [{:.6}, {:.6}]", frame.h_lo, frame.h_hi);
    println!("PDE residual = {:.3e}", frame.pde_residual);
    println!("shift identity defect = {:.3e}", frame.shift_defect);
    println!("max T' = {:.3e} (negative: period falls with level)", frame.t_prime_max);
    println!("min Omega' = {:.3e}", frame.omega_prime_min);

    let tables = frame.tables(5, 4)?;
    println!("\n  theta      h        R(theta, h)   K(theta, h)");
    for (i, &theta) in tables.theta.iter().enumerate() {
        for (j, &h) in tables.h.iter().enumerate() {
            println!(
                "{theta:8.4}  {h:6.3}   {:>11.7}  {:>11.7}",
                tables.r[i][j], tables.k[i][j]
            );
        }
    }
    println!("\n    h        T(h)        Omega(h)");
    for (j, &h) in tables.h.iter().enumerate() {
        println!("{h:8.4}  {:>9.6}  {:>11.8}", tables.t[j], tables.omega[j]);
    }
    Ok(())
}
