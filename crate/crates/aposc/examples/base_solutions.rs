//! The piecewise trigonometric base pair C, S of the unforced asymmetric
//! oscillator: sample them, check the first-integral identity and the period.

use aposc::error::Result;
use aposc::oscillator::OscParams;

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;
    println!("a = {}, b = {}", p.a, p.b);
    println!("omega_tilde = {}", p.omega_tilde());
    println!("period beta = {}", p.period());
    println!("kink angles = {:?}", p.kink_thetas());
    println!("sup |C| = {}", p.c_sup());

    println!("\n    t        C(t)       S(t)");
    for i in 0..12 {
        let t = p.period() * i as f64 / 12.0;
        println!("{:8.4}  {:9.6}  {:9.6}", t, p.base_c(t), p.base_s(t));
    }

    // S^2 + a C_+^2 + b C_-^2 is constant: the energy of the base solution
    let grid: Vec<f64> = (0..=20000)
        .map(|i| i as f64 / 20000.0 * 3.0 * p.period())
        .collect();
    let defect = p.energy_identity_residual(&grid);
    println!("\nenergy identity residual over {} nodes: {defect:.3e}", grid.len());

    // periodicity of the pair
    let mut per = 0.0f64;
    for i in 0..1000 {
        let t = 0.013 * i as f64;
        per = per
            .max((p.base_c(t + p.period()) - p.base_c(t)).abs())
            .max((p.base_s(t + p.period()) - p.base_s(t)).abs());
    }
    println!("periodicity defect over 1000 samples: {per:.3e}");
    Ok(())
}
