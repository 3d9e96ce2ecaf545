//! Scan the twist integral L over a period with a stability-doubled grid and
//! show the mode-transfer picture behind it.

use std::sync::Arc;

use aposc::apfun::{APSeries, FrequencyBasis, MultiIndex, SpatialStructure};
use aposc::error::Result;
use aposc::oscillator::{Forcing, OscParams};
use aposc::poincare::{mode_transfer, phi_scale, twist_check, twist_series, TWIST_FLOOR};

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;
    let f = Forcing::cosine(1.0, 0.3, 2f64.sqrt());

    let tw = twist_check(&p, &f, 64, 600.0)?;
    println!("twist scan: min |L| = {} on {} points", tw.min_abs_l, tw.grid_n);
    println!("floor = {TWIST_FLOOR:.0e}, stable = {}, ok = {}", tw.stable, tw.twist_ok);

    // mode by mode: the constant forcing mode carries L's mean, each cosine
    // is passed through the transfer gain at its frequency
    let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()])?;
    let structure = SpatialStructure::power_family(&[1], 3.0)?;
    let fs = APSeries::from_cosines(
        Arc::clone(&basis),
        Arc::clone(&structure),
        1.0,
        &[(MultiIndex::unit(1), 0.3, 0.0)],
    )?;
    let (l_series, _) = twist_series(&p, &fs)?;
    let l0 = l_series.coefficient(&MultiIndex::zero()).unwrap();
    println!("\nconstant mode of the L series = {}", l0.magnitude());
    println!("mean Phi = {}", phi_scale(&p) * l0.magnitude());

    // per-frequency gains: how a forcing mode at nu shows up in L and M
    println!("\n   nu       |G_C(nu)|    |G_S(nu)|");
    for nu in [0.5, 1.0, 4.0 / 3.0, 2f64.sqrt(), 2.0, 3f64.sqrt() * 2.0] {
        let (gc, gs) = mode_transfer(&p, nu)?;
        println!("{nu:8.4}   {:9.5}    {:9.5}", gc.norm(), gs.norm());
    }
    Ok(())
}
