//! One small-divisor solve: truncate the twist model, solve the difference
//! equations mode by mode, and verify the residual.

use std::sync::Arc;

use aposc::apfun::{APSeries, FrequencyBasis, MultiIndex, SpatialStructure};
use aposc::error::Result;
use aposc::normalform::{
    difference_residual, model_from_oscillator, solve_homological_pair, truncate_series,
};
use aposc::oscillator::OscParams;

fn main() -> Result<()> {
    let p = OscParams::new(1.0, 4.0)?;
    let basis = FrequencyBasis::new(1, 2, vec![2f64.sqrt(), 3f64.sqrt()])?;
    let structure = SpatialStructure::power_family(&[1, 2], 3.0)?;
    let fs = APSeries::from_cosines(
        Arc::clone(&basis),
        Arc::clone(&structure),
        1.0,
        &[
            (MultiIndex::unit(1), 0.3, 0.0),
            (MultiIndex::unit(2), 0.2, 0.0),
        ],
    )?;

    let model = model_from_oscillator(&p, &fs, 1e-3, 1.0, 2.0, 0.25)?;
    println!("model beta = {}", model.beta);
    println!("l modes = {}, m modes = {}", model.l.len(), model.m.len());

    let tr = truncate_series(&model.l, 0.6, 0.3, 0.3, 0.15, 8.0)?;
    println!(
        "\ntruncation: head {} modes, tail {} modes, tail norm {:.3e} (bound {:.3e})",
        tr.head.len(),
        tr.tail.len(),
        tr.tail_norm,
        tr.tail_bound
    );

    let tm = truncate_series(&model.m, 0.6, 0.3, 0.3, 0.15, 8.0)?;
    let sol = solve_homological_pair(&tr.head, &tm.head, model.beta, 1e-8)?;
    println!("\nsmallest divisor met = {:.6e}", sol.divisor_floor);
    for (k, c) in sol.phi.terms() {
        println!("  Phi[{k}] = {:.6e}", c.magnitude());
    }
    let res = difference_residual(&sol.phi, &tr.head, model.beta)?;
    println!("difference-equation residual = {res:.3e}");
    Ok(())
}
