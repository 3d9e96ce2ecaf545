//! Weighted norms, small-divisor margins over a set family, and the gamma
//! ladder of admissible rotations.

use std::sync::Arc;

use aposc::apfun::{APSeries, FrequencyBasis, MultiIndex, SpatialStructure};
use aposc::dioph::{nonres_margin, scan_rotation_interval, ApproxFn};
use aposc::error::Result;

fn main() -> Result<()> {
    let basis = FrequencyBasis::new(1, 3, vec![1.0, 2f64.sqrt(), 3f64.sqrt()])?;
    let structure = SpatialStructure::power_family(&[1, 2, 3], 3.0)?;
    println!("sets in the family: {}", structure.sets().len());
    for a in structure.sets().iter().take(4) {
        println!("  weight[{a}] = {}", structure.weight(a));
    }

    // weighted norms of a small series at a few exponent pairs
    let s = APSeries::from_cosines(
        Arc::clone(&basis),
        Arc::clone(&structure),
        1.0,
        &[
            (MultiIndex::unit(2), 0.3, 0.0),
            (MultiIndex::unit(3), 0.2, 0.0),
        ],
    )?;
    for (m, r) in [(0.5, 0.5), (1.0, 0.5), (1.0, 1.0)] {
        println!("||f||_({m}, {r}) = {}", s.weighted_norm(m, r)?);
    }

    // smallest Diophantine product over supported modes up to each order
    let delta = ApproxFn::default();
    println!("\n kmax   margin            attained at");
    for kmax in [2, 4, 6, 8] {
        let rep = nonres_margin(&basis, &structure, &delta, kmax)?;
        println!(
            "  {kmax}    {:>12.6e}    {} (scanned {})",
            rep.margin, rep.attained_at, rep.scanned
        );
    }

    // admissible fraction grows as gamma shrinks; the coupling is taken large
    // enough that the alpha window sweeps a real range of rotations
    println!("\n gamma     admissible fraction on [0, 1]");
    for gamma in [0.2, 0.1, 0.05, 0.01] {
        let scan =
            scan_rotation_interval(0.0, 1.0, 400, 1.0, 0.3, &basis, &structure, gamma, &delta, 6)?;
        println!("  {gamma:<6}   {:.4}", scan.fraction);
    }
    Ok(())
}
