//! Ten go/no-go gates over the whole pipeline, run in order with a stated
//! tolerance and a wall-clock budget each; one printed verdict line per gate.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aposc::apfun::{APSeries, FrequencyBasis, IndexSet, MultiIndex, SpatialStructure};
use aposc::dioph::{nonres_margin, scan_rotation_interval, ApproxFn};
use aposc::experiment::{
    find_invariant_curve, invariance_defect, run_boundedness, BoundednessSetup, CurveSetup,
};
use aposc::normalform::{
    build_resonant_frame, conjugate_U, difference_residual, drift_reduction,
    model_from_oscillator, oscillator_resonant_integral, solve_homological,
    solve_homological_pair, truncate_series, FrameInput,
};
use aposc::oscillator::{Forcing, OscParams};
use aposc::poincare::{expansion_order, phi_scale, poincare_map, twist_check, twist_value};

fn two_mode_forcing() -> (Arc<FrequencyBasis>, Arc<SpatialStructure>, APSeries) {
    let basis = FrequencyBasis::new(1, 2, vec![2f64.sqrt(), 3f64.sqrt()]).unwrap();
    let structure = SpatialStructure::power_family(&[1, 2], 3.0).unwrap();
    let fs = APSeries::from_cosines(
        Arc::clone(&basis),
        Arc::clone(&structure),
        1.0,
        &[
            (MultiIndex::unit(1), 0.3, 0.0),
            (MultiIndex::unit(2), 0.2, 0.0),
        ],
    )
    .unwrap();
    (basis, structure, fs)
}

fn c01_base_identity() -> String {
    let mut worst = 0.0f64;
    for (a, b) in [(1.0, 4.0), (2.0, 3.0), (1.0, 9.0)] {
        let p = OscParams::new(a, b).unwrap();
        let grid: Vec<f64> = (0..10_000)
            .map(|i| i as f64 / 10_000.0 * 3.0 * p.period())
            .collect();
        let res = p.energy_identity_residual(&grid);
        assert!(res <= 1e-12, "identity residual {res:.3e} at a={a}, b={b}");
        worst = worst.max(res);
    }
    format!("max identity residual {worst:.3e} <= 1e-12 over 3 parameter pairs")
}

fn c02_unforced_section() -> String {
    let p = OscParams::new(1.0, 4.0).unwrap();
    let f = Forcing::zero();
    let beta = p.period();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t0: f64 = rng.gen_range(0.0..20.0);
        let r0 = 10f64.powf(rng.gen_range(1.2..6.0));
        let res = poincare_map(&p, t0, r0, &f, 1e-12).unwrap();
        let err = (res.t1 - t0 - beta).abs().max((res.r1 - r0).abs());
        assert!(err <= 1e-10, "unforced return error {err:.3e} at r0 {r0:.3e}");
        worst = worst.max(err);
    }
    format!("max |(t1, r1) - (t0 + beta, r0)| = {worst:.3e} <= 1e-10 over 100 seeds")
}

fn c03_constant_forcing_conserves_r() -> String {
    let p = OscParams::new(1.0, 4.0).unwrap();
    let f = Forcing::constant(1.0);
    let mut worst = 0.0f64;
    for r0 in [1e3, 1e5] {
        for t0 in [0.0, 1.3, 3.7] {
            let res = poincare_map(&p, t0, r0, &f, 1e-12).unwrap();
            let err = (res.r1 - r0).abs();
            assert!(err <= 1e-8, "|r1 - r0| = {err:.3e} at r0 {r0:.0e}");
            worst = worst.max(err);
        }
    }
    format!("max |r1 - r0| = {worst:.3e} <= 1e-8 at r0 in {{1e3, 1e5}}")
}

fn c04_twist_constant() -> String {
    let p = OscParams::new(1.0, 4.0).unwrap();
    let f = Forcing::constant(1.0);
    let mut worst = 0.0f64;
    for i in 0..64 {
        let t0 = p.period() * i as f64 / 64.0;
        let (l, _) = twist_value(&p, &f, t0).unwrap();
        worst = worst.max((l - 2.0).abs());
    }
    assert!(worst <= 1e-9, "L deviates from 2 by {worst:.3e}");
    let mean_phi = phi_scale(&p) * 2.0;
    let formula = p.omega_tilde() * p.rho_scale() * (1.0 / p.a - 1.0 / p.b) * p.a.sqrt();
    let diff = (mean_phi - formula).abs();
    assert!(diff <= 1e-8, "meanPhi {mean_phi} vs closed form {formula}");
    format!("|L - 2| <= {worst:.3e} on 64 nodes; meanPhi = {mean_phi:.6} matches the closed form within {diff:.1e}")
}

fn c05_expansion_slopes() -> String {
    let p = OscParams::new(1.0, 4.0).unwrap();
    let f = Forcing::cosine(1.0, 0.3, 2f64.sqrt());
    let ladder: Vec<f64> = (0..9).map(|i| 10f64.powf(3.0 + 0.5 * i as f64)).collect();
    let fit = expansion_order(&p, &f, 0.7, &ladder, 1e-12).unwrap();
    assert!(!fit.exact, "remainders unexpectedly at noise floor");
    assert!(
        (fit.t_slope + 1.0).abs() <= 0.15,
        "t-remainder slope {} not near -1",
        fit.t_slope
    );
    assert!(
        (fit.z_slope + 0.5).abs() <= 0.15,
        "sqrt(r)-remainder slope {} not near -1/2",
        fit.z_slope
    );
    format!(
        "remainder slopes {:.3} (want -1) and {:.3} (want -1/2) over r in [1e3, 1e7]",
        fit.t_slope, fit.z_slope
    )
}

fn c06_homological_solver() -> String {
    let basis = FrequencyBasis::new(1, 2, vec![2f64.sqrt(), 3f64.sqrt()]).unwrap();
    let structure = SpatialStructure::power_family(&[1, 2], 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let modes: Vec<MultiIndex> = MultiIndex::enumerate(1, 2, 3)
        .into_iter()
        .filter(|k| !k.is_zero())
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut h = APSeries::zero(Arc::clone(&basis), Arc::clone(&structure));
        for k in &modes {
            if rng.gen_bool(0.6) {
                let mag = 10f64.powf(rng.gen_range(-3.0..0.0));
                let ph = rng.gen_range(0.0..std::f64::consts::TAU);
                h.add_term(k.clone(), Complex64::from_polar(mag, ph)).unwrap();
            }
        }
        if h.is_empty() {
            h.add_term(MultiIndex::unit(1), Complex64::new(0.5, 0.0)).unwrap();
        }
        let (phi, _) = solve_homological(&h, 1.0, 1e-8).unwrap();
        let res = difference_residual(&phi, &h, 1.0).unwrap();
        assert!(res <= 1e-13, "relative residual {res:.3e}");
        worst = worst.max(res);
    }

    // a mode whose divisor vanishes must be rejected by name
    let res_basis = FrequencyBasis::new(1, 1, vec![1.0]).unwrap();
    let res_structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
    let mut bad = APSeries::zero(res_basis, res_structure);
    bad.add_term(MultiIndex::unit(1), Complex64::new(1.0, 0.0)).unwrap();
    let err = solve_homological(&bad, std::f64::consts::TAU, 1e-8).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("1:1"), "rejection does not name the mode: {msg}");
    format!("max relative residual {worst:.3e} <= 1e-13 over 50 random series; resonant mode named in {msg:?}")
}

fn c07_conjugation_drift() -> String {
    let p = OscParams::new(1.0, 4.0).unwrap();
    let basis = FrequencyBasis::new(1, 1, vec![2f64.sqrt()]).unwrap();
    let structure = SpatialStructure::power_family(&[1], 3.0).unwrap();
    let fs = APSeries::from_cosines(
        Arc::clone(&basis),
        Arc::clone(&structure),
        1.0,
        &[(MultiIndex::unit(1), 0.3, 0.0)],
    )
    .unwrap();
    let model = model_from_oscillator(&p, &fs, 1e-3, 1.0, 2.0, 0.25).unwrap();
    let tl = truncate_series(&model.l, 0.6, 0.3, 0.3, 0.15, 8.0).unwrap();
    let tm = truncate_series(&model.m, 0.6, 0.3, 0.3, 0.15, 8.0).unwrap();
    let sol = solve_homological_pair(&tl.head, &tm.head, model.beta, 1e-8).unwrap();
    let conj = conjugate_U(&model, &sol).unwrap();
    let drift = drift_reduction(&conj, 600.0, 96, 7).unwrap();
    assert!(
        drift.ratio >= 10.0,
        "drift reduction {:.2} below 10",
        drift.ratio
    );
    format!(
        "x-dependent drift {:.3e} -> {:.3e}, reduction {:.0}x >= 10x",
        drift.raw, drift.conjugated, drift.ratio
    )
}

fn c08_resonant_frame() -> String {
    // closed form: lbar = r, mbar = 0, so I = v, R = h, T = beta/h,
    // Omega = h, K = theta/r
    let beta = 1.5 * std::f64::consts::PI;
    let input = FrameInput {
        beta,
        lbar: Box::new(|_t, v| v),
        mbar: Box::new(|_t, _v| 0.0),
        integral: Box::new(|_t, v| v),
        di_dtheta: Box::new(|_t, _v| 0.0),
        di_dy: Box::new(|_t, _v| 1.0),
        y_bounds: (1.0, 1.25, 1.75, 2.0),
    };
    let frame = build_resonant_frame(input).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let h = rng.gen_range(frame.h_lo..frame.h_hi);
        let theta = rng.gen_range(-2.0 * beta..3.0 * beta);
        let r = rng.gen_range(1.05..1.95);
        worst = worst
            .max((frame.r_of(theta, h).unwrap() - h).abs())
            .max((frame.period(h).unwrap() - beta / h).abs())
            .max((frame.frequency(h).unwrap() - h).abs())
            .max((frame.k_of(theta, r).unwrap() - theta / r).abs());
    }
    assert!(worst <= 1e-10, "closed-form frame defect {worst:.3e}");
    assert!(frame.shift_defect <= 1e-8, "shift defect {:.3e}", frame.shift_defect);
    assert!(frame.t_prime_max < 0.0, "T' = {:.3e} not negative", frame.t_prime_max);

    // oscillator case: 4/3 forcing closes up over the period
    let p = OscParams::new(1.0, 4.0).unwrap();
    let f = Forcing::cosine(1.0, 0.04, 4.0 / 3.0);
    let integral = oscillator_resonant_integral(&p, &f).unwrap();
    assert!(
        integral.residual <= 1e-8,
        "transport residual {:.3e}",
        integral.residual
    );
    format!(
        "closed-form tables match within {worst:.3e} <= 1e-10, shift defect {:.1e}, T' max {:.2}; oscillator transport residual {:.3e} <= 1e-8 with sigma = {}",
        frame.shift_defect, frame.t_prime_max, integral.residual, integral.sigma
    )
}

fn c09_dioph_suite() -> String {
    // all 20 nonempty subintervals of [-3, 2] except the leftmost singleton
    let mut sets = Vec::new();
    for lo in -3..=2 {
        for hi in lo..=2 {
            if (lo, hi) != (-3, -3) {
                sets.push(IndexSet::new(lo..=hi).unwrap());
            }
        }
    }
    assert_eq!(sets.len(), 20);
    let structure = SpatialStructure::new(sets.clone(), 3.0).unwrap();
    for a in &sets {
        for b in &sets {
            if a.is_subset(b) {
                assert!(structure.weight(a) <= structure.weight(b), "monotonicity {a} {b}");
            }
            let u = a.union(b);
            assert!(
                structure.weight(&u) <= structure.weight(a) + structure.weight(b),
                "subadditivity {a} {b}"
            );
        }
    }

    let basis = FrequencyBasis::new(1, 3, vec![1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
    let st = SpatialStructure::power_family(&[1, 2, 3], 3.0).unwrap();
    let delta = ApproxFn::default();
    let margin = nonres_margin(&basis, &st, &delta, 8).unwrap();
    assert!(margin.margin > 0.0, "margin not positive");

    let frac = |g: f64| {
        scan_rotation_interval(0.0, 1.0, 50, 1.0, 0.3, &basis, &st, g, &delta, 8)
            .unwrap()
            .fraction
    };
    let ladder = [frac(0.1), frac(0.01), frac(0.001)];
    assert!(
        ladder[0] <= ladder[1] && ladder[1] <= ladder[2],
        "fraction ladder not monotone: {ladder:?}"
    );
    format!(
        "weight axioms exact on 400 pairs; margin {:.3e} > 0 at K = 8 (scanned {}); fraction ladder {:.2} <= {:.2} <= {:.2}",
        margin.margin, margin.scanned, ladder[0], ladder[1], ladder[2]
    )
}

fn c10_end_to_end() -> String {
    let p = OscParams::new(1.0, 4.0).unwrap();
    let (basis, structure, fs) = two_mode_forcing();
    let f = Forcing::compile(&fs).unwrap();

    let tw = twist_check(&p, &f, 256, 600.0).unwrap();
    assert!(tw.twist_ok && tw.stable, "twist predicate failed: {tw:?}");

    let setup = BoundednessSetup {
        ensemble: 20,
        delta: 1e-3,
        t_end: 1e4,
        tol: 1e-10,
        seed: 42,
        checkpoints: 33,
    };
    let report = run_boundedness(&p, &f, true, &setup).unwrap();
    for o in &report.orbits {
        assert!(o.error.is_none(), "orbit at t0 {} failed: {:?}", o.t0, o.error);
    }
    assert!(
        report.max_slope <= 0.02,
        "growth slope {} above 0.02",
        report.max_slope
    );

    let curve_setup = CurveSetup {
        t0: 0.0,
        v0: 1.5,
        delta: 1e-3,
        iters: 2000,
        kmax: 2,
        tol: 1e-10,
    };
    let fit = find_invariant_curve(&p, &f, &basis, &structure, &curve_setup).unwrap();
    assert!(fit.residual <= 1e-5, "curve residual {:.3e}", fit.residual);
    let defect = invariance_defect(&p, &f, curve_setup.delta, &fit, 50, curve_setup.tol).unwrap();
    assert!(
        defect <= 2.0 * fit.residual,
        "invariance defect {defect:.3e} above 2x residual {:.3e}",
        fit.residual
    );
    format!(
        "twist min |L| = {:.3}; slope {:.4} <= 0.02 over 20 orbits; curve residual {:.3e} <= 1e-5 with re-test {:.3e} <= 2x",
        tw.min_abs_l, report.max_slope, fit.residual, defect
    )
}

#[test]
fn acceptance() {
    let gates: [(&str, u64, fn() -> String); 10] = [
        ("base-pair identity", 1, c01_base_identity),
        ("unforced section exactness", 10, c02_unforced_section),
        ("constant-forcing conservation", 10, c03_constant_forcing_conserves_r),
        ("twist constant", 5, c04_twist_constant),
        ("expansion remainder orders", 120, c05_expansion_slopes),
        ("homological solver", 5, c06_homological_solver),
        ("conjugation drift reduction", 60, c07_conjugation_drift),
        ("resonant frame", 60, c08_resonant_frame),
        ("diophantine suite", 30, c09_dioph_suite),
        ("end-to-end scenario", 600, c10_end_to_end),
    ];
    let mut failures = Vec::new();
    for (i, (name, limit_s, gate)) in gates.iter().enumerate() {
        let limit = Duration::from_secs(*limit_s);
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(gate));
        let took = start.elapsed();
        let n = i + 1;
        match outcome {
            Ok(detail) if took <= limit => {
                println!("criterion {n:>2} {name}: PASS ({detail}) [{took:.1?} <= {limit_s}s]");
            }
            Ok(detail) => {
                println!(
                    "criterion {n:>2} {name}: FAIL (over budget: {took:.1?} > {limit_s}s) ({detail})"
                );
                failures.push(format!("{n} {name}: over time budget {took:.1?}"));
            }
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "opaque panic".to_string());
                println!("criterion {n:>2} {name}: FAIL ({msg}) [{took:.1?}]");
                failures.push(format!("{n} {name}: {msg}"));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
