//! Batch driver: load a config, run one stage or the whole pipeline, and
//! drop a deterministic report bundle into the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aposc::config::ExperimentConfig;
use aposc::dioph::{detect_resonances, nonres_margin, rotation_admissible, scan_rotation_interval};
use aposc::error::Result;
use aposc::experiment::{
    find_invariant_curve, invariance_defect, run_boundedness, BoundednessSetup, CurveSetup,
};
use aposc::normalform::{
    build_resonant_frame, conjugate_U, difference_residual, drift_reduction,
    model_from_oscillator, oscillator_resonant_integral, resonant_split, solve_homological_pair,
    truncate_series,
};
use aposc::oscillator::{integrate_cartesian, to_action_angle, Forcing, State};
use aposc::poincare::{
    phi_scale, scaled_map, section_form_factor, section_jacobian, twist_check, twist_value,
    TWIST_FLOOR,
};
use aposc::report::{emit_report, CheckRecord, RunArtifacts, TwistRow};

#[derive(Parser)]
#[command(name = "aposc", version, about = "asymmetric oscillator laboratory")]
struct Cli {
    /// experiment config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory, overriding the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// integrator tolerance, overriding the config
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// sampling seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate the oscillator and dump the trajectory
    Simulate,
    /// Iterate the scaled section map from the configured seed point
    Poincare,
    /// Scan the twist integrals over one period
    TwistCheck,
    /// Scan small-divisor margins and the admissible rotation interval
    DiophScan,
    /// Truncate, solve the difference equations, conjugate, and build the
    /// resonant frame when resonant sets are declared
    Normalform,
    /// Fit an invariant curve from a section orbit
    Curve,
    /// Run the boundedness ensemble
    Boundedness,
    /// Run every stage and emit the full bundle
    Report,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        aposc::error::Error::config("no config file: pass --config <path>")
    })?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn energy_identity_check(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let grid: Vec<f64> = (0..=4096)
        .map(|i| i as f64 / 4096.0 * p.period())
        .collect();
    let defect = p.energy_identity_residual(&grid);
    arts.check(CheckRecord::verdict(
        "energy-identity",
        defect <= 1e-12,
        format!(
            "max |S^2 + a C_+^2 + b C_-^2 - a| = {defect:.3e}, tolerance 1e-12, {} nodes; oscillator",
            grid.len()
        ),
    ));
    Ok(())
}

fn cmd_simulate(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let f = cfg.forcing()?;
    let start = State {
        x: p.rho_scale() * cfg.r0.sqrt(),
        y: 0.0,
        t: cfg.t0,
    };
    let traj = integrate_cartesian(
        &p,
        &start,
        &f,
        cfg.t0 + cfg.t_end,
        cfg.tol,
        Some(p.period() / 64.0),
    )?;
    energy_identity_check(cfg, arts)?;
    arts.theta_track = Some(
        traj.samples
            .iter()
            .filter_map(|s| to_action_angle(&p, s).ok().map(|a| (a.t, a.r)))
            .collect(),
    );
    arts.trajectory = Some(traj);
    Ok(())
}

fn cmd_poincare(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let f = cfg.forcing()?;
    let mut orbit = vec![(cfg.t0, cfg.v0)];
    let (mut t, mut v) = (cfg.t0, cfg.v0);
    for _ in 0..cfg.iters {
        let step = scaled_map(&p, t, v, cfg.delta, &f, cfg.tol)?;
        t = step.t1;
        v = step.v1;
        orbit.push((t, v));
    }
    // the map transports D dr^dt, so det in (t, r) must equal D0/D1
    let r0 = 1.0 / (cfg.delta * cfg.v0 * (cfg.delta * cfg.v0));
    let jac = section_jacobian(&p, cfg.t0, r0, &f, cfg.tol, 1e-2, 1e-2)?;
    let probe = aposc::poincare::poincare_map(&p, cfg.t0, r0, &f, cfg.tol)?;
    let d0 = section_form_factor(&p, &f, cfg.t0, r0);
    let d1 = section_form_factor(&p, &f, probe.t1, probe.r1);
    let defect = (jac.det_tr * d1 / d0 - 1.0).abs();
    arts.check(CheckRecord::verdict(
        "area-preservation",
        defect <= 1e-6,
        format!(
            "|det * D1/D0 - 1| = {defect:.3e} at r0 = {r0:.3e}, tolerance 1e-6; poincare"
        ),
    ));
    arts.section = Some(orbit);
    Ok(())
}

fn cmd_twist(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let f = cfg.forcing()?;
    let tw = twist_check(&p, &f, cfg.grid, cfg.span)?;
    let sc = phi_scale(&p);
    let mut rows = Vec::with_capacity(cfg.grid);
    for i in 0..cfg.grid {
        let t0 = cfg.t0 + p.period() * i as f64 / cfg.grid as f64;
        let (l, m) = twist_value(&p, &f, t0)?;
        rows.push(TwistRow {
            t0,
            l,
            m,
            phi: sc * l,
            psi: -sc * m,
        });
    }
    arts.check(CheckRecord::verdict(
        "twist",
        tw.twist_ok && tw.stable,
        format!(
            "min |L| = {:.6e} over {} grid points (stable: {}), floor {TWIST_FLOOR:.0e}; poincare",
            tw.min_abs_l, tw.grid_n, tw.stable
        ),
    ));
    arts.twist = Some(rows);
    Ok(())
}

fn cmd_dioph(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let basis = cfg.basis()?;
    let structure = cfg.structure()?;
    let margin = nonres_margin(&basis, &structure, &cfg.delta_fn, cfg.kmax)?;
    let beta = cfg.beta_spec()?.value;
    let scan = scan_rotation_interval(
        cfg.alpha_window.0,
        cfg.alpha_window.1,
        cfg.grid,
        beta,
        cfg.delta,
        &basis,
        &structure,
        cfg.gamma,
        &cfg.delta_fn,
        cfg.kmax,
    )?;
    arts.check(CheckRecord::verdict(
        "rotation-admissible",
        scan.fraction > 0.0,
        format!(
            "admissible fraction {:.4} of {} alphas in [{}, {}], gamma = {}, kmax = {}; dioph",
            scan.fraction, scan.grid, cfg.alpha_window.0, cfg.alpha_window.1, cfg.gamma, cfg.kmax
        ),
    ));
    arts.margin = Some(margin);
    arts.rotation_scan = Some(scan);
    Ok(())
}

fn cmd_normalform(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let fs = cfg.forcing_series()?;
    let report =
        detect_resonances(&cfg.basis()?, &cfg.structure()?, &cfg.beta_spec()?, cfg.kmax, 1e-9)?;
    let model = model_from_oscillator(&p, &fs, cfg.delta, 1.0, 2.0, 0.25)?;

    // the homological stage targets the nonresonant oscillation only
    let lsplit = resonant_split(&model.l, &report)?;
    let msplit = resonant_split(&model.m, &report)?;
    let tl = truncate_series(&lsplit.ltilde, 0.6, 0.3, 0.3, 0.15, 8.0)?;
    let tm = truncate_series(&msplit.ltilde, 0.6, 0.3, 0.3, 0.15, 8.0)?;
    if tl.head.terms().next().is_some() || tm.head.terms().next().is_some() {
        let sol = solve_homological_pair(&tl.head, &tm.head, model.beta, 1e-8)?;
        let res = difference_residual(&sol.phi, &tl.head, model.beta)?
            .max(difference_residual(&sol.psi, &tm.head, model.beta)?);
        arts.check(CheckRecord::verdict(
            "homological-residual",
            res <= 1e-10,
            format!("difference-equation residual {res:.3e}, tolerance 1e-10; normalform"),
        ));
        // conjugating away resonant modes is impossible, so the 10x drift
        // criterion only applies when none were declared
        if report.resonant_sets.is_empty() {
            let conj = conjugate_U(&model, &sol)?;
            let drift = drift_reduction(&conj, cfg.span, 64, 5)?;
            arts.check(CheckRecord::verdict(
                "drift-reduction",
                drift.ratio >= 10.0,
                format!(
                    "oscillating drift {:.3e} -> {:.3e}, ratio {:.1} >= 10; normalform",
                    drift.raw, drift.conjugated, drift.ratio
                ),
            ));
        }
    }

    if report.resonant_sets.is_empty() {
        return Ok(());
    }
    let split = resonant_split(&fs, &report)?;
    let fbar = Forcing::compile(&split.lbar)?;
    let integral = oscillator_resonant_integral(&p, &fbar)?;
    arts.check(CheckRecord::verdict(
        "transport-residual",
        integral.residual <= 1e-6,
        format!(
            "transport residual {:.3e} with sigma = {}, tolerance 1e-6; normalform",
            integral.residual, integral.sigma
        ),
    ));
    let input = integral.frame_input((1.0, 1.25, 1.75, 2.0));
    let frame = build_resonant_frame(input)?;
    arts.check(CheckRecord::verdict(
        "pde-residual",
        frame.pde_residual <= 1e-8,
        format!(
            "first-integral PDE residual {:.3e}, tolerance 1e-8; shift defect {:.3e}; normalform",
            frame.pde_residual, frame.shift_defect
        ),
    ));
    arts.frame = Some(frame.tables(25, 9)?);
    Ok(())
}

fn cmd_curve(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let f = cfg.forcing()?;
    let basis = cfg.basis()?;
    let structure = cfg.structure()?;
    let setup = CurveSetup {
        t0: cfg.t0,
        v0: cfg.v0,
        delta: cfg.delta,
        iters: cfg.iters,
        kmax: cfg.kmax,
        tol: cfg.tol,
    };
    let fit = find_invariant_curve(&p, &f, &basis, &structure, &setup)?;
    arts.check(CheckRecord::verdict(
        "curve-residual",
        fit.success,
        format!(
            "fit residual {:.3e} over {} iterates, tolerance {:.1e}; experiment",
            fit.residual,
            fit.samples.len() - 1,
            10.0 * cfg.tol
        ),
    ));
    // the defect cannot resolve below the map's own accuracy
    let bound = (2.0 * fit.residual).max(cfg.tol);
    let defect = invariance_defect(&p, &f, cfg.delta, &fit, 50, cfg.tol)?;
    arts.check(CheckRecord::verdict(
        "curve-invariance",
        defect <= bound,
        format!(
            "image defect {defect:.3e} over 50 fresh points, tolerance max(2x residual, {:.1e}); experiment",
            cfg.tol
        ),
    ));
    if !arts.checks.iter().any(|c| c.id == "rotation-admissible") {
        let admissible = rotation_admissible(
            fit.rotation.value,
            &basis,
            &structure,
            cfg.gamma,
            &cfg.delta_fn,
            cfg.kmax,
        )?;
        arts.check(CheckRecord::verdict(
            "rotation-admissible",
            admissible,
            format!(
                "rotation {:.12} (alpha = {:.6}), gamma = {}, kmax = {}; dioph",
                fit.rotation.value, fit.alpha, cfg.gamma, cfg.kmax
            ),
        ));
    }
    arts.curve = Some(fit);
    Ok(())
}

fn cmd_boundedness(cfg: &ExperimentConfig, arts: &mut RunArtifacts) -> Result<()> {
    let p = cfg.params()?;
    let f = cfg.forcing()?;
    let tw = twist_check(&p, &f, 64, cfg.span)?;
    if !arts.checks.iter().any(|c| c.id == "twist") {
        arts.check(CheckRecord::verdict(
            "twist",
            tw.twist_ok && tw.stable,
            format!(
                "min |L| = {:.6e} over {} grid points (stable: {}), floor {TWIST_FLOOR:.0e}; poincare",
                tw.min_abs_l, tw.grid_n, tw.stable
            ),
        ));
    }
    let setup = BoundednessSetup {
        ensemble: cfg.ensemble,
        delta: cfg.delta,
        t_end: cfg.t_end,
        tol: cfg.tol,
        seed: cfg.seed,
        checkpoints: 33,
    };
    let report = run_boundedness(&p, &f, tw.twist_ok && tw.stable, &setup)?;
    let clean = report.orbits.iter().filter(|o| o.error.is_none()).count();
    arts.check(CheckRecord::verdict(
        "boundedness-slope",
        report.max_slope <= 0.02 && clean == report.orbits.len(),
        format!(
            "max log-log growth slope {:.4} over {clean}/{} orbits to t = {:.1e}, threshold 0.02 ({}); experiment",
            report.max_slope,
            report.orbits.len(),
            report.t_end,
            report.label
        ),
    ));
    arts.boundedness = Some(report);
    Ok(())
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = load(cli)?;
    let mut arts = RunArtifacts::new(cfg.echo(), cfg.seed);
    match cli.cmd {
        Cmd::Simulate => cmd_simulate(&cfg, &mut arts)?,
        Cmd::Poincare => cmd_poincare(&cfg, &mut arts)?,
        Cmd::TwistCheck => cmd_twist(&cfg, &mut arts)?,
        Cmd::DiophScan => cmd_dioph(&cfg, &mut arts)?,
        Cmd::Normalform => cmd_normalform(&cfg, &mut arts)?,
        Cmd::Curve => cmd_curve(&cfg, &mut arts)?,
        Cmd::Boundedness => cmd_boundedness(&cfg, &mut arts)?,
        Cmd::Report => {
            cmd_simulate(&cfg, &mut arts)?;
            cmd_poincare(&cfg, &mut arts)?;
            cmd_twist(&cfg, &mut arts)?;
            cmd_dioph(&cfg, &mut arts)?;
            cmd_normalform(&cfg, &mut arts)?;
            cmd_curve(&cfg, &mut arts)?;
            cmd_boundedness(&cfg, &mut arts)?;
        }
    }
    emit_report(&arts, &cfg.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
