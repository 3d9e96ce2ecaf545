//! Deterministic report and CSV emission. Every file carries the seed, every
//! numeric claim names its tolerance and the module that produced it, and a
//! rerun with the same inputs is bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dioph::{MarginReport, RotationScan};
use crate::error::Result;
use crate::experiment::{BoundednessReport, CurveFit};
use crate::normalform::FrameTables;
use crate::oscillator::Trajectory;

/// The five checks a full pipeline run certifies.
pub const CERTIFIED_CHECKS: [&str; 5] = [
    "energy-identity",
    "area-preservation",
    "twist",
    "rotation-admissible",
    "pde-residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotRun,
}

impl CheckStatus {
    fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotRun => "not-run",
        }
    }
}

/// One verdict line: `detail` states the measured value, the tolerance, and
/// the producing module.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub id: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckRecord {
    pub fn pass(id: &str, detail: impl Into<String>) -> Self {
        CheckRecord { id: id.to_string(), status: CheckStatus::Pass, detail: detail.into() }
    }

    pub fn fail(id: &str, detail: impl Into<String>) -> Self {
        CheckRecord { id: id.to_string(), status: CheckStatus::Fail, detail: detail.into() }
    }

    pub fn verdict(id: &str, ok: bool, detail: impl Into<String>) -> Self {
        if ok {
            CheckRecord::pass(id, detail)
        } else {
            CheckRecord::fail(id, detail)
        }
    }
}

/// A twist scan row for the section map.
#[derive(Debug, Clone, Copy)]
pub struct TwistRow {
    pub t0: f64,
    pub l: f64,
    pub m: f64,
    pub phi: f64,
    pub psi: f64,
}

/// Everything one run produced; absent pieces simply emit no file.
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub config_echo: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub trajectory: Option<Trajectory>,
    /// (t, r) along the angular chart
    pub theta_track: Option<Vec<(f64, f64)>>,
    /// scaled section orbit (t_n, v_n), n implicit
    pub section: Option<Vec<(f64, f64)>>,
    pub twist: Option<Vec<TwistRow>>,
    pub curve: Option<CurveFit>,
    pub boundedness: Option<BoundednessReport>,
    pub margin: Option<MarginReport>,
    pub rotation_scan: Option<RotationScan>,
    pub frame: Option<FrameTables>,
}

impl RunArtifacts {
    pub fn new(config_echo: impl Into<String>, seed: u64) -> Self {
        RunArtifacts { config_echo: config_echo.into(), seed, ..RunArtifacts::default() }
    }

    pub fn check(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }
}

/// Write one CSV: a `# seed = N` comment, the fixed header, then the rows.
/// Returns the row count.
pub fn write_csv<I>(path: &Path, seed: u64, header: &str, rows: I) -> Result<usize>
where
    I: IntoIterator<Item = String>,
{
    let mut text = format!("# seed = {seed}\n{header}\n");
    let mut n = 0usize;
    for row in rows {
        text.push_str(&row);
        text.push('\n');
        n += 1;
    }
    fs::write(path, text)?;
    Ok(n)
}

fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Emit `report.txt` plus one CSV per present artifact into `out_dir`.
/// Returns the written paths in emission order.
pub fn emit_report(artifacts: &RunArtifacts, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let seed = artifacts.seed;
    let mut written: Vec<(PathBuf, usize)> = Vec::new();
    let mut emit = |name: &str, header: &str, rows: Vec<String>| -> Result<()> {
        let path = out_dir.join(name);
        let n = write_csv(&path, seed, header, rows)?;
        written.push((path, n));
        Ok(())
    };

    if let Some(traj) = &artifacts.trajectory {
        let rows = traj
            .samples
            .iter()
            .map(|s| format!("{},{},{}", s.t, s.x, s.y))
            .collect();
        emit("trajectory.csv", "t,x,y", rows)?;
    }
    if let Some(track) = &artifacts.theta_track {
        let rows = track.iter().map(|(t, r)| format!("{t},{r}")).collect();
        emit("theta.csv", "t,r", rows)?;
    }
    if let Some(orbit) = &artifacts.section {
        let rows = orbit
            .iter()
            .enumerate()
            .map(|(n, (t, v))| format!("{n},{t},{v}"))
            .collect();
        emit("section.csv", "n,t,v", rows)?;
    }
    if let Some(twist) = &artifacts.twist {
        let rows = twist
            .iter()
            .map(|w| format!("{},{},{},{},{}", w.t0, w.l, w.m, w.phi, w.psi))
            .collect();
        emit("twist.csv", "t0,L,M,Phi,Psi", rows)?;
    }
    if let Some(fit) = &artifacts.curve {
        let mut rows = Vec::with_capacity(fit.samples.len());
        for (n, &(t, v)) in fit.samples.iter().enumerate() {
            rows.push(format!("{n},{t},{v},{}", fit.phi.evaluate(t)?));
        }
        emit("curve.csv", "n,t,v,phi", rows)?;
    }
    if let Some(b) = &artifacts.boundedness {
        let rows = b
            .orbits
            .iter()
            .enumerate()
            .map(|(i, o)| {
                format!(
                    "{i},{},{},{},{},{},{}",
                    o.t0,
                    o.v0,
                    o.r0,
                    o.max_sup,
                    o.slope,
                    quote(o.error.as_deref().unwrap_or(""))
                )
            })
            .collect();
        emit("boundedness.csv", "orbit,t0,v0,r0,max_sup,slope,error", rows)?;
        let mut rows = Vec::new();
        for (i, o) in b.orbits.iter().enumerate() {
            for &(t, sup) in &o.checkpoints {
                rows.push(format!("{i},{t},{sup}"));
            }
        }
        emit("checkpoints.csv", "orbit,t,running_sup", rows)?;
    }
    if let Some(m) = &artifacts.margin {
        let rows = vec![format!(
            "{},{},{},{},{},{}",
            m.margin,
            m.inner,
            m.exact_zero,
            m.kmax,
            m.scanned,
            quote(&m.attained_at.to_string())
        )];
        emit("margins.csv", "margin,inner,exact_zero,kmax,scanned,attained_at", rows)?;
    }
    if let Some(scan) = &artifacts.rotation_scan {
        let rows = scan.admissible.iter().map(|a| format!("{a}")).collect();
        emit("rotation.csv", "alpha", rows)?;
    }
    if let Some(f) = &artifacts.frame {
        let mut rows = Vec::with_capacity(f.theta.len() * f.h.len());
        for (i, &theta) in f.theta.iter().enumerate() {
            for (j, &h) in f.h.iter().enumerate() {
                rows.push(format!("{theta},{h},{},{}", f.r[i][j], f.k[i][j]));
            }
        }
        emit("frame.csv", "theta,h,r,k", rows)?;
        let rows = f
            .h
            .iter()
            .zip(f.t.iter().zip(&f.omega))
            .map(|(h, (t, om))| format!("{h},{t},{om}"))
            .collect();
        emit("frame_levels.csv", "h,T,Omega", rows)?;
    }

    let mut text = String::new();
    writeln!(text, "# aposc run report").unwrap();
    writeln!(text, "version = {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(text, "seed = {seed}").unwrap();
    writeln!(text).unwrap();
    writeln!(text, "[config]").unwrap();
    if artifacts.config_echo.is_empty() {
        writeln!(text, "(none)").unwrap();
    } else {
        writeln!(text, "{}", artifacts.config_echo.trim_end()).unwrap();
    }
    writeln!(text).unwrap();
    writeln!(text, "[checks]").unwrap();
    for id in CERTIFIED_CHECKS {
        match artifacts.checks.iter().find(|c| c.id == id) {
            Some(c) => writeln!(text, "{}: {}  {}", c.id, c.status.label(), c.detail).unwrap(),
            None => writeln!(text, "{id}: not-run  stage not executed").unwrap(),
        }
    }
    for c in &artifacts.checks {
        if !CERTIFIED_CHECKS.contains(&c.id.as_str()) {
            writeln!(text, "{}: {}  {}", c.id, c.status.label(), c.detail).unwrap();
        }
    }
    writeln!(text).unwrap();
    writeln!(text, "[artifacts]").unwrap();
    if written.is_empty() {
        writeln!(text, "(none)").unwrap();
    }
    for (path, rows) in &written {
        let name = path.file_name().unwrap().to_string_lossy();
        writeln!(text, "{name}: {rows} rows").unwrap();
    }
    let report_path = out_dir.join("report.txt");
    fs::write(&report_path, text)?;

    let mut paths: Vec<PathBuf> = written.into_iter().map(|(p, _)| p).collect();
    paths.push(report_path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_boundedness, BoundednessSetup};
    use crate::oscillator::{Forcing, OscParams};

    #[test]
    fn empty_run_emits_a_header_only_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let arts = RunArtifacts::new("", 7);
        let paths = emit_report(&arts, dir.path()).unwrap();
        assert_eq!(paths.len(), 1);
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert!(text.contains("seed = 7"));
        assert!(text.contains("version = "));
        for id in CERTIFIED_CHECKS {
            assert!(text.contains(&format!("{id}: not-run")), "missing {id}");
        }
        assert!(text.contains("(none)"));

        // a rerun produces identical bytes
        let dir2 = tempfile::tempdir().unwrap();
        let paths2 = emit_report(&arts, dir2.path()).unwrap();
        let text2 = fs::read_to_string(&paths2[0]).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn boundedness_summary_row_count_matches_the_ensemble() {
        let p = OscParams::new(1.0, 4.0).unwrap();
        let f = Forcing::zero();
        let setup = BoundednessSetup {
            ensemble: 4,
            delta: 0.05,
            t_end: 40.0,
            checkpoints: 5,
            ..BoundednessSetup::default()
        };
        let report = run_boundedness(&p, &f, true, &setup).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut arts = RunArtifacts::new("a = 1\nb = 4", 42);
        arts.check(CheckRecord::pass(
            "twist",
            "min |L| = 2 above floor 1e-6; poincare",
        ));
        arts.boundedness = Some(report);
        let paths = emit_report(&arts, dir.path()).unwrap();

        let summary = fs::read_to_string(dir.path().join("boundedness.csv")).unwrap();
        let mut lines = summary.lines();
        assert_eq!(lines.next().unwrap(), "# seed = 42");
        assert_eq!(
            lines.next().unwrap(),
            "orbit,t0,v0,r0,max_sup,slope,error"
        );
        assert_eq!(lines.count(), 4);

        let report_text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report_text.contains("twist: pass"));
        assert!(report_text.contains("boundedness.csv: 4 rows"));
        assert!(paths.iter().any(|p| p.ends_with("checkpoints.csv")));
    }

    #[test]
    fn csv_floats_survive_a_parse_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vals.csv");
        let vals = [0.1 + 0.2, 1.0 / 3.0, 2f64.sqrt() * 1e-17, -1234.5678e11];
        let rows = vals.iter().map(|v| format!("{v}")).collect::<Vec<_>>();
        let n = write_csv(&path, 1, "v", rows).unwrap();
        assert_eq!(n, 4);
        let text = fs::read_to_string(&path).unwrap();
        for (line, &v) in text.lines().skip(2).zip(&vals) {
            assert_eq!(line.parse::<f64>().unwrap(), v);
        }
    }
}
