//! Experiment configuration: a small sectioned key = value format, strict
//! about unknown keys, with builders for the library objects it describes.
//!
//! ```text
//! [oscillator]
//! a = 1.0
//! b = 4.0
//!
//! [forcing]
//! window = 1 2            # index window lo hi (default: span of the frequencies)
//! frequency = 1 1.4142135623730951
//! frequency = 2 1.7320508075688772
//! relation = 1 rational 4/3          # declared exact value of omega_1
//! constant = 1.0
//! cosine = 1 0.3                     # amplitude, optional phase third
//! term = 1,0 0.15 0.0                # raw mode over the window, conjugate added
//!
//! [structure]
//! rho = 3.0
//! set = 1                            # explicit family; default: power family
//! set = 1,2
//!
//! [dioph]
//! kmax = 6
//! gamma = 0.05
//! delta = default                    # or: table t0 v0 t1 v1 ...
//! beta_over_2pi = 3/4                # declared rational beta / 2 pi
//! alpha = 0.0 1.0                    # admissibility scan window
//!
//! [experiment]
//! seed = 42
//! t_end = 10000
//! ensemble = 20
//! delta = 0.001                      # section-map coupling
//! v0 = 1.5
//! iters = 2000
//! r0 = 1000000
//! tol = 1e-10
//! grid = 256
//! span = 600
//! t0 = 0.0
//! out = runs/demo
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::apfun::{
    APSeries, FrequencyBasis, IndexSet, MultiIndex, Ratio, RationalRelation, RelationValue,
    SpatialStructure,
};
use crate::dioph::{ApproxFn, BetaSpec};
use crate::error::{Error, Result};
use crate::oscillator::{Forcing, OscParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub a: f64,
    pub b: f64,
    pub window: Option<(i32, i32)>,
    pub frequencies: Vec<(i32, f64)>,
    pub relations: Vec<(i32, RelationValue)>,
    pub constant: f64,
    pub cosines: Vec<(i32, f64, f64)>,
    pub terms: Vec<(Vec<i64>, f64, f64)>,
    pub rho: f64,
    pub sets: Vec<Vec<i32>>,
    pub kmax: u32,
    pub gamma: f64,
    pub delta_fn: ApproxFn,
    pub beta_over_2pi: Option<Ratio>,
    pub alpha_window: (f64, f64),
    pub seed: u64,
    pub t_end: f64,
    pub ensemble: usize,
    pub delta: f64,
    pub v0: f64,
    pub iters: usize,
    pub r0: f64,
    pub tol: f64,
    pub grid: usize,
    pub span: f64,
    pub t0: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            a: f64::NAN,
            b: f64::NAN,
            window: None,
            frequencies: Vec::new(),
            relations: Vec::new(),
            constant: 0.0,
            cosines: Vec::new(),
            terms: Vec::new(),
            rho: 3.0,
            sets: Vec::new(),
            kmax: 6,
            gamma: 0.05,
            delta_fn: ApproxFn::DefaultExpSqrt,
            beta_over_2pi: None,
            alpha_window: (0.0, 1.0),
            seed: 42,
            t_end: 1e4,
            ensemble: 20,
            delta: 1e-3,
            v0: 1.5,
            iters: 2000,
            r0: 1e6,
            tol: 1e-10,
            grid: 256,
            span: 600.0,
            t0: 0.0,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_f64(raw: &str, line: usize) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(format!("line {line}: bad number {raw:?}")))
}

fn parse_ratio(raw: &str, line: usize) -> Result<Ratio> {
    let (num, den) = match raw.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (raw.trim(), "1"),
    };
    let n = num
        .parse::<i64>()
        .map_err(|_| Error::parse(format!("line {line}: bad rational {raw:?}")))?;
    let d = den
        .parse::<i64>()
        .map_err(|_| Error::parse(format!("line {line}: bad rational {raw:?}")))?;
    Ratio::new(n, d)
}

fn split_fields(raw: &str) -> Vec<&str> {
    raw.split_whitespace().collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut seen_a = false;
        let mut seen_b = false;
        let mut section = String::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = lineno + 1;
            let stripped = match raw_line.split_once('#') {
                Some((head, _)) => head,
                None => raw_line,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            if let Some(name) = stripped.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(format!("line {line}: unterminated section")))?
                    .trim();
                match name {
                    "oscillator" | "forcing" | "structure" | "dioph" | "experiment" => {
                        section = name.to_string();
                    }
                    other => {
                        return Err(Error::parse(format!(
                            "line {line}: unknown section [{other}]"
                        )));
                    }
                }
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {line}: expected key = value")))?;
            let key = key.trim();
            let value = value.trim();
            match (section.as_str(), key) {
                ("oscillator", "a") => {
                    cfg.a = parse_f64(value, line)?;
                    seen_a = true;
                }
                ("oscillator", "b") => {
                    cfg.b = parse_f64(value, line)?;
                    seen_b = true;
                }
                ("forcing", "window") => {
                    let f = split_fields(value);
                    if f.len() != 2 {
                        return Err(Error::parse(format!("line {line}: window wants lo hi")));
                    }
                    let lo = f[0]
                        .parse::<i32>()
                        .map_err(|_| Error::parse(format!("line {line}: bad index {:?}", f[0])))?;
                    let hi = f[1]
                        .parse::<i32>()
                        .map_err(|_| Error::parse(format!("line {line}: bad index {:?}", f[1])))?;
                    cfg.window = Some((lo, hi));
                }
                ("forcing", "frequency") => {
                    let f = split_fields(value);
                    if f.len() != 2 {
                        return Err(Error::parse(format!(
                            "line {line}: frequency wants index value"
                        )));
                    }
                    let idx = f[0]
                        .parse::<i32>()
                        .map_err(|_| Error::parse(format!("line {line}: bad index {:?}", f[0])))?;
                    cfg.frequencies.push((idx, parse_f64(f[1], line)?));
                }
                ("forcing", "relation") => {
                    let f = split_fields(value);
                    if f.len() != 3 {
                        return Err(Error::parse(format!(
                            "line {line}: relation wants index kind p/q"
                        )));
                    }
                    let idx = f[0]
                        .parse::<i32>()
                        .map_err(|_| Error::parse(format!("line {line}: bad index {:?}", f[0])))?;
                    let r = parse_ratio(f[2], line)?;
                    let value = match f[1] {
                        "rational" => RelationValue::Rational(r),
                        "two_pi_rational" => RelationValue::TwoPiRational(r),
                        other => {
                            return Err(Error::parse(format!(
                                "line {line}: unknown relation kind {other:?}"
                            )));
                        }
                    };
                    cfg.relations.push((idx, value));
                }
                ("forcing", "constant") => cfg.constant = parse_f64(value, line)?,
                ("forcing", "cosine") => {
                    let f = split_fields(value);
                    if f.len() != 2 && f.len() != 3 {
                        return Err(Error::parse(format!(
                            "line {line}: cosine wants index amplitude [phase]"
                        )));
                    }
                    let idx = f[0]
                        .parse::<i32>()
                        .map_err(|_| Error::parse(format!("line {line}: bad index {:?}", f[0])))?;
                    let amp = parse_f64(f[1], line)?;
                    let phase = if f.len() == 3 {
                        parse_f64(f[2], line)?
                    } else {
                        0.0
                    };
                    cfg.cosines.push((idx, amp, phase));
                }
                ("forcing", "term") => {
                    let f = split_fields(value);
                    if f.len() != 3 {
                        return Err(Error::parse(format!(
                            "line {line}: term wants k-entries re im"
                        )));
                    }
                    let entries = f[0]
                        .split(',')
                        .map(|s| {
                            s.trim().parse::<i64>().map_err(|_| {
                                Error::parse(format!("line {line}: bad entry {s:?} in term"))
                            })
                        })
                        .collect::<Result<Vec<i64>>>()?;
                    cfg.terms
                        .push((entries, parse_f64(f[1], line)?, parse_f64(f[2], line)?));
                }
                ("structure", "rho") => cfg.rho = parse_f64(value, line)?,
                ("structure", "set") => {
                    let members = value
                        .split(',')
                        .map(|s| {
                            s.trim().parse::<i32>().map_err(|_| {
                                Error::parse(format!("line {line}: bad index {s:?} in set"))
                            })
                        })
                        .collect::<Result<Vec<i32>>>()?;
                    cfg.sets.push(members);
                }
                ("dioph", "kmax") => {
                    cfg.kmax = value
                        .parse::<u32>()
                        .map_err(|_| Error::parse(format!("line {line}: bad kmax {value:?}")))?;
                }
                ("dioph", "gamma") => cfg.gamma = parse_f64(value, line)?,
                ("dioph", "delta") => {
                    let f = split_fields(value);
                    match f.first() {
                        Some(&"default") => cfg.delta_fn = ApproxFn::DefaultExpSqrt,
                        Some(&"table") => {
                            let params = f[1..]
                                .iter()
                                .map(|s| parse_f64(s, line))
                                .collect::<Result<Vec<f64>>>()?;
                            cfg.delta_fn = ApproxFn::table(&params)?;
                        }
                        _ => {
                            return Err(Error::parse(format!(
                                "line {line}: delta wants `default` or `table t v ...`"
                            )));
                        }
                    }
                }
                ("dioph", "beta_over_2pi") => cfg.beta_over_2pi = Some(parse_ratio(value, line)?),
                ("dioph", "alpha") => {
                    let f = split_fields(value);
                    if f.len() != 2 {
                        return Err(Error::parse(format!("line {line}: alpha wants lo hi")));
                    }
                    cfg.alpha_window = (parse_f64(f[0], line)?, parse_f64(f[1], line)?);
                }
                ("experiment", "seed") => {
                    cfg.seed = value
                        .parse::<u64>()
                        .map_err(|_| Error::parse(format!("line {line}: bad seed {value:?}")))?;
                }
                ("experiment", "t_end") => cfg.t_end = parse_f64(value, line)?,
                ("experiment", "ensemble") => {
                    cfg.ensemble = value.parse::<usize>().map_err(|_| {
                        Error::parse(format!("line {line}: bad ensemble {value:?}"))
                    })?;
                }
                ("experiment", "delta") => cfg.delta = parse_f64(value, line)?,
                ("experiment", "v0") => cfg.v0 = parse_f64(value, line)?,
                ("experiment", "iters") => {
                    cfg.iters = value
                        .parse::<usize>()
                        .map_err(|_| Error::parse(format!("line {line}: bad iters {value:?}")))?;
                }
                ("experiment", "r0") => cfg.r0 = parse_f64(value, line)?,
                ("experiment", "tol") => cfg.tol = parse_f64(value, line)?,
                ("experiment", "grid") => {
                    cfg.grid = value
                        .parse::<usize>()
                        .map_err(|_| Error::parse(format!("line {line}: bad grid {value:?}")))?;
                }
                ("experiment", "span") => cfg.span = parse_f64(value, line)?,
                ("experiment", "t0") => cfg.t0 = parse_f64(value, line)?,
                ("experiment", "out") => cfg.out = PathBuf::from(value),
                ("", k) => {
                    return Err(Error::parse(format!(
                        "line {line}: key {k:?} before any [section]"
                    )));
                }
                (s, k) => {
                    return Err(Error::parse(format!(
                        "line {line}: unknown key {k:?} in [{s}]"
                    )));
                }
            }
        }
        if !seen_a || !seen_b {
            return Err(Error::config("[oscillator] must set both a and b"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        OscParams::new(self.a, self.b)?;
        let mut seen = Vec::new();
        for &(idx, v) in &self.frequencies {
            if seen.contains(&idx) {
                return Err(Error::config(format!("frequency index {idx} declared twice")));
            }
            if !(v.is_finite()) {
                return Err(Error::config(format!("frequency {idx} is not finite")));
            }
            seen.push(idx);
        }
        if let Some((lo, hi)) = self.window {
            if lo > hi {
                return Err(Error::config(format!("window ({lo}, {hi}) is inverted")));
            }
            for &(idx, _) in &self.frequencies {
                if idx < lo || idx > hi {
                    return Err(Error::config(format!(
                        "frequency index {idx} outside the window ({lo}, {hi})"
                    )));
                }
            }
        }
        for &(idx, _) in &self.relations {
            if !seen.contains(&idx) {
                return Err(Error::config(format!(
                    "relation on index {idx} without a declared frequency"
                )));
            }
        }
        for &(idx, _, _) in &self.cosines {
            if !seen.contains(&idx) {
                return Err(Error::config(format!(
                    "cosine on index {idx} without a declared frequency"
                )));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config(format!("bad tolerance {}", self.tol)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::config(format!("bad t_end {}", self.t_end)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("bad coupling delta {}", self.delta)));
        }
        if !(self.alpha_window.0 < self.alpha_window.1) {
            return Err(Error::config("alpha window is empty"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<OscParams> {
        OscParams::new(self.a, self.b)
    }

    /// Declared index window: explicit, or the span of the frequencies.
    pub fn index_window(&self) -> Result<(i32, i32)> {
        if let Some(w) = self.window {
            return Ok(w);
        }
        let lo = self.frequencies.iter().map(|f| f.0).min();
        let hi = self.frequencies.iter().map(|f| f.0).max();
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::config("no frequencies declared and no window set")),
        }
    }

    pub fn basis(&self) -> Result<Arc<FrequencyBasis>> {
        let (lo, hi) = self.index_window()?;
        let width = (hi - lo + 1) as usize;
        let mut omega = vec![f64::NAN; width];
        for &(idx, v) in &self.frequencies {
            omega[(idx - lo) as usize] = v;
        }
        if omega.iter().any(|v| v.is_nan()) {
            return Err(Error::config(format!(
                "every index in the window ({lo}, {hi}) needs a frequency"
            )));
        }
        let relations = self
            .relations
            .iter()
            .map(|&(idx, value)| RationalRelation {
                combo: MultiIndex::unit(idx),
                value,
            })
            .collect::<Vec<_>>();
        if relations.is_empty() {
            FrequencyBasis::new(lo, hi, omega)
        } else {
            FrequencyBasis::with_relations(lo, hi, omega, relations)
        }
    }

    pub fn structure(&self) -> Result<Arc<SpatialStructure>> {
        let (lo, hi) = self.index_window()?;
        if self.sets.is_empty() {
            let elems: Vec<i32> = (lo..=hi).collect();
            return SpatialStructure::power_family(&elems, self.rho);
        }
        let sets = self
            .sets
            .iter()
            .map(|m| IndexSet::new(m.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        SpatialStructure::new(sets, self.rho)
    }

    /// The forcing as a series over the declared basis.
    pub fn forcing_series(&self) -> Result<APSeries> {
        let basis = self.basis()?;
        let structure = self.structure()?;
        let (lo, hi) = self.index_window()?;
        let mut s = APSeries::zero(basis, structure);
        if self.constant != 0.0 {
            s.add_term(MultiIndex::zero(), Complex64::new(self.constant, 0.0))?;
        }
        for &(idx, amp, phase) in &self.cosines {
            let c = Complex64::from_polar(0.5 * amp, phase);
            let k = MultiIndex::unit(idx);
            s.add_term(k.clone(), c)?;
            s.add_term(k.neg(), c.conj())?;
        }
        for (entries, re, im) in &self.terms {
            if entries.len() != (hi - lo + 1) as usize {
                return Err(Error::config(format!(
                    "term entries {entries:?} do not span the window ({lo}, {hi})"
                )));
            }
            let pairs: Vec<(i32, i32)> = entries
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(j, &e)| (lo + j as i32, e as i32))
                .collect();
            let k = MultiIndex::from_pairs(&pairs)?;
            let c = Complex64::new(*re, *im);
            s.add_term(k.clone(), c)?;
            s.add_term(k.neg(), c.conj())?;
        }
        Ok(s)
    }

    pub fn forcing(&self) -> Result<Forcing> {
        if self.frequencies.is_empty() && self.cosines.is_empty() && self.terms.is_empty() {
            return Ok(Forcing::constant(self.constant));
        }
        Forcing::compile(&self.forcing_series()?)
    }

    /// Rotation used by the dioph scans: the declared rational form when
    /// given (validated against the oscillator period), else the numeric one.
    pub fn beta_spec(&self) -> Result<BetaSpec> {
        let p = self.params()?;
        match self.beta_over_2pi {
            Some(r) => {
                let declared = std::f64::consts::TAU * r.to_f64();
                if (declared - p.period()).abs() > 1e-9 * p.period() {
                    return Err(Error::config(format!(
                        "declared beta_over_2pi = {} does not match the oscillator period {}",
                        r,
                        p.period()
                    )));
                }
                Ok(BetaSpec::two_pi_rational(r))
            }
            None => Ok(BetaSpec::numeric(p.period())),
        }
    }

    /// Canonical text form; parsing it back reproduces the config exactly.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str("[oscillator]\n");
        s.push_str(&format!("a = {}\n", self.a));
        s.push_str(&format!("b = {}\n", self.b));
        s.push_str("\n[forcing]\n");
        if let Some((lo, hi)) = self.window {
            s.push_str(&format!("window = {lo} {hi}\n"));
        }
        for &(idx, v) in &self.frequencies {
            s.push_str(&format!("frequency = {idx} {v}\n"));
        }
        for &(idx, value) in &self.relations {
            match value {
                RelationValue::Rational(r) => {
                    s.push_str(&format!("relation = {idx} rational {r}\n"));
                }
                RelationValue::TwoPiRational(r) => {
                    s.push_str(&format!("relation = {idx} two_pi_rational {r}\n"));
                }
            }
        }
        s.push_str(&format!("constant = {}\n", self.constant));
        for &(idx, amp, phase) in &self.cosines {
            s.push_str(&format!("cosine = {idx} {amp} {phase}\n"));
        }
        for (entries, re, im) in &self.terms {
            let csv = entries
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",");
            s.push_str(&format!("term = {csv} {re} {im}\n"));
        }
        s.push_str("\n[structure]\n");
        s.push_str(&format!("rho = {}\n", self.rho));
        for set in &self.sets {
            let csv = set
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",");
            s.push_str(&format!("set = {csv}\n"));
        }
        s.push_str("\n[dioph]\n");
        s.push_str(&format!("kmax = {}\n", self.kmax));
        s.push_str(&format!("gamma = {}\n", self.gamma));
        match &self.delta_fn {
            ApproxFn::DefaultExpSqrt => s.push_str("delta = default\n"),
            ApproxFn::Table { nodes } => {
                let flat = nodes
                    .iter()
                    .flat_map(|&(t, v)| [t, v])
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                s.push_str(&format!("delta = table {flat}\n"));
            }
        }
        if let Some(r) = self.beta_over_2pi {
            s.push_str(&format!("beta_over_2pi = {r}\n"));
        }
        s.push_str(&format!(
            "alpha = {} {}\n",
            self.alpha_window.0, self.alpha_window.1
        ));
        s.push_str("\n[experiment]\n");
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("t_end = {}\n", self.t_end));
        s.push_str(&format!("ensemble = {}\n", self.ensemble));
        s.push_str(&format!("delta = {}\n", self.delta));
        s.push_str(&format!("v0 = {}\n", self.v0));
        s.push_str(&format!("iters = {}\n", self.iters));
        s.push_str(&format!("r0 = {}\n", self.r0));
        s.push_str(&format!("tol = {}\n", self.tol));
        s.push_str(&format!("grid = {}\n", self.grid));
        s.push_str(&format!("span = {}\n", self.span));
        s.push_str(&format!("t0 = {}\n", self.t0));
        s.push_str(&format!("out = {}\n", self.out.display()));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "
# Theorem-style scenario
[oscillator]
a = 1.0
b = 4.0

[forcing]
frequency = 1 1.4142135623730951
frequency = 2 1.7320508075688772
constant = 1.0
cosine = 1 0.3
cosine = 2 0.2

[structure]
rho = 3.0

[dioph]
kmax = 5
gamma = 0.02

[experiment]
seed = 7
delta = 0.001
tol = 1e-10
out = runs/demo
";

    #[test]
    fn parses_the_demo_and_builds_the_objects() {
        let cfg = ExperimentConfig::parse(DEMO).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.kmax, 5);
        assert_eq!(cfg.index_window().unwrap(), (1, 2));
        let basis = cfg.basis().unwrap();
        assert_eq!(basis.window(), (1, 2));
        let f = cfg.forcing().unwrap();
        // f(0) = 1 + 0.3 + 0.2
        assert!((f.eval(0.0) - 1.5).abs() < 1e-12);
        let s = cfg.forcing_series().unwrap();
        assert_eq!(s.len(), 5);
        assert!(cfg.params().is_ok());
        assert_eq!(cfg.out, PathBuf::from("runs/demo"));
    }

    #[test]
    fn echo_roundtrips_exactly() {
        let cfg = ExperimentConfig::parse(DEMO).unwrap();
        let echoed = cfg.echo();
        let back = ExperimentConfig::parse(&echoed).unwrap();
        assert_eq!(cfg, back);
        // echo is a fixed point
        assert_eq!(echoed, back.echo());
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let bad_key = "[oscillator]\na = 1.0\nb = 4.0\nc = 2.0\n";
        let err = ExperimentConfig::parse(bad_key).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");

        let bad_section = "[oscilator]\na = 1.0\n";
        let err = ExperimentConfig::parse(bad_section).unwrap_err();
        assert!(err.to_string().contains("unknown section"), "{err}");

        let stray = "a = 1.0\n";
        let err = ExperimentConfig::parse(stray).unwrap_err();
        assert!(err.to_string().contains("before any"), "{err}");
    }

    #[test]
    fn missing_oscillator_params_is_an_error() {
        let err = ExperimentConfig::parse("[oscillator]\na = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("both a and b"), "{err}");
    }

    #[test]
    fn relations_reach_the_basis() {
        let text = "
[oscillator]
a = 1.0
b = 4.0
[forcing]
frequency = 1 1.3333333333333333
relation = 1 rational 4/3
[dioph]
beta_over_2pi = 3/4
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let basis = cfg.basis().unwrap();
        assert!(basis.exact_inner(&MultiIndex::unit(1)).is_some());
        let beta = cfg.beta_spec().unwrap();
        assert!((beta.value - 1.5 * std::f64::consts::PI).abs() < 1e-12);
        assert!(beta.over_two_pi.is_some());
    }

    #[test]
    fn beta_declaration_must_match_the_period() {
        let text = "
[oscillator]
a = 1.0
b = 9.0
[dioph]
beta_over_2pi = 3/4
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let err = cfg.beta_spec().unwrap_err();
        assert!(err.to_string().contains("period"), "{err}");
    }

    #[test]
    fn raw_terms_span_the_window() {
        let text = "
[oscillator]
a = 2.0
b = 3.0
[forcing]
frequency = 1 1.4142135623730951
frequency = 2 1.7320508075688772
term = 1,1 0.05 0.01
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let s = cfg.forcing_series().unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.reality_defect().unwrap() < 1e-15);
        let bad = "
[oscillator]
a = 2.0
b = 3.0
[forcing]
frequency = 1 1.4142135623730951
frequency = 2 1.7320508075688772
term = 1 0.05 0.01
";
        let cfg = ExperimentConfig::parse(bad).unwrap();
        assert!(cfg.forcing_series().is_err());
    }
}
