//! Parameter sweeps over the circuit and pulse-level models, written as CSV.
//!
//! A sweep is one TOML file. Unset fields take the per-experiment defaults in
//! [`Resolved::defaults`]; the resolved values are echoed into the CSV header.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hidden_inverse::analytics::{block_average_fidelity, final_state_fidelity, rc_average_fidelity};
use hidden_inverse::channels::{avg_fidelity_from_ptm, depolarizing_ptm, ptm_of_unitary, Ptm};
use hidden_inverse::circuit::{repeated_block_circuit, run_ptm, BlockConfig, ChannelPlan};
use hidden_inverse::gates::{xx_unitary, NoiseModel};
use hidden_inverse::lindblad::{ms_gate_channel, sk1_ms_channel, LindbladSpec};

use crate::{io_error, CliError, CliResult};

/// Environment variable holding the worker count; unset or 0 uses every core.
pub const WORKERS_ENV: &str = "HINV_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig2a,
    Fig2b,
    Experiment2q,
    Experiment4q,
    Sk1Viability,
    RcCompare,
    PtmExtract,
}

/// θ values as an explicit list or an inclusive evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl ThetaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ThetaGrid::List(v) => v.clone(),
            ThetaGrid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                p => (0..*p)
                    .map(|k| start + (stop - start) * k as f64 / (p - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub output: PathBuf,
    pub theta: Option<ThetaGrid>,
    pub n: Option<Vec<usize>>,
    pub eps_2q: Option<Vec<f64>>,
    pub eps_1q: Option<f64>,
    /// Degrees.
    pub phi_diff_deg: Option<f64>,
    /// Detuning as a fraction of the carrier Rabi frequency.
    pub delta: Option<f64>,
    pub reps: Option<usize>,
    /// Randomized-compiling ensemble size.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub p_depol: Option<f64>,
    /// Heating rates (quanta/s).
    pub gamma: Option<Vec<f64>>,
    /// Pulse-level spec file; the synthetic default when absent.
    pub spec: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("sweep config: {e}")))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// A sweep with every parameter filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: Experiment,
    pub theta: Vec<f64>,
    pub n: Vec<usize>,
    pub eps_2q: Vec<f64>,
    pub eps_1q: f64,
    pub phi_diff_deg: f64,
    pub delta: f64,
    pub reps: usize,
    pub samples: usize,
    pub seed: u64,
    pub p_depol: f64,
    pub gamma: Vec<f64>,
    pub spec: Option<PathBuf>,
}

fn grid(points: usize) -> Vec<f64> {
    ThetaGrid::Range {
        start: -PI,
        stop: PI,
        points,
    }
    .values()
}

impl Resolved {
    pub fn defaults(e: Experiment) -> Self {
        let base = Self {
            experiment: e,
            theta: grid(101),
            n: vec![2],
            eps_2q: vec![0.0],
            eps_1q: 0.0,
            phi_diff_deg: 0.0,
            delta: 0.0,
            reps: 1,
            samples: 100,
            seed: 0,
            p_depol: 1.0,
            gamma: Vec::new(),
            spec: None,
        };
        match e {
            Experiment::Fig2a => Self {
                n: vec![2, 4, 6],
                eps_2q: vec![0.02],
                eps_1q: 0.002,
                ..base
            },
            Experiment::Fig2b => Self {
                n: vec![2, 4, 6],
                phi_diff_deg: 3.5,
                ..base
            },
            Experiment::Experiment2q => Self {
                eps_2q: vec![0.0225],
                reps: 5,
                ..base
            },
            Experiment::Experiment4q => Self {
                n: vec![4],
                eps_2q: vec![0.05],
                phi_diff_deg: -8.0,
                p_depol: 0.87,
                theta: grid(41),
                ..base
            },
            Experiment::Sk1Viability => Self {
                eps_2q: vec![0.02],
                gamma: vec![0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
                theta: Vec::new(),
                ..base
            },
            Experiment::RcCompare => Self {
                delta: 0.01,
                theta: grid(41),
                ..base
            },
            Experiment::PtmExtract => Self {
                theta: Vec::new(),
                ..base
            },
        }
    }

    pub fn from_config(c: &SweepConfig) -> CliResult<Self> {
        let d = Self::defaults(c.experiment);
        let r = Self {
            experiment: c.experiment,
            theta: c.theta.as_ref().map(ThetaGrid::values).unwrap_or(d.theta),
            n: c.n.clone().unwrap_or(d.n),
            eps_2q: c.eps_2q.clone().unwrap_or(d.eps_2q),
            eps_1q: c.eps_1q.unwrap_or(d.eps_1q),
            phi_diff_deg: c.phi_diff_deg.unwrap_or(d.phi_diff_deg),
            delta: c.delta.unwrap_or(d.delta),
            reps: c.reps.unwrap_or(d.reps),
            samples: c.samples.unwrap_or(d.samples),
            seed: c.seed.unwrap_or(d.seed),
            p_depol: c.p_depol.unwrap_or(d.p_depol),
            gamma: c.gamma.clone().unwrap_or(d.gamma),
            spec: c.spec.clone(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        let uses_theta = !matches!(self.experiment, Experiment::Sk1Viability | Experiment::PtmExtract);
        if uses_theta {
            if self.theta.is_empty() {
                return bad("theta grid is empty");
            }
            if self.theta.iter().any(|t| !(t.abs() <= PI + 1e-12)) {
                return bad("theta grid must lie within [-pi, pi]");
            }
            if self.n.is_empty() {
                return bad("n list is empty");
            }
            if self.n.iter().any(|&n| !(2..=8).contains(&n)) {
                return bad("n must be between 2 and 8");
            }
        }
        if self.eps_2q.is_empty() {
            return bad("eps_2q list is empty");
        }
        if self.experiment == Experiment::Sk1Viability && self.gamma.is_empty() {
            return bad("gamma list is empty");
        }
        if self.gamma.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return bad("gamma values must be non-negative");
        }
        if self.reps == 0 || self.samples == 0 {
            return bad("reps and samples must be positive");
        }
        if !(0.0..=1.0).contains(&self.p_depol) {
            return bad("p_depol must be in [0, 1]");
        }
        let finite = self
            .eps_2q
            .iter()
            .chain([&self.eps_1q, &self.phi_diff_deg, &self.delta])
            .all(|x| x.is_finite());
        if !finite {
            return bad("noise parameters must be finite");
        }
        Ok(())
    }

    fn noise(&self, eps_2q: f64) -> NoiseModel {
        NoiseModel {
            eps_2q,
            eps_1q: self.eps_1q,
            phi_diff: self.phi_diff_deg.to_radians(),
            delta_detune: self.delta,
        }
    }

    fn lindblad_spec(&self) -> CliResult<LindbladSpec> {
        match &self.spec {
            Some(p) => Ok(LindbladSpec::from_file(p)?),
            None => Ok(LindbladSpec::synthetic_default()),
        }
    }
}

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v:.11e}"),
        }
    }
}

/// Result table of one sweep, rows in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Int(v) => v as f64,
                    Cell::Real(v) => v,
                })
                .collect(),
        )
    }
}

/// What a sweep produces: a table, or a PTM for `ptm_extract`.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    Table(Table),
    Ptm(Ptm),
}

fn pool() -> CliResult<rayon::ThreadPool> {
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{WORKERS_ENV}={v} is not a worker count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numeric(format!("worker pool: {e}")))
}

/// Evaluate `f` on each point in parallel, keeping the input order.
fn par_rows<P: Sync, F>(points: &[P], f: F) -> CliResult<Vec<Vec<Cell>>>
where
    F: Fn(&P) -> CliResult<Vec<Cell>> + Sync + Send,
{
    pool()?.install(|| points.par_iter().map(&f).collect())
}

fn check_unit(label: &str, x: f64) -> CliResult<f64> {
    if (-1e-12..=1.0 + 1e-12).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(CliError::Numeric(format!("{label} = {x} outside [0, 1]")))
    }
}

pub fn run(r: &Resolved) -> CliResult<SweepOutput> {
    use Cell::{Int, Real};
    let table = |columns: Vec<&'static str>, rows| SweepOutput::Table(Table { columns, rows });
    let nte: Vec<(usize, f64, f64)> = r
        .n
        .iter()
        .flat_map(|&n| r.eps_2q.iter().flat_map(move |&e| r.theta.iter().map(move |&t| (n, e, t))))
        .collect();
    Ok(match r.experiment {
        Experiment::Fig2a | Experiment::Fig2b => {
            let rows = par_rows(&nte, |&(n, e, t)| {
                let nm = r.noise(e);
                let h = block_average_fidelity(n, t, BlockConfig::HiddenInverse, &nm)?;
                let s = block_average_fidelity(n, t, BlockConfig::Standard, &nm)?;
                Ok(vec![
                    Int(n as u64),
                    Real(e),
                    Real(t),
                    Real(check_unit("F_hidden", h)?),
                    Real(check_unit("F_standard", s)?),
                ])
            })?;
            table(vec!["n", "eps_2q", "theta", "F_hidden", "F_standard"], rows)
        }
        Experiment::Experiment2q => {
            let rows = par_rows(&nte, |&(n, e, t)| {
                let nm = r.noise(e);
                let mut out = vec![Int(n as u64), Real(e), Real(t)];
                for (label, config) in [("F_hidden", BlockConfig::HiddenInverse), ("F_standard", BlockConfig::Standard)] {
                    let c = repeated_block_circuit(n, t, r.reps, config)?;
                    out.push(Real(check_unit(label, final_state_fidelity(&c, &nm)?)?));
                }
                Ok(out)
            })?;
            table(vec!["n", "eps_2q", "theta", "F_hidden", "F_standard"], rows)
        }
        Experiment::Experiment4q => {
            let rows = par_rows(&nte, |&(n, e, t)| {
                let nm = r.noise(e);
                let depol = depolarizing_ptm(n, r.p_depol)?;
                let mut out = vec![Int(n as u64), Real(e), Real(t)];
                for (label, config) in [("P0_hidden", BlockConfig::HiddenInverse), ("P0_standard", BlockConfig::Standard)] {
                    let c = repeated_block_circuit(n, t, r.reps, config)?;
                    let plan = ChannelPlan::global_after_each_two_qubit_gate(&c, &depol);
                    out.push(Real(check_unit(label, run_ptm(&c, &nm, &plan)?.ground())?));
                }
                Ok(out)
            })?;
            table(vec!["n", "eps_2q", "theta", "P0_hidden", "P0_standard"], rows)
        }
        Experiment::RcCompare => {
            let rows = par_rows(&nte, |&(n, e, t)| {
                let nm = r.noise(e);
                let h = block_average_fidelity(n, t, BlockConfig::HiddenInverse, &nm)?;
                let s = block_average_fidelity(n, t, BlockConfig::Standard, &nm)?;
                let rc = rc_average_fidelity(n, t, &nm, r.samples, r.seed)?;
                Ok(vec![
                    Int(n as u64),
                    Real(e),
                    Real(t),
                    Real(check_unit("F_hidden", h)?),
                    Real(check_unit("F_standard", s)?),
                    Real(check_unit("F_rc", rc)?),
                ])
            })?;
            table(vec!["n", "eps_2q", "theta", "F_hidden", "F_standard", "F_rc"], rows)
        }
        Experiment::Sk1Viability => {
            let base = r.lindblad_spec()?;
            let ideal = ptm_of_unitary(&xx_unitary(std::f64::consts::FRAC_PI_4, 0.0))?;
            let points: Vec<(f64, f64)> = r
                .eps_2q
                .iter()
                .flat_map(|&e| r.gamma.iter().map(move |&g| (e, g)))
                .collect();
            let rows = par_rows(&points, |&(e, g)| {
                let spec = base.with_overrotation(e).with_heating(g);
                let raw = avg_fidelity_from_ptm(&ms_gate_channel(&spec)?, &ideal)?;
                let sk1 = avg_fidelity_from_ptm(&sk1_ms_channel(&spec, std::f64::consts::FRAC_PI_4)?, &ideal)?;
                Ok(vec![
                    Real(g),
                    Real(e),
                    Real(check_unit("F_raw", raw)?),
                    Real(check_unit("F_sk1", sk1)?),
                ])
            })?;
            table(vec!["gamma", "eps_2q", "F_raw", "F_sk1"], rows)
        }
        Experiment::PtmExtract => {
            let mut spec = r.lindblad_spec()?;
            if let Some(&g) = r.gamma.first() {
                spec = spec.with_heating(g);
            }
            let e = r.eps_2q[0];
            if e != 0.0 {
                spec = spec.with_overrotation(e);
            }
            SweepOutput::Ptm(pool()?.install(|| ms_gate_channel(&spec))?)
        }
    })
}

/// Header comments followed by the body; identical inputs give identical bytes.
pub fn render(r: &Resolved, out: &SweepOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hinv sweep seed={}", r.seed);
    let echoed = toml::to_string(r).expect("resolved config serializes");
    for line in echoed.lines() {
        let _ = writeln!(s, "# {line}");
    }
    match out {
        SweepOutput::Table(t) => {
            let _ = writeln!(s, "{}", t.columns.join(","));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
        }
        SweepOutput::Ptm(p) => s.push_str(&p.to_csv()),
    }
    s
}

/// Load, run and write one sweep; returns the output path.
pub fn run_file(config: &Path) -> CliResult<PathBuf> {
    let cfg = SweepConfig::from_file(config)?;
    let resolved = Resolved::from_config(&cfg)?;
    let out = run(&resolved)?;
    let path = match config.parent() {
        Some(dir) if cfg.output.is_relative() => dir.join(&cfg.output),
        _ => cfg.output.clone(),
    };
    std::fs::write(&path, render(&resolved, &out)).map_err(|e| io_error(&path, e))?;
    Ok(path)
}
