//! Scenario evaluation, built-in figure presets, oracle cross-checks and the
//! CSV / JSON table format written by the `qzeno` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::entanglement::{delta_concurrence, pair_concurrence_closed};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::survival::bath::{
    amplitude_discrete_bath, amplitude_discrete_bath_checked, max_deviation, BathDiscretization,
};
use crate::survival::{amplitude_kernel_ode, survival_probability};
use crate::zeno::{effective_decay_rate, measured_concurrence, MeasurementMode};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Closed form vs memory-kernel ODE.
pub const ODE_TOLERANCE: f64 = 1e-8;
/// Closed form vs discretized bath.
pub const BATH_TOLERANCE: f64 = 1e-3;

/// A requested output series. Variant order is the column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    Survival,
    Concurrence,
    MeasuredConcurrence,
    DeltaConcurrence,
    GammaZ,
}

impl Series {
    pub fn name(&self) -> &'static str {
        match self {
            Series::Survival => "survival",
            Series::Concurrence => "concurrence",
            Series::MeasuredConcurrence => "measured_concurrence",
            Series::DeltaConcurrence => "delta_concurrence",
            Series::GammaZ => "gamma_z",
        }
    }
}

impl FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "survival" => Ok(Series::Survival),
            "concurrence" => Ok(Series::Concurrence),
            "measured_concurrence" | "concurrence_measured" => Ok(Series::MeasuredConcurrence),
            "delta_concurrence" => Ok(Series::DeltaConcurrence),
            "gamma_z" | "gamma_z_curve" => Ok(Series::GammaZ),
            other => Err(Error::InvalidParams(format!("unknown series '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub tau_max: f64,
    pub tau_step: f64,
    /// Measurement intervals κT, one measured curve each.
    pub schedules: Vec<f64>,
    /// Detunings Δ/κ for the ΔC columns; empty means the scenario's own Δ.
    pub detunings: Vec<f64>,
    pub outputs: Vec<Series>,
    pub mode: MeasurementMode,
}

impl Scenario {
    pub fn new(params: SystemParams, tau_max: f64, tau_step: f64) -> Self {
        Self {
            params,
            tau_max,
            tau_step,
            schedules: Vec::new(),
            detunings: Vec::new(),
            outputs: vec![Series::Concurrence],
            mode: MeasurementMode::Envelope,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_step.is_finite() && self.tau_step > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tau_step must be > 0, got {}",
                self.tau_step
            )));
        }
        if !(self.tau_max.is_finite() && self.tau_max >= self.tau_step) {
            return Err(Error::InvalidParams(format!(
                "tau_max must be >= tau_step, got {}",
                self.tau_max
            )));
        }
        if let Some(t) = self.schedules.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidParams(format!("measurement interval must be > 0, got {t}")));
        }
        if let Some(d) = self.detunings.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidParams(format!("detuning must be finite, got {d}")));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidParams("no output series requested".into()));
        }
        if self.outputs.contains(&Series::MeasuredConcurrence) && self.schedules.is_empty() {
            return Err(Error::InvalidParams(
                "measured_concurrence needs at least one measurement interval".into(),
            ));
        }
        let needs_pair = self.outputs.iter().any(|s| {
            matches!(
                s,
                Series::Concurrence | Series::MeasuredConcurrence | Series::DeltaConcurrence
            )
        });
        if needs_pair && self.params.n() < 2 {
            return Err(Error::InvalidParams("concurrence series need n >= 2".into()));
        }
        Ok(())
    }

    /// τ_k = k·step for k = 0..=⌊tau_max/step⌋.
    pub fn tau_grid(&self) -> Vec<f64> {
        let count = (self.tau_max / self.tau_step * (1.0 + 1e-12)).floor() as usize;
        (0..=count).map(|k| k as f64 * self.tau_step).collect()
    }

    fn delta_values(&self) -> Vec<f64> {
        if self.detunings.is_empty() {
            vec![self.params.detuning()]
        } else {
            self.detunings.clone()
        }
    }

    /// Every parameter set whose E(τ) enters the requested series.
    pub fn parameter_sets(&self) -> Vec<SystemParams> {
        let mut sets = vec![self.params];
        if self.outputs.contains(&Series::DeltaConcurrence) {
            sets.push(self.params.with_detuning(0.0));
            sets.extend(self.delta_values().into_iter().map(|d| self.params.with_detuning(d)));
        }
        let mut unique: Vec<SystemParams> = Vec::new();
        for s in sets {
            if !unique.iter().any(|u| u == &s) {
                unique.push(s);
            }
        }
        unique
    }
}

/// Table of series sampled on a τ grid plus a metadata block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepResult {
    /// `# key: value` lines, a header row, then rows in 17-digit scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep result serializes");
        s.push('\n');
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a parameter value for column names, e.g. `0.001` or `20`.
fn label(v: f64) -> String {
    format!("{v}")
}

/// Evaluates every requested series on the scenario grid.
pub fn run_scenario(scenario: &Scenario) -> Result<SweepResult> {
    scenario.validate()?;
    let grid = scenario.tau_grid();
    let params = &scenario.params;
    let mut outputs = scenario.outputs.clone();
    outputs.sort();
    outputs.dedup();

    let mut columns = vec!["tau".to_string()];
    let mut data: Vec<Vec<f64>> = vec![grid.clone()];

    for series in &outputs {
        match series {
            Series::Survival => {
                columns.push("survival".into());
                data.push(grid.iter().map(|&t| survival_probability(params, t)).collect());
            }
            Series::Concurrence => {
                columns.push("concurrence".into());
                data.push(collect(&grid, |t| pair_concurrence_closed(params, t))?);
            }
            Series::MeasuredConcurrence => {
                for &interval in &scenario.schedules {
                    columns.push(format!("concurrence_measured_T{}", label(interval)));
                    let col = collect(&grid, |t| {
                        measured_concurrence(params, interval, t, scenario.mode)
                    })
                    .map_err(|e| e.at(format!("T = {interval}")))?;
                    data.push(col);
                }
            }
            Series::DeltaConcurrence => {
                for d in scenario.delta_values() {
                    columns.push(format!("delta_concurrence_D{}", label(d)));
                    data.push(collect(&grid, |t| delta_concurrence(params, d, t))?);
                }
            }
            Series::GammaZ => {
                columns.push("gamma_z".into());
                // Γ_z as a function of the interval T = τ; its T → 0 limit is 0
                data.push(collect(&grid, |t| {
                    if t == 0.0 {
                        Ok(0.0)
                    } else {
                        effective_decay_rate(params, t)
                    }
                })?);
            }
        }
    }

    let rows = (0..grid.len())
        .map(|i| data.iter().map(|col| col[i]).collect())
        .collect();

    Ok(SweepResult {
        metadata: scenario_metadata(scenario),
        columns,
        rows,
    })
}

fn collect(grid: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&t| f(t).map_err(|e| e.at(format!("tau = {t}"))))
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| label(*v)).collect::<Vec<_>>().join(",")
}

pub fn scenario_metadata(s: &Scenario) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("tool".into(), format!("qzeno {VERSION}"));
    m.insert("n".into(), s.params.n().to_string());
    m.insert("coupling_ratio".into(), label(s.params.coupling_ratio()));
    m.insert("detuning_over_kappa".into(), label(s.params.detuning()));
    m.insert("tau_max".into(), label(s.tau_max));
    m.insert("tau_step".into(), label(s.tau_step));
    m.insert("measure_intervals".into(), join(&s.schedules));
    m.insert("delta_detunings".into(), join(&s.detunings));
    let names: Vec<&str> = s.outputs.iter().map(|o| o.name()).collect();
    m.insert("series".into(), names.join(","));
    let mode = match s.mode {
        MeasurementMode::Envelope => "envelope",
        MeasurementMode::Stepwise => "stepwise",
    };
    m.insert("measurement_mode".into(), mode.into());
    m.insert("oracle_check".into(), "not_run".into());
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleLevel {
    Fast,
    Full,
}

impl FromStr for OracleLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(OracleLevel::Fast),
            "full" => Ok(OracleLevel::Full),
            other => Err(Error::InvalidParams(format!(
                "oracle level must be 'fast' or 'full', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathCheck {
    pub modes: usize,
    pub window: f64,
    pub horizon: f64,
    pub max_deviation: f64,
    /// Change under M-doubling at fixed window.
    pub refinement_change: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub level: OracleLevel,
    pub ode_max_deviation: f64,
    pub ode_tolerance: f64,
    pub bath: Option<BathCheck>,
    pub errors: Vec<String>,
    pub pass: bool,
}

impl OracleReport {
    pub fn status(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "oracle check ({}): {}\n  kernel ODE: max|dE| = {:.3e} (tol {:.0e})\n",
            match self.level {
                OracleLevel::Fast => "fast",
                OracleLevel::Full => "full",
            },
            self.status(),
            self.ode_max_deviation,
            self.ode_tolerance
        );
        if let Some(b) = &self.bath {
            let _ = writeln!(
                s,
                "  discrete bath (M={}, W={}, tau<={}): max|dE| = {:.3e}, M-doubling change = {:.3e} (tol {:.0e})",
                b.modes, b.window, b.horizon, b.max_deviation, b.refinement_change, b.tolerance
            );
        }
        for e in &self.errors {
            let _ = writeln!(s, "  error: {e}");
        }
        s
    }
}

/// Compares the closed form with the kernel ODE (and, for `Full`, the
/// discretized bath with its own M-doubling check) on the scenario grid.
pub fn run_oracle_check(scenario: &Scenario, level: OracleLevel) -> OracleReport {
    run_oracle_check_with(scenario, level, &BathDiscretization::new(4000, 200.0).unwrap())
}

pub fn run_oracle_check_with(
    scenario: &Scenario,
    level: OracleLevel,
    bath: &BathDiscretization,
) -> OracleReport {
    let mut errors = Vec::new();
    let mut ode_dev: f64 = 0.0;
    let grid = match scenario.validate() {
        Ok(()) => scenario.tau_grid(),
        Err(e) => {
            errors.push(e.to_string());
            Vec::new()
        }
    };
    let sets = scenario.parameter_sets();

    if !grid.is_empty() {
        for p in &sets {
            match amplitude_kernel_ode(p, &grid) {
                Ok(sol) => ode_dev = ode_dev.max(max_deviation(p, &sol)),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }

    let bath_check = (level == OracleLevel::Full && !grid.is_empty()).then(|| {
        let horizon = scenario.tau_max.min(0.5 * bath.recurrence_time());
        let sub: Vec<f64> = grid.iter().copied().filter(|&t| t <= horizon).collect();
        let mut dev: f64 = 0.0;
        let mut change: f64 = 0.0;
        for p in &sets {
            match amplitude_discrete_bath_checked(p, bath, &sub, f64::INFINITY) {
                Ok(run) => {
                    dev = dev.max(run.max_deviation_from_analytic(p));
                    change = change.max(run.refinement_change);
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
        BathCheck {
            modes: bath.mode_count(),
            window: bath.window_halfwidth(),
            horizon,
            max_deviation: dev,
            refinement_change: change,
            tolerance: BATH_TOLERANCE,
            pass: dev <= BATH_TOLERANCE && change <= BATH_TOLERANCE,
        }
    });

    let pass = errors.is_empty()
        && ode_dev <= ODE_TOLERANCE
        && bath_check.as_ref().is_none_or(|b| b.pass);
    OracleReport {
        level,
        ode_max_deviation: ode_dev,
        ode_tolerance: ODE_TOLERANCE,
        bath: bath_check,
        errors,
        pass,
    }
}

/// Runs the discretized bath alone on a grid; exposed for convergence studies.
pub fn bath_deviation(
    params: &SystemParams,
    bath: &BathDiscretization,
    tau_grid: &[f64],
) -> Result<f64> {
    let sol = amplitude_discrete_bath(params, bath, tau_grid)?;
    Ok(max_deviation(params, &sol))
}

/// A figure parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub n: u32,
    pub coupling_ratio: f64,
    /// Detunings Δ/κ; the first one is the scenario's own.
    pub detunings: Vec<f64>,
    pub intervals: Vec<f64>,
    pub tau_max: f64,
    pub tau_step: f64,
    pub outputs: Vec<Series>,
}

impl Preset {
    pub fn is_good_cavity(&self) -> bool {
        self.coupling_ratio > 1.0
    }

    pub fn params(&self) -> SystemParams {
        SystemParams::dimensionless(self.n, self.coupling_ratio, self.detunings[0])
            .expect("preset parameters are valid")
    }

    /// One parameter set per detuning.
    pub fn parameter_sets(&self) -> Vec<SystemParams> {
        self.detunings
            .iter()
            .map(|&d| self.params().with_detuning(d))
            .collect()
    }

    pub fn scenario(&self) -> Scenario {
        let delta_series = self.outputs.contains(&Series::DeltaConcurrence);
        Scenario {
            params: self.params(),
            tau_max: self.tau_max,
            tau_step: self.tau_step,
            schedules: self.intervals.clone(),
            detunings: if delta_series { self.detunings.clone() } else { Vec::new() },
            outputs: self.outputs.clone(),
            mode: MeasurementMode::Envelope,
        }
    }
}

pub fn presets() -> Vec<Preset> {
    use Series::*;
    let bad = (50.0, 0.01);
    let good = (2.0, 0.001);
    let measured = vec![Concurrence, MeasuredConcurrence];
    let bad_t = vec![0.5, 2.0, 5.0];
    let good_t = vec![0.001, 0.003, 0.005];
    let detuned_bad_t = vec![0.1, 0.5, 2.0, 5.0];
    let detuned_good_t = vec![0.0005, 0.001, 0.003, 0.005];
    let mk = |name, description, n, r, d: Vec<f64>, t: Vec<f64>, (tau_max, tau_step), outputs| Preset {
        name,
        description,
        n,
        coupling_ratio: r,
        detunings: d,
        intervals: t,
        tau_max,
        tau_step,
        outputs,
    };
    vec![
        mk("fig2a", "detuning gain, bad cavity", 4, 0.1, vec![2.0, 4.0], vec![], bad, vec![DeltaConcurrence]),
        mk("fig2b", "detuning gain, good cavity", 4, 10.0, vec![20.0, 35.0], vec![], good, vec![DeltaConcurrence]),
        mk("fig3a", "resonant measurements, bad cavity, n=2", 2, 0.1, vec![0.0], bad_t.clone(), bad, measured.clone()),
        mk("fig3b", "resonant measurements, good cavity, n=2", 2, 10.0, vec![0.0], good_t.clone(), good, measured.clone()),
        mk("fig3c", "resonant measurements, bad cavity, n=4", 4, 0.1, vec![0.0], bad_t, bad, measured.clone()),
        mk("fig3d", "resonant measurements, good cavity, n=4", 4, 10.0, vec![0.0], good_t, good, measured.clone()),
        mk("fig4a", "detuned measurements, bad cavity, small detuning", 4, 0.1, vec![0.5], detuned_bad_t.clone(), bad, measured.clone()),
        mk("fig4b", "detuned measurements, bad cavity, large detuning", 4, 0.1, vec![2.0], detuned_bad_t, bad, measured.clone()),
        mk("fig5a", "detuned measurements, good cavity, small detuning", 4, 10.0, vec![5.0], detuned_good_t.clone(), good, measured.clone()),
        mk("fig5b", "detuned measurements, good cavity, large detuning", 4, 10.0, vec![20.0], detuned_good_t, good, measured),
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// Human-readable preset table.
pub fn list_presets() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<6} {:>2} {:>5} {:<12} {:<26} {:<10} description", "name", "n", "R", "Delta/kappa", "kappa*T", "tau");
    for p in presets() {
        let _ = writeln!(
            s,
            "{:<6} {:>2} {:>5} {:<12} {:<26} {:<10} {}",
            p.name,
            p.n,
            label(p.coupling_ratio),
            join(&p.detunings),
            if p.intervals.is_empty() { "-".to_string() } else { join(&p.intervals) },
            format!("0..{}", label(p.tau_max)),
            p.description
        );
    }
    s
}
