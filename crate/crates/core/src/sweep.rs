//! Parameter sweeps, CSV/manifest artifacts, and reproducibility plumbing.
//!
//! Each sweep point is an isolated single-threaded simulation over immutable
//! inputs; points run data-parallel and are gathered in deterministic grid
//! order, so identical plans produce byte-identical CSV output regardless of
//! worker count. Failed points become NaN sentinel rows and are recorded in
//! the run manifest; the sweep continues.

use crate::bath::PhononBath;
use crate::config::SimulationConfig;
use crate::drive::{CavityParams, DriveMode, DriveSpec};
use crate::dynamics::{population_metric, run_trajectory, EngineOptions, SolverKind};
use crate::photons::{single_photon_figures, PulseTrainSpec, SurfaceResolution};
use crate::units::energy_to_angular_frequency;
use std::f64::consts::PI;
use std::fmt::Write as _;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("unknown sweep parameter {0:?}")]
    UnknownParameter(String),
    #[error("invalid sweep axis {axis:?}: {message}")]
    BadAxis { axis: String, message: String },
    #[error("{parameter}: {message}")]
    BadValue { parameter: &'static str, message: String },
    #[error("sweep needs 1 or 2 axes, got {0}")]
    BadAxisCount(usize),
    #[error(transparent)]
    Kernel(#[from] crate::bath::KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One linear sweep axis over a named config parameter.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    /// Parameter path in file units (e.g. "drive.theta_pi", "drive.delta_lx").
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn new(parameter: &str, min: f64, max: f64, count: usize) -> Self {
        SweepAxis { parameter: parameter.to_string(), min, max, count }
    }

    pub fn values(&self) -> Result<Vec<f64>, SweepError> {
        if self.count < 2 {
            return Err(SweepError::BadAxis {
                axis: self.parameter.clone(),
                message: format!("axis count must be >= 2, got {}", self.count),
            });
        }
        let n = self.count;
        Ok((0..n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub axes: Vec<SweepAxis>,
    pub solver: SolverKind,
    pub use_rate_cache: bool,
    pub significant_rates_only: bool,
}

impl SweepPlan {
    pub fn one_axis(axis: SweepAxis) -> Self {
        SweepPlan {
            axes: vec![axis],
            solver: SolverKind::Analytic,
            use_rate_cache: true,
            significant_rates_only: false,
        }
    }

    /// Engine options corresponding to this plan.
    pub fn options(&self) -> EngineOptions {
        EngineOptions {
            solver: self.solver,
            use_rate_cache: self.use_rate_cache,
            significant_rates_only: self.significant_rates_only,
        }
    }
}

/// Set one file-units parameter on a validated config.
pub fn set_parameter(cfg: &mut SimulationConfig, path: &str, value: f64) -> Result<(), SweepError> {
    match path {
        "drive.theta_pi" => {
            let mut d = DriveSpec::from_area(value * PI, cfg.drive.tau_p, cfg.drive.delta_lx);
            d.mode = cfg.drive.mode;
            d.cavity = cfg.drive.cavity;
            d.centers = cfg.drive.centers.clone();
            cfg.drive = d;
        }
        "drive.omega_p" => {
            let mut d = DriveSpec::from_peak(
                energy_to_angular_frequency(value),
                cfg.drive.tau_p,
                cfg.drive.delta_lx,
            );
            d.mode = cfg.drive.mode;
            d.cavity = cfg.drive.cavity;
            d.centers = cfg.drive.centers.clone();
            cfg.drive = d;
        }
        "drive.delta_lx" => cfg.drive.delta_lx = energy_to_angular_frequency(value),
        "cavity.theta_c_pi" => {
            let cav = cavity_mut(cfg);
            cav.theta_c = Some(value * PI);
        }
        "cavity.purcell" => {
            if value < 0.0 {
                return Err(SweepError::BadValue {
                    parameter: "cavity.purcell",
                    message: format!("must be >= 0, got {value}"),
                });
            }
            cavity_mut(cfg).purcell = Some(value);
        }
        "cavity.delta_cx" => cavity_mut(cfg).delta_cx = energy_to_angular_frequency(value),
        "bath.alpha_p" => {
            if value < 0.0 {
                return Err(SweepError::BadValue {
                    parameter: "bath.alpha_p",
                    message: format!("must be >= 0, got {value}"),
                });
            }
            cfg.bath.alpha_p = value;
        }
        "bath.temperature" => {
            if value <= 0.0 {
                return Err(SweepError::BadValue {
                    parameter: "bath.temperature",
                    message: format!("must be > 0, got {value}"),
                });
            }
            cfg.bath.temperature = value;
        }
        "bath.omega_b" => cfg.bath.omega_b = energy_to_angular_frequency(value),
        other => return Err(SweepError::UnknownParameter(other.to_string())),
    }
    Ok(())
}

fn cavity_mut(cfg: &mut SimulationConfig) -> &mut CavityParams {
    cfg.drive.cavity.get_or_insert(CavityParams {
        g: 0.0,
        kappa: 1.0,
        delta_cx: 0.0,
        theta_c: None,
        purcell: None,
        use_cavity_detuning_in_rates: false,
    })
}

/// Sweep results in deterministic grid order (first axis outer, second axis
/// inner). Failed points hold NaN in every value column.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Per-point failure message; None for successful points.
    pub statuses: Vec<Option<String>>,
}

impl SweepResult {
    pub fn failed_points(&self) -> usize {
        self.statuses.iter().filter(|s| s.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 9 significant digits, scientific notation; NaN sentinel spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.8e}")
    }
}

fn grid_points(axes: &[SweepAxis]) -> Result<Vec<Vec<f64>>, SweepError> {
    match axes.len() {
        1 => Ok(axes[0].values()?.into_iter().map(|v| vec![v]).collect()),
        2 => {
            let a = axes[0].values()?;
            let b = axes[1].values()?;
            let mut pts = Vec::with_capacity(a.len() * b.len());
            for &x in &a {
                for &y in &b {
                    pts.push(vec![x, y]);
                }
            }
            Ok(pts)
        }
        n => Err(SweepError::BadAxisCount(n)),
    }
}

fn touches_bath(axes: &[SweepAxis]) -> bool {
    axes.iter().any(|a| a.parameter.starts_with("bath."))
}

fn map_points<F>(n: usize, f: F) -> Vec<Result<Vec<f64>, String>>
where
    F: Fn(usize) -> Result<Vec<f64>, String> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn gather(
    axes: &[SweepAxis],
    points: Vec<Vec<f64>>,
    value_columns: &[&str],
    results: Vec<Result<Vec<f64>, String>>,
) -> SweepResult {
    let mut columns: Vec<String> = axes.iter().map(|a| a.parameter.clone()).collect();
    columns.extend(value_columns.iter().map(|s| s.to_string()));
    let mut rows = Vec::with_capacity(points.len());
    let mut statuses = Vec::with_capacity(points.len());
    for (pt, res) in points.into_iter().zip(results) {
        let mut row = pt;
        match res {
            Ok(vals) => {
                row.extend(vals);
                statuses.push(None);
            }
            Err(msg) => {
                row.extend(std::iter::repeat(f64::NAN).take(value_columns.len()));
                statuses.push(Some(msg));
            }
        }
        rows.push(row);
    }
    SweepResult { columns, rows, statuses }
}

fn run_grid<F>(
    base: &SimulationConfig,
    plan: &SweepPlan,
    value_columns: &[&str],
    eval: F,
) -> Result<SweepResult, SweepError>
where
    F: Fn(&SimulationConfig, &PhononBath) -> Result<Vec<f64>, String> + Sync + Send,
{
    let points = grid_points(&plan.axes)?;
    let shared_bath = if touches_bath(&plan.axes) {
        None
    } else {
        Some(PhononBath::tabulate(base.bath, &base.quadrature)?)
    };
    let results = map_points(points.len(), |i| {
        let mut cfg = base.clone();
        for (axis, &v) in plan.axes.iter().zip(&points[i]) {
            set_parameter(&mut cfg, &axis.parameter, v).map_err(|e| e.to_string())?;
        }
        match &shared_bath {
            Some(b) => eval(&cfg, b),
            None => {
                let b = PhononBath::tabulate(cfg.bath, &cfg.quadrature).map_err(|e| e.to_string())?;
                eval(&cfg, &b)
            }
        }
    });
    Ok(gather(&plan.axes, points, value_columns, results))
}

/// Population metric (N_x at one fullwidth past the pulse center) over the
/// plan's grid.
pub fn sweep_population(base: &SimulationConfig, plan: &SweepPlan) -> Result<SweepResult, SweepError> {
    let opts = plan.options();
    run_grid(base, plan, &["population"], |cfg, bath| {
        let traj = run_trajectory(cfg, bath, opts).map_err(|e| e.to_string())?;
        let m = population_metric(&traj, &cfg.drive).map_err(|e| e.to_string())?;
        Ok(vec![m])
    })
}

/// Population metric under cavity driving: the base config is forced into
/// cavity mode, the plan typically sweeps cavity.theta_c_pi and/or
/// drive.delta_lx.
pub fn sweep_cavity(base: &SimulationConfig, plan: &SweepPlan) -> Result<SweepResult, SweepError> {
    let mut base = base.clone();
    base.drive.mode = DriveMode::Cavity;
    sweep_population(&base, plan)
}

/// Source operating schemes from the single-photon study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceScheme {
    /// Resonant pi pulse: Theta = pi, Delta_Lx = 0.
    PiPulse,
    /// Phonon-assisted inversion: Theta = 18.7 pi, Delta_Lx = 0.48 meV.
    PhononAssisted,
}

impl SourceScheme {
    pub fn apply(&self, cfg: &mut SimulationConfig) {
        let (theta_pi, delta_mev) = match self {
            SourceScheme::PiPulse => (1.0, 0.0),
            SourceScheme::PhononAssisted => (18.7, 0.48),
        };
        set_parameter(cfg, "drive.theta_pi", theta_pi).expect("fixed path");
        set_parameter(cfg, "drive.delta_lx", delta_mev).expect("fixed path");
    }
}

/// Per-point single-photon figures of merit (indistinguishability, beta,
/// n_ems) over the plan's grid, usually an F_P axis.
pub fn sweep_photon_source(
    base: &SimulationConfig,
    plan: &SweepPlan,
    scheme: SourceScheme,
    train: &PulseTrainSpec,
    res: &SurfaceResolution,
) -> Result<SweepResult, SweepError> {
    let mut base = base.clone();
    scheme.apply(&mut base);
    let opts = plan.options();
    run_grid(&base, plan, &["indistinguishability", "beta", "n_ems"], |cfg, bath| {
        let (_, fig) =
            single_photon_figures(cfg, bath, opts, train, res).map_err(|e| e.to_string())?;
        Ok(vec![fig.indistinguishability, fig.beta, fig.n_ems])
    })
}

/// FNV-1a hash of the serialized config, the manifest's reproducibility key.
pub fn config_hash(cfg: &SimulationConfig) -> u64 {
    let doc = cfg.to_document();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in doc.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Plain-text key/value run record written alongside the CSV outputs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(cfg: &SimulationConfig, command: &str) -> Self {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            entries: vec![
                ("command".to_string(), command.to_string()),
                ("config_hash".to_string(), format!("{:016x}", config_hash(cfg))),
                ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
                ("created_unix".to_string(), now.to_string()),
            ],
        }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn record_sweep(&mut self, result: &SweepResult) {
        self.push("grid_points", result.rows.len());
        self.push("failed_points", result.failed_points());
        for (i, status) in result.statuses.iter().enumerate() {
            match status {
                None => self.push(&format!("point_{i}"), "ok"),
                Some(msg) => self.push(&format!("point_{i}"), format!("error: {msg}")),
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// A minimal gnuplot script referencing the CSV; a convenience artifact,
/// never a data source.
pub fn plot_script(csv_name: &str, columns: &[String]) -> String {
    let ylabel = columns.last().map(String::as_str).unwrap_or("value");
    let xlabel = columns.first().map(String::as_str).unwrap_or("x");
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel '{xlabel}'\n\
         set ylabel '{ylabel}'\n\
         plot '{csv_name}' using 1:{} with lines\n",
        columns.len()
    )
}
