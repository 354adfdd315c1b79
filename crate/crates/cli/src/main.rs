//! polaron-sim: CLI front end for the polaron master-equation exciton
//! simulator. Subcommands map onto the main studies: instantaneous and
//! pulse-averaged rates, single-trajectory evolution, population sweeps,
//! cavity-driven sweeps, and the pulsed single-photon-source analysis.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use polaron_core::bath::{phi_direct, PhononBath};
use polaron_core::config::SimulationConfig;
use polaron_core::dynamics::{run_trajectory, EngineOptions, SolverKind};
use polaron_core::photons::{single_photon_figures, PulseTrainSpec, SurfaceResolution};
use polaron_core::rates::{averaged_rates, rates_at, RateModel, RateSet};
use polaron_core::sweep::{
    format_float, plot_script, set_parameter, sweep_cavity, sweep_population, RunManifest,
    SourceScheme, SweepAxis, SweepPlan, SweepResult,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const EXIT_CONFIG: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser)]
#[command(name = "polaron-sim", version, about = "Polaron master-equation simulator for pulse-driven quantum-dot excitons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Analytic,
    Direct,
    Effective,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Analytic => SolverKind::Analytic,
            SolverArg::Direct => SolverKind::Direct,
            SolverArg::Effective => SolverKind::Effective,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    PiPulse,
    PhononAssisted,
}

impl From<SchemeArg> for SourceScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::PiPulse => SourceScheme::PiPulse,
            SchemeArg::PhononAssisted => SourceScheme::PhononAssisted,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Configuration file ([bath], [system], [drive], ... sections).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV, manifest, and plot-script artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Master-equation variant.
    #[arg(long, value_enum, default_value_t = SolverArg::Analytic)]
    solver: SolverArg,
    /// Worker threads for data-parallel sections.
    #[arg(long)]
    threads: Option<usize>,
    /// Interpolate phonon rates from a precomputed 0.05 ps table.
    #[arg(long)]
    rate_cache: bool,
    /// Drop the negligible rates (four-rate model).
    #[arg(long)]
    significant_rates_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Instantaneous and pulse-averaged phonon scattering rates, plus the
    /// phonon kernel table.
    Rates {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate one trajectory and emit the density matrix over time.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Population-metric sweep over pulse area and/or detuning.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Axis spec "parameter:min:max:count", repeatable (max 2).
        #[arg(long)]
        axis: Vec<String>,
    },
    /// Population-metric sweep under cavity driving.
    CavitySweep {
        #[command(flatten)]
        common: Common,
        /// Axis spec "parameter:min:max:count", repeatable (max 2).
        #[arg(long)]
        axis: Vec<String>,
    },
    /// Single-photon-source figures of merit under a pulse train.
    Photons {
        #[command(flatten)]
        common: Common,
        /// Operating point: resonant pi pulse or phonon-assisted inversion.
        #[arg(long, value_enum, default_value_t = SchemeArg::PiPulse)]
        scheme: SchemeArg,
        /// Purcell factor override.
        #[arg(long)]
        purcell: Option<f64>,
    },
}

struct AppError {
    code: i32,
    message: String,
}

impl AppError {
    fn config(e: impl std::fmt::Display) -> Self {
        AppError { code: EXIT_CONFIG, message: e.to_string() }
    }
    fn numerical(e: impl std::fmt::Display) -> Self {
        AppError { code: EXIT_NUMERICAL, message: e.to_string() }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Rates { common } => {
            let (cfg, bath) = setup(&common)?;
            cmd_rates(&common, &cfg, &bath)
        }
        Command::Evolve { common } => {
            let (cfg, bath) = setup(&common)?;
            cmd_evolve(&common, &cfg, &bath)
        }
        Command::Sweep { common, axis } => {
            let (cfg, _) = setup(&common)?;
            let plan = build_plan(&common, &axis, &cfg, &["drive.theta_pi:0:40:81"])?;
            let result = sweep_population(&cfg, &plan).map_err(AppError::numerical)?;
            emit_sweep(&common, &cfg, "sweep", &result)
        }
        Command::CavitySweep { common, axis } => {
            let (cfg, _) = setup(&common)?;
            let plan = build_plan(&common, &axis, &cfg, &["cavity.theta_c_pi:0:60:81"])?;
            let result = sweep_cavity(&cfg, &plan).map_err(AppError::numerical)?;
            emit_sweep(&common, &cfg, "cavity_sweep", &result)
        }
        Command::Photons { common, scheme, purcell } => {
            let (cfg, bath) = setup(&common)?;
            cmd_photons(&common, cfg, bath, scheme.into(), purcell)
        }
    }
}

/// Load + validate the config, set up threading, tabulate the kernel.
fn setup(common: &Common) -> Result<(SimulationConfig, PhononBath), AppError> {
    if let Some(n) = common.threads {
        configure_threads(n);
    }
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| AppError::config(format!("{}: {e}", common.config.display())))?;
    let cfg = SimulationConfig::from_str(&text).map_err(AppError::config)?;
    let bath = PhononBath::tabulate(cfg.bath, &cfg.quadrature).map_err(AppError::numerical)?;
    std::fs::create_dir_all(&common.out)
        .map_err(|e| AppError::config(format!("{}: {e}", common.out.display())))?;
    Ok((cfg, bath))
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        eprintln!("warning: thread pool already initialized: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_n: usize) {
    eprintln!("warning: built without the parallel feature; --threads ignored");
}

fn options(common: &Common) -> EngineOptions {
    EngineOptions {
        solver: common.solver.into(),
        use_rate_cache: common.rate_cache,
        significant_rates_only: common.significant_rates_only,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), AppError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| AppError::numerical(format!("writing {name}: {e}")))
}

fn rate_rows(out: &mut String, t: f64, r: &RateSet, prefix: &str, minor: bool) {
    let mut push = |name: &str, v: f64| {
        let _ = writeln!(out, "{},{prefix}{name},{}", format_float(t), format_float(v));
    };
    push("sig_plus", r.sig_plus);
    push("sig_minus", r.sig_minus);
    push("cd", r.cd);
    push("re_u", r.u.re);
    push("im_u", r.u.im);
    if minor {
        push("sd", r.sd);
        push("re_g", r.g.re);
        push("im_g", r.g.im);
        push("shift", r.shift);
    }
}

fn cmd_rates(common: &Common, cfg: &SimulationConfig, bath: &PhononBath) -> Result<(), AppError> {
    let minor = !common.significant_rates_only;

    // kernel table
    let mut kernel = String::from("tau_ps,re_phi,im_phi\n");
    for i in 0..bath.len() {
        let tau = i as f64 * bath.dtau;
        let p = bath.phi[i];
        let _ = writeln!(kernel, "{},{},{}", format_float(tau), format_float(p.re), format_float(p.im));
    }
    write_file(&common.out, "kernel.csv", &kernel)?;

    // instantaneous rates over the pulse window, full and effective
    let center = cfg.drive.nearest_center(0.0);
    let span = 5.0 * cfg.drive.tau_p;
    let mut rates = String::from("t_ps,rate_name,value_per_ps\n");
    let n = 401;
    for i in 0..n {
        let t = center - span + 2.0 * span * i as f64 / (n - 1) as f64;
        let full = rates_at(t, &cfg.drive, bath, RateModel::Full);
        rate_rows(&mut rates, t, &full, "", minor);
        let eff = rates_at(t, &cfg.drive, bath, RateModel::Effective);
        rate_rows(&mut rates, t, &eff, "eff_", false);
    }
    write_file(&common.out, "rates.csv", &rates)?;

    // pulse-averaged rates over a detuning axis
    let mut avg = String::from(
        "delta_lx_mev,avg_sig_plus,avg_sig_minus,avg_cd,avg_eff_sig_plus,avg_eff_sig_minus\n",
    );
    for i in 0..81 {
        let d_mev = -2.0 + 4.0 * i as f64 / 80.0;
        let mut c = cfg.clone();
        set_parameter(&mut c, "drive.delta_lx", d_mev).map_err(AppError::numerical)?;
        let f = averaged_rates(&c.drive, bath, RateModel::Full);
        let e = averaged_rates(&c.drive, bath, RateModel::Effective);
        let _ = writeln!(
            avg,
            "{},{},{},{},{},{}",
            format_float(d_mev),
            format_float(f.sig_plus),
            format_float(f.sig_minus),
            format_float(f.cd),
            format_float(e.sig_plus),
            format_float(e.sig_minus),
        );
    }
    write_file(&common.out, "rates_avg_vs_detuning.csv", &avg)?;

    let mut manifest = RunManifest::new(cfg, "rates");
    manifest.push("b_avg", format_float(bath.b_avg));
    manifest.push("tau_max_ps", format_float(bath.tau_max));
    // phi(0) from the table vs an independent direct evaluation
    let phi0 = phi_direct(0.0, &cfg.bath, &cfg.quadrature).map_err(AppError::numerical)?;
    manifest.push("re_phi_0", format_float(phi0.re));
    write_file(&common.out, "manifest.txt", &manifest.to_text())
}

fn cmd_evolve(common: &Common, cfg: &SimulationConfig, bath: &PhononBath) -> Result<(), AppError> {
    let traj = run_trajectory(cfg, bath, options(common)).map_err(AppError::numerical)?;
    let mut csv = String::from("t_ps,rho_gg,re_rho_ge,im_rho_ge,rho_ee\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            format_float(*t),
            format_float(s.0.gg().re),
            format_float(s.0.ge().re),
            format_float(s.0.ge().im),
            format_float(s.0.ee().re),
        );
    }
    write_file(&common.out, "evolve.csv", &csv)?;

    let mut manifest = RunManifest::new(cfg, "evolve");
    manifest.push("max_trace_defect", format_float(traj.max_trace_defect()));
    manifest.push("max_hermiticity_defect", format_float(traj.max_hermiticity_defect()));
    if let Some(last) = traj.states.last() {
        manifest.push("final_population", format_float(last.population()));
    }
    write_file(&common.out, "manifest.txt", &manifest.to_text())
}

fn parse_axis(spec: &str) -> Result<SweepAxis, AppError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(AppError::config(format!(
            "axis {spec:?} must be parameter:min:max:count"
        )));
    }
    let min: f64 = parts[1].parse().map_err(|e| AppError::config(format!("axis {spec:?}: {e}")))?;
    let max: f64 = parts[2].parse().map_err(|e| AppError::config(format!("axis {spec:?}: {e}")))?;
    let count: usize =
        parts[3].parse().map_err(|e| AppError::config(format!("axis {spec:?}: {e}")))?;
    Ok(SweepAxis::new(parts[0], min, max, count))
}

fn build_plan(
    common: &Common,
    axis_specs: &[String],
    cfg: &SimulationConfig,
    defaults: &[&str],
) -> Result<SweepPlan, AppError> {
    let specs: Vec<String> = if axis_specs.is_empty() {
        defaults.iter().map(|s| s.to_string()).collect()
    } else {
        axis_specs.to_vec()
    };
    if specs.len() > 2 {
        return Err(AppError::config(format!("at most 2 axes, got {}", specs.len())));
    }
    let mut axes = Vec::new();
    for spec in &specs {
        let axis = parse_axis(spec)?;
        // reject unknown parameters before launching the grid
        let mut probe = cfg.clone();
        set_parameter(&mut probe, &axis.parameter, axis.min).map_err(AppError::config)?;
        axes.push(axis);
    }
    Ok(SweepPlan {
        axes,
        solver: common.solver.into(),
        use_rate_cache: common.rate_cache,
        significant_rates_only: common.significant_rates_only,
    })
}

fn emit_sweep(
    common: &Common,
    cfg: &SimulationConfig,
    stem: &str,
    result: &SweepResult,
) -> Result<(), AppError> {
    let csv_name = format!("{stem}.csv");
    write_file(&common.out, &csv_name, &result.to_csv())?;
    write_file(&common.out, &format!("{stem}.gp"), &plot_script(&csv_name, &result.columns))?;
    let mut manifest = RunManifest::new(cfg, stem);
    manifest.record_sweep(result);
    write_file(&common.out, "manifest.txt", &manifest.to_text())?;
    if result.failed_points() == result.rows.len() && !result.rows.is_empty() {
        return Err(AppError::numerical("every sweep point failed; see manifest.txt"));
    }
    Ok(())
}

fn cmd_photons(
    common: &Common,
    mut cfg: SimulationConfig,
    bath: PhononBath,
    scheme: SourceScheme,
    purcell: Option<f64>,
) -> Result<(), AppError> {
    scheme.apply(&mut cfg);
    if let Some(fp) = purcell {
        set_parameter(&mut cfg, "cavity.purcell", fp).map_err(AppError::config)?;
    }
    let train = PulseTrainSpec::source_study();
    let f_p = cfg.drive.cavity.and_then(|c| c.purcell).unwrap_or(0.0);
    let gamma_total = cfg.system.gamma * (1.0 + f_p);
    if let Some(warning) = train.lifetime_warning(gamma_total) {
        eprintln!("warning: {warning}");
    }
    let (surface, figures) = single_photon_figures(
        &cfg,
        &bath,
        options(common),
        &train,
        &SurfaceResolution::default(),
    )
    .map_err(AppError::numerical)?;

    let mut csv = String::from("tau_ps,g2_integrated\n");
    for (tau, g2) in surface.tau.iter().zip(&surface.g2_integrated) {
        let _ = writeln!(csv, "{},{}", format_float(*tau), format_float(*g2));
    }
    write_file(&common.out, "photons.csv", &csv)?;

    let mut manifest = RunManifest::new(&cfg, "photons");
    manifest.push("indistinguishability", format_float(figures.indistinguishability));
    manifest.push("indistinguishability_clipped", figures.indistinguishability_clipped);
    manifest.push("beta", format_float(figures.beta));
    manifest.push("n_ems", format_float(figures.n_ems));
    manifest.push("purcell", format_float(figures.purcell));
    manifest.push("center_area", format_float(surface.center_area()));
    manifest.push("side_area", format_float(surface.side_area()));
    write_file(&common.out, "manifest.txt", &manifest.to_text())
}
