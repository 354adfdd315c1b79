//! Pulsed single-photon-source figures of merit: two-time correlation
//! functions under a pulse train, the time-integrated G2(tau),
//! indistinguishability, collection efficiency, and emitted photon number.
//!
//! G1 comes from the quantum regression theorem: rho(t) sigma^+ is propagated
//! in tau under the same time-local generator as the state. G2 uses the
//! factorized form G2(t,tau) = (N_x(t) N_x(t+tau) - |G1(t,tau)|^2) / 2.

use crate::bath::PhononBath;
use crate::config::SimulationConfig;
use crate::drive::DriveSpec;
use crate::dynamics::{output_grid, DynamicsError, Engine, EngineOptions, Trajectory};
use crate::quad::trapezoid;
use crate::twolevel::Op2;
use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// All internal time grids sit on this lattice so that N_x(t + tau) is an
/// exact index lookup, never an interpolation.
const LATTICE: f64 = 0.25;

#[derive(Debug, thiserror::Error)]
pub enum PhotonError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("side-peak area is zero; indistinguishability undefined")]
    ZeroSidePeak,
    #[error("population has not decayed at the trajectory end: N_x = {remaining:.3e} > 1e-6")]
    TailNotDecayed { remaining: f64 },
    #[error("Purcell factor must be >= 0, got {0}")]
    NegativePurcell(f64),
}

/// Excitation pulse train: period 2T between pulses, Gaussian pulses of the
/// given fullwidth (2 tau_p), simulated over `n_periods` explicit periods.
#[derive(Debug, Clone, Copy)]
pub struct PulseTrainSpec {
    /// Pulse separation 2T, ps.
    pub period: f64,
    /// Pulse fullwidth 2 tau_p, ps.
    pub fullwidth: f64,
    /// Explicit pulses simulated; the side peak needs 2.
    pub n_periods: usize,
}

impl PulseTrainSpec {
    /// The single-photon-source operating point: pulses every 612 ps,
    /// 18 ps fullwidth.
    pub fn source_study() -> Self {
        PulseTrainSpec { period: 612.0, fullwidth: 18.0, n_periods: 2 }
    }

    /// Half period T, the center-peak integration half-width.
    pub fn half_period(&self) -> f64 {
        0.5 * self.period
    }

    pub fn tau_p(&self) -> f64 {
        0.5 * self.fullwidth
    }

    /// Rebuild the drive with this train's pulse width and centers,
    /// preserving the pulse area, detuning, mode, and cavity parameters.
    pub fn apply(&self, base: &DriveSpec) -> DriveSpec {
        let mut d = DriveSpec::from_area(base.theta, self.tau_p(), base.delta_lx);
        d.mode = base.mode;
        d.cavity = base.cavity;
        d.centers = (0..self.n_periods.max(1)).map(|k| k as f64 * self.period).collect();
        d
    }

    /// Warn (do not fail) when the radiative lifetime is not short against
    /// the train period.
    pub fn lifetime_warning(&self, gamma_total: f64) -> Option<String> {
        let lifetime = if gamma_total > 0.0 { 1.0 / gamma_total } else { f64::INFINITY };
        if lifetime > self.half_period() / 3.0 {
            Some(format!(
                "radiative lifetime {lifetime:.1} ps exceeds T/3 = {:.1} ps; \
                 pulse periods overlap and the side peak is distorted",
                self.half_period() / 3.0
            ))
        } else {
            None
        }
    }
}

/// Grid spacings for the (t, tau) surface; every value must sit on the
/// 0.25 ps lattice.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceResolution {
    /// Emission-time grid spacing, ps.
    pub t_step: f64,
    /// tau spacing near zero (resolving the center-peak structure), ps.
    pub tau_fine_step: f64,
    /// Extent of the fine tau region, ps.
    pub tau_fine_span: f64,
    /// tau spacing beyond the fine region, ps.
    pub tau_coarse_step: f64,
}

impl Default for SurfaceResolution {
    fn default() -> Self {
        SurfaceResolution { t_step: 1.0, tau_fine_step: 0.5, tau_fine_span: 100.0, tau_coarse_step: 5.0 }
    }
}

fn snap_to_lattice(x: f64) -> f64 {
    (x / LATTICE).round() * LATTICE
}

/// G2(t, tau) on its grid plus the t-integrated G2(tau).
#[derive(Debug, Clone)]
pub struct CorrelationSurface {
    pub t: Vec<f64>,
    pub tau: Vec<f64>,
    /// values[i][k] = G2(t[i], tau[k])
    pub values: Vec<Vec<f64>>,
    /// int_{-T}^{T} G2(t, tau) dt per tau; symmetric in tau, so only
    /// tau >= 0 is stored.
    pub g2_integrated: Vec<f64>,
    pub half_period: f64,
}

impl CorrelationSurface {
    pub fn min_value(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    fn area(&self, tau_lo: f64, tau_hi: f64) -> f64 {
        let lo = self.tau.partition_point(|&x| x < tau_lo - 1e-9);
        let hi = self.tau.partition_point(|&x| x < tau_hi + 1e-9);
        trapezoid(&self.tau[lo..hi], &self.g2_integrated[lo..hi])
    }

    /// Center-peak area int_{-T}^{T} G2(tau) dtau, using symmetry in tau.
    pub fn center_area(&self) -> f64 {
        2.0 * self.area(0.0, self.half_period)
    }

    /// Side-peak area int_{T}^{3T} G2(tau) dtau.
    pub fn side_area(&self) -> f64 {
        self.area(self.half_period, 3.0 * self.half_period)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IndistinguishabilityReport {
    pub value: f64,
    pub center_area: f64,
    pub side_area: f64,
    /// True when the side peak is below the resolvable floor and the value
    /// was clipped into [0, 1].
    pub clipped: bool,
}

/// I = 1 - center / side. Zero side peak is an error; a sub-floor side peak
/// yields a clipped report.
pub fn indistinguishability(surface: &CorrelationSurface) -> Result<IndistinguishabilityReport, PhotonError> {
    let center = surface.center_area();
    let side = surface.side_area();
    if side <= 0.0 {
        return Err(PhotonError::ZeroSidePeak);
    }
    let raw = 1.0 - center / side;
    let clipped = side < 1e-12;
    let value = if clipped { raw.clamp(0.0, 1.0) } else { raw };
    Ok(IndistinguishabilityReport { value, center_area: center, side_area: side, clipped })
}

/// Collection efficiency beta = F_P / (1 + F_P).
pub fn efficiency(purcell: f64) -> Result<f64, PhotonError> {
    if purcell < 0.0 {
        return Err(PhotonError::NegativePurcell(purcell));
    }
    Ok(purcell / (1.0 + purcell))
}

/// n_ems = gamma_tilde int N_x(t) dt over the trajectory, which must cover
/// one full period with a mostly decayed tail. A small residual population
/// at the window end is closed analytically by extrapolating the final
/// exponential decay; a large residual means the window is simply too short
/// to attribute photons to this pulse.
pub fn emitted_photon_number(traj: &Trajectory, gamma_tilde: f64) -> Result<f64, PhotonError> {
    let pops = traj.population();
    let tail = *pops.last().unwrap_or(&0.0);
    if tail > 1e-2 {
        return Err(PhotonError::TailNotDecayed { remaining: tail });
    }
    let mut n = gamma_tilde * trapezoid(&traj.times, &pops);
    if tail > 0.0 && pops.len() >= 2 {
        let k = pops.len() - 2;
        let (prev, dt) = (pops[k], traj.times[k + 1] - traj.times[k]);
        if prev > tail && dt > 0.0 {
            let decay_rate = (prev / tail).ln() / dt;
            n += gamma_tilde * tail / decay_rate;
        }
    }
    Ok(n)
}

/// G1(t, tau) for one stored state: propagate rho(t) sigma^+ and read the
/// sigma^- weighted trace at each requested tau.
pub fn g1(
    engine: &Engine,
    rho_t: &Op2,
    t: f64,
    taus: &[f64],
) -> Result<Vec<Complex64>, PhotonError> {
    let m0 = *rho_t * Op2::sigma_plus();
    let outputs: Vec<f64> = taus.iter().map(|tau| t + tau).collect();
    let t_end = *outputs.last().unwrap_or(&t);
    let mut vals = Vec::with_capacity(taus.len());
    engine.propagate(m0, t, t_end, &outputs, |_, m| vals.push(m.eg()))?;
    Ok(vals)
}

/// Compute the G2 surface for the pulse train described by `train`, with the
/// drive parameters (area, detuning, cavity) taken from `cfg`.
pub fn g2_surface(
    cfg: &SimulationConfig,
    bath: &PhononBath,
    opts: EngineOptions,
    train: &PulseTrainSpec,
    res: &SurfaceResolution,
) -> Result<CorrelationSurface, PhotonError> {
    let mut cfg = cfg.clone();
    cfg.drive = train.apply(&cfg.drive);
    let engine = Engine::new(&cfg, bath, opts)?;

    let t_half = train.half_period();
    let t0 = -t_half;
    let horizon = 4.0 * t_half; // covers t + tau for t <= T, tau <= 3T
    let pop_grid = output_grid(t0, horizon, LATTICE);

    // emission-time grid: from just before the first pulse to +T
    let t_first = snap_to_lattice((-5.0 * cfg.drive.tau_p).max(t0));
    let t_step = snap_to_lattice(res.t_step).max(LATTICE);
    let mut t_grid = Vec::new();
    let mut t = t_first;
    while t <= t_half + 1e-9 {
        t_grid.push(snap_to_lattice(t));
        t += t_step;
    }

    // tau grid: fine near zero, coarse beyond, with T and 3T pinned for the
    // peak-area split
    let fine = snap_to_lattice(res.tau_fine_step).max(LATTICE);
    let coarse = snap_to_lattice(res.tau_coarse_step).max(fine);
    let mut taus = Vec::new();
    let mut tau = 0.0;
    while tau <= res.tau_fine_span + 1e-9 {
        taus.push(snap_to_lattice(tau));
        tau += fine;
    }
    while tau <= 3.0 * t_half + 1e-9 {
        taus.push(snap_to_lattice(tau));
        tau += coarse;
    }
    for pin in [t_half, 3.0 * t_half] {
        let pin = snap_to_lattice(pin);
        if !taus.iter().any(|&x| (x - pin).abs() < 1e-9) {
            taus.push(pin);
        }
    }
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    // one state pass: populations on the lattice, snapshots on the t grid
    let mut pops = Vec::with_capacity(pop_grid.len());
    let mut snapshots: Vec<Op2> = Vec::with_capacity(t_grid.len());
    let mut next_snap = 0usize;
    engine.propagate(
        crate::twolevel::DensityMatrix::ground().0,
        t0,
        horizon,
        &pop_grid,
        |t, m| {
            pops.push(m.ee().re);
            if next_snap < t_grid.len() && (t - t_grid[next_snap]).abs() < 1e-9 {
                snapshots.push(*m);
                next_snap += 1;
            }
        },
    )?;
    debug_assert_eq!(snapshots.len(), t_grid.len());

    let pop_at = |time: f64| -> f64 {
        let idx = ((time - t0) / LATTICE).round() as usize;
        pops[idx.min(pops.len() - 1)]
    };

    let row = |(ti, rho): (&f64, &Op2)| -> Result<Vec<f64>, PhotonError> {
        let nx_t = rho.ee().re;
        // a dead interval contributes nothing; skip the propagation
        if nx_t.abs() + rho.ge().norm() < 1e-12 {
            return Ok(vec![0.0; taus.len()]);
        }
        let g1_vals = g1(&engine, rho, *ti, &taus)?;
        Ok(taus
            .iter()
            .zip(&g1_vals)
            .map(|(&tau, g)| {
                if tau == 0.0 {
                    0.0
                } else {
                    0.5 * (nx_t * pop_at(ti + tau) - g.norm_sqr())
                }
            })
            .collect())
    };

    #[cfg(feature = "parallel")]
    let values: Vec<Vec<f64>> = t_grid
        .par_iter()
        .zip(snapshots.par_iter())
        .map(row)
        .collect::<Result<_, _>>()?;
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Vec<f64>> = t_grid
        .iter()
        .zip(snapshots.iter())
        .map(row)
        .collect::<Result<_, _>>()?;

    let g2_integrated: Vec<f64> = (0..taus.len())
        .map(|k| {
            let col: Vec<f64> = values.iter().map(|r| r[k]).collect();
            trapezoid(&t_grid, &col)
        })
        .collect();

    Ok(CorrelationSurface {
        t: t_grid,
        tau: taus,
        values,
        g2_integrated,
        half_period: t_half,
    })
}

/// Summary record for one source operating point.
#[derive(Debug, Clone, Copy)]
pub struct SourceFigures {
    pub indistinguishability: f64,
    pub indistinguishability_clipped: bool,
    pub beta: f64,
    pub n_ems: f64,
    pub purcell: f64,
}

/// One-pulse trajectory over a full period, used for n_ems.
pub fn single_pulse_trajectory(
    cfg: &SimulationConfig,
    bath: &PhononBath,
    opts: EngineOptions,
    train: &PulseTrainSpec,
) -> Result<Trajectory, PhotonError> {
    let mut cfg = cfg.clone();
    let single = PulseTrainSpec { n_periods: 1, ..*train };
    cfg.drive = single.apply(&cfg.drive);
    let engine = Engine::new(&cfg, bath, opts)?;
    let t0 = snap_to_lattice(-5.0 * cfg.drive.tau_p);
    let t_end = snap_to_lattice(train.period + t0);
    let outputs = output_grid(t0, t_end, LATTICE);
    Ok(engine.integrate(t0, t_end, &outputs)?)
}

/// Full analysis of one operating point: the G2 surface plus the scalar
/// figures of merit.
pub fn single_photon_figures(
    cfg: &SimulationConfig,
    bath: &PhononBath,
    opts: EngineOptions,
    train: &PulseTrainSpec,
    res: &SurfaceResolution,
) -> Result<(CorrelationSurface, SourceFigures), PhotonError> {
    let purcell = cfg.drive.cavity.and_then(|c| c.purcell).unwrap_or(0.0);
    let beta = efficiency(purcell)?;
    let surface = g2_surface(cfg, bath, opts, train, res)?;
    let report = indistinguishability(&surface)?;
    let traj = single_pulse_trajectory(cfg, bath, opts, train)?;
    let n_ems = emitted_photon_number(&traj, purcell * cfg.system.gamma)?;
    Ok((
        surface,
        SourceFigures {
            indistinguishability: report.value,
            indistinguishability_clipped: report.clipped,
            beta,
            n_ems,
            purcell,
        },
    ))
}
