//! Master-equation assembly and time integration.
//!
//! Three solver paths share the coherent part and the zero-phonon-line
//! Lindblad terms:
//!  - `Analytic`: the semi-analytical form with the seven phonon rates,
//!  - `Effective`: the weak-drive reduction (three surviving rates),
//!  - `Direct`: the full polaron master equation with the phonon commutators
//!    evaluated numerically from two-time operators; this is the oracle the
//!    analytic rates are validated against.

use crate::bath::{KernelError, PhononBath};
use crate::config::SimulationConfig;
use crate::drive::{DriveError, DriveSpec};
use crate::ode::{Dopri5, OdeError};
use crate::rates::{full_rates, effective_rates, DriveSnapshot, RateCache, RateModel, RateSet};
use crate::twolevel::{exp_minus_i_h_tau, DensityMatrix, Op2, I};
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Drive(#[from] DriveError),
    #[error("trajectory horizon ends at {t_end} ps, before the requested time {requested} ps")]
    HorizonTooShort { t_end: f64, requested: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Analytic,
    Direct,
    Effective,
}

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub solver: SolverKind,
    /// Interpolate rates from a precomputed pulse-window table instead of
    /// re-integrating at every step.
    pub use_rate_cache: bool,
    /// Drop the negligible rates (Gamma^sd, Gamma_g, Delta^{sigma+sigma-})
    /// to reproduce the four-rate model.
    pub significant_rates_only: bool,
}

impl EngineOptions {
    pub fn analytic() -> Self {
        EngineOptions { solver: SolverKind::Analytic, use_rate_cache: false, significant_rates_only: false }
    }
    pub fn direct() -> Self {
        EngineOptions { solver: SolverKind::Direct, ..Self::analytic() }
    }
    pub fn effective() -> Self {
        EngineOptions { solver: SolverKind::Effective, ..Self::analytic() }
    }
    pub fn cached(mut self) -> Self {
        self.use_rate_cache = true;
        self
    }
}

/// Time grid, density-matrix samples, and the derived population N_x(t).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn population(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.population()).collect()
    }

    pub fn max_trace_defect(&self) -> f64 {
        self.states.iter().map(|s| s.trace_defect()).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.states.iter().map(|s| s.0.hermiticity_defect()).fold(0.0, f64::max)
    }

    /// Linear interpolation of N_x at an arbitrary time inside the grid.
    pub fn population_at(&self, t: f64) -> Result<f64, DynamicsError> {
        let t_end = *self.times.last().unwrap_or(&f64::NEG_INFINITY);
        if t > t_end + 1e-9 {
            return Err(DynamicsError::HorizonTooShort { t_end, requested: t });
        }
        let idx = self.times.partition_point(|&x| x < t);
        if idx == 0 {
            return Ok(self.states[0].population());
        }
        if idx >= self.times.len() {
            return Ok(self.states.last().unwrap().population());
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (p0, p1) = (self.states[idx - 1].population(), self.states[idx].population());
        if t1 == t0 {
            return Ok(p1);
        }
        Ok(p0 + (p1 - p0) * (t - t0) / (t1 - t0))
    }

    pub fn max_elementwise_diff(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(other.states.iter())
            .map(|(a, b)| a.0.max_abs_diff(&b.0))
            .fold(0.0, f64::max)
    }
}

/// Bound solver for one configuration: drive, kernel, ZPL rates, and the
/// chosen phonon treatment.
pub struct Engine<'a> {
    pub drive: &'a DriveSpec,
    pub bath: &'a PhononBath,
    /// gamma + gamma_tilde, 1/ps.
    pub gamma_total: f64,
    pub gamma_prime: f64,
    pub solver: SolverKind,
    include_minor: bool,
    cache: Option<RateCache>,
    rel_tol: f64,
    abs_tol: f64,
}

impl<'a> Engine<'a> {
    pub fn new(
        cfg: &'a SimulationConfig,
        bath: &'a PhononBath,
        opts: EngineOptions,
    ) -> Result<Self, DynamicsError> {
        // validate the cavity filter up front in cavity-driven mode
        cfg.drive.exciton_peak()?;
        let purcell = cfg.drive.cavity.and_then(|c| c.purcell).unwrap_or(0.0);
        let gamma_total = cfg.system.gamma * (1.0 + purcell);
        let model = match opts.solver {
            SolverKind::Effective => RateModel::Effective,
            _ => RateModel::Full,
        };
        let cache = if opts.use_rate_cache && opts.solver != SolverKind::Direct {
            Some(RateCache::build(&cfg.drive, bath, model, RateCache::DEFAULT_STEP))
        } else {
            None
        };
        Ok(Engine {
            drive: &cfg.drive,
            bath,
            gamma_total,
            gamma_prime: cfg.system.gamma_prime,
            solver: opts.solver,
            include_minor: !opts.significant_rates_only,
            cache,
            rel_tol: cfg.integrator.rel_tol,
            abs_tol: cfg.integrator.abs_tol,
        })
    }

    /// Enhanced decay into the cavity channel, gamma_tilde = F_P gamma.
    pub fn gamma_tilde(&self, gamma: f64) -> f64 {
        self.gamma_total - gamma
    }

    fn rates(&self, t: f64, snap: &DriveSnapshot) -> RateSet {
        let mut r = match (&self.cache, self.solver) {
            (Some(c), _) => c.lookup(t),
            (None, SolverKind::Effective) => effective_rates(snap, self.bath),
            (None, _) => full_rates(snap, self.bath),
        };
        if !self.include_minor {
            r.sd = 0.0;
            r.shift = 0.0;
            r.g = Complex64::new(0.0, 0.0);
        }
        r
    }

    /// Right-hand side of the master equation applied to a general 2x2
    /// operator (density matrix or regression operator).
    pub fn rhs(&self, t: f64, m: &Op2) -> Op2 {
        let omega = self.drive.envelope(t);
        let snap = DriveSnapshot::new(omega, self.drive.rate_detuning(), self.bath.b_avg);
        match self.solver {
            SolverKind::Direct => {
                let mut d = apply_coherent_and_zpl(
                    m,
                    snap.omega_r,
                    self.drive.delta_lx,
                    0.0,
                    self.gamma_total,
                    self.gamma_prime,
                );
                if omega != 0.0 {
                    d += self.phonon_term_direct(m, &snap);
                }
                d
            }
            _ => {
                let rates = if omega == 0.0 { RateSet::zero() } else { self.rates(t, &snap) };
                let mut d = apply_coherent_and_zpl(
                    m,
                    snap.omega_r,
                    self.drive.delta_lx,
                    rates.shift,
                    self.gamma_total,
                    self.gamma_prime,
                );
                d += apply_phonon_rates(m, &rates);
                if self.solver == SolverKind::Analytic {
                    d += apply_traceful_correction(m, &rates);
                }
                d
            }
        }
    }

    /// L_ph rho of the full polaron master equation: tau-quadrature of the
    /// two-time commutators against the Green functions, on exactly the same
    /// grid and weights as the analytical rate integrals.
    fn phonon_term_direct(&self, m: &Op2, snap: &DriveSnapshot) -> Op2 {
        let half_omega = Complex64::new(0.5 * snap.omega, 0.0);
        let x_g = Op2::new(
            Complex64::new(0.0, 0.0),
            half_omega,
            half_omega,
            Complex64::new(0.0, 0.0),
        );
        let x_u = Op2::new(
            Complex64::new(0.0, 0.0),
            -I * half_omega,
            I * half_omega,
            Complex64::new(0.0, 0.0),
        );
        let b2 = self.bath.b_avg * self.bath.b_avg;
        // H_S'(t) frozen at t for the tau evolution
        let h_ge = Complex64::new(0.5 * snap.omega_r, 0.0);
        let h_ee = -self.drive.delta_lx;

        let mut acc = Op2::zero();
        for i in 0..self.bath.len() {
            let tau = i as f64 * self.bath.dtau;
            let w = self.bath.weights[i];
            let u = exp_minus_i_h_tau(0.0, h_ge, h_ee, tau);
            let udag = u.adjoint();
            let g_g = self.bath.coshm1[i] * b2;
            let g_u = self.bath.sinh[i] * b2;

            for (x, g) in [(x_g, g_g), (x_u, g_u)] {
                let x_tau = u * x * udag;
                // G [X, X_tau m] + (H.c. as a superoperator): the conjugate
                // term is G* (m X_tau X - X m X_tau), X and X_tau Hermitian.
                let fwd = (x * (x_tau * *m) - x_tau * *m * x).scale(g * w);
                let bwd = (*m * (x_tau * x) - x * *m * x_tau).scale(g.conj() * w);
                acc += fwd + bwd;
            }
        }
        -acc
    }

    /// Propagate an arbitrary operator, observing at the given times.
    pub fn propagate<O: FnMut(f64, &Op2)>(
        &self,
        m0: Op2,
        t0: f64,
        t_end: f64,
        outputs: &[f64],
        observe: O,
    ) -> Result<Op2, DynamicsError> {
        let solver = Dopri5::new(self.rel_tol, self.abs_tol);
        Ok(solver.integrate(|t, m| self.rhs(t, m), t0, t_end, m0, outputs, observe)?)
    }

    /// Integrate the state from |g><g| over [t0, t_end], sampling at
    /// `outputs`.
    pub fn integrate(&self, t0: f64, t_end: f64, outputs: &[f64]) -> Result<Trajectory, DynamicsError> {
        let mut times = Vec::with_capacity(outputs.len());
        let mut states = Vec::with_capacity(outputs.len());
        self.propagate(DensityMatrix::ground().0, t0, t_end, outputs, |t, m| {
            times.push(t);
            states.push(DensityMatrix(*m));
        })?;
        Ok(Trajectory { times, states })
    }
}

/// Coherent commutator (with the Delta^{sigma+sigma-} shift folded into the
/// Hamiltonian) plus the zero-phonon-line Lindblad terms.
fn apply_coherent_and_zpl(
    m: &Op2,
    omega_r: f64,
    delta_lx: f64,
    shift: f64,
    gamma_total: f64,
    gamma_prime: f64,
) -> Op2 {
    let (m_gg, m_ge, m_eg, m_ee) = (m.m[0], m.m[1], m.m[2], m.m[3]);
    let b = 0.5 * omega_r;
    let a = Complex64::new(-delta_lx - shift, 0.0);

    // -i [H, m] with H = b sigma_x + a |e><e|
    let hm_gg = b * m_eg;
    let hm_ge = b * m_ee;
    let hm_eg = b * m_gg + a * m_eg;
    let hm_ee = b * m_ge + a * m_ee;
    let mh_gg = b * m_ge;
    let mh_ge = b * m_gg + a * m_ge;
    let mh_eg = b * m_ee;
    let mh_ee = b * m_eg + a * m_ee;

    let mut d_gg = -I * (hm_gg - mh_gg);
    let mut d_ge = -I * (hm_ge - mh_ge);
    let mut d_eg = -I * (hm_eg - mh_eg);
    let mut d_ee = -I * (hm_ee - mh_ee);

    // (gamma/2) L[sigma^-]
    d_gg += m_ee * gamma_total;
    d_ee -= m_ee * gamma_total;
    let coh_decay = 0.5 * gamma_total + 0.5 * gamma_prime;
    d_ge -= m_ge * coh_decay;
    d_eg -= m_eg * coh_decay;

    Op2::new(d_gg, d_ge, d_eg, d_ee)
}

/// The phonon part of the semi-analytical master equation for a given rate
/// set, applied to a general operator.
fn apply_phonon_rates(m: &Op2, r: &RateSet) -> Op2 {
    let (m_gg, m_ge, m_eg, m_ee) = (m.m[0], m.m[1], m.m[2], m.m[3]);
    let mut d_gg = Complex64::new(0.0, 0.0);
    let mut d_ge = Complex64::new(0.0, 0.0);
    let mut d_eg = Complex64::new(0.0, 0.0);
    let mut d_ee = Complex64::new(0.0, 0.0);

    // (Gamma^{sigma+}/2) L[sigma^+]
    d_ee += m_gg * r.sig_plus;
    d_gg -= m_gg * r.sig_plus;
    // (Gamma^{sigma-}/2) L[sigma^-]
    d_gg += m_ee * r.sig_minus;
    d_ee -= m_ee * r.sig_minus;
    let coh = 0.5 * (r.sig_plus + r.sig_minus);
    d_ge -= m_ge * coh;
    d_eg -= m_eg * coh;

    // -Gamma^{cd} (s+ m s+ + s- m s-)
    d_eg -= m_ge * r.cd;
    d_ge -= m_eg * r.cd;
    // -i Gamma^{sd} (s+ m s+ - s- m s-)
    d_eg -= I * m_ge * r.sd;
    d_ge += I * m_eg * r.sd;

    // -(i Gamma_u (P_e m s+ + s- m - P_e m s-) + H.c.)
    let iu = I * r.u;
    let iuc = I * r.u.conj();
    d_gg += -iu * m_eg + iuc * m_ge;
    let off = -iu + iuc;
    d_ge += off * m_ee;
    d_eg += off * m_ee;
    d_ee += iu * m_eg - iuc * m_ge;

    // -(Gamma_g (P_e m s+ - s- m + P_e m s-) + H.c.)
    let g = r.g;
    let gc = r.g.conj();
    d_gg += g * m_eg + gc * m_ge;
    d_ge += (g - gc) * m_ee;
    d_eg += (gc - g) * m_ee;
    d_ee += -g * m_eg - gc * m_ge;

    Op2::new(d_gg, d_ge, d_eg, d_ee)
}

/// Correction restoring tracelessness of the rotated bath-coupling
/// operators. The closed-form sigma^+ sigma^- groupings of the non-Lindblad
/// terms absorb the sigma_z components of the interaction-picture operators
/// as 2|e><e| = I - sigma_z, which differs from the traceless operator by a
/// multiple of the identity. For complex Green functions that identity
/// admixture leaves a residual Hamiltonian-like term; restoring it here,
///   -i [Im(Gamma_g) sigma_x + Im(Gamma_u) sigma_y, rho],
/// makes the rate-based generator identical to the directly integrated
/// commutator form.
fn apply_traceful_correction(m: &Op2, r: &RateSet) -> Op2 {
    let c = Complex64::new(r.g.im, -r.u.im);
    if c.norm_sqr() == 0.0 {
        return Op2::zero();
    }
    let (m_gg, m_ge, m_eg, m_ee) = (m.m[0], m.m[1], m.m[2], m.m[3]);
    let cc = c.conj();
    Op2::new(
        -I * (c * m_eg - cc * m_ge),
        -I * c * (m_ee - m_gg),
        -I * cc * (m_gg - m_ee),
        -I * (cc * m_ge - c * m_eg),
    )
}

/// Uniformly spaced output grid including both endpoints.
pub fn output_grid(t0: f64, t_end: f64, step: f64) -> Vec<f64> {
    let n = ((t_end - t0) / step).round() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| t0 + i as f64 * step).collect();
    if let Some(last) = v.last_mut() {
        *last = t_end.min(*last);
    }
    v
}

/// Run a single-pulse simulation and return the trajectory sampled densely
/// enough for the population readout.
pub fn run_trajectory(
    cfg: &SimulationConfig,
    bath: &PhononBath,
    opts: EngineOptions,
) -> Result<Trajectory, DynamicsError> {
    let engine = Engine::new(cfg, bath, opts)?;
    let (t0, t_end) = cfg.window();
    let mut outputs = output_grid(t0, t_end, 0.25);
    let readout = cfg.drive.nearest_center(0.0) + 2.0 * cfg.drive.tau_p;
    if readout > t0 && readout < t_end && !outputs.iter().any(|&t| (t - readout).abs() < 1e-9) {
        outputs.push(readout);
        outputs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    engine.integrate(t0, t_end, &outputs)
}

/// The inversion criterion: N_x one pulse fullwidth (2 tau_p) after the
/// pulse center.
pub fn population_metric(traj: &Trajectory, drive: &DriveSpec) -> Result<f64, DynamicsError> {
    let center = drive.centers.first().copied().unwrap_or(0.0);
    traj.population_at(center + 2.0 * drive.tau_p)
}
