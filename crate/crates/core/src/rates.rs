//! Instantaneous phonon-mediated scattering rates.
//!
//! The seven rates of the full semi-analytical master equation and the
//! three surviving weak-drive rates are tau-integrals of tabulated kernel
//! combinations against trigonometric factors of eta(t) = sqrt(Omega_R^2 +
//! Delta_Lx^2). All integrals run over the kernel table with fixed Simpson
//! weights; no adaptive quadrature in the hot loop.

use crate::bath::PhononBath;
use crate::drive::DriveSpec;
use crate::quad::simpson_weights;
use num_complex::Complex64;

/// Instantaneous drive snapshot entering the rate integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSnapshot {
    /// Bare Omega(t), 1/ps.
    pub omega: f64,
    /// Polaron-reduced Omega_R(t) = <B> Omega(t), 1/ps.
    pub omega_r: f64,
    /// Detuning entering the rate integrals, 1/ps.
    pub delta_lx: f64,
    /// eta(t) = sqrt(Omega_R^2 + Delta_Lx^2), 1/ps.
    pub eta: f64,
}

impl DriveSnapshot {
    pub fn new(omega: f64, delta_lx: f64, b_avg: f64) -> Self {
        let omega_r = b_avg * omega;
        DriveSnapshot { omega, omega_r, delta_lx, eta: omega_r.hypot(delta_lx) }
    }
}

/// The seven phonon rates (full model) or the three effective rates, 1/ps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateSet {
    /// Incoherent excitation Gamma^{sigma+}.
    pub sig_plus: f64,
    /// Phonon-mediated decay Gamma^{sigma-}.
    pub sig_minus: f64,
    /// Cross dephasing Gamma^{cd}.
    pub cd: f64,
    /// Anomalous dephasing Gamma^{sd}.
    pub sd: f64,
    /// Non-Lindblad rate Gamma_u (complex).
    pub u: Complex64,
    /// Non-Lindblad rate Gamma_g (complex).
    pub g: Complex64,
    /// Coherent shift Delta^{sigma+ sigma-}.
    pub shift: f64,
}

impl RateSet {
    pub fn zero() -> Self {
        RateSet::default()
    }

    fn scaled(self, s: f64) -> Self {
        RateSet {
            sig_plus: self.sig_plus * s,
            sig_minus: self.sig_minus * s,
            cd: self.cd * s,
            sd: self.sd * s,
            u: self.u * s,
            g: self.g * s,
            shift: self.shift * s,
        }
    }

    fn add_scaled(&mut self, other: &RateSet, s: f64) {
        self.sig_plus += other.sig_plus * s;
        self.sig_minus += other.sig_minus * s;
        self.cd += other.cd * s;
        self.sd += other.sd * s;
        self.u += other.u * s;
        self.g += other.g * s;
        self.shift += other.shift * s;
    }
}

/// All seven rates of the full semi-analytical master equation.
pub fn full_rates(snap: &DriveSnapshot, bath: &PhononBath) -> RateSet {
    if snap.omega_r == 0.0 {
        return RateSet::zero();
    }
    let eta = snap.eta;
    let delta = snap.delta_lx;
    let inv_eta2 = 1.0 / (eta * eta);
    let or2 = snap.omega_r * snap.omega_r;

    let mut acc = RateSet::zero();
    for i in 0..bath.len() {
        let tau = i as f64 * bath.dtau;
        let w = bath.weights[i];
        let (s_eta, c_eta) = (eta * tau).sin_cos();
        // appendix shorthand kernels
        let f = (delta * delta * c_eta + or2) * inv_eta2;
        let g_fac = delta * s_eta / eta;

        let coshm1 = bath.coshm1[i];
        let sinh = bath.sinh[i];
        let expm1 = bath.expm1[i];

        let re_part = coshm1.re * f + sinh.re * c_eta;
        let im_part = expm1.im * g_fac;
        acc.sig_plus += w * (re_part - im_part);
        acc.sig_minus += w * (re_part + im_part);
        acc.cd += w * (sinh.re * c_eta - coshm1.re * f);
        acc.sd += w * bath.one_m_exp_neg[i].re * g_fac;
        acc.shift += w * expm1.re * g_fac;
        acc.u += sinh * (w * snap.omega_r * s_eta / eta);
        acc.g += coshm1 * (w * delta * snap.omega_r * (1.0 - c_eta) * inv_eta2);
    }
    acc.scaled(0.5 * or2)
}

/// The three rates surviving in the weak-drive (effective) master equation.
pub fn effective_rates(snap: &DriveSnapshot, bath: &PhononBath) -> RateSet {
    if snap.omega_r == 0.0 {
        return RateSet::zero();
    }
    let delta = snap.delta_lx;
    let or2 = snap.omega_r * snap.omega_r;
    let mut acc = RateSet::zero();
    for i in 0..bath.len() {
        let tau = i as f64 * bath.dtau;
        let w = bath.weights[i];
        let (s_d, c_d) = (delta * tau).sin_cos();
        let expm1 = bath.expm1[i];
        // Re{ e^{+-i Delta tau} (e^phi - 1) }
        let even = expm1.re * c_d;
        let odd = expm1.im * s_d;
        acc.sig_plus += w * (even - odd);
        acc.sig_minus += w * (even + odd);
        acc.cd += w * c_d * bath.one_m_exp_neg[i].re;
    }
    acc.scaled(0.5 * or2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    Full,
    Effective,
}

/// Rates evaluated at time t from the instantaneous envelope.
pub fn rates_at(t: f64, drive: &DriveSpec, bath: &PhononBath, model: RateModel) -> RateSet {
    let snap = DriveSnapshot::new(drive.envelope(t), drive.rate_detuning(), bath.b_avg);
    match model {
        RateModel::Full => full_rates(&snap, bath),
        RateModel::Effective => effective_rates(&snap, bath),
    }
}

/// Pulse-averaged rates <Gamma_i> = int Gamma_i(t) dt / (2 tau_p), taken
/// over [-5 tau_p, +5 tau_p] around each pulse center (Gaussian tails are
/// below 1e-10 there).
pub fn averaged_rates(drive: &DriveSpec, bath: &PhononBath, model: RateModel) -> RateSet {
    let center = drive.centers.first().copied().unwrap_or(0.0);
    let half_span = 5.0 * drive.tau_p;
    let n = 401;
    let h = 2.0 * half_span / (n - 1) as f64;
    let w = simpson_weights(n, h);
    let mut acc = RateSet::zero();
    for i in 0..n {
        let t = center - half_span + i as f64 * h;
        let r = rates_at(t, drive, bath, model);
        acc.add_scaled(&r, w[i]);
    }
    acc.scaled(1.0 / (2.0 * drive.tau_p))
}

/// Precomputed rate table over one pulse window, cubic-interpolated.
/// Pulse trains map each time to the nearest pulse center; pulses are
/// assumed non-overlapping on the 10 tau_p scale.
#[derive(Debug, Clone)]
pub struct RateCache {
    center0: f64,
    half_span: f64,
    dt: f64,
    table: Vec<RateSet>,
    centers: Vec<f64>,
}

impl RateCache {
    pub const DEFAULT_STEP: f64 = 0.05;

    pub fn build(drive: &DriveSpec, bath: &PhononBath, model: RateModel, dt: f64) -> Self {
        let half_span = 5.0 * drive.tau_p;
        let n = (2.0 * half_span / dt).ceil() as usize + 1;
        let center0 = drive.centers.first().copied().unwrap_or(0.0);
        let mut table = Vec::with_capacity(n);
        for i in 0..n {
            let t = center0 - half_span + i as f64 * dt;
            table.push(rates_at(t, drive, bath, model));
        }
        RateCache { center0, half_span, dt, table, centers: drive.centers.clone() }
    }

    pub fn lookup(&self, t: f64) -> RateSet {
        // map to the window of the nearest pulse
        let center = self
            .centers
            .iter()
            .copied()
            .min_by(|a, b| (t - a).abs().partial_cmp(&(t - b).abs()).unwrap())
            .unwrap_or(self.center0);
        let local = t - center + self.center0;
        let x = (local - (self.center0 - self.half_span)) / self.dt;
        let n = self.table.len();
        if x <= 0.0 || x >= (n - 1) as f64 {
            return RateSet::zero();
        }
        let i = x.floor() as usize;
        let i0 = i.saturating_sub(1).min(n - 4);
        let s = x - i0 as f64;
        let mut out = RateSet::zero();
        for k in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if j != k {
                    w *= (s - j as f64) / (k as f64 - j as f64);
                }
            }
            out.add_scaled(&self.table[i0 + k], w);
        }
        out
    }
}
