//! Pulse and cavity drive specifications.

use serde::{Deserialize, Serialize};

const SQRT_PI: f64 = 1.7724538509055159;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveMode {
    /// Laser drives the exciton transition directly.
    Exciton,
    /// Laser drives a detuned cavity; the exciton sees the filtered
    /// effective drive.
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Cavity-dot coupling g, 1/ps.
    pub g: f64,
    /// Cavity decay rate kappa, 1/ps.
    pub kappa: f64,
    /// Cavity-exciton detuning Delta_cx, 1/ps.
    pub delta_cx: f64,
    /// Cavity pulse area Theta_c, radians (cavity-driven mode).
    pub theta_c: Option<f64>,
    /// Purcell factor F_P (photon statistics; independent of g, kappa).
    pub purcell: Option<f64>,
    /// Sensitivity switch: evaluate the phonon rate integrals with the
    /// cavity-exciton detuning instead of the laser-exciton detuning.
    pub use_cavity_detuning_in_rates: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    /// Bare peak Rabi frequency Omega_p, 1/ps.
    pub omega_p: f64,
    /// Pulse halfwidth tau_p, ps (1/e fullwidth is 2 tau_p).
    pub tau_p: f64,
    /// Pulse area Theta = sqrt(pi) tau_p Omega_p, radians.
    pub theta: f64,
    /// Laser-exciton detuning Delta_Lx, 1/ps.
    pub delta_lx: f64,
    pub mode: DriveMode,
    pub cavity: Option<CavityParams>,
    /// Pulse centers, ps. A single pulse sits at t = 0.
    pub centers: Vec<f64>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum DriveError {
    #[error("effective drive undefined: kappa and Delta_Lc are both zero")]
    DegenerateCavityFilter,
    #[error("cavity-driven mode requires cavity parameters with a pulse area")]
    MissingCavity,
}

/// Omega_eff(t) = g Omega_c(t) / sqrt(kappa^2 + Delta_Lc^2): the bad-cavity
/// coherent-state reduction of the cavity drive to an exciton drive.
pub fn effective_drive(omega_c: f64, g: f64, kappa: f64, delta_lc: f64) -> Result<f64, DriveError> {
    let denom = (kappa * kappa + delta_lc * delta_lc).sqrt();
    if denom == 0.0 {
        return Err(DriveError::DegenerateCavityFilter);
    }
    Ok(g * omega_c / denom)
}

impl DriveSpec {
    /// Exciton-driven Gaussian pulse with area `theta` (radians).
    pub fn from_area(theta: f64, tau_p: f64, delta_lx: f64) -> Self {
        DriveSpec {
            omega_p: theta / (SQRT_PI * tau_p),
            tau_p,
            theta,
            delta_lx,
            mode: DriveMode::Exciton,
            cavity: None,
            centers: vec![0.0],
        }
    }

    /// Exciton-driven Gaussian pulse with peak Rabi frequency `omega_p` (1/ps).
    pub fn from_peak(omega_p: f64, tau_p: f64, delta_lx: f64) -> Self {
        DriveSpec {
            omega_p,
            tau_p,
            theta: SQRT_PI * tau_p * omega_p,
            delta_lx,
            mode: DriveMode::Exciton,
            cavity: None,
            centers: vec![0.0],
        }
    }

    /// Laser-cavity detuning Delta_Lc = Delta_Lx - Delta_cx.
    pub fn delta_lc(&self) -> Option<f64> {
        self.cavity.map(|c| self.delta_lx - c.delta_cx)
    }

    /// Peak of the drive the exciton actually sees: Omega_p in exciton mode,
    /// the cavity-filtered effective peak in cavity mode.
    pub fn exciton_peak(&self) -> Result<f64, DriveError> {
        match self.mode {
            DriveMode::Exciton => Ok(self.omega_p),
            DriveMode::Cavity => {
                let cav = self.cavity.as_ref().ok_or(DriveError::MissingCavity)?;
                let theta_c = cav.theta_c.ok_or(DriveError::MissingCavity)?;
                let omega_cp = theta_c / (SQRT_PI * self.tau_p);
                let delta_lc = self.delta_lx - cav.delta_cx;
                effective_drive(omega_cp, cav.g, cav.kappa, delta_lc)
            }
        }
    }

    /// Detuning used inside the phonon rate integrals.
    pub fn rate_detuning(&self) -> f64 {
        match self.cavity {
            Some(c) if c.use_cavity_detuning_in_rates => c.delta_cx,
            _ => self.delta_lx,
        }
    }

    /// Instantaneous bare envelope Omega(t), summed over pulse centers.
    pub fn envelope(&self, t: f64) -> f64 {
        let peak = self.exciton_peak().unwrap_or(0.0);
        self.centers
            .iter()
            .map(|c| {
                let u = (t - c) / self.tau_p;
                // a 12-sigma Gaussian tail underflows anyway; skip the exp
                if u.abs() > 12.0 {
                    0.0
                } else {
                    peak * (-u * u).exp()
                }
            })
            .sum()
    }

    /// Center of the pulse nearest to time `t`.
    pub fn nearest_center(&self, t: f64) -> f64 {
        self.centers
            .iter()
            .copied()
            .min_by(|a, b| (t - a).abs().partial_cmp(&(t - b).abs()).unwrap())
            .unwrap_or(0.0)
    }

    pub fn with_centers(mut self, centers: Vec<f64>) -> Self {
        self.centers = centers;
        self
    }
}
