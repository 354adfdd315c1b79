//! Validated simulation configuration.
//!
//! Config files are plain-text key/value documents with flat sections
//! ([bath], [system], [drive], [cavity], [integrator], [quadrature]).
//! Energies are given in meV (ZPL rates in ueV), times in ps, temperature
//! in K. Conversion to the internal {ps, 1/ps} unit system happens exactly
//! once, here.

use crate::drive::{CavityParams, DriveMode, DriveSpec};
use crate::units::{energy_to_angular_frequency, micro_ev_to_angular_frequency};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing required key {0}")]
    Missing(&'static str),
    #[error("invalid value for {field}: {message}")]
    Validation { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field, message: message.into() }
}

// ---------------------------------------------------------------------------
// Raw file schema (file units)
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    bath: Option<RawBath>,
    system: Option<RawSystem>,
    drive: Option<RawDrive>,
    cavity: Option<RawCavity>,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    quadrature: RawQuadrature,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    /// Electron-phonon coupling strength, ps^2.
    alpha_p: Option<f64>,
    /// Phonon cutoff frequency, meV.
    omega_b: Option<f64>,
    /// Bath temperature, K.
    temperature: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    /// Radiative decay, ueV.
    gamma: Option<f64>,
    /// Pure dephasing, ueV.
    gamma_prime: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    /// Pulse halfwidth, ps.
    tau_p: Option<f64>,
    /// Peak Rabi frequency, meV. Exclusive with theta_pi.
    omega_p: Option<f64>,
    /// Pulse area in units of pi. Exclusive with omega_p.
    theta_pi: Option<f64>,
    /// Laser-exciton detuning, meV.
    delta_lx: Option<f64>,
    /// "exciton" (default) or "cavity".
    mode: Option<DriveMode>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    /// Cavity-dot coupling, ueV.
    g: Option<f64>,
    /// Cavity decay rate, ueV.
    kappa: Option<f64>,
    /// Cavity-exciton detuning, meV.
    delta_cx: Option<f64>,
    /// Cavity pulse area in units of pi.
    theta_c_pi: Option<f64>,
    /// Purcell factor F_P.
    purcell: Option<f64>,
    #[serde(default)]
    use_cavity_detuning_in_rates: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawIntegrator {
    rel_tol: f64,
    abs_tol: f64,
    /// ps; omit for -5 tau_p.
    t_start: Option<f64>,
    /// ps; omit for +5 tau_p.
    t_end: Option<f64>,
}

impl Default for RawIntegrator {
    fn default() -> Self {
        RawIntegrator { rel_tol: 1e-8, abs_tol: 1e-10, t_start: None, t_end: None }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawQuadrature {
    /// Upper cutoff of the omega integral, in units of omega_b.
    omega_cutoff_factor: f64,
    /// Memory cutoff tau_max, ps; 0 selects it adaptively.
    tau_memory_cutoff: f64,
    /// Kernel table spacing, ps.
    tau_grid_step: f64,
    /// Target for the adaptive omega quadrature and the tau_max search.
    kernel_tol: f64,
}

impl Default for RawQuadrature {
    fn default() -> Self {
        RawQuadrature {
            omega_cutoff_factor: 8.0,
            tau_memory_cutoff: 0.0,
            tau_grid_step: 0.01,
            kernel_tol: 1e-10,
        }
    }
}

// ---------------------------------------------------------------------------
// Validated config (internal units)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// ps^2
    pub alpha_p: f64,
    /// 1/ps
    pub omega_b: f64,
    /// K
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Radiative decay, 1/ps.
    pub gamma: f64,
    /// Pure dephasing, 1/ps.
    pub gamma_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub omega_cutoff_factor: f64,
    /// None selects tau_max adaptively from the kernel decay.
    pub tau_memory_cutoff: Option<f64>,
    pub tau_grid_step: f64,
    pub kernel_tol: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            omega_cutoff_factor: 8.0,
            tau_memory_cutoff: None,
            tau_grid_step: 0.01,
            kernel_tol: 1e-10,
        }
    }
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { rel_tol: 1e-8, abs_tol: 1e-10, t_start: None, t_end: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub bath: BathParams,
    pub system: SystemParams,
    pub drive: DriveSpec,
    pub integrator: IntegratorSettings,
    pub quadrature: QuadratureSettings,
}

impl SimulationConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let rb = raw.bath.ok_or(ConfigError::Missing("bath"))?;
        let rs = raw.system.ok_or(ConfigError::Missing("system"))?;
        let rd = raw.drive.ok_or(ConfigError::Missing("drive"))?;

        let alpha_p = rb.alpha_p.ok_or(ConfigError::Missing("bath.alpha_p"))?;
        let omega_b_mev = rb.omega_b.ok_or(ConfigError::Missing("bath.omega_b"))?;
        let temperature = rb.temperature.ok_or(ConfigError::Missing("bath.temperature"))?;
        if alpha_p < 0.0 {
            return Err(invalid("bath.alpha_p", format!("must be >= 0, got {alpha_p}")));
        }
        if omega_b_mev <= 0.0 {
            return Err(invalid("bath.omega_b", format!("must be > 0, got {omega_b_mev}")));
        }
        if temperature <= 0.0 {
            return Err(invalid("bath.temperature", format!("must be > 0, got {temperature}")));
        }

        let gamma_uev = rs.gamma.ok_or(ConfigError::Missing("system.gamma"))?;
        let gamma_prime_uev = rs.gamma_prime.ok_or(ConfigError::Missing("system.gamma_prime"))?;
        if gamma_uev < 0.0 {
            return Err(invalid("system.gamma", format!("must be >= 0, got {gamma_uev}")));
        }
        if gamma_prime_uev < 0.0 {
            return Err(invalid("system.gamma_prime", format!("must be >= 0, got {gamma_prime_uev}")));
        }

        let tau_p = rd.tau_p.ok_or(ConfigError::Missing("drive.tau_p"))?;
        if tau_p <= 0.0 {
            return Err(invalid("drive.tau_p", format!("must be > 0, got {tau_p}")));
        }
        let delta_lx_mev = rd.delta_lx.ok_or(ConfigError::Missing("drive.delta_lx"))?;
        let delta_lx = energy_to_angular_frequency(delta_lx_mev);
        let mode = rd.mode.unwrap_or(DriveMode::Exciton);

        let mut drive = match (rd.omega_p, rd.theta_pi) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "drive",
                    "omega_p and theta_pi are mutually exclusive; give one, the other is derived",
                ))
            }
            (Some(op_mev), None) => {
                DriveSpec::from_peak(energy_to_angular_frequency(op_mev), tau_p, delta_lx)
            }
            (None, Some(theta_pi)) => DriveSpec::from_area(theta_pi * PI, tau_p, delta_lx),
            (None, None) => {
                if mode == DriveMode::Cavity {
                    // cavity-driven: exciton-side pulse spec not required
                    DriveSpec::from_area(0.0, tau_p, delta_lx)
                } else {
                    return Err(ConfigError::Missing("drive.omega_p or drive.theta_pi"));
                }
            }
        };
        drive.mode = mode;

        if let Some(rc) = raw.cavity {
            let g = rc.g.ok_or(ConfigError::Missing("cavity.g"))?;
            let kappa = rc.kappa.ok_or(ConfigError::Missing("cavity.kappa"))?;
            let delta_cx = rc.delta_cx.ok_or(ConfigError::Missing("cavity.delta_cx"))?;
            if kappa < 0.0 {
                return Err(invalid("cavity.kappa", format!("must be >= 0, got {kappa}")));
            }
            if let Some(fp) = rc.purcell {
                if fp < 0.0 {
                    return Err(invalid("cavity.purcell", format!("must be >= 0, got {fp}")));
                }
            }
            drive.cavity = Some(CavityParams {
                g: micro_ev_to_angular_frequency(g),
                kappa: micro_ev_to_angular_frequency(kappa),
                delta_cx: energy_to_angular_frequency(delta_cx),
                theta_c: rc.theta_c_pi.map(|t| t * PI),
                purcell: rc.purcell,
                use_cavity_detuning_in_rates: rc.use_cavity_detuning_in_rates,
            });
        }
        if mode == DriveMode::Cavity {
            match &drive.cavity {
                None => return Err(ConfigError::Missing("cavity")),
                Some(c) if c.theta_c.is_none() => {
                    return Err(ConfigError::Missing("cavity.theta_c_pi"))
                }
                _ => {}
            }
        }

        let ri = raw.integrator;
        if ri.rel_tol <= 0.0 || ri.abs_tol <= 0.0 {
            return Err(invalid("integrator", "tolerances must be > 0"));
        }
        let rq = raw.quadrature;
        if rq.tau_grid_step <= 0.0 {
            return Err(invalid("quadrature.tau_grid_step", "must be > 0"));
        }
        if rq.omega_cutoff_factor < 2.0 {
            return Err(invalid("quadrature.omega_cutoff_factor", "must be >= 2"));
        }
        if rq.tau_memory_cutoff < 0.0 {
            return Err(invalid("quadrature.tau_memory_cutoff", "must be >= 0"));
        }

        Ok(SimulationConfig {
            bath: BathParams {
                alpha_p,
                omega_b: energy_to_angular_frequency(omega_b_mev),
                temperature,
            },
            system: SystemParams {
                gamma: micro_ev_to_angular_frequency(gamma_uev),
                gamma_prime: micro_ev_to_angular_frequency(gamma_prime_uev),
            },
            drive,
            integrator: IntegratorSettings {
                rel_tol: ri.rel_tol,
                abs_tol: ri.abs_tol,
                t_start: ri.t_start,
                t_end: ri.t_end,
            },
            quadrature: QuadratureSettings {
                omega_cutoff_factor: rq.omega_cutoff_factor,
                tau_memory_cutoff: if rq.tau_memory_cutoff > 0.0 {
                    Some(rq.tau_memory_cutoff)
                } else {
                    None
                },
                tau_grid_step: rq.tau_grid_step,
                kernel_tol: rq.kernel_tol,
            },
        })
    }

    /// Serialize back to the file format (file units).
    pub fn to_document(&self) -> String {
        use crate::units::angular_frequency_to_energy as to_mev;
        let raw = RawConfig {
            bath: Some(RawBath {
                alpha_p: Some(self.bath.alpha_p),
                omega_b: Some(to_mev(self.bath.omega_b)),
                temperature: Some(self.bath.temperature),
            }),
            system: Some(RawSystem {
                gamma: Some(to_mev(self.system.gamma) * 1e3),
                gamma_prime: Some(to_mev(self.system.gamma_prime) * 1e3),
            }),
            drive: Some(RawDrive {
                tau_p: Some(self.drive.tau_p),
                omega_p: match self.drive.mode {
                    DriveMode::Exciton => Some(to_mev(self.drive.omega_p)),
                    DriveMode::Cavity => None,
                },
                theta_pi: None,
                delta_lx: Some(to_mev(self.drive.delta_lx)),
                mode: Some(self.drive.mode),
            }),
            cavity: self.drive.cavity.map(|c| RawCavity {
                g: Some(to_mev(c.g) * 1e3),
                kappa: Some(to_mev(c.kappa) * 1e3),
                delta_cx: Some(to_mev(c.delta_cx)),
                theta_c_pi: c.theta_c.map(|t| t / PI),
                purcell: c.purcell,
                use_cavity_detuning_in_rates: c.use_cavity_detuning_in_rates,
            }),
            integrator: RawIntegrator {
                rel_tol: self.integrator.rel_tol,
                abs_tol: self.integrator.abs_tol,
                t_start: self.integrator.t_start,
                t_end: self.integrator.t_end,
            },
            quadrature: RawQuadrature {
                omega_cutoff_factor: self.quadrature.omega_cutoff_factor,
                tau_memory_cutoff: self.quadrature.tau_memory_cutoff.unwrap_or(0.0),
                tau_grid_step: self.quadrature.tau_grid_step,
                kernel_tol: self.quadrature.kernel_tol,
            },
        };
        toml::to_string_pretty(&raw).expect("config serialization cannot fail")
    }

    /// Reference parameter set used throughout the population studies:
    /// InGaAs/GaAs dot, 20.2 ps pulse fullwidth, T = 4.2 K.
    pub fn reference(theta: f64, delta_lx_mev: f64) -> Self {
        SimulationConfig {
            bath: BathParams {
                alpha_p: 0.03,
                omega_b: energy_to_angular_frequency(1.0),
                temperature: 4.2,
            },
            system: SystemParams {
                gamma: micro_ev_to_angular_frequency(2.0),
                gamma_prime: micro_ev_to_angular_frequency(2.0),
            },
            drive: DriveSpec::from_area(theta, 10.1, energy_to_angular_frequency(delta_lx_mev)),
            integrator: IntegratorSettings::default(),
            quadrature: QuadratureSettings::default(),
        }
    }

    /// Integration window [t_start, t_end] for a single-pulse run, covering
    /// the Gaussian tails and the population readout point.
    pub fn window(&self) -> (f64, f64) {
        let first = self.drive.centers.iter().cloned().fold(f64::INFINITY, f64::min);
        let last = self.drive.centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let start = self.integrator.t_start.unwrap_or(first - 5.0 * self.drive.tau_p);
        let end = self.integrator.t_end.unwrap_or(last + 5.0 * self.drive.tau_p);
        (start, end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PAPER_DOC: &str = r#"
[bath]
alpha_p = 0.03
omega_b = 1.0
temperature = 4.2

[system]
gamma = 2.0
gamma_prime = 2.0

[drive]
tau_p = 10.1
theta_pi = 16.0
delta_lx = 0.83
"#;

    #[test]
    fn loads_reference_document() {
        let cfg = SimulationConfig::from_str(PAPER_DOC).unwrap();
        assert_relative_eq!(cfg.bath.alpha_p, 0.03);
        assert_relative_eq!(cfg.bath.omega_b, 1.0 / crate::units::HBAR_MEV_PS);
        assert_relative_eq!(cfg.bath.temperature, 4.2);
        assert_relative_eq!(cfg.drive.theta, 16.0 * PI);
        // gamma: 2 ueV in 1/ps
        assert_relative_eq!(cfg.system.gamma, 0.002 / crate::units::HBAR_MEV_PS);
    }

    #[test]
    fn missing_temperature_is_an_error() {
        let doc = PAPER_DOC.replace("temperature = 4.2", "");
        let err = SimulationConfig::from_str(&doc).unwrap_err();
        assert!(err.to_string().contains("temperature"), "{err}");
    }

    #[test]
    fn negative_gamma_is_an_error() {
        let doc = PAPER_DOC.replace("gamma = 2.0", "gamma = -1.0");
        let err = SimulationConfig::from_str(&doc).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn omega_p_and_theta_are_exclusive() {
        let doc = PAPER_DOC.replace("theta_pi = 16.0", "theta_pi = 16.0\nomega_p = 1.85");
        assert!(SimulationConfig::from_str(&doc).is_err());
    }

    #[test]
    fn unknown_key_names_the_offender() {
        let doc = PAPER_DOC.replace("alpha_p", "alpha_q");
        let err = SimulationConfig::from_str(&doc).unwrap_err();
        assert!(err.to_string().contains("alpha_q"), "{err}");
    }

    #[test]
    fn round_trip_preserves_fields() {
        let cfg = SimulationConfig::from_str(PAPER_DOC).unwrap();
        let doc = cfg.to_document();
        let cfg2 = SimulationConfig::from_str(&doc).unwrap();
        assert_relative_eq!(cfg.bath.omega_b, cfg2.bath.omega_b, max_relative = 1e-12);
        assert_relative_eq!(cfg.drive.omega_p, cfg2.drive.omega_p, max_relative = 1e-12);
        assert_relative_eq!(cfg.drive.delta_lx, cfg2.drive.delta_lx, max_relative = 1e-12);
        assert_relative_eq!(cfg.system.gamma, cfg2.system.gamma, max_relative = 1e-12);
        assert_eq!(cfg.integrator, cfg2.integrator);
        assert_eq!(cfg.quadrature, cfg2.quadrature);
    }

    #[test]
    fn quality_factor_from_kappa() {
        // kappa = 138 ueV with omega_c = 1.24 eV corresponds to Q ~ 9000
        let q: f64 = 1.24e6 / 138.0;
        assert!((q - 9000.0).abs() / 9000.0 < 0.01);
    }
}
