//! Polaron master-equation simulation of a pulse-driven quantum-dot exciton
//! coupled to an acoustic-phonon bath: phonon kernel, scattering rates,
//! population dynamics, and pulsed single-photon source figures of merit.

pub mod bath;
pub mod config;
pub mod drive;
pub mod dynamics;
pub mod ode;
pub mod photons;
pub mod quad;
pub mod sweep;
pub mod rates;
pub mod twolevel;
pub mod units;

pub use bath::PhononBath;
pub use config::{ConfigError, SimulationConfig};
pub use drive::{DriveMode, DriveSpec};
pub use dynamics::{Engine, EngineOptions, SolverKind, Trajectory};
pub use rates::{averaged_rates, rates_at, RateModel, RateSet};
pub use twolevel::{DensityMatrix, Op2};
