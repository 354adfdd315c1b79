//! Physical constants and unit conversions.
//!
//! All internal computation uses a single unit system: times in ps and
//! angular frequencies / rates in 1/ps. Energies only appear in config
//! files (meV, or ueV for the zero-phonon-line rates) and are converted
//! exactly once at load time.

/// Reduced Planck constant in meV*ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.08617333;

/// Convert an energy in meV to an angular frequency in 1/ps.
pub fn energy_to_angular_frequency(e_mev: f64) -> f64 {
    e_mev / HBAR_MEV_PS
}

/// Convert an angular frequency in 1/ps back to an energy in meV.
pub fn angular_frequency_to_energy(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

/// Convert an energy in ueV to an angular frequency in 1/ps.
pub fn micro_ev_to_angular_frequency(e_uev: f64) -> f64 {
    energy_to_angular_frequency(e_uev * 1e-3)
}

/// Dimensionless thermal argument prefactor: hbar / (2 kB T), in ps.
/// coth(x * omega) with x from this function reproduces coth(hbar w / 2 kB T).
pub fn thermal_time(temperature_k: f64) -> f64 {
    HBAR_MEV_PS / (2.0 * KB_MEV_PER_K * temperature_k)
}
