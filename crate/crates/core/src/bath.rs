//! Phonon bath: spectral function J(w), complex correlation function
//! phi(tau), thermal displacement factor <B>, and the tabulated kernel the
//! rate integrals run on.

use crate::config::{BathParams, QuadratureSettings};
use crate::quad::{adaptive_gl, simpson_weights, QuadratureError};
use crate::units::thermal_time;
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("spectral density undefined for negative frequency {0}")]
    NegativeFrequency(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("kernel did not decay below {tol:.1e} by tau = {tau_max} ps")]
    NoDecay { tau_max: f64, tol: f64 },
}

/// J(w) = alpha_P w^3 exp(-w^2 / 2 w_b^2), in 1/ps.
pub fn spectral_density(omega: f64, bath: &BathParams) -> Result<f64, KernelError> {
    if omega < 0.0 {
        return Err(KernelError::NegativeFrequency(omega));
    }
    let x = omega / bath.omega_b;
    Ok(bath.alpha_p * omega.powi(3) * (-0.5 * x * x).exp())
}

/// w * coth(theta * w) with the analytic w -> 0 limit 1/theta, so the
/// phi integrand has no removable singularity at the origin.
#[inline]
fn omega_coth(omega: f64, theta: f64) -> f64 {
    let x = theta * omega;
    if x < 1e-4 {
        // coth(x) = 1/x + x/3 - x^3/45 + ...
        (1.0 + x * x / 3.0) / theta
    } else {
        omega * (x.tanh()).recip()
    }
}

fn phi_integrand(omega: f64, tau: f64, bath: &BathParams, theta: f64) -> Complex64 {
    // J(w)/w^2 = alpha_P w exp(-w^2/2w_b^2); fold one w into the coth factor
    let x = omega / bath.omega_b;
    let damp = bath.alpha_p * (-0.5 * x * x).exp();
    let (s, c) = (omega * tau).sin_cos();
    Complex64::new(damp * omega_coth(omega, theta) * c, -damp * omega * s)
}

/// phi(tau) by adaptive quadrature over the damped omega integrand.
/// Panels are capped at pi/(4 tau) so the oscillatory factors stay resolved.
pub fn phi_direct(tau: f64, bath: &BathParams, quad: &QuadratureSettings) -> Result<Complex64, KernelError> {
    let theta = thermal_time(bath.temperature);
    if bath.alpha_p == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let omega_cut = quad.omega_cutoff_factor * bath.omega_b;
    let osc_cap = if tau > 0.0 {
        std::f64::consts::FRAC_PI_4 / tau
    } else {
        f64::INFINITY
    };
    let panel = (bath.omega_b / 2.0).min(osc_cap).min(omega_cut);
    let f = |w: f64| phi_integrand(w, tau, bath, theta);
    Ok(adaptive_gl(&f, 0.0, omega_cut, panel, quad.kernel_tol)?)
}

/// e^z - 1 with a short series for small |z|, keeping the hyperbolic
/// combinations below exact at the kernel tail where |phi| ~ 1e-8.
#[inline]
fn cexpm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        z * (Complex64::new(1.0, 0.0) + z * 0.5 * (Complex64::new(1.0, 0.0) + z / 3.0))
    } else {
        z.exp() - Complex64::new(1.0, 0.0)
    }
}

/// Tabulated phonon kernel. Immutable after construction; every rate
/// integral interpolates or sums over these tables instead of re-running
/// quadrature.
#[derive(Debug, Clone)]
pub struct PhononBath {
    pub params: BathParams,
    /// <B> = exp(-Re phi(0) / 2), in (0, 1].
    pub b_avg: f64,
    /// Kernel memory cutoff, ps.
    pub tau_max: f64,
    /// Table spacing, ps.
    pub dtau: f64,
    /// phi on the uniform tau grid [0, tau_max].
    pub phi: Vec<Complex64>,
    /// cosh(phi) - 1
    pub coshm1: Vec<Complex64>,
    /// sinh(phi)
    pub sinh: Vec<Complex64>,
    /// e^phi - 1
    pub expm1: Vec<Complex64>,
    /// 1 - e^{-phi}
    pub one_m_exp_neg: Vec<Complex64>,
    /// Composite Simpson weights matching the grid.
    pub weights: Vec<f64>,
}

impl PhononBath {
    pub fn tabulate(params: BathParams, quad: &QuadratureSettings) -> Result<Self, KernelError> {
        let dtau = quad.tau_grid_step;
        let tau_max = match quad.tau_memory_cutoff {
            Some(t) => t,
            None => Self::find_tau_max(&params, quad)?,
        };
        // odd point count for Simpson
        let mut n = (tau_max / dtau).ceil() as usize + 1;
        if n % 2 == 0 {
            n += 1;
        }
        n = n.max(3);
        let tau_max = (n - 1) as f64 * dtau;

        let mut phi = Vec::with_capacity(n);
        for i in 0..n {
            phi.push(phi_direct(i as f64 * dtau, &params, quad)?);
        }
        let b_avg = (-0.5 * phi[0].re).exp();

        let one = Complex64::new(1.0, 0.0);
        let mut coshm1 = Vec::with_capacity(n);
        let mut sinh = Vec::with_capacity(n);
        let mut expm1 = Vec::with_capacity(n);
        let mut one_m_exp_neg = Vec::with_capacity(n);
        for &p in &phi {
            let ep = cexpm1(p);
            let em = cexpm1(-p);
            coshm1.push((ep + em) * 0.5);
            sinh.push((ep - em) * 0.5);
            expm1.push(ep);
            one_m_exp_neg.push(-(em) * one);
        }

        Ok(PhononBath {
            params,
            b_avg,
            tau_max,
            dtau,
            phi,
            coshm1,
            sinh,
            expm1,
            one_m_exp_neg,
            weights: simpson_weights(n, dtau),
        })
    }

    /// Smallest tau (probed on a coarse grid) where the kernel magnitude has
    /// decayed below 1e-8, as required of the memory cutoff.
    fn find_tau_max(params: &BathParams, quad: &QuadratureSettings) -> Result<f64, KernelError> {
        const DECAY: f64 = 1e-9;
        const HARD_CAP: f64 = 100.0;
        if params.alpha_p == 0.0 {
            return Ok(0.0);
        }
        let mut tau = 2.0 / params.omega_b;
        while tau <= HARD_CAP {
            let here = phi_direct(tau, params, quad)?.norm();
            let next = phi_direct(tau + 0.5, params, quad)?.norm();
            if here < DECAY && next < DECAY {
                return Ok(tau);
            }
            tau += 0.5;
        }
        Err(KernelError::NoDecay { tau_max: HARD_CAP, tol: DECAY })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// <B> for these bath parameters.
    pub fn bath_displacement(&self) -> f64 {
        self.b_avg
    }

    /// Interpolated phi(tau) from the table (4-point cubic on the uniform
    /// grid); zero beyond the memory cutoff.
    pub fn phi_interp(&self, tau: f64) -> Complex64 {
        debug_assert!(tau >= 0.0);
        if tau >= self.tau_max {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.phi.len();
        let x = tau / self.dtau;
        let i = (x.floor() as usize).min(n - 2);
        if n < 4 {
            // linear fallback for degenerate tables
            let s = x - i as f64;
            return self.phi[i] * (1.0 - s) + self.phi[i + 1] * s;
        }
        let i0 = i.saturating_sub(1).min(n - 4);
        let s = x - i0 as f64;
        // Lagrange cubic through points i0..i0+3
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if j != k {
                    w *= (s - j as f64) / (k as f64 - j as f64);
                }
            }
            acc += self.phi[i0 + k] * w;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimulationConfig;
    use approx::assert_relative_eq;

    fn paper_bath() -> (BathParams, QuadratureSettings) {
        let cfg = SimulationConfig::reference(std::f64::consts::PI, 0.0);
        (cfg.bath, cfg.quadrature)
    }

    #[test]
    fn spectral_density_zero_at_origin() {
        let (bath, _) = paper_bath();
        assert_eq!(spectral_density(0.0, &bath).unwrap(), 0.0);
    }

    #[test]
    fn spectral_density_rejects_negative_frequency() {
        let (bath, _) = paper_bath();
        assert!(spectral_density(-1.0, &bath).is_err());
    }

    #[test]
    fn spectral_density_peaks_at_sqrt3_omega_b() {
        let (bath, _) = paper_bath();
        let expected = 3f64.sqrt() * bath.omega_b;
        let mut best = (0.0, 0.0);
        let mut w = 0.0;
        while w < 8.0 * bath.omega_b {
            let j = spectral_density(w, &bath).unwrap();
            if j > best.1 {
                best = (w, j);
            }
            w += 1e-4;
        }
        assert_relative_eq!(best.0, expected, max_relative = 1e-3);
    }

    #[test]
    fn spectral_density_closed_form_at_omega_b() {
        let bath = BathParams { alpha_p: 0.03, omega_b: 1.5193, temperature: 4.2 };
        let got = spectral_density(bath.omega_b, &bath).unwrap();
        let expected = 0.03 * bath.omega_b.powi(3) * (-0.5f64).exp();
        assert_relative_eq!(got, expected, max_relative = 1e-13);
    }

    #[test]
    fn phi_zero_has_no_imaginary_part() {
        let (bath, quad) = paper_bath();
        let p0 = phi_direct(0.0, &bath, &quad).unwrap();
        assert_eq!(p0.im, 0.0);
        assert!(p0.re > 0.0);
    }

    #[test]
    fn kernel_decays_below_tolerance_at_tau_max() {
        let (bath, quad) = paper_bath();
        let tab = PhononBath::tabulate(bath, &quad).unwrap();
        assert!(tab.phi.last().unwrap().norm() < 1e-8);
    }

    #[test]
    fn displacement_factor_limits() {
        let (bath, quad) = paper_bath();
        let tab = PhononBath::tabulate(bath, &quad).unwrap();
        assert!(tab.b_avg > 0.0 && tab.b_avg < 1.0);

        let no_coupling = BathParams { alpha_p: 0.0, ..bath };
        let tab0 = PhononBath::tabulate(no_coupling, &quad).unwrap();
        assert_eq!(tab0.b_avg, 1.0);

        let hot = BathParams { temperature: 10.0, ..bath };
        let tab_hot = PhononBath::tabulate(hot, &quad).unwrap();
        assert!(tab_hot.b_avg < tab.b_avg);
    }

    #[test]
    fn table_endpoint_matches_direct_value() {
        let (bath, quad) = paper_bath();
        let tab = PhononBath::tabulate(bath, &quad).unwrap();
        assert_eq!(tab.phi[0], phi_direct(0.0, &bath, &quad).unwrap());
    }

    #[test]
    fn interpolation_matches_direct_evaluation() {
        let (bath, quad) = paper_bath();
        let tab = PhononBath::tabulate(bath, &quad).unwrap();
        // deterministic pseudo-random off-grid points
        let mut state: u64 = 0x243F6A8885A308D3;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let tau = u * tab.tau_max * 0.999;
            let diff = (tab.phi_interp(tau) - phi_direct(tau, &bath, &quad).unwrap()).norm();
            worst = worst.max(diff);
        }
        assert!(worst < 1e-7, "max interpolation error {worst:.3e}");
    }

    #[test]
    fn green_function_identity() {
        // G_g + G_u = <B>^2 (e^phi - 1) pointwise
        let (bath, quad) = paper_bath();
        let tab = PhononBath::tabulate(bath, &quad).unwrap();
        let b2 = tab.b_avg * tab.b_avg;
        for i in 0..tab.len() {
            let lhs = (tab.coshm1[i] + tab.sinh[i]) * b2;
            let rhs = tab.expm1[i] * b2;
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_envelope_is_maximal_at_origin() {
        let (bath, quad) = paper_bath();
        let tab = PhononBath::tabulate(bath, &quad).unwrap();
        let cap = (tab.phi[0].re).exp() - 1.0;
        for e in &tab.expm1 {
            assert!(e.norm() <= cap + 1e-12);
        }
    }

    #[test]
    fn quadrature_converges_under_tolerance_halving() {
        let (bath, mut quad) = paper_bath();
        let coarse = phi_direct(0.0, &bath, &quad).unwrap();
        quad.kernel_tol *= 0.5;
        let fine = phi_direct(0.0, &bath, &quad).unwrap();
        assert!((coarse - fine).norm() < 1e-10 * coarse.norm().max(1.0));
    }
}
