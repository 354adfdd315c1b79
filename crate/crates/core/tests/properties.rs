//! Property-based checks: configuration round-tripping and the detuning
//! symmetries of the phonon scattering rates.

use polaron_core::rates::{full_rates, DriveSnapshot};
use polaron_core::units::energy_to_angular_frequency;
use polaron_core::{PhononBath, SimulationConfig};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn bath() -> &'static PhononBath {
    static BATH: OnceLock<PhononBath> = OnceLock::new();
    BATH.get_or_init(|| {
        let cfg = SimulationConfig::reference(PI, 0.0);
        PhononBath::tabulate(cfg.bath, &cfg.quadrature).unwrap()
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_round_trips_through_document(
        theta_pi in 0.1f64..40.0,
        delta_mev in -2.0f64..2.0,
    ) {
        let cfg = SimulationConfig::reference(theta_pi * PI, delta_mev);
        let back = SimulationConfig::from_str(&cfg.to_document()).unwrap();
        prop_assert!(close(back.drive.theta, cfg.drive.theta));
        prop_assert!(close(back.drive.omega_p, cfg.drive.omega_p));
        prop_assert!(close(back.drive.delta_lx, cfg.drive.delta_lx));
        prop_assert!(close(back.bath.alpha_p, cfg.bath.alpha_p));
        prop_assert!(close(back.bath.omega_b, cfg.bath.omega_b));
        prop_assert!(close(back.bath.temperature, cfg.bath.temperature));
        prop_assert!(close(back.system.gamma, cfg.system.gamma));
        prop_assert!(close(back.system.gamma_prime, cfg.system.gamma_prime));
        prop_assert_eq!(back.drive.tau_p, cfg.drive.tau_p);
    }

    #[test]
    fn rate_symmetries_under_detuning_sign_flip(
        omega in 0.05f64..3.0,
        delta_mev in 0.01f64..2.0,
    ) {
        let b = bath();
        let delta = energy_to_angular_frequency(delta_mev);
        let plus = full_rates(&DriveSnapshot::new(omega, delta, b.b_avg), b);
        let minus = full_rates(&DriveSnapshot::new(omega, -delta, b.b_avg), b);

        // Delta -> -Delta swaps the excitation and decay channels ...
        prop_assert!(close(plus.sig_plus, minus.sig_minus));
        prop_assert!(close(plus.sig_minus, minus.sig_plus));
        // ... leaves the even rates unchanged ...
        prop_assert!(close(plus.cd, minus.cd));
        prop_assert!(close(plus.u.re, minus.u.re));
        prop_assert!(close(plus.u.im, minus.u.im));
        // ... and flips the odd ones.
        prop_assert!(close(plus.sd, -minus.sd));
        prop_assert!(close(plus.shift, -minus.shift));
        prop_assert!(close(plus.g.re, -minus.g.re));
        prop_assert!(close(plus.g.im, -minus.g.im));
    }
}
