//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) for 2x2
//! complex operator states. Steps are clipped to land exactly on requested
//! output times, so trajectory samples carry no interpolation error.

use crate::twolevel::Op2;

#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Dopri5 {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Dopri5 { rel_tol, abs_tol, max_step: f64::INFINITY }
    }

    /// Integrate dy/dt = rhs(t, y) from t0 to t_end, invoking `observe` at
    /// every time in `outputs` (must be ascending, within [t0, t_end]).
    pub fn integrate<F, O>(
        &self,
        mut rhs: F,
        t0: f64,
        t_end: f64,
        y0: Op2,
        outputs: &[f64],
        mut observe: O,
    ) -> Result<Op2, OdeError>
    where
        F: FnMut(f64, &Op2) -> Op2,
        O: FnMut(f64, &Op2),
    {
        let mut t = t0;
        let mut y = y0;
        let mut out_idx = 0;
        while out_idx < outputs.len() && outputs[out_idx] <= t0 + 1e-12 {
            observe(outputs[out_idx], &y);
            out_idx += 1;
        }

        let mut k1 = rhs(t, &y);
        let mut h = self.initial_step(t, t_end);
        let min_step = 1e-12 * (t_end - t0).abs().max(1.0);

        while t < t_end - 1e-12 {
            // clip to the next output time and the interval end
            let mut target = t_end;
            if out_idx < outputs.len() {
                target = target.min(outputs[out_idx]);
            }
            h = h.min(self.max_step).min(target - t).max(min_step);

            let mut k = [Op2::zero(); 7];
            k[0] = k1;
            for stage in 0..6 {
                let mut yi = y;
                for j in 0..=stage {
                    if A[stage][j] != 0.0 {
                        yi += k[j].scale_re(h * A[stage][j]);
                    }
                }
                k[stage + 1] = rhs(t + C[stage] * h, &yi);
            }
            // 5th-order solution is the 6th stage argument (FSAL)
            let mut y_new = y;
            for j in 0..6 {
                if A[5][j] != 0.0 {
                    y_new += k[j].scale_re(h * A[5][j]);
                }
            }

            let mut err_op = Op2::zero();
            for j in 0..7 {
                if E[j] != 0.0 {
                    err_op += k[j].scale_re(h * E[j]);
                }
            }
            let mut err = 0.0f64;
            for i in 0..4 {
                let scale = self.abs_tol + self.rel_tol * y.m[i].norm().max(y_new.m[i].norm());
                err = err.max(err_op.m[i].norm() / scale);
            }

            if err <= 1.0 {
                t += h;
                y = y_new;
                k1 = k[6]; // FSAL
                while out_idx < outputs.len() && outputs[out_idx] <= t + 1e-12 {
                    observe(outputs[out_idx], &y);
                    out_idx += 1;
                }
            }

            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h *= factor;
            if h < min_step {
                if err <= 1.0 {
                    h = min_step;
                } else {
                    return Err(OdeError::StepUnderflow { t });
                }
            }
        }
        while out_idx < outputs.len() {
            observe(outputs[out_idx], &y);
            out_idx += 1;
        }
        Ok(y)
    }

    fn initial_step(&self, t0: f64, t_end: f64) -> f64 {
        ((t_end - t0) * 1e-4).max(1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn exponential_decay_to_tolerance() {
        let solver = Dopri5::new(1e-10, 1e-12);
        let rhs = |_t: f64, y: &Op2| y.scale_re(-0.5);
        let y0 = Op2::identity();
        let yf = solver.integrate(rhs, 0.0, 10.0, y0, &[], |_, _| {}).unwrap();
        assert_relative_eq!(yf.gg().re, (-5.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn oscillator_hits_output_times_exactly() {
        let solver = Dopri5::new(1e-10, 1e-12);
        let rhs = |_t: f64, y: &Op2| y.scale(Complex64::new(0.0, 1.0));
        let y0 = Op2::identity();
        let outputs = [1.0, 2.5, 7.0];
        let mut seen = Vec::new();
        solver
            .integrate(rhs, 0.0, 10.0, y0, &outputs, |t, y| seen.push((t, y.gg())))
            .unwrap();
        assert_eq!(seen.len(), 3);
        for (t, v) in seen {
            assert_relative_eq!(v.re, t.cos(), max_relative = 1e-8);
            assert_relative_eq!(v.im, t.sin(), max_relative = 1e-8);
        }
    }
}
