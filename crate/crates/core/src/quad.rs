//! Quadrature building blocks used by the phonon kernel and rate integrals.

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial (standard gauleg construction).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Initial guess from the asymptotic root formula.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and its derivative.
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre integration of a complex-valued integrand over
/// [a, b], with panel width capped at `max_panel`.
pub fn composite_gl(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    max_panel: f64,
    nodes: &[f64],
    weights: &[f64],
) -> Complex64 {
    let span = b - a;
    if span <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let n_panels = ((span / max_panel).ceil() as usize).max(1);
    let h = span / n_panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..n_panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            acc += f(mid + half * x) * *w;
        }
        total += acc * half;
    }
    total
}

/// Error raised when panel refinement fails to converge within budget.
#[derive(Debug, Clone, thiserror::Error)]
#[error("quadrature did not converge: achieved error estimate {achieved:.3e} > tolerance {tolerance:.3e}")]
pub struct QuadratureError {
    pub achieved: f64,
    pub tolerance: f64,
}

/// Adaptive composite Gauss-Legendre: halves the panel width until two
/// successive refinements agree to `tol` (relative to max(1, |I|)).
pub fn adaptive_gl(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    initial_panel: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let (nodes, weights) = gauss_legendre(16);
    let mut panel = initial_panel;
    let mut prev = composite_gl(f, a, b, panel, &nodes, &weights);
    for _ in 0..12 {
        panel *= 0.5;
        let next = composite_gl(f, a, b, panel, &nodes, &weights);
        let err = (next - prev).norm();
        if err <= tol * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    let final_panel = panel * 0.5;
    let next = composite_gl(f, a, b, final_panel, &nodes, &weights);
    let achieved = (next - prev).norm();
    Err(QuadratureError { achieved, tolerance: tol })
}

/// Composite Simpson weights for a uniform grid with an odd number of points.
/// The rate integrals evaluate tabulated integrands with these weights so the
/// analytical-rate path and the direct master-equation path share the exact
/// same discretization.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "simpson grid needs an odd point count");
    let mut w = vec![0.0; n];
    for i in 0..n {
        w[i] = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
    }
    let scale = h / 3.0;
    for wi in &mut w {
        *wi *= scale;
    }
    w
}

/// Trapezoid rule on a possibly non-uniform grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    acc
}
