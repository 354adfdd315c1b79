//! Minimal 2x2 complex operator algebra for the exciton two-level system.
//!
//! Basis ordering is {|g>, |e>}; component layout is row-major
//! [gg, ge, eg, ee].

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// General 2x2 complex operator on the exciton Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Op2 {
    pub m: [Complex64; 4],
}

impl Op2 {
    pub const fn new(gg: Complex64, ge: Complex64, eg: Complex64, ee: Complex64) -> Self {
        Op2 { m: [gg, ge, eg, ee] }
    }

    pub fn zero() -> Self {
        Op2 { m: [Complex64::new(0.0, 0.0); 4] }
    }

    pub fn identity() -> Self {
        Op2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// sigma^+ = |e><g|
    pub fn sigma_plus() -> Self {
        Op2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    /// sigma^- = |g><e|
    pub fn sigma_minus() -> Self {
        Op2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    #[inline]
    pub fn gg(&self) -> Complex64 {
        self.m[0]
    }
    #[inline]
    pub fn ge(&self) -> Complex64 {
        self.m[1]
    }
    #[inline]
    pub fn eg(&self) -> Complex64 {
        self.m[2]
    }
    #[inline]
    pub fn ee(&self) -> Complex64 {
        self.m[3]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0] + self.m[3]
    }

    pub fn adjoint(&self) -> Self {
        Op2::new(self.m[0].conj(), self.m[2].conj(), self.m[1].conj(), self.m[3].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Op2 { m: [self.m[0] * c, self.m[1] * c, self.m[2] * c, self.m[3] * c] }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = *self - self.adjoint();
        d.m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Op2 {
    type Output = Op2;
    fn mul(self, rhs: Op2) -> Op2 {
        let a = &self.m;
        let b = &rhs.m;
        Op2::new(
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        )
    }
}

impl Add for Op2 {
    type Output = Op2;
    fn add(self, rhs: Op2) -> Op2 {
        Op2 {
            m: [
                self.m[0] + rhs.m[0],
                self.m[1] + rhs.m[1],
                self.m[2] + rhs.m[2],
                self.m[3] + rhs.m[3],
            ],
        }
    }
}

impl AddAssign for Op2 {
    fn add_assign(&mut self, rhs: Op2) {
        for (a, b) in self.m.iter_mut().zip(rhs.m.iter()) {
            *a += b;
        }
    }
}

impl Sub for Op2 {
    type Output = Op2;
    fn sub(self, rhs: Op2) -> Op2 {
        Op2 {
            m: [
                self.m[0] - rhs.m[0],
                self.m[1] - rhs.m[1],
                self.m[2] - rhs.m[2],
                self.m[3] - rhs.m[3],
            ],
        }
    }
}

impl Neg for Op2 {
    type Output = Op2;
    fn neg(self) -> Op2 {
        self.scale_re(-1.0)
    }
}

/// Commutator [a, b].
pub fn commutator(a: Op2, b: Op2) -> Op2 {
    a * b - b * a
}

/// Exciton density matrix: Hermitian, trace-one Op2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Op2);

impl DensityMatrix {
    /// QD in its ground state.
    pub fn ground() -> Self {
        DensityMatrix(Op2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
    }

    pub fn excited() -> Self {
        DensityMatrix(Op2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ))
    }

    /// Excited-state population N_x = <sigma^+ sigma^->.
    pub fn population(&self) -> f64 {
        self.0.ee().re
    }

    pub fn trace_defect(&self) -> f64 {
        (self.0.trace() - Complex64::new(1.0, 0.0)).norm()
    }
}

/// exp(-i H tau) for Hermitian H = [[h_gg, h_ge], [h_ge*, h_ee]] (real
/// diagonal), via the closed-form 2x2 unitary.
pub fn exp_minus_i_h_tau(h_gg: f64, h_ge: Complex64, h_ee: f64, tau: f64) -> Op2 {
    let a = 0.5 * (h_gg + h_ee);
    let dz = 0.5 * (h_gg - h_ee);
    let b = (dz * dz + h_ge.norm_sqr()).sqrt();
    let (s, c) = if b * tau == 0.0 {
        (0.0, 1.0)
    } else {
        let (s, c) = (b * tau).sin_cos();
        (s, c)
    };
    // sin(b tau)/b with the b -> 0 limit
    let sb = if b > 1e-300 { s / b } else { tau };
    let phase = Complex64::from_polar(1.0, -a * tau);
    // cos(b tau) I - i sin(b tau)/b (H - a I)
    let cc = Complex64::new(c, 0.0);
    let isb = I * sb;
    Op2::new(
        phase * (cc - isb * dz),
        phase * (-isb * h_ge),
        phase * (-isb * h_ge.conj()),
        phase * (cc + isb * dz),
    )
}
