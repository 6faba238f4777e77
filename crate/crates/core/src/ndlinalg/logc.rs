use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::C64;

/// Complex number stored as `exp(log_mag) * exp(i phase)`; zero has `log_mag = -inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: Self = Self { log_mag: f64::NEG_INFINITY, phase: 0.0 };
    pub const ONE: Self = Self { log_mag: 0.0, phase: 0.0 };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { log_mag, phase: wrap(phase) }
        }
    }
    pub fn from_complex(z: C64) -> Self {
        if z.norm() == 0.0 {
            Self::ZERO
        } else {
            Self { log_mag: z.norm().ln(), phase: z.arg() }
        }
    }
    pub fn from_real(x: f64) -> Self {
        Self::from_complex(C64::new(x, 0.0))
    }
    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }
    /// May overflow to infinity or underflow to zero.
    pub fn to_complex(self) -> C64 {
        if self.is_zero() {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(self.log_mag.exp(), self.phase)
        }
    }
    pub fn conj(self) -> Self {
        Self::new(self.log_mag, -self.phase)
    }
    pub fn scale_exp(self, s: f64) -> Self {
        Self::new(self.log_mag + s, self.phase)
    }
    pub fn log10_mag(self) -> f64 {
        self.log_mag / std::f64::consts::LN_10
    }
    /// Sum of many terms with a single shared rescaling.
    pub fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let terms: Vec<Self> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(top) = terms.iter().map(|t| t.log_mag).reduce(f64::max) else {
            return Self::ZERO;
        };
        let acc: C64 = terms.iter().map(|t| C64::from_polar((t.log_mag - top).exp(), t.phase)).sum();
        Self::from_complex(acc).scale_exp(top)
    }
}

fn wrap(phase: f64) -> f64 {
    if (-PI..=PI).contains(&phase) {
        phase
    } else {
        let p = phase.rem_euclid(2.0 * PI);
        if p > PI {
            p - 2.0 * PI
        } else {
            p
        }
    }
}

impl Mul for LogComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            Self::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
        }
    }
}

impl Add for LogComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::sum([self, rhs])
    }
}

impl Neg for LogComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.log_mag, self.phase + PI)
    }
}

impl Sub for LogComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_arithmetic() {
        let a = C64::new(1.5, -2.0);
        let b = C64::new(-0.25, 0.75);
        let la = LogComplex::from_complex(a);
        let lb = LogComplex::from_complex(b);
        assert!(((la * lb).to_complex() - a * b).norm() < 1e-14);
        assert!(((la + lb).to_complex() - (a + b)).norm() < 1e-14);
        assert!(((la - lb).to_complex() - (a - b)).norm() < 1e-14);
        assert!((la + LogComplex::ZERO).to_complex() == la.to_complex());
    }

    #[test]
    fn huge_magnitudes_cancel() {
        let big = LogComplex::new(800.0, 0.3);
        let s = big + big;
        assert!((s.log_mag - 800.0 - 2f64.ln()).abs() < 1e-12 && (s.phase - 0.3).abs() < 1e-15);
        assert!((big * big.conj()).phase == 0.0 && (big - big).log_mag < 800.0 - 30.0);
    }
}
