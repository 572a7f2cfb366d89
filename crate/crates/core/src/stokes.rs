//! Stokes vectors on the Poincaré sphere.
//!
//! Axis numbering follows the usual quantum-optics convention for the
//! polarization matrix `½(1 + S⃗·σ⃗)`: component 3 is the H/V axis, 1 is the
//! ±45° linear axis and 2 is the circular axis.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub const ZERO: StokesVector = StokesVector { s1: 0.0, s2: 0.0, s3: 0.0 };

    pub fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    /// `Tr(ρ σ⃗)` for a 2×2 matrix given as `[[a, b], [c, d]]`.
    pub fn from_polarization_matrix(m: [[Complex64; 2]; 2]) -> Self {
        let off = m[0][1] + m[1][0];
        let skew = m[0][1] - m[1][0];
        Self {
            s1: off.re,
            // Tr(ρ σ_y) = i(ρ₀₁ − ρ₁₀)
            s2: -skew.im,
            s3: (m[0][0] - m[1][1]).re,
        }
    }

    /// The polarization matrix `½(1 + S⃗·σ⃗)`.
    pub fn polarization_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(0.5 * (1.0 + self.s3), 0.0),
                Complex64::new(0.5 * self.s1, -0.5 * self.s2),
            ],
            [
                Complex64::new(0.5 * self.s1, 0.5 * self.s2),
                Complex64::new(0.5 * (1.0 - self.s3), 0.0),
            ],
        ]
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.s1 * other.s1 + self.s2 * other.s2 + self.s3 * other.s3
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self {
            s1: self.s2 * other.s3 - self.s3 * other.s2,
            s2: self.s3 * other.s1 - self.s1 * other.s3,
            s3: self.s1 * other.s2 - self.s2 * other.s1,
        }
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.s1 - other.s1)
            .abs()
            .max((self.s2 - other.s2).abs())
            .max((self.s3 - other.s3).abs())
    }
}

impl Add for StokesVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.s1 + o.s1, self.s2 + o.s2, self.s3 + o.s3)
    }
}

impl Sub for StokesVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.s1 - o.s1, self.s2 - o.s2, self.s3 - o.s3)
    }
}

impl Neg for StokesVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.s1, -self.s2, -self.s3)
    }
}

impl Mul<StokesVector> for f64 {
    type Output = StokesVector;
    fn mul(self, v: StokesVector) -> StokesVector {
        StokesVector::new(self * v.s1, self * v.s2, self * v.s3)
    }
}
