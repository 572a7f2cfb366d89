//! One-parameter families of states swept over θ.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reductions::spectrum;
use crate::schmidt::{family23_sweep, schmidt_decompose, Family23Row};
use crate::state::QuquartState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepFamily {
    /// `(cos θ, 0, 0, sin θ)`
    CaseA,
    /// `(0, cos θ, sin θ, 0)`
    Case23,
    /// Schmidt angles and `χ±` polarizations of `(0, cos θ, sin θ, 0)`.
    Schmidt23,
}

impl FromStr for SweepFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case-a" => Ok(SweepFamily::CaseA),
            "case-23" => Ok(SweepFamily::Case23),
            "schmidt-23" => Ok(SweepFamily::Schmidt23),
            other => Err(Error::BadRange(format!("unknown family {other}"))),
        }
    }
}

impl SweepFamily {
    pub fn state(self, theta: f64) -> QuquartState {
        let (s, c) = theta.sin_cos();
        let amps = match self {
            SweepFamily::CaseA => [c, 0.0, 0.0, s],
            SweepFamily::Case23 | SweepFamily::Schmidt23 => [0.0, c, s, 0.0],
        };
        QuquartState::from_real(amps).expect("unit amplitudes")
    }
}

/// `points` evenly spaced values from `start` to `end` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl SweepGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::BadRange(format!("non-finite bounds {}..{}", self.start, self.end)));
        }
        match self.points {
            0 => Err(Error::BadRange("at least one grid point is required".into())),
            1 => Ok(vec![self.start]),
            n => {
                let step = (self.end - self.start) / (n - 1) as f64;
                Ok((0..n).map(|i| if i + 1 == n { self.end } else { self.start + step * i as f64 }).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub c_g: f64,
    pub polarization: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Angle of `ψ₊` from H, `atan2(|ψ₊ᵥ|, |ψ₊ₕ|)`.
    pub alpha: f64,
}

pub fn sweep_row(family: SweepFamily, theta: f64) -> SweepRow {
    let state = family.state(theta);
    let spec = spectrum(&state);
    let psi = schmidt_decompose(&state).psi_plus;
    SweepRow {
        theta,
        c_g: spec.c_g,
        polarization: spec.polarization,
        lambda_plus: spec.lambda_plus,
        lambda_minus: spec.lambda_minus,
        alpha: psi.v.norm().atan2(psi.h.norm()),
    }
}

pub enum SweepTable {
    Metrics(Vec<SweepRow>),
    Schmidt(Vec<Family23Row>),
}

pub fn sweep(family: SweepFamily, grid: &SweepGrid) -> Result<SweepTable> {
    let thetas = grid.values()?;
    Ok(match family {
        SweepFamily::Schmidt23 => SweepTable::Schmidt(family23_sweep(&thetas)),
        f => SweepTable::Metrics(thetas.into_iter().map(|t| sweep_row(f, t)).collect()),
    })
}

/// Writes `theta,c_g,polarization,lambda_plus,lambda_minus,alpha` rows.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,c_g,polarization,lambda_plus,lambda_minus,alpha")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.theta, r.c_g, r.polarization, r.lambda_plus, r.lambda_minus, r.alpha)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn case_a_row() {
        let r = sweep_row(SweepFamily::CaseA, FRAC_PI_4);
        assert_abs_diff_eq!(r.c_g, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.polarization, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn case_23_rows() {
        let r = sweep_row(SweepFamily::Case23, 0.0);
        assert_abs_diff_eq!(r.c_g, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.polarization, 1.0 / 3.0, epsilon = 1e-12);
        let r = sweep_row(SweepFamily::Case23, FRAC_PI_4);
        assert_abs_diff_eq!(r.c_g, 5f64.sqrt() / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.polarization, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.alpha, FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn grid_values() {
        let g = SweepGrid { start: 0.0, end: 1.0, points: 5 };
        assert_eq!(g.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(SweepGrid { points: 0, ..g }.values().is_err());
        assert!(SweepGrid { end: f64::NAN, ..g }.values().is_err());
        assert!("case-b".parse::<SweepFamily>().is_err());
    }
}
