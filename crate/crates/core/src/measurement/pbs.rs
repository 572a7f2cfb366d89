//! The simplified scheme for states of the form `√λ₊|3_H⟩ + e^{3iφ}√λ₋|3_V⟩`:
//! a wave plate maps the Schmidt modes onto H and V, and a polarizing
//! beamsplitter at 0°, 90° and 45° gives `N₀°`, `N₉₀°` and `N₄₅°`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ApparatusConfig, SPLIT_PROBABILITY};
use crate::basis::{basis_45, ideal_reduce, rotate_state, BasisRotation};
use crate::error::{Error, Result};
use crate::state::QuquartState;

/// Below this `C_g` the relative phase has no effect on the counts.
const FREE_PHASE_CONCURRENCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig10Counts {
    pub n0: f64,
    pub n90: f64,
    pub n45: f64,
    /// `N₀° + N₉₀°`.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig10Result {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c_g: f64,
    /// `(8N₄₅°/Σ − 1)/C_g`, clamped to `[−1, 1]`; absent when the phase is free.
    pub cos_3phi: Option<f64>,
    /// Every `φ ∈ (−π, π]` with the measured `cos 3φ`.
    pub phi_candidates: Vec<f64>,
    pub phase_free: bool,
    pub counts: Fig10Counts,
    /// The wave-plate setting used to reach the two-term form.
    pub rotation: Option<BasisRotation>,
}

/// Counts for `√λ₊|3_H⟩ + e^{3iφ}√λ₋|3_V⟩` from the closed forms.
pub fn fig10_counts(lambda_plus: f64, phi: f64, cfg: &ApparatusConfig) -> Result<Fig10Counts> {
    cfg.validate()?;
    let lp = lambda_plus.clamp(0.0, 1.0);
    let lm = 1.0 - lp;
    let k = SPLIT_PROBABILITY * cfg.efficiency_product() * cfg.n_triplets as f64;
    let c_g = 2.0 * (lp * lm).sqrt();
    Ok(Fig10Counts { n0: k * lp, n90: k * lm, n45: k / 8.0 * (1.0 + c_g * (3.0 * phi).cos()), sigma: k })
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `λ₊ = N₀°/Σ`, `λ₋ = N₉₀°/Σ` and the `cos 3φ` branches.
pub fn fig10_invert(counts: Fig10Counts) -> Result<Fig10Result> {
    let sigma = counts.n0 + counts.n90;
    if !(sigma > 0.0) {
        return Err(Error::EmptyData);
    }
    let lambda_plus = counts.n0 / sigma;
    let lambda_minus = counts.n90 / sigma;
    let c_g = 2.0 * (lambda_plus * lambda_minus).sqrt();
    let counts = Fig10Counts { sigma, ..counts };
    if c_g < FREE_PHASE_CONCURRENCE {
        return Ok(Fig10Result {
            lambda_plus,
            lambda_minus,
            c_g,
            cos_3phi: None,
            phi_candidates: Vec::new(),
            phase_free: true,
            counts,
            rotation: None,
        });
    }
    let cos_3phi = ((8.0 * counts.n45 / sigma - 1.0) / c_g).clamp(-1.0, 1.0);
    let a = cos_3phi.acos();
    let mut phi_candidates: Vec<f64> = Vec::new();
    for m in 0..3 {
        for sign in [1.0, -1.0] {
            let phi = wrap((sign * a + 2.0 * PI * m as f64) / 3.0);
            if !phi_candidates.iter().any(|&p| wrap(p - phi).abs() < 1e-12) {
                phi_candidates.push(phi);
            }
        }
    }
    phi_candidates.sort_by(f64::total_cmp);
    Ok(Fig10Result {
        lambda_plus,
        lambda_minus,
        c_g,
        cos_3phi: Some(cos_3phi),
        phi_candidates,
        phase_free: false,
        counts,
        rotation: None,
    })
}

/// Reduces the state, forms the three PBS counts and inverts them.
pub fn fig10_pipeline(state: &QuquartState, cfg: &ApparatusConfig) -> Result<Fig10Result> {
    cfg.validate()?;
    let reduction = ideal_reduce(state);
    if !reduction.reducible {
        return Err(Error::NotReducible(reduction.residual));
    }
    // the wave plate should send the larger Schmidt weight to H
    let rot = reduction
        .solutions
        .iter()
        .copied()
        .find(|r| {
            let t = rotate_state(state, *r);
            t.amplitude(0).norm_sqr() >= t.amplitude(3).norm_sqr()
        })
        .unwrap_or(reduction.solutions[0]);
    let reduced = rotate_state(state, rot);
    let k = SPLIT_PROBABILITY * cfg.efficiency_product() * cfg.n_triplets as f64;
    let counts = Fig10Counts {
        n0: k * reduced.amplitude(0).norm_sqr(),
        n90: k * reduced.amplitude(3).norm_sqr(),
        n45: k * basis_45(&reduced).amplitude(0).norm_sqr(),
        sigma: k,
    };
    let mut result = fig10_invert(counts)?;
    result.rotation = Some(rot);
    Ok(result)
}
