//! Polarization basis rotations and the reduction to `√λ₊|3₊⟩ + √λ₋|3₋⟩`.
//!
//! A rotation `(ϑ, φ)` introduces new modes
//! `a₊† = cos ϑ a_H† + e^{iφ} sin ϑ a_V†` and
//! `a₋† = −sin ϑ a_H† + e^{iφ} cos ϑ a_V†`. Its action on the amplitudes is
//! `C̃ = M(ϑ)·D(φ)·C`, with `D(φ) = diag(e^{−ikφ})` and `M` the real
//! four-dimensional representation of the mode rotation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::optimize::levenberg_marquardt;
use crate::state::QuquartState;

/// Residual below which a reduction is accepted.
pub const REDUCIBLE_THRESHOLD: f64 = 1e-9;
/// Tolerance of the phase-ladder and modulus conditions.
pub const CONDITION_TOLERANCE: f64 = 1e-9;
/// Grid resolution of the numeric search along each axis.
pub const GRID_SIZE: usize = 720;
const REFINE_CANDIDATES: usize = 32;
const NEGLIGIBLE: f64 = 1e-10;
const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BasisRotation {
    /// ϑ, radians.
    pub mix_angle: f64,
    /// φ, radians.
    pub rel_phase: f64,
}

impl BasisRotation {
    pub fn new(mix_angle: f64, rel_phase: f64) -> Self {
        Self { mix_angle, rel_phase }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// The real matrix `M(ϑ)`.
    pub fn mix_matrix(&self) -> [[f64; 4]; 4] {
        mix_matrix(self.mix_angle)
    }

    /// The full amplitude map `M(ϑ)·D(φ)`.
    pub fn amplitude_matrix(&self) -> [[Complex64; 4]; 4] {
        let m = self.mix_matrix();
        std::array::from_fn(|j| std::array::from_fn(|k| m[j][k] * phase(k, self.rel_phase)))
    }

    /// `‖U†U − I‖∞` of the amplitude map.
    pub fn unitarity_error(&self) -> f64 {
        let u = self.amplitude_matrix();
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = Complex64::new(0.0, 0.0);
                for row in &u {
                    s += row[i].conj() * row[j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

fn phase(k: usize, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(k as f64) * phi)
}

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// `M_jk(ϑ)`: coefficient of `a₊†^{3−j} a₋†^j` in
/// `(c a₊† − s a₋†)^{3−k} (s a₊† + c a₋†)^k`, rescaled to normalized monomials.
pub fn mix_matrix(theta: f64) -> [[f64; 4]; 4] {
    let (s, c) = theta.sin_cos();
    let mut m = [[0.0; 4]; 4];
    for k in 0..4 {
        // polynomial in a₋†, index = power of a₋†
        let mut poly = [1.0, 0.0, 0.0, 0.0];
        for factor in 0..3 {
            let (lin_p, lin_m) = if factor < 3 - k { (c, -s) } else { (s, c) };
            let mut next = [0.0; 4];
            for d in 0..3 {
                next[d] += poly[d] * lin_p;
                next[d + 1] += poly[d] * lin_m;
            }
            poly = next;
        }
        for (j, row) in m.iter_mut().enumerate() {
            row[k] = poly[j] * (FACT[3 - j] * FACT[j] / (FACT[3 - k] * FACT[k])).sqrt();
        }
    }
    m
}

pub fn rotate_amplitudes(c: &[Complex64; 4], rot: BasisRotation) -> [Complex64; 4] {
    let u = rot.amplitude_matrix();
    std::array::from_fn(|j| (0..4).map(|k| u[j][k] * c[k]).sum())
}

/// Inverse of [`rotate_amplitudes`]: `C = D(−φ)·M(−ϑ)·C̃`.
pub fn unrotate_amplitudes(c: &[Complex64; 4], rot: BasisRotation) -> [Complex64; 4] {
    let m = mix_matrix(-rot.mix_angle);
    std::array::from_fn(|j| {
        let mixed: Complex64 = (0..4).map(|k| m[j][k] * c[k]).sum();
        mixed * phase(j, -rot.rel_phase)
    })
}

/// Amplitudes in the rotated basis. The result is not re-gauged, so its
/// components are exactly `C̃₁..C̃₄`.
pub fn rotate_state(state: &QuquartState, rot: BasisRotation) -> QuquartState {
    QuquartState::from_normalized(rotate_amplitudes(state.amplitudes(), rot))
}

pub fn unrotate_state(state: &QuquartState, rot: BasisRotation) -> QuquartState {
    QuquartState::from_normalized(unrotate_amplitudes(state.amplitudes(), rot))
}

/// The state seen in the ±45° linear basis.
pub fn basis_45(state: &QuquartState) -> QuquartState {
    rotate_state(state, BasisRotation::new(FRAC_PI_4, 0.0))
}

/// `C̃₂` and `C̃₃` from their explicit trigonometric expansion.
pub fn ctilde_23(state: &QuquartState, rot: BasisRotation) -> (Complex64, Complex64) {
    let [c1, c2, c3, c4] = *state.amplitudes();
    let (s, c) = rot.mix_angle.sin_cos();
    let (p1, p2, p3) = (phase(1, rot.rel_phase), phase(2, rot.rel_phase), phase(3, rot.rel_phase));
    let t2 = -SQRT3 * c1 * (c * c * s)
        + p1 * c2 * (c * c * c - 2.0 * c * s * s)
        + p2 * c3 * (2.0 * s * c * c - s * s * s)
        + SQRT3 * p3 * c4 * (s * s * c);
    let t3 = SQRT3 * c1 * (s * s * c)
        + p1 * c2 * (s * s * s - 2.0 * s * c * c)
        + p2 * c3 * (c * c * c - 2.0 * c * s * s)
        + SQRT3 * p3 * c4 * (c * c * s);
    (t2, t3)
}

/// Outcome of [`ideal_reduce`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealReduction {
    pub reducible: bool,
    /// Distinct ϑ over all solutions, in solution order.
    pub mix_angles: Vec<f64>,
    /// Every `(ϑ, φ)` found, the preferred one first.
    pub solutions: Vec<BasisRotation>,
    /// The state rotated by the first solution.
    pub transformed: Option<QuquartState>,
    /// `max(|C̃₂|, |C̃₃|)` at the first solution, or at the best point found.
    pub residual: f64,
    /// Larger of `|C̃₁|², |C̃₄|²` for the first solution.
    pub lambda_plus: Option<f64>,
    pub lambda_minus: Option<f64>,
    /// Whether the phase-ladder and modulus conditions both hold.
    pub conditions_hold: bool,
}

/// Largest of `|C̃₂|, |C̃₃|`.
pub fn reduction_residual(state: &QuquartState, rot: BasisRotation) -> f64 {
    let (a, b) = ctilde_23(state, rot);
    a.norm().max(b.norm())
}

fn wrap(x: f64, half_period: f64) -> f64 {
    let p = 2.0 * half_period;
    let mut y = x.rem_euclid(p);
    if y > half_period {
        y -= p;
    }
    y
}

/// `φ` such that `arg C_k = γ + kφ` for every non-negligible amplitude.
pub fn phase_ladder(state: &QuquartState) -> Vec<f64> {
    let c = state.amplitudes();
    let present: Vec<usize> = (0..4).filter(|&k| c[k].norm() > NEGLIGIBLE).collect();
    if present.len() < 2 {
        return vec![0.0];
    }
    let (i, j) = (present[0], present[1]);
    let step = (j - i) as f64;
    let base = c[j].arg() - c[i].arg();
    (0..j - i)
        .map(|m| wrap((base + 2.0 * PI * m as f64) / step, PI))
        .filter(|&phi| {
            present.iter().all(|&k| {
                let want = c[i].arg() + (k - i) as f64 * phi;
                wrap(c[k].arg() - want, PI).abs() < CONDITION_TOLERANCE
            })
        })
        .collect()
}

/// `|C₂|² + |C₃|² − √3(|C₂||C₄| + |C₃||C₁|)`.
pub fn modulus_condition(state: &QuquartState) -> f64 {
    let m: Vec<f64> = state.amplitudes().iter().map(|a| a.norm()).collect();
    m[1] * m[1] + m[2] * m[2] - SQRT3 * (m[1] * m[3] + m[2] * m[0])
}

/// The two roots `tan ϑ = (−B ± √(B² + 4A²)) / 2A`, `+` first.
pub fn tangent_roots(state: &QuquartState) -> Option<[f64; 2]> {
    let m: Vec<f64> = state.amplitudes().iter().map(|a| a.norm()).collect();
    let a = m[1] * m[1] + m[2] * m[2];
    let b = SQRT3 * (m[0] * m[1] - m[2] * m[3]);
    if a < NEGLIGIBLE {
        return None;
    }
    let root = (b * b + 4.0 * a * a).sqrt();
    Some([(-b + root) / (2.0 * a), (-b - root) / (2.0 * a)])
}

fn normalize_rotation(rot: BasisRotation) -> BasisRotation {
    BasisRotation::new(wrap(rot.mix_angle, FRAC_PI_2), wrap(rot.rel_phase, PI))
}

fn same_solution(a: &BasisRotation, b: &BasisRotation) -> bool {
    let dt = wrap(a.mix_angle - b.mix_angle, FRAC_PI_2).abs();
    if dt > 1e-7 {
        return false;
    }
    // along ϑ ≡ 0 (mod π/2) the phase drops out of C̃₂, C̃₃
    (2.0 * a.mix_angle).sin().abs() < 1e-7 || wrap(a.rel_phase - b.rel_phase, PI).abs() < 1e-7
}

fn refine(state: &QuquartState, start: BasisRotation) -> (BasisRotation, f64) {
    let fit = levenberg_marquardt(
        |x| {
            let (a, b) = ctilde_23(state, BasisRotation::new(x[0], x[1]));
            vec![a.re, a.im, b.re, b.im]
        },
        &[start.mix_angle, start.rel_phase],
        100,
    );
    let rot = normalize_rotation(BasisRotation::new(fit.x[0], fit.x[1]));
    (rot, reduction_residual(state, rot))
}

/// Dense grid over `ϑ ∈ (−π/2, π/2)`, `φ ∈ (−π, π]`, then refinement of the
/// best grid minima. Returns refined points and their residuals.
pub fn numeric_roots(state: &QuquartState) -> Vec<(BasisRotation, f64)> {
    let n = GRID_SIZE;
    let thetas: Vec<f64> = (0..n).map(|i| -FRAC_PI_2 + (i as f64 + 0.5) * PI / n as f64).collect();
    let phis: Vec<f64> = (0..n).map(|j| -PI + (j as f64 + 1.0) * 2.0 * PI / n as f64).collect();
    let rows: Vec<[f64; 8]> = thetas
        .iter()
        .map(|&t| {
            let m = mix_matrix(t);
            [m[1][0], m[1][1], m[1][2], m[1][3], m[2][0], m[2][1], m[2][2], m[2][3]]
        })
        .collect();
    let c = *state.amplitudes();
    let shifted: Vec<[Complex64; 4]> =
        phis.iter().map(|&p| std::array::from_fn(|k| c[k] * phase(k, p))).collect();

    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (row, u) = (&rows[idx / n], &shifted[idx % n]);
            let t2 = row[0] * u[0] + row[1] * u[1] + row[2] * u[2] + row[3] * u[3];
            let t3 = row[4] * u[0] + row[5] * u[1] + row[6] * u[2] + row[7] * u[3];
            t2.norm_sqr() + t3.norm_sqr()
        })
        .collect();

    // both axes are periodic: ϑ → ϑ + π only flips the global sign
    let at = |i: isize, j: isize| values[(i.rem_euclid(n as isize) as usize) * n + j.rem_euclid(n as isize) as usize];
    let mut minima: Vec<(f64, usize)> = (0..n * n)
        .into_par_iter()
        .filter_map(|idx| {
            let (i, j) = ((idx / n) as isize, (idx % n) as isize);
            let v = values[idx];
            let mut is_min = true;
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let w = at(i + di, j + dj);
                    // ties are broken by index so a flat valley yields one point per cell
                    let later = (di, dj) > (0, 0);
                    if w < v || (w == v && later) {
                        is_min = false;
                    }
                }
            }
            is_min.then_some((v, idx))
        })
        .collect();
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(REFINE_CANDIDATES);

    minima
        .par_iter()
        .map(|&(_, idx)| refine(state, BasisRotation::new(thetas[idx / n], phis[idx % n])))
        .collect()
}

/// Tests whether the state can be rotated to `(√λ₊, 0, 0, e^{iγ}√λ₋)`.
///
/// The analytic route (phase ladder, modulus condition and the two tangent
/// roots) is tried first; a grid search for common roots of `C̃₂ = C̃₃ = 0`
/// always runs as well and decides on its own.
pub fn ideal_reduce(state: &QuquartState) -> IdealReduction {
    let c = state.amplitudes();
    let trivial = c[1].norm() < NEGLIGIBLE && c[2].norm() < NEGLIGIBLE;
    let ladder = phase_ladder(state);
    let conditions_hold = !ladder.is_empty() && modulus_condition(state).abs() < CONDITION_TOLERANCE;

    let mut analytic: Vec<(BasisRotation, f64)> = Vec::new();
    if trivial {
        analytic.push((BasisRotation::identity(), reduction_residual(state, BasisRotation::identity())));
    }
    if conditions_hold {
        if let Some(roots) = tangent_roots(state) {
            for t in roots {
                for &phi in &ladder {
                    let rot = normalize_rotation(BasisRotation::new(t.atan(), phi));
                    analytic.push((rot, reduction_residual(state, rot)));
                }
            }
        }
    }

    let numeric = numeric_roots(state);
    let best_point = analytic
        .iter()
        .chain(numeric.iter())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .copied()
        .unwrap_or((BasisRotation::identity(), f64::INFINITY));

    let mut ordered_numeric: Vec<(BasisRotation, f64)> =
        numeric.into_iter().filter(|p| p.1 < REDUCIBLE_THRESHOLD).collect();
    // prefer λ₊ in the first slot
    ordered_numeric.sort_by(|a, b| {
        let wa = leading_weight(state, a.0);
        let wb = leading_weight(state, b.0);
        wb.total_cmp(&wa).then(a.0.mix_angle.total_cmp(&b.0.mix_angle))
    });

    let mut solutions: Vec<BasisRotation> = Vec::new();
    for (rot, res) in analytic.into_iter().filter(|p| p.1 < REDUCIBLE_THRESHOLD).chain(ordered_numeric) {
        let _ = res;
        if !solutions.iter().any(|s| same_solution(s, &rot)) {
            solutions.push(rot);
        }
    }

    let mut mix_angles: Vec<f64> = Vec::new();
    for s in &solutions {
        if !mix_angles.iter().any(|&m| (m - s.mix_angle).abs() < 1e-7) {
            mix_angles.push(s.mix_angle);
        }
    }

    match solutions.first().copied() {
        Some(first) => {
            let transformed = rotate_state(state, first);
            let (w1, w4) = (transformed.amplitude(0).norm_sqr(), transformed.amplitude(3).norm_sqr());
            IdealReduction {
                reducible: true,
                mix_angles,
                solutions,
                transformed: Some(transformed),
                residual: reduction_residual(state, first),
                lambda_plus: Some(w1.max(w4)),
                lambda_minus: Some(w1.min(w4)),
                conditions_hold,
            }
        }
        None => IdealReduction {
            reducible: false,
            mix_angles,
            solutions,
            transformed: None,
            residual: best_point.1,
            lambda_plus: None,
            lambda_minus: None,
            conditions_hold,
        },
    }
}

fn leading_weight(state: &QuquartState, rot: BasisRotation) -> f64 {
    rotate_amplitudes(state.amplitudes(), rot)[0].norm_sqr()
}

/// `√λ₊ a₊†³/√6 + e^{iγ} √λ₋ a₋†³/√6` expressed in the H/V basis.
pub fn ideal_state(lambda_plus: f64, gamma: f64, rot: BasisRotation) -> QuquartState {
    let lp = lambda_plus.clamp(0.0, 1.0);
    let tilde = [
        Complex64::new(lp.sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar((1.0 - lp).sqrt(), gamma),
    ];
    QuquartState::from_normalized(unrotate_amplitudes(&tilde, rot)).canonical()
}
