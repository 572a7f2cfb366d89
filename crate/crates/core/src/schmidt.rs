//! Schmidt decomposition of a ququart across the one-photon / two-photon cut.
//!
//! Every ququart wave function splits as
//! `Ψ(σ₁,σ₂,σ₃) = Σ± √λ± ψ±(σ₁) χ±(σ₂,σ₃)`, where `ψ±` are the eigenvectors
//! of the twice-reduced matrix `ρ_rr` and the two-photon modes `χ±` follow by
//! contracting `Ψ` with `ψ±*`. The modes `χ±` are symmetric two-photon
//! states and are stored as qutrit triples over `(|2H⟩, |1H,1V⟩, |2V⟩)`.
//!
//! For the family `(0, cos θ, e^{iφ} sin θ, 0)` everything is also known in
//! closed form; [`closed_form_family_23`] and [`chi_polarization_angles`]
//! evaluate those expressions directly.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reductions::{spectrum, stokes_vector};
use crate::state::{QuquartState, SinglePhotonMode, WaveTensor};
use crate::stokes::StokesVector;

/// Weight below which the minus mode is treated as absent.
pub const MODE_THRESHOLD: f64 = 1e-12;
/// Degree of polarization below which `ρ_rr` is treated as `I/2`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

const TIE: f64 = 1e-12;

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Symmetric two-photon state `c₂ₕ|2H⟩ + c₁₁|1H,1V⟩ + c₂ᵥ|2V⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonMode {
    pub c2h: Complex64,
    pub c11: Complex64,
    pub c2v: Complex64,
}

impl TwoPhotonMode {
    pub fn new(c2h: Complex64, c11: Complex64, c2v: Complex64) -> Self {
        Self { c2h, c11, c2v }
    }

    /// From a symmetric 2×2 tensor `χ(σ₂,σ₃)`.
    pub fn from_tensor(t: [[Complex64; 2]; 2]) -> Self {
        Self {
            c2h: t[0][0],
            c11: (t[0][1] + t[1][0]) * FRAC_1_SQRT_2,
            c2v: t[1][1],
        }
    }

    pub fn to_tensor(&self) -> [[Complex64; 2]; 2] {
        let mixed = self.c11 * FRAC_1_SQRT_2;
        [[self.c2h, mixed], [mixed, self.c2v]]
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.c2h, self.c11, self.c2v]
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.c2h.conj() * other.c2h + self.c11.conj() * other.c11 + self.c2v.conj() * other.c2v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c2h.norm_sqr() + self.c11.norm_sqr() + self.c2v.norm_sqr()
    }

    /// Single-photon reduced matrix of the pair.
    pub fn reduced_matrix(&self) -> [[Complex64; 2]; 2] {
        let half = 0.5 * self.c11.norm_sqr();
        let off = (self.c2h * self.c11.conj() + self.c11 * self.c2v.conj()) * FRAC_1_SQRT_2;
        [
            [Complex64::new(self.c2h.norm_sqr() + half, 0.0), off],
            [off.conj(), Complex64::new(self.c2v.norm_sqr() + half, 0.0)],
        ]
    }

    /// Per-photon Stokes vector of the pair.
    pub fn stokes(&self) -> StokesVector {
        StokesVector::from_polarization_matrix(self.reduced_matrix())
    }

    /// Largest componentwise deviation after aligning the global phase.
    pub fn max_deviation_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        self.components()
            .iter()
            .zip(other.components().iter())
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }
}

/// Modes and weights of the one-photon / two-photon Schmidt decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtDecomposition {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub psi_plus: SinglePhotonMode,
    pub psi_minus: SinglePhotonMode,
    pub chi_plus: TwoPhotonMode,
    /// Absent when `λ₋` is below [`MODE_THRESHOLD`].
    pub chi_minus: Option<TwoPhotonMode>,
}

impl SchmidtDecomposition {
    /// `Σ± √λ± ψ±(σ₁) χ±(σ₂,σ₃)` as a raw tensor.
    pub fn reconstruct(&self) -> [Complex64; 8] {
        let mut out = [cz(); 8];
        let mut add = |weight: f64, psi: &SinglePhotonMode, chi: &TwoPhotonMode| {
            let root = weight.sqrt();
            let psi = psi.components();
            let chi = chi.to_tensor();
            for (idx, slot) in out.iter_mut().enumerate() {
                *slot += root * psi[idx >> 2 & 1] * chi[idx >> 1 & 1][idx & 1];
            }
        };
        add(self.lambda_plus, &self.psi_plus, &self.chi_plus);
        if let Some(chi) = &self.chi_minus {
            add(self.lambda_minus, &self.psi_minus, chi);
        }
        out
    }

    /// `Σ± λ± |ψ±⟩⟨ψ±|`.
    pub fn rho_rr(&self) -> [[Complex64; 2]; 2] {
        let mut m = [[cz(); 2]; 2];
        for (w, psi) in [(self.lambda_plus, &self.psi_plus), (self.lambda_minus, &self.psi_minus)] {
            let v = psi.components();
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += w * v[i] * v[j].conj();
                }
            }
        }
        m
    }

    /// `Σ± λ± |χ±⟩⟨χ±|` on the 4-dimensional two-photon space.
    pub fn rho_r(&self) -> [[Complex64; 4]; 4] {
        let mut m = [[cz(); 4]; 4];
        let mut add = |w: f64, chi: &TwoPhotonMode| {
            let t = chi.to_tensor();
            let flat = [t[0][0], t[0][1], t[1][0], t[1][1]];
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] += w * flat[i] * flat[j].conj();
                }
            }
        };
        add(self.lambda_plus, &self.chi_plus);
        if let Some(chi) = &self.chi_minus {
            add(self.lambda_minus, chi);
        }
        m
    }
}

/// Makes the largest-modulus component real and positive; ties go to `V`.
fn gauge_mode(mode: SinglePhotonMode) -> SinglePhotonMode {
    let lead = if mode.v.norm() + TIE >= mode.h.norm() { mode.v } else { mode.h };
    if lead.norm() == 0.0 {
        return mode;
    }
    let phase = lead.conj() / lead.norm();
    SinglePhotonMode { h: mode.h * phase, v: mode.v * phase }
}

/// Eigenvectors of `ρ_rr = ½(1 + S⃗·σ⃗)` for `λ₊` and `λ₋`.
pub(crate) fn one_photon_modes(stokes: StokesVector) -> (SinglePhotonMode, SinglePhotonMode) {
    if stokes.norm() <= DEGENERACY_THRESHOLD {
        return (SinglePhotonMode::horizontal(), SinglePhotonMode::vertical());
    }
    let transverse = stokes.s1.hypot(stokes.s2);
    let half = 0.5 * transverse.atan2(stokes.s3);
    let azimuth = if transverse > 0.0 {
        Complex64::new(stokes.s1 / transverse, stokes.s2 / transverse)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let plus = SinglePhotonMode { h: Complex64::new(half.cos(), 0.0), v: azimuth * half.sin() };
    let minus = SinglePhotonMode { h: -azimuth.conj() * half.sin(), v: Complex64::new(half.cos(), 0.0) };
    (gauge_mode(plus), gauge_mode(minus))
}

/// `χ(σ₂,σ₃) = Σ_{σ₁} ψ*(σ₁) Ψ(σ₁,σ₂,σ₃) / √λ`.
fn contract(tensor: &WaveTensor, psi: &SinglePhotonMode, weight: f64) -> TwoPhotonMode {
    let p = psi.components();
    let root = weight.sqrt();
    let mut t = [[cz(); 2]; 2];
    for (s2, row) in t.iter_mut().enumerate() {
        for (s3, slot) in row.iter_mut().enumerate() {
            *slot = (p[0].conj() * tensor.at(0, s2, s3) + p[1].conj() * tensor.at(1, s2, s3)) / root;
        }
    }
    TwoPhotonMode::from_tensor(t)
}

pub fn schmidt_decompose(state: &QuquartState) -> SchmidtDecomposition {
    let spec = spectrum(state);
    let (psi_plus, psi_minus) = one_photon_modes(stokes_vector(state));
    let tensor = state.to_wave_tensor();
    let chi_plus = contract(&tensor, &psi_plus, spec.lambda_plus);
    let chi_minus = (spec.lambda_minus >= MODE_THRESHOLD).then(|| contract(&tensor, &psi_minus, spec.lambda_minus));
    SchmidtDecomposition {
        lambda_plus: spec.lambda_plus,
        lambda_minus: spec.lambda_minus,
        psi_plus,
        psi_minus,
        chi_plus,
        chi_minus,
    }
}

/// Stokes vectors of all four Schmidt modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtStokesSet {
    pub s_psi_plus: StokesVector,
    pub s_psi_minus: StokesVector,
    pub s_chi_plus: StokesVector,
    /// Zero vector when `χ₋` is absent.
    pub s_chi_minus: StokesVector,
    /// Degree of polarization of `χ₊`.
    pub p_plus: f64,
    /// Degree of polarization of `χ₋`, zero when absent.
    pub p_minus: f64,
    pub chi_minus_defined: bool,
}

pub fn schmidt_stokes(state: &QuquartState) -> SchmidtStokesSet {
    stokes_of(&schmidt_decompose(state))
}

pub fn stokes_of(dec: &SchmidtDecomposition) -> SchmidtStokesSet {
    let s_chi_plus = dec.chi_plus.stokes();
    let s_chi_minus = dec.chi_minus.map(|c| c.stokes()).unwrap_or(StokesVector::ZERO);
    SchmidtStokesSet {
        s_psi_plus: dec.psi_plus.stokes(),
        s_psi_minus: dec.psi_minus.stokes(),
        s_chi_plus,
        s_chi_minus,
        p_plus: s_chi_plus.norm(),
        p_minus: s_chi_minus.norm(),
        chi_minus_defined: dec.chi_minus.is_some(),
    }
}

/// Half the angle between the family-23 Stokes vector and the H/V axis,
/// `cos 2α = cos 2θ / √(4 − 3cos²2θ)`.
pub fn alpha_angle(theta: f64) -> f64 {
    let c = (2.0 * theta).cos();
    let ratio = (c / (4.0 - 3.0 * c * c).sqrt()).clamp(-1.0, 1.0);
    0.5 * ratio.acos()
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Maps `(θ, φ)` with negative `θ` onto the equivalent `(|θ|, φ + π)`.
fn family_params(theta: f64, phi: f64) -> (f64, f64) {
    if theta < 0.0 {
        (-theta, wrap_angle(phi + PI))
    } else {
        (theta, phi)
    }
}

/// The state `(0, cos θ, e^{iφ} sin θ, 0)`.
pub fn family23_state(theta: f64, phi: f64) -> QuquartState {
    QuquartState::new([
        cz(),
        Complex64::new(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
        cz(),
    ])
    .expect("unit amplitudes")
}

/// `λ± = ½(1 ± ⅓√(4 − 3cos²2θ))` for the family.
pub fn family23_lambdas(theta: f64) -> (f64, f64) {
    let c = (2.0 * theta).cos();
    let root = (4.0 - 3.0 * c * c).sqrt() / 3.0;
    (0.5 * (1.0 + root), 0.5 * (1.0 - root))
}

/// Analytic Schmidt decomposition of `(0, cos θ, e^{iφ} sin θ, 0)`.
pub fn closed_form_family_23(theta: f64, phi: f64) -> Result<SchmidtDecomposition> {
    let (theta, phi) = family_params(theta, phi);
    let (lp, lm) = family23_lambdas(theta);
    if lm < MODE_THRESHOLD {
        return Err(Error::DegenerateMode(lm));
    }
    let alpha = alpha_angle(theta);
    let (sa, ca) = alpha.sin_cos();
    let (st, ct) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let r = |x: f64| Complex64::new(x, 0.0);

    let psi_plus = SinglePhotonMode { h: r(ca), v: e * sa };
    let psi_minus = SinglePhotonMode { h: r(-sa), v: e * ca };
    let kp = 1.0 / (3.0 * lp).sqrt();
    let km = 1.0 / (3.0 * lm).sqrt();
    let sqrt2 = 2f64.sqrt();
    let chi_plus = TwoPhotonMode::new(
        e.conj() * (kp * sa * ct),
        r(kp * (alpha - theta).cos() * sqrt2),
        e * (kp * ca * st),
    );
    let chi_minus = TwoPhotonMode::new(
        e.conj() * (km * ca * ct),
        r(-km * (alpha - theta).sin() * sqrt2),
        e * (-km * sa * st),
    );
    Ok(SchmidtDecomposition {
        lambda_plus: lp,
        lambda_minus: lm,
        psi_plus,
        psi_minus,
        chi_plus,
        chi_minus: Some(chi_minus),
    })
}

/// Analytic Stokes vectors of `χ₊` and `χ₋` for the family.
pub fn family23_chi_stokes(theta: f64, phi: f64) -> (StokesVector, StokesVector) {
    let (theta, phi) = family_params(theta, phi);
    let (lp, lm) = family23_lambdas(theta);
    let alpha = alpha_angle(theta);
    let (dm, dp) = (alpha - theta, alpha + theta);
    let (cf, sf) = (phi.cos(), phi.sin());
    let plus = (1.0 / (3.0 * lp))
        * StokesVector::new(2.0 * cf * dm.cos() * dp.sin(), 2.0 * sf * dm.cos() * dp.sin(), dm.sin() * dp.sin());
    let minus = (1.0 / (3.0 * lm))
        * StokesVector::new(-2.0 * cf * dm.sin() * dp.cos(), -2.0 * sf * dm.sin() * dp.cos(), dm.cos() * dp.cos());
    (plus, minus)
}

/// Degrees of polarization of `χ±` and the cosines of their angles to the H/V axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiPolarization {
    pub p_plus: f64,
    pub p_minus: f64,
    pub cos_theta_plus: f64,
    pub cos_theta_minus: f64,
}

pub fn chi_polarization_angles(theta: f64, phi: f64) -> ChiPolarization {
    let (theta, _) = family_params(theta, phi);
    let (lp, lm) = family23_lambdas(theta);
    let alpha = alpha_angle(theta);
    let (dm, dp) = (alpha - theta, alpha + theta);
    let root_plus = (3.0 * dm.cos().powi(2) + 1.0).sqrt();
    let root_minus = (3.0 * dm.sin().powi(2) + 1.0).sqrt();
    // cos(α + θ) turns negative once θ passes π/4
    let sign_minus = if dp.cos() < 0.0 { -1.0 } else { 1.0 };
    ChiPolarization {
        p_plus: dp.sin() / (3.0 * lp) * root_plus,
        p_minus: dp.cos().abs() / (3.0 * lm) * root_minus,
        cos_theta_plus: dm.sin() / root_plus,
        cos_theta_minus: sign_minus * dm.cos() / root_minus,
    }
}

/// One-photon modes `A, B, D` with `|Ψ⟩ ∝ A†B†D†|0⟩` for the family:
/// `A = H`, `B = V`, `D = cos θ H + e^{iφ} sin θ V`.
pub fn factorizing_modes_family23(theta: f64, phi: f64) -> [SinglePhotonMode; 3] {
    [
        SinglePhotonMode::horizontal(),
        SinglePhotonMode::vertical(),
        SinglePhotonMode { h: Complex64::new(theta.cos(), 0.0), v: Complex64::from_polar(theta.sin(), phi) },
    ]
}

/// One row of a family-23 sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family23Row {
    pub theta: f64,
    pub alpha: f64,
    pub lambda_plus: f64,
    pub p_plus: f64,
    pub p_minus: f64,
}

pub fn family23_sweep(thetas: &[f64]) -> Vec<Family23Row> {
    thetas
        .iter()
        .map(|&theta| {
            let (lp, _) = family23_lambdas(theta);
            let pol = chi_polarization_angles(theta, 0.0);
            Family23Row { theta, alpha: alpha_angle(theta), lambda_plus: lp, p_plus: pol.p_plus, p_minus: pol.p_minus }
        })
        .collect()
}

/// Writes `theta,alpha,lambda_plus,p_plus,p_minus` rows.
pub fn write_family23_csv<W: Write>(rows: &[Family23Row], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,alpha,lambda_plus,p_plus,p_minus")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.theta, r.alpha, r.lambda_plus, r.p_plus, r.p_minus)?;
    }
    Ok(())
}
