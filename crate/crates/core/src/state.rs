//! Three-photon polarization states and their symmetric wave functions.
//!
//! A ququart is a superposition `C₁|3H⟩ + C₂|2H,1V⟩ + C₃|1H,2V⟩ + C₄|3V⟩`
//! of the four occupation configurations of three photons sharing one
//! spatial-spectral mode. The equivalent first-quantized description is a
//! wave function `Ψ(σ₁,σ₂,σ₃)` over three two-valued polarization variables
//! that is symmetric under every permutation of its arguments.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stokes::StokesVector;

/// Modulus below which an amplitude is treated as absent when fixing the gauge.
pub const GAUGE_THRESHOLD: f64 = 1e-12;
/// Tolerance on norm and symmetry for tensors supplied from outside.
pub const TENSOR_TOLERANCE: f64 = 1e-10;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Polarization of a single photon, `H = 0`, `V = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H = 0,
    V = 1,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Polarization::H
        } else {
            Polarization::V
        }
    }
}

/// Normalized amplitudes `(C₁, C₂, C₃, C₄)` over `|3H⟩, |2H,1V⟩, |1H,2V⟩, |3V⟩`.
///
/// States built through [`QuquartState::new`] are normalized and carry the
/// canonical gauge: the first amplitude with modulus above
/// [`GAUGE_THRESHOLD`] is real and non-negative. Linear maps such as basis
/// rotations return normalized states without re-fixing the gauge, so that
/// their amplitudes are exactly the transformed coefficients; call
/// [`QuquartState::canonical`] when the canonical representative is needed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateJson", try_from = "StateJson")]
pub struct QuquartState {
    amps: [Complex64; 4],
}

/// Normalizes and gauge-fixes four raw amplitudes.
pub fn make_state(raw: [Complex64; 4]) -> Result<QuquartState> {
    QuquartState::new(raw)
}

impl QuquartState {
    pub fn new(raw: [Complex64; 4]) -> Result<Self> {
        let max = raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !(max > GAUGE_THRESHOLD) {
            return Err(Error::ZeroState(max));
        }
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let amps = raw.map(|c| c / norm);
        Ok(Self { amps: gauge_fix(amps) })
    }

    /// Convenience constructor for real amplitudes.
    pub fn from_real(raw: [f64; 4]) -> Result<Self> {
        Self::new(raw.map(|x| Complex64::new(x, 0.0)))
    }

    /// One of the four configurations, `k` in `0..4`.
    pub fn basis(k: usize) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        amps[k] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Wraps amplitudes that are already normalized to working precision.
    pub(crate) fn from_normalized(amps: [Complex64; 4]) -> Self {
        debug_assert!((amps.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-9);
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    /// Amplitude `C_{k+1}` for `k` in `0..4`.
    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn moduli_sq(&self) -> [f64; 4] {
        self.amps.map(|c| c.norm_sqr())
    }

    /// The same physical state in the canonical gauge.
    pub fn canonical(&self) -> Self {
        Self { amps: gauge_fix(self.amps) }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Distance between the two rays, `min_γ ‖a − e^{iγ} b‖`.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = self.inner(other).norm().min(1.0);
        (2.0 - 2.0 * overlap).max(0.0).sqrt()
    }

    /// Largest componentwise deviation after aligning the global phase.
    pub fn max_deviation_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_wave_tensor(&self) -> WaveTensor {
        to_wave_tensor(self)
    }
}

impl fmt::Display for QuquartState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .amps
            .iter()
            .map(|c| format!("{:.6}{:+.6}i", c.re, c.im))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn gauge_fix(amps: [Complex64; 4]) -> [Complex64; 4] {
    match amps.iter().find(|c| c.norm() > GAUGE_THRESHOLD) {
        Some(lead) => {
            let phase = lead.conj() / lead.norm();
            let mut out = amps.map(|c| c * phase);
            // the leading entry is real up to rounding; make it exactly so
            let k = amps.iter().position(|c| c.norm() > GAUGE_THRESHOLD).unwrap();
            out[k] = Complex64::new(amps[k].norm(), 0.0);
            out
        }
        None => amps,
    }
}

/// Symmetric amplitude tensor `Ψ(σ₁,σ₂,σ₃)`, stored row-major with `H = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveTensor {
    amp: [Complex64; 8],
}

#[inline]
pub(crate) fn tensor_index(s1: usize, s2: usize, s3: usize) -> usize {
    4 * s1 + 2 * s2 + s3
}

impl WaveTensor {
    /// Validates symmetry and norm of an externally supplied tensor.
    pub fn new(amp: [Complex64; 8]) -> Result<Self> {
        let asym = max_asymmetry(&amp);
        if asym > TENSOR_TOLERANCE {
            return Err(Error::AsymmetricTensor(asym));
        }
        let norm: f64 = amp.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > TENSOR_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amp })
    }

    pub fn get(&self, s1: Polarization, s2: Polarization, s3: Polarization) -> Complex64 {
        self.amp[tensor_index(s1.index(), s2.index(), s3.index())]
    }

    pub fn at(&self, s1: usize, s2: usize, s3: usize) -> Complex64 {
        self.amp[tensor_index(s1, s2, s3)]
    }

    pub fn entries(&self) -> &[Complex64; 8] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest deviation between entries related by a permutation of indices.
    pub fn asymmetry(&self) -> f64 {
        max_asymmetry(&self.amp)
    }

    pub fn to_state(&self) -> Result<QuquartState> {
        from_wave_tensor(self)
    }
}

fn max_asymmetry(amp: &[Complex64; 8]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut worst: f64 = 0.0;
    for idx in 0..8 {
        let s = [idx >> 2 & 1, idx >> 1 & 1, idx & 1];
        for p in PERMS {
            let j = tensor_index(s[p[0]], s[p[1]], s[p[2]]);
            worst = worst.max((amp[idx] - amp[j]).norm());
        }
    }
    worst
}

pub fn to_wave_tensor(state: &QuquartState) -> WaveTensor {
    let [c1, c2, c3, c4] = state.amps;
    let mut amp = [Complex64::new(0.0, 0.0); 8];
    for (idx, slot) in amp.iter_mut().enumerate() {
        *slot = match idx.count_ones() {
            0 => c1,
            1 => c2 / SQRT3,
            2 => c3 / SQRT3,
            _ => c4,
        };
    }
    WaveTensor { amp }
}

/// Recovers the amplitudes from a symmetric tensor, normalized and gauge-fixed.
pub fn from_wave_tensor(tensor: &WaveTensor) -> Result<QuquartState> {
    let asym = tensor.asymmetry();
    if asym > TENSOR_TOLERANCE {
        return Err(Error::AsymmetricTensor(asym));
    }
    let mut sums = [Complex64::new(0.0, 0.0); 4];
    for (idx, a) in tensor.amp.iter().enumerate() {
        sums[idx.count_ones() as usize] += a;
    }
    // each one-V and two-V configuration appears three times with weight 1/√3
    let raw = [sums[0], sums[1] / SQRT3, sums[2] / SQRT3, sums[3]];
    QuquartState::new(raw)
}

/// Normalized single-photon polarization spinor `(h, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinglePhotonMode {
    pub h: Complex64,
    pub v: Complex64,
}

impl SinglePhotonMode {
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(norm > GAUGE_THRESHOLD) {
            return Err(Error::ZeroState(norm));
        }
        Ok(Self { h: h / norm, v: v / norm })
    }

    pub fn horizontal() -> Self {
        Self { h: Complex64::new(1.0, 0.0), v: Complex64::new(0.0, 0.0) }
    }

    pub fn vertical() -> Self {
        Self { h: Complex64::new(0.0, 0.0), v: Complex64::new(1.0, 0.0) }
    }

    pub fn components(&self) -> [Complex64; 2] {
        [self.h, self.v]
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    /// Stokes vector of the pure one-photon state.
    pub fn stokes(&self) -> StokesVector {
        let off = self.h * self.v.conj();
        StokesVector::new(
            2.0 * off.re,
            -2.0 * off.im,
            self.h.norm_sqr() - self.v.norm_sqr(),
        )
    }
}

/// JSON form `{"C": [[re, im], [re, im], [re, im], [re, im]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "C")]
    pub c: [[f64; 2]; 4],
}

impl From<&QuquartState> for StateJson {
    fn from(state: &QuquartState) -> Self {
        StateJson { c: state.amps.map(|z| [z.re, z.im]) }
    }
}

impl From<QuquartState> for StateJson {
    fn from(state: QuquartState) -> Self {
        StateJson::from(&state)
    }
}

impl TryFrom<StateJson> for QuquartState {
    type Error = Error;
    fn try_from(json: StateJson) -> Result<Self> {
        json.to_state()
    }
}

impl StateJson {
    pub fn to_state(&self) -> Result<QuquartState> {
        QuquartState::new(self.c.map(|[re, im]| Complex64::new(re, im)))
    }
}

/// Parses a state from its JSON form; the result is normalized and gauge-fixed.
pub fn state_from_json(text: &str) -> Result<QuquartState> {
    let parsed: StateJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    parsed.to_state()
}

/// Serializes the canonical representative of a state.
///
/// Floats are written in their shortest round-trip form, so reading the
/// output back reproduces the amplitudes bit for bit.
pub fn state_to_json(state: &QuquartState) -> String {
    serde_json::to_string(&StateJson::from(&state.canonical())).expect("finite amplitudes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_state_normalizes() {
        let s = QuquartState::from_real([1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitude(0).re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(3).re, r, epsilon = 1e-15);
    }

    #[test]
    fn make_state_removes_global_phase() {
        let s = make_state([c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for k in [0, 3] {
            assert_abs_diff_eq!(s.amplitude(k).re, r, epsilon = 1e-15);
            assert_abs_diff_eq!(s.amplitude(k).im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gauge_uses_first_nonnegligible_amplitude() {
        let s = make_state([c(1e-14, 0.0), c(0.0, -2.0), c(1.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.amplitude(1).im, 0.0);
        assert!(s.amplitude(1).re > 0.0);
    }

    #[test]
    fn zero_state_rejected() {
        let err = make_state([c(1e-13, 0.0), c(0.0, 0.0), c(0.0, -1e-13), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::ZeroState(_)));
    }

    #[test]
    fn basis_tensors() {
        let t = QuquartState::basis(0).to_wave_tensor();
        assert_eq!(t.at(0, 0, 0), c(1.0, 0.0));
        assert!(t.entries()[1..].iter().all(|z| z.norm() == 0.0));

        let t = QuquartState::basis(1).to_wave_tensor();
        let third = 1.0 / 3f64.sqrt();
        for (s1, s2, s3) in [(0, 0, 1), (0, 1, 0), (1, 0, 0)] {
            assert_abs_diff_eq!(t.at(s1, s2, s3).re, third, epsilon = 1e-15);
        }
        assert_eq!(t.at(0, 0, 0).norm(), 0.0);
        assert_eq!(t.at(1, 1, 0).norm(), 0.0);
    }

    #[test]
    fn mixed_state_tensor() {
        let s = QuquartState::from_real([0.5, 0.0, 3f64.sqrt() / 2.0, 0.0]).unwrap();
        let t = s.to_wave_tensor();
        assert_abs_diff_eq!(t.at(0, 0, 0).re, 0.5, epsilon = 1e-15);
        for (s1, s2, s3) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            assert_abs_diff_eq!(t.at(s1, s2, s3).re, 0.5, epsilon = 1e-15);
        }
        for (s1, s2, s3) in [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)] {
            assert_eq!(t.at(s1, s2, s3).norm(), 0.0);
        }
    }

    #[test]
    fn tensor_inverse_of_basis_states() {
        let mut amp = [c(0.0, 0.0); 8];
        amp[0] = c(1.0, 0.0);
        let s = from_wave_tensor(&WaveTensor::new(amp).unwrap()).unwrap();
        assert_eq!(s, QuquartState::basis(0));

        let mut amp = [c(0.0, 0.0); 8];
        for idx in [1, 2, 4] {
            amp[idx] = c(1.0 / 3f64.sqrt(), 0.0);
        }
        let s = from_wave_tensor(&WaveTensor::new(amp).unwrap()).unwrap();
        assert_abs_diff_eq!(s.amplitude(1).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn asymmetric_tensor_rejected() {
        let mut amp = [c(0.0, 0.0); 8];
        amp[tensor_index(0, 0, 1)] = c(0.8, 0.0);
        amp[tensor_index(1, 0, 0)] = c(0.6, 0.0);
        assert!(matches!(WaveTensor::new(amp), Err(Error::AsymmetricTensor(_))));
        let raw = WaveTensor { amp };
        assert!(matches!(from_wave_tensor(&raw), Err(Error::AsymmetricTensor(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = make_state([c(0.3, 0.1), c(-0.2, 0.7), c(0.05, -0.4), c(0.9, 0.2)]).unwrap();
        let text = state_to_json(&s);
        let back = state_from_json(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn json_reader_normalizes() {
        let s = state_from_json(r#"{"C":[[2,0],[0,0],[0,0],[0,2]]}"#).unwrap();
        assert_abs_diff_eq!(s.amplitude(0).re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(state_from_json(r#"{"C":[[1,0]]}"#).is_err());
    }

    #[test]
    fn single_photon_stokes() {
        let h = SinglePhotonMode::horizontal().stokes();
        assert_eq!((h.s1, h.s2, h.s3), (0.0, 0.0, 1.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let d = SinglePhotonMode::new(c(r, 0.0), c(r, 0.0)).unwrap().stokes();
        assert_abs_diff_eq!(d.s1, 1.0, epsilon = 1e-15);
        let circ = SinglePhotonMode::new(c(r, 0.0), c(0.0, r)).unwrap().stokes();
        assert_abs_diff_eq!(circ.s2, 1.0, epsilon = 1e-15);
    }
}
