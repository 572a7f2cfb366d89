//! Density matrices, partial traces and the scalar entanglement and
//! polarization metrics of a ququart.
//!
//! Metrics are evaluated from closed forms in the four amplitudes. The full
//! 8×8 density matrix and the generic partial trace are an independent route
//! to the same quantities and are kept for cross-checking.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::QuquartState;
use crate::stokes::StokesVector;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Density matrix over one, two or three photon polarization variables.
///
/// Row and column indices are the row-major binary encoding of the
/// variables, most significant variable first, `H = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_photons: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = entries.nrows();
        if entries.ncols() != dim || !matches!(dim, 2 | 4 | 8) {
            return Err(Error::BadDimension(dim));
        }
        Ok(Self { n_photons: dim.trailing_zeros() as usize, entries })
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `‖M − M†‖∞`, entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.entries.adjoint();
        (&self.entries - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order from a general Hermitian eigensolver.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.entries.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// Largest entrywise difference to another matrix of the same size.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The 2×2 entries of a single-photon matrix.
    pub fn as_2x2(&self) -> Option<[[Complex64; 2]; 2]> {
        (self.dim() == 2).then(|| {
            [
                [self.entries[(0, 0)], self.entries[(0, 1)]],
                [self.entries[(1, 0)], self.entries[(1, 1)]],
            ]
        })
    }
}

/// `ρ = |Ψ⟩⟨Ψ|` on the 8-dimensional three-photon space.
pub fn density_matrix(state: &QuquartState) -> DensityMatrix {
    let tensor = state.to_wave_tensor();
    let psi = tensor.entries();
    let entries = DMatrix::from_fn(8, 8, |i, j| psi[i] * psi[j].conj());
    DensityMatrix { n_photons: 3, entries }
}

/// Traces out the listed photon variables (1-based).
pub fn partial_trace(rho: &DensityMatrix, traced: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_photons;
    let bad = || Error::BadIndexSet { indices: traced.to_vec(), n_photons: n };
    if traced.is_empty() || traced.len() >= n {
        return Err(bad());
    }
    let mut mask = vec![false; n];
    for &t in traced {
        if t == 0 || t > n || mask[t - 1] {
            return Err(bad());
        }
        mask[t - 1] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&k| !mask[k]).collect();
    let gone: Vec<usize> = (0..n).filter(|&k| mask[k]).collect();

    // bit position of variable k (0-based, most significant first)
    let shift = |k: usize| n - 1 - k;
    let assemble = |kept_bits: usize, gone_bits: usize| -> usize {
        let mut idx = 0;
        for (pos, &k) in kept.iter().enumerate() {
            let bit = kept_bits >> (kept.len() - 1 - pos) & 1;
            idx |= bit << shift(k);
        }
        for (pos, &k) in gone.iter().enumerate() {
            let bit = gone_bits >> (gone.len() - 1 - pos) & 1;
            idx |= bit << shift(k);
        }
        idx
    };

    let dim = 1 << kept.len();
    let entries = DMatrix::from_fn(dim, dim, |r, c| {
        (0..1usize << gone.len())
            .map(|g| rho.entries[(assemble(r, g), assemble(c, g))])
            .sum()
    });
    Ok(DensityMatrix { n_photons: kept.len(), entries })
}

/// Twice-reduced single-photon matrix `ρ_rr` from the amplitudes directly.
pub fn rho_rr_closed_form(state: &QuquartState) -> DensityMatrix {
    let m = rho_rr_entries(state);
    DensityMatrix {
        n_photons: 1,
        entries: DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]),
    }
}

pub(crate) fn rho_rr_entries(state: &QuquartState) -> [[Complex64; 2]; 2] {
    let [c1, c2, c3, c4] = *state.amplitudes();
    let [p1, p2, p3, p4] = state.moduli_sq();
    let hh = p1 + 2.0 * p2 / 3.0 + p3 / 3.0;
    let vv = p2 / 3.0 + 2.0 * p3 / 3.0 + p4;
    let hv = (c1 * c2.conj() + c3 * c4.conj()) / SQRT3 + 2.0 * c2 * c3.conj() / 3.0;
    [
        [Complex64::new(hh, 0.0), hv],
        [hv.conj(), Complex64::new(vv, 0.0)],
    ]
}

/// Eigenvalues of the reduced states and the metrics derived from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSpectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Generalized concurrence `2√(λ₊λ₋)`.
    pub c_g: f64,
    /// Von Neumann entropy of `ρ_rr`, in bits.
    pub entropy: f64,
    /// Schmidt number `1/(λ₊² + λ₋²)`.
    pub schmidt_k: f64,
    /// Degree of polarization per photon, `λ₊ − λ₋`.
    pub polarization: f64,
}

/// Generalized concurrence in closed form.
pub fn generalized_concurrence(state: &QuquartState) -> f64 {
    let [c1, c2, c3, c4] = *state.amplitudes();
    let a = c1 * c3 / SQRT3 - c2 * c2 / 3.0;
    let b = c1 * c4 - c2 * c3 / 3.0;
    let d = c4 * c2 / SQRT3 - c3 * c3 / 3.0;
    let cg = 2.0 * (2.0 * a.norm_sqr() + b.norm_sqr() + 2.0 * d.norm_sqr()).sqrt();
    cg.clamp(0.0, 1.0)
}

pub fn spectrum(state: &QuquartState) -> ReducedSpectrum {
    // λ₊ − λ₋ = |S⃗| is taken from the Stokes vector, since √(1 − C_g²) loses
    // half the digits near maximal entanglement
    let polarization = stokes_vector(state).norm().min(1.0);
    spectrum_from_parts(generalized_concurrence(state), polarization)
}

fn spectrum_from_parts(c_g: f64, root: f64) -> ReducedSpectrum {
    let lambda_plus = 0.5 * (1.0 + root);
    // avoids the cancellation in ½(1 − root) for weakly entangled states
    let lambda_minus = c_g * c_g / (4.0 * lambda_plus);
    ReducedSpectrum {
        lambda_plus,
        lambda_minus,
        c_g,
        entropy: binary_entropy(lambda_plus, lambda_minus),
        schmidt_k: 1.0 / (lambda_plus * lambda_plus + lambda_minus * lambda_minus),
        polarization: lambda_plus - lambda_minus,
    }
}

fn binary_entropy(a: f64, b: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(a) + term(b)
}

/// Wootters concurrence `|⟨Ψ|σ_y⊗σ_y⊗σ_y|Ψ*⟩|`.
pub fn wootters_concurrence(state: &QuquartState) -> f64 {
    let tensor = state.to_wave_tensor();
    let psi = tensor.entries();
    let mut overlap = Complex64::new(0.0, 0.0);
    for (idx, amp) in psi.iter().enumerate() {
        // σ_y|H⟩ = i|V⟩, σ_y|V⟩ = −i|H⟩
        let flipped = idx ^ 0b111;
        let ones = flipped.count_ones() as i32;
        let factor = Complex64::new(0.0, 1.0).powi(3 - ones) * Complex64::new(0.0, -1.0).powi(ones);
        overlap += amp.conj() * factor * psi[flipped].conj();
    }
    overlap.norm().min(1.0)
}

/// Per-photon Stokes vector in closed form.
pub fn stokes_vector(state: &QuquartState) -> StokesVector {
    let m = rho_rr_entries(state);
    StokesVector::new(2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re)
}

/// Stokes vector of the three photons together, three times the per-photon one.
pub fn total_stokes(state: &QuquartState) -> StokesVector {
    3.0 * stokes_vector(state)
}

/// Everything reported by the `metrics` command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c_g: f64,
    pub entropy: f64,
    pub schmidt_k: f64,
    pub polarization: f64,
    pub stokes: [f64; 3],
}

pub fn metrics(state: &QuquartState) -> MetricsReport {
    let s = spectrum(state);
    MetricsReport {
        lambda_plus: s.lambda_plus,
        lambda_minus: s.lambda_minus,
        c_g: s.c_g,
        entropy: s.entropy,
        schmidt_k: s.schmidt_k,
        polarization: s.polarization,
        stokes: stokes_vector(state).to_array(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn real(a: [f64; 4]) -> QuquartState {
        QuquartState::from_real(a).unwrap()
    }

    #[test]
    fn pure_basis_density() {
        let rho = density_matrix(&QuquartState::basis(0));
        assert_eq!(rho.get(0, 0), Complex64::new(1.0, 0.0));
        let nonzero = rho.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn ghz_like_coherence() {
        let rho = density_matrix(&real([1.0, 0.0, 0.0, 1.0]));
        assert_abs_diff_eq!(rho.get(0, 7).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_of_basis_states() {
        let r = partial_trace(&density_matrix(&QuquartState::basis(0)), &[2, 3]).unwrap();
        assert_eq!(r.get(0, 0).re, 1.0);
        assert_eq!(r.get(1, 1).re, 0.0);

        let r = partial_trace(&density_matrix(&QuquartState::basis(1)), &[2, 3]).unwrap();
        assert_abs_diff_eq!(r.get(0, 0).re, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.get(1, 1).re, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.get(0, 1).norm(), 0.0);
    }

    #[test]
    fn partial_trace_in_two_steps() {
        let s = real([0.4, -0.3, 0.7, 0.2]);
        let rho = density_matrix(&s);
        let once = partial_trace(&rho, &[3]).unwrap();
        assert_eq!(once.dim(), 4);
        let twice = partial_trace(&once, &[2]).unwrap();
        let direct = partial_trace(&rho, &[2, 3]).unwrap();
        assert!(twice.max_diff(&direct) < 1e-15);
    }

    #[test]
    fn bad_index_sets() {
        let rho = density_matrix(&QuquartState::basis(2));
        for bad in [&[][..], &[0], &[4], &[2, 2], &[1, 2, 3]] {
            assert!(matches!(partial_trace(&rho, bad), Err(Error::BadIndexSet { .. })), "{bad:?}");
        }
        let r = partial_trace(&rho, &[1]).unwrap();
        assert!(partial_trace(&r, &[3]).is_err());
        assert!(partial_trace(&r, &[1, 2]).is_err());
    }

    #[test]
    fn closed_form_rho_rr_examples() {
        let m = rho_rr_entries(&QuquartState::basis(1));
        assert_abs_diff_eq!(m[0][0].re, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1].re, 1.0 / 3.0, epsilon = 1e-15);

        let m = rho_rr_entries(&real([1.0, 0.0, 0.0, 1.0]));
        assert_abs_diff_eq!(m[0][0].re, 0.5, epsilon = 1e-15);
        assert_eq!(m[0][1].norm(), 0.0);

        let t = FRAC_PI_6;
        let m = rho_rr_entries(&real([0.0, t.cos(), t.sin(), 0.0]));
        let (c2, s2) = ((2.0 * t).cos(), (2.0 * t).sin());
        assert_abs_diff_eq!(m[0][0].re, (3.0 + c2) / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1].re, (3.0 - c2) / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[0][1].re, 2.0 * s2 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(FRAC_PI_3, 2.0 * t, epsilon = 1e-15);
    }

    #[test]
    fn maximally_entangled_spectrum() {
        let s = spectrum(&real([1.0, 0.0, 0.0, 1.0]));
        assert_abs_diff_eq!(s.lambda_plus, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_minus, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.c_g, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.entropy, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.schmidt_k, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.polarization, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn family23_spectra() {
        let s = spectrum(&real([0.0, FRAC_PI_4.cos(), FRAC_PI_4.sin(), 0.0]));
        assert_abs_diff_eq!(s.lambda_plus, 5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_minus, 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.polarization, 2.0 / 3.0, epsilon = 1e-12);

        let s = spectrum(&QuquartState::basis(1));
        assert_abs_diff_eq!(s.c_g, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.polarization, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.schmidt_k, 1.8, epsilon = 1e-12);
        let h = -(2f64 / 3.0) * (2f64 / 3.0).log2() - (1f64 / 3.0) * (1f64 / 3.0).log2();
        assert_abs_diff_eq!(s.entropy, h, epsilon = 1e-12);
        assert_abs_diff_eq!(s.entropy, 0.918_296, epsilon = 1e-6);
    }

    #[test]
    fn product_state_entropy_is_zero() {
        let s = spectrum(&QuquartState::basis(3));
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.lambda_minus, 0.0);
        assert_eq!(s.schmidt_k, 1.0);
    }

    #[test]
    fn wootters_vanishes_on_examples() {
        assert!(wootters_concurrence(&real([1.0, 0.0, 0.0, 1.0])) < 1e-15);
        assert!(wootters_concurrence(&QuquartState::basis(0)) < 1e-15);
    }

    #[test]
    fn stokes_examples() {
        let v = stokes_vector(&QuquartState::basis(1));
        assert!(v.max_diff(&StokesVector::new(0.0, 0.0, 1.0 / 3.0)) < 1e-15);

        let v = stokes_vector(&real([0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]));
        assert!(v.max_diff(&StokesVector::new(2.0 / 3.0, 0.0, 0.0)) < 1e-15);

        let t = FRAC_PI_6;
        let v = stokes_vector(&real([0.0, t.cos(), t.sin(), 0.0]));
        assert!(v.max_diff(&StokesVector::new(3f64.sqrt() / 3.0, 0.0, 1.0 / 6.0)) < 1e-15);
        assert_abs_diff_eq!(v.norm(), 13f64.sqrt() / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.norm(), 0.600_925, epsilon = 1e-6);
        assert!(total_stokes(&real([0.0, t.cos(), t.sin(), 0.0])).max_diff(&(3.0 * v)) < 1e-15);
    }

    #[test]
    fn eigenvalues_of_reduced_two_photon_matrix() {
        let s = real([0.1, 0.5, -0.6, 0.3]);
        let r = partial_trace(&density_matrix(&s), &[1]).unwrap();
        let ev = r.eigenvalues();
        let sp = spectrum(&s);
        assert!(ev[0].abs() < 1e-12 && ev[1].abs() < 1e-12);
        assert_abs_diff_eq!(ev[2], sp.lambda_minus, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[3], sp.lambda_plus, epsilon = 1e-12);
    }
}
