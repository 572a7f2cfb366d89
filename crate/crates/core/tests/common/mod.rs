//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here calls into the closed forms of the library: tensors are built
//! by summing permutations of product states, reductions by explicit index
//! loops and spectra by a general Hermitian eigensolver.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Product string of `k` V photons after `3 − k` H photons, as bits (V = 1).
fn product_bits(k: usize) -> [usize; 3] {
    std::array::from_fn(|i| usize::from(i >= 3 - k))
}

fn index(bits: [usize; 3]) -> usize {
    bits[0] * 4 + bits[1] * 2 + bits[2]
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Normalized symmetric state with `k` vertical photons, from the sum over
/// all permutations of one product string.
pub fn symmetric_basis(k: usize) -> [C; 8] {
    let bits = product_bits(k);
    let mut out = [c(0.0, 0.0); 8];
    for p in PERMS {
        out[index([bits[p[0]], bits[p[1]], bits[p[2]]])] += c(1.0, 0.0);
    }
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    out.map(|z| z / norm)
}

pub fn tensor_of(amps: &[C; 4]) -> [C; 8] {
    let mut out = [c(0.0, 0.0); 8];
    for (k, a) in amps.iter().enumerate() {
        for (o, b) in out.iter_mut().zip(symmetric_basis(k)) {
            *o += a * b;
        }
    }
    out
}

/// Projections of a tensor onto the symmetric basis.
pub fn amplitudes_of(t: &[C; 8]) -> [C; 4] {
    std::array::from_fn(|k| symmetric_basis(k).iter().zip(t).map(|(b, x)| b.conj() * x).sum())
}

pub fn density(t: &[C; 8]) -> DMatrix<C> {
    DMatrix::from_fn(8, 8, |i, j| t[i] * t[j].conj())
}

/// Keeps the listed photons (0-based, in the given order) of an `n`-photon matrix.
pub fn reduce(rho: &DMatrix<C>, n: usize, keep: &[usize]) -> DMatrix<C> {
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let dim = 1 << keep.len();
    let bit = |idx: usize, pos: usize, len: usize| (idx >> (len - 1 - pos)) & 1;
    let full = |kept: usize, gone: usize| {
        let mut s = vec![0usize; n];
        for (pos, &k) in keep.iter().enumerate() {
            s[k] = bit(kept, pos, keep.len());
        }
        for (pos, &k) in traced.iter().enumerate() {
            s[k] = bit(gone, pos, traced.len());
        }
        s.iter().fold(0, |acc, b| acc * 2 + b)
    };
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            for g in 0..1usize << traced.len() {
                out[(r, col)] += rho[(full(r, g), full(col, g))];
            }
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `Tr(ρ σ⃗)` with the Pauli matrices ordered `(σ_x, σ_y, σ_z)`.
pub fn stokes_of(rho: &DMatrix<C>) -> [f64; 3] {
    let r = Matrix2::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]);
    let paulis = [
        Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    ];
    paulis.map(|p| (r * p).trace().re)
}

/// One-photon map for a basis change: V picks up `e^{−iφ}`, then
/// `H → c·(+) − s·(−)` and `V → s·(+) + c·(−)`.
pub fn one_photon_unitary(theta: f64, phi: f64) -> [[C; 2]; 2] {
    let (s, co) = theta.sin_cos();
    let e = C::from_polar(1.0, -phi);
    [[c(co, 0.0), e * s], [c(-s, 0.0), e * co]]
}

/// Applies the same one-photon map to each photon of a tensor.
pub fn rotate_tensor(t: &[C; 8], u: [[C; 2]; 2]) -> [C; 8] {
    let mut out = [c(0.0, 0.0); 8];
    for a in 0..8 {
        let (a1, a2, a3) = (a >> 2 & 1, a >> 1 & 1, a & 1);
        for b in 0..8 {
            let (b1, b2, b3) = (b >> 2 & 1, b >> 1 & 1, b & 1);
            out[a] += u[a1][b1] * u[a2][b2] * u[a3][b3] * t[b];
        }
    }
    out
}

pub fn rotate_oracle(amps: &[C; 4], theta: f64, phi: f64) -> [C; 4] {
    amplitudes_of(&rotate_tensor(&tensor_of(amps), one_photon_unitary(theta, phi)))
}

/// Amplitudes uniform in the unit box, then normalized.
pub fn random_amplitudes<R: Rng>(rng: &mut R) -> [C; 4] {
    loop {
        let raw: [C; 4] = std::array::from_fn(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.1 {
            return raw.map(|z| z / norm);
        }
    }
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max_k |a_k − e^{iγ} b_k|` for the best global phase `γ`.
pub fn diff_up_to_phase(a: &[C], b: &[C]) -> f64 {
    let overlap: C = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
}

pub fn binary_entropy(l: f64) -> f64 {
    [l, 1.0 - l].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

pub fn mat_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
