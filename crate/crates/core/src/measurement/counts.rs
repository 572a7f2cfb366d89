use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ApparatusConfig, CoincidenceReport, CountMode, Pattern, Polarizer, SPLIT_PROBABILITY};
use crate::error::Result;
use crate::state::{QuquartState, WaveTensor};

/// Deterministic counts `(3/16)·η₁η₂η₃·N·|⟨p₁p₂p₃|Ψ⟩|²` per installation.
pub fn expected_counts(state: &QuquartState, cfg: &ApparatusConfig) -> Result<CoincidenceReport> {
    cfg.validate()?;
    let tensor = state.to_wave_tensor();
    let scale = SPLIT_PROBABILITY * cfg.efficiency_product() * cfg.n_triplets as f64;
    let counts = cfg
        .patterns()
        .into_iter()
        .map(|p| (p.label(), scale * p.pass_probability(&tensor)))
        .collect();
    Ok(CoincidenceReport::new(CountMode::Expected, counts, None))
}

/// Same as [`expected_counts`].
pub fn expected_counts_fig9(state: &QuquartState, cfg: &ApparatusConfig) -> Result<CoincidenceReport> {
    expected_counts(state, cfg)
}

fn polarizer_code(p: Polarizer) -> u64 {
    match p {
        Polarizer::H => 0,
        Polarizer::V => 1,
        Polarizer::D => 2,
        Polarizer::A => 3,
    }
}

/// Stream id of a pattern, so that its sample does not depend on which
/// other patterns are simulated alongside it.
fn stream_of(p: &Pattern) -> u64 {
    p.0.iter().fold(0, |acc, &q| acc * 4 + polarizer_code(q))
}

/// Probabilities that photons (1), (1, 2) and (1, 2, 3) all pass their polarizers.
fn sequential_pass(pattern: &Pattern, tensor: &WaveTensor) -> [f64; 3] {
    let [a, b, _] = pattern.0.map(|p| p.axis());
    let mut q1 = 0.0;
    let mut q12 = 0.0;
    for s2 in 0..2 {
        for s3 in 0..2 {
            let x: Complex64 = (0..2).map(|s1| a[s1].conj() * tensor.at(s1, s2, s3)).sum();
            q1 += x.norm_sqr();
        }
    }
    for s3 in 0..2 {
        let mut y = Complex64::new(0.0, 0.0);
        for s1 in 0..2 {
            for s2 in 0..2 {
                y += a[s1].conj() * b[s2].conj() * tensor.at(s1, s2, s3);
            }
        }
        q12 += y.norm_sqr();
    }
    [q1, q12, pattern.pass_probability(tensor)]
}

fn conditional(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn simulate_pattern(pattern: &Pattern, tensor: &WaveTensor, cfg: &ApparatusConfig) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream_of(pattern));
    let [q1, q12, q123] = sequential_pass(pattern, tensor);
    let pass = [q1.clamp(0.0, 1.0), conditional(q12, q1), conditional(q123, q12)];
    let eta = cfg.efficiencies;
    let mut split = 0u64;
    let mut clicks = 0u64;
    for _ in 0..cfg.n_triplets {
        // two routing bits per photon: channel 1 with probability 1/2, else 2 or 3
        let r = rng.next_u32();
        let mut occupied = 0u32;
        for k in 0..3 {
            let bits = (r >> (2 * k)) & 3;
            let ch = if bits & 1 == 0 { 0 } else if bits & 2 == 0 { 1 } else { 2 };
            occupied |= 1 << ch;
        }
        if occupied != 0b111 {
            continue;
        }
        split += 1;
        if (0..3).all(|k| rng.random::<f64>() < pass[k]) && (0..3).all(|k| rng.random::<f64>() < eta[k]) {
            clicks += 1;
        }
    }
    (split, clicks)
}

/// Event-by-event Monte Carlo of the three-channel apparatus.
///
/// Every installation runs `N` triplets on its own random stream derived
/// from the seed, so the report is reproducible and independent of thread count.
pub fn sample_counts(state: &QuquartState, cfg: &ApparatusConfig) -> Result<CoincidenceReport> {
    cfg.validate()?;
    let tensor = state.to_wave_tensor();
    let patterns = cfg.patterns();
    let results: Vec<(u64, u64)> = patterns.par_iter().map(|p| simulate_pattern(p, &tensor, cfg)).collect();
    let mut counts = BTreeMap::new();
    let mut split = BTreeMap::new();
    for (p, (s, c)) in patterns.iter().zip(results) {
        counts.insert(p.label(), c as f64);
        split.insert(p.label(), s);
    }
    Ok(CoincidenceReport::new(CountMode::Sampled, counts, Some(split)))
}

/// Same as [`sample_counts`].
pub fn sample_counts_fig9(state: &QuquartState, cfg: &ApparatusConfig) -> Result<CoincidenceReport> {
    sample_counts(state, cfg)
}
