//! Triple-coincidence measurements of a ququart.
//!
//! Three photons enter a cascade of two non-selective 50/50 beamsplitters
//! feeding three detector channels (routing probabilities 1/2, 1/4, 1/4), each
//! behind a linear polarizer. Only completely split triplets, one photon per
//! channel, can fire all three detectors; that happens with probability 3/16.

mod counts;
mod pbs;
mod tomography;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::WaveTensor;

pub use counts::{expected_counts, expected_counts_fig9, sample_counts, sample_counts_fig9};
pub use pbs::{fig10_counts, fig10_invert, fig10_pipeline, Fig10Counts, Fig10Result};
pub use tomography::{
    reconstruct_moduli, reconstruct_moduli_in, reconstruct_phases, PhaseCandidate, TomographyResult,
    FREE_PHASE_THRESHOLD,
};

/// Probability that a triplet is split over the three channels.
pub const SPLIT_PROBABILITY: f64 = 3.0 / 16.0;

/// A linear polarizer in front of one detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarizer {
    /// 0°
    H,
    /// 90°
    V,
    /// 45°
    D,
    /// 135°
    A,
}

impl Polarizer {
    pub fn angle_degrees(self) -> f64 {
        match self {
            Polarizer::H => 0.0,
            Polarizer::V => 90.0,
            Polarizer::D => 45.0,
            Polarizer::A => 135.0,
        }
    }

    /// Transmitted polarization `(h, v)`.
    pub fn axis(self) -> [Complex64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            Polarizer::H => [c(1.0), c(0.0)],
            Polarizer::V => [c(0.0), c(1.0)],
            Polarizer::D => [c(r), c(r)],
            Polarizer::A => [c(r), c(-r)],
        }
    }

    pub fn from_angle_degrees(deg: f64) -> Result<Self> {
        let reduced = deg.rem_euclid(180.0);
        [Polarizer::H, Polarizer::D, Polarizer::V, Polarizer::A]
            .into_iter()
            .find(|p| (p.angle_degrees() - reduced).abs() < 1e-9)
            .ok_or_else(|| Error::UnsupportedPolarizerPattern(format!("{deg}°")))
    }

    fn letter(self) -> char {
        match self {
            Polarizer::H => 'H',
            Polarizer::V => 'V',
            Polarizer::D => 'D',
            Polarizer::A => 'A',
        }
    }
}

/// Polarizers in front of channels 1, 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(pub [Polarizer; 3]);

impl Pattern {
    pub fn label(&self) -> String {
        self.0.iter().map(|p| p.letter()).collect()
    }

    /// `|⟨p₁ p₂ p₃|Ψ⟩|²`.
    pub fn pass_probability(&self, tensor: &WaveTensor) -> f64 {
        self.amplitude(tensor).norm_sqr()
    }

    fn amplitude(&self, tensor: &WaveTensor) -> Complex64 {
        let [a, b, c] = self.0.map(|p| p.axis());
        let mut sum = Complex64::new(0.0, 0.0);
        for (idx, amp) in tensor.entries().iter().enumerate() {
            sum += a[idx >> 2 & 1].conj() * b[idx >> 1 & 1].conj() * c[idx & 1].conj() * amp;
        }
        sum
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Accepts letters (`HHV`, `DDA`) or comma-separated angles in degrees (`0,0,90`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnsupportedPolarizerPattern(s.to_string());
        let t = s.trim();
        let parts: Vec<Polarizer> = if t.contains(',') {
            t.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()).and_then(Polarizer::from_angle_degrees))
                .collect::<Result<_>>()?
        } else {
            t.chars()
                .map(|ch| match ch.to_ascii_uppercase() {
                    'H' => Ok(Polarizer::H),
                    'V' => Ok(Polarizer::V),
                    'D' => Ok(Polarizer::D),
                    'A' => Ok(Polarizer::A),
                    _ => Err(bad()),
                })
                .collect::<Result<_>>()?
        };
        let arr: [Polarizer; 3] = parts.try_into().map_err(|_| bad())?;
        Ok(Pattern(arr))
    }
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which pair of orthogonal polarizer orientations is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementBasis {
    #[default]
    Hv,
    /// ±45° linear basis.
    #[serde(rename = "45")]
    Diagonal,
}

impl MeasurementBasis {
    /// The four installations `3·p, 2·p+1·q, 2·q+1·p, 3·q`, whose counts are
    /// proportional to `|C₁|², |C₂|²/3, |C₃|²/3, |C₄|²` in this basis.
    pub fn patterns(self) -> [Pattern; 4] {
        let (p, q) = match self {
            MeasurementBasis::Hv => (Polarizer::H, Polarizer::V),
            MeasurementBasis::Diagonal => (Polarizer::D, Polarizer::A),
        };
        [Pattern([p, p, p]), Pattern([p, p, q]), Pattern([q, q, p]), Pattern([q, q, q])]
    }
}

impl FromStr for MeasurementBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hv" => Ok(MeasurementBasis::Hv),
            "45" | "diagonal" | "da" => Ok(MeasurementBasis::Diagonal),
            other => Err(Error::InvalidConfig(format!("unknown basis {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApparatusConfig {
    pub n_triplets: u64,
    pub efficiencies: [f64; 3],
    /// A single installation; when absent the four patterns of `basis` are used.
    pub polarizers: Option<Pattern>,
    pub basis: MeasurementBasis,
    pub seed: u64,
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        Self { n_triplets: 16_000, efficiencies: [1.0; 3], polarizers: None, basis: MeasurementBasis::Hv, seed: 0 }
    }
}

impl ApparatusConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, eta) in self.efficiencies.iter().enumerate() {
            if !(0.0..=1.0).contains(eta) {
                return Err(Error::InvalidConfig(format!("efficiency η{} = {eta} outside [0, 1]", i + 1)));
            }
        }
        Ok(())
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        match self.polarizers {
            Some(p) => vec![p],
            None => self.basis.patterns().to_vec(),
        }
    }

    pub fn efficiency_product(&self) -> f64 {
        self.efficiencies.iter().product()
    }

    pub fn with_basis(&self, basis: MeasurementBasis) -> Self {
        Self { basis, polarizers: None, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Expected,
    Sampled,
}

/// Coincidence counts per installation.
///
/// In sampled mode every count is a whole number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub mode: CountMode,
    pub counts: BTreeMap<String, f64>,
    /// `N₁ + 3N₂ + 3N₃ + N₄` over the four patterns of the basis, when all present.
    pub sigma: Option<f64>,
    /// Sampled mode: completely split triplets per installation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_triplets: Option<BTreeMap<String, u64>>,
}

impl CoincidenceReport {
    pub(crate) fn new(mode: CountMode, counts: BTreeMap<String, f64>, split: Option<BTreeMap<String, u64>>) -> Self {
        let sigma = sigma_of(&counts, MeasurementBasis::Hv).or_else(|| sigma_of(&counts, MeasurementBasis::Diagonal));
        Self { mode, counts, sigma, split_triplets: split }
    }

    pub fn from_counts(mode: CountMode, counts: BTreeMap<String, f64>) -> Self {
        Self::new(mode, counts, None)
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.counts.get(label).copied()
    }

    /// Writes `setting,count` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "setting,count")?;
        for (k, v) in &self.counts {
            writeln!(out, "{k},{v}")?;
        }
        Ok(())
    }
}

/// `Σ = N₁ + 3N₂ + 3N₃ + N₄`.
pub fn sigma_of(counts: &BTreeMap<String, f64>, basis: MeasurementBasis) -> Option<f64> {
    let w = [1.0, 3.0, 3.0, 1.0];
    basis
        .patterns()
        .iter()
        .zip(w)
        .map(|(p, w)| counts.get(&p.label()).map(|n| w * n))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::QuquartState;

    #[test]
    fn pattern_parsing() {
        assert_eq!("hhv".parse::<Pattern>().unwrap().label(), "HHV");
        assert_eq!("0,45,135".parse::<Pattern>().unwrap().label(), "HDA");
        assert_eq!("90, 90, 180".parse::<Pattern>().unwrap().label(), "VVH");
        assert!(matches!("HHR".parse::<Pattern>(), Err(Error::UnsupportedPolarizerPattern(_))));
        assert!(matches!("0,30,90".parse::<Pattern>(), Err(Error::UnsupportedPolarizerPattern(_))));
        assert!("HH".parse::<Pattern>().is_err());
    }

    #[test]
    fn pass_probabilities_follow_configuration_weights() {
        let t = QuquartState::basis(1).to_wave_tensor();
        let p = |s: &str| s.parse::<Pattern>().unwrap().pass_probability(&t);
        assert!((p("HHV") - 1.0 / 3.0).abs() < 1e-15);
        assert!((p("HVH") - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p("VVV"), 0.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ApparatusConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.efficiencies[1] = 1.5;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ApparatusConfig = serde_json::from_str(r#"{"n_triplets": 10, "polarizers": "DDA"}"#).unwrap();
        assert_eq!(cfg.n_triplets, 10);
        assert_eq!(cfg.patterns()[0].label(), "DDA");
        assert_eq!(cfg.efficiencies, [1.0; 3]);
    }
}
