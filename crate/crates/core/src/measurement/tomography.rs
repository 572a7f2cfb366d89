use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sigma_of, CoincidenceReport, MeasurementBasis};
use crate::basis::{rotate_amplitudes, BasisRotation};
use crate::error::{Error, Result};
use crate::optimize::levenberg_marquardt;
use crate::state::QuquartState;

/// Amplitudes with modulus below this have no identifiable phase.
pub const FREE_PHASE_THRESHOLD: f64 = 1e-6;
const GRID: usize = 64;
const REFINE_CANDIDATES: usize = 32;
const KEEP_FACTOR: f64 = 10.0;
const KEEP_FLOOR: f64 = 1e-12;
const SAME_PHASE: f64 = 1e-6;
/// Offset of the restarts around each root in the deflation pass.
const DEFLATION_STEP: f64 = 0.05;
const MAX_ROOTS: usize = 64;

/// `|C₁|², …, |C₄|²` from the four standard installations of the HV basis.
pub fn reconstruct_moduli(report: &CoincidenceReport) -> Result<[f64; 4]> {
    reconstruct_moduli_in(report, MeasurementBasis::Hv)
}

/// `(N₁, 3N₂, 3N₃, N₄)/Σ` for the installations of `basis`.
pub fn reconstruct_moduli_in(report: &CoincidenceReport, basis: MeasurementBasis) -> Result<[f64; 4]> {
    let patterns = basis.patterns();
    for p in &patterns {
        if report.get(&p.label()).is_none() {
            return Err(Error::InsufficientData(p.label()));
        }
    }
    let sigma = sigma_of(&report.counts, basis).expect("channels checked");
    if !(sigma > 0.0) {
        return Err(Error::EmptyData);
    }
    let w = [1.0, 3.0, 3.0, 1.0];
    Ok(std::array::from_fn(|k| w[k] * report.get(&patterns[k].label()).unwrap() / sigma))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCandidate {
    /// `φ₁..φ₄` in `(−π, π]`; the reference and free phases are 0.
    pub phases: [f64; 4],
    /// Sum of squared deviations of the turned-basis ratios.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub moduli_sq: [f64; 4],
    /// Index of the amplitude whose phase is fixed to 0.
    pub reference: usize,
    /// Phases that the data cannot determine.
    pub free: [bool; 4],
    pub underdetermined: bool,
    /// Candidates ordered by residual.
    pub candidates: Vec<PhaseCandidate>,
    pub fit_residual: f64,
}

impl TomographyResult {
    pub fn state_of(&self, candidate: &PhaseCandidate) -> Result<QuquartState> {
        QuquartState::new(std::array::from_fn(|k| {
            Complex64::from_polar(self.moduli_sq[k].max(0.0).sqrt(), candidate.phases[k])
        }))
    }

    pub fn candidate_states(&self) -> Vec<QuquartState> {
        self.candidates.iter().filter_map(|c| self.state_of(c).ok()).collect()
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

struct Model {
    moduli: [f64; 4],
    unknowns: Vec<usize>,
    target: [f64; 4],
}

impl Model {
    fn phases(&self, x: &[f64]) -> [f64; 4] {
        let mut p = [0.0; 4];
        for (&k, &v) in self.unknowns.iter().zip(x) {
            p[k] = v;
        }
        p
    }

    fn residuals(&self, x: &[f64]) -> [f64; 4] {
        let p = self.phases(x);
        let amps: [Complex64; 4] = std::array::from_fn(|k| Complex64::from_polar(self.moduli[k].sqrt(), p[k]));
        let turned = rotate_amplitudes(&amps, BasisRotation::new(std::f64::consts::FRAC_PI_4, 0.0));
        std::array::from_fn(|k| turned[k].norm_sqr() - self.target[k])
    }

    fn cost(&self, x: &[f64]) -> f64 {
        self.residuals(x).iter().map(|r| r * r).sum()
    }

    /// Residuals scaled by `Π (1 + 1/|x − xⱼ|²)` over the known roots, so
    /// that refinement cannot settle on any of them again.
    fn deflated(&self, x: &[f64], roots: &[Vec<f64>]) -> Vec<f64> {
        let m: f64 = roots
            .iter()
            .map(|r| {
                let d2: f64 = r.iter().zip(x).map(|(a, b)| wrap(b - a).powi(2)).sum();
                1.0 + 1.0 / d2.max(1e-300)
            })
            .product();
        self.residuals(x).iter().map(|v| v * m).collect()
    }
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| wrap(x - y).abs() < SAME_PHASE)
}

/// Roots closer together than the grid spacing share one grid basin. Starting
/// next to every accepted root, deflated refinement looks for further roots
/// until no new one appears.
fn deflation_pass(model: &Model, mut roots: Vec<Vec<f64>>, keep: f64) -> Vec<Vec<f64>> {
    let d = model.unknowns.len();
    let mut frontier = roots.clone();
    while let Some(root) = frontier.pop() {
        if roots.len() >= MAX_ROOTS {
            break;
        }
        let known = roots.clone();
        let starts: Vec<Vec<f64>> = (0..2 * d)
            .map(|k| {
                let mut x = root.clone();
                x[k / 2] += if k % 2 == 0 { DEFLATION_STEP } else { -DEFLATION_STEP };
                x
            })
            .collect();
        let found: Vec<Vec<f64>> = starts
            .par_iter()
            .filter_map(|x0| {
                let fit = levenberg_marquardt(|x| model.deflated(x, &known), x0, 200);
                let polished = levenberg_marquardt(|x| model.residuals(x).to_vec(), &fit.x, 50);
                let x: Vec<f64> = polished.x.iter().map(|&v| wrap(v)).collect();
                (model.cost(&x) <= keep).then_some(x)
            })
            .collect();
        for x in found {
            if !roots.iter().any(|r| same_point(r, &x)) {
                roots.push(x.clone());
                frontier.push(x);
            }
        }
    }
    roots
}

fn grid_value(i: usize) -> f64 {
    -PI + (i as f64 + 1.0) * 2.0 * PI / GRID as f64
}

fn decode(mut idx: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    for slot in out.iter_mut().rev() {
        *slot = idx % GRID;
        idx /= GRID;
    }
    out
}

fn encode(coords: &[isize]) -> usize {
    coords.iter().fold(0, |acc, &c| acc * GRID + c.rem_euclid(GRID as isize) as usize)
}

/// Grid minima that are not beaten by any of their periodic neighbours.
fn grid_minima(values: &[f64], d: usize) -> Vec<(f64, usize)> {
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(d as u32))
        .map(|mut m| {
            (0..d)
                .map(|_| {
                    let o = (m % 3) as isize - 1;
                    m /= 3;
                    o
                })
                .collect()
        })
        .filter(|o: &Vec<isize>| o.iter().any(|&v| v != 0))
        .collect();
    let mut minima: Vec<(f64, usize)> = (0..values.len())
        .into_par_iter()
        .filter_map(|idx| {
            let base: Vec<isize> = decode(idx, d).into_iter().map(|v| v as isize).collect();
            let v = values[idx];
            let beaten = offsets.iter().any(|o| {
                let n: Vec<isize> = base.iter().zip(o).map(|(b, d)| b + d).collect();
                let w = values[encode(&n)];
                w < v || (w == v && o > &vec![0; d])
            });
            (!beaten).then_some((v, idx))
        })
        .collect();
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(REFINE_CANDIDATES);
    minima
}

/// Phases from turned-basis counts, given the moduli.
///
/// The fit matches `|C_k^{45°}|²` predicted from candidate phases against the
/// measured ±45° ratios: a `64^d` grid seeds least-squares refinement, a
/// deflation pass collects roots the grid cannot separate, and all minima
/// within a factor of ten of the best are returned. The data are
/// invariant under `φ → −φ`, so conjugate candidates always come in pairs.
pub fn reconstruct_phases(
    basis_h_report: &CoincidenceReport,
    basis45_report: &CoincidenceReport,
    moduli: [f64; 4],
) -> Result<TomographyResult> {
    reconstruct_moduli_in(basis_h_report, MeasurementBasis::Hv)?;
    let target = reconstruct_moduli_in(basis45_report, MeasurementBasis::Diagonal)?;
    let moduli = moduli.map(|m| m.max(0.0));
    let present: Vec<usize> = (0..4).filter(|&k| moduli[k].sqrt() >= FREE_PHASE_THRESHOLD).collect();
    let Some(&reference) = present.first() else {
        return Err(Error::EmptyData);
    };
    let free: [bool; 4] = std::array::from_fn(|k| !present.contains(&k));
    let model = Model { moduli, unknowns: present[1..].to_vec(), target };
    let d = model.unknowns.len();

    let mut candidates: Vec<PhaseCandidate> = if d == 0 {
        vec![PhaseCandidate { phases: [0.0; 4], residual: model.cost(&[]) }]
    } else {
        let values: Vec<f64> = (0..GRID.pow(d as u32))
            .into_par_iter()
            .map(|idx| {
                let x: Vec<f64> = decode(idx, d).into_iter().map(grid_value).collect();
                model.cost(&x)
            })
            .collect();
        grid_minima(&values, d)
            .par_iter()
            .map(|&(_, idx)| {
                let x0: Vec<f64> = decode(idx, d).into_iter().map(grid_value).collect();
                let fit = levenberg_marquardt(|x| model.residuals(x).to_vec(), &x0, 200);
                let x: Vec<f64> = fit.x.iter().map(|&v| wrap(v)).collect();
                PhaseCandidate { phases: model.phases(&x), residual: model.cost(&x) }
            })
            .collect()
    };

    candidates.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let best = candidates[0].residual;
    let keep = (KEEP_FACTOR * best).max(KEEP_FLOOR);
    if d > 0 {
        let unknowns = |c: &PhaseCandidate| model.unknowns.iter().map(|&k| c.phases[k]).collect::<Vec<f64>>();
        let mut seeds: Vec<Vec<f64>> = Vec::new();
        for c in candidates.iter().filter(|c| c.residual <= keep) {
            let x = unknowns(c);
            if !seeds.iter().any(|s| same_point(s, &x)) {
                seeds.push(x);
            }
        }
        let n_seeds = seeds.len();
        for x in deflation_pass(&model, seeds, keep).into_iter().skip(n_seeds) {
            candidates.push(PhaseCandidate { phases: model.phases(&x), residual: model.cost(&x) });
        }
        candidates.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    }
    let mut kept: Vec<PhaseCandidate> = Vec::new();
    for c in candidates.into_iter().filter(|c| c.residual <= keep) {
        let dup = kept
            .iter()
            .any(|k| (0..4).all(|i| wrap(k.phases[i] - c.phases[i]).abs() < SAME_PHASE));
        if !dup {
            kept.push(c);
        }
    }
    Ok(TomographyResult {
        moduli_sq: moduli,
        reference,
        free,
        underdetermined: free.iter().any(|&f| f),
        candidates: kept,
        fit_residual: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{expected_counts, ApparatusConfig};
    use std::collections::BTreeMap;

    fn reports(s: &QuquartState) -> (CoincidenceReport, CoincidenceReport) {
        let cfg = ApparatusConfig::default();
        (expected_counts(s, &cfg).unwrap(), expected_counts(s, &cfg.with_basis(MeasurementBasis::Diagonal)).unwrap())
    }

    fn report(values: [f64; 4]) -> CoincidenceReport {
        let counts: BTreeMap<String, f64> =
            ["HHH", "HHV", "VVH", "VVV"].iter().map(|s| s.to_string()).zip(values).collect();
        CoincidenceReport::from_counts(super::super::CountMode::Expected, counts)
    }

    #[test]
    fn moduli_examples() {
        assert_eq!(reconstruct_moduli(&report([300.0, 100.0, 100.0, 300.0])).unwrap(), [0.25; 4]);
        assert_eq!(reconstruct_moduli(&report([3000.0, 0.0, 0.0, 0.0])).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(reconstruct_moduli(&report([0.0; 4])), Err(Error::EmptyData));
        let mut missing = report([1.0; 4]);
        missing.counts.remove("VVH");
        assert_eq!(reconstruct_moduli(&missing), Err(Error::InsufficientData("VVH".into())));
    }

    fn has_candidate(res: &TomographyResult, want: [f64; 4]) -> bool {
        res.candidates.iter().any(|c| (0..4).all(|k| wrap(c.phases[k] - want[k]).abs() < 1e-6))
    }

    #[test]
    fn uniform_state_phases() {
        let s = QuquartState::from_real([0.5; 4]).unwrap();
        let (h, d) = reports(&s);
        let res = reconstruct_phases(&h, &d, reconstruct_moduli(&h).unwrap()).unwrap();
        assert!(has_candidate(&res, [0.0; 4]));
        assert!(res.fit_residual < 1e-20);
    }

    #[test]
    fn ladder_state_phases() {
        let h = |re: f64, im: f64| Complex64::new(re, im);
        let s = QuquartState::new([h(0.5, 0.0), h(0.0, 0.5), h(-0.5, 0.0), h(0.0, -0.5)]).unwrap();
        let (hr, dr) = reports(&s);
        let res = reconstruct_phases(&hr, &dr, reconstruct_moduli(&hr).unwrap()).unwrap();
        assert!(has_candidate(&res, [0.0, PI / 2.0, PI, -PI / 2.0]));
        assert!(has_candidate(&res, [0.0, -PI / 2.0, PI, PI / 2.0]));
    }

    #[test]
    fn missing_amplitude_is_free() {
        let s = QuquartState::from_real([0.6, 0.0, 0.48, 0.64]).unwrap();
        let (h, d) = reports(&s);
        let res = reconstruct_phases(&h, &d, reconstruct_moduli(&h).unwrap()).unwrap();
        assert_eq!(res.free, [false, true, false, false]);
        assert!(res.underdetermined);
        assert!(res.candidates.iter().all(|c| c.phases[1] == 0.0));
        assert!(has_candidate(&res, [0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn nearby_roots_are_separated() {
        // two exact solutions about 0.02 rad apart, inside one grid cell
        let s = QuquartState::new([
            Complex64::new(-0.0761933743281391, 0.16701691132993174),
            Complex64::new(-0.26236828961116865, 0.20561932992876994),
            Complex64::new(0.4862862032000091, -0.45177649578638895),
            Complex64::new(0.4976932335958405, -0.4085445685230215),
        ])
        .unwrap();
        let (h, d) = reports(&s);
        let res = reconstruct_phases(&h, &d, reconstruct_moduli(&h).unwrap()).unwrap();
        assert!(res.candidate_states().iter().any(|t| t.max_deviation_up_to_phase(&s) < 1e-9));
        assert!(res.candidates.len() >= 8);
    }
}
