//! Entanglement maps on the faces of the amplitude tetrahedron.
//!
//! With one amplitude set to zero and the other three real and positive,
//! `C_i² = h_i / Σh` identifies a state with a point of an equilateral
//! triangle given by its distances `h_i` to the three sides.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reductions::spectrum;
use crate::state::QuquartState;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Triangle vertices; vertex `i` lies opposite side `i`.
pub const VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3_2]];

/// Distances to the three sides, up to a common scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearPoint {
    pub h: [f64; 3],
}

impl TrilinearPoint {
    pub fn new(h: [f64; 3]) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(format!("trilinear coordinates must be non-negative, got {h:?}")));
        }
        let sum: f64 = h.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::DegeneratePoint(sum));
        }
        Ok(Self { h })
    }

    /// `h_i / Σh`.
    pub fn weights(&self) -> [f64; 3] {
        let sum: f64 = self.h.iter().sum();
        self.h.map(|v| v / sum)
    }

    /// Position inside the unit triangle.
    pub fn cartesian(&self) -> [f64; 2] {
        let w = self.weights();
        let x = (0..3).map(|i| w[i] * VERTICES[i][0]).sum();
        let y = (0..3).map(|i| w[i] * VERTICES[i][1]).sum();
        [x, y]
    }
}

fn tri_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// Weights of a point from the areas of the three sub-triangles it cuts out.
pub fn area_weights(p: [f64; 2]) -> [f64; 3] {
    let [v1, v2, v3] = VERTICES;
    let total = tri_area(v1, v2, v3);
    [tri_area(p, v2, v3) / total, tri_area(p, v3, v1) / total, tri_area(p, v1, v2) / total]
}

/// Perpendicular distances from `p` to the sides opposite each vertex.
pub fn side_distances(p: [f64; 2]) -> [f64; 3] {
    let dist = |a: [f64; 2], b: [f64; 2]| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / dx.hypot(dy)
    };
    let [v1, v2, v3] = VERTICES;
    [dist(v2, v3), dist(v3, v1), dist(v1, v2)]
}

/// The state with amplitude `zero_index` (1-based) zero and the others
/// `√(h_i/Σh)` in ascending slot order.
pub fn point_to_state(point: &TrilinearPoint, zero_index: usize) -> Result<QuquartState> {
    let slots = face_slots(zero_index)?;
    let w = point.weights();
    let mut amps = [0.0; 4];
    for (slot, weight) in slots.iter().zip(w) {
        amps[*slot] = weight.sqrt();
    }
    QuquartState::from_real(amps)
}

/// Zero-based amplitude slots of a face, ascending.
pub fn face_slots(zero_index: usize) -> Result<[usize; 3]> {
    if !(1..=4).contains(&zero_index) {
        return Err(Error::InvalidConfig(format!("zero index {zero_index} not in 1..=4")));
    }
    let mut out = [0; 3];
    let mut n = 0;
    for k in 0..4 {
        if k + 1 != zero_index {
            out[n] = k;
            n += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceSample {
    pub h: [f64; 3],
    pub x: f64,
    pub y: f64,
    pub entropy: f64,
    pub c_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceMap {
    pub zero_index: usize,
    pub grid_resolution: usize,
    pub samples: Vec<FaceSample>,
}

/// Lattice points `(i, j, k)/n` with `i + j + k = n`, `i` slowest.
pub fn lattice(resolution: usize) -> Vec<[f64; 3]> {
    let n = resolution as f64;
    let mut out = Vec::with_capacity((resolution + 1) * (resolution + 2) / 2);
    for i in 0..=resolution {
        for j in 0..=resolution - i {
            let k = resolution - i - j;
            out.push([i as f64 / n, j as f64 / n, k as f64 / n]);
        }
    }
    out
}

pub fn sample_point(point: &TrilinearPoint, zero_index: usize) -> Result<FaceSample> {
    let s = point_to_state(point, zero_index)?;
    let spec = spectrum(&s);
    let [x, y] = point.cartesian();
    Ok(FaceSample { h: point.h, x, y, entropy: spec.entropy, c_g: spec.c_g })
}

/// Entropy and `C_g` over a uniform barycentric grid of one face.
pub fn face_entropy_map(zero_index: usize, resolution: usize) -> Result<FaceMap> {
    if resolution < 2 {
        return Err(Error::BadRange(format!("resolution {resolution} < 2")));
    }
    face_slots(zero_index)?;
    let samples = lattice(resolution)
        .into_par_iter()
        .map(|h| sample_point(&TrilinearPoint::new(h)?, zero_index))
        .collect::<Result<Vec<_>>>()?;
    Ok(FaceMap { zero_index, grid_resolution: resolution, samples })
}

/// Writes `h1,h2,h3,x,y,entropy,c_g` rows.
pub fn write_face_csv<W: Write>(map: &FaceMap, mut out: W) -> std::io::Result<()> {
    writeln!(out, "h1,h2,h3,x,y,entropy,c_g")?;
    for s in &map.samples {
        writeln!(out, "{},{},{},{},{},{},{}", s.h[0], s.h[1], s.h[2], s.x, s.y, s.entropy, s.c_g)?;
    }
    Ok(())
}
