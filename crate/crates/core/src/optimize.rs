//! Small least-squares refinement used by the grid searches.

use nalgebra::{DMatrix, DVector};

const FD_STEP: f64 = 1e-7;

/// Result of a least-squares refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg–Marquardt on `min Σ rᵢ(x)²` with a central-difference Jacobian.
pub fn levenberg_marquardt<F>(residuals: F, x0: &[f64], max_iter: usize) -> Fit
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    let mut cost = cost_of(&r);
    let mut mu = 1e-3;
    for _ in 0..max_iter {
        if cost < 1e-30 {
            break;
        }
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += FD_STEP;
            xm[j] -= FD_STEP;
            let (rp, rm) = (residuals(&xp), residuals(&xm));
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * FD_STEP);
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for d in 0..n {
                lhs[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = lhs.lu().solve(&(-&grad)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residuals(&trial);
            let ct = cost_of(&rt);
            if ct < cost {
                let small = step.norm() < 1e-15 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max));
                x = trial;
                r = rt;
                cost = ct;
                mu = (mu * 0.3).max(1e-12);
                improved = !small;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Fit { x, cost }
}
