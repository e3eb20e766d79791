//! Stacked-sigmoid noise model: a small parametric family whose
//! normalized output is always a symmetric, center-peaked distribution
//! on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{NoiseGrid, TruncatedNoiseDistribution};

/// Learnable parameters of the noise model. The left half of the mass
/// vector is `P_l = softmax(r)_l / 2` with
/// `r_l = ln(A^2 + sum_j B_j^2 sigmoid(C (phi_l - F_j)))`;
/// the right half mirrors it. `C` stays fixed during training: large
/// values make each sigmoid an almost-sharp step, so the model sweeps
/// staircase shapes with jumps at the knots `F_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct NoiseModelParams {
    pub a: f64,
    pub b: Vec<f64>,
    pub c: f64,
    pub f: Vec<f64>,
}

impl NoiseModelParams {
    pub fn new(a: f64, b: Vec<f64>, c: f64, f: Vec<f64>) -> Result<Self> {
        if b.len() != f.len() || b.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "need matching non-empty sigmoid weights and knots, got {} and {}",
                b.len(),
                f.len()
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigmoid steepness must be positive and finite, got {c}"
            )));
        }
        if !a.is_finite() || !b.iter().chain(f.iter()).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("noise model parameters".into()));
        }
        Ok(Self { a, b, c, f })
    }

    /// Number of stacked sigmoids (`v`); `b` and `f` hold `v + 1`
    /// entries each.
    pub fn sigmoid_count(&self) -> usize {
        self.b.len() - 1
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Evaluates the model on `grid`, producing a mass vector that is
/// normalized, symmetric, and non-increasing away from the center by
/// construction. The privacy fields of the result are unset.
pub fn evaluate_noise_model(
    params: &NoiseModelParams,
    grid: &NoiseGrid,
) -> Result<TruncatedNoiseDistribution> {
    let n = grid.half_bins() as usize;
    let mut r = Vec::with_capacity(n);
    for l in 0..n {
        let phi = grid.points()[l];
        let inner = params.a * params.a
            + params
                .b
                .iter()
                .zip(&params.f)
                .map(|(&b, &f)| b * b * sigmoid(params.c * (phi - f)))
                .sum::<f64>();
        r.push(inner.ln());
    }

    let r_max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !r_max.is_finite() {
        return Err(Error::InvalidParameter(
            "noise model is identically zero (A and all B_j vanish)".into(),
        ));
    }

    let exps: Vec<f64> = r.iter().map(|&v| (v - r_max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let mut mass = vec![0.0; 2 * n];
    for l in 0..n {
        mass[l] = 0.5 * exps[l] / total;
        mass[2 * n - 1 - l] = mass[l];
    }

    TruncatedNoiseDistribution::new(grid.clone(), mass)
}
