//! On-disk JSON format for learned noise distributions.
//!
//! Writers emit `phi` ascending with reals rounded to 12 significant
//! digits; readers re-validate every distribution invariant and
//! recompute `delta`, rejecting files whose stored value drifts by
//! more than `1e-9`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigfig::round_sig12;

use super::{NoiseGrid, NoiseModelParams, OptimizerConfig, TruncatedNoiseDistribution};

/// Serialized form of a learned distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseFile {
    pub epsilon: f64,
    pub sensitivity: f64,
    pub d: f64,
    #[serde(rename = "N")]
    pub bins: u32,
    pub phi: Vec<f64>,
    pub p: Vec<f64>,
    pub delta: f64,
    pub params: NoiseModelParams,
    pub seed: u64,
    pub config: OptimizerConfig,
}

/// A noise file decoded back into library types.
#[derive(Debug, Clone)]
pub struct LoadedNoise {
    pub distribution: TruncatedNoiseDistribution,
    pub params: NoiseModelParams,
    pub seed: u64,
    pub config: OptimizerConfig,
}

impl NoiseFile {
    pub fn from_parts(
        dist: &TruncatedNoiseDistribution,
        params: &NoiseModelParams,
        config: &OptimizerConfig,
    ) -> Self {
        let round_vec = |xs: &[f64]| xs.iter().map(|&x| round_sig12(x)).collect();
        Self {
            epsilon: round_sig12(dist.epsilon()),
            sensitivity: round_sig12(dist.sensitivity()),
            d: round_sig12(dist.grid().range()),
            bins: dist.grid().half_bins(),
            phi: round_vec(dist.grid().points()),
            p: round_vec(dist.mass()),
            delta: round_sig12(dist.delta()),
            params: NoiseModelParams {
                a: round_sig12(params.a),
                b: params.b.iter().map(|&x| round_sig12(x)).collect(),
                c: round_sig12(params.c),
                f: params.f.iter().map(|&x| round_sig12(x)).collect(),
            },
            seed: config.seed,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates the grid layout, the distribution invariants, and the
    /// stored `delta` before handing back library types.
    pub fn decode(&self) -> Result<LoadedNoise> {
        let grid = NoiseGrid::new(self.d, self.bins)?;
        if self.phi.len() != grid.len() || self.p.len() != grid.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} grid points, file has {} phi and {} p entries",
                grid.len(),
                self.phi.len(),
                self.p.len()
            )));
        }
        for (stored, expected) in self.phi.iter().zip(grid.points()) {
            if (stored - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::InvalidDistribution(format!(
                    "phi value {stored} does not match the grid point {expected}"
                )));
            }
        }
        let dist = TruncatedNoiseDistribution::new(grid, self.p.clone())?
            .with_privacy(self.epsilon, self.sensitivity)?;
        if (dist.delta() - self.delta).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "stored delta {} disagrees with recomputed delta {}",
                self.delta,
                dist.delta()
            )));
        }
        let params = NoiseModelParams::new(
            self.params.a,
            self.params.b.clone(),
            self.params.c,
            self.params.f.clone(),
        )?;
        Ok(LoadedNoise {
            distribution: dist,
            params,
            seed: self.seed,
            config: self.config.clone(),
        })
    }
}

pub fn write(
    path: &Path,
    dist: &TruncatedNoiseDistribution,
    params: &NoiseModelParams,
    config: &OptimizerConfig,
) -> Result<()> {
    let file = NoiseFile::from_parts(dist, params, config);
    fs::write(path, file.to_json()? + "\n")?;
    Ok(())
}

pub fn read(path: &Path) -> Result<LoadedNoise> {
    let text = fs::read_to_string(path)?;
    let file: NoiseFile = serde_json::from_str(&text)?;
    file.decode()
}
