//! `(epsilon, d)` sweeps: per cell, learn a distribution, run
//! Monte-Carlo estimation with it, and pair it with a truncated-Laplace
//! run calibrated to the same `(epsilon, delta)`.

use crate::error::{Error, Result};
use crate::noise::{laplace_range, optimize_distribution, NoiseGrid, OptimizerConfig};

use super::{monte_carlo, DpSettings, NoiseSource, SimConfig, Summary};

/// One sweep cell's results.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub epsilon: f64,
    pub d: f64,
    pub delta: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub containment_rate: f64,
    /// Truncated-Laplace range needed for the same `(epsilon, delta)`.
    pub laplace_range: f64,
    pub laplace_mean_error: f64,
    /// Per-run mean errors of the optimal-noise runs.
    pub run_means: Vec<f64>,
}

/// Sweep output, cells in row-major `(epsilon, d)` order.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub ds: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, eps_idx: usize, d_idx: usize) -> &SweepCell {
        &self.cells[eps_idx * self.ds.len() + d_idx]
    }
}

/// Grid resolution for a cell: the smallest `N` whose step `d / N`
/// divides the sensitivity.
pub fn bins_for(d: f64, s: f64) -> Result<u32> {
    if !(d > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(
            "sweep needs positive range and sensitivity".into(),
        ));
    }
    let base = d / s;
    for mult in 1..=1024u32 {
        let n = (base * mult as f64).round();
        if n >= 1.0 && n <= u32::MAX as f64 {
            let n = n as u32;
            if NoiseGrid::new(d, n)
                .and_then(|g| g.sensitivity_shift(s))
                .is_ok()
            {
                return Ok(n);
            }
        }
    }
    Err(Error::MisalignedSensitivity {
        sensitivity: s,
        step: d,
        suggested_bins: 1,
    })
}

/// Learns the noise distribution for one `(epsilon, d)` cell with the
/// sweep's derived optimizer settings.
pub fn optimize_cell(
    epsilon: f64,
    d: f64,
    sensitivity: f64,
    epochs: u32,
    base_seed: u64,
    cell_index: u64,
) -> Result<(crate::noise::TruncatedNoiseDistribution, u32)> {
    let bins = bins_for(d, sensitivity)?;
    let mut opt = OptimizerConfig::new(epsilon, sensitivity);
    opt.epochs = epochs;
    opt.seed = base_seed.wrapping_add(cell_index.wrapping_mul(0x9E3779B97F4A7C15));
    // wider grids need more knots to express every staircase level
    let sigmoids = 10usize.max(2 * bins as usize - 1);
    let (_, dist) = optimize_distribution(&opt, d, bins, sigmoids, 500.0)?;
    Ok((dist, bins))
}

/// Runs the full sweep. Every cell reuses the same simulation seed, so
/// plant trajectories are paired across cells; the optimizer seed is
/// derived per cell.
pub fn sweep(
    base: &SimConfig,
    epsilons: &[f64],
    ds: &[f64],
    runs: u32,
    optimizer_epochs: u32,
) -> Result<SweepResult> {
    if epsilons.is_empty() || ds.is_empty() {
        return Err(Error::InvalidParameter("sweep axes must be non-empty".into()));
    }
    let sensitivity = base.dp.as_ref().map(|dp| dp.sensitivity).unwrap_or(1.0);

    let mut cells = Vec::with_capacity(epsilons.len() * ds.len());
    for (ei, &epsilon) in epsilons.iter().enumerate() {
        for (di, &d) in ds.iter().enumerate() {
            let cell_index = (ei * ds.len() + di) as u64;
            let (dist, bins) =
                optimize_cell(epsilon, d, sensitivity, optimizer_epochs, base.seed, cell_index)?;

            let mut cfg = base.clone();
            cfg.runs = runs;
            cfg.dp = Some(DpSettings {
                epsilon,
                range: d,
                bins,
                sensitivity,
            });

            let (_, summary) = monte_carlo(&cfg, NoiseSource::Optimal(&dist))?;

            let a = laplace_range(epsilon, dist.delta(), sensitivity)?;
            let (_, laplace_summary): (_, Summary) = monte_carlo(
                &cfg,
                NoiseSource::TruncatedLaplace {
                    range: a,
                    epsilon,
                    sensitivity,
                },
            )?;

            cells.push(SweepCell {
                epsilon,
                d,
                delta: dist.delta(),
                mean_error: summary.mean_error,
                std_error: summary.std_error,
                containment_rate: summary.containment_rate,
                laplace_range: a,
                laplace_mean_error: laplace_summary.mean_error,
                run_means: summary.run_means,
            });
        }
    }
    Ok(SweepResult {
        epsilons: epsilons.to_vec(),
        ds: ds.to_vec(),
        cells,
    })
}
