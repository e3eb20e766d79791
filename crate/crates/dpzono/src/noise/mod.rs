//! Truncated noise distributions for the additive privacy mechanism:
//! grid construction, the privacy slack `delta` implied by a
//! distribution, utility loss, the annealed training loss, and
//! inverse-CDF sampling.

mod laplace;
mod model;
mod optimizer;

pub mod file;

pub use laplace::{laplace_delta, laplace_range, sample_truncated_laplace};
pub use model::{evaluate_noise_model, NoiseModelParams};
pub use optimizer::{optimize_distribution, OptimizerConfig};

use rand::Rng;

use crate::error::{Error, Result};

/// Discretization of the noise range `[-d, d]` into `2N` bin centers
/// `phi_l = -d + (l - 1/2) d/N`, `l = 1..2N`. The layout is symmetric,
/// equidistant, and avoids a bin at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGrid {
    range: f64,
    half_bins: u32,
    step: f64,
    points: Vec<f64>,
}

impl NoiseGrid {
    /// Builds the grid for half-range `d > 0` with `N >= 1` bins per half.
    pub fn new(d: f64, n: u32) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise half-range must be positive and finite, got {d}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidParameter(
                "bin count per half must be at least 1".into(),
            ));
        }
        let step = d / n as f64;
        let points = (0..2 * n)
            .map(|l| -d + (l as f64 + 0.5) * step)
            .collect();
        Ok(Self {
            range: d,
            half_bins: n,
            step,
            points,
        })
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// Bins per half (`N`); the full grid has `2N` points.
    pub fn half_bins(&self) -> u32 {
        self.half_bins
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Lattice shift corresponding to sensitivity `s`, i.e. `s / step`
    /// rounded to the nearest integer, if `s` lands on the lattice
    /// within `1e-9` relative tolerance.
    pub fn sensitivity_shift(&self, s: f64) -> Result<usize> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sensitivity must be non-negative and finite, got {s}"
            )));
        }
        let k = (s / self.step).round();
        if (s - k * self.step).abs() > 1e-9 * s.abs().max(1.0) {
            return Err(Error::MisalignedSensitivity {
                sensitivity: s,
                step: self.step,
                suggested_bins: self.nearest_aligned_bins(s),
            });
        }
        Ok(k as usize)
    }

    /// Smallest change to `N` that makes `s` land on the lattice.
    fn nearest_aligned_bins(&self, s: f64) -> u32 {
        let aligned = |n: u32| {
            let step = self.range / n as f64;
            let k = (s / step).round();
            k >= 1.0 && (s - k * step).abs() <= 1e-9 * s.abs().max(1.0)
        };
        for offset in 0..100_000u32 {
            let up = self.half_bins + offset;
            if aligned(up) {
                return up;
            }
            if offset < self.half_bins && self.half_bins - offset >= 1 && aligned(self.half_bins - offset) {
                return self.half_bins - offset;
            }
        }
        self.half_bins
    }
}

/// Discrete symmetric noise distribution on a [`NoiseGrid`] together
/// with the privacy parameters it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedNoiseDistribution {
    grid: NoiseGrid,
    mass: Vec<f64>,
    /// Privacy slack achieved at (`epsilon`, `sensitivity`); zero until
    /// assigned by [`TruncatedNoiseDistribution::with_privacy`].
    delta: f64,
    epsilon: f64,
    sensitivity: f64,
}

/// Invariant violations of a candidate distribution, each reported as
/// the worst absolute excess over the allowed tolerance's base value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DistributionViolations {
    pub normalization: f64,
    pub negativity: f64,
    pub symmetry: f64,
    pub monotonicity: f64,
}

impl DistributionViolations {
    pub fn within_tolerance(&self) -> bool {
        self.normalization <= 1e-9
            && self.negativity <= 0.0
            && self.symmetry <= 1e-12
            && self.monotonicity <= 1e-12
    }
}

impl TruncatedNoiseDistribution {
    /// Wraps a probability mass vector over `grid`, rejecting mass
    /// vectors that break the distribution invariants.
    pub fn new(grid: NoiseGrid, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} bins but mass vector has {}",
                grid.len(),
                mass.len()
            )));
        }
        let dist = Self {
            grid,
            mass,
            delta: 0.0,
            epsilon: 0.0,
            sensitivity: 0.0,
        };
        let v = dist.violations();
        if !v.within_tolerance() {
            return Err(Error::InvalidDistribution(format!(
                "invariant violations: normalization {:.3e}, negativity {:.3e}, \
                 symmetry {:.3e}, monotonicity {:.3e}",
                v.normalization, v.negativity, v.symmetry, v.monotonicity
            )));
        }
        Ok(dist)
    }

    /// The uniform distribution on the grid.
    pub fn uniform(grid: NoiseGrid) -> Self {
        let p = 1.0 / grid.len() as f64;
        let mass = vec![p; grid.len()];
        Self {
            grid,
            mass,
            delta: 0.0,
            epsilon: 0.0,
            sensitivity: 0.0,
        }
    }

    /// Records the privacy point this distribution is deployed at,
    /// computing the tight `delta` for it.
    pub fn with_privacy(mut self, epsilon: f64, sensitivity: f64) -> Result<Self> {
        self.delta = delta_of(&self, epsilon, sensitivity)?;
        self.epsilon = epsilon;
        self.sensitivity = sensitivity;
        Ok(self)
    }

    pub fn grid(&self) -> &NoiseGrid {
        &self.grid
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    /// Measures how far the mass vector is from satisfying the
    /// distribution, symmetry, and monotonicity requirements.
    pub fn violations(&self) -> DistributionViolations {
        let n = self.grid.half_bins() as usize;
        let mass = &self.mass;
        let mut v = DistributionViolations {
            normalization: (mass.iter().sum::<f64>() - 1.0).abs(),
            ..Default::default()
        };
        for &p in mass {
            v.negativity = v.negativity.max(-p);
        }
        for l in 0..n {
            v.symmetry = v.symmetry.max((mass[l] - mass[2 * n - 1 - l]).abs());
        }
        // non-increasing away from the center on the right half
        for l in n..(2 * n - 1) {
            v.monotonicity = v.monotonicity.max(mass[l + 1] - mass[l]);
        }
        v
    }

    /// Draws `m` IID values by inverse-CDF over the bins; every output
    /// is a bin center, hence strictly inside `(-d, d)`.
    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        (0..m)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..1.0);
                let mut acc = 0.0;
                for (l, &p) in self.mass.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return self.grid.points()[l];
                    }
                }
                *self.grid.points().last().expect("grid is non-empty")
            })
            .collect()
    }
}

/// Tight privacy slack of the additive mechanism at `(epsilon, s)`:
/// `delta* = sum_l max(0, P_l - e^eps P_{l+k})` with `k = s / step` and
/// out-of-range mass treated as zero. The maximizing event set is
/// exactly the bins with a positive summand, so this is the smallest
/// `delta` for which the mechanism is `(epsilon, delta)`-ADP.
pub fn delta_of(dist: &TruncatedNoiseDistribution, epsilon: f64, s: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be non-negative and finite, got {epsilon}"
        )));
    }
    let k = dist.grid().sensitivity_shift(s)?;
    Ok(delta_shift(dist.mass(), epsilon, k as i64))
}

/// Positive part of the shifted mass difference for a signed lattice
/// shift; `delta_of` is the `k >= 0` case.
pub fn delta_shift(mass: &[f64], epsilon: f64, k: i64) -> f64 {
    let n = mass.len() as i64;
    let factor = epsilon.exp();
    (0..n)
        .map(|l| {
            let shifted = l + k;
            let q = if (0..n).contains(&shifted) {
                mass[shifted as usize]
            } else {
                0.0
            };
            (mass[l as usize] - factor * q).max(0.0)
        })
        .sum()
}

/// Utility loss `U = (sum_l |phi_l|^gamma P_l)^(1/gamma)` for
/// `gamma` in {1, 2}: the gamma-th moment norm of the noise magnitude.
pub fn utility_loss(dist: &TruncatedNoiseDistribution, gamma: u8) -> Result<f64> {
    if gamma != 1 && gamma != 2 {
        return Err(Error::InvalidParameter(format!(
            "utility norm selector must be 1 or 2, got {gamma}"
        )));
    }
    let moment: f64 = dist
        .grid()
        .points()
        .iter()
        .zip(dist.mass())
        .map(|(&phi, &p)| phi.abs().powi(gamma as i32) * p)
        .sum();
    Ok(if gamma == 1 { moment } else { moment.sqrt() })
}

/// Utility weight at training epoch `t`:
/// `Omega_t = max(Omega_start / 2^(t/Gamma), Omega_min)`.
pub fn omega_at(t: u32, cfg: &OptimizerConfig) -> f64 {
    (cfg.omega_start / 2f64.powf(t as f64 / cfg.decay_epochs)).max(cfg.omega_min)
}

/// Training loss `delta + omega * U`.
pub fn loss(
    dist: &TruncatedNoiseDistribution,
    epsilon: f64,
    s: f64,
    gamma: u8,
    omega: f64,
) -> Result<f64> {
    Ok(delta_of(dist, epsilon, s)? + omega * utility_loss(dist, gamma)?)
}
