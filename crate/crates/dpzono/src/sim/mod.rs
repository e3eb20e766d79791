//! Tracking experiment harness: simulates the circular-motion plant
//! and its sensor network, privatizes measurements, runs the
//! set-membership estimation loop, and aggregates Monte-Carlo
//! statistics.

pub mod files;
mod sweep;

pub use sweep::{bins_for, optimize_cell, sweep, SweepCell, SweepResult};

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::estimator::{
    correct, correct_dp, noise_norms, optimal_weights, predict, PlantModel,
};
use crate::noise::{sample_truncated_laplace, TruncatedNoiseDistribution};
use crate::zonotope::Zonotope;

/// Privacy block of a simulation configuration; `sensitivity` must land
/// on the `(range, bins)` grid lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSettings {
    pub epsilon: f64,
    pub range: f64,
    pub bins: u32,
    pub sensitivity: f64,
}

/// Full configuration of one tracking experiment.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: PlantModel,
    pub steps: u32,
    pub runs: u32,
    pub seed: u64,
    pub dp: Option<DpSettings>,
    pub reduction_order: usize,
    pub x0_true: DVector<f64>,
}

impl SimConfig {
    /// The bundled two-dimensional tracking scenario: a near-rotation
    /// plant watched by eight alternating single-axis sensors.
    pub fn circular_tracking_default() -> Self {
        let transition = DMatrix::from_row_slice(2, 2, &[0.9920, -0.1247, 0.1247, 0.9920]);
        // odd sensors read the first coordinate, even sensors the second
        let measurement_rows: Vec<RowDVector<f64>> = (0..8)
            .map(|i| {
                if i % 2 == 0 {
                    RowDVector::from_row_slice(&[1.0, 0.0])
                } else {
                    RowDVector::from_row_slice(&[0.0, 1.0])
                }
            })
            .collect();
        let measurement_noise = (0..8)
            .map(|_| {
                Zonotope::new(
                    DVector::from_column_slice(&[0.0]),
                    DMatrix::from_row_slice(1, 2, &[0.01, 0.02]),
                )
                .expect("static zonotope")
            })
            .collect();
        let process_noise = Zonotope::new(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, 0.50),
        )
        .expect("static zonotope");
        let x0 = DVector::from_column_slice(&[10.0, 0.0]);
        let initial_set = Zonotope::new(x0.clone(), DMatrix::from_diagonal_element(2, 2, 15.0))
            .expect("static zonotope");

        Self {
            model: PlantModel {
                transition,
                measurement_rows,
                process_noise,
                measurement_noise,
                initial_set,
            },
            steps: 200,
            runs: 30,
            seed: 0,
            dp: Some(DpSettings {
                epsilon: 0.3,
                range: 7.0,
                bins: 7,
                sensitivity: 1.0,
            }),
            reduction_order: 20,
            x0_true: x0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.state_dim() != 2 {
            return Err(Error::InvalidParameter(
                "the harness is planar: the state dimension must be 2".into(),
            ));
        }
        if self.steps < 1 || self.runs < 1 {
            return Err(Error::InvalidParameter(
                "steps and runs must be at least 1".into(),
            ));
        }
        if self.reduction_order < 1 {
            return Err(Error::InvalidParameter(
                "reduction order must be at least 1".into(),
            ));
        }
        if self.x0_true.len() != self.model.state_dim() {
            return Err(Error::DimensionMismatch(
                "x0_true must match the state dimension".into(),
            ));
        }
        if let Some(dp) = &self.dp {
            crate::noise::NoiseGrid::new(dp.range, dp.bins)?
                .sensitivity_shift(dp.sensitivity)?;
        }
        Ok(())
    }

    /// Stream for a Monte-Carlo run: `seed XOR run_index` fed to the
    /// seeded generator, so runs own disjoint substreams.
    pub fn run_rng(&self, run_index: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.seed ^ run_index)
    }
}

/// Per-step record of one estimation run.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub step: u32,
    pub true_state: DVector<f64>,
    pub measurements: Vec<f64>,
    pub private_measurements: Vec<f64>,
    pub corrected: Zonotope,
    pub predicted: Zonotope,
    pub error: f64,
    pub contained: bool,
}

/// Aggregated Monte-Carlo statistics.
#[derive(Debug, Clone)]
pub struct Summary {
    pub mean_error: f64,
    pub std_error: f64,
    pub containment_rate: f64,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub d: Option<f64>,
    pub runs: u32,
    pub steps: u32,
    pub seed: u64,
    /// Mean error of each run, for trend comparisons across cells.
    pub run_means: Vec<f64>,
}

/// Where the measurement perturbation comes from.
#[derive(Debug, Clone, Copy)]
pub enum NoiseSource<'a> {
    /// No privatization; the estimator runs the plain correction.
    None,
    /// The learned truncated distribution; the correction widens every
    /// sensor's noise set by its grid range.
    Optimal(&'a TruncatedNoiseDistribution),
    /// Truncated Laplace noise of the given range with scale
    /// `sensitivity / epsilon`.
    TruncatedLaplace {
        range: f64,
        epsilon: f64,
        sensitivity: f64,
    },
}

impl NoiseSource<'_> {
    /// Scalar noise zonotope bounding the perturbation, if any.
    fn privacy_zonotope(&self) -> Option<Zonotope> {
        let range = match self {
            NoiseSource::None => return None,
            NoiseSource::Optimal(dist) => dist.grid().range(),
            NoiseSource::TruncatedLaplace { range, .. } => *range,
        };
        Some(
            Zonotope::new(
                DVector::from_column_slice(&[0.0]),
                DMatrix::from_row_slice(1, 1, &[range]),
            )
            .expect("static zonotope"),
        )
    }

    fn draw<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            NoiseSource::None => Ok(vec![0.0; m]),
            NoiseSource::Optimal(dist) => Ok(dist.sample(m, rng)),
            NoiseSource::TruncatedLaplace {
                range,
                epsilon,
                sensitivity,
            } => sample_truncated_laplace(*range, *epsilon, *sensitivity, m, rng),
        }
    }
}

/// Simulates the plant forward: `x_{k+1} = F x_k + w_k` starting from
/// `x0_true`, with per-sensor measurements `y_k = H x_k + v_k` taken at
/// the propagated states `x_1 .. x_steps`.
pub fn simulate_plant<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> (Vec<DVector<f64>>, Vec<Vec<f64>>) {
    let model = &cfg.model;
    let mut x = cfg.x0_true.clone();
    let mut states = Vec::with_capacity(cfg.steps as usize);
    let mut measurements = Vec::with_capacity(cfg.steps as usize);
    for _ in 0..cfg.steps {
        let w = model.process_noise.sample_point(rng);
        x = &model.transition * &x + w;
        let y: Vec<f64> = model
            .measurement_rows
            .iter()
            .zip(&model.measurement_noise)
            .map(|(h, zv)| (h * &x)[0] + zv.sample_point(rng)[0])
            .collect();
        states.push(x.clone());
        measurements.push(y);
    }
    (states, measurements)
}

/// Adds one fresh IID noise draw per sensor: `y + phi`.
pub fn privatize_measurements<R: Rng + ?Sized>(
    y: &[f64],
    dist: &TruncatedNoiseDistribution,
    rng: &mut R,
) -> Vec<f64> {
    let phi = dist.sample(y.len(), rng);
    y.iter().zip(&phi).map(|(yi, p)| yi + p).collect()
}

/// One estimation timeline under the given noise source, using the
/// run's derived random stream. Plant randomness is drawn first, then
/// the per-step privacy noise, so paired runs share trajectories.
pub fn run_with_noise(
    cfg: &SimConfig,
    noise: NoiseSource<'_>,
    run_index: u64,
) -> Result<Vec<TraceRecord>> {
    cfg.validate()?;
    let model = &cfg.model;
    let m = model.sensor_count();
    let mut rng = cfg.run_rng(run_index);

    let (states, measurements) = simulate_plant(cfg, &mut rng);
    let zp = noise.privacy_zonotope();

    let mut prior = model.initial_set.clone();
    let mut records = Vec::with_capacity(cfg.steps as usize);
    for (idx, (x, y)) in states.iter().zip(&measurements).enumerate() {
        let phi = noise.draw(m, &mut rng)?;
        let y_used: Vec<f64> = y.iter().zip(&phi).map(|(yi, p)| yi + p).collect();

        let norms = noise_norms(model, zp.as_ref());
        let weights = optimal_weights(prior.generators(), &model.measurement_rows, &norms)?;
        let corrected = match &zp {
            Some(z) => correct_dp(&prior, &y_used, model, z, &weights)?,
            None => correct(&prior, &y_used, model, &weights)?,
        };
        let predicted = predict(&corrected, &model.transition, &model.process_noise)?
            .reduce_order(cfg.reduction_order)?;

        let error = (x - corrected.center()).norm();
        let contained = corrected.contains_point(x)?;
        records.push(TraceRecord {
            step: idx as u32 + 1,
            true_state: x.clone(),
            measurements: y.clone(),
            private_measurements: y_used,
            corrected,
            predicted: predicted.clone(),
            error,
            contained,
        });
        prior = predicted;
    }
    Ok(records)
}

/// The private estimation loop with the learned distribution; the
/// distribution must match the configuration's privacy block.
pub fn run_private_estimation(
    cfg: &SimConfig,
    dist: &TruncatedNoiseDistribution,
) -> Result<Vec<TraceRecord>> {
    let dp = cfg.dp.as_ref().ok_or_else(|| {
        Error::InvalidParameter("configuration has no privacy block".into())
    })?;
    check_dp_match(dp, dist)?;
    run_with_noise(cfg, NoiseSource::Optimal(dist), 0)
}

/// The non-private estimation loop on the same derived stream.
pub fn run_estimation(cfg: &SimConfig) -> Result<Vec<TraceRecord>> {
    run_with_noise(cfg, NoiseSource::None, 0)
}

/// Checks that a distribution matches a configuration's privacy block.
pub fn check_dp_match(dp: &DpSettings, dist: &TruncatedNoiseDistribution) -> Result<()> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
    if !close(dp.epsilon, dist.epsilon())
        || !close(dp.range, dist.grid().range())
        || dp.bins != dist.grid().half_bins()
        || !close(dp.sensitivity, dist.sensitivity())
    {
        return Err(Error::InvalidParameter(format!(
            "noise distribution (epsilon {}, d {}, N {}, s {}) does not match the \
             configuration's privacy block (epsilon {}, d {}, N {}, s {})",
            dist.epsilon(),
            dist.grid().range(),
            dist.grid().half_bins(),
            dist.sensitivity(),
            dp.epsilon,
            dp.range,
            dp.bins,
            dp.sensitivity
        )));
    }
    Ok(())
}

/// Runs `cfg.runs` Monte-Carlo repetitions and aggregates them.
/// Returns the first run's trace alongside the summary.
pub fn monte_carlo(
    cfg: &SimConfig,
    noise: NoiseSource<'_>,
) -> Result<(Vec<TraceRecord>, Summary)> {
    cfg.validate()?;
    let mut first_trace = Vec::new();
    let mut errors: Vec<f64> = Vec::with_capacity((cfg.runs * cfg.steps) as usize);
    let mut run_means = Vec::with_capacity(cfg.runs as usize);
    let mut contained = 0usize;
    for run in 0..cfg.runs {
        let trace = run_with_noise(cfg, noise, run as u64)?;
        let mut sum = 0.0;
        for rec in &trace {
            errors.push(rec.error);
            sum += rec.error;
            if rec.contained {
                contained += 1;
            }
        }
        run_means.push(sum / trace.len() as f64);
        if run == 0 {
            first_trace = trace;
        }
    }

    let count = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / count;
    let variance = if errors.len() > 1 {
        errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let (delta, epsilon, d) = match noise {
        NoiseSource::Optimal(dist) => (
            Some(dist.delta()),
            Some(dist.epsilon()),
            Some(dist.grid().range()),
        ),
        NoiseSource::TruncatedLaplace { range, epsilon, .. } => {
            (None, Some(epsilon), Some(range))
        }
        NoiseSource::None => (None, None, None),
    };
    let summary = Summary {
        mean_error: mean,
        std_error: variance.sqrt(),
        containment_rate: contained as f64 / count,
        delta,
        epsilon,
        d,
        runs: cfg.runs,
        steps: cfg.steps,
        seed: cfg.seed,
        run_means,
    };
    Ok((first_trace, summary))
}
