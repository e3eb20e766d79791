//! File formats of the harness: the JSON simulation config, the
//! per-step trace CSV, the summary JSON, and the sweep CSV. Reals are
//! written with 12 significant digits so reruns are byte-identical.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::PlantModel;
use crate::noise::file::NoiseFile;
use crate::sigfig::{format_sig12, round_sig12};
use crate::zonotope::Zonotope;

use super::{DpSettings, SimConfig, Summary, SweepResult, TraceRecord};

/// Zonotope as JSON: a center vector and the generator matrix given as
/// rows (`n` rows of `gamma` entries each).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZonotopeFile {
    pub center: Vec<f64>,
    pub generators: Vec<Vec<f64>>,
}

impl ZonotopeFile {
    pub fn from_zonotope(z: &Zonotope) -> Self {
        Self {
            center: z.center().iter().cloned().collect(),
            generators: (0..z.dim())
                .map(|i| z.generators().row(i).iter().cloned().collect())
                .collect(),
        }
    }

    pub fn to_zonotope(&self) -> Result<Zonotope> {
        let n = self.center.len();
        if self.generators.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "zonotope center has {} entries but {} generator rows",
                n,
                self.generators.len()
            )));
        }
        let cols = self.generators.first().map(|r| r.len()).unwrap_or(0);
        if self.generators.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(
                "generator rows have unequal lengths".into(),
            ));
        }
        let mut gens = DMatrix::zeros(n, cols);
        for (i, row) in self.generators.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                gens[(i, j)] = v;
            }
        }
        Zonotope::new(DVector::from_vec(self.center.clone()), gens)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantModelFile {
    /// State transition matrix, given as rows.
    pub transition: Vec<Vec<f64>>,
    /// One measurement row per sensor.
    pub measurement_rows: Vec<Vec<f64>>,
    pub process_noise: ZonotopeFile,
    pub measurement_noise: Vec<ZonotopeFile>,
    pub initial_set: ZonotopeFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DpSettingsFile {
    pub epsilon: f64,
    pub d: f64,
    #[serde(rename = "N")]
    pub bins: u32,
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<NoiseFile>,
}

/// Serialized form of [`SimConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfigFile {
    pub model: PlantModelFile,
    pub steps: u32,
    pub runs: u32,
    pub seed: u64,
    #[serde(default)]
    pub dp: Option<DpSettingsFile>,
    pub reduction_order: usize,
    pub x0_true: Vec<f64>,
}

impl SimConfigFile {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            model: PlantModelFile {
                transition: (0..cfg.model.transition.nrows())
                    .map(|i| cfg.model.transition.row(i).iter().cloned().collect())
                    .collect(),
                measurement_rows: cfg
                    .model
                    .measurement_rows
                    .iter()
                    .map(|h| h.iter().cloned().collect())
                    .collect(),
                process_noise: ZonotopeFile::from_zonotope(&cfg.model.process_noise),
                measurement_noise: cfg
                    .model
                    .measurement_noise
                    .iter()
                    .map(ZonotopeFile::from_zonotope)
                    .collect(),
                initial_set: ZonotopeFile::from_zonotope(&cfg.model.initial_set),
            },
            steps: cfg.steps,
            runs: cfg.runs,
            seed: cfg.seed,
            dp: cfg.dp.as_ref().map(|dp| DpSettingsFile {
                epsilon: dp.epsilon,
                d: dp.range,
                bins: dp.bins,
                s: dp.sensitivity,
                noise_file: None,
                distribution: None,
            }),
            reduction_order: cfg.reduction_order,
            x0_true: cfg.x0_true.iter().cloned().collect(),
        }
    }

    pub fn to_config(&self) -> Result<SimConfig> {
        let n = self.model.transition.len();
        if self.model.transition.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "transition matrix must be square".into(),
            ));
        }
        let mut transition = DMatrix::zeros(n, n);
        for (i, row) in self.model.transition.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                transition[(i, j)] = v;
            }
        }
        let measurement_rows = self
            .model
            .measurement_rows
            .iter()
            .map(|r| RowDVector::from_row_slice(r))
            .collect();
        let cfg = SimConfig {
            model: PlantModel {
                transition,
                measurement_rows,
                process_noise: self.model.process_noise.to_zonotope()?,
                measurement_noise: self
                    .model
                    .measurement_noise
                    .iter()
                    .map(|z| z.to_zonotope())
                    .collect::<Result<Vec<_>>>()?,
                initial_set: self.model.initial_set.to_zonotope()?,
            },
            steps: self.steps,
            runs: self.runs,
            seed: self.seed,
            dp: self.dp.as_ref().map(|dp| DpSettings {
                epsilon: dp.epsilon,
                range: dp.d,
                bins: dp.bins,
                sensitivity: dp.s,
            }),
            reduction_order: self.reduction_order,
            x0_true: DVector::from_vec(self.x0_true.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn read_config(path: &Path) -> Result<(SimConfig, SimConfigFile)> {
    let text = fs::read_to_string(path)?;
    let file: SimConfigFile = serde_json::from_str(&text)?;
    Ok((file.to_config()?, file))
}

pub fn write_config(path: &Path, cfg: &SimConfig) -> Result<()> {
    let file = SimConfigFile::from_config(cfg);
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

/// Trace CSV: `k,true_x1,true_x2,center_x1,center_x2,error,contained`.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("k,true_x1,true_x2,center_x1,center_x2,error,contained\n");
    for rec in trace {
        let c = rec.corrected.center();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.step,
            format_sig12(rec.true_state[0]),
            format_sig12(rec.true_state[1]),
            format_sig12(c[0]),
            format_sig12(c[1]),
            format_sig12(rec.error),
            u8::from(rec.contained),
        ));
    }
    out
}

#[derive(Serialize)]
struct SummaryFile {
    mean_error: f64,
    std_error: f64,
    containment_rate: f64,
    delta: Option<f64>,
    epsilon: Option<f64>,
    d: Option<f64>,
    runs: u32,
    steps: u32,
    seed: u64,
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    let file = SummaryFile {
        mean_error: round_sig12(summary.mean_error),
        std_error: round_sig12(summary.std_error),
        containment_rate: round_sig12(summary.containment_rate),
        delta: summary.delta.map(round_sig12),
        epsilon: summary.epsilon.map(round_sig12),
        d: summary.d.map(round_sig12),
        runs: summary.runs,
        steps: summary.steps,
        seed: summary.seed,
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

/// Sweep CSV, one row per `(epsilon, d)` cell in axis order.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(
        "epsilon,d,delta,mean_error,std_error,containment_rate,\
         laplace_range_for_same_delta,laplace_mean_error\n",
    );
    for cell in &result.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            format_sig12(cell.epsilon),
            format_sig12(cell.d),
            format_sig12(cell.delta),
            format_sig12(cell.mean_error),
            format_sig12(cell.std_error),
            format_sig12(cell.containment_rate),
            format_sig12(cell.laplace_range),
            format_sig12(cell.laplace_mean_error),
        ));
    }
    out
}
