//! Zonotopic set-membership estimation: reachability prediction,
//! measurement correction with Frobenius-optimal fusion weights, and
//! the privacy-aware correction that widens each sensor's noise set by
//! the noise range.

use nalgebra::{Cholesky, DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::zonotope::Zonotope;

/// Linear plant with scalar sensors: `x_{k+1} = F x_k + w_k`,
/// `y_k^(i) = H^(i) x_k + v_k^(i)`, disturbances bounded by zonotopes.
#[derive(Debug, Clone)]
pub struct PlantModel {
    pub transition: DMatrix<f64>,
    pub measurement_rows: Vec<RowDVector<f64>>,
    pub process_noise: Zonotope,
    pub measurement_noise: Vec<Zonotope>,
    pub initial_set: Zonotope,
}

impl PlantModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.transition.nrows();
        if self.transition.ncols() != n {
            return Err(Error::DimensionMismatch(
                "state transition matrix must be square".into(),
            ));
        }
        if self.measurement_rows.is_empty() {
            return Err(Error::InvalidParameter("need at least one sensor".into()));
        }
        if self.measurement_rows.iter().any(|h| h.ncols() != n) {
            return Err(Error::DimensionMismatch(
                "measurement rows must match the state dimension".into(),
            ));
        }
        if self.process_noise.dim() != n || self.initial_set.dim() != n {
            return Err(Error::DimensionMismatch(
                "noise and initial zonotopes must match the state dimension".into(),
            ));
        }
        if self.measurement_noise.len() != self.measurement_rows.len() {
            return Err(Error::DimensionMismatch(
                "need one measurement-noise zonotope per sensor".into(),
            ));
        }
        if self.measurement_noise.iter().any(|z| z.dim() != 1) {
            return Err(Error::DimensionMismatch(
                "measurement noise zonotopes must be one-dimensional".into(),
            ));
        }
        if !self.transition.iter().all(|x| x.is_finite())
            || !self
                .measurement_rows
                .iter()
                .all(|h| h.iter().all(|x| x.is_finite()))
        {
            return Err(Error::NonFinite("plant matrices".into()));
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.transition.nrows()
    }

    pub fn sensor_count(&self) -> usize {
        self.measurement_rows.len()
    }
}

/// Fusion gains, one `n`-vector per sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    columns: DMatrix<f64>,
}

impl WeightMatrix {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if !columns.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("fusion weights".into()));
        }
        Ok(Self { columns })
    }

    pub fn zeros(state_dim: usize, sensors: usize) -> Self {
        Self {
            columns: DMatrix::zeros(state_dim, sensors),
        }
    }

    pub fn sensor_count(&self) -> usize {
        self.columns.ncols()
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }
}

/// One estimation step's sets.
#[derive(Debug, Clone)]
pub struct StateEstimate {
    pub corrected: Zonotope,
    pub predicted: Zonotope,
    pub step: usize,
}

/// Reachable-set prediction `F Zbar (+) Zw`.
pub fn predict(zbar: &Zonotope, transition: &DMatrix<f64>, zw: &Zonotope) -> Result<Zonotope> {
    zbar.linear_map(transition)?.minkowski_sum(zw)
}

/// Frobenius-optimal fusion gains for the corrected generator matrix.
///
/// With `Q = Ghat Ghat^T`, `Hs` the stacked sensor rows, and
/// `D = diag(v_i)` holding the squared Frobenius norms of the
/// per-sensor noise generators, the minimizer of `||Gbar(Lambda)||_F^2`
/// is `Lambda* = Q Hs^T (Hs Q Hs^T + D)^-1`, computed here by a
/// symmetric positive-definite solve with a small ridge fallback.
pub fn optimal_weights(
    ghat: &DMatrix<f64>,
    rows: &[RowDVector<f64>],
    noise_gen_norms: &[f64],
) -> Result<WeightMatrix> {
    let n = ghat.nrows();
    let m = rows.len();
    if noise_gen_norms.len() != m {
        return Err(Error::DimensionMismatch(
            "need one noise norm per sensor".into(),
        ));
    }
    if rows.iter().any(|h| h.ncols() != n) {
        return Err(Error::DimensionMismatch(
            "measurement rows must match the generator row count".into(),
        ));
    }
    if !ghat.iter().all(|x| x.is_finite())
        || !noise_gen_norms.iter().all(|x| x.is_finite() && *x >= 0.0)
        || !rows.iter().all(|h| h.iter().all(|x| x.is_finite()))
    {
        return Err(Error::NonFinite("weight computation inputs".into()));
    }

    let mut stacked = DMatrix::zeros(m, n);
    for (i, h) in rows.iter().enumerate() {
        stacked.row_mut(i).copy_from(h);
    }

    let q = ghat * ghat.transpose();
    let qht = &q * stacked.transpose();
    let mut system = &stacked * &qht;
    for i in 0..m {
        system[(i, i)] += noise_gen_norms[i];
    }

    let trace: f64 = system.diagonal().sum();
    if trace == 0.0 {
        // all-zero system: Q H^T vanishes too, so zero gains solve it
        return Ok(WeightMatrix::zeros(n, m));
    }

    let solve = |s: DMatrix<f64>| -> Option<DMatrix<f64>> {
        // system is symmetric, so solving S X = (Q H^T)^T gives Lambda^T
        Cholesky::new(s).map(|chol| chol.solve(&qht.transpose()))
    };
    let lambda_t = solve(system.clone()).or_else(|| {
        let mut ridged = system;
        let ridge = 1e-12 * trace;
        for i in 0..m {
            ridged[(i, i)] += ridge;
        }
        solve(ridged)
    });
    match lambda_t {
        Some(lt) => WeightMatrix::new(lt.transpose()),
        None => Err(Error::InvalidParameter(
            "fusion weight system is not positive definite".into(),
        )),
    }
}

/// Measurement correction: over-approximates the intersection of the
/// predicted set with the measurement strips.
///
/// `cbar = chat + sum_i lambda_i (y_i - H_i chat - cv_i)` and
/// `Gbar = [(I - sum_i lambda_i H_i) Ghat, lambda_1 Gv_1, ..., lambda_m Gv_m]`.
pub fn correct(
    zhat: &Zonotope,
    measurements: &[f64],
    model: &PlantModel,
    weights: &WeightMatrix,
) -> Result<Zonotope> {
    correct_inner(zhat, measurements, model, None, weights)
}

/// Privacy-aware correction: every sensor's noise set is widened by the
/// scalar noise zonotope `zp = <c_p, G_p>` built from the noise range,
/// and the private measurements are debiased by `c_p` per channel.
///
/// All-zero noise generators are dropped, so a zero-range `zp` makes
/// this coincide with [`correct`] exactly.
pub fn correct_dp(
    zhat: &Zonotope,
    private_measurements: &[f64],
    model: &PlantModel,
    zp: &Zonotope,
    weights: &WeightMatrix,
) -> Result<Zonotope> {
    if zp.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "privacy noise zonotope must be one-dimensional".into(),
        ));
    }
    correct_inner(zhat, private_measurements, model, Some(zp), weights)
}

fn correct_inner(
    zhat: &Zonotope,
    measurements: &[f64],
    model: &PlantModel,
    zp: Option<&Zonotope>,
    weights: &WeightMatrix,
) -> Result<Zonotope> {
    model.validate()?;
    let n = model.state_dim();
    let m = model.sensor_count();
    if zhat.dim() != n {
        return Err(Error::DimensionMismatch(
            "predicted set does not match the state dimension".into(),
        ));
    }
    if measurements.len() != m || weights.sensor_count() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} measurements and weight columns, got {} and {}",
            measurements.len(),
            weights.sensor_count()
        )));
    }

    let chat = zhat.center();
    let ghat = zhat.generators();
    let (cp, gp_cols): (f64, Vec<f64>) = match zp {
        Some(z) => (
            z.center()[0],
            z.generators().iter().cloned().filter(|g| *g != 0.0).collect(),
        ),
        None => (0.0, Vec::new()),
    };

    let mut center = chat.clone();
    let mut shrink = DMatrix::identity(n, n);
    for (i, &y) in measurements.iter().enumerate() {
        let lambda = weights.column(i);
        let h = &model.measurement_rows[i];
        let cv = model.measurement_noise[i].center()[0];
        let innovation = y - (h * chat)[0] - cv - cp;
        center += &lambda * innovation;
        shrink -= &lambda * h;
    }

    let noise_cols: usize = model
        .measurement_noise
        .iter()
        .map(|z| z.order() + gp_cols.len())
        .sum();
    let mut generators = DMatrix::zeros(n, ghat.ncols() + noise_cols);
    generators
        .view_mut((0, 0), (n, ghat.ncols()))
        .copy_from(&(&shrink * ghat));
    let mut col = ghat.ncols();
    for i in 0..m {
        let lambda = weights.column(i);
        for gv in model.measurement_noise[i].generators().iter() {
            generators.column_mut(col).copy_from(&(&lambda * *gv));
            col += 1;
        }
        for gp in &gp_cols {
            generators.column_mut(col).copy_from(&(&lambda * *gp));
            col += 1;
        }
    }

    Zonotope::new(center, generators)
}

/// Squared Frobenius norms of each sensor's noise generators, the `D`
/// diagonal for [`optimal_weights`]; in private mode the noise range
/// generator is appended per channel first.
pub fn noise_norms(model: &PlantModel, zp: Option<&Zonotope>) -> Vec<f64> {
    let extra: f64 = zp
        .map(|z| z.generators().iter().map(|g| g * g).sum())
        .unwrap_or(0.0);
    model
        .measurement_noise
        .iter()
        .map(|z| z.generators().iter().map(|g| g * g).sum::<f64>() + extra)
        .collect()
}
