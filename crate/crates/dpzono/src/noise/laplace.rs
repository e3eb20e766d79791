//! Truncated Laplace baseline: the closed-form range needed for a
//! target `(epsilon, delta)`, its inverse, and a sampler.

use rand::Rng;

use crate::error::{Error, Result};

/// Range `a` of the truncated Laplace mechanism achieving
/// `(epsilon, delta)` at sensitivity `s`:
/// `a = (s/eps) ln(1 + e^eps (1 - e^-eps) / (2 delta))`.
pub fn laplace_range(epsilon: f64, delta: f64, s: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sensitivity must be positive, got {s}"
        )));
    }
    Ok(s / epsilon * (1.0 + epsilon.exp() * (1.0 - (-epsilon).exp()) / (2.0 * delta)).ln())
}

/// Inverse of [`laplace_range`]: the `delta` achieved by a truncated
/// Laplace mechanism of range `a`.
pub fn laplace_delta(a: f64, epsilon: f64, s: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "range must be positive, got {a}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sensitivity must be positive, got {s}"
        )));
    }
    Ok(epsilon.exp() * (1.0 - (-epsilon).exp()) / (2.0 * ((a * epsilon / s).exp() - 1.0)))
}

/// Draws `m` IID values from the Laplace density with scale `s/eps`
/// restricted and renormalized to `[-a, a]`, by inverse CDF.
pub fn sample_truncated_laplace<R: Rng + ?Sized>(
    a: f64,
    epsilon: f64,
    s: f64,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "range must be positive, got {a}"
        )));
    }
    if !(epsilon > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(
            "epsilon and sensitivity must be positive".into(),
        ));
    }
    let b = s / epsilon;
    let edge = (-a / b).exp();
    let draws = (0..m)
        .map(|_| {
            let u: f64 = rng.random_range(0.0..1.0);
            let x = if u <= 0.5 {
                b * (edge + 2.0 * u * (1.0 - edge)).ln()
            } else {
                -b * (edge + 2.0 * (1.0 - u) * (1.0 - edge)).ln()
            };
            x.clamp(-a, a)
        })
        .collect();
    Ok(draws)
}
