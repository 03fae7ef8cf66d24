use crate::{Error, Result};

/// Shortest distance between two angles on the circle, in `[0, 180]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Mean wrapped absolute difference in degrees.
pub fn circular_mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("circular_mae"));
    }
    let total: f64 = pred.iter().zip(truth).map(|(&p, &t)| angular_distance(p, t)).sum();
    Ok(total / pred.len() as f64)
}
