use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::{Error, Result};

/// Error statistics over every output component of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// Number of samples (rows).
    pub n: usize,
}

impl LossReport {
    pub fn from_predictions(pred: &Tensor, target: &Tensor) -> Result<Self> {
        if pred.shape() != target.shape() {
            return Err(Error::Shape {
                op: "loss",
                left: pred.shape().to_vec(),
                right: target.shape().to_vec(),
            });
        }
        if pred.is_empty() {
            return Err(Error::EmptyInput("loss"));
        }
        let m = pred.len() as f64;
        let (sq, abs) = pred
            .data()
            .iter()
            .zip(target.data())
            .fold((0.0, 0.0), |(sq, abs), (p, t)| {
                let d = p - t;
                (sq + d * d, abs + d.abs())
            });
        let mse = sq / m;
        Ok(LossReport {
            mse,
            rmse: mse.sqrt(),
            mae: abs / m,
            n: pred.rows(),
        })
    }

    /// Combines reports weighted by sample count.
    pub fn merge(reports: &[LossReport]) -> Option<LossReport> {
        let n: usize = reports.iter().map(|r| r.n).sum();
        if n == 0 {
            return None;
        }
        let w = |f: fn(&LossReport) -> f64| reports.iter().map(|r| f(r) * r.n as f64).sum::<f64>() / n as f64;
        let mse = w(|r| r.mse);
        Some(LossReport {
            mse,
            rmse: mse.sqrt(),
            mae: w(|r| r.mae),
            n,
        })
    }
}
