//! Prediction-quality metrics.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MaeError {
    #[error("prediction and truth lists differ in length ({predictions} vs {truths})")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("cannot compute MAE over empty lists")]
    Empty,
}

/// Mean absolute error between predictions and ground truth.
pub fn mae(predictions: &[f64], truths: &[f64]) -> Result<f64, MaeError> {
    if predictions.len() != truths.len() {
        return Err(MaeError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MaeError::Empty);
    }
    let total: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t).abs())
        .sum();
    Ok(total / predictions.len() as f64)
}
