use super::EvalError;

fn check(predicted: &[f64], actual: &[f64]) -> Result<(), EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch { predicted: predicted.len(), actual: actual.len() });
    }
    if predicted.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check(predicted, actual)?;
    let sum: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

/// Mean absolute error.
pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check(predicted, actual)?;
    let sum: f64 = predicted.iter().zip(actual).map(|(p, a)| (a - p).abs()).sum();
    Ok(sum / predicted.len() as f64)
}
