//! Dot-product head and mean-squared-error loss with their gradients.

use crate::error::{Error, Result};

/// `w . x + b`.
pub fn affine_fwd(x: &[f64], w: &[f64], b: f64) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: x.len(),
        });
    }
    Ok(x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b)
}

/// Gradients of [`affine_fwd`] given the upstream scalar gradient.
pub fn affine_bwd(x: &[f64], w: &[f64], grad_out: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if x.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: x.len(),
        });
    }
    let grad_x = w.iter().map(|&v| v * grad_out).collect();
    let grad_w = x.iter().map(|&v| v * grad_out).collect();
    Ok((grad_x, grad_w, grad_out))
}

/// Mean squared error and its gradient with respect to the predictions.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.is_empty() {
        return Err(Error::EmptyInput("mse operands"));
    }
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let d = p - t;
        loss += d * d;
        grad.push(2.0 * d / n);
    }
    Ok((loss / n, grad))
}
