//! Adam optimizer over a flat list of parameter slices.
//!
//! Callers present parameters and gradients as parallel slice lists in a
//! fixed order; the moment buffers mirror that order exactly.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Moment buffers shaped after the given parameter slices.
    pub fn new(params: &[&[f64]]) -> Self {
        AdamState {
            step: 0,
            m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update with bias correction. `params` and `grads` must mirror
/// the shapes the state was created with.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if lr <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::shape(
            format!("{} tensors", state.m.len()),
            format!("{} params / {} grads", params.len(), grads.len()),
        ));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.len() != m.len() || g.len() != m.len() {
            return Err(Error::shape(
                format!("tensor of {} values", m.len()),
                format!("{} params / {} grads", p.len(), g.len()),
            ));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);

    for (idx, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.m[idx];
        let v = &mut state.v[idx];
        for i in 0..p.len() {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = vec![1.0, -2.0];
        let g = vec![0.0, 0.0];
        let mut state = AdamState::new(&[&p]);
        adam_step(&mut [&mut p], &[&g], &mut state, 0.01).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn constant_positive_gradient_decreases_param() {
        let mut p = vec![1.0];
        let g = vec![0.5];
        let mut state = AdamState::new(&[&p]);
        let mut last = p[0];
        for _ in 0..50 {
            adam_step(&mut [&mut p], &[&g], &mut state, 0.01).unwrap();
            assert!(p[0] < last);
            last = p[0];
        }
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        // With bias correction, the first update is lr * g/|g| up to eps.
        let mut p = vec![0.0];
        let g = vec![3.0];
        let mut state = AdamState::new(&[&p]);
        adam_step(&mut [&mut p], &[&g], &mut state, 0.01).unwrap();
        assert!((p[0] + 0.01).abs() < 1e-6);
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut p = vec![0.0];
        let g = vec![1.0, 2.0];
        let mut state = AdamState::new(&[&p]);
        assert!(adam_step(&mut [&mut p], &[&g], &mut state, 0.01).is_err());
    }
}
