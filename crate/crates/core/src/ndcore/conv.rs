//! 1-D convolution kernels with explicit backward passes.
//!
//! Two flavours are used by the model:
//! * depthwise 3-tap convolution, one kernel per channel, zero padding,
//!   output shape equal to input shape;
//! * pointwise (1-tap) convolution across channels, collapsing the
//!   channel dimension to a single row.

use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

fn check_channels(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::shape(
            format!("{expected} {what}"),
            format!("{got} {what}"),
        ));
    }
    Ok(())
}

/// Depthwise 3-tap convolution: `out[c][t] = sum_m k[c][m] * in[c][t+m-1] + b[c]`,
/// reading zeros outside `[0, cols)`.
pub fn depthwise_conv3_fwd(input: &Tensor2, kernels: &Tensor2, biases: &[f64]) -> Result<Tensor2> {
    check_channels(input.rows(), kernels.rows(), "kernel rows")?;
    check_channels(input.rows(), biases.len(), "biases")?;
    if kernels.cols() != 3 {
        return Err(Error::shape("3-tap kernels", format!("{}-tap", kernels.cols())));
    }
    if input.cols() == 0 {
        return Err(Error::EmptyInput("convolution input"));
    }

    let cols = input.cols();
    let mut out = Tensor2::zeros(input.rows(), cols);
    for c in 0..input.rows() {
        let x = input.row(c);
        let k = kernels.row(c);
        let b = biases[c];
        let o = out.row_mut(c);
        for t in 0..cols {
            let left = if t > 0 { x[t - 1] } else { 0.0 };
            let right = if t + 1 < cols { x[t + 1] } else { 0.0 };
            o[t] = k[0] * left + k[1] * x[t] + k[2] * right + b;
        }
    }
    Ok(out)
}

/// Gradients of [`depthwise_conv3_fwd`] with respect to input, kernels and biases.
pub fn depthwise_conv3_bwd(
    input: &Tensor2,
    kernels: &Tensor2,
    grad_out: &Tensor2,
) -> Result<(Tensor2, Tensor2, Vec<f64>)> {
    check_channels(input.rows(), kernels.rows(), "kernel rows")?;
    if !input.same_shape(grad_out) {
        return Err(Error::shape(
            format!("{}x{}", input.rows(), input.cols()),
            format!("{}x{}", grad_out.rows(), grad_out.cols()),
        ));
    }

    let cols = input.cols();
    let mut grad_input = Tensor2::zeros(input.rows(), cols);
    let mut grad_kernels = Tensor2::zeros(kernels.rows(), 3);
    let mut grad_biases = vec![0.0; input.rows()];

    for c in 0..input.rows() {
        let x = input.row(c);
        let k = kernels.row(c);
        let g = grad_out.row(c);
        let gk = grad_kernels.row_mut(c);
        let mut gb = 0.0;
        for t in 0..cols {
            let gt = g[t];
            gb += gt;
            if t > 0 {
                gk[0] += gt * x[t - 1];
            }
            gk[1] += gt * x[t];
            if t + 1 < cols {
                gk[2] += gt * x[t + 1];
            }
        }
        grad_biases[c] = gb;
        let gi = grad_input.row_mut(c);
        for t in 0..cols {
            // out[c][t] touches in[c][t-1..=t+1]; transpose the stencil.
            let mut acc = k[1] * g[t];
            if t > 0 {
                acc += k[2] * g[t - 1];
            }
            if t + 1 < cols {
                acc += k[0] * g[t + 1];
            }
            gi[t] = acc;
        }
    }
    Ok((grad_input, grad_kernels, grad_biases))
}

/// Pointwise convolution across channels: `out[t] = sum_c w[c] * in[c][t] + b`.
/// The result is a single-row tensor.
pub fn pointwise_conv_fwd(input: &Tensor2, weights: &[f64], bias: f64) -> Result<Tensor2> {
    check_channels(input.rows(), weights.len(), "weights")?;
    let cols = input.cols();
    let mut out = Tensor2::zeros(1, cols);
    {
        let o = out.row_mut(0);
        for (c, &w) in weights.iter().enumerate() {
            let x = input.row(c);
            for t in 0..cols {
                o[t] += w * x[t];
            }
        }
        for v in o.iter_mut() {
            *v += bias;
        }
    }
    Ok(out)
}

/// Gradients of [`pointwise_conv_fwd`].
pub fn pointwise_conv_bwd(
    input: &Tensor2,
    weights: &[f64],
    grad_out: &Tensor2,
) -> Result<(Tensor2, Vec<f64>, f64)> {
    check_channels(input.rows(), weights.len(), "weights")?;
    if grad_out.rows() != 1 || grad_out.cols() != input.cols() {
        return Err(Error::shape(
            format!("1x{}", input.cols()),
            format!("{}x{}", grad_out.rows(), grad_out.cols()),
        ));
    }

    let g = grad_out.row(0);
    let cols = input.cols();
    let mut grad_input = Tensor2::zeros(input.rows(), cols);
    let mut grad_weights = vec![0.0; weights.len()];
    let grad_bias = g.iter().sum();

    for c in 0..input.rows() {
        let x = input.row(c);
        let gi = grad_input.row_mut(c);
        let w = weights[c];
        let mut gw = 0.0;
        for t in 0..cols {
            gi[t] = w * g[t];
            gw += x[t] * g[t];
        }
        grad_weights[c] = gw;
    }
    Ok((grad_input, grad_weights, grad_bias))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_passes_through() {
        let input = Tensor2::from_vec(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let kernels = Tensor2::from_vec(1, 3, vec![0.0, 1.0, 0.0]).unwrap();
        let out = depthwise_conv3_fwd(&input, &kernels, &[0.0]).unwrap();
        assert_eq!(out.row(0), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn box_kernel_with_zero_padding() {
        // Hand convolution of [1,1,1] with [1,1,1]: edges see one zero.
        let input = Tensor2::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let kernels = Tensor2::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let out = depthwise_conv3_fwd(&input, &kernels, &[0.0]).unwrap();
        assert_eq!(out.row(0), &[2.0, 3.0, 2.0]);
    }

    #[test]
    fn bias_only_rows() {
        let input = Tensor2::zeros(2, 2);
        let kernels = Tensor2::zeros(2, 3);
        let out = depthwise_conv3_fwd(&input, &kernels, &[5.0, -5.0]).unwrap();
        assert_eq!(out.row(0), &[5.0, 5.0]);
        assert_eq!(out.row(1), &[-5.0, -5.0]);
    }

    #[test]
    fn kernel_channel_mismatch_is_error() {
        let input = Tensor2::zeros(2, 4);
        let kernels = Tensor2::zeros(3, 3);
        assert!(depthwise_conv3_fwd(&input, &kernels, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn identity_kernel_backward_passes_grad_through() {
        let input = Tensor2::from_vec(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let kernels = Tensor2::from_vec(1, 3, vec![0.0, 1.0, 0.0]).unwrap();
        let grad_out = Tensor2::from_vec(1, 4, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (gi, _, _) = depthwise_conv3_bwd(&input, &kernels, &grad_out).unwrap();
        assert_eq!(gi.row(0), grad_out.row(0));
    }

    #[test]
    fn zero_upstream_grad_zeroes_everything() {
        let input = Tensor2::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let kernels = Tensor2::from_vec(2, 3, vec![0.3; 6]).unwrap();
        let grad_out = Tensor2::zeros(2, 3);
        let (gi, gk, gb) = depthwise_conv3_bwd(&input, &kernels, &grad_out).unwrap();
        assert!(gi.data().iter().all(|&v| v == 0.0));
        assert!(gk.data().iter().all(|&v| v == 0.0));
        assert!(gb.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pointwise_sums_channels() {
        let input = Tensor2::from_vec(2, 3, vec![1.0, 2.0, 3.0, 10.0, 20.0, 30.0]).unwrap();
        let out = pointwise_conv_fwd(&input, &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(out.row(0), &[11.0, 22.0, 33.0]);
    }

    #[test]
    fn pointwise_zero_weights_gives_bias() {
        let input = Tensor2::from_vec(2, 3, vec![1.0; 6]).unwrap();
        let out = pointwise_conv_fwd(&input, &[0.0, 0.0], 7.0).unwrap();
        assert_eq!(out.row(0), &[7.0, 7.0, 7.0]);
    }

    #[test]
    fn pointwise_weight_mismatch_is_error() {
        let input = Tensor2::zeros(2, 3);
        assert!(pointwise_conv_fwd(&input, &[1.0], 0.0).is_err());
    }
}
