//! Dense array arithmetic and differentiable kernels.
//!
//! Every kernel is a pure function with an explicit backward companion,
//! so the whole model can be differentiated by hand and checked against
//! finite differences. All arithmetic is `f64`.

mod act;
mod adam;
mod affine;
mod conv;
mod norm;
mod tensor;

pub use act::{gelu_bwd, gelu_fwd};
pub use adam::{adam_step, AdamState};
pub use affine::{affine_bwd, affine_fwd, mse_loss};
pub use conv::{
    depthwise_conv3_bwd, depthwise_conv3_fwd, pointwise_conv_bwd, pointwise_conv_fwd,
};
pub use norm::{batchnorm_bwd, batchnorm_infer_fwd, batchnorm_train_fwd, BnCache, BnState};
pub use tensor::Tensor2;
