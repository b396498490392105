//! The forecasting network.
//!
//! Each window is expanded into a fixed stack of basis rows, passed
//! through `L` blocks of two depthwise-conv layers (each conv -> batch
//! norm -> GELU), rejoined with the expansion through a residual sum,
//! collapsed to a single row by a pointwise convolution (again with batch
//! norm and GELU), and mapped to the next-point prediction by a dot
//! product head. Gradients for every trainable tensor are derived by
//! hand; the basis expansion itself is a constant feature map, so no
//! gradient flows into the raw window.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{expand, BasisKind, FeatureConfig};
use crate::error::{Error, Result};
use crate::ndcore::{
    affine_bwd, affine_fwd, batchnorm_bwd, batchnorm_infer_fwd, batchnorm_train_fwd,
    depthwise_conv3_bwd, depthwise_conv3_fwd, gelu_bwd, gelu_fwd, pointwise_conv_bwd,
    pointwise_conv_fwd, BnCache, BnState, Tensor2,
};

/// Layers per block; a block is the composition `CNN(CNN(.))`.
const LAYERS_PER_BLOCK: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub feature: FeatureConfig,
    /// Number of two-layer conv blocks `L`.
    pub n_blocks: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(feature: FeatureConfig) -> Self {
        ModelConfig {
            feature,
            n_blocks: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.feature.validate()?;
        if self.n_blocks < 1 {
            return Err(Error::InvalidConfig("n_blocks must be at least 1".into()));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.feature.channel_count()
    }

    /// Exact count of trainable scalars; running statistics are excluded.
    pub fn param_count(&self) -> usize {
        let c = self.channels();
        let t = self.feature.window_len;
        let conv_layers = self.n_blocks * LAYERS_PER_BLOCK;
        // Per conv layer: 3-tap kernels + biases + gamma + beta.
        let per_layer = 3 * c + c + 2 * c;
        // Pointwise reduction: weights + bias + gamma + beta.
        let down = c + 1 + 2;
        // Prediction head: weights + bias.
        let proj = t + 1;
        conv_layers * per_layer + down + proj
    }

    /// Shape fingerprint used to pair model files with configurations.
    /// The init seed does not change tensor shapes and is excluded.
    pub fn fingerprint(&self) -> u64 {
        let f = &self.feature;
        let mut bytes = Vec::with_capacity(40);
        bytes.extend((f.n_terms as u64).to_le_bytes());
        bytes.extend((f.window_len as u64).to_le_bytes());
        bytes.push(basis_tag(f.basis));
        bytes.push(u8::from(f.include_raw));
        bytes.push(u8::from(f.include_value));
        bytes.push(u8::from(f.include_position));
        bytes.extend((self.n_blocks as u64).to_le_bytes());
        fnv1a(&bytes)
    }
}

fn basis_tag(basis: BasisKind) -> u8 {
    match basis {
        BasisKind::Fourier => 0,
        BasisKind::Taylor => 1,
        BasisKind::ChebyshevFirst => 2,
        BasisKind::ChebyshevSecond => 3,
    }
}

fn basis_from_tag(tag: u8) -> Result<BasisKind> {
    Ok(match tag {
        0 => BasisKind::Fourier,
        1 => BasisKind::Taylor,
        2 => BasisKind::ChebyshevFirst,
        3 => BasisKind::ChebyshevSecond,
        other => return Err(Error::CorruptModel(format!("unknown basis tag {other}"))),
    })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

/// One conv layer: per-channel 3-tap kernels, biases, and batch norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub kernels: Tensor2,
    pub biases: Vec<f64>,
    pub bn: BnState,
}

/// All trainable tensors plus batch-norm running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub conv_layers: Vec<ConvLayer>,
    pub down_weights: Vec<f64>,
    pub down_bias: f64,
    pub down_bn: BnState,
    pub proj_weights: Vec<f64>,
    pub proj_bias: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayerGrads {
    pub kernels: Tensor2,
    pub biases: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Gradient accumulators mirroring the trainable tensors of [`ModelParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub conv_layers: Vec<ConvLayerGrads>,
    pub down_weights: Vec<f64>,
    pub down_bias: f64,
    pub down_gamma: Vec<f64>,
    pub down_beta: Vec<f64>,
    pub proj_weights: Vec<f64>,
    pub proj_bias: f64,
}

impl Gradients {
    pub fn zeros(config: &ModelConfig) -> Self {
        let c = config.channels();
        let t = config.feature.window_len;
        Gradients {
            conv_layers: (0..config.n_blocks * LAYERS_PER_BLOCK)
                .map(|_| ConvLayerGrads {
                    kernels: Tensor2::zeros(c, 3),
                    biases: vec![0.0; c],
                    gamma: vec![0.0; c],
                    beta: vec![0.0; c],
                })
                .collect(),
            down_weights: vec![0.0; c],
            down_bias: 0.0,
            down_gamma: vec![0.0; 1],
            down_beta: vec![0.0; 1],
            proj_weights: vec![0.0; t],
            proj_bias: 0.0,
        }
    }

    /// Gradient tensors in the canonical parameter order.
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.conv_layers {
            out.push(layer.kernels.data());
            out.push(&layer.biases);
            out.push(&layer.gamma);
            out.push(&layer.beta);
        }
        out.push(&self.down_weights);
        out.push(std::slice::from_ref(&self.down_bias));
        out.push(&self.down_gamma);
        out.push(&self.down_beta);
        out.push(&self.proj_weights);
        out.push(std::slice::from_ref(&self.proj_bias));
        out
    }
}

/// Intermediate activations captured during a training-mode forward pass.
pub struct ForwardCache {
    /// Basis expansion of each window.
    pub h0: Vec<Tensor2>,
    /// Per conv layer, in forward order.
    pub conv: Vec<ConvLayerCache>,
    /// Residual sum fed into the pointwise reduction.
    pub h_residual: Vec<Tensor2>,
    pub down_bn_cache: BnCache,
    /// Pre-GELU output of the reduction batch norm.
    pub down_bn_out: Vec<Tensor2>,
    /// Final per-window pattern row (input of the prediction head).
    pub pattern: Vec<Tensor2>,
    pub predictions: Vec<f64>,
}

pub struct ConvLayerCache {
    /// Input to this layer's convolution.
    pub input: Vec<Tensor2>,
    pub bn_cache: BnCache,
    /// Pre-GELU activations.
    pub bn_out: Vec<Tensor2>,
}

/// Expands every row of a window matrix into its feature tensor.
pub fn expand_batch(cfg: &FeatureConfig, windows: &Tensor2) -> Result<Vec<Tensor2>> {
    let mut out = Vec::with_capacity(windows.rows());
    for w in 0..windows.rows() {
        out.push(expand(windows.row(w), cfg)?.tensor);
    }
    Ok(out)
}

fn check_features(params: &ModelParams, features: &[Tensor2]) -> Result<()> {
    if features.is_empty() {
        return Err(Error::EmptyInput("window batch"));
    }
    let c = params.config.channels();
    let t = params.config.feature.window_len;
    for f in features {
        if f.rows() != c || f.cols() != t {
            return Err(Error::shape(
                format!("{c}x{t} features"),
                format!("{}x{}", f.rows(), f.cols()),
            ));
        }
    }
    Ok(())
}

fn gelu_tensor(t: &Tensor2) -> Tensor2 {
    t.map(gelu_fwd)
}

impl ModelParams {
    /// Seeded initialization: conv/head weights and biases are uniform in
    /// `(-1/sqrt(fan_in), 1/sqrt(fan_in))`; batch norm starts at identity.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let c = config.channels();
        let t = config.feature.window_len;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut uniform = |bound: f64, len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-bound..bound)).collect()
        };

        let conv_bound = 1.0 / 3f64.sqrt();
        let mut conv_layers = Vec::with_capacity(config.n_blocks * LAYERS_PER_BLOCK);
        for _ in 0..config.n_blocks * LAYERS_PER_BLOCK {
            let kernels = Tensor2::from_vec(c, 3, uniform(conv_bound, c * 3))?;
            let biases = uniform(conv_bound, c);
            conv_layers.push(ConvLayer {
                kernels,
                biases,
                bn: BnState::new(c),
            });
        }

        let down_bound = 1.0 / (c as f64).sqrt();
        let down_weights = uniform(down_bound, c);
        let down_bias = uniform(down_bound, 1)[0];

        let proj_bound = 1.0 / (t as f64).sqrt();
        let proj_weights = uniform(proj_bound, t);
        let proj_bias = uniform(proj_bound, 1)[0];

        Ok(ModelParams {
            config: config.clone(),
            conv_layers,
            down_weights,
            down_bias,
            down_bn: BnState::new(1),
            proj_weights,
            proj_bias,
        })
    }

    /// Trainable tensors as mutable slices in the canonical order
    /// (conv layers, then the reduction, then the head).
    pub fn flat_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.conv_layers {
            out.push(layer.kernels.data_mut());
            out.push(&mut layer.biases);
            out.push(&mut layer.bn.gamma);
            out.push(&mut layer.bn.beta);
        }
        out.push(&mut self.down_weights);
        out.push(std::slice::from_mut(&mut self.down_bias));
        out.push(&mut self.down_bn.gamma);
        out.push(&mut self.down_bn.beta);
        out.push(&mut self.proj_weights);
        out.push(std::slice::from_mut(&mut self.proj_bias));
        out
    }

    /// Trainable tensors as shared slices, same order as [`flat_mut`](Self::flat_mut).
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.conv_layers {
            out.push(layer.kernels.data());
            out.push(&layer.biases);
            out.push(&layer.bn.gamma);
            out.push(&layer.bn.beta);
        }
        out.push(&self.down_weights);
        out.push(std::slice::from_ref(&self.down_bias));
        out.push(&self.down_bn.gamma);
        out.push(&self.down_bn.beta);
        out.push(&self.proj_weights);
        out.push(std::slice::from_ref(&self.proj_bias));
        out
    }

    /// Training-mode forward over pre-expanded features. Batch norm uses
    /// batch statistics and refreshes the running estimates.
    pub fn forward_train(&mut self, features: &[Tensor2]) -> Result<(Vec<f64>, ForwardCache)> {
        check_features(self, features)?;
        let batch = features.len();

        let mut current: Vec<Tensor2> = features.to_vec();
        let mut conv_caches = Vec::with_capacity(self.conv_layers.len());
        for layer in &mut self.conv_layers {
            let input = current;
            let conv_out: Vec<Tensor2> = input
                .iter()
                .map(|t| depthwise_conv3_fwd(t, &layer.kernels, &layer.biases))
                .collect::<Result<_>>()?;
            let (bn_out, bn_cache) = batchnorm_train_fwd(&conv_out, &mut layer.bn)?;
            current = bn_out.iter().map(gelu_tensor).collect();
            conv_caches.push(ConvLayerCache {
                input,
                bn_cache,
                bn_out,
            });
        }

        let h_residual: Vec<Tensor2> = current
            .iter()
            .zip(features)
            .map(|(h, h0)| h.add(h0))
            .collect::<Result<_>>()?;

        let down_out: Vec<Tensor2> = h_residual
            .iter()
            .map(|t| pointwise_conv_fwd(t, &self.down_weights, self.down_bias))
            .collect::<Result<_>>()?;
        let (down_bn_out, down_bn_cache) = batchnorm_train_fwd(&down_out, &mut self.down_bn)?;
        let pattern: Vec<Tensor2> = down_bn_out.iter().map(gelu_tensor).collect();

        let mut predictions = Vec::with_capacity(batch);
        for p in &pattern {
            predictions.push(affine_fwd(p.row(0), &self.proj_weights, self.proj_bias)?);
        }

        Ok((
            predictions.clone(),
            ForwardCache {
                h0: features.to_vec(),
                conv: conv_caches,
                h_residual,
                down_bn_cache,
                down_bn_out,
                pattern,
                predictions,
            },
        ))
    }

    /// Inference-mode forward over pre-expanded features; batch norm uses
    /// the running statistics and nothing is cached.
    pub fn forward_infer(&self, features: &[Tensor2]) -> Result<Vec<f64>> {
        check_features(self, features)?;

        let mut current: Vec<Tensor2> = features.to_vec();
        for layer in &self.conv_layers {
            let conv_out: Vec<Tensor2> = current
                .iter()
                .map(|t| depthwise_conv3_fwd(t, &layer.kernels, &layer.biases))
                .collect::<Result<_>>()?;
            let bn_out = batchnorm_infer_fwd(&conv_out, &layer.bn)?;
            current = bn_out.iter().map(gelu_tensor).collect();
        }

        let mut predictions = Vec::with_capacity(features.len());
        for (h, h0) in current.iter().zip(features) {
            let residual = h.add(h0)?;
            let down = pointwise_conv_fwd(&residual, &self.down_weights, self.down_bias)?;
            let bn = batchnorm_infer_fwd(std::slice::from_ref(&down), &self.down_bn)?;
            let pattern = gelu_tensor(&bn[0]);
            predictions.push(affine_fwd(pattern.row(0), &self.proj_weights, self.proj_bias)?);
        }
        Ok(predictions)
    }

    /// Expand raw windows (one per row) and run an inference forward.
    pub fn predict(&self, windows: &Tensor2) -> Result<Vec<f64>> {
        let features = expand_batch(&self.config.feature, windows)?;
        self.forward_infer(&features)
    }

    /// Backward pass from per-prediction gradients to all trainable
    /// tensors. The cache must come from a matching [`forward_train`](Self::forward_train).
    pub fn backward(&self, cache: &ForwardCache, grad_predictions: &[f64]) -> Result<Gradients> {
        let batch = cache.predictions.len();
        if grad_predictions.len() != batch {
            return Err(Error::LengthMismatch {
                expected: batch,
                got: grad_predictions.len(),
            });
        }
        if cache.conv.len() != self.conv_layers.len()
            || cache
                .h0
                .first()
                .is_none_or(|t| t.rows() != self.config.channels()
                    || t.cols() != self.config.feature.window_len)
        {
            return Err(Error::shape(
                "cache from a matching training forward",
                "mismatched cache",
            ));
        }

        let mut grads = Gradients::zeros(&self.config);
        let t_len = self.config.feature.window_len;

        // Head, then GELU and batch norm of the reduction.
        let mut grad_down_bn_out: Vec<Tensor2> = Vec::with_capacity(batch);
        for w in 0..batch {
            let (grad_pattern, grad_w, grad_b) =
                affine_bwd(cache.pattern[w].row(0), &self.proj_weights, grad_predictions[w])?;
            for (acc, g) in grads.proj_weights.iter_mut().zip(&grad_w) {
                *acc += g;
            }
            grads.proj_bias += grad_b;

            let mut g = Tensor2::zeros(1, t_len);
            {
                let pre = cache.down_bn_out[w].row(0);
                let out = g.row_mut(0);
                for i in 0..t_len {
                    out[i] = grad_pattern[i] * gelu_bwd(pre[i]);
                }
            }
            grad_down_bn_out.push(g);
        }

        let (grad_down_conv, down_gamma, down_beta) =
            batchnorm_bwd(&cache.down_bn_cache, &self.down_bn, &grad_down_bn_out)?;
        grads.down_gamma = down_gamma;
        grads.down_beta = down_beta;

        // Pointwise reduction back to the residual sum.
        let mut grad_h: Vec<Tensor2> = Vec::with_capacity(batch);
        for w in 0..batch {
            let (grad_in, grad_w, grad_b) =
                pointwise_conv_bwd(&cache.h_residual[w], &self.down_weights, &grad_down_conv[w])?;
            for (acc, g) in grads.down_weights.iter_mut().zip(&grad_w) {
                *acc += g;
            }
            grads.down_bias += grad_b;
            grad_h.push(grad_in);
        }
        // The residual also feeds the expansion, which is a constant
        // feature map; that branch of the gradient is dropped.

        for (idx, layer) in self.conv_layers.iter().enumerate().rev() {
            let layer_cache = &cache.conv[idx];
            let grad_bn_out: Vec<Tensor2> = grad_h
                .iter()
                .zip(&layer_cache.bn_out)
                .map(|(g, pre)| {
                    let mut out = Tensor2::zeros(pre.rows(), pre.cols());
                    for c in 0..pre.rows() {
                        let gr = g.row(c);
                        let pr = pre.row(c);
                        let or = out.row_mut(c);
                        for i in 0..pr.len() {
                            or[i] = gr[i] * gelu_bwd(pr[i]);
                        }
                    }
                    out
                })
                .collect();

            let (grad_conv_out, grad_gamma, grad_beta) =
                batchnorm_bwd(&layer_cache.bn_cache, &layer.bn, &grad_bn_out)?;
            grads.conv_layers[idx].gamma = grad_gamma;
            grads.conv_layers[idx].beta = grad_beta;

            let mut grad_input: Vec<Tensor2> = Vec::with_capacity(batch);
            for w in 0..batch {
                let (gi, gk, gb) = depthwise_conv3_bwd(
                    &layer_cache.input[w],
                    &layer.kernels,
                    &grad_conv_out[w],
                )?;
                for (acc, g) in grads.conv_layers[idx]
                    .kernels
                    .data_mut()
                    .iter_mut()
                    .zip(gk.data())
                {
                    *acc += g;
                }
                for (acc, g) in grads.conv_layers[idx].biases.iter_mut().zip(&gb) {
                    *acc += g;
                }
                grad_input.push(gi);
            }
            grad_h = grad_input;
        }

        Ok(grads)
    }
}

// ---------------------------------------------------------------------------
// Serialization: versioned little-endian binary with a config fingerprint.
// Layout: magic, version, fingerprint, config fields, trainable tensors in
// canonical order, then batch-norm running statistics.
// ---------------------------------------------------------------------------

const MODEL_MAGIC: &[u8; 8] = b"TSADMDL\0";
const MODEL_VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::CorruptModel("file is truncated".into()));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn push_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend(v.to_le_bytes());
    }
}

impl ModelParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let f = &self.config.feature;
        let mut buf = Vec::new();
        buf.extend(MODEL_MAGIC);
        buf.extend(MODEL_VERSION.to_le_bytes());
        buf.extend(self.config.fingerprint().to_le_bytes());
        buf.extend((f.n_terms as u64).to_le_bytes());
        buf.extend((f.window_len as u64).to_le_bytes());
        buf.push(basis_tag(f.basis));
        buf.push(u8::from(f.include_raw));
        buf.push(u8::from(f.include_value));
        buf.push(u8::from(f.include_position));
        buf.extend((self.config.n_blocks as u64).to_le_bytes());
        buf.extend(self.config.seed.to_le_bytes());

        for tensor in self.flat() {
            push_f64s(&mut buf, tensor);
        }
        for layer in &self.conv_layers {
            push_f64s(&mut buf, &layer.bn.running_mean);
            push_f64s(&mut buf, &layer.bn.running_var);
        }
        push_f64s(&mut buf, &self.down_bn.running_mean);
        push_f64s(&mut buf, &self.down_bn.running_var);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MODEL_MAGIC {
            return Err(Error::CorruptModel("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(Error::CorruptModel(format!(
                "unsupported version {version}"
            )));
        }
        let stored_fingerprint = r.u64()?;

        let n_terms = r.u64()? as usize;
        let window_len = r.u64()? as usize;
        let basis = basis_from_tag(r.u8()?)?;
        let include_raw = r.u8()? != 0;
        let include_value = r.u8()? != 0;
        let include_position = r.u8()? != 0;
        let n_blocks = r.u64()? as usize;
        let seed = r.u64()?;

        let config = ModelConfig {
            feature: FeatureConfig {
                n_terms,
                window_len,
                basis,
                include_raw,
                include_value,
                include_position,
            },
            n_blocks,
            seed,
        };
        config
            .validate()
            .map_err(|e| Error::CorruptModel(e.to_string()))?;
        if config.fingerprint() != stored_fingerprint {
            return Err(Error::CorruptModel(
                "stored fingerprint does not match stored configuration".into(),
            ));
        }

        let c = config.channels();
        let mut params = ModelParams {
            config: config.clone(),
            conv_layers: (0..config.n_blocks * LAYERS_PER_BLOCK)
                .map(|_| ConvLayer {
                    kernels: Tensor2::zeros(c, 3),
                    biases: vec![0.0; c],
                    bn: BnState::new(c),
                })
                .collect(),
            down_weights: vec![0.0; c],
            down_bias: 0.0,
            down_bn: BnState::new(1),
            proj_weights: vec![0.0; window_len],
            proj_bias: 0.0,
        };

        // Tensor sizes in canonical order, then fill them in.
        let sizes: Vec<usize> = params.flat().iter().map(|s| s.len()).collect();
        let mut values = Vec::with_capacity(sizes.len());
        for size in &sizes {
            values.push(r.f64s(*size)?);
        }
        for (slot, value) in params.flat_mut().into_iter().zip(&values) {
            slot.copy_from_slice(value);
        }
        for layer in &mut params.conv_layers {
            layer.bn.running_mean = r.f64s(c)?;
            layer.bn.running_var = r.f64s(c)?;
        }
        params.down_bn.running_mean = r.f64s(1)?;
        params.down_bn.running_var = r.f64s(1)?;

        if r.pos != bytes.len() {
            return Err(Error::CorruptModel(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    /// Load and reject files whose configuration fingerprint differs from
    /// the expected one.
    pub fn load_compatible(path: &Path, expected: &ModelConfig) -> Result<Self> {
        let params = Self::load(path)?;
        let got = params.config.fingerprint();
        let want = expected.fingerprint();
        if got != want {
            return Err(Error::ConfigMismatch {
                expected: want,
                got,
            });
        }
        Ok(params)
    }
}
