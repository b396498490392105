//! Expansion of a raw time window into a stack of fixed univariate
//! function rows.
//!
//! The default feature set combines three row groups:
//! * the raw window itself,
//! * harmonics of the sample values, `sin(n*x)` / `cos(n*x)`,
//! * harmonics of the window position, `sin(2*pi*n*t/T)` / `cos(2*pi*n*t/T)`.
//!
//! Alternative value bases (Taylor powers, Chebyshev polynomials) swap in
//! for the value-harmonic group; the raw and position rows are unchanged.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

/// Which family of univariate functions fills the value rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// `sin(n*x)`, `cos(n*x)` on the values as given.
    Fourier,
    /// Powers `x^n` of the window-standardized values.
    Taylor,
    /// Chebyshev polynomials of the first kind on min-max scaled values.
    ChebyshevFirst,
    /// Chebyshev polynomials of the second kind on min-max scaled values.
    ChebyshevSecond,
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Fourier => "fourier",
            BasisKind::Taylor => "taylor",
            BasisKind::ChebyshevFirst => "chebyshev1",
            BasisKind::ChebyshevSecond => "chebyshev2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(BasisKind::Fourier),
            "taylor" => Ok(BasisKind::Taylor),
            "chebyshev1" => Ok(BasisKind::ChebyshevFirst),
            "chebyshev2" => Ok(BasisKind::ChebyshevSecond),
            other => Err(Error::InvalidConfig(format!("unknown basis `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    /// Number of harmonic orders `N`.
    pub n_terms: usize,
    /// Window length `T`.
    pub window_len: usize,
    pub basis: BasisKind,
    /// Keep the raw window as a row.
    pub include_raw: bool,
    /// Keep the value-function rows (2N of them).
    pub include_value: bool,
    /// Keep the position-harmonic rows (2N of them).
    pub include_position: bool,
}

impl FeatureConfig {
    pub fn new(n_terms: usize, window_len: usize) -> Self {
        FeatureConfig {
            n_terms,
            window_len,
            basis: BasisKind::Fourier,
            include_raw: true,
            include_value: true,
            include_position: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_terms < 1 {
            return Err(Error::InvalidConfig("n_terms must be at least 1".into()));
        }
        if self.window_len < 2 {
            return Err(Error::InvalidConfig("window_len must be at least 2".into()));
        }
        if !(self.include_raw || self.include_value || self.include_position) {
            return Err(Error::InvalidConfig(
                "at least one feature group must be enabled".into(),
            ));
        }
        Ok(())
    }

    /// Number of rows the expansion produces.
    pub fn channel_count(&self) -> usize {
        let mut c = 0;
        if self.include_raw {
            c += 1;
        }
        if self.include_value {
            c += 2 * self.n_terms;
        }
        if self.include_position {
            c += 2 * self.n_terms;
        }
        c
    }

    /// Row names in expansion order.
    pub fn manifest(&self) -> Vec<Channel> {
        let mut m = Vec::with_capacity(self.channel_count());
        if self.include_raw {
            m.push(Channel::Raw);
        }
        for n in 1..=self.n_terms {
            if self.include_value {
                match self.basis {
                    BasisKind::Fourier => {
                        m.push(Channel::ValueSin(n));
                        m.push(Channel::ValueCos(n));
                    }
                    BasisKind::Taylor => {
                        m.push(Channel::Power(2 * n - 1));
                        m.push(Channel::Power(2 * n));
                    }
                    BasisKind::ChebyshevFirst => {
                        m.push(Channel::ChebFirst(2 * n - 1));
                        m.push(Channel::ChebFirst(2 * n));
                    }
                    BasisKind::ChebyshevSecond => {
                        m.push(Channel::ChebSecond(2 * n - 1));
                        m.push(Channel::ChebSecond(2 * n));
                    }
                }
            }
            if self.include_position {
                m.push(Channel::PositionSin(n));
                m.push(Channel::PositionCos(n));
            }
        }
        m
    }
}

/// Identity of one expansion row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Raw,
    ValueSin(usize),
    ValueCos(usize),
    PositionSin(usize),
    PositionCos(usize),
    Power(usize),
    ChebFirst(usize),
    ChebSecond(usize),
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Raw => write!(f, "x"),
            Channel::ValueSin(n) => write!(f, "sin({n}*x)"),
            Channel::ValueCos(n) => write!(f, "cos({n}*x)"),
            Channel::PositionSin(n) => write!(f, "sin(2pi*{n}*t/T)"),
            Channel::PositionCos(n) => write!(f, "cos(2pi*{n}*t/T)"),
            Channel::Power(n) => write!(f, "x^{n}"),
            Channel::ChebFirst(n) => write!(f, "T{n}(x)"),
            Channel::ChebSecond(n) => write!(f, "U{n}(x)"),
        }
    }
}

/// A stacked feature matrix (channels x window length) plus its manifest.
#[derive(Clone, Debug)]
pub struct FeatureTensor {
    pub tensor: Tensor2,
    pub manifest: Vec<Channel>,
}

/// Min-max scale into `[-1, 1]`; constant windows collapse to zeros.
fn minmax_scale(window: &[f64]) -> Vec<f64> {
    let min = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max - min <= 0.0 {
        return vec![0.0; window.len()];
    }
    let span = max - min;
    window.iter().map(|&v| 2.0 * (v - min) / span - 1.0).collect()
}

/// Standardize within the window; constant windows collapse to zeros.
fn zscore_scale(window: &[f64]) -> Vec<f64> {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return vec![0.0; window.len()];
    }
    let std = var.sqrt();
    window.iter().map(|&v| (v - mean) / std).collect()
}

/// Chebyshev of the second kind, `U_n(x)` for `x` in `[-1, 1]`, taking the
/// limit value `(+/-1)^n * (n+1)` at the endpoints where the closed form
/// divides by zero.
fn chebyshev_second(n: usize, x: f64) -> f64 {
    let theta = x.clamp(-1.0, 1.0).acos();
    let denom = theta.sin();
    if denom.abs() < 1e-12 {
        let sign: f64 = if x >= 0.0 { 1.0 } else { -1.0 };
        return sign.powi(n as i32) * (n as f64 + 1.0);
    }
    (((n as f64) + 1.0) * theta).sin() / denom
}

fn value_rows(basis: BasisKind, degree: usize, scaled: &[f64], out: &mut [f64]) {
    match basis {
        BasisKind::Fourier => unreachable!("fourier uses sin/cos pairs directly"),
        BasisKind::Taylor => {
            for (o, &x) in out.iter_mut().zip(scaled) {
                *o = x.powi(degree as i32);
            }
        }
        BasisKind::ChebyshevFirst => {
            for (o, &x) in out.iter_mut().zip(scaled) {
                *o = ((degree as f64) * x.clamp(-1.0, 1.0).acos()).cos();
            }
        }
        BasisKind::ChebyshevSecond => {
            for (o, &x) in out.iter_mut().zip(scaled) {
                *o = chebyshev_second(degree, x);
            }
        }
    }
}

/// Expand one window into its feature tensor.
///
/// Fourier value rows use the samples as given; Taylor standardizes and
/// Chebyshev min-max scales within the window first. Position rows run
/// over `t = 0..T-1` regardless of the values.
pub fn expand(window: &[f64], cfg: &FeatureConfig) -> Result<FeatureTensor> {
    cfg.validate()?;
    if window.len() != cfg.window_len {
        return Err(Error::LengthMismatch {
            expected: cfg.window_len,
            got: window.len(),
        });
    }
    if let Some(i) = window.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }

    let t_len = cfg.window_len;
    let manifest = cfg.manifest();
    let mut tensor = Tensor2::zeros(manifest.len(), t_len);

    let scaled: Option<Vec<f64>> = match cfg.basis {
        BasisKind::Fourier => None,
        BasisKind::Taylor => Some(zscore_scale(window)),
        BasisKind::ChebyshevFirst | BasisKind::ChebyshevSecond => Some(minmax_scale(window)),
    };

    for (r, ch) in manifest.iter().enumerate() {
        let row = tensor.row_mut(r);
        match *ch {
            Channel::Raw => row.copy_from_slice(window),
            Channel::ValueSin(n) => {
                for (o, &x) in row.iter_mut().zip(window) {
                    *o = (n as f64 * x).sin();
                }
            }
            Channel::ValueCos(n) => {
                for (o, &x) in row.iter_mut().zip(window) {
                    *o = (n as f64 * x).cos();
                }
            }
            Channel::PositionSin(n) => {
                for (t, o) in row.iter_mut().enumerate() {
                    *o = (2.0 * PI * n as f64 * t as f64 / t_len as f64).sin();
                }
            }
            Channel::PositionCos(n) => {
                for (t, o) in row.iter_mut().enumerate() {
                    *o = (2.0 * PI * n as f64 * t as f64 / t_len as f64).cos();
                }
            }
            Channel::Power(n) | Channel::ChebFirst(n) | Channel::ChebSecond(n) => {
                value_rows(cfg.basis, n, scaled.as_ref().unwrap(), row);
            }
        }
    }

    Ok(FeatureTensor { tensor, manifest })
}
