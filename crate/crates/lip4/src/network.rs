//! Whole-network Lipschitz bounds by per-layer composition.
//!
//! The bound of a sequential network is the product of per-layer bounds:
//! conv and dense layers use a chosen spectral estimator, the whitelisted
//! activations count as 1-Lipschitz, max-pooling contributes
//! `ceil(min(k, n-k+1)/stride)^2`, batch normalization
//! `max_i |gamma_i| / sqrt(var_i + eps)`, and a residual block wrapping a
//! branch of layers contributes `1 + (product of branch bounds)` via the
//! addition rule against the identity shortcut.
//!
//! Network specs are JSON documents; conv and dense layers reference LIPK
//! weight files relative to the spec's directory. Unknown fields and unknown
//! layer kinds are rejected.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch;
use crate::conv::{
    conv_power_iteration, exact_conv_spectrum, gram_conv, ConvError, ConvKernel, Padding,
};
use crate::dense::{gram_rescaled, power_iteration, SpectralError};
use crate::linalg::{svd, ComplexMatrix, LinalgError};
use crate::lipk::{self, LipkError};

/// Estimator used for conv and dense layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    /// Rescaled Gram iteration (certified upper bound).
    Gram,
    /// Exact SVD (per frequency block for conv layers).
    Exact,
    /// Power iteration (estimate, not an upper bound).
    Power,
}

impl std::fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundMethod::Gram => "gram",
            BoundMethod::Exact => "exact",
            BoundMethod::Power => "power",
        })
    }
}

/// 1-Lipschitz activation whitelist. Anything else must be declared as a
/// `custom_activation` with an explicit constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

/// A layer with its weights loaded.
#[derive(Debug, Clone)]
pub enum Layer {
    Conv(ConvKernel),
    Dense(ComplexMatrix),
    Activation(Activation),
    MaxPool { k: usize, stride: usize, n: usize },
    BatchNorm {
        gamma: Vec<f64>,
        variance: Vec<f64>,
        epsilon: f64,
    },
    Residual(Vec<Layer>),
    CustomActivation(f64),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Dense(_) => "dense",
            Layer::Activation(_) => "activation",
            Layer::MaxPool { .. } => "maxpool",
            Layer::BatchNorm { .. } => "batchnorm",
            Layer::Residual(_) => "residual_block",
            Layer::CustomActivation(_) => "custom_activation",
        }
    }

    /// Short human-readable payload description for report tables.
    pub fn shape(&self) -> String {
        match self {
            Layer::Conv(k) => format!(
                "{}x{}x{}x{} (n={})",
                k.c_out(),
                k.c_in(),
                k.k(),
                k.k(),
                k.input_size()
            ),
            Layer::Dense(m) => format!("{}x{}", m.rows(), m.cols()),
            Layer::Activation(a) => format!("{a:?}").to_lowercase(),
            Layer::MaxPool { k, stride, n } => format!("k={k} stride={stride} n={n}"),
            Layer::BatchNorm { gamma, .. } => format!("{} channels", gamma.len()),
            Layer::Residual(inner) => format!("{} inner layers", inner.len()),
            Layer::CustomActivation(l) => format!("L={l}"),
        }
    }
}

/// An ordered stack of layers.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub name: String,
    layers: Vec<Layer>,
}

impl NetworkSpec {
    pub fn new(name: impl Into<String>, layers: Vec<Layer>) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::EmptyNetwork);
        }
        Ok(Self {
            name: name.into(),
            layers,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

/// Per-layer entry of a [`NetworkBoundReport`].
#[derive(Debug, Clone, Serialize)]
pub struct LayerBound {
    pub index: usize,
    pub kind: String,
    pub shape: String,
    pub bound: f64,
    pub elapsed_seconds: f64,
}

/// Whole-network bound: `total` is the product of the per-layer bounds.
#[derive(Debug, Clone, Serialize)]
pub struct NetworkBoundReport {
    pub total: f64,
    pub per_layer: Vec<LayerBound>,
    pub method: BoundMethod,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network has no layers")]
    EmptyNetwork,
    #[error("cannot read network spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed network spec: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("layer {index}: unknown activation {name:?}; declare a custom_activation with an explicit constant")]
    UnknownActivation { index: usize, name: String },
    #[error("layer {index}: weight file {path:?}: {source}")]
    LayerFile {
        index: usize,
        path: String,
        source: LipkError,
    },
    #[error("layer {index}: {detail}")]
    InvalidLayer { index: usize, detail: String },
    #[error("layer {index}: {source}")]
    Conv {
        index: usize,
        source: ConvError,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    name: String,
    layers: Vec<LayerFile>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum LayerFile {
    Conv {
        file: String,
        input_size: usize,
        #[serde(default = "default_padding")]
        padding: Padding,
    },
    Dense {
        file: String,
    },
    Activation {
        name: String,
    },
    Maxpool {
        k: usize,
        stride: usize,
        n: usize,
    },
    Batchnorm {
        gamma: Vec<f64>,
        variance: Vec<f64>,
        epsilon: f64,
    },
    ResidualBlock {
        layers: Vec<LayerFile>,
    },
    CustomActivation {
        lipschitz: f64,
    },
}

fn default_padding() -> Padding {
    Padding::Circular
}

/// Loads a JSON network spec, resolving LIPK paths relative to the spec file.
pub fn load_network(path: &Path) -> Result<NetworkSpec, NetworkError> {
    let text = std::fs::read_to_string(path)?;
    let file: NetworkFile = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let layers = file
        .layers
        .into_iter()
        .enumerate()
        .map(|(index, layer)| load_layer(layer, index, dir))
        .collect::<Result<Vec<_>, _>>()?;
    NetworkSpec::new(file.name, layers)
}

fn load_layer(layer: LayerFile, index: usize, dir: &Path) -> Result<Layer, NetworkError> {
    match layer {
        LayerFile::Conv {
            file,
            input_size,
            padding,
        } => {
            let tensor = lipk::read_tensor(&dir.join(&file)).map_err(|source| {
                NetworkError::LayerFile {
                    index,
                    path: file.clone(),
                    source,
                }
            })?;
            let kernel = ConvKernel::new(tensor, input_size, padding)
                .map_err(|source| NetworkError::Conv { index, source })?;
            Ok(Layer::Conv(kernel))
        }
        LayerFile::Dense { file } => {
            let matrix = lipk::read_matrix(&dir.join(&file)).map_err(|source| {
                NetworkError::LayerFile {
                    index,
                    path: file.clone(),
                    source,
                }
            })?;
            Ok(Layer::Dense(matrix))
        }
        LayerFile::Activation { name } => match name.as_str() {
            "relu" => Ok(Layer::Activation(Activation::Relu)),
            "sigmoid" => Ok(Layer::Activation(Activation::Sigmoid)),
            "tanh" => Ok(Layer::Activation(Activation::Tanh)),
            _ => Err(NetworkError::UnknownActivation { index, name }),
        },
        LayerFile::Maxpool { k, stride, n } => {
            if k == 0 || stride == 0 || n == 0 {
                return Err(NetworkError::InvalidLayer {
                    index,
                    detail: format!("maxpool parameters must be positive (k={k}, stride={stride}, n={n})"),
                });
            }
            if k > n {
                return Err(NetworkError::InvalidLayer {
                    index,
                    detail: format!("maxpool window k={k} exceeds input size n={n}"),
                });
            }
            Ok(Layer::MaxPool { k, stride, n })
        }
        LayerFile::Batchnorm {
            gamma,
            variance,
            epsilon,
        } => {
            if gamma.is_empty() || gamma.len() != variance.len() {
                return Err(NetworkError::InvalidLayer {
                    index,
                    detail: "batchnorm gamma and variance must be non-empty and equal length"
                        .into(),
                });
            }
            if epsilon <= 0.0 || !epsilon.is_finite()
                || variance.iter().any(|v| *v < 0.0 || !v.is_finite())
            {
                return Err(NetworkError::InvalidLayer {
                    index,
                    detail: "batchnorm needs epsilon > 0 and finite variance >= 0".into(),
                });
            }
            Ok(Layer::BatchNorm {
                gamma,
                variance,
                epsilon,
            })
        }
        LayerFile::ResidualBlock { layers } => {
            let inner = layers
                .into_iter()
                .map(|l| load_layer(l, index, dir))
                .collect::<Result<Vec<_>, _>>()?;
            if inner.is_empty() {
                return Err(NetworkError::InvalidLayer {
                    index,
                    detail: "residual_block needs at least one inner layer".into(),
                });
            }
            Ok(Layer::Residual(inner))
        }
        LayerFile::CustomActivation { lipschitz } => {
            if !(lipschitz.is_finite() && lipschitz >= 0.0) {
                return Err(NetworkError::InvalidLayer {
                    index,
                    detail: "custom_activation constant must be finite and non-negative".into(),
                });
            }
            Ok(Layer::CustomActivation(lipschitz))
        }
    }
}

// ---------------------------------------------------------------------------
// Bounds

/// Lipschitz bound of a single layer under the chosen estimator.
pub fn layer_bound(
    layer: &Layer,
    method: BoundMethod,
    n_iter: usize,
    seed: u64,
) -> Result<f64, NetworkError> {
    match layer {
        Layer::Conv(kernel) => {
            let report = match method {
                BoundMethod::Gram => gram_conv(kernel, n_iter),
                BoundMethod::Exact => exact_conv_spectrum(kernel),
                BoundMethod::Power => conv_power_iteration(kernel, n_iter, seed),
            }
            .map_err(|source| NetworkError::Conv { index: 0, source })?;
            Ok(report.value)
        }
        Layer::Dense(matrix) => match method {
            BoundMethod::Gram => Ok(gram_rescaled(matrix, n_iter).value),
            BoundMethod::Exact => Ok(svd(matrix)?.spectral_norm()),
            BoundMethod::Power => Ok(power_iteration(matrix, n_iter, seed)?.value),
        },
        Layer::Activation(_) => Ok(1.0),
        Layer::MaxPool { k, stride, n } => {
            let reach = (*k).min(n - k + 1);
            let per_axis = reach.div_ceil(*stride);
            Ok((per_axis * per_axis) as f64)
        }
        Layer::BatchNorm {
            gamma,
            variance,
            epsilon,
        } => Ok(gamma
            .iter()
            .zip(variance)
            .map(|(g, v)| g.abs() / (v + epsilon).sqrt())
            .fold(0.0f64, f64::max)),
        Layer::Residual(inner) => {
            let mut branch = 1.0;
            for layer in inner {
                branch *= layer_bound(layer, method, n_iter, seed)?;
            }
            Ok(1.0 + branch)
        }
        Layer::CustomActivation(l) => Ok(*l),
    }
}

/// Bound for the whole network: per-layer bounds (computed as an independent
/// batch) and their product.
pub fn network_bound(
    net: &NetworkSpec,
    method: BoundMethod,
    n_iter: usize,
    seed: u64,
) -> Result<NetworkBoundReport, NetworkError> {
    let results = batch::map(net.layers(), |layer| {
        let start = Instant::now();
        let bound = layer_bound(layer, method, n_iter, seed);
        (bound, start.elapsed().as_secs_f64())
    });

    let mut per_layer = Vec::with_capacity(results.len());
    let mut total = 1.0;
    for (index, ((bound, elapsed), layer)) in results.into_iter().zip(net.layers()).enumerate() {
        let bound = bound.map_err(|e| match e {
            NetworkError::Conv { source, .. } => NetworkError::Conv { index, source },
            other => other,
        })?;
        total *= bound;
        per_layer.push(LayerBound {
            index,
            kind: layer.kind().to_string(),
            shape: layer.shape(),
            bound,
            elapsed_seconds: elapsed,
        });
    }

    Ok(NetworkBoundReport {
        total,
        per_layer,
        method,
    })
}
