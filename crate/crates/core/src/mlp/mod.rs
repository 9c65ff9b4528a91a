//! Feed-forward regression network with ReLU hidden layers and a linear
//! output unit, trained by Adam on mean squared difference.
//!
//! Each layer `h` holds one `(fan_in + 1) x fan_out` matrix. Row 0 is the
//! weight of the constant bias unit `a_0 = 1`, so the net input of unit `i` is
//! `z_i = sum_{k=0..fan_in} a_k W[k, i]`.

mod adam;
mod format;
mod train;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param_space::FeatureSetKind;
use crate::scaler::ScalerParams;

pub use adam::Adam;
pub use format::{load_model, read_model, save_model, write_model, FORMAT_VERSION};
pub use train::{train, train_observed, BatchMode, EpochRecord, TrainConfig, TrainingTrace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
}

impl MlpArchitecture {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden_dims.contains(&0) {
            return Err(Error::InvalidParams(format!(
                "layer sizes must be >= 1: {input_dim} -> {hidden_dims:?} -> {output_dim}"
            )));
        }
        Ok(MlpArchitecture {
            input_dim,
            hidden_dims,
            output_dim,
        })
    }

    /// `3 -> (128, 2048, 2048, 128) -> 1`.
    pub fn paper_scale() -> Self {
        MlpArchitecture {
            input_dim: 3,
            hidden_dims: vec![128, 2048, 2048, 128],
            output_dim: 1,
        }
    }

    /// `3 -> (64, 128, 128, 64) -> 1`, small enough to train on one core.
    pub fn desk_scale() -> Self {
        MlpArchitecture {
            input_dim: 3,
            hidden_dims: vec![64, 128, 128, 64],
            output_dim: 1,
        }
    }

    /// All layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.output_dim);
        dims
    }

    /// `(fan_in + 1, fan_out)` per weight layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.dims().windows(2).map(|w| (w[0] + 1, w[1])).collect()
    }
}

/// Weights only; see [`MlpModel`] for the scaler and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    architecture: MlpArchitecture,
    layers: Vec<Array2<f64>>,
}

/// Activations kept from a forward pass for reverse-mode differentiation.
struct Tape {
    /// Layer inputs `a^(h-1)`, one per weight layer, without the bias column.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    hidden_z: Vec<Array2<f64>>,
    output: Array2<f64>,
}

/// Gradients of the batch loss, one matrix per layer.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Array2<f64>>,
    pub loss: f64,
}

impl Network {
    pub fn from_layers(architecture: MlpArchitecture, layers: Vec<Array2<f64>>) -> Result<Self> {
        let shapes = architecture.layer_shapes();
        if shapes.len() != layers.len() {
            return Err(Error::ShapeMismatch {
                expected: shapes.len(),
                got: layers.len(),
            });
        }
        for (layer, &(rows, cols)) in layers.iter().zip(&shapes) {
            if layer.dim() != (rows, cols) {
                return Err(Error::ShapeMismatch {
                    expected: rows * cols,
                    got: layer.len(),
                });
            }
        }
        Ok(Network {
            architecture,
            layers,
        })
    }

    pub fn zeros(architecture: MlpArchitecture) -> Self {
        let layers = architecture
            .layer_shapes()
            .into_iter()
            .map(Array2::zeros)
            .collect();
        Network {
            architecture,
            layers,
        }
    }

    /// He-style uniform initialisation `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`
    /// for the weights and zero biases.
    pub fn init(architecture: MlpArchitecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = architecture
            .layer_shapes()
            .into_iter()
            .map(|(rows, cols)| {
                let limit = (6.0 / (rows - 1) as f64).sqrt();
                let mut w = Array2::zeros((rows, cols));
                for v in w.slice_mut(s![1.., ..]).iter_mut() {
                    *v = rng.random_range(-limit..limit);
                }
                w
            })
            .collect();
        Network {
            architecture,
            layers,
        }
    }

    pub fn architecture(&self) -> &MlpArchitecture {
        &self.architecture
    }

    pub fn layers(&self) -> &[Array2<f64>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.layers
    }

    /// Output for one already-scaled input vector.
    pub fn forward(&self, scaled: &[f64]) -> Result<f64> {
        if scaled.len() != self.architecture.input_dim {
            return Err(Error::ShapeMismatch {
                expected: self.architecture.input_dim,
                got: scaled.len(),
            });
        }
        let input = ArrayView2::from_shape((1, scaled.len()), scaled).expect("contiguous row");
        Ok(self.predict_batch(input)?[0])
    }

    /// First output for every row of `inputs`.
    pub fn predict_batch(&self, inputs: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.check_inputs(inputs)?;
        let mut a = inputs.to_owned();
        let last = self.layers.len() - 1;
        for (h, w) in self.layers.iter().enumerate() {
            let mut z = affine(a.view(), w);
            if h < last {
                z.mapv_inplace(relu);
            }
            a = z;
        }
        Ok(a.column(0).to_owned())
    }

    fn check_inputs(&self, inputs: ArrayView2<f64>) -> Result<()> {
        if inputs.ncols() != self.architecture.input_dim {
            return Err(Error::ShapeMismatch {
                expected: self.architecture.input_dim,
                got: inputs.ncols(),
            });
        }
        Ok(())
    }

    fn forward_tape(&self, inputs: ArrayView2<f64>) -> Tape {
        let last = self.layers.len() - 1;
        let mut tape_inputs = Vec::with_capacity(self.layers.len());
        let mut hidden_z = Vec::with_capacity(last);
        let mut a = inputs.to_owned();
        for (h, w) in self.layers.iter().enumerate() {
            let z = affine(a.view(), w);
            tape_inputs.push(a);
            if h < last {
                a = z.mapv(relu);
                hidden_z.push(z);
            } else {
                a = z;
            }
        }
        Tape {
            inputs: tape_inputs,
            hidden_z,
            output: a,
        }
    }

    /// Exact gradient of the batch MSD (first output against `targets`)
    /// by reverse-mode chain rule. ReLU'(0) is taken as 0.
    pub fn backward(&self, inputs: ArrayView2<f64>, targets: ArrayView1<f64>) -> Result<Gradients> {
        self.check_inputs(inputs)?;
        if inputs.nrows() != targets.len() {
            return Err(Error::LengthMismatch {
                left: inputs.nrows(),
                right: targets.len(),
            });
        }
        if targets.is_empty() {
            return Err(Error::TooFewRows { needed: 1, got: 0 });
        }
        let n = targets.len() as f64;
        let tape = self.forward_tape(inputs);

        let mut delta = Array2::zeros(tape.output.raw_dim());
        let mut loss = 0.0;
        for (i, &y) in targets.iter().enumerate() {
            let r = tape.output[[i, 0]] - y;
            loss += r * r;
            delta[[i, 0]] = 2.0 * r / n;
        }
        loss /= n;

        let mut grads: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for h in (0..self.layers.len()).rev() {
            let w = &self.layers[h];
            let a_prev = &tape.inputs[h];
            let mut g = Array2::zeros(w.raw_dim());
            g.row_mut(0).assign(&delta.sum_axis(Axis(0)));
            g.slice_mut(s![1.., ..]).assign(&a_prev.t().dot(&delta));
            grads.push(g);
            if h > 0 {
                let mut next = delta.dot(&w.slice(s![1.., ..]).t());
                Zip::from(&mut next)
                    .and(&tape.hidden_z[h - 1])
                    .for_each(|d, &z| {
                        if z <= 0.0 {
                            *d = 0.0;
                        }
                    });
                delta = next;
            }
        }
        grads.reverse();
        Ok(Gradients {
            layers: grads,
            loss,
        })
    }
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// `a W[1.., ..] + W[0, ..]`.
fn affine(a: ArrayView2<f64>, w: &Array2<f64>) -> Array2<f64> {
    let mut z = a.dot(&w.slice(s![1.., ..]));
    z += &w.row(0);
    z
}

/// `(1 / N) sum (y_i - yhat_i)^2`.
pub fn msd_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (t - p) * (t - p))
        .sum();
    Ok(sum / predictions.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub kind: FeatureSetKind,
    pub seed: u64,
    /// Seed of the 40/40/20 split the model was trained on, if known.
    pub split_seed: Option<u64>,
    pub best_epoch: usize,
    pub best_validation_msd: f64,
    pub train_config: TrainConfig,
    /// Invocation that produced the model, recorded by the command line tool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_config: Option<serde_json::Value>,
}

/// A trained network together with the scaler it expects its inputs in.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub network: Network,
    pub scaler: ScalerParams,
    pub metadata: ModelMetadata,
}

impl MlpModel {
    /// Network output for already-scaled features (scaled target units).
    pub fn forward(&self, scaled_features: &[f64]) -> Result<f64> {
        self.network.forward(scaled_features)
    }

    /// Scales raw statistics, runs the network and un-scales the output to
    /// an `alpha1` estimate. No clamping.
    pub fn predict_alpha1(&self, features: &[f64; 3]) -> Result<f64> {
        let scaled = self.scaler.apply_features(features);
        Ok(self.scaler.invert_target(self.network.forward(&scaled)?))
    }

    pub fn architecture(&self) -> &MlpArchitecture {
        self.network.architecture()
    }
}
