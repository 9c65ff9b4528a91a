use std::io::Write;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Adam, MlpArchitecture, MlpModel, ModelMetadata, Network};
use crate::dataset::{common_kind, DatasetSplit, FeatureVector};
use crate::error::{Error, Result};
use crate::scaler::ScalerParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    FullBatch,
    MiniBatch(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub batch_mode: BatchMode,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            max_epochs: 5000,
            patience: 100,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            batch_mode: BatchMode::FullBatch,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// 1000 epochs of 64-row mini-batches at learning rate 0.003; the
    /// settings the single-core acceptance runs use.
    pub fn desk_scale(seed: u64) -> Self {
        TrainConfig {
            max_epochs: 1000,
            learning_rate: 0.003,
            batch_mode: BatchMode::MiniBatch(64),
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning rate {} must be > 0", self.learning_rate));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return bad("max_epochs and patience must be >= 1".into());
        }
        if self.batch_mode == BatchMode::MiniBatch(0) {
            return bad("mini-batch size must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean of the batch losses seen during the epoch (scaled target units).
    pub train_msd: f64,
    /// Validation MSD after the epoch's last update (scaled target units).
    pub validation_msd: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingTrace {
    /// Epoch with the lowest validation MSD (first one on ties).
    pub fn best(&self) -> Option<EpochRecord> {
        self.epochs
            .iter()
            .copied()
            .fold(None, |best: Option<EpochRecord>, r| match best {
                Some(b) if !(r.validation_msd < b.validation_msd) => Some(b),
                _ => Some(r),
            })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::format("trace", e);
        w.write_record(["epoch", "train_msd", "validation_msd"]).map_err(to_err)?;
        for r in &self.epochs {
            w.write_record([
                r.epoch.to_string(),
                format!("{:.16e}", r.train_msd),
                format!("{:.16e}", r.validation_msd),
            ])
            .map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::format("trace", e))?;
        Ok(())
    }
}

fn design_matrix(rows: &[FeatureVector], scaler: &ScalerParams) -> (Array2<f64>, Array1<f64>) {
    let mut x = Array2::zeros((rows.len(), 3));
    let mut y = Array1::zeros(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let f = scaler.apply_features(&r.features);
        for j in 0..3 {
            x[[i, j]] = f[j];
        }
        y[i] = scaler.apply_target(r.target_alpha1);
    }
    (x, y)
}

const SHUFFLE_STREAM: u64 = 2;

pub fn train(
    arch: &MlpArchitecture,
    config: &TrainConfig,
    split: &DatasetSplit,
    scaler: &ScalerParams,
) -> Result<(MlpModel, TrainingTrace)> {
    train_observed(arch, config, split, scaler, |_, msd| msd)
}

/// Like [`train`], but each epoch's measured validation MSD is passed through
/// `observe(epoch, msd)` and the returned value is what gets recorded and
/// drives early stopping.
pub fn train_observed(
    arch: &MlpArchitecture,
    config: &TrainConfig,
    split: &DatasetSplit,
    scaler: &ScalerParams,
    mut observe: impl FnMut(usize, f64) -> f64,
) -> Result<(MlpModel, TrainingTrace)> {
    config.validate()?;
    if split.validate.is_empty() {
        return Err(Error::NoValidationRows);
    }
    let kind = common_kind(&split.train)?;
    if arch.input_dim != 3 || arch.output_dim != 1 {
        return Err(Error::ShapeMismatch {
            expected: 3,
            got: arch.input_dim,
        });
    }

    let (x_train, y_train) = design_matrix(&split.train, scaler);
    let (x_val, y_val) = design_matrix(&split.validate, scaler);
    let n_train = split.train.len();
    let batch_size = match config.batch_mode {
        BatchMode::FullBatch => n_train,
        BatchMode::MiniBatch(size) => size.min(n_train),
    };

    let mut network = Network::init(arch.clone(), config.seed);
    let mut adam = Adam::new(
        &arch.layer_shapes(),
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_eps,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..n_train).collect();

    let mut trace = TrainingTrace::default();
    let mut best_network = network.clone();
    let mut best_msd = f64::INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;

    for epoch in 1..=config.max_epochs {
        let mut loss_sum = 0.0;
        if batch_size == n_train {
            let g = network.backward(x_train.view(), y_train.view())?;
            loss_sum += g.loss * n_train as f64;
            adam.update(network.layers_mut(), &g.layers);
        } else {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch_size) {
                let xb = x_train.select(Axis(0), chunk);
                let yb = y_train.select(Axis(0), chunk);
                let g = network.backward(xb.view(), yb.view())?;
                loss_sum += g.loss * chunk.len() as f64;
                adam.update(network.layers_mut(), &g.layers);
            }
        }
        let predicted = network.predict_batch(x_val.view())?;
        let measured = (&predicted - &y_val).mapv(|r| r * r).mean().unwrap_or(f64::NAN);
        let validation_msd = observe(epoch, measured);
        trace.epochs.push(EpochRecord {
            epoch,
            train_msd: loss_sum / n_train as f64,
            validation_msd,
        });

        if validation_msd < best_msd {
            best_msd = validation_msd;
            best_epoch = epoch;
            best_network = network.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }

    let model = MlpModel {
        network: best_network,
        scaler: *scaler,
        metadata: ModelMetadata {
            kind,
            seed: config.seed,
            split_seed: None,
            best_epoch,
            best_validation_msd: best_msd,
            train_config: config.clone(),
            run_config: None,
        },
    };
    Ok((model, trace))
}
