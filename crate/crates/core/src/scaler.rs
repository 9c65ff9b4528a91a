//! Column-wise min-max scaling to `[0, 1]`, fitted on the training rows.

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(column: &str, values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !(max > min) {
            return Err(Error::DegenerateColumn {
                column: column.to_string(),
                value: min,
            });
        }
        Ok(MinMax { min, max })
    }

    /// `(x - min) / (max - min)`; values outside the fitted range are not clipped.
    pub fn scale(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn unscale(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub features: [MinMax; 3],
    pub target: MinMax,
}

const FEATURE_COLUMNS: [&str; 3] = ["f1", "f2", "f3"];

impl ScalerParams {
    pub fn apply_features(&self, features: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.features[i].scale(features[i]))
    }

    pub fn invert_features(&self, scaled: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.features[i].unscale(scaled[i]))
    }

    pub fn apply_target(&self, alpha1: f64) -> f64 {
        self.target.scale(alpha1)
    }

    pub fn invert_target(&self, scaled: f64) -> f64 {
        self.target.unscale(scaled)
    }
}

/// Records column-wise extrema of the given (training) rows.
pub fn fit_scaler(train_rows: &[FeatureVector]) -> Result<ScalerParams> {
    if train_rows.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: train_rows.len(),
        });
    }
    let mut features = [MinMax { min: 0.0, max: 0.0 }; 3];
    for (i, column) in FEATURE_COLUMNS.iter().enumerate() {
        features[i] = MinMax::fit(column, train_rows.iter().map(|r| r.features[i]))?;
    }
    let target = MinMax::fit("alpha1", train_rows.iter().map(|r| r.target_alpha1))?;
    Ok(ScalerParams { features, target })
}
