//! Out-of-sample scoring: predicted vs actual `alpha1` on a partition.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{common_kind, FeatureVector};
use crate::error::{Error, Result};
use crate::mlp::{msd_loss, MlpModel};

/// Least-squares line `predicted = slope * actual + intercept` and the MSD
/// between the two, in unscaled `alpha1` units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub slope: f64,
    pub intercept: f64,
    pub msd: f64,
    pub n: usize,
}

/// Ordinary least-squares fit of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewRows { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateColumn {
            column: "actual".into(),
            value: mx,
        });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// `(actual, predicted)` pairs for `rows`, which must share the model's kind.
pub fn predict_rows(model: &MlpModel, rows: &[FeatureVector]) -> Result<Vec<(f64, f64)>> {
    let kind = common_kind(rows)?;
    if kind != model.metadata.kind {
        return Err(Error::KindMismatch {
            expected: model.metadata.kind.to_string(),
            found: kind.to_string(),
        });
    }
    rows.iter()
        .map(|r| Ok((r.target_alpha1, model.predict_alpha1(&r.features)?)))
        .collect()
}

pub fn metrics(pairs: &[(f64, f64)]) -> Result<EvalMetrics> {
    let (actual, predicted): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let (slope, intercept) = least_squares(&actual, &predicted)?;
    Ok(EvalMetrics {
        slope,
        intercept,
        msd: msd_loss(&predicted, &actual)?,
        n: pairs.len(),
    })
}

/// Plot-ready CSV with header `actual,predicted`.
pub fn write_scatter<W: Write>(pairs: &[(f64, f64)], mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "actual,predicted")?;
    for (a, p) in pairs {
        writeln!(writer, "{a:.16e},{p:.16e}")?;
    }
    writer.flush()
}
