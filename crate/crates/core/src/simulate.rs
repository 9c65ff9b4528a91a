//! GARCH-normal(1,1) sample paths and their empirical statistics.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::moments::{self, GarchParams, MomentOrder};
use crate::param_space::FeatureSetKind;

/// Names the innovation generator so outputs can record it.
pub const GENERATOR: &str = "ChaCha8Rng(seed_from_u64) + rand_distr::StandardNormal (ziggurat)";

pub const DEFAULT_BURN_IN: usize = 1_000;

/// `t_steps` returns after discarding `burn_in` steps. `sigma_0^2` starts at
/// the unconditional variance.
pub fn simulate(p: &GarchParams, t_steps: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    if p.persistence() >= 1.0 {
        return Err(Error::NonStationary {
            persistence: p.persistence(),
        });
    }
    if t_steps == 0 {
        return Err(Error::SeriesTooShort { len: 0, needed: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma2 = moments::second_moment(p);
    let mut out = Vec::with_capacity(t_steps);
    for t in 0..burn_in + t_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let x = sigma2.sqrt() * z;
        if t >= burn_in {
            out.push(x);
        }
        sigma2 = p.alpha0() + p.alpha1() * x * x + p.beta1() * sigma2;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub second_moment: f64,
    pub gamma4: f64,
    pub gamma6: Option<f64>,
    pub gamma8: Option<f64>,
    pub gamma10: Option<f64>,
    /// Normalized autocovariance of `x^2` by lag.
    pub autocov_hat: BTreeMap<u32, f64>,
    pub n_obs: usize,
}

/// Sample moments and lagged autocovariances of `x^2`, without bias
/// corrections. `autocov_hat[n]` is the mean of `(y_t - ybar)(y_{t+n} - ybar)`
/// over the `N - n` available pairs, divided by `ybar^2`, with `y = x^2`.
pub fn estimate_stats(series: &[f64], lags: &[u32]) -> Result<EmpiricalStats> {
    let max_lag = lags.iter().copied().max().unwrap_or(0) as usize;
    let needed = max_lag + 2;
    if series.len() < needed {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed,
        });
    }
    let n = series.len() as f64;
    let mut sums = [0.0f64; 5];
    for &x in series {
        let x2 = x * x;
        let mut power = x2;
        for s in sums.iter_mut() {
            *s += power;
            power *= x2;
        }
    }
    let raw: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let m2 = raw[0];
    let standardized = |k: usize| raw[k - 1] / m2.powi(k as i32);

    let squares: Vec<f64> = series.iter().map(|x| x * x - m2).collect();
    let autocov_hat = lags
        .iter()
        .map(|&lag| {
            let lag_us = lag as usize;
            let pairs = squares.len() - lag_us;
            let cov: f64 = squares[..pairs]
                .iter()
                .zip(&squares[lag_us..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / pairs as f64;
            (lag, cov / (m2 * m2))
        })
        .collect();

    Ok(EmpiricalStats {
        second_moment: m2,
        gamma4: standardized(2),
        gamma6: Some(standardized(3)),
        gamma8: Some(standardized(4)),
        gamma10: Some(standardized(5)),
        autocov_hat,
        n_obs: series.len(),
    })
}

impl EmpiricalStats {
    /// Exact population statistics of `p`; moments that diverge are `None`.
    pub fn analytic(p: &GarchParams, lags: &[u32]) -> Result<Self> {
        let gamma = |m: MomentOrder| moments::standardized_moment(p, m).ok();
        Ok(EmpiricalStats {
            second_moment: moments::second_moment(p),
            gamma4: moments::gamma4_closed(p.alpha1(), p.beta1())?,
            gamma6: gamma(MomentOrder::SIXTH),
            gamma8: gamma(MomentOrder::EIGHTH),
            gamma10: gamma(MomentOrder::TENTH),
            autocov_hat: lags
                .iter()
                .map(|&n| Ok((n, moments::autocov_hat(p.alpha1(), p.beta1(), n)?)))
                .collect::<Result<_>>()?,
            n_obs: 0,
        })
    }

    /// The network input triple for `kind`, unscaled.
    pub fn features_for(&self, kind: FeatureSetKind) -> Result<[f64; 3]> {
        let name = kind.third_feature();
        let third = match kind {
            FeatureSetKind::MomentsG6 => self.gamma6,
            FeatureSetKind::MomentsG8 => self.gamma8,
            FeatureSetKind::MomentsG10 => self.gamma10,
            FeatureSetKind::AutocovLag(n) => self.autocov_hat.get(&n).copied(),
        }
        .ok_or_else(|| Error::MissingStatistic(name.clone()))?;
        for (label, v) in [("second_moment", self.second_moment), ("gamma4", self.gamma4), (name.as_str(), third)] {
            if !v.is_finite() {
                return Err(Error::MissingStatistic(format!("{label} (non-finite)")));
            }
        }
        Ok([self.second_moment, self.gamma4, third])
    }

    /// Flat JSON object; lags appear as `autocov_hat_lag<n>` keys.
    pub fn to_json(&self) -> Map<String, Value> {
        let mut map = Map::new();
        map.insert("second_moment".into(), self.second_moment.into());
        map.insert("gamma4".into(), self.gamma4.into());
        for (key, v) in [("gamma6", self.gamma6), ("gamma8", self.gamma8), ("gamma10", self.gamma10)] {
            if let Some(v) = v {
                map.insert(key.into(), v.into());
            }
        }
        for (lag, v) in &self.autocov_hat {
            map.insert(format!("autocov_hat_lag{lag}"), (*v).into());
        }
        map.insert("n_obs".into(), self.n_obs.into());
        map
    }

    /// Inverse of [`to_json`](Self::to_json); unknown keys are ignored.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::format("<document>", "stats must be a JSON object"))?;
        let number = |key: &str| -> Result<Option<f64>> {
            match obj.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(v) => v
                    .as_f64()
                    .map(Some)
                    .ok_or_else(|| Error::format(key, "expected a number")),
            }
        };
        let required = |key: &str| number(key)?.ok_or_else(|| Error::format(key, "missing field"));
        let mut autocov_hat = BTreeMap::new();
        for (key, v) in obj {
            if let Some(lag) = key.strip_prefix("autocov_hat_lag") {
                let lag: u32 = lag
                    .parse()
                    .map_err(|_| Error::format(key.as_str(), "lag suffix is not an integer"))?;
                let v = v
                    .as_f64()
                    .ok_or_else(|| Error::format(key.as_str(), "expected a number"))?;
                autocov_hat.insert(lag, v);
            }
        }
        let n_obs = match obj.get("n_obs") {
            None => 0,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::format("n_obs", "expected a non-negative integer"))?
                as usize,
        };
        Ok(EmpiricalStats {
            second_moment: required("second_moment")?,
            gamma4: required("gamma4")?,
            gamma6: number("gamma6")?,
            gamma8: number("gamma8")?,
            gamma10: number("gamma10")?,
            autocov_hat,
            n_obs,
        })
    }
}

/// Single-column CSV with header `x`.
pub fn write_series<W: Write>(series: &[f64], mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "x")?;
    for x in series {
        writeln!(writer, "{x:.16e}")?;
    }
    writer.flush()
}

/// Reads a single-column series; a non-numeric first line is taken as a header.
pub fn read_series<R: Read>(mut reader: R) -> Result<Vec<f64>> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::format("<series>", e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::format(format!("line {}", i + 1), e)),
        }
    }
    Ok(out)
}
