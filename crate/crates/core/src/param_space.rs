//! Feature-set kinds and the parameter region each one is trained on.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{mu, GarchParams, MomentOrder, SINGULARITY_TOL};

/// Which third statistic accompanies `(E(x^2), Gamma_4)` as network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureSetKind {
    MomentsG6,
    MomentsG8,
    MomentsG10,
    AutocovLag(u32),
}

impl FeatureSetKind {
    /// The highest moment that must be finite for every feature to exist.
    pub fn required_moment(self) -> MomentOrder {
        match self {
            FeatureSetKind::MomentsG6 => MomentOrder::SIXTH,
            FeatureSetKind::MomentsG8 => MomentOrder::EIGHTH,
            FeatureSetKind::MomentsG10 => MomentOrder::TENTH,
            FeatureSetKind::AutocovLag(_) => MomentOrder::FOURTH,
        }
    }

    /// Name of the third feature column.
    pub fn third_feature(self) -> String {
        match self {
            FeatureSetKind::MomentsG6 => "gamma6".into(),
            FeatureSetKind::MomentsG8 => "gamma8".into(),
            FeatureSetKind::MomentsG10 => "gamma10".into(),
            FeatureSetKind::AutocovLag(n) => format!("autocov_hat_lag{n}"),
        }
    }
}

impl fmt::Display for FeatureSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSetKind::MomentsG6 => f.write_str("g6"),
            FeatureSetKind::MomentsG8 => f.write_str("g8"),
            FeatureSetKind::MomentsG10 => f.write_str("g10"),
            FeatureSetKind::AutocovLag(n) => write!(f, "lag{n}"),
        }
    }
}

impl FromStr for FeatureSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g6" => Ok(FeatureSetKind::MomentsG6),
            "g8" => Ok(FeatureSetKind::MomentsG8),
            "g10" => Ok(FeatureSetKind::MomentsG10),
            other => other
                .strip_prefix("lag")
                .and_then(|n| n.parse::<u32>().ok())
                .filter(|&n| n >= 1)
                .map(FeatureSetKind::AutocovLag)
                .ok_or_else(|| {
                    Error::format("kind", format!("unknown feature-set kind `{s}` (g6, g8, g10, lag<n>)"))
                }),
        }
    }
}

impl TryFrom<String> for FeatureSetKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureSetKind> for String {
    fn from(kind: FeatureSetKind) -> Self {
        kind.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub alpha1_max: f64,
    pub alpha0_min: f64,
    pub alpha0_max: f64,
    pub beta1_max: f64,
}

pub const ALPHA0_MIN: f64 = 1e-6;
pub const ALPHA0_MAX: f64 = 1e-3;

/// `alpha1_max = a_m^(-1/m)`: the moment bound at `beta1 = 0`.
pub fn bounds_for(kind: FeatureSetKind) -> ParamBounds {
    let alpha1_max = match kind {
        FeatureSetKind::MomentsG6 => (1.0f64 / 15.0).powf(1.0 / 3.0),
        FeatureSetKind::MomentsG8 => (1.0f64 / 105.0).powf(0.25),
        FeatureSetKind::MomentsG10 => (1.0f64 / 945.0).powf(0.2),
        FeatureSetKind::AutocovLag(_) => (1.0f64 / 3.0).sqrt(),
    };
    ParamBounds {
        alpha1_max,
        alpha0_min: ALPHA0_MIN,
        alpha0_max: ALPHA0_MAX,
        beta1_max: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alpha0Scale {
    #[default]
    Linear,
    LogUniform,
}

impl FromStr for Alpha0Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Alpha0Scale::Linear),
            "log" | "log-uniform" => Ok(Alpha0Scale::LogUniform),
            other => Err(Error::format("alpha0-scale", format!("unknown scale `{other}`"))),
        }
    }
}

/// Acceptance predicate used by the sampler: stationary and every statistic
/// the kind needs is finite with a non-degenerate denominator.
pub fn admissible(kind: FeatureSetKind, alpha1: f64, beta1: f64) -> bool {
    if alpha1 + beta1 >= 1.0 {
        return false;
    }
    (1..=kind.required_moment().get()).all(|m| 1.0 - mu(alpha1, beta1, m) > SINGULARITY_TOL)
}

const STALL_CHECK_AFTER: usize = 10_000;
const MIN_ACCEPTANCE_RATE: f64 = 1e-3;

pub fn sample_params(kind: FeatureSetKind, count: usize, seed: u64) -> Result<Vec<GarchParams>> {
    sample_params_with(kind, count, seed, Alpha0Scale::Linear)
}

/// Uniform draws on `[alpha0_min, alpha0_max] x [0, alpha1_max] x [0, 1)`
/// filtered through [`admissible`]. Deterministic in `seed`.
pub fn sample_params_with(
    kind: FeatureSetKind,
    count: usize,
    seed: u64,
    scale: Alpha0Scale,
) -> Result<Vec<GarchParams>> {
    sample_region(bounds_for(kind), count, seed, scale, |a1, b1| admissible(kind, a1, b1))
}

fn sample_region(
    bounds: ParamBounds,
    count: usize,
    seed: u64,
    scale: Alpha0Scale,
    accept: impl Fn(f64, f64) -> bool,
) -> Result<Vec<GarchParams>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        let alpha0 = match scale {
            Alpha0Scale::Linear => rng.random_range(bounds.alpha0_min..=bounds.alpha0_max),
            Alpha0Scale::LogUniform => rng
                .random_range(bounds.alpha0_min.ln()..=bounds.alpha0_max.ln())
                .exp(),
        };
        let alpha1 = rng.random_range(0.0..=bounds.alpha1_max);
        let beta1 = rng.random_range(0.0..bounds.beta1_max);
        if accept(alpha1, beta1) {
            out.push(GarchParams::new(alpha0, alpha1, beta1)?);
        }
        if attempts >= STALL_CHECK_AFTER && (out.len() as f64) < MIN_ACCEPTANCE_RATE * attempts as f64 {
            return Err(Error::RejectionStall {
                accepted: out.len(),
                attempts,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::moment_exists;
    use approx::assert_relative_eq;

    #[test]
    fn bounds_table() {
        assert_relative_eq!(bounds_for(FeatureSetKind::MomentsG6).alpha1_max, 0.405_480_133_038_226_7, max_relative = 1e-14);
        assert_relative_eq!(bounds_for(FeatureSetKind::MomentsG8).alpha1_max, 0.312_393_993_692_025_6, max_relative = 1e-14);
        assert_relative_eq!(bounds_for(FeatureSetKind::MomentsG10).alpha1_max, 0.254_046_747_023_285_2, max_relative = 1e-14);
        let lag = bounds_for(FeatureSetKind::AutocovLag(6));
        assert_relative_eq!(lag.alpha1_max, 0.577_350_269_189_625_8, max_relative = 1e-14);
        assert_eq!(lag.alpha0_min, 1e-6);
        assert_eq!(lag.alpha0_max, 1e-3);
        assert_eq!(lag.beta1_max, 1.0);
    }

    #[test]
    fn bound_is_where_highest_moment_diverges_at_zero_beta() {
        for kind in [FeatureSetKind::MomentsG6, FeatureSetKind::MomentsG8, FeatureSetKind::MomentsG10] {
            let a = bounds_for(kind).alpha1_max;
            let m = kind.required_moment();
            assert!(moment_exists(a * (1.0 - 1e-9), 0.0, m));
            assert!(!moment_exists(a * (1.0 + 1e-9), 0.0, m));
        }
    }

    #[test]
    fn kind_round_trips_through_text() {
        for kind in [
            FeatureSetKind::MomentsG6,
            FeatureSetKind::MomentsG8,
            FeatureSetKind::MomentsG10,
            FeatureSetKind::AutocovLag(2),
            FeatureSetKind::AutocovLag(17),
        ] {
            assert_eq!(kind.to_string().parse::<FeatureSetKind>().unwrap(), kind);
        }
        assert!("lag0".parse::<FeatureSetKind>().is_err());
        assert!("g7".parse::<FeatureSetKind>().is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_params(FeatureSetKind::MomentsG6, 5, 7).unwrap();
        let b = sample_params(FeatureSetKind::MomentsG6, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_params(FeatureSetKind::MomentsG6, 5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sixth_moment_sample_satisfies_rejection() {
        let draws = sample_params(FeatureSetKind::MomentsG6, 10_000, 3).unwrap();
        assert_eq!(draws.len(), 10_000);
        let bound = bounds_for(FeatureSetKind::MomentsG6);
        for p in draws {
            let (a, b) = (p.alpha1(), p.beta1());
            assert!(15.0 * a * a * a + 9.0 * a * a * b + 3.0 * a * b * b + b * b * b < 1.0);
            assert!(a + b < 1.0);
            assert!((bound.alpha0_min..=bound.alpha0_max).contains(&p.alpha0()));
        }
    }

    #[test]
    fn lag_sample_satisfies_fourth_moment() {
        for p in sample_params(FeatureSetKind::AutocovLag(6), 10_000, 11).unwrap() {
            let (a, b) = (p.alpha1(), p.beta1());
            assert!(3.0 * a * a + 2.0 * a * b + b * b < 1.0);
        }
    }

    #[test]
    fn empty_region_stalls() {
        let bounds = bounds_for(FeatureSetKind::MomentsG6);
        let err = sample_region(bounds, 3, 1, Alpha0Scale::Linear, |_, _| false).unwrap_err();
        assert!(matches!(err, Error::RejectionStall { accepted: 0, attempts: 10_000 }));
    }

    #[test]
    fn log_uniform_alpha0_stays_in_range() {
        let draws = sample_params_with(FeatureSetKind::MomentsG10, 2_000, 5, Alpha0Scale::LogUniform).unwrap();
        assert!(draws.iter().all(|p| (ALPHA0_MIN..=ALPHA0_MAX).contains(&p.alpha0())));
        let below_1e5 = draws.iter().filter(|p| p.alpha0() < 1e-5).count();
        // a third of the mass is in the lowest decade
        assert!(below_1e5 > 500, "{below_1e5}");
    }
}
