//! From statistics to a full parameter triple: the network supplies `alpha1`,
//! kurtosis and variance give `beta1` and `alpha0` in closed form.

mod solver;

pub use solver::{solve_exact, solve_exact_all, Gamma4Curve, SCAN_POINTS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::moments::{moment_exists, GarchParams};
use crate::param_space::{bounds_for, FeatureSetKind};
use crate::simulate::EmpiricalStats;

/// Lower clamp for the network's `alpha1`.
pub const ALPHA1_FLOOR: f64 = 1e-6;

/// `1 - 2 alpha1^2 - 6 alpha1^2 / (Gamma_4 - 3)`.
pub fn beta1_radicand(alpha1: f64, gamma4: f64) -> f64 {
    1.0 - 2.0 * alpha1 * alpha1 - 6.0 * alpha1 * alpha1 / (gamma4 - 3.0)
}

/// `beta1 = sqrt(1 - 2 alpha1^2 - 6 alpha1^2 / (Gamma_4 - 3)) - alpha1`.
pub fn invert_beta1(alpha1: f64, gamma4: f64) -> Result<f64> {
    if !(alpha1 > 0.0 && alpha1.is_finite()) {
        return Err(Error::InvalidParams(format!("alpha1 = {alpha1} must be > 0")));
    }
    if !(gamma4 > 3.0) {
        return Err(Error::KurtosisTooLow { gamma4 });
    }
    let radicand = beta1_radicand(alpha1, gamma4);
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { alpha1, radicand });
    }
    let beta1 = radicand.sqrt() - alpha1;
    if beta1 < 0.0 || beta1 >= 1.0 - alpha1 {
        return Err(Error::BetaOutOfRange { alpha1, beta1 });
    }
    Ok(beta1)
}

/// `alpha0 = E(x^2) (1 - alpha1 - beta1)`.
pub fn invert_alpha0(sigma2: f64, alpha1: f64, beta1: f64) -> Result<f64> {
    let persistence = alpha1 + beta1;
    if persistence >= 1.0 {
        return Err(Error::NonStationaryPair { persistence });
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParams(format!("second moment {sigma2} must be > 0")));
    }
    Ok(sigma2 * (1.0 - persistence))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub radicand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GarchParams,
    /// Network output before clamping.
    pub alpha1_raw: f64,
    pub clamped: bool,
    pub kind: FeatureSetKind,
    pub diagnostics: FitDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct FlatFitResult {
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
    alpha1_raw: f64,
    clamped: bool,
    kind: FeatureSetKind,
    radicand: f64,
}

impl Serialize for FitResult {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FlatFitResult {
            alpha0: self.params.alpha0(),
            alpha1: self.params.alpha1(),
            beta1: self.params.beta1(),
            alpha1_raw: self.alpha1_raw,
            clamped: self.clamped,
            kind: self.kind,
            radicand: self.diagnostics.radicand,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FitResult {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let flat = FlatFitResult::deserialize(deserializer)?;
        let params = GarchParams::new(flat.alpha0, flat.alpha1, flat.beta1).map_err(serde::de::Error::custom)?;
        Ok(FitResult {
            params,
            alpha1_raw: flat.alpha1_raw,
            clamped: flat.clamped,
            kind: flat.kind,
            diagnostics: FitDiagnostics {
                radicand: flat.radicand,
            },
        })
    }
}

/// Clamps `alpha1` into `[ALPHA1_FLOOR, alpha1_max]`, reporting whether it moved.
pub fn clamp_alpha1(raw: f64, kind: FeatureSetKind) -> Result<(f64, bool)> {
    if raw.is_nan() {
        return Err(Error::InvalidParams("network produced NaN for alpha1".into()));
    }
    let clamped = raw.clamp(ALPHA1_FLOOR, bounds_for(kind).alpha1_max);
    Ok((clamped, clamped != raw))
}

/// `alpha1` and the statistics to a validated triple.
pub fn complete_params(alpha1: f64, stats: &EmpiricalStats, kind: FeatureSetKind) -> Result<(GarchParams, f64)> {
    let beta1 = invert_beta1(alpha1, stats.gamma4)?;
    let alpha0 = invert_alpha0(stats.second_moment, alpha1, beta1)?;
    let params = GarchParams::new(alpha0, alpha1, beta1)?;
    let order = kind.required_moment();
    if !moment_exists(alpha1, beta1, order) {
        return Err(Error::NonFiniteMoment { order: 2 * order.get() });
    }
    Ok((params, beta1_radicand(alpha1, stats.gamma4)))
}

pub fn fit(model: &MlpModel, stats: &EmpiricalStats) -> Result<FitResult> {
    let kind = model.metadata.kind;
    let features = stats.features_for(kind)?;
    let alpha1_raw = model.predict_alpha1(&features)?;
    let (alpha1, clamped) = clamp_alpha1(alpha1_raw, kind)?;
    let (params, radicand) = complete_params(alpha1, stats, kind)?;
    Ok(FitResult {
        params,
        alpha1_raw,
        clamped,
        kind,
        diagnostics: FitDiagnostics { radicand },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{MlpArchitecture, ModelMetadata, Network, TrainConfig};
    use crate::moments::{gamma4_closed, second_moment};
    use crate::scaler::{MinMax, ScalerParams};
    use approx::assert_relative_eq;
    use ndarray::Array2;

    #[test]
    fn beta1_examples() {
        assert_relative_eq!(invert_beta1(0.1, 3.0 + 6.0 * 0.01 / 0.17).unwrap(), 0.8, epsilon = 1e-12);
        assert_relative_eq!(invert_beta1(0.1, 3.352941).unwrap(), 0.8, epsilon = 1e-6);
        assert_relative_eq!(invert_beta1(0.2, 3.857143).unwrap(), 0.6, epsilon = 1e-6);
        assert!(matches!(invert_beta1(0.5, 3.0001), Err(Error::NegativeRadicand { .. })));
        assert!(matches!(invert_beta1(0.1, 2.9), Err(Error::KurtosisTooLow { .. })));
        assert!(matches!(invert_beta1(0.1, 3.0), Err(Error::KurtosisTooLow { .. })));
        assert!(matches!(invert_beta1(0.0, 4.0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn beta1_out_of_range() {
        // radicand 0.0099 < alpha1^2 = 0.01 gives a slightly negative beta1
        let g4 = 3.0 + 6.0 * 0.01 / (1.0 - 0.02 - 0.0099);
        assert!(matches!(invert_beta1(0.1, g4), Err(Error::BetaOutOfRange { .. })));
    }

    #[test]
    fn alpha0_examples() {
        assert_relative_eq!(invert_alpha0(1e-3, 0.1, 0.8).unwrap(), 1e-4, max_relative = 1e-14);
        assert_eq!(invert_alpha0(5.0, 0.0, 0.0).unwrap(), 5.0);
        assert!(matches!(invert_alpha0(1e-3, 0.5, 0.5), Err(Error::NonStationaryPair { .. })));
    }

    fn constant_model(kind: FeatureSetKind, output: f64) -> MlpModel {
        let arch = MlpArchitecture::new(3, vec![], 1).unwrap();
        let mut layer = Array2::zeros((4, 1));
        layer[[0, 0]] = output;
        let unit = MinMax { min: 0.0, max: 1.0 };
        MlpModel {
            network: Network::from_layers(arch, vec![layer]).unwrap(),
            scaler: ScalerParams {
                features: [unit; 3],
                target: unit,
            },
            metadata: ModelMetadata {
                kind,
                seed: 0,
                split_seed: None,
                best_epoch: 1,
                best_validation_msd: 0.0,
                train_config: TrainConfig::default(),
                run_config: None,
            },
        }
    }

    fn stats_for(p: &GarchParams) -> EmpiricalStats {
        EmpiricalStats::analytic(p, &[2, 6]).unwrap()
    }

    #[test]
    fn exact_alpha1_recovers_the_triple() {
        let p = GarchParams::new(1e-4, 0.1, 0.8).unwrap();
        let r = fit(&constant_model(FeatureSetKind::MomentsG6, 0.1), &stats_for(&p)).unwrap();
        assert!(!r.clamped);
        assert_relative_eq!(r.params.beta1(), 0.8, epsilon = 1e-12);
        assert_relative_eq!(r.params.alpha0(), 1e-4, max_relative = 1e-10);
        assert_relative_eq!(r.diagnostics.radicand, 0.81, epsilon = 1e-12);
    }

    #[test]
    fn negative_output_is_clamped_to_the_floor() {
        let p = GarchParams::new(1e-4, 0.1, 0.8).unwrap();
        let r = fit(&constant_model(FeatureSetKind::MomentsG6, -0.003), &stats_for(&p)).unwrap();
        assert!(r.clamped);
        assert_eq!(r.alpha1_raw, -0.003);
        assert_eq!(r.params.alpha1(), ALPHA1_FLOOR);
    }

    #[test]
    fn large_output_is_clamped_to_the_kind_bound() {
        let (a, clamped) = clamp_alpha1(0.9, FeatureSetKind::MomentsG6).unwrap();
        assert!(clamped);
        assert_eq!(a, bounds_for(FeatureSetKind::MomentsG6).alpha1_max);
        assert!(clamp_alpha1(f64::NAN, FeatureSetKind::MomentsG6).is_err());
    }

    #[test]
    fn low_kurtosis_is_an_error() {
        let p = GarchParams::new(1e-4, 0.1, 0.8).unwrap();
        let mut s = stats_for(&p);
        s.gamma4 = 2.9;
        assert!(matches!(
            fit(&constant_model(FeatureSetKind::MomentsG6, 0.1), &s),
            Err(Error::KurtosisTooLow { .. })
        ));
    }

    #[test]
    fn missing_lag_is_reported() {
        let p = GarchParams::new(1e-4, 0.1, 0.8).unwrap();
        assert!(matches!(
            fit(&constant_model(FeatureSetKind::AutocovLag(10), 0.1), &stats_for(&p)),
            Err(Error::MissingStatistic(_))
        ));
    }

    #[test]
    fn sixth_moment_must_exist_for_moment_models() {
        // valid kurtosis but alpha1 large enough that mu(3) >= 1 on the curve
        let stats = EmpiricalStats {
            second_moment: 1e-3,
            gamma4: gamma4_closed(0.38, 0.3).unwrap(),
            gamma6: Some(100.0),
            gamma8: None,
            gamma10: None,
            autocov_hat: Default::default(),
            n_obs: 0,
        };
        let r = complete_params(0.38, &stats, FeatureSetKind::MomentsG6);
        assert!(matches!(r, Err(Error::NonFiniteMoment { order: 6 })), "{r:?}");
        assert!(complete_params(0.38, &stats, FeatureSetKind::AutocovLag(2)).is_ok());
    }

    #[test]
    fn fit_result_json_is_flat() {
        let p = GarchParams::new(1e-4, 0.1, 0.8).unwrap();
        let r = fit(&constant_model(FeatureSetKind::AutocovLag(6), 0.1), &stats_for(&p)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["alpha0", "alpha1", "beta1", "alpha1_raw", "clamped", "kind", "radicand"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["kind"], "lag6");
        let back: FitResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        assert_relative_eq!(second_moment(&back.params), 1e-3, max_relative = 1e-12);
    }
}
