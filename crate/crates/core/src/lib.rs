//! Fitting GARCH-normal(1,1) parameters from the statistical fingerprints of
//! a return series.
//!
//! A small feed-forward network maps `(E(x^2), Gamma_4, s)` to `alpha1`, where
//! `s` is a higher standardized moment or a lagged normalized autocovariance
//! of `x^2`. `beta1` and `alpha0` then follow in closed form from the kurtosis
//! and the variance. An exact bracketed solver over the same moment equations
//! serves as the reference.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fit;
pub mod mlp;
pub mod moments;
pub mod param_space;
pub mod scaler;
pub mod simulate;

pub use error::{Error, Result};
pub use moments::{GarchParams, MomentOrder};
pub use param_space::FeatureSetKind;
