//! Analytical moments of the GARCH-normal(1,1) process.
//!
//! The process is `x_t = sigma_t Z_t` with `Z_t ~ N(0, 1)` and
//!
//! ```text
//! sigma_t^2 = alpha0 + alpha1 x_{t-1}^2 + beta1 sigma_{t-1}^2
//! ```
//!
//! Even raw moments follow Bollerslev's recursion
//!
//! ```text
//! E(x^{2m}) = a_m [ sum_{n<m} E(x^{2n}) / a_n * alpha0^{m-n} * C(m, m-n) * mu(n) ] / (1 - mu(m))
//! mu(m)     = sum_{j<=m} C(m, j) a_j alpha1^j beta1^{m-j}
//! a_j       = 1 * 3 * 5 * ... * (2j - 1)
//! ```
//!
//! and the 2m-th moment is finite iff `mu(m) < 1`. Closed forms for the
//! kurtosis, the sixth standardized moment and the normalized autocovariance
//! of `x^2` are provided separately; tests pin them against the recursion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators `1 - mu` at or below this are treated as divergent.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// Highest supported half-order (`m = 5` is the tenth moment).
pub const MAX_MOMENT_ORDER: u32 = 5;

/// A validated GARCH(1,1) parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GarchParams {
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
}

impl TryFrom<RawParams> for GarchParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        GarchParams::new(raw.alpha0, raw.alpha1, raw.beta1)
    }
}

impl From<GarchParams> for RawParams {
    fn from(p: GarchParams) -> Self {
        RawParams {
            alpha0: p.alpha0,
            alpha1: p.alpha1,
            beta1: p.beta1,
        }
    }
}

impl GarchParams {
    /// Requires `alpha0 > 0`, `alpha1, beta1 >= 0` and `alpha1 + beta1 < 1`.
    pub fn new(alpha0: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        if !(alpha0.is_finite() && alpha1.is_finite() && beta1.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite value in ({alpha0}, {alpha1}, {beta1})"
            )));
        }
        if alpha0 <= 0.0 {
            return Err(Error::InvalidParams(format!("alpha0 = {alpha0} must be > 0")));
        }
        if alpha1 < 0.0 || beta1 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "alpha1 = {alpha1} and beta1 = {beta1} must be >= 0"
            )));
        }
        if alpha1 + beta1 >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha1 + beta1 = {} must be < 1",
                alpha1 + beta1
            )));
        }
        Ok(GarchParams {
            alpha0,
            alpha1,
            beta1,
        })
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// `alpha1 + beta1`.
    pub fn persistence(&self) -> f64 {
        self.alpha1 + self.beta1
    }
}

/// Half the order of an even moment: `m = 2` selects `E(x^4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentOrder(u32);

impl MomentOrder {
    pub const SECOND: MomentOrder = MomentOrder(1);
    pub const FOURTH: MomentOrder = MomentOrder(2);
    pub const SIXTH: MomentOrder = MomentOrder(3);
    pub const EIGHTH: MomentOrder = MomentOrder(4);
    pub const TENTH: MomentOrder = MomentOrder(5);

    pub fn new(m: u32) -> Result<Self> {
        if (1..=MAX_MOMENT_ORDER).contains(&m) {
            Ok(MomentOrder(m))
        } else {
            Err(Error::InvalidParams(format!(
                "moment half-order {m} outside 1..={MAX_MOMENT_ORDER}"
            )))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// The even moment order `2m`.
    pub fn order(self) -> u32 {
        2 * self.0
    }
}

/// `a_j = prod_{i=1..j} (2i - 1)`, the even moments of a standard normal.
pub fn double_factorial_gauss(j: u32) -> u64 {
    (1..=u64::from(j)).map(|i| 2 * i - 1).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `mu(alpha1, beta1, m) = sum_j C(m, j) a_j alpha1^j beta1^(m-j)`.
pub fn mu(alpha1: f64, beta1: f64, m: u32) -> f64 {
    (0..=m)
        .map(|j| {
            binomial(m, j)
                * double_factorial_gauss(j) as f64
                * alpha1.powi(j as i32)
                * beta1.powi((m - j) as i32)
        })
        .sum()
}

/// True iff `E(x^{2m})` is finite, i.e. `mu(alpha1, beta1, m) < 1`.
pub fn moment_exists(alpha1: f64, beta1: f64, m: MomentOrder) -> bool {
    mu(alpha1, beta1, m.get()) < 1.0
}

fn check_denominator(denominator: f64, order: u32) -> Result<f64> {
    if denominator.is_finite() && denominator > SINGULARITY_TOL {
        Ok(denominator)
    } else {
        Err(Error::NonFiniteMoment { order })
    }
}

/// All raw even moments `E(x^0), E(x^2), ..., E(x^{2m})` from the recursion.
pub fn raw_even_moments(p: &GarchParams, m: MomentOrder) -> Result<Vec<f64>> {
    let (a0, a1, b1) = (p.alpha0, p.alpha1, p.beta1);
    let mus: Vec<f64> = (0..=m.get()).map(|k| mu(a1, b1, k)).collect();
    let mut raw = Vec::with_capacity(m.get() as usize + 1);
    raw.push(1.0);
    for k in 1..=m.get() {
        let denominator = check_denominator(1.0 - mus[k as usize], 2 * k)?;
        let sum: f64 = (0..k)
            .map(|n| {
                raw[n as usize] / double_factorial_gauss(n) as f64
                    * a0.powi((k - n) as i32)
                    * binomial(k, k - n)
                    * mus[n as usize]
            })
            .sum();
        raw.push(double_factorial_gauss(k) as f64 * sum / denominator);
    }
    Ok(raw)
}

/// `E(x^{2m})`.
pub fn raw_even_moment(p: &GarchParams, m: MomentOrder) -> Result<f64> {
    raw_even_moments(p, m).map(|raw| raw[m.get() as usize])
}

/// Unconditional variance `alpha0 / (1 - alpha1 - beta1)`.
pub fn second_moment(p: &GarchParams) -> f64 {
    p.alpha0 / (1.0 - p.persistence())
}

/// `Gamma_{2m} = E(x^{2m}) / E(x^2)^m`, independent of `alpha0`.
pub fn standardized_moment(p: &GarchParams, m: MomentOrder) -> Result<f64> {
    let raw = raw_even_moments(p, m)?;
    Ok(raw[m.get() as usize] / raw[1].powi(m.get() as i32))
}

/// Kurtosis `3 + 6 alpha1^2 / (1 - 3 alpha1^2 - 2 alpha1 beta1 - beta1^2)`.
pub fn gamma4_closed(alpha1: f64, beta1: f64) -> Result<f64> {
    let denominator = check_denominator(1.0 - mu(alpha1, beta1, 2), 4)?;
    Ok(3.0 + 6.0 * alpha1 * alpha1 / denominator)
}

/// Closed-form sixth standardized moment.
pub fn gamma6_closed(alpha1: f64, beta1: f64) -> Result<f64> {
    let d6 = check_denominator(1.0 - mu(alpha1, beta1, 3), 6)?;
    let d4 = check_denominator(1.0 - mu(alpha1, beta1, 2), 4)?;
    let mu2 = 1.0 - d4;
    let s = alpha1 + beta1;
    let d2 = 1.0 - s;
    let bracket = 1.0 + 3.0 * s / d2 + 3.0 * (1.0 + 2.0 * s / d2) * mu2 / d4;
    Ok(15.0 * d2.powi(3) * bracket / d6)
}

/// Autocovariance of `x^2` at lag `n`, normalized by `E(x^2)^2`:
///
/// ```text
/// 2 alpha1 (1 - alpha1 beta1 - beta1^2) / (1 - 3 alpha1^2 - 2 alpha1 beta1 - beta1^2) * (alpha1 + beta1)^(n-1)
/// ```
pub fn autocov_hat(alpha1: f64, beta1: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("autocovariance lag must be >= 1".into()));
    }
    let d4 = check_denominator(1.0 - mu(alpha1, beta1, 2), 4)?;
    let prefactor = 2.0 * alpha1 * (1.0 - alpha1 * beta1 - beta1 * beta1) / d4;
    Ok(prefactor * (alpha1 + beta1).powi(n as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a0: f64, a1: f64, b1: f64) -> GarchParams {
        GarchParams::new(a0, a1, b1).unwrap()
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial_gauss(0), 1);
        assert_eq!(double_factorial_gauss(1), 1);
        assert_eq!(double_factorial_gauss(2), 3);
        assert_eq!(double_factorial_gauss(3), 15);
        assert_eq!(double_factorial_gauss(4), 105);
        assert_eq!(double_factorial_gauss(5), 945);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(0.37, 0.21, 0), 1.0);
        assert_relative_eq!(mu(0.1, 0.8, 1), 0.9, max_relative = 1e-15);
        assert_relative_eq!(mu(0.1, 0.8, 2), 0.83, max_relative = 1e-15);
        // 15 a^3 + 9 a^2 b + 3 a b^2 + b^3
        let (a, b) = (0.1, 0.8);
        let expected = 15.0 * a * a * a + 9.0 * a * a * b + 3.0 * a * b * b + b * b * b;
        assert_relative_eq!(mu(a, b, 3), expected, max_relative = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(GarchParams::new(0.0, 0.1, 0.1).is_err());
        assert!(GarchParams::new(1e-4, -0.1, 0.1).is_err());
        assert!(GarchParams::new(1e-4, 0.5, 0.5).is_err());
        assert!(GarchParams::new(f64::NAN, 0.1, 0.1).is_err());
        assert!(GarchParams::new(1e-4, 0.0, 0.0).is_ok());
    }

    #[test]
    fn moment_order_range() {
        assert!(MomentOrder::new(0).is_err());
        assert!(MomentOrder::new(6).is_err());
        assert_eq!(MomentOrder::new(3).unwrap(), MomentOrder::SIXTH);
        assert_eq!(MomentOrder::SIXTH.order(), 6);
    }

    #[test]
    fn raw_moment_examples() {
        let p = params(1e-4, 0.1, 0.8);
        assert_relative_eq!(
            raw_even_moment(&p, MomentOrder::SECOND).unwrap(),
            1e-3,
            max_relative = 1e-14
        );
        // 3 + 0.06 / 0.17, times sigma^4
        let fourth = raw_even_moment(&p, MomentOrder::FOURTH).unwrap();
        assert_relative_eq!(fourth, (3.0 + 0.06 / 0.17) * 1e-6, max_relative = 1e-13);

        let a0 = 2.5e-4;
        let iid = params(a0, 0.0, 0.0);
        assert_relative_eq!(
            raw_even_moment(&iid, MomentOrder::FOURTH).unwrap(),
            3.0 * a0 * a0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn raw_moment_diverges() {
        // 15 * 0.41^3 > 1
        let p = params(1e-4, 0.41, 0.0);
        assert!(matches!(
            raw_even_moment(&p, MomentOrder::SIXTH),
            Err(Error::NonFiniteMoment { order: 6 })
        ));
        assert!(raw_even_moment(&p, MomentOrder::FOURTH).is_ok());
    }

    #[test]
    fn standardized_moment_examples() {
        let gaussian = params(1e-4, 0.0, 0.5);
        assert_relative_eq!(
            standardized_moment(&gaussian, MomentOrder::FOURTH).unwrap(),
            3.0,
            max_relative = 1e-15
        );
        let p = params(1e-4, 0.1, 0.8);
        assert_relative_eq!(
            standardized_moment(&p, MomentOrder::FOURTH).unwrap(),
            3.352_941_176_470_588,
            max_relative = 1e-13
        );
        // Frozen from a 40-digit evaluation of the recursion.
        assert_relative_eq!(
            standardized_moment(&p, MomentOrder::SIXTH).unwrap(),
            21.982_831_410_075_992,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            standardized_moment(&p, MomentOrder::EIGHTH).unwrap(),
            259.180_044_726_873_73,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            standardized_moment(&p, MomentOrder::TENTH).unwrap(),
            6_234.859_602_891_424,
            max_relative = 1e-12
        );
    }

    #[test]
    fn gamma4_examples() {
        assert_eq!(gamma4_closed(0.0, 0.9).unwrap(), 3.0);
        assert_relative_eq!(gamma4_closed(0.1, 0.8).unwrap(), 3.0 + 0.06 / 0.17, max_relative = 1e-15);
        assert_relative_eq!(gamma4_closed(0.2, 0.6).unwrap(), 3.0 + 0.24 / 0.28, max_relative = 1e-14);
        assert!(matches!(
            gamma4_closed(0.5, 0.4),
            Err(Error::NonFiniteMoment { order: 4 })
        ));
    }

    #[test]
    fn gamma6_examples() {
        assert_relative_eq!(gamma6_closed(0.0, 0.0).unwrap(), 15.0, max_relative = 1e-15);
        for beta1 in [0.1, 0.5, 0.9, 0.99] {
            assert_relative_eq!(gamma6_closed(0.0, beta1).unwrap(), 15.0, max_relative = 1e-12);
        }
        assert_relative_eq!(
            gamma6_closed(0.1, 0.8).unwrap(),
            21.982_831_410_075_992,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            gamma6_closed(0.3, 0.3).unwrap(),
            77.063_435_495_367_07,
            max_relative = 1e-12
        );
        assert!(gamma6_closed(0.41, 0.0).is_err());
    }

    #[test]
    fn autocov_examples() {
        assert_eq!(autocov_hat(0.0, 0.8, 5).unwrap(), 0.0);
        let first = autocov_hat(0.1, 0.8, 1).unwrap();
        assert_relative_eq!(first, 0.056 / 0.17, max_relative = 1e-14);
        assert_relative_eq!(autocov_hat(0.1, 0.8, 2).unwrap(), 0.9 * 0.056 / 0.17, max_relative = 1e-14);
        assert!(autocov_hat(0.1, 0.8, 0).is_err());
        assert!(autocov_hat(0.6, 0.3, 1).is_err());
    }

    #[test]
    fn moment_exists_examples() {
        assert!(!moment_exists(0.5, 0.5, MomentOrder::SECOND));
        assert!(!moment_exists(0.41, 0.0, MomentOrder::SIXTH));
        assert!(moment_exists(0.1, 0.8, MomentOrder::FOURTH));
    }

    #[test]
    fn near_singular_denominator_is_rejected() {
        // alpha1 = 0, 1 - beta1^2 = 5e-13
        let beta1 = (1.0f64 - 5e-13).sqrt();
        assert!(gamma4_closed(0.0, beta1).is_err());
    }
}
