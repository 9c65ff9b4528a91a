//! Exact inversion of the moment equations by bracketed root search.
//!
//! For fixed kurtosis `Gamma_4 = 3 + k` the admissible `(alpha1, beta1)` pairs
//! form a curve parametrized by `alpha1`. Along it, with `s = alpha1 + beta1`:
//!
//! ```text
//! s^2          = 1 - 2 alpha1^2 - 6 alpha1^2 / k
//! 1 - s        = alpha1^2 c              c = (2 + 6/k) / (1 + s)
//! 1 - mu(2)    = 6 alpha1^2 / k
//! 1 - mu(3)    = alpha1^2 e              e = c (1 + s + s^2) - 6 s - 8 alpha1
//! ```
//!
//! Every denominator carries an explicit `alpha1^2` factor that cancels, so
//! the residuals stay accurate as `alpha1 -> 0` where the textbook forms lose
//! all precision.

use crate::error::{Error, Result};
use crate::moments::GarchParams;
use crate::param_space::{bounds_for, FeatureSetKind};
use crate::simulate::EmpiricalStats;

/// Grid points used to bracket sign changes.
pub const SCAN_POINTS: usize = 2000;
const ALPHA_TOL: f64 = 1e-12;

/// The constant-kurtosis curve `Gamma_4(alpha1, beta1) = 3 + k`.
#[derive(Debug, Clone, Copy)]
pub struct Gamma4Curve {
    k: f64,
}

#[derive(Debug, Clone, Copy)]
struct CurvePoint {
    alpha: f64,
    s: f64,
    c: f64,
}

impl Gamma4Curve {
    pub fn new(gamma4: f64) -> Result<Self> {
        if !(gamma4 > 3.0 && gamma4.is_finite()) {
            return Err(Error::KurtosisTooLow { gamma4 });
        }
        Ok(Gamma4Curve { k: gamma4 - 3.0 })
    }

    /// Largest `alpha1` with `beta1 >= 0`.
    pub fn alpha_max(&self) -> f64 {
        1.0 / (3.0 + 6.0 / self.k).sqrt()
    }

    fn point(&self, alpha: f64) -> CurvePoint {
        let k = self.k;
        let s = (1.0 - 2.0 * alpha * alpha - 6.0 * alpha * alpha / k).max(0.0).sqrt();
        CurvePoint {
            alpha,
            s,
            c: (2.0 + 6.0 / k) / (1.0 + s),
        }
    }

    pub fn beta1(&self, alpha: f64) -> f64 {
        let p = self.point(alpha);
        p.s - alpha
    }

    /// `1 - alpha1 - beta1`, computed without cancellation.
    pub fn one_minus_persistence(&self, alpha: f64) -> f64 {
        alpha * alpha * self.point(alpha).c
    }

    /// Sixth standardized moment on the curve; `+inf` once it diverges.
    pub fn gamma6(&self, alpha: f64) -> f64 {
        let CurvePoint { alpha: a, s, c } = self.point(alpha);
        let k = self.k;
        let e = c * (1.0 + s + s * s) - 6.0 * s - 8.0 * a;
        if e <= 0.0 {
            return f64::INFINITY;
        }
        15.0 * c * c * (a * a * (1.0 + 2.0 * s) + (1.0 + s) * (1.0 - 6.0 * a * a / k) * k / 2.0) / e
    }

    /// Normalized autocovariance of `x^2` at lag `n` on the curve.
    pub fn autocov_hat(&self, alpha: f64, n: u32) -> f64 {
        let CurvePoint { alpha: a, s, c } = self.point(alpha);
        self.k * (a * c * (1.0 + s) + s) / 3.0 * s.powi(n as i32 - 1)
    }
}

fn target_and_residual(
    stats: &EmpiricalStats,
    kind: FeatureSetKind,
    curve: Gamma4Curve,
) -> Result<Box<dyn Fn(f64) -> f64>> {
    match kind {
        FeatureSetKind::MomentsG6 => {
            let target = stats
                .gamma6
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::MissingStatistic("gamma6".into()))?;
            Ok(Box::new(move |a| curve.gamma6(a) - target))
        }
        FeatureSetKind::AutocovLag(n) if n >= 1 => {
            let target = stats
                .autocov_hat
                .get(&n)
                .copied()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::MissingStatistic(kind.third_feature()))?;
            Ok(Box::new(move |a| curve.autocov_hat(a, n) - target))
        }
        other => Err(Error::InvalidParams(format!("exact solver does not support kind {other}"))),
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    while hi - lo > ALPHA_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Every root along the kurtosis curve, in increasing `alpha1`.
pub fn solve_exact_all(stats: &EmpiricalStats, kind: FeatureSetKind) -> Result<Vec<GarchParams>> {
    let curve = Gamma4Curve::new(stats.gamma4)?;
    if !(stats.second_moment > 0.0 && stats.second_moment.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "second moment {} must be > 0",
            stats.second_moment
        )));
    }
    let residual = target_and_residual(stats, kind, curve)?;
    let hi = bounds_for(kind).alpha1_max.min(curve.alpha_max());

    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| if i == 0 { hi * 1e-9 } else { hi * i as f64 / SCAN_POINTS as f64 })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&a| residual(a)).collect();

    let mut alphas = Vec::new();
    for i in 0..SCAN_POINTS {
        let (a, b) = (values[i], values[i + 1]);
        if a.is_nan() || b.is_nan() {
            continue;
        }
        if a == 0.0 {
            alphas.push(grid[i]);
        } else if b != 0.0 && (a > 0.0) != (b > 0.0) {
            alphas.push(bisect(residual.as_ref(), grid[i], grid[i + 1], a));
        }
    }
    if values[SCAN_POINTS] == 0.0 {
        alphas.push(grid[SCAN_POINTS]);
    }

    alphas
        .into_iter()
        .map(|a| {
            let beta = curve.beta1(a).max(0.0);
            let alpha0 = stats.second_moment * curve.one_minus_persistence(a);
            GarchParams::new(alpha0, a, beta)
        })
        .collect()
}

/// The unique root, or `NoRootInRange` / `Ambiguous`.
pub fn solve_exact(stats: &EmpiricalStats, kind: FeatureSetKind) -> Result<GarchParams> {
    let mut roots = solve_exact_all(stats, kind)?;
    match roots.len() {
        0 => Err(Error::NoRootInRange {
            alpha1_max: bounds_for(kind).alpha1_max,
        }),
        1 => Ok(roots.remove(0)),
        _ => Err(Error::Ambiguous { roots }),
    }
}
