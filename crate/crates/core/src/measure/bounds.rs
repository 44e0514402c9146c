//! Analytic bounds for sup balls and Hölder balls.
//!
//! For `S_m = {‖x‖ ≤ m}` on `[0, a]` the moment bound gives
//! `(1 - a/(m² 2ⁿ))^{2ⁿ}`, increasing to `exp(-a/m²)`. For a Hölder ball the
//! same argument with the moment of order `p = 2/(1-2α)` gives
//! `[1 - (a/2ⁿ) E|ξ|^p / λ^p]^{2ⁿ}`, increasing to `exp(-ψ(λ))` with
//! `ψ(λ) = a E|ξ|^p / λ^p`.
//!
//! Both derivations pass through an increment event ("every grid increment is
//! small") whose probability is an explicit product of normal probabilities.
//! At a fixed level the grid set is contained in such an event (adjacent
//! level differences of members are bounded by `2m` for a ball and by
//! `λ (a/2ⁿ)^α` for a Hölder ball), so those products are reported as upper
//! bounds for the level-`n` estimate. The moment bounds and their limits are
//! reported as lower bounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EstimateResult, TOLERANCE_SE};
use crate::error::{check_range, Result};
use crate::gaussian::{abs_moment, two_sided_probability};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The estimate should be at least the bound.
    Lower,
    /// The estimate should be at most the bound.
    Upper,
}

/// One bound confronted with one estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub direction: Direction,
    pub bound: f64,
    pub p_hat: f64,
    pub se: f64,
    /// Signed distance from the bound in standard errors, positive on the
    /// correct side. `None` when `se = 0`.
    pub margin_se: Option<f64>,
    /// The bound is on the correct side of the far end of the Wilson 99%
    /// interval.
    pub within_ci: bool,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(label: impl Into<String>, direction: Direction, bound: f64, est: &EstimateResult) -> Self {
        let signed = match direction {
            Direction::Lower => est.p_hat - bound,
            Direction::Upper => bound - est.p_hat,
        };
        let within_ci = match direction {
            Direction::Lower => bound <= est.ci_high,
            Direction::Upper => bound >= est.ci_low,
        };
        Self {
            label: label.into(),
            direction,
            bound,
            p_hat: est.p_hat,
            se: est.se,
            margin_se: (est.se > 0.0).then(|| signed / est.se),
            within_ci,
            pass: signed >= -TOLERANCE_SE * est.se,
        }
    }
}

/// Evaluated analytic bounds at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub level: u32,
    pub params: BTreeMap<String, f64>,
    /// Pre-limit moment bound at this level (lower).
    pub pre_limit: f64,
    /// Its `n → ∞` limit (lower).
    pub limit: f64,
    /// Product probability of the increment event at the printed threshold.
    pub increment_product: f64,
    /// Product probability of the increment event containing the grid set
    /// (upper).
    pub containing_product: f64,
}

impl BoundReport {
    /// Lower checks for the moment bound and its limit, upper check for the
    /// containing increment event.
    pub fn check(&self, est: &EstimateResult) -> Vec<BoundCheck> {
        vec![
            BoundCheck::new("pre_limit", Direction::Lower, self.pre_limit, est),
            BoundCheck::new("limit", Direction::Lower, self.limit, est),
            BoundCheck::new("containing_product", Direction::Upper, self.containing_product, est),
        ]
    }
}

/// `(max(0, 1 - x/N))^N` for `N = 2ⁿ`.
fn pre_limit_power(x: f64, level: u32) -> f64 {
    let count = (1u64 << level) as f64;
    (1.0 - x / count).max(0.0).powf(count)
}

fn product(p: f64, level: u32) -> f64 {
    p.powf((1u64 << level) as f64)
}

/// Sup-ball bounds on `[0, a]` at level `n`.
pub fn supball_bound(a: f64, m: f64, level: u32) -> Result<BoundReport> {
    check_range("a", "(0, inf)", a, a.is_finite() && a > 0.0)?;
    check_range("m", "(0, inf]", m, m > 0.0)?;
    let scale = 2f64.powf(0.5 * level as f64) / a.sqrt();
    Ok(BoundReport {
        name: "sup_ball".into(),
        level,
        params: BTreeMap::from([("a".into(), a), ("m".into(), m)]),
        pre_limit: pre_limit_power(a / (m * m), level),
        limit: (-a / (m * m)).exp(),
        increment_product: product(two_sided_probability(scale * m), level),
        containing_product: product(two_sided_probability(2.0 * scale * m), level),
    })
}

fn holder_exponent(alpha: f64) -> Result<f64> {
    check_range("alpha", "(0, 1/2)", alpha, alpha > 0.0 && alpha < 0.5)?;
    Ok(2.0 / (1.0 - 2.0 * alpha))
}

/// `ψ(λ) = a E|ξ|^p / λ^p` with `p = 2/(1-2α)`.
pub fn psi(alpha: f64, a: f64, lambda: f64) -> Result<f64> {
    let p = holder_exponent(alpha)?;
    check_range("a", "(0, inf)", a, a.is_finite() && a > 0.0)?;
    check_range("lambda", "(0, inf]", lambda, lambda > 0.0)?;
    Ok(a * abs_moment(p)? / lambda.powf(p))
}

/// Hölder-ball bounds on `[0, a]` at level `n`.
pub fn holder_lower_bound(alpha: f64, a: f64, lambda: f64, level: u32) -> Result<BoundReport> {
    let psi_value = psi(alpha, a, lambda)?;
    let count = (1u64 << level) as f64;
    let threshold = lambda * count.powf(0.5 - alpha) / a.powf(0.5 - alpha);
    let increment_product = product(two_sided_probability(threshold), level);
    Ok(BoundReport {
        name: "holder_ball".into(),
        level,
        params: BTreeMap::from([
            ("a".into(), a),
            ("alpha".into(), alpha),
            ("lambda".into(), lambda),
            ("psi".into(), psi_value),
        ]),
        pre_limit: pre_limit_power(psi_value, level),
        limit: (-psi_value).exp(),
        increment_product,
        containing_product: increment_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supball_examples() {
        let b = supball_bound(1.0, 1.0, 8).unwrap();
        assert!((b.limit - 0.367_879).abs() < 1e-6);
        let b1 = supball_bound(1.0, 1.0, 1).unwrap();
        assert_eq!(b1.pre_limit, 0.25);
        // P(|ξ| ≤ √2)² from the CDF
        let p = crate::gaussian::normal_cdf(2f64.sqrt()) - crate::gaussian::normal_cdf(-(2f64.sqrt()));
        assert!((b1.increment_product - p * p).abs() < 1e-14);
        assert!(b1.pre_limit <= b1.increment_product);
        let big = supball_bound(1.0, 1e6, 10).unwrap();
        assert!((big.limit - 1.0).abs() < 1e-11 && (big.pre_limit - 1.0).abs() < 1e-11);
        assert!(supball_bound(1.0, 0.0, 1).is_err());
        // pre-limit increases to the limit
        let mut prev = 0.0;
        for n in 1..=20 {
            let b = supball_bound(2.0, 1.5, n).unwrap();
            assert!(b.pre_limit >= prev && b.pre_limit <= b.limit);
            prev = b.pre_limit;
        }
    }

    #[test]
    fn psi_examples() {
        assert!((psi(0.25, 1.0, 10.0).unwrap() - 3e-4).abs() < 1e-16);
        // α → 0 recovers a/λ²
        let near = psi(1e-9, 2.0, 3.0).unwrap();
        assert!((near - 2.0 / 9.0).abs() < 1e-8);
        assert!(psi(0.25, 1.0, 1e6).unwrap() < 1e-20);
        let e = psi(0.5, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("alpha must be in (0, 1/2)"));
        assert!(psi(0.25, 1.0, 0.0).is_err());
    }

    #[test]
    fn holder_bound_examples() {
        let b = holder_lower_bound(0.25, 1.0, 10.0, 10).unwrap();
        let direct = (1.0 - 3e-4 / 1024.0f64).powi(1024);
        assert!((b.pre_limit - direct).abs() < 1e-15);
        assert!(b.pre_limit <= b.limit && b.pre_limit >= b.limit - 1e-3);
        assert!((holder_lower_bound(0.25, 1.0, 1e8, 5).unwrap().limit - 1.0).abs() < 1e-15);
        // α → 0 reduces to the sup-ball bound with m = λ
        let h = holder_lower_bound(1e-10, 1.0, 2.0, 6).unwrap();
        let s = supball_bound(1.0, 2.0, 6).unwrap();
        assert!((h.pre_limit - s.pre_limit).abs() < 1e-8);
        assert!((h.limit - s.limit).abs() < 1e-8);
        assert!((h.increment_product - s.increment_product).abs() < 1e-8);
    }

    #[test]
    fn bound_check_directions() {
        let est = EstimateResult::from_counts(1.0, Some(1), 2, 400, 1000, crate::SeedSpec::new(0, 0));
        let lo = BoundCheck::new("x", Direction::Lower, 0.41, &est);
        assert!(lo.pass && lo.margin_se.unwrap() < 0.0);
        let lo = BoundCheck::new("x", Direction::Lower, 0.5, &est);
        assert!(!lo.pass && !lo.within_ci);
        let up = BoundCheck::new("x", Direction::Upper, 0.39, &est);
        assert!(up.pass && up.within_ci);
        let sure = EstimateResult::from_counts(1.0, Some(1), 2, 1000, 1000, crate::SeedSpec::new(0, 0));
        let c = BoundCheck::new("x", Direction::Lower, 0.99, &sure);
        assert!(c.pass && c.margin_se.is_none());
    }
}
