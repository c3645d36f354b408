//! Limits on network capability, the comparison with selfish mining, and
//! the economics of pool-side countermeasures.
//!
//! The detection and honeypot bounds are stated in terms of an unnamed
//! symbol that plays the role of the infiltration fraction; every such
//! formula here takes `tau` in its place and says so in its report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_single, SinglePoolScenario, PowerFraction};
use crate::single::share;

/// Slack allowed when checking that a distribution covers the expected power.
pub const DISTRIBUTION_SLACK: f64 = 1e-9;

/// Attached to every result whose expulsion formula reads its undefined
/// `gamma` as the infiltration share `tau`.
pub const GAMMA_AS_TAU: &str = "gamma read as the infiltration share tau";

/// Power of the honest miners outside the attack. Power in
/// `atomized_remainder` belongs to arbitrarily many arbitrarily small miners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonestPowerDistribution {
    pub shares: Vec<f64>,
    pub atomized_remainder: f64,
}

impl HonestPowerDistribution {
    pub fn new(shares: Vec<f64>, atomized_remainder: f64) -> Result<Self> {
        for (i, &s) in shares.iter().enumerate() {
            PowerFraction::new(&format!("shares[{i}]"), s)?;
        }
        PowerFraction::new("atomized_remainder", atomized_remainder)?;
        Ok(HonestPowerDistribution { shares, atomized_remainder })
    }

    pub fn atomized(total: f64) -> Self {
        HonestPowerDistribution { shares: Vec::new(), atomized_remainder: total }
    }

    pub fn total(&self) -> f64 {
        self.shares.iter().sum::<f64>() + self.atomized_remainder
    }

    pub fn square_sum(&self) -> f64 {
        self.shares.iter().map(|o| o * o).sum()
    }

    /// Copy with shares `i` and `j` held by one miner.
    pub fn merged(&self, i: usize, j: usize) -> Self {
        let mut shares = self.shares.clone();
        let (lo, hi) = (i.min(j), i.max(j));
        let moved = shares.remove(hi);
        shares[lo] += moved;
        HonestPowerDistribution { shares, ..*self }
    }

    fn expect_total(&self, expected: f64) -> Result<()> {
        let actual = self.total();
        if (actual - expected).abs() > DISTRIBUTION_SLACK {
            return Err(Error::InconsistentDistribution { expected, actual });
        }
        Ok(())
    }
}

fn c_max_against(outside: f64, dist: &HonestPowerDistribution) -> Result<f64> {
    dist.expect_total(outside)?;
    if outside <= 0.0 {
        return Err(Error::DegenerateInput("no honest power outside the attack".into()));
    }
    Ok(1.0 - dist.square_sum() / outside)
}

/// Largest `c` an attacker can reach against one pool: each honest external
/// miner keeps mining on its own block, so big miners cap `c`.
pub fn c_max_single(alpha: f64, beta: f64, dist: &HonestPowerDistribution) -> Result<f64> {
    let s = validate_single(&SinglePoolScenario { alpha, beta, tau: 0.0, c: 0.0 })?;
    c_max_against(s.external(), dist)
}

/// As [`c_max_single`] with two pools attacking each other.
pub fn c_max_game(alpha1: f64, alpha2: f64, dist: &HonestPowerDistribution) -> Result<f64> {
    c_max_single(alpha1, alpha2, dist)
}

/// A rational victim manager propagates the withheld block, so attacker and
/// pool miners always back it.
pub fn c_min_rational(alpha: f64, beta: f64) -> f64 {
    alpha + beta
}

fn unit(field: &str, v: f64) -> Result<f64> {
    PowerFraction::new(field, v).map(PowerFraction::get)
}

/// `c` when a fraction `gamma` of honest outside power mines on the
/// attacker's branch.
pub fn c_from_gamma(gamma: f64, alpha: f64, beta: f64) -> Result<f64> {
    let gamma = unit("gamma", gamma)?;
    Ok(gamma * (1.0 - alpha - beta) + alpha + beta)
}

/// Smallest power share at which selfish mining pays.
pub fn selfish_mining_threshold(gamma: f64) -> Result<f64> {
    let gamma = unit("gamma", gamma)?;
    Ok((1.0 - gamma) / (3.0 - 2.0 * gamma))
}

/// Loose upper bound on the selfish miner's `gamma` given the honest
/// distribution, which must cover `1 - alpha`.
pub fn gamma_upper_bound(dist: &HonestPowerDistribution, alpha: f64) -> Result<f64> {
    dist.expect_total(1.0 - alpha)?;
    Ok(1.0 - dist.square_sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub reward: f64,
    /// Expected stale withheld blocks per pool payout.
    pub d: f64,
    pub identities: u64,
    /// Set when a count of paid identities went negative and was raised to 0.
    pub floored: bool,
    pub note: &'static str,
}

/// Share of a payout kept by `active` of `identities` equal infiltrators.
fn identity_share(active: f64, identities: f64, beta: f64, ta: f64) -> f64 {
    let m = active * ta;
    if m == 0.0 {
        0.0
    } else {
        m / (identities * beta + m)
    }
}

/// Expected stale withheld blocks between two pool payouts.
pub fn detection_d(alpha: f64, beta: f64, tau: f64, c: f64) -> f64 {
    let lost = (1.0 - c) * tau * alpha * (1.0 - alpha - beta);
    let paid = beta + c * tau * alpha * (1.0 - alpha - beta);
    if lost == 0.0 {
        0.0
    } else {
        lost / paid
    }
}

fn check_identities(identities: u64) -> Result<f64> {
    if identities == 0 {
        return Err(Error::InvalidArgument("at least one identity is required".into()));
    }
    Ok(identities as f64)
}

/// Attacker reward when the infiltration is spread over `identities`
/// accounts and the pool expels each account caught with a stale block.
pub fn detection_resilient_reward(s: &SinglePoolScenario, identities: u64) -> Result<DetectionReport> {
    let s = validate_single(s)?;
    let l = check_identities(identities)?;
    let SinglePoolScenario { alpha, beta, tau, c } = s;
    let ta = tau * alpha;
    let e = s.external();
    let d = detection_d(alpha, beta, tau, c);
    let floored = l - d - 1.0 < 0.0;
    let honest = identity_share((l - d).max(0.0), l, beta, ta);
    let forked = identity_share((l - d - 1.0).max(0.0), l, beta, ta);
    let reward = (1.0 - tau) * alpha / (1.0 - ta)
        + beta / (1.0 - ta) * honest
        + c * ta * e / (1.0 - ta) * forked;
    Ok(DetectionReport { reward, d, identities, floored, note: GAMMA_AS_TAU })
}

/// Exact expected reward under the same expulsion rule, with the number of
/// stale blocks per payout geometric rather than fixed at its mean.
pub fn detection_resilient_exact(s: &SinglePoolScenario, identities: u64) -> Result<f64> {
    let s = validate_single(s)?;
    let l = check_identities(identities)?;
    let SinglePoolScenario { alpha, beta, tau, c } = s;
    let ta = tau * alpha;
    let e = s.external();
    let lost = (1.0 - c) * ta * e;
    let paid = beta + c * ta * e;
    let q = if lost == 0.0 { 0.0 } else { lost / (lost + paid) };
    let (mut honest, mut forked) = (0.0, 0.0);
    let mut weight = 1.0 - q;
    for k in 0..identities {
        let active = (identities - k) as f64;
        honest += weight * identity_share(active, l, beta, ta);
        forked += weight * identity_share(active - 1.0, l, beta, ta);
        weight *= q;
        if weight < 1e-300 {
            break;
        }
    }
    Ok((1.0 - tau) * alpha / (1.0 - ta) + beta / (1.0 - ta) * honest + c * ta * e / (1.0 - ta) * forked)
}

/// Block-withholding reward when the pool plants honeypot work and expels
/// any account that withholds it.
pub fn honeypot_bwh_bound(alpha: f64, beta: f64, tau: f64, identities: u64) -> Result<DetectionReport> {
    let s = validate_single(&SinglePoolScenario { alpha, beta, tau, c: 0.0 })?;
    let l = check_identities(identities)?;
    if s.beta <= 0.0 {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    let ta = tau * alpha;
    let d = ta * (1.0 - ta) / beta;
    let floored = l - d < 0.0;
    let reward = (1.0 - tau) * alpha / (1.0 - ta)
        + beta / (1.0 - ta) * identity_share((l - d).max(0.0), l, beta, ta);
    Ok(DetectionReport { reward, d, identities, floored, note: GAMMA_AS_TAU })
}

fn bonus_reward_with(s: &SinglePoolScenario, t: f64, fork_share: f64) -> f64 {
    let SinglePoolScenario { alpha, beta, tau, c } = *s;
    let ta = tau * alpha;
    (1.0 - tau) * alpha / (1.0 - ta)
        + beta / (1.0 - ta) * (1.0 - t) * share(ta, beta)
        + c * ta * s.external() / (1.0 - ta) * (t + (1.0 - t) * fork_share)
}

/// Attacker reward when the pool pays a fraction `t` of each block to
/// whoever found it and splits the rest by shares.
pub fn bonus_scheme_reward(s: &SinglePoolScenario, t: f64) -> Result<f64> {
    let s = validate_single(s)?;
    let t = unit("t", t)?;
    Ok(bonus_reward_with(&s, t, share(s.tau * s.alpha, s.beta)))
}

/// The bonus formula with its last share taken as `tau*alpha / (beta +
/// tau*beta)`. That reading does not reduce to the plain attack at `t = 0`.
#[cfg(test)]
fn bonus_scheme_reward_beta_denominator(s: &SinglePoolScenario, t: f64) -> f64 {
    let ta = s.tau * s.alpha;
    bonus_reward_with(s, t, ta / (s.beta + s.tau * s.beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "t", rename_all = "snake_case")]
pub enum BonusThreshold {
    Feasible(f64),
    /// No fraction of a block can be paid out above 1.
    Infeasible(f64),
}

impl BonusThreshold {
    pub fn value(self) -> f64 {
        match self {
            BonusThreshold::Feasible(t) | BonusThreshold::Infeasible(t) => t,
        }
    }

    pub fn feasible(self) -> Option<f64> {
        match self {
            BonusThreshold::Feasible(t) => Some(t),
            BonusThreshold::Infeasible(_) => None,
        }
    }
}

/// Smallest bonus fraction that makes the attack unprofitable against a
/// pool of current power `pool_power` (infiltration included).
pub fn safe_bonus_threshold(pool_power: f64, c_max: f64) -> Result<BonusThreshold> {
    if !(pool_power > 0.0 && pool_power <= 1.0) {
        return Err(Error::out_of_range("pool_power", pool_power, "must lie in (0, 1]"));
    }
    let c_max = unit("c_max", c_max)?;
    let t = 1.0 / (2.0 * (1.0 - c_max * (1.0 - pool_power)));
    Ok(if t <= 1.0 {
        BonusThreshold::Feasible(t)
    } else {
        BonusThreshold::Infeasible(t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::single::{optimal_tau, reward_bwh, reward_single};
    use proptest::prelude::*;

    fn scenario(alpha: f64, beta: f64, tau: f64, c: f64) -> SinglePoolScenario {
        SinglePoolScenario::new(alpha, beta, tau, c).unwrap()
    }

    #[test]
    fn c_max_examples() {
        let one = HonestPowerDistribution::new(vec![0.6], 0.0).unwrap();
        assert!((c_max_single(0.2, 0.2, &one).unwrap() - 0.4).abs() < 1e-12);
        let dust = HonestPowerDistribution::atomized(0.6);
        assert_eq!(c_max_single(0.2, 0.2, &dust).unwrap(), 1.0);
        let rest = HonestPowerDistribution::new(vec![0.2, 0.1, 0.1], 0.3).unwrap();
        let c = c_max_game(0.2, 0.1, &rest).unwrap();
        assert!((c - 0.914).abs() < 0.001, "{c}");
    }

    #[test]
    fn c_max_rejects_partial_distribution() {
        let d = HonestPowerDistribution::new(vec![0.2], 0.1).unwrap();
        assert!(matches!(
            c_max_single(0.2, 0.2, &d),
            Err(Error::InconsistentDistribution { .. })
        ));
    }

    #[test]
    fn rational_floor_and_gamma_map() {
        assert_eq!(c_min_rational(0.2, 0.2), 0.4);
        assert_eq!(c_min_rational(0.0, 0.0), 0.0);
        assert!((c_min_rational(0.2, 0.1) - 0.3).abs() < 1e-15);
        assert_eq!(c_from_gamma(0.0, 0.2, 0.2).unwrap(), c_min_rational(0.2, 0.2));
        assert!((c_from_gamma(1.0, 0.2, 0.2).unwrap() - 1.0).abs() < 1e-15);
        assert!((c_from_gamma(0.5, 0.2, 0.2).unwrap() - 0.7).abs() < 1e-15);
        assert!(c_from_gamma(1.2, 0.2, 0.2).is_err());
    }

    #[test]
    fn selfish_threshold_examples() {
        assert!((selfish_mining_threshold(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let t = selfish_mining_threshold(0.89).unwrap();
        assert!((0.0899..=0.0905).contains(&t), "{t}");
        assert_eq!(selfish_mining_threshold(1.0).unwrap(), 0.0);
    }

    #[test]
    fn gamma_bound_examples() {
        let alpha = 0.1;
        let network = HonestPowerDistribution::new(vec![0.2, 0.2, 0.1, 0.1, 0.1], 0.3 - alpha).unwrap();
        assert!((gamma_upper_bound(&network, alpha).unwrap() - 0.89).abs() < 1e-12);
        let one = HonestPowerDistribution::new(vec![0.9], 0.0).unwrap();
        assert!((gamma_upper_bound(&one, 0.1).unwrap() - (1.0 - 0.81)).abs() < 1e-12);
        assert_eq!(gamma_upper_bound(&HonestPowerDistribution::atomized(0.9), 0.1).unwrap(), 1.0);
    }

    #[test]
    fn detection_converges_to_plain_attack() {
        let tau = optimal_tau(0.2, 0.2, 0.5).unwrap().tau_bar;
        let s = scenario(0.2, 0.2, tau, 0.5);
        let r = detection_resilient_reward(&s, 1_000_000).unwrap();
        assert!((r.reward - reward_single(&s).unwrap()).abs() < 1e-6);
        assert_eq!(r.note, GAMMA_AS_TAU);
        let bwh = detection_resilient_reward(&s.with_c(0.0), 1_000_000).unwrap();
        assert!((bwh.reward - reward_bwh(0.2, 0.2, tau).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn detection_at_ten_identities() {
        // Oracle: the formula evaluated term by term.
        let tau = optimal_tau(0.2, 0.2, 0.5).unwrap().tau_bar;
        let s = scenario(0.2, 0.2, tau, 0.5);
        let ta = tau * 0.2;
        let e = 0.6;
        let d = 0.5 * ta * e / (0.2 + 0.5 * ta * e);
        let l = 10.0;
        let expected = (1.0 - tau) * 0.2 / (1.0 - ta)
            + 0.2 / (1.0 - ta) * (l - d) * ta / (l * 0.2 + (l - d) * ta)
            + 0.5 * ta * e / (1.0 - ta) * (l - d - 1.0) * ta / (l * 0.2 + (l - d - 1.0) * ta);
        let r = detection_resilient_reward(&s, 10).unwrap();
        assert!((r.reward - expected).abs() < 1e-15);
        assert!((r.d - d).abs() < 1e-15);
        assert!(!r.floored);
        // Averaging over the stale count instead of plugging in its mean
        // costs the attacker a little.
        let exact = detection_resilient_exact(&s, 10).unwrap();
        assert!(exact <= r.reward && r.reward - exact < 1e-3, "{exact} {}", r.reward);
    }

    #[test]
    fn single_identity_is_floored() {
        let r = detection_resilient_reward(&scenario(0.2, 0.2, 0.3, 0.2), 1).unwrap();
        assert!(r.floored);
    }

    #[test]
    fn honeypot_examples() {
        assert_eq!(honeypot_bwh_bound(0.2, 0.2, 0.0, 20).unwrap().reward, 0.2);
        let far = honeypot_bwh_bound(0.2, 0.2, 0.5, 10_000_000).unwrap();
        assert!((far.reward - reward_bwh(0.2, 0.2, 0.5).unwrap()).abs() < 1e-6);
        let ta: f64 = 0.1;
        let d = ta * (1.0 - ta) / 0.2;
        let expected = 0.5 * 0.2 / (1.0 - ta) + 0.2 / (1.0 - ta) * (20.0 - d) * ta / (20.0 * 0.2 + (20.0 - d) * ta);
        let r = honeypot_bwh_bound(0.2, 0.2, 0.5, 20).unwrap();
        assert!((r.reward - expected).abs() < 1e-15);
    }

    #[test]
    fn bonus_reading_collapses_to_plain_attack() {
        let s = scenario(0.2, 0.15, 0.4, 0.7);
        let plain = reward_single(&s).unwrap();
        assert!((bonus_scheme_reward(&s, 0.0).unwrap() - plain).abs() < 1e-15);
        assert!((bonus_scheme_reward_beta_denominator(&s, 0.0) - plain).abs() > 1e-4);
        assert_eq!(bonus_scheme_reward(&s.with_tau(0.0), 0.3).unwrap(), 0.2);
    }

    #[test]
    fn safe_threshold_examples() {
        assert_eq!(safe_bonus_threshold(0.3, 0.0).unwrap(), BonusThreshold::Feasible(0.5));
        let t = safe_bonus_threshold(0.3, 1.0).unwrap();
        assert!(matches!(t, BonusThreshold::Infeasible(v) if (v - 1.0 / 0.6).abs() < 1e-12));
        assert_eq!(safe_bonus_threshold(1.0, 1.0).unwrap(), BonusThreshold::Feasible(0.5));
        assert!(safe_bonus_threshold(0.0, 0.5).is_err());
    }

    fn distribution() -> impl Strategy<Value = HonestPowerDistribution> {
        prop::collection::vec(0.001f64..0.1, 2..8).prop_map(|shares| HonestPowerDistribution {
            shares,
            atomized_remainder: 0.0,
        })
    }

    proptest! {
        #[test]
        fn merging_never_raises_c_max(dist in distribution(), i in 0usize..8, j in 0usize..8) {
            let n = dist.shares.len();
            let (i, j) = (i % n, j % n);
            prop_assume!(i != j);
            let outside = dist.total();
            let alpha = (1.0 - outside) / 2.0;
            prop_assume!(alpha < 0.5);
            let before = c_max_single(alpha, 1.0 - outside - alpha, &dist).unwrap();
            let after = c_max_single(alpha, 1.0 - outside - alpha, &dist.merged(i, j)).unwrap();
            prop_assert!(after <= before + 1e-15);
        }

        #[test]
        fn selfish_threshold_decreases(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(selfish_mining_threshold(hi).unwrap() < selfish_mining_threshold(lo).unwrap());
        }

        #[test]
        fn detection_grows_with_identities(
            alpha in 0.05f64..0.45, beta in 0.05f64..0.45, tau in 0.01f64..1.0, c in 0.0f64..=1.0, l in 1u64..1000,
        ) {
            prop_assume!(alpha + beta < 0.95);
            let s = scenario(alpha, beta, tau, c);
            let lo = detection_resilient_reward(&s, l).unwrap().reward;
            let hi = detection_resilient_reward(&s, l + 1).unwrap().reward;
            prop_assert!(hi >= lo - 1e-15);
            let limit = detection_resilient_reward(&s, 1_000_000).unwrap().reward;
            prop_assert!((limit - reward_single(&s).unwrap()).abs() < 1e-6);
        }
    }
}
