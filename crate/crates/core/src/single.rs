//! Fork-after-withholding against a single open pool.
//!
//! The attacker mines honestly with `(1 - tau) * alpha` and infiltrates the
//! victim with `tau * alpha`. Her infiltration blocks are held back and only
//! released to the pool manager when an outside miner publishes, which forks
//! the chain. With `c = 0` this is plain block withholding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rer, validate_single, RewardReport, SinglePoolScenario};
use crate::optimize::grid_golden_max;

/// Grid resolution and golden-section width for the numeric optimum.
const TAU_GRID_POINTS: usize = 1000;
const TAU_TOL: f64 = 1e-9;
/// Closed-form and numeric optima must agree this closely in tau.
pub const TAU_AGREEMENT: f64 = 1e-6;

/// Share of a pool's payout that goes to infiltration power `infiltration`
/// among honest pool power `pool`.
pub(crate) fn share(infiltration: f64, pool: f64) -> f64 {
    if infiltration == 0.0 {
        0.0
    } else {
        infiltration / (pool + infiltration)
    }
}

/// Victim pool's gross revenue per round.
fn pool_revenue(alpha: f64, beta: f64, tau: f64, c: f64) -> f64 {
    let ta = tau * alpha;
    let external = 1.0 - alpha - beta;
    beta / (1.0 - ta) + c * ta * external / (1.0 - ta)
}

fn attacker_reward(alpha: f64, beta: f64, tau: f64, c: f64) -> f64 {
    let ta = tau * alpha;
    (1.0 - tau) * alpha / (1.0 - ta) + pool_revenue(alpha, beta, tau, c) * share(ta, beta)
}

fn checked(s: &SinglePoolScenario) -> Result<SinglePoolScenario> {
    let s = validate_single(s)?;
    if s.tau * s.alpha >= 1.0 {
        return Err(Error::DegenerateInput("tau * alpha = 1".into()));
    }
    Ok(s)
}

/// Attacker's expected reward per round.
pub fn reward_single(s: &SinglePoolScenario) -> Result<f64> {
    let s = checked(s)?;
    Ok(attacker_reward(s.alpha, s.beta, s.tau, s.c))
}

/// The block-withholding baseline: the same attack with forks never won.
pub fn reward_bwh(alpha: f64, beta: f64, tau: f64) -> Result<f64> {
    reward_single(&SinglePoolScenario { alpha, beta, tau, c: 0.0 })
}

/// Victim pool's gross revenue, including what it pays out to the attacker.
pub fn victim_reward(s: &SinglePoolScenario) -> Result<f64> {
    let s = checked(s)?;
    Ok(pool_revenue(s.alpha, s.beta, s.tau, s.c))
}

/// Attacker and pool rewards with their relative extra rewards. The pool is
/// measured against `beta + tau * alpha`, what it would earn unattacked.
pub fn report_single(s: &SinglePoolScenario) -> Result<RewardReport> {
    let attacker_reward = reward_single(s)?;
    let pool_reward = victim_reward(s)?;
    Ok(RewardReport {
        attacker_reward,
        pool_reward,
        attacker_rer_pct: rer(attacker_reward, s.alpha)?,
        pool_rer_pct: rer(pool_reward, s.beta + s.tau * s.alpha)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalTauResult {
    pub tau_bar: f64,
    pub reward_at_optimum: f64,
    pub method: TauMethod,
    /// Closed-form optimum, when defined for these inputs.
    pub closed_form_tau: Option<f64>,
    pub numeric_tau: f64,
    /// Set when the closed form exists but misses the numeric optimum by
    /// more than [`TAU_AGREEMENT`].
    pub discrepancy: bool,
    /// False when the numeric optimum sits on `tau = 0` or `tau = 1`.
    pub interior: bool,
}

/// Closed-form maximizer of the attacker reward over tau. `None` when the
/// expression is undefined (no outside miners, or a negative discriminant).
pub fn optimal_tau_closed_form(alpha: f64, beta: f64, c: f64) -> Option<f64> {
    let e = 1.0 - alpha - beta;
    let disc = e * e * c * c + e * (alpha * beta + alpha - 2.0) * c - alpha * (1.0 + beta) + 1.0;
    let den = alpha * e * (c * (1.0 - beta) - 1.0);
    if disc < 0.0 || den == 0.0 {
        return None;
    }
    let num = (1.0 - alpha) * (1.0 - c) * beta + beta * beta * c - beta * disc.sqrt();
    let tau = num / den;
    tau.is_finite().then_some(tau)
}

/// Infiltration share that maximizes the attacker's reward.
///
/// Both the closed form and a numeric search (1000-point grid plus golden
/// section) are evaluated. When they agree the closed form is reported;
/// otherwise the numeric optimum wins and the disagreement is flagged.
pub fn optimal_tau(alpha: f64, beta: f64, c: f64) -> Result<OptimalTauResult> {
    validate_single(&SinglePoolScenario { alpha, beta, tau: 0.0, c })?;
    if beta <= 0.0 {
        return Err(Error::InvalidArgument("beta must be positive to optimize tau".into()));
    }
    if alpha <= 0.0 {
        return Err(Error::DegenerateInput("alpha must be positive to optimize tau".into()));
    }
    let objective = |t: f64| attacker_reward(alpha, beta, t, c);
    let numeric = grid_golden_max(objective, 0.0, 1.0, TAU_GRID_POINTS, TAU_TOL);
    let interior = numeric.x > TAU_AGREEMENT && numeric.x < 1.0 - TAU_AGREEMENT;
    let closed = optimal_tau_closed_form(alpha, beta, c).filter(|t| (0.0..=1.0).contains(t));
    let agrees = closed.is_some_and(|t| (t - numeric.x).abs() < TAU_AGREEMENT);
    let discrepancy = closed.is_some() && !agrees;
    if discrepancy {
        log::warn!(
            "closed-form tau {:?} disagrees with numeric tau {} (alpha={alpha}, beta={beta}, c={c})",
            closed,
            numeric.x
        );
    }
    let (tau_bar, method) = match closed {
        Some(t) if agrees => (t, TauMethod::ClosedForm),
        _ => (numeric.x, TauMethod::Numeric),
    };
    Ok(OptimalTauResult {
        tau_bar,
        reward_at_optimum: objective(tau_bar),
        method,
        closed_form_tau: optimal_tau_closed_form(alpha, beta, c),
        numeric_tau: numeric.x,
        discrepancy,
        interior,
    })
}
