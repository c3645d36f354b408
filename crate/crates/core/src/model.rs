//! Scenario types and the domain constraints every analytic and simulated
//! evaluation relies on.
//!
//! Powers are fractions of the total network hash rate, which is normalized
//! to 1. No single miner or pool may hold half of it or more. Validation
//! rejects bad input; it never clamps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking that power budgets sum to at most 1.
pub const BUDGET_SLACK: f64 = 1e-12;

/// Upper bound on the number of target pools in a multi-pool scenario.
pub const MAX_POOLS: usize = 8;

/// A fraction of the total network hash rate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerFraction(f64);

impl PowerFraction {
    /// Any fraction in `[0, 1]`.
    pub fn new(field: &str, value: f64) -> Result<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::out_of_range(field, value, "must lie in [0, 1]"));
        }
        Ok(PowerFraction(value))
    }

    /// Power held by one miner or pool: additionally below one half.
    pub fn actor(field: &str, value: f64) -> Result<Self> {
        let p = Self::new(field, value)?;
        if value >= 0.5 {
            return Err(Error::out_of_range(
                field,
                value,
                "a single miner or pool must hold less than 0.5",
            ));
        }
        Ok(p)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

fn probability(field: &str, value: f64) -> Result<f64> {
    PowerFraction::new(field, value).map(PowerFraction::get)
}

fn within_budget(what: impl Into<String>, total: f64) -> Result<()> {
    if total > 1.0 + BUDGET_SLACK {
        return Err(Error::BudgetExceeded {
            what: what.into(),
            total,
        });
    }
    Ok(())
}

/// One attacker against one open pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglePoolScenario {
    /// Attacker's total power.
    pub alpha: f64,
    /// Victim pool's own power, excluding the infiltration.
    pub beta: f64,
    /// Share of the attacker's power placed inside the pool.
    pub tau: f64,
    /// Probability that a forked infiltration block wins.
    pub c: f64,
}

impl SinglePoolScenario {
    pub fn new(alpha: f64, beta: f64, tau: f64, c: f64) -> Result<Self> {
        validate_single(&SinglePoolScenario { alpha, beta, tau, c })
    }

    pub fn with_tau(self, tau: f64) -> Self {
        SinglePoolScenario { tau, ..self }
    }

    pub fn with_c(self, c: f64) -> Self {
        SinglePoolScenario { c, ..self }
    }

    /// Power of miners outside both the attacker and the pool.
    pub fn external(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }
}

pub fn validate_single(raw: &SinglePoolScenario) -> Result<SinglePoolScenario> {
    PowerFraction::actor("alpha", raw.alpha)?;
    PowerFraction::actor("beta", raw.beta)?;
    probability("tau", raw.tau)?;
    probability("c", raw.c)?;
    within_budget("alpha + beta", raw.alpha + raw.beta)?;
    Ok(*raw)
}

/// One attacker spreading infiltration power over several open pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPoolScenario {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub taus: Vec<f64>,
    /// A fork with `k` attacker branches gives each of them `c / k`.
    pub c: f64,
}

impl MultiPoolScenario {
    pub fn new(alpha: f64, betas: Vec<f64>, taus: Vec<f64>, c: f64) -> Result<Self> {
        let s = MultiPoolScenario {
            alpha,
            betas,
            taus,
            c,
        };
        validate_multi(&s)?;
        Ok(s)
    }

    pub fn pools(&self) -> usize {
        self.betas.len()
    }

    pub fn total_tau(&self) -> f64 {
        self.taus.iter().sum()
    }

    pub fn total_beta(&self) -> f64 {
        self.betas.iter().sum()
    }

    pub fn external(&self) -> f64 {
        1.0 - self.alpha - self.total_beta()
    }
}

pub fn validate_multi(raw: &MultiPoolScenario) -> Result<MultiPoolScenario> {
    let n = raw.betas.len();
    if n == 0 {
        return Err(Error::ConstraintViolated("at least one target pool is required".into()));
    }
    if raw.taus.len() != n {
        return Err(Error::ConstraintViolated(format!(
            "betas has {} entries but taus has {}",
            n,
            raw.taus.len()
        )));
    }
    if n > MAX_POOLS {
        return Err(Error::TooManyPools { n, max: MAX_POOLS });
    }
    PowerFraction::actor("alpha", raw.alpha)?;
    for (i, &b) in raw.betas.iter().enumerate() {
        PowerFraction::actor(&format!("betas[{i}]"), b)?;
    }
    for (i, &t) in raw.taus.iter().enumerate() {
        probability(&format!("taus[{i}]"), t)?;
    }
    probability("c", raw.c)?;
    within_budget("sum(taus)", raw.total_tau())?;
    within_budget("alpha + sum(betas)", raw.alpha + raw.total_beta())?;
    Ok(raw.clone())
}

/// Two pools infiltrating each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameScenario {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Pool 1's infiltration power placed inside pool 2 (absolute, not a share).
    pub f1: f64,
    pub f2: f64,
    /// Two-branch fork: probability that pool i's infiltration block wins.
    pub c1: f64,
    pub c2: f64,
    /// Three-branch fork: probability that pool i's infiltration block wins.
    pub c1p: f64,
    pub c2p: f64,
}

impl GameScenario {
    pub fn external(&self) -> f64 {
        1.0 - self.alpha1 - self.alpha2
    }
}

pub fn validate_game(raw: &GameScenario) -> Result<GameScenario> {
    PowerFraction::actor("alpha1", raw.alpha1)?;
    PowerFraction::actor("alpha2", raw.alpha2)?;
    within_budget("alpha1 + alpha2", raw.alpha1 + raw.alpha2)?;
    for (field, f, cap) in [("f1", raw.f1, raw.alpha1), ("f2", raw.f2, raw.alpha2)] {
        if !f.is_finite() || f < 0.0 || f > cap + BUDGET_SLACK {
            return Err(Error::out_of_range(
                field,
                f,
                "infiltration power must lie in [0, own pool power]",
            ));
        }
    }
    probability("c1", raw.c1)?;
    probability("c2", raw.c2)?;
    probability("c1p", raw.c1p)?;
    probability("c2p", raw.c2p)?;
    if raw.c1p + raw.c2p > 1.0 + BUDGET_SLACK {
        return Err(Error::ConstraintViolated(format!(
            "c1p + c2p = {} exceeds 1",
            raw.c1p + raw.c2p
        )));
    }
    Ok(*raw)
}

/// Non-fatal findings about a game scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationWarning {
    pub field: &'static str,
    pub message: String,
}

/// Rational managers always back an infiltration block that reaches them,
/// so any fork win probability below `alpha1 + alpha2` describes a manager
/// leaving reward on the table. Reported, not rejected.
pub fn game_warnings(g: &GameScenario) -> Vec<ValidationWarning> {
    let floor = g.alpha1 + g.alpha2;
    [("c1", g.c1), ("c2", g.c2)]
        .into_iter()
        .filter(|&(_, c)| c < floor)
        .map(|(field, c)| ValidationWarning {
            field,
            message: format!("{field} = {c} is below the rational-manager floor alpha1 + alpha2 = {floor}"),
        })
        .collect()
}

/// Expected rewards per round, block reward normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardReport {
    pub attacker_reward: f64,
    pub pool_reward: f64,
    pub attacker_rer_pct: f64,
    pub pool_rer_pct: f64,
}

/// Relative extra reward in percent; negative values are losses.
pub fn rer(reward: f64, honest_power: f64) -> Result<f64> {
    if honest_power == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok((reward - honest_power) / honest_power * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accepts_typical_single_scenario() {
        let s = SinglePoolScenario::new(0.2, 0.2, 0.5, 0.5).unwrap();
        assert_eq!(s.tau, 0.5);
    }

    #[test]
    fn rejects_majority_attacker() {
        let err = SinglePoolScenario::new(0.6, 0.2, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::PowerOutOfRange { ref field, .. } if field == "alpha"));
    }

    #[test]
    fn rejects_oversized_budget() {
        let err = SinglePoolScenario::new(0.5, 0.6, 0.0, 0.0).unwrap_err();
        assert!(matches!(
            err,
            Error::PowerOutOfRange { .. } | Error::BudgetExceeded { .. }
        ));
        let err = validate_multi(&MultiPoolScenario {
            alpha: 0.45,
            betas: vec![0.3, 0.3],
            taus: vec![0.1, 0.1],
            c: 0.0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn multi_pool_shape_checks() {
        let base = MultiPoolScenario {
            alpha: 0.2,
            betas: vec![0.1, 0.1],
            taus: vec![0.1],
            c: 0.5,
        };
        assert!(matches!(validate_multi(&base), Err(Error::ConstraintViolated(_))));
        let nine = MultiPoolScenario {
            alpha: 0.01,
            betas: vec![0.01; 9],
            taus: vec![0.1; 9],
            c: 0.5,
        };
        assert!(matches!(validate_multi(&nine), Err(Error::TooManyPools { n: 9, .. })));
        let over = MultiPoolScenario {
            taus: vec![0.6, 0.5],
            ..base.clone()
        };
        assert!(matches!(validate_multi(&over), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn game_three_branch_budget() {
        let g = GameScenario {
            alpha1: 0.2,
            alpha2: 0.1,
            f1: 0.05,
            f2: 0.02,
            c1: 0.5,
            c2: 0.5,
            c1p: 0.6,
            c2p: 0.5,
        };
        assert!(matches!(validate_game(&g), Err(Error::ConstraintViolated(_))));
        let g = GameScenario { f1: 0.3, c1p: 0.3, ..g };
        assert!(matches!(validate_game(&g), Err(Error::PowerOutOfRange { .. })));
    }

    #[test]
    fn low_c_is_a_warning_only() {
        let g = GameScenario {
            alpha1: 0.2,
            alpha2: 0.1,
            f1: 0.0,
            f2: 0.0,
            c1: 0.1,
            c2: 0.5,
            c1p: 0.05,
            c2p: 0.25,
        };
        assert!(validate_game(&g).is_ok());
        let w = game_warnings(&g);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].field, "c1");
    }

    #[test]
    fn rer_examples() {
        assert_eq!(rer(0.2, 0.2).unwrap(), 0.0);
        assert!((rer(0.206, 0.2).unwrap() - 3.0).abs() < 1e-12);
        assert!((rer(0.18, 0.2).unwrap() + 10.0).abs() < 1e-12);
        assert_eq!(rer(0.1, 0.0), Err(Error::DivisionByZero));
    }

    proptest! {
        #[test]
        fn accepted_single_scenarios_satisfy_invariants(
            alpha in -0.5f64..1.5, beta in -0.5f64..1.5, tau in -0.5f64..1.5, c in -0.5f64..1.5
        ) {
            let raw = SinglePoolScenario { alpha, beta, tau, c };
            if let Ok(s) = validate_single(&raw) {
                prop_assert!((0.0..0.5).contains(&s.alpha));
                prop_assert!((0.0..0.5).contains(&s.beta));
                prop_assert!((0.0..=1.0).contains(&s.tau));
                prop_assert!((0.0..=1.0).contains(&s.c));
                prop_assert!(s.alpha + s.beta <= 1.0 + BUDGET_SLACK);
                prop_assert_eq!(validate_single(&s), Ok(s));
            }
        }

        #[test]
        fn accepted_game_scenarios_satisfy_invariants(
            alpha1 in -0.5f64..1.5, alpha2 in -0.5f64..1.5,
            f1 in -0.5f64..1.5, f2 in -0.5f64..1.5,
            c1 in -0.5f64..1.5, c2 in -0.5f64..1.5,
            c1p in -0.5f64..1.5, c2p in -0.5f64..1.5,
        ) {
            let raw = GameScenario { alpha1, alpha2, f1, f2, c1, c2, c1p, c2p };
            if let Ok(g) = validate_game(&raw) {
                prop_assert!(g.f1 >= 0.0 && g.f1 <= g.alpha1 + BUDGET_SLACK);
                prop_assert!(g.f2 >= 0.0 && g.f2 <= g.alpha2 + BUDGET_SLACK);
                prop_assert!(g.c1p + g.c2p <= 1.0 + BUDGET_SLACK);
                prop_assert_eq!(validate_game(&g), Ok(g));
            }
        }

        #[test]
        fn accepted_multi_scenarios_satisfy_invariants(
            alpha in -0.5f64..1.5,
            betas in proptest::collection::vec(-0.5f64..1.5, 1..4),
            taus in proptest::collection::vec(-0.5f64..1.5, 1..4),
            c in -0.5f64..1.5,
        ) {
            let raw = MultiPoolScenario { alpha, betas, taus, c };
            if let Ok(s) = validate_multi(&raw) {
                prop_assert_eq!(s.betas.len(), s.taus.len());
                prop_assert!(s.total_tau() <= 1.0 + BUDGET_SLACK);
                prop_assert!(s.alpha + s.total_beta() <= 1.0 + BUDGET_SLACK);
                prop_assert!(s.taus.iter().all(|t| (0.0..=1.0).contains(t)));
                prop_assert_eq!(validate_multi(&s), Ok(s.clone()));
            }
        }
    }
}
