//! The single-pool attack split over `L` infiltration identities, where a
//! pool that sees a stale withheld block expels the identity behind it
//! until its next payout. Every lost fork since the previous pool block
//! costs one identity its share of that block, and a won fork costs the
//! submitting identity its share as well.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{run, CaseTag, Categorical, RoundCase, RoundModel, SimConfig, SimOutcome};
use crate::error::{Error, Result};
use crate::model::{validate_single, SinglePoolScenario};

pub const ATTACKER: usize = 0;
pub const POOL: usize = 1;
pub const EXTERNAL: usize = 2;

#[derive(Debug, Clone)]
pub struct DetectionRound {
    finders: Categorical,
    identities: u64,
    beta: f64,
    infiltration: f64,
    c: f64,
    /// Probability that the next payout-relevant event is a lost fork.
    lost_fork_odds: f64,
}

impl DetectionRound {
    pub fn new(s: &SinglePoolScenario, identities: u64) -> Result<Self> {
        let s = validate_single(s)?;
        if identities == 0 {
            return Err(Error::InvalidArgument("at least one identity is required".into()));
        }
        let ta = s.tau * s.alpha;
        let e = s.external();
        let lost = (1.0 - s.c) * ta * e;
        let paid = s.beta + s.c * ta * e;
        Ok(DetectionRound {
            finders: Categorical::new(&[s.alpha - ta, ta, s.beta, e]),
            identities,
            beta: s.beta,
            infiltration: ta,
            c: s.c,
            lost_fork_odds: if lost + paid > 0.0 { lost / (lost + paid) } else { 0.0 },
        })
    }

    /// Attacker's share of a pool block with `active` identities still paid.
    pub fn share_with(&self, active: u64) -> f64 {
        let m = active as f64 * self.infiltration;
        if m == 0.0 {
            0.0
        } else {
            m / (self.identities as f64 * self.beta + m)
        }
    }

    fn pool_block(&self, expelled: u64, rewards: &mut [f64]) {
        let s = self.share_with(self.identities.saturating_sub(expelled));
        rewards[ATTACKER] += s;
        rewards[POOL] += 1.0 - s;
    }
}

impl RoundModel for DetectionRound {
    /// Lost forks since the last pool block.
    type State = u64;

    fn name(&self) -> &'static str {
        "detection"
    }

    fn actors(&self) -> Vec<String> {
        vec!["attacker".into(), "pool".into(), "external".into()]
    }

    /// Looking back from any round, the lost forks since the previous pool
    /// block are geometric with the same odds as looking forward.
    fn init_state(&self, rng: &mut ChaCha8Rng) -> u64 {
        let mut d = 0;
        while rng.random::<f64>() < self.lost_fork_odds {
            d += 1;
        }
        d
    }

    fn play(&self, rng: &mut ChaCha8Rng, lost: &mut u64, rewards: &mut [f64]) -> RoundCase {
        let mut withheld = false;
        loop {
            match self.finders.sample(rng) {
                0 => {
                    rewards[ATTACKER] += 1.0;
                    return RoundCase::settled(CaseTag::InnocentWin, ATTACKER);
                }
                1 => withheld = true,
                2 => {
                    self.pool_block(*lost, rewards);
                    *lost = 0;
                    return RoundCase::settled(CaseTag::PoolHonestWin, POOL);
                }
                _ if !withheld => {
                    rewards[EXTERNAL] += 1.0;
                    return RoundCase::settled(CaseTag::ExternalNoWithheld, EXTERNAL);
                }
                _ => {
                    let won = rng.random::<f64>() < self.c;
                    let winner = if won {
                        self.pool_block(*lost + 1, rewards);
                        *lost = 0;
                        POOL
                    } else {
                        *lost += 1;
                        rewards[EXTERNAL] += 1.0;
                        EXTERNAL
                    };
                    return RoundCase {
                        tag: CaseTag::ForkFromWithheld,
                        fork_branches: 2,
                        winner,
                        withheld_won: won,
                    };
                }
            }
        }
    }
}

/// Rounds carry state here, so standard errors computed as if rounds were
/// independent are approximate.
pub fn simulate_detection(s: &SinglePoolScenario, identities: u64, cfg: &SimConfig) -> Result<SimOutcome> {
    run(&DetectionRound::new(s, identities)?, cfg)
}
