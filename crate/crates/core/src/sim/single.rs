//! One attacker against one pool.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{run, CaseTag, Categorical, RoundCase, RoundModel, SimConfig, SimOutcome};
use crate::error::Result;
use crate::model::{validate_single, SinglePoolScenario};
use crate::single::share;

pub const ATTACKER: usize = 0;
pub const POOL: usize = 1;
pub const EXTERNAL: usize = 2;

const INNOCENT: usize = 0;
const INFILTRATION: usize = 1;
const POOL_HONEST: usize = 2;

#[derive(Debug, Clone)]
pub struct SingleRound {
    finders: Categorical,
    attacker_share: f64,
    c: f64,
}

impl SingleRound {
    pub fn new(s: &SinglePoolScenario) -> Result<Self> {
        let s = validate_single(s)?;
        let ta = s.tau * s.alpha;
        Ok(SingleRound {
            finders: Categorical::new(&[s.alpha - ta, ta, s.beta, s.external()]),
            attacker_share: share(ta, s.beta),
            c: s.c,
        })
    }

    fn pool_block(&self, rewards: &mut [f64]) {
        rewards[ATTACKER] += self.attacker_share;
        rewards[POOL] += 1.0 - self.attacker_share;
    }
}

impl RoundModel for SingleRound {
    type State = ();

    fn name(&self) -> &'static str {
        "single"
    }

    fn actors(&self) -> Vec<String> {
        vec!["attacker".into(), "pool".into(), "external".into()]
    }

    fn init_state(&self, _: &mut ChaCha8Rng) {}

    fn play(&self, rng: &mut ChaCha8Rng, _: &mut (), rewards: &mut [f64]) -> RoundCase {
        let mut withheld = false;
        loop {
            match self.finders.sample(rng) {
                INNOCENT => {
                    rewards[ATTACKER] += 1.0;
                    return RoundCase::settled(CaseTag::InnocentWin, ATTACKER);
                }
                INFILTRATION => withheld = true,
                POOL_HONEST => {
                    self.pool_block(rewards);
                    return RoundCase::settled(CaseTag::PoolHonestWin, POOL);
                }
                _ if !withheld => {
                    rewards[EXTERNAL] += 1.0;
                    return RoundCase::settled(CaseTag::ExternalNoWithheld, EXTERNAL);
                }
                _ => {
                    let won = rng.random::<f64>() < self.c;
                    let winner = if won {
                        self.pool_block(rewards);
                        POOL
                    } else {
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

/// Monte Carlo estimate of the single-pool attack. Actors are `attacker`,
/// `pool` (the pool's own miners) and `external`.
pub fn simulate_single(s: &SinglePoolScenario, cfg: &SimConfig) -> Result<SimOutcome> {
    run(&SingleRound::new(s)?, cfg)
}
