//! Two pools infiltrating each other.
//!
//! Each round produces a direct block for pool 1, pool 2 or the outside
//! world. Gross pool revenues follow from the direct blocks through the
//! same linear cross-payment map as the analytic game, and each pool's
//! loyal members keep their proportional part of it. Actors are `pool1` and
//! `pool2` (members only) and `external`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{run, CaseTag, Categorical, RoundCase, RoundModel, SimConfig, SimOutcome};
use crate::error::{Error, Result};
use crate::game::{cross_shares, member_fraction};
use crate::model::{validate_game, GameScenario};

pub const POOL1: usize = 0;
pub const POOL2: usize = 1;
pub const EXTERNAL: usize = 2;

const INNOCENT1: usize = 0;
const INFILTRATE1: usize = 1;
const INNOCENT2: usize = 2;
const INFILTRATE2: usize = 3;

#[derive(Debug, Clone)]
pub struct GameRound {
    finders: Categorical,
    /// Member payoff per direct block: `payout[winner][actor]`.
    payout: [[f64; 2]; 2],
    keep: [f64; 2],
    c1: f64,
    c2: f64,
    c1p: f64,
    c2p: f64,
}

impl GameRound {
    pub fn new(g: &GameScenario) -> Result<Self> {
        let g = validate_game(g)?;
        let s = cross_shares(&g);
        let det = 1.0 - s[0] * s[1];
        if det.abs() < 1e-12 {
            return Err(Error::SingularSystem { det });
        }
        let keep = member_fraction(&g);
        // Gross revenue per unit direct block of pool 1: (1, s2) / det.
        let payout = [
            [keep[0] / det, keep[1] * s[1] / det],
            [keep[0] * s[0] / det, keep[1] / det],
        ];
        Ok(GameRound {
            finders: Categorical::new(&[
                g.alpha1 - g.f1,
                g.f1,
                g.alpha2 - g.f2,
                g.f2,
                g.external(),
            ]),
            payout,
            keep,
            c1: g.c1,
            c2: g.c2,
            c1p: g.c1p,
            c2p: g.c2p,
        })
    }

    fn credit(&self, pool: usize, rewards: &mut [f64]) {
        rewards[POOL1] += self.payout[pool][0];
        rewards[POOL2] += self.payout[pool][1];
    }

    /// Gross pool revenues and their standard errors, recovered from the
    /// member payoffs of an outcome produced by this model.
    pub fn gross(&self, outcome: &SimOutcome) -> [(f64, f64); 2] {
        [POOL1, POOL2].map(|i| (outcome.mean(i) / self.keep[i], outcome.std_error[i] / self.keep[i]))
    }
}

impl RoundModel for GameRound {
    type State = ();

    fn name(&self) -> &'static str {
        "game"
    }

    fn actors(&self) -> Vec<String> {
        vec!["pool1".into(), "pool2".into(), "external".into()]
    }

    fn init_state(&self, _: &mut ChaCha8Rng) {}

    fn play(&self, rng: &mut ChaCha8Rng, _: &mut (), rewards: &mut [f64]) -> RoundCase {
        // held[i]: pool i's infiltrators hold a block of the other pool.
        let mut held = [false; 2];
        loop {
            match self.finders.sample(rng) {
                INNOCENT1 => {
                    self.credit(POOL1, rewards);
                    return RoundCase::settled(CaseTag::InnocentWin, POOL1);
                }
                INNOCENT2 => {
                    self.credit(POOL2, rewards);
                    return RoundCase::settled(CaseTag::InnocentWin, POOL2);
                }
                INFILTRATE1 => held[0] = true,
                INFILTRATE2 => held[1] = true,
                _ => {
                    let u: f64 = rng.random();
                    let (tag, branches, winner) = match held {
                        [false, false] => (CaseTag::ExternalNoWithheld, 0, EXTERNAL),
                        // Pool 2's infiltrator releases a block of pool 1.
                        [false, true] => (CaseTag::ForkFromWithheld, 2, if u < self.c2 { POOL1 } else { EXTERNAL }),
                        [true, false] => (CaseTag::ForkFromWithheld, 2, if u < self.c1 { POOL2 } else { EXTERNAL }),
                        [true, true] => {
                            let w = if u < self.c2p {
                                POOL1
                            } else if u < self.c2p + self.c1p {
                                POOL2
                            } else {
                                EXTERNAL
                            };
                            (CaseTag::MultiBranchFork, 3, w)
                        }
                    };
                    if winner == EXTERNAL {
                        rewards[EXTERNAL] += 1.0;
                    } else {
                        self.credit(winner, rewards);
                    }
                    return RoundCase {
                        tag,
                        fork_branches: branches,
                        winner,
                        withheld_won: branches > 0 && winner != EXTERNAL,
                    };
                }
            }
        }
    }
}

pub fn simulate_game(g: &GameScenario, cfg: &SimConfig) -> Result<SimOutcome> {
    run(&GameRound::new(g)?, cfg)
}
