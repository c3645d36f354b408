//! One attacker infiltrating several pools. The first find inside each pool
//! is withheld and later finds in the same pool are discarded. An outside
//! block that meets `k` withheld blocks forks the chain into `k + 1`
//! branches; each withheld branch wins with probability `c / k`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{run, CaseTag, Categorical, RoundCase, RoundModel, SimConfig, SimOutcome};
use crate::error::Result;
use crate::model::{validate_multi, MultiPoolScenario};
use crate::single::share;

pub const ATTACKER: usize = 0;

#[derive(Debug, Clone)]
pub struct MultiRound {
    n: usize,
    finders: Categorical,
    shares: Vec<f64>,
    c: f64,
}

impl MultiRound {
    pub fn new(s: &MultiPoolScenario) -> Result<Self> {
        let s = validate_multi(s)?;
        let n = s.pools();
        let infiltration: Vec<f64> = s.taus.iter().map(|t| t * s.alpha).collect();
        let mut weights = vec![s.alpha - infiltration.iter().sum::<f64>()];
        weights.extend(&infiltration);
        weights.extend(&s.betas);
        weights.push(s.external());
        Ok(MultiRound {
            n,
            finders: Categorical::new(&weights),
            shares: infiltration.iter().zip(&s.betas).map(|(&f, &b)| share(f, b)).collect(),
            c: s.c,
        })
    }

    /// Actor index of pool `i`'s own miners.
    pub fn pool_actor(i: usize) -> usize {
        1 + i
    }

    pub fn external_actor(&self) -> usize {
        1 + self.n
    }

    fn pool_block(&self, pool: usize, rewards: &mut [f64]) {
        rewards[ATTACKER] += self.shares[pool];
        rewards[Self::pool_actor(pool)] += 1.0 - self.shares[pool];
    }
}

impl RoundModel for MultiRound {
    type State = ();

    fn name(&self) -> &'static str {
        "multi"
    }

    fn actors(&self) -> Vec<String> {
        let mut a = vec!["attacker".to_string()];
        a.extend((1..=self.n).map(|i| format!("pool{i}")));
        a.push("external".into());
        a
    }

    fn init_state(&self, _: &mut ChaCha8Rng) {}

    fn play(&self, rng: &mut ChaCha8Rng, _: &mut (), rewards: &mut [f64]) -> RoundCase {
        let n = self.n;
        let mut withheld = vec![false; n];
        loop {
            let k = self.finders.sample(rng);
            if k == 0 {
                rewards[ATTACKER] += 1.0;
                return RoundCase::settled(CaseTag::InnocentWin, ATTACKER);
            } else if k <= n {
                withheld[k - 1] = true;
            } else if k <= 2 * n {
                let pool = k - n - 1;
                self.pool_block(pool, rewards);
                return RoundCase::settled(CaseTag::PoolHonestWin, Self::pool_actor(pool));
            } else {
                let held: Vec<usize> = (0..n).filter(|&i| withheld[i]).collect();
                let external = self.external_actor();
                if held.is_empty() {
                    rewards[external] += 1.0;
                    return RoundCase::settled(CaseTag::ExternalNoWithheld, external);
                }
                let tag = if held.len() == 1 {
                    CaseTag::ForkFromWithheld
                } else {
                    CaseTag::MultiBranchFork
                };
                let u: f64 = rng.random();
                let (winner, won) = if u < self.c {
                    let branch = ((u / self.c * held.len() as f64) as usize).min(held.len() - 1);
                    self.pool_block(held[branch], rewards);
                    (Self::pool_actor(held[branch]), true)
                } else {
                    rewards[external] += 1.0;
                    (external, false)
                };
                return RoundCase {
                    tag,
                    fork_branches: held.len() as u32 + 1,
                    winner,
                    withheld_won: won,
                };
            }
        }
    }
}

/// Monte Carlo estimate of the multi-pool attack. Actors are `attacker`,
/// `pool1` .. `poolN` and `external`.
pub fn simulate_multi(s: &MultiPoolScenario, cfg: &SimConfig) -> Result<SimOutcome> {
    run(&MultiRound::new(s)?, cfg)
}
