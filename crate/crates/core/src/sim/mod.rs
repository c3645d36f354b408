//! Round-level Monte Carlo simulation.
//!
//! A round runs from the start of a block race until some block is
//! accepted. Finders are drawn one at a time in proportion to power; the
//! race is memoryless, so only the order of finds matters. Infiltration
//! finds are withheld and the round continues. Pool payouts to infiltrators
//! are credited at their expected proportional share instead of sampling
//! shares.
//!
//! Rounds are grouped into fixed blocks of [`BLOCK_ROUNDS`]. Block `b` draws
//! from ChaCha8 seeded with the run seed on stream `b`, and block results
//! are merged in block order, so an outcome depends only on the seed, the
//! round count and the scenario, never on how many workers ran it.

pub mod detection;
pub mod game;
pub mod multi;
pub mod single;

pub use detection::{simulate_detection, DetectionRound};
pub use game::{simulate_game, GameRound};
pub use multi::{simulate_multi, MultiRound};
pub use single::{simulate_single, SingleRound};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rounds per RNG substream.
pub const BLOCK_ROUNDS: u64 = 65_536;
/// Below this many rounds the standard errors are flagged as unreliable.
pub const LOW_SAMPLE_ROUNDS: u64 = 100;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rounds: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(rounds: u64, seed: u64) -> Self {
        SimConfig { rounds, seed, workers: 1 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        SimConfig { workers, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// The attacker's (or a pool's) innocent power finds the block.
    #[serde(rename = "A_innocent_win")]
    InnocentWin,
    /// The target pool's own miners find the block.
    #[serde(rename = "B_pool_honest_win")]
    PoolHonestWin,
    /// An outside block meets exactly one withheld block.
    #[serde(rename = "C_fork_from_withheld")]
    ForkFromWithheld,
    /// An outside block meets two or more withheld blocks.
    #[serde(rename = "D_multi_branch_fork")]
    MultiBranchFork,
    /// An outside block with nothing withheld.
    #[serde(rename = "E_external_win_no_withheld")]
    ExternalNoWithheld,
}

impl CaseTag {
    pub const ALL: [CaseTag; 5] = [
        CaseTag::InnocentWin,
        CaseTag::PoolHonestWin,
        CaseTag::ForkFromWithheld,
        CaseTag::MultiBranchFork,
        CaseTag::ExternalNoWithheld,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CaseTag::InnocentWin => "A_innocent_win",
            CaseTag::PoolHonestWin => "B_pool_honest_win",
            CaseTag::ForkFromWithheld => "C_fork_from_withheld",
            CaseTag::MultiBranchFork => "D_multi_branch_fork",
            CaseTag::ExternalNoWithheld => "E_external_win_no_withheld",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// How one round ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundCase {
    pub tag: CaseTag,
    /// Competing branches when the round ended in a fork, else 0.
    pub fork_branches: u32,
    /// Index into the model's actor list of whoever was paid the block.
    pub winner: usize,
    /// Set when a withheld block won the fork.
    pub withheld_won: bool,
}

impl RoundCase {
    pub(crate) fn settled(tag: CaseTag, winner: usize) -> Self {
        RoundCase { tag, fork_branches: 0, winner, withheld_won: false }
    }
}

/// One simulated protocol. `play` runs a single round, adds each actor's
/// payout to `rewards` (which sum to 1) and reports how the round ended.
pub trait RoundModel: Sync {
    /// Anything carried from one round to the next.
    type State;

    fn name(&self) -> &'static str;
    fn actors(&self) -> Vec<String>;
    fn init_state(&self, rng: &mut ChaCha8Rng) -> Self::State;
    fn play(&self, rng: &mut ChaCha8Rng, state: &mut Self::State, rewards: &mut [f64]) -> RoundCase;
}

/// Draws an index with probability proportional to its weight.
#[derive(Debug, Clone)]
pub(crate) struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub(crate) fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        Categorical { cumulative }
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let last = self.cumulative.len() - 1;
        self.cumulative[..last].iter().position(|&c| u < c).unwrap_or(last)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForkStats {
    pub forks: u64,
    pub branches_total: u64,
    pub withheld_wins: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    #[serde(rename = "A_innocent_win")]
    pub a: u64,
    #[serde(rename = "B_pool_honest_win")]
    pub b: u64,
    #[serde(rename = "C_fork_from_withheld")]
    pub c: u64,
    #[serde(rename = "D_multi_branch_fork")]
    pub d: u64,
    #[serde(rename = "E_external_win_no_withheld")]
    pub e: u64,
}

impl CaseCounts {
    pub fn get(&self, tag: CaseTag) -> u64 {
        self.as_array()[tag.index()]
    }

    pub fn as_array(&self) -> [u64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    pub fn total(&self) -> u64 {
        self.as_array().iter().sum()
    }

    fn from_array(a: [u64; 5]) -> Self {
        CaseCounts { a: a[0], b: a[1], c: a[2], d: a[3], e: a[4] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngInfo {
    pub algorithm: String,
    pub seed: u64,
    pub substreams: String,
    pub block_rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub model: String,
    pub actors: Vec<String>,
    pub reward_sums: Vec<f64>,
    pub reward_sq_sums: Vec<f64>,
    pub mean_rewards: Vec<f64>,
    pub std_error: Vec<f64>,
    pub case_counts: CaseCounts,
    pub forks: ForkStats,
    pub rounds_run: u64,
    pub workers: usize,
    /// Fewer than [`LOW_SAMPLE_ROUNDS`] rounds.
    pub low_sample: bool,
    pub rng: RngInfo,
}

impl SimOutcome {
    pub fn actor_index(&self, name: &str) -> Option<usize> {
        self.actors.iter().position(|a| a == name)
    }

    pub fn mean(&self, actor: usize) -> f64 {
        self.mean_rewards[actor]
    }

    /// Relative extra reward of an actor against `honest`, with its
    /// standard error, both in percent.
    pub fn rer_pct(&self, actor: usize, honest: f64) -> Result<(f64, f64)> {
        let r = crate::model::rer(self.mean_rewards[actor], honest)?;
        Ok((r, self.std_error[actor] / honest * 100.0))
    }

    pub fn case_frequency(&self, tag: CaseTag) -> f64 {
        self.case_counts.get(tag) as f64 / self.rounds_run as f64
    }

    /// JSON document with the outcome, a schema version and an echo of the
    /// inputs.
    pub fn to_json(&self, scenario: &impl Serialize, config: &SimConfig) -> Result<String> {
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "scenario": scenario,
            "config": config,
            "outcome": self,
        });
        serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["model".to_string(), "rounds".to_string(), "seed".to_string()];
        for a in &self.actors {
            cols.push(format!("{a}_mean"));
            cols.push(format!("{a}_se"));
        }
        cols.extend(CaseTag::ALL.iter().map(|t| t.label().to_string()));
        cols.push("forks".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.model.clone(), self.rounds_run.to_string(), self.rng.seed.to_string()];
        for i in 0..self.actors.len() {
            cols.push(self.mean_rewards[i].to_string());
            cols.push(self.std_error[i].to_string());
        }
        cols.extend(self.case_counts.as_array().iter().map(u64::to_string));
        cols.push(self.forks.forks.to_string());
        cols.join(",")
    }
}

/// Per-actor standard error of the mean per-round reward.
pub fn estimate_error(outcome: &SimOutcome) -> Result<Vec<f64>> {
    let n = outcome.rounds_run;
    if n < 2 {
        return Err(Error::InsufficientSamples { rounds: n });
    }
    let nf = n as f64;
    Ok(outcome
        .reward_sums
        .iter()
        .zip(&outcome.reward_sq_sums)
        .map(|(&s, &sq)| {
            let mean = s / nf;
            let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
        .collect())
}

struct Tally {
    sums: Vec<f64>,
    sq_sums: Vec<f64>,
    cases: [u64; 5],
    forks: ForkStats,
    rounds: u64,
}

impl Tally {
    fn new(actors: usize) -> Self {
        Tally {
            sums: vec![0.0; actors],
            sq_sums: vec![0.0; actors],
            cases: [0; 5],
            forks: ForkStats::default(),
            rounds: 0,
        }
    }

    fn absorb(&mut self, other: &Tally) {
        for i in 0..self.sums.len() {
            self.sums[i] += other.sums[i];
            self.sq_sums[i] += other.sq_sums[i];
        }
        for i in 0..5 {
            self.cases[i] += other.cases[i];
        }
        self.forks.forks += other.forks.forks;
        self.forks.branches_total += other.forks.branches_total;
        self.forks.withheld_wins += other.forks.withheld_wins;
        self.rounds += other.rounds;
    }
}

fn run_block<M: RoundModel>(model: &M, actors: usize, seed: u64, block: u64, rounds: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut state = model.init_state(&mut rng);
    let mut tally = Tally::new(actors);
    let mut rewards = vec![0.0; actors];
    for _ in 0..rounds {
        rewards.iter_mut().for_each(|r| *r = 0.0);
        let case = model.play(&mut rng, &mut state, &mut rewards);
        for (i, &r) in rewards.iter().enumerate() {
            tally.sums[i] += r;
            tally.sq_sums[i] += r * r;
        }
        tally.cases[case.tag.index()] += 1;
        if case.fork_branches > 0 {
            tally.forks.forks += 1;
            tally.forks.branches_total += u64::from(case.fork_branches);
            tally.forks.withheld_wins += u64::from(case.withheld_won);
        }
    }
    tally.rounds = rounds;
    tally
}

fn run_blocks<M: RoundModel>(model: &M, actors: usize, cfg: &SimConfig) -> Result<Vec<Tally>> {
    let blocks = cfg.rounds.div_ceil(BLOCK_ROUNDS);
    let quota = |b: u64| BLOCK_ROUNDS.min(cfg.rounds - b * BLOCK_ROUNDS);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if cfg.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start workers: {e}")))?;
            return Ok(pool.install(|| {
                (0..blocks)
                    .into_par_iter()
                    .map(|b| run_block(model, actors, cfg.seed, b, quota(b)))
                    .collect()
            }));
        }
    }
    Ok((0..blocks).map(|b| run_block(model, actors, cfg.seed, b, quota(b))).collect())
}

/// Runs `cfg.rounds` rounds of `model`.
pub fn run<M: RoundModel>(model: &M, cfg: &SimConfig) -> Result<SimOutcome> {
    if cfg.rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    if cfg.workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let actors = model.actors();
    let mut total = Tally::new(actors.len());
    for t in run_blocks(model, actors.len(), cfg)? {
        total.absorb(&t);
    }
    let n = total.rounds as f64;
    let mut outcome = SimOutcome {
        model: model.name().to_string(),
        mean_rewards: total.sums.iter().map(|s| s / n).collect(),
        std_error: vec![f64::NAN; actors.len()],
        actors,
        reward_sums: total.sums,
        reward_sq_sums: total.sq_sums,
        case_counts: CaseCounts::from_array(total.cases),
        forks: total.forks,
        rounds_run: total.rounds,
        workers: cfg.workers,
        low_sample: total.rounds < LOW_SAMPLE_ROUNDS,
        rng: RngInfo {
            algorithm: "ChaCha8 (rand_chacha)".into(),
            seed: cfg.seed,
            substreams: "seed_from_u64(seed), stream = block index".into(),
            block_rounds: BLOCK_ROUNDS,
        },
    };
    if let Ok(se) = estimate_error(&outcome) {
        outcome.std_error = se;
    }
    if outcome.low_sample {
        log::warn!("only {} rounds simulated; standard errors are unreliable", outcome.rounds_run);
    }
    Ok(outcome)
}
