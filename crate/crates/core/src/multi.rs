//! Fork-after-withholding against several pools at once.
//!
//! The attacker keeps at most one withheld block per target pool. When an
//! outside miner publishes, every withheld block is released at once, so a
//! fork can have up to `n + 1` branches. Rewards depend on the order in which
//! withheld blocks were first found within the round; we enumerate every
//! injective ordering of up to `n` pools.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rer, validate_multi, MultiPoolScenario, BUDGET_SLACK};
use crate::optimize::grid_golden_max;
use crate::single::share;

/// Splits the fork win probability evenly: with `k` attacker branches, each
/// wins with `c / k`, so the attacker's total never exceeds `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchWinModel {
    pub c: f64,
}

impl BranchWinModel {
    pub fn per_branch(&self, branches: usize) -> f64 {
        self.c / branches as f64
    }
}

/// Two-pool scenario with independent two- and three-branch win probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoolScenario {
    pub alpha: f64,
    pub betas: [f64; 2],
    pub taus: [f64; 2],
    /// Pool i's block wins a two-branch fork with `c_two[i]`.
    pub c_two: [f64; 2],
    /// Pool i's block wins a three-branch fork with `c_three[i]`.
    pub c_three: [f64; 2],
}

impl TwoPoolScenario {
    /// Win probabilities from the even-split model.
    pub fn with_branch_model(alpha: f64, betas: [f64; 2], taus: [f64; 2], c: f64) -> Self {
        let m = BranchWinModel { c };
        TwoPoolScenario {
            alpha,
            betas,
            taus,
            c_two: [m.per_branch(1); 2],
            c_three: [m.per_branch(2); 2],
        }
    }
}

/// Attacker reward against two pools, written out term by term.
pub fn reward_two_pools(s: &TwoPoolScenario) -> Result<f64> {
    let TwoPoolScenario { alpha, betas, taus, c_two, c_three } = *s;
    validate_multi(&MultiPoolScenario {
        alpha,
        betas: betas.to_vec(),
        taus: taus.to_vec(),
        c: 0.0,
    })
    .map_err(|e| Error::ConstraintViolated(e.to_string()))?;
    for (name, v) in [("c_two", c_two), ("c_three", c_three)] {
        if v.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::ConstraintViolated(format!("{name} entries must lie in [0, 1]")));
        }
    }
    if c_three[0] + c_three[1] > 1.0 + BUDGET_SLACK {
        return Err(Error::ConstraintViolated("c_three[0] + c_three[1] exceeds 1".into()));
    }

    let ta = [taus[0] * alpha, taus[1] * alpha];
    let both = ta[0] + ta[1];
    let external = 1.0 - alpha - betas[0] - betas[1];
    // Both pools end up holding a withheld block: first one, then the other.
    let three_branch: f64 = (0..2)
        .map(|j| ta[j] / (1.0 - ta[j]) * ta[1 - j])
        .sum::<f64>()
        * external
        / (1.0 - both);

    let mut reward = (1.0 - taus[0] - taus[1]) * alpha / (1.0 - both);
    for i in 0..2 {
        let revenue = betas[i] / (1.0 - both)
            + c_two[i] * ta[i] * external / (1.0 - ta[i])
            + c_three[i] * three_branch;
        reward += share(ta[i], betas[i]) * revenue;
    }
    Ok(reward)
}

/// Attacker reward and each target pool's gross revenue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NPoolRewards {
    pub attacker: f64,
    pub pools: Vec<f64>,
}

/// Walks every injective sequence of distinct pools, carrying the product of
/// the "next withheld block comes from pool t" factors along the prefix. Each
/// sequence of length `k` credits `c / k` of its weight to every pool in it.
fn fork_weights(ta: &[f64], c: f64) -> Vec<f64> {
    fn walk(ta: &[f64], model: BranchWinModel, used: &mut Vec<usize>, mass: f64, weight: f64, acc: &mut [f64]) {
        for t in 0..ta.len() {
            if used.contains(&t) || ta[t] == 0.0 {
                continue;
            }
            let mass = mass + ta[t];
            let weight = weight * ta[t] / (1.0 - mass);
            used.push(t);
            let credit = model.per_branch(used.len()) * weight;
            for &i in used.iter() {
                acc[i] += credit;
            }
            walk(ta, model, used, mass, weight, acc);
            used.pop();
        }
    }
    let mut acc = vec![0.0; ta.len()];
    walk(ta, BranchWinModel { c }, &mut Vec::with_capacity(ta.len()), 0.0, 1.0, &mut acc);
    acc
}

fn npool_unchecked(s: &MultiPoolScenario) -> NPoolRewards {
    let alpha = s.alpha;
    let ta: Vec<f64> = s.taus.iter().map(|t| t * alpha).collect();
    let total = s.total_tau() * alpha;
    let external = s.external();
    let forks = fork_weights(&ta, s.c);
    let pools: Vec<f64> = s
        .betas
        .iter()
        .zip(&forks)
        .map(|(&beta, &fork)| beta / (1.0 - total) + external * fork)
        .collect();
    let attacker = (1.0 - s.total_tau()) * alpha / (1.0 - total)
        + pools
            .iter()
            .zip(ta.iter().zip(&s.betas))
            .map(|(rev, (&t, &beta))| share(t, beta) * rev)
            .sum::<f64>();
    NPoolRewards { attacker, pools }
}

pub fn npool_rewards(s: &MultiPoolScenario) -> Result<NPoolRewards> {
    let s = validate_multi(s)?;
    Ok(npool_unchecked(&s))
}

/// Attacker reward against `n <= 8` pools.
pub fn reward_npool(s: &MultiPoolScenario) -> Result<f64> {
    npool_rewards(s).map(|r| r.attacker)
}

/// Planned infiltration vector evaluated at a different fork win probability.
pub fn fixed_tau_reward_mismatched_c(
    alpha: f64,
    betas: &[f64],
    tau_planned: &[f64],
    c_actual: f64,
) -> Result<f64> {
    reward_npool(&MultiPoolScenario {
        alpha,
        betas: betas.to_vec(),
        taus: tau_planned.to_vec(),
        c: c_actual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationOptions {
    /// Upper bound on the sum of taus.
    pub budget: f64,
    /// Stop when a full sweep gains less than this in reward...
    pub reward_tol: f64,
    /// ...and moves no coordinate by more than this.
    pub step_tol: f64,
    pub max_sweeps: usize,
}

impl Default for AllocationOptions {
    fn default() -> Self {
        AllocationOptions {
            budget: 1.0,
            reward_tol: 1e-8,
            step_tol: 1e-7,
            max_sweeps: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub taus: Vec<f64>,
    pub reward: f64,
    pub rer_pct: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Groups pools whose powers are equal; each group shares one tau.
fn symmetry_groups(betas: &[f64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &b) in betas.iter().enumerate() {
        match groups.iter_mut().find(|g| (betas[g[0]] - b).abs() <= 1e-12) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Maximizes the attacker reward over the infiltration vector.
///
/// Projected coordinate ascent over `{tau_i >= 0, sum tau_i <= budget}`,
/// pools of equal power tied to one shared coordinate, each coordinate
/// solved by grid plus golden section.
pub fn optimize_allocation(
    alpha: f64,
    betas: &[f64],
    c: f64,
    opts: AllocationOptions,
) -> Result<AllocationResult> {
    let n = betas.len();
    let mut s = validate_multi(&MultiPoolScenario {
        alpha,
        betas: betas.to_vec(),
        taus: vec![0.0; n],
        c,
    })?;
    if let Some(b) = betas.iter().find(|&&b| b <= 0.0) {
        return Err(Error::InvalidArgument(format!("pool power {b} must be positive")));
    }
    if !(0.0..=1.0).contains(&opts.budget) {
        return Err(Error::InvalidArgument(format!("budget {} must lie in [0, 1]", opts.budget)));
    }
    let groups = symmetry_groups(betas);
    let mut shared = vec![0.0; groups.len()];
    let apply = |s: &mut MultiPoolScenario, shared: &[f64]| {
        for (g, &t) in groups.iter().zip(shared) {
            for &i in g {
                s.taus[i] = t;
            }
        }
    };

    let mut reward = npool_unchecked(&s).attacker;
    let mut evaluations = 1;
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let before = reward;
        let mut max_step: f64 = 0.0;
        for g in 0..groups.len() {
            let size = groups[g].len() as f64;
            let others: f64 = groups
                .iter()
                .zip(&shared)
                .enumerate()
                .filter(|&(h, _)| h != g)
                .map(|(_, (grp, &t))| grp.len() as f64 * t)
                .sum();
            let cap = ((opts.budget - others) / size).max(0.0);
            let best = grid_golden_max(
                |t| {
                    let mut trial = s.clone();
                    for &i in &groups[g] {
                        trial.taus[i] = t;
                    }
                    npool_unchecked(&trial).attacker
                },
                0.0,
                cap,
                64,
                1e-11,
            );
            evaluations += best.evaluations;
            if best.value > reward {
                max_step = max_step.max((best.x - shared[g]).abs());
                shared[g] = best.x;
                reward = best.value;
                apply(&mut s, &shared);
            }
        }
        if reward - before < opts.reward_tol && max_step < opts.step_tol {
            converged = true;
            break;
        }
    }
    let reward = npool_unchecked(&s).attacker;
    Ok(AllocationResult {
        rer_pct: rer(reward, alpha)?,
        taus: s.taus,
        reward,
        evaluations,
        converged,
    })
}

/// A named power share in the reference distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolShare {
    pub name: String,
    pub power: f64,
    pub open: bool,
}

/// Approximate network power distribution: Unknown 30% (closed pools and
/// solo miners), F2Pool 20%, AntPool 20%, BTCC 10%, BW.com 10%, BitFury 10%.
pub fn reference_network() -> Vec<PoolShare> {
    [
        ("Unknown", 0.3, false),
        ("F2Pool", 0.2, true),
        ("AntPool", 0.2, true),
        ("BTCC", 0.1, true),
        ("BW.com", 0.1, true),
        ("BitFury", 0.1, true),
    ]
    .into_iter()
    .map(|(name, power, open)| PoolShare { name: name.into(), power, open })
    .collect()
}

/// F2Pool attacking the other four open pools of [`reference_network`]:
/// `(alpha, betas)`.
pub fn reference_network_attack() -> (f64, Vec<f64>) {
    let dist = reference_network();
    let attacker = dist.iter().find(|p| p.name == "F2Pool").map(|p| p.power).unwrap_or(0.2);
    let targets = dist
        .iter()
        .filter(|p| p.open && p.name != "F2Pool")
        .map(|p| p.power)
        .collect();
    (attacker, targets)
}

/// Resolves a named preset to `(alpha, betas)`.
pub fn preset(name: &str) -> Option<(f64, Vec<f64>)> {
    match name {
        "table2" => Some(reference_network_attack()),
        "case1" => Some((0.2, vec![0.1, 0.1])),
        "case2" => Some((0.2, vec![0.2, 0.1])),
        "case3" => Some((0.2, vec![0.3, 0.1])),
        _ => None,
    }
}
