//! Fork win probability limits and countermeasure rewards.

use clap::{Args, Subcommand};
use faw_core::bounds::{
    bonus_scheme_reward, c_from_gamma, c_max_single, c_min_rational, detection_resilient_exact,
    detection_resilient_reward, gamma_upper_bound, honeypot_bwh_bound, safe_bonus_threshold,
    selfish_mining_threshold, DetectionReport, HonestPowerDistribution, GAMMA_AS_TAU,
};
use faw_core::model::{rer, SinglePoolScenario};
use faw_core::single::{optimal_tau, reward_bwh, reward_single};

use crate::args::{Axis, List, OrAuto};
use crate::output::Report;
use crate::{row, CmdResult, Failure};

/// Honest power outside the attack.
#[derive(Debug, Args)]
pub struct Distribution {
    /// Comma-separated powers of individually significant honest miners
    #[arg(long, default_value = "")]
    shares: String,
    /// Honest power spread over many negligible miners
    #[arg(long, default_value_t = 0.0)]
    atomized: f64,
}

impl Distribution {
    fn resolve(&self) -> Result<HonestPowerDistribution, Failure> {
        let shares = if self.shares.trim().is_empty() {
            Vec::new()
        } else {
            self.shares.parse::<List>().map_err(|e| Failure::Usage(format!("--shares: {e}")))?.0
        };
        Ok(HonestPowerDistribution::new(shares, self.atomized)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Bounds {
    /// Largest c reachable given the honest power distribution.
    /// Columns: alpha, beta, c_max
    CMax {
        /// Attacker power, or pool 1 power in the two-pool game
        #[arg(long)]
        alpha: f64,
        /// Target pool power, or pool 2 power in the two-pool game
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        dist: Distribution,
    },
    /// c when the victim manager backs the withheld block.
    /// Columns: alpha, beta, c_min
    CMin {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// c from the fraction of outside power mining on the withheld block.
    /// Columns: gamma, alpha, beta, c
    CFromGamma {
        #[arg(long)]
        gamma: Axis,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Smallest power share at which selfish mining pays.
    /// Columns: gamma, threshold
    Selfish {
        #[arg(long)]
        gamma: Axis,
    },
    /// Upper bound on a selfish miner's gamma.
    /// Columns: alpha, gamma_bound
    GammaBound {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        dist: Distribution,
    },
}

impl Bounds {
    pub fn run(&self) -> CmdResult {
        let mut report = Report::new("bounds");
        match self {
            Bounds::CMax { alpha, beta, dist } => {
                let c = c_max_single(*alpha, *beta, &dist.resolve()?)?;
                report.push(row!("alpha" => alpha, "beta" => beta, "c_max" => c));
            }
            Bounds::CMin { alpha, beta } => {
                report.push(row!("alpha" => alpha, "beta" => beta, "c_min" => c_min_rational(*alpha, *beta)));
            }
            Bounds::CFromGamma { gamma, alpha, beta } => {
                for &g in &gamma.0 {
                    let c = c_from_gamma(g, *alpha, *beta)?;
                    report.push(row!("gamma" => g, "alpha" => alpha, "beta" => beta, "c" => c));
                }
            }
            Bounds::Selfish { gamma } => {
                for &g in &gamma.0 {
                    report.push(row!("gamma" => g, "threshold" => selfish_mining_threshold(g)?));
                }
            }
            Bounds::GammaBound { alpha, dist } => {
                let bound = gamma_upper_bound(&dist.resolve()?, *alpha)?;
                report.push(row!("alpha" => alpha, "gamma_bound" => bound));
            }
        }
        Ok(report)
    }
}

/// Attacker scenario for the countermeasure commands.
#[derive(Debug, Args)]
pub struct Attack {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    c: f64,
    /// Infiltration share, or `auto` for the undefended optimum
    #[arg(long, default_value = "auto")]
    tau: OrAuto<f64>,
}

impl Attack {
    fn scenario(&self) -> Result<SinglePoolScenario, Failure> {
        let tau = match self.tau {
            OrAuto::Value(t) => t,
            OrAuto::Auto => optimal_tau(self.alpha, self.beta, self.c)?.tau_bar,
        };
        Ok(SinglePoolScenario::new(self.alpha, self.beta, tau, self.c)?)
    }
}

fn identities(axis: &Axis) -> Result<Vec<u64>, Failure> {
    axis.0
        .iter()
        .map(|&x| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as u64)
            } else {
                Err(Failure::Usage(format!("--identities: `{x}` is not a positive integer")))
            }
        })
        .collect()
}

fn detection_row(alpha: f64, undefended: f64, tau: f64, r: &DetectionReport) -> Result<crate::output::Row, Failure> {
    Ok(row!(
        "identities" => r.identities, "tau" => tau, "d" => r.d, "reward" => r.reward,
        "rer_pct" => rer(r.reward, alpha)?, "undefended_rer_pct" => rer(undefended, alpha)?,
        "floored" => r.floored,
    ))
}

#[derive(Debug, Subcommand)]
pub enum Counter {
    /// Attack spread over several identities, each expelled when caught
    /// with a stale block.
    /// Columns: identities, tau, d, reward, rer_pct, undefended_rer_pct,
    /// floored, exact_reward, exact_rer_pct
    Detection {
        #[command(flatten)]
        attack: Attack,
        /// Identity counts: value, list or start:stop:step
        #[arg(long, default_value = "1")]
        identities: Axis,
    },
    /// Block withholding against honeypot work.
    /// Columns: identities, tau, d, reward, rer_pct, undefended_rer_pct,
    /// floored
    Honeypot {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value = "1")]
        identities: Axis,
    },
    /// Pool pays a bonus fraction t of each block to its finder.
    /// Columns: t, tau, reward, rer_pct
    Bonus {
        #[command(flatten)]
        attack: Attack,
        #[arg(long)]
        t: Axis,
    },
    /// Smallest bonus fraction that makes the attack unprofitable.
    /// Columns: pool_power, c_max, t, feasible
    Threshold {
        /// Pool power including any infiltration
        #[arg(long)]
        pool_power: Axis,
        #[arg(long)]
        c_max: Axis,
    },
}

impl Counter {
    pub fn run(&self) -> CmdResult {
        let mut report = Report::new("counter");
        match self {
            Counter::Detection { attack, identities: ids } => {
                let s = attack.scenario()?;
                let undefended = reward_single(&s)?;
                report.set("note", GAMMA_AS_TAU);
                for l in identities(ids)? {
                    let r = detection_resilient_reward(&s, l)?;
                    let mut row = detection_row(s.alpha, undefended, s.tau, &r)?;
                    let exact = detection_resilient_exact(&s, l)?;
                    row.insert("exact_reward".into(), exact.into());
                    row.insert("exact_rer_pct".into(), rer(exact, s.alpha)?.into());
                    report.push(row);
                }
            }
            Counter::Honeypot { alpha, beta, tau, identities: ids } => {
                let undefended = reward_bwh(*alpha, *beta, *tau)?;
                report.set("note", GAMMA_AS_TAU);
                for l in identities(ids)? {
                    let r = honeypot_bwh_bound(*alpha, *beta, *tau, l)?;
                    report.push(detection_row(*alpha, undefended, *tau, &r)?);
                }
            }
            Counter::Bonus { attack, t } => {
                let s = attack.scenario()?;
                for &t in &t.0 {
                    let r = bonus_scheme_reward(&s, t)?;
                    report.push(row!("t" => t, "tau" => s.tau, "reward" => r, "rer_pct" => rer(r, s.alpha)?));
                }
            }
            Counter::Threshold { pool_power, c_max } => {
                for &p in &pool_power.0 {
                    for &c in &c_max.0 {
                        let t = safe_bonus_threshold(p, c)?;
                        report.push(row!("pool_power" => p, "c_max" => c, "t" => t.value(), "feasible" => t.feasible().is_some()));
                    }
                }
            }
        }
        Ok(report)
    }
}

