//! Closed-form rewards and the infiltration optimizers.

use std::path::PathBuf;

use clap::Args;
use faw_core::model::{rer, MultiPoolScenario, SinglePoolScenario};
use faw_core::multi::{fixed_tau_reward_mismatched_c, npool_rewards, optimize_allocation, preset, AllocationOptions};
use faw_core::scenario_file::{parse_multi, parse_single};
use faw_core::single::{optimal_tau, report_single, TauMethod};

use super::{read_file, to_value};
use crate::args::{Axis, List, TauArg};
use crate::output::Report;
use crate::{row, CmdResult, Failure};

pub const PRESETS: [&str; 4] = ["table2", "case1", "case2", "case3"];

fn method_name(m: TauMethod) -> &'static str {
    match m {
        TauMethod::ClosedForm => "closed_form",
        TauMethod::Numeric => "numeric",
    }
}

/// Columns: alpha, beta, tau, c, tau_method, attacker_reward, rer_pct,
/// pool_reward, pool_rer_pct.
#[derive(Debug, Args)]
pub struct RewardSingle {
    /// Scenario file (flat JSON or a previous output document)
    #[arg(long, conflicts_with_all = ["alpha", "beta", "c", "tau", "optimal_tau"])]
    scenario: Option<PathBuf>,
    /// Attacker power: value, list or start:stop:step
    #[arg(long, required_unless_present = "scenario")]
    alpha: Option<Axis>,
    /// Target pool power
    #[arg(long, required_unless_present = "scenario")]
    beta: Option<Axis>,
    /// Probability the withheld block wins a fork
    #[arg(long, required_unless_present = "scenario")]
    c: Option<Axis>,
    /// Infiltration share of the attacker's power, or `auto`
    #[arg(long, required_unless_present_any = ["scenario", "optimal_tau"])]
    tau: Option<TauArg>,
    /// Same as `--tau auto`
    #[arg(long, conflicts_with = "tau")]
    optimal_tau: bool,
}

fn single_row(s: &SinglePoolScenario, method: &str) -> Result<crate::output::Row, Failure> {
    let r = report_single(s)?;
    Ok(row!(
        "alpha" => s.alpha, "beta" => s.beta, "tau" => s.tau, "c" => s.c,
        "tau_method" => method,
        "attacker_reward" => r.attacker_reward, "rer_pct" => r.attacker_rer_pct,
        "pool_reward" => r.pool_reward, "pool_rer_pct" => r.pool_rer_pct,
    ))
}

impl RewardSingle {
    pub fn run(&self) -> CmdResult {
        let mut report = Report::new("reward-single");
        let mut last = None;
        if let Some(path) = &self.scenario {
            let s = parse_single(&read_file(path)?)?;
            report.push(single_row(&s, "fixed")?);
            last = Some(s);
        } else {
            let tau = if self.optimal_tau { TauArg::Auto } else { self.tau.clone().expect("required by clap") };
            for &alpha in &self.alpha.as_ref().expect("required").0 {
                for &beta in &self.beta.as_ref().expect("required").0 {
                    for &c in &self.c.as_ref().expect("required").0 {
                        let points: Vec<(f64, &str)> = match &tau {
                            TauArg::Auto => {
                                let opt = optimal_tau(alpha, beta, c)?;
                                vec![(opt.tau_bar, method_name(opt.method))]
                            }
                            TauArg::Value(axis) => axis.0.iter().map(|&t| (t, "fixed")).collect(),
                        };
                        for (t, method) in points {
                            let s = SinglePoolScenario::new(alpha, beta, t, c)?;
                            report.push(single_row(&s, method)?);
                            last = Some(s);
                        }
                    }
                }
            }
        }
        if report.rows.len() == 1 {
            report.set("scenario", to_value(&last));
        }
        Ok(report)
    }
}

/// Columns: alpha, beta, c, tau_bar, method, closed_form_tau, numeric_tau,
/// discrepancy, interior, reward, rer_pct.
#[derive(Debug, Args)]
pub struct OptimalTau {
    #[arg(long)]
    alpha: Axis,
    #[arg(long)]
    beta: Axis,
    #[arg(long)]
    c: Axis,
}

impl OptimalTau {
    pub fn run(&self) -> CmdResult {
        let mut report = Report::new("optimal-tau");
        for &alpha in &self.alpha.0 {
            for &beta in &self.beta.0 {
                for &c in &self.c.0 {
                    let o = optimal_tau(alpha, beta, c)?;
                    if o.discrepancy {
                        log::warn!("closed form and numeric optimum disagree at alpha={alpha}, beta={beta}, c={c}");
                    }
                    report.push(row!(
                        "alpha" => alpha, "beta" => beta, "c" => c,
                        "tau_bar" => o.tau_bar, "method" => method_name(o.method),
                        "closed_form_tau" => o.closed_form_tau, "numeric_tau" => o.numeric_tau,
                        "discrepancy" => o.discrepancy, "interior" => o.interior,
                        "reward" => o.reward_at_optimum, "rer_pct" => rer(o.reward_at_optimum, alpha)?,
                    ));
                }
            }
        }
        Ok(report)
    }
}

/// Attacker power and target pools, from flags or a preset.
#[derive(Debug, Args)]
pub struct Pools {
    /// Attacker power
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated target pool powers
    #[arg(long, conflicts_with = "preset")]
    pub betas: Option<List>,
    /// Built-in pool configuration
    #[arg(long, value_parser = PRESETS, conflicts_with = "alpha")]
    pub preset: Option<String>,
}

impl Pools {
    pub fn resolve(&self) -> Result<(f64, Vec<f64>), Failure> {
        match (&self.preset, self.alpha, &self.betas) {
            (Some(name), _, _) => Ok(preset(name).expect("preset names are checked by clap")),
            (None, Some(alpha), Some(betas)) => Ok((alpha, betas.0.clone())),
            _ => Err(Failure::Usage("either --preset or both --alpha and --betas are required".into())),
        }
    }
}

/// Columns: c, taus, attacker_reward, rer_pct, pool_revenues.
#[derive(Debug, Args)]
pub struct RewardMulti {
    #[arg(long, conflicts_with_all = ["alpha", "betas", "preset", "taus", "c"])]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    pools: Pools,
    /// Comma-separated infiltration shares, one per pool
    #[arg(long, required_unless_present = "scenario")]
    taus: Option<List>,
    #[arg(long, required_unless_present = "scenario")]
    c: Option<Axis>,
}

fn multi_row(s: &MultiPoolScenario) -> Result<crate::output::Row, Failure> {
    let r = npool_rewards(s)?;
    Ok(row!(
        "c" => s.c, "taus" => s.taus,
        "attacker_reward" => r.attacker, "rer_pct" => rer(r.attacker, s.alpha)?,
        "pool_revenues" => r.pools,
    ))
}

impl RewardMulti {
    pub fn run(&self) -> CmdResult {
        let mut report = Report::new("reward-multi");
        let scenarios = match &self.scenario {
            Some(path) => vec![parse_multi(&read_file(path)?)?],
            None => {
                let (alpha, betas) = self.pools.resolve()?;
                let taus = self.taus.clone().expect("required by clap").0;
                self.c
                    .as_ref()
                    .expect("required by clap")
                    .0
                    .iter()
                    .map(|&c| MultiPoolScenario::new(alpha, betas.clone(), taus.clone(), c))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        for s in &scenarios {
            report.push(multi_row(s)?);
        }
        if let [s] = scenarios.as_slice() {
            report.set("scenario", to_value(s));
        }
        Ok(report)
    }
}

/// Columns without `--actual-c`: c, taus, reward, rer_pct, evaluations,
/// converged. With it: planned_c, actual_c, taus, planned_rer_pct,
/// actual_rer_pct, bwh_rer_pct, improvement_pct, converged.
#[derive(Debug, Args)]
pub struct OptimizeAlloc {
    #[command(flatten)]
    pools: Pools,
    /// Fork win probability the attacker plans for
    #[arg(long)]
    c: Axis,
    /// Largest total infiltration share
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    /// Evaluate each plan at these fork win probabilities instead
    #[arg(long)]
    actual_c: Option<Axis>,
}

impl OptimizeAlloc {
    pub fn run(&self) -> CmdResult {
        let (alpha, betas) = self.pools.resolve()?;
        let opts = AllocationOptions { budget: self.budget, ..Default::default() };
        let mut report = Report::new("optimize-alloc");
        let mut plans = Vec::new();
        for &c in &self.c.0 {
            let plan = optimize_allocation(alpha, &betas, c, opts)?;
            report.converged &= plan.converged;
            plans.push((c, plan));
        }
        match &self.actual_c {
            None => {
                for (c, p) in &plans {
                    report.push(row!(
                        "c" => c, "taus" => p.taus, "reward" => p.reward, "rer_pct" => p.rer_pct,
                        "evaluations" => p.evaluations, "converged" => p.converged,
                    ));
                }
                if let [(c, p)] = plans.as_slice() {
                    report.set("scenario", to_value(&MultiPoolScenario::new(alpha, betas.clone(), p.taus.clone(), *c)?));
                }
            }
            Some(actual) => {
                let bwh = optimize_allocation(alpha, &betas, 0.0, opts)?;
                report.converged &= bwh.converged;
                for (planned_c, p) in &plans {
                    for &actual_c in &actual.0 {
                        let got = rer(fixed_tau_reward_mismatched_c(alpha, &betas, &p.taus, actual_c)?, alpha)?;
                        report.push(row!(
                            "planned_c" => planned_c, "actual_c" => actual_c, "taus" => p.taus,
                            "planned_rer_pct" => p.rer_pct, "actual_rer_pct" => got,
                            "bwh_rer_pct" => bwh.rer_pct,
                            "improvement_pct" => (got - bwh.rer_pct) / bwh.rer_pct * 100.0,
                            "converged" => p.converged,
                        ));
                    }
                }
            }
        }
        Ok(report)
    }
}
