//! Monte Carlo runs with analytic comparison.

use std::path::PathBuf;

use clap::Args;
use faw_core::game::{game_payoffs, solve_equilibrium, GameParams};
use faw_core::model::{rer, GameScenario, MultiPoolScenario, SinglePoolScenario};
use faw_core::multi::{npool_rewards, optimize_allocation, AllocationOptions};
use faw_core::scenario_file::{parse_game, parse_multi, parse_single};
use faw_core::sim::{simulate_game, simulate_multi, simulate_single, GameRound, SimConfig, SimOutcome};
use faw_core::single::{optimal_tau, reward_single, victim_reward};

use super::analytic::Pools;
use super::game::GameFlags;
use super::{read_file, to_value};
use crate::args::{List, OrAuto};
use crate::output::Report;
use crate::{row, CmdResult, Failure};

/// Run controls shared by the simulation commands.
#[derive(Debug, Args)]
pub struct RunFlags {
    #[arg(long, default_value_t = 1_000_000)]
    rounds: u64,
    #[arg(long, env = "FAW_SEED", default_value_t = 42)]
    seed: u64,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
}

impl RunFlags {
    fn config(&self) -> SimConfig {
        let workers = self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        SimConfig::new(self.rounds, self.seed).with_workers(workers)
    }
}

/// A simulated actor next to its analytic expectation.
struct Expected {
    honest_power: f64,
    reward: f64,
}

/// One row per actor: actor, honest_power, mean, std_error, rer_pct,
/// rer_se_pct, analytic_mean, analytic_rer_pct, z.
fn report(
    command: &str,
    scenario: serde_json::Value,
    cfg: &SimConfig,
    o: &SimOutcome,
    expected: &[Expected],
) -> CmdResult {
    let mut report = Report::new(command);
    report.set("scenario", scenario);
    report.set("config", to_value(cfg));
    report.set("outcome", to_value(o));
    if o.low_sample {
        log::warn!("only {} rounds, standard errors are unreliable", o.rounds_run);
    }
    for (i, e) in expected.iter().enumerate() {
        let (rer_pct, rer_se) = o.rer_pct(i, e.honest_power)?;
        let se = o.std_error[i];
        report.push(row!(
            "actor" => o.actors[i], "honest_power" => e.honest_power,
            "mean" => o.mean(i), "std_error" => se,
            "rer_pct" => rer_pct, "rer_se_pct" => rer_se,
            "analytic_mean" => e.reward, "analytic_rer_pct" => rer(e.reward, e.honest_power)?,
            "z" => if se > 0.0 { (o.mean(i) - e.reward) / se } else { 0.0 },
        ));
    }
    Ok(report)
}

fn with_external(mut actors: Vec<Expected>, external_power: f64) -> Vec<Expected> {
    let taken: f64 = actors.iter().map(|e| e.reward).sum();
    actors.push(Expected { honest_power: external_power, reward: 1.0 - taken });
    actors
}

#[derive(Debug, Args)]
pub struct SimSingle {
    #[arg(long, conflicts_with_all = ["alpha", "beta", "c", "tau"])]
    scenario: Option<PathBuf>,
    #[arg(long, required_unless_present = "scenario")]
    alpha: Option<f64>,
    #[arg(long, required_unless_present = "scenario")]
    beta: Option<f64>,
    #[arg(long, required_unless_present = "scenario")]
    c: Option<f64>,
    /// Infiltration share, or `auto` for the optimum
    #[arg(long, default_value = "auto")]
    tau: OrAuto<f64>,
    #[command(flatten)]
    run: RunFlags,
}

impl SimSingle {
    pub fn run(&self) -> CmdResult {
        let s = match &self.scenario {
            Some(path) => parse_single(&read_file(path)?)?,
            None => {
                let (alpha, beta, c) = (self.alpha.expect("required"), self.beta.expect("required"), self.c.expect("required"));
                let tau = match self.tau {
                    OrAuto::Value(t) => t,
                    OrAuto::Auto => optimal_tau(alpha, beta, c)?.tau_bar,
                };
                SinglePoolScenario::new(alpha, beta, tau, c)?
            }
        };
        let cfg = self.run.config();
        let o = simulate_single(&s, &cfg)?;
        let keep = if s.beta > 0.0 { s.beta / (s.beta + s.tau * s.alpha) } else { 0.0 };
        let expected = with_external(
            vec![
                Expected { honest_power: s.alpha, reward: reward_single(&s)? },
                Expected { honest_power: s.beta, reward: victim_reward(&s)? * keep },
            ],
            s.external(),
        );
        report("sim-single", to_value(&s), &cfg, &o, &expected)
    }
}

#[derive(Debug, Args)]
pub struct SimMulti {
    #[arg(long, conflicts_with_all = ["alpha", "betas", "preset", "taus", "c"])]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    pools: Pools,
    /// Comma-separated infiltration shares, or `auto` for the optimum
    #[arg(long, default_value = "auto")]
    taus: OrAuto<List>,
    #[arg(long, required_unless_present = "scenario")]
    c: Option<f64>,
    #[command(flatten)]
    run: RunFlags,
}

impl SimMulti {
    pub fn run(&self) -> CmdResult {
        let s = match &self.scenario {
            Some(path) => parse_multi(&read_file(path)?)?,
            None => {
                let (alpha, betas) = self.pools.resolve()?;
                let c = self.c.expect("required");
                let taus = match &self.taus {
                    OrAuto::Value(List(t)) => t.clone(),
                    OrAuto::Auto => optimize_allocation(alpha, &betas, c, AllocationOptions::default())?.taus,
                };
                MultiPoolScenario::new(alpha, betas, taus, c)?
            }
        };
        let cfg = self.run.config();
        let o = simulate_multi(&s, &cfg)?;
        let r = npool_rewards(&s)?;
        let mut actors = vec![Expected { honest_power: s.alpha, reward: r.attacker }];
        for ((&beta, &tau), &revenue) in s.betas.iter().zip(&s.taus).zip(&r.pools) {
            let keep = if beta > 0.0 { beta / (beta + tau * s.alpha) } else { 0.0 };
            actors.push(Expected { honest_power: beta, reward: revenue * keep });
        }
        report("sim-multi", to_value(&s), &cfg, &o, &with_external(actors, s.external()))
    }
}

#[derive(Debug, Args)]
pub struct SimGame {
    #[arg(long, conflicts_with_all = ["alpha1", "alpha2", "c", "c1", "c2", "c1p", "c2p", "f1", "f2", "equilibrium"])]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    game: GameFlags,
    /// Pool 1 infiltration power
    #[arg(long, requires = "f2", conflicts_with = "equilibrium")]
    f1: Option<f64>,
    /// Pool 2 infiltration power
    #[arg(long, requires = "f1")]
    f2: Option<f64>,
    /// Play the equilibrium strategies
    #[arg(long)]
    equilibrium: bool,
    #[command(flatten)]
    run: RunFlags,
}

impl SimGame {
    fn scenario(&self) -> Result<GameScenario, Failure> {
        if let Some(path) = &self.scenario {
            return Ok(parse_game(&read_file(path)?)?);
        }
        let params: GameParams = self.game.resolve()?;
        match (self.f1, self.f2) {
            (Some(f1), Some(f2)) => Ok(params.at(f1, f2)),
            _ if self.equilibrium => {
                let eq = solve_equilibrium(&params, Default::default())?;
                Ok(params.at(eq.f1_star, eq.f2_star))
            }
            _ => Err(Failure::Usage("either --f1 and --f2, or --equilibrium, are required".into())),
        }
    }

    pub fn run(&self) -> CmdResult {
        let g = self.scenario()?;
        let cfg = self.run.config();
        let o = simulate_game(&g, &cfg)?;
        let p = game_payoffs(&g)?;
        let actors = with_external(
            vec![
                Expected { honest_power: g.alpha1, reward: p.member1 },
                Expected { honest_power: g.alpha2, reward: p.member2 },
            ],
            g.external(),
        );
        let mut out = report("sim-game", to_value(&g), &cfg, &o, &actors)?;
        let gross = GameRound::new(&g)?.gross(&o);
        out.set(
            "gross",
            serde_json::json!({
                "r1": {"mean": gross[0].0, "std_error": gross[0].1, "analytic": p.r1},
                "r2": {"mean": gross[1].0, "std_error": gross[1].1, "analytic": p.r2},
            }),
        );
        Ok(out)
    }
}
