//! Two pools infiltrating each other.

use std::path::PathBuf;

use clap::Args;
use faw_core::game::{
    classify, solve_equilibrium, sweep_regions, sweep_regions_assumed_c, EquilibriumOptions, GameParams,
};
use faw_core::model::game_warnings;
use faw_core::scenario_file::parse_game;

use super::{read_file, to_value};
use crate::args::{Axis, List};
use crate::output::Report;
use crate::{row, CmdResult, Failure};

/// Pool powers and fork win probabilities.
#[derive(Debug, Args)]
pub struct GameFlags {
    /// Pool 1 power
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Pool 2 power
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Shared two-branch fork win probability; three-branch forks use c / 2
    #[arg(long, conflicts_with_all = ["c1", "c2", "c1p", "c2p"])]
    pub c: Option<f64>,
    /// Pool 1 two-branch fork win probability
    #[arg(long, requires = "c2")]
    pub c1: Option<f64>,
    /// Pool 2 two-branch fork win probability
    #[arg(long, requires = "c1")]
    pub c2: Option<f64>,
    /// Pool 1 three-branch fork win probability [default: c1 / 2]
    #[arg(long)]
    pub c1p: Option<f64>,
    /// Pool 2 three-branch fork win probability [default: c2 / 2]
    #[arg(long)]
    pub c2p: Option<f64>,
}

impl GameFlags {
    pub fn resolve(&self) -> Result<GameParams, Failure> {
        let (Some(alpha1), Some(alpha2)) = (self.alpha1, self.alpha2) else {
            return Err(Failure::Usage("--alpha1 and --alpha2 are required without --scenario".into()));
        };
        match (self.c, self.c1, self.c2) {
            (Some(c), _, _) => Ok(GameParams::symmetric(alpha1, alpha2, c)),
            (None, Some(c1), Some(c2)) => Ok(GameParams {
                alpha1,
                alpha2,
                c1,
                c2,
                c1p: self.c1p.unwrap_or(c1 / 2.0),
                c2p: self.c2p.unwrap_or(c2 / 2.0),
            }),
            _ => Err(Failure::Usage("either --c or both --c1 and --c2 are required".into())),
        }
    }
}

/// Solver controls shared by the game commands.
#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Stop when neither strategy moves by more than this
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

/// Columns: f1, f2, r1, r2, member1, member2, rer1_pct, rer2_pct, winner,
/// iterations, converged, max_deviation_gain.
#[derive(Debug, Args)]
pub struct GameSolve {
    /// Scenario file; its f1 and f2 seed the iteration
    #[arg(long, conflicts_with_all = ["alpha1", "alpha2", "c", "c1", "c2", "c1p", "c2p", "start"])]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    game: GameFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Starting strategies `f1,f2`
    #[arg(long)]
    start: Option<List>,
    /// Include every iterate in the output
    #[arg(long)]
    trace: bool,
}

impl GameSolve {
    pub fn run(&self) -> CmdResult {
        let (params, start) = match &self.scenario {
            Some(path) => {
                let g = parse_game(&read_file(path)?)?;
                let params = GameParams { alpha1: g.alpha1, alpha2: g.alpha2, c1: g.c1, c2: g.c2, c1p: g.c1p, c2p: g.c2p };
                (params, (g.f1, g.f2))
            }
            None => {
                let start = match &self.start {
                    None => (0.0, 0.0),
                    Some(List(v)) if v.len() == 2 => (v[0], v[1]),
                    Some(_) => return Err(Failure::Usage("--start takes exactly two values `f1,f2`".into())),
                };
                (self.game.resolve()?, start)
            }
        };
        let opts = EquilibriumOptions { tol: self.solver.tol, max_iter: self.solver.max_iter, start };
        let eq = solve_equilibrium(&params, opts)?;
        let at = params.at(eq.f1_star, eq.f2_star);
        let mut report = Report::new("game-solve");
        report.converged = eq.converged;
        report.set("scenario", to_value(&at));
        report.set("warnings", to_value(&game_warnings(&at)));
        if self.trace {
            report.set("trace", to_value(&eq.trace));
        }
        report.push(row!(
            "f1" => eq.f1_star, "f2" => eq.f2_star, "r1" => eq.r1, "r2" => eq.r2,
            "member1" => eq.member1, "member2" => eq.member2,
            "rer1_pct" => eq.rer1_pct, "rer2_pct" => eq.rer2_pct,
            "winner" => classify(eq.rer1_pct, eq.rer2_pct).to_string(),
            "iterations" => eq.iterations, "converged" => eq.converged,
            "max_deviation_gain" => eq.max_deviation_gain,
        ));
        Ok(report)
    }
}

/// Columns: alpha2, c, f1, f2, rer1_pct, rer2_pct, winner, converged.
/// Rows run over alpha2 within each c.
#[derive(Debug, Args)]
pub struct GameSweep {
    #[arg(long)]
    alpha1: f64,
    /// Pool 2 power axis
    #[arg(long)]
    alpha2: Axis,
    /// Fork win probability axis
    #[arg(long)]
    c: Axis,
    /// Pools plan for c = alpha1 + alpha2 and are paid under the grid's c
    #[arg(long)]
    assumed_c: bool,
    #[command(flatten)]
    solver: SolverFlags,
}

impl GameSweep {
    pub fn run(&self) -> CmdResult {
        let opts = EquilibriumOptions { tol: self.solver.tol, max_iter: self.solver.max_iter, ..Default::default() };
        let sweep = if self.assumed_c { sweep_regions_assumed_c } else { sweep_regions };
        let cells = sweep(self.alpha1, &self.alpha2.0, &self.c.0, opts)?;
        let mut report = Report::new("game-sweep");
        report.set("alpha1", self.alpha1);
        report.set("strategy_basis", if self.assumed_c { "assumed_sum_of_powers" } else { "known_c" });
        for cell in &cells {
            report.converged &= cell.converged;
            report.push(row!(
                "alpha2" => cell.alpha2, "c" => cell.c, "f1" => cell.f1, "f2" => cell.f2,
                "rer1_pct" => cell.rer1_pct, "rer2_pct" => cell.rer2_pct,
                "winner" => cell.winner.to_string(), "converged" => cell.converged,
            ));
        }
        Ok(report)
    }
}
