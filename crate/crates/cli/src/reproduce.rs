//! Built-in reference fixtures. Expected values and tolerances live in the
//! JSON files under `fixtures/`.

use clap::Args;
use faw_core::bounds::{c_max_game, gamma_upper_bound, selfish_mining_threshold, HonestPowerDistribution};
use faw_core::game::{sweep_regions, EquilibriumOptions, RegionCell, Winner, TIE_PCT};
use faw_core::model::rer;
use faw_core::multi::{fixed_tau_reward_mismatched_c, optimize_allocation, preset, AllocationOptions};
use faw_core::single::optimal_tau;
use serde::Deserialize;
use serde_json::Value;

use crate::args::range;
use crate::output::Report;
use crate::{row, CmdResult, Failure};

const FIXTURES: [(&str, &str); 6] = [
    ("table1", include_str!("../fixtures/table1.json")),
    ("case4", include_str!("../fixtures/case4.json")),
    ("changing-c", include_str!("../fixtures/changing-c.json")),
    ("borderline-c1", include_str!("../fixtures/borderline-c1.json")),
    ("cmax-0914", include_str!("../fixtures/cmax-0914.json")),
    ("selfish-009", include_str!("../fixtures/selfish-009.json")),
];

#[derive(Debug, Deserialize)]
struct Fixture {
    fixture: String,
    description: String,
    checks: Vec<Check>,
}

#[derive(Debug, Deserialize)]
struct Check {
    id: String,
    kind: String,
    params: Value,
    expected: f64,
    tolerance: f64,
}

/// Columns: fixture, check, value, expected, tolerance, deviation, pass.
#[derive(Debug, Args)]
pub struct Reproduce {
    /// Fixture name, or `all`
    #[arg(value_parser = ["table1", "case4", "changing-c", "borderline-c1", "cmax-0914", "selfish-009", "all"])]
    fixture: String,
}

fn bad(check: &Check, what: &str) -> Failure {
    Failure::Io(format!("fixture check `{}`: {what}", check.id))
}

fn num(check: &Check, key: &str) -> Result<f64, Failure> {
    check.params[key].as_f64().ok_or_else(|| bad(check, &format!("numeric parameter `{key}` missing")))
}

fn pools(check: &Check) -> Result<(f64, Vec<f64>), Failure> {
    let name = check.params["preset"].as_str().ok_or_else(|| bad(check, "parameter `preset` missing"))?;
    preset(name).ok_or_else(|| bad(check, &format!("unknown preset `{name}`")))
}

fn distribution(check: &Check) -> Result<HonestPowerDistribution, Failure> {
    let shares = check.params["shares"]
        .as_array()
        .ok_or_else(|| bad(check, "parameter `shares` missing"))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| bad(check, "`shares` must hold numbers")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HonestPowerDistribution::new(shares, num(check, "atomized")?)?)
}

fn alloc_rer(check: &Check, c: f64) -> Result<(f64, Vec<f64>), Failure> {
    let (alpha, betas) = pools(check)?;
    let r = optimize_allocation(alpha, &betas, c, AllocationOptions::default())?;
    Ok((r.rer_pct, r.taus))
}

fn mismatched_rer(check: &Check) -> Result<f64, Failure> {
    let (alpha, betas) = pools(check)?;
    let (_, planned) = alloc_rer(check, num(check, "planned_c")?)?;
    let reward = fixed_tau_reward_mismatched_c(alpha, &betas, &planned, num(check, "actual_c")?)?;
    Ok(rer(reward, alpha)?)
}

fn game_line(check: &Check) -> Result<Vec<RegionCell>, Failure> {
    let axis = range(num(check, "start")?, num(check, "stop")?, num(check, "step")?).map_err(|e| bad(check, &e))?;
    let cells = sweep_regions(num(check, "alpha1")?, &axis, &[num(check, "c")?], EquilibriumOptions::default())?;
    Ok(cells)
}

fn evaluate(check: &Check) -> Result<f64, Failure> {
    match check.kind.as_str() {
        "single_rer" => {
            let alpha = num(check, "alpha")?;
            let o = optimal_tau(alpha, num(check, "beta")?, num(check, "c")?)?;
            Ok(rer(o.reward_at_optimum, alpha)?)
        }
        "alloc_rer" => Ok(alloc_rer(check, num(check, "c")?)?.0),
        "alloc_improvement" => {
            let (base, _) = alloc_rer(check, num(check, "baseline_c")?)?;
            let (got, _) = alloc_rer(check, num(check, "c")?)?;
            Ok((got - base) / base * 100.0)
        }
        "mismatched_rer" => mismatched_rer(check),
        "mismatched_improvement" => {
            let (base, _) = alloc_rer(check, num(check, "planned_c")?)?;
            Ok((mismatched_rer(check)? - base) / base * 100.0)
        }
        "game_sign_change" => {
            let cells = game_line(check)?;
            let flip = cells
                .windows(2)
                .find(|w| (w[0].rer1_pct > 0.0) != (w[1].rer1_pct > 0.0))
                .map(|w| 0.5 * (w[0].alpha2 + w[1].alpha2));
            Ok(flip.unwrap_or(f64::NAN))
        }
        "game_misclassified" => {
            let alpha1 = num(check, "alpha1")?;
            let wrong = game_line(check)?
                .iter()
                .filter(|cell| {
                    let expected = if (cell.alpha2 - alpha1).abs() < TIE_PCT {
                        Winner::BothGainTie
                    } else if cell.alpha2 > alpha1 {
                        Winner::Pool2
                    } else {
                        Winner::Pool1
                    };
                    cell.winner != expected || !cell.converged
                })
                .count();
            Ok(wrong as f64)
        }
        "c_max" => Ok(c_max_game(num(check, "alpha")?, num(check, "beta")?, &distribution(check)?)?),
        "gamma_bound" => Ok(gamma_upper_bound(&distribution(check)?, num(check, "alpha")?)?),
        "selfish_threshold" => Ok(selfish_mining_threshold(num(check, "gamma")?)?),
        other => Err(bad(check, &format!("unknown kind `{other}`"))),
    }
}

impl Reproduce {
    pub fn run(&self) -> CmdResult {
        let mut report = Report::new("reproduce");
        let mut described = serde_json::Map::new();
        for (name, text) in FIXTURES {
            if self.fixture != "all" && self.fixture != name {
                continue;
            }
            let fixture: Fixture =
                serde_json::from_str(text).map_err(|e| Failure::Io(format!("fixture {name}: {e}")))?;
            described.insert(fixture.fixture.clone(), fixture.description.clone().into());
            for check in &fixture.checks {
                let value = evaluate(check)?;
                let deviation = (value - check.expected).abs();
                let pass = deviation <= check.tolerance;
                report.passed &= pass;
                report.push(row!(
                    "fixture" => fixture.fixture, "check" => check.id, "value" => value,
                    "expected" => check.expected, "tolerance" => check.tolerance,
                    "deviation" => deviation, "pass" => pass,
                ));
            }
        }
        report.set("fixtures", Value::Object(described));
        report.set("passed", report.passed);
        Ok(report)
    }
}
