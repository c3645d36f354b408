//! Browser bindings. Each export returns a JSON string for the demo page.

use faw_core::game::{sweep_regions, EquilibriumOptions};
use faw_core::model::{rer, SinglePoolScenario};
use faw_core::multi::{optimize_allocation, preset, AllocationOptions};
use faw_core::single::{optimal_tau, reward_single};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn axis(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Attacker RER (%) against one pool as the infiltration share varies,
/// with the optimum marked.
#[wasm_bindgen]
pub fn single_rer_curve(alpha: f64, beta: f64, c: f64, points: usize) -> Result<String, JsError> {
    let taus = axis(0.0, 1.0, points);
    let rers = taus
        .iter()
        .map(|&t| {
            let s = SinglePoolScenario::new(alpha, beta, t, c)?;
            rer(reward_single(&s)?, alpha)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail)?;
    let opt = optimal_tau(alpha, beta, c).map_err(fail)?;
    let best = rer(opt.reward_at_optimum, alpha).map_err(fail)?;
    Ok(json!({ "tau": taus, "rer_pct": rers, "optimum": { "tau": opt.tau_bar, "rer_pct": best } }).to_string())
}

/// Optimal multi-pool RER (%) across fork win probabilities for a preset,
/// next to the block-withholding baseline at `c = 0`.
#[wasm_bindgen]
pub fn multi_rer_vs_c(preset_name: &str, points: usize) -> Result<String, JsError> {
    let (alpha, betas) = preset(preset_name).ok_or_else(|| fail(format!("unknown preset `{preset_name}`")))?;
    let cs = axis(0.0, 1.0, points);
    let mut rers = Vec::with_capacity(cs.len());
    let mut taus = Vec::with_capacity(cs.len());
    for &c in &cs {
        let r = optimize_allocation(alpha, &betas, c, AllocationOptions::default()).map_err(fail)?;
        rers.push(r.rer_pct);
        taus.push(r.taus);
    }
    Ok(json!({ "alpha": alpha, "betas": betas, "c": cs, "rer_pct": rers, "taus": taus, "bwh_rer_pct": rers[0] }).to_string())
}

/// Equilibrium winner on an evenly spaced `(alpha2, c)` grid.
#[wasm_bindgen]
pub fn game_regions(alpha1: f64, alpha2_points: usize, c_points: usize) -> Result<String, JsError> {
    let hi = (1.0 - alpha1).min(0.5) - 1e-3;
    let a2 = axis(0.01, hi, alpha2_points);
    let cs = axis(0.0, 1.0, c_points);
    let cells = sweep_regions(alpha1, &a2, &cs, EquilibriumOptions::default()).map_err(fail)?;
    let winners: Vec<String> = cells.iter().map(|c| c.winner.to_string()).collect();
    Ok(json!({ "alpha2": a2, "c": cs, "winner": winners }).to_string())
}
