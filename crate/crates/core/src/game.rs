//! Two pools running fork-after-withholding against each other.
//!
//! Pool i sends infiltration power `f_i` into the other pool. Each pool's
//! gross revenue includes its share of the other pool's revenue, so the two
//! revenues are mutually defined and solved as a 2x2 linear system. A pool's
//! loyal members keep `alpha_i / (alpha_i + f_other)` of its gross revenue,
//! the rest going to the opponent's infiltrators; relative extra rewards are
//! measured on that member payoff.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rer, validate_game, GameScenario};
use crate::optimize::grid_golden_max;

const BR_GRID_POINTS: usize = 200;
const BR_TOL: f64 = 1e-9;
const DEVIATION_SCAN_POINTS: usize = 4001;
/// Relative extra rewards this close to zero (in percentage points) are
/// treated as sitting on the borderline.
pub const TIE_PCT: f64 = 1e-4;

/// Game parameters without the strategy pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1p: f64,
    pub c2p: f64,
}

impl GameParams {
    /// Both pools win two-branch forks with `c` and three-branch forks with `c / 2`.
    pub fn symmetric(alpha1: f64, alpha2: f64, c: f64) -> Self {
        GameParams {
            alpha1,
            alpha2,
            c1: c,
            c2: c,
            c1p: c / 2.0,
            c2p: c / 2.0,
        }
    }

    pub fn at(&self, f1: f64, f2: f64) -> GameScenario {
        GameScenario {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            f1,
            f2,
            c1: self.c1,
            c2: self.c2,
            c1p: self.c1p,
            c2p: self.c2p,
        }
    }

    /// Same strategies, different fork win probabilities.
    pub fn with_forks_of(&self, other: &GameParams) -> GameParams {
        GameParams {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            ..*other
        }
    }

    fn alpha(&self, pool: Pool) -> f64 {
        match pool {
            Pool::One => self.alpha1,
            Pool::Two => self.alpha2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pool {
    One,
    Two,
}

impl Pool {
    pub fn other(self) -> Pool {
        match self {
            Pool::One => Pool::Two,
            Pool::Two => Pool::One,
        }
    }
}

/// Revenue each pool collects directly: its own blocks plus blocks won by
/// the opponent's infiltrators inside it.
pub(crate) fn direct_revenue(g: &GameScenario) -> [f64; 2] {
    let GameScenario { alpha1, alpha2, f1, f2, c1, c2, c1p, c2p } = *g;
    let e = 1.0 - alpha1 - alpha2;
    let free = 1.0 - f1 - f2;
    let three = f1 * f2 * (1.0 / (1.0 - f1) + 1.0 / (1.0 - f2)) * e / free;
    [
        (alpha1 - f1) / free + c2 * f2 * e / (1.0 - f2) + c2p * three,
        (alpha2 - f2) / free + c1 * f1 * e / (1.0 - f1) + c1p * three,
    ]
}

/// Fraction of each pool's gross revenue paid to the opponent's infiltrators
/// (index 0: what pool 2 pays pool 1, index 1: what pool 1 pays pool 2).
pub(crate) fn cross_shares(g: &GameScenario) -> [f64; 2] {
    let s = |f: f64, host: f64| if f == 0.0 { 0.0 } else { f / (host + f) };
    [s(g.f1, g.alpha2), s(g.f2, g.alpha1)]
}

/// Keeps the payout loyal members of each pool retain.
pub(crate) fn member_fraction(g: &GameScenario) -> [f64; 2] {
    let keep = |alpha: f64, f_in: f64| if alpha == 0.0 { 0.0 } else { alpha / (alpha + f_in) };
    [keep(g.alpha1, g.f2), keep(g.alpha2, g.f1)]
}

/// Solves `R1 = d1 + s1 R2`, `R2 = d2 + s2 R1` for the gross revenues.
pub(crate) fn solve_gross(direct: [f64; 2], shares: [f64; 2]) -> Result<[f64; 2]> {
    let det = 1.0 - shares[0] * shares[1];
    if det.abs() < 1e-12 {
        return Err(Error::SingularSystem { det });
    }
    Ok([
        (direct[0] + shares[0] * direct[1]) / det,
        (direct[1] + shares[1] * direct[0]) / det,
    ])
}

fn members_unchecked(g: &GameScenario) -> [f64; 2] {
    let gross = solve_gross(direct_revenue(g), cross_shares(g)).unwrap_or([f64::NAN; 2]);
    let keep = member_fraction(g);
    [gross[0] * keep[0], gross[1] * keep[1]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamePayoffs {
    /// Gross pool revenues solved from the mutually recursive system.
    pub r1: f64,
    pub r2: f64,
    /// What each pool's loyal members keep.
    pub member1: f64,
    pub member2: f64,
    pub rer1_pct: f64,
    pub rer2_pct: f64,
}

pub fn game_payoffs(g: &GameScenario) -> Result<GamePayoffs> {
    let g = validate_game(g)?;
    let [r1, r2] = solve_gross(direct_revenue(&g), cross_shares(&g))?;
    let keep = member_fraction(&g);
    let (member1, member2) = (r1 * keep[0], r2 * keep[1]);
    Ok(GamePayoffs {
        r1,
        r2,
        member1,
        member2,
        rer1_pct: rer(member1, g.alpha1)?,
        rer2_pct: rer(member2, g.alpha2)?,
    })
}

fn respond(params: &GameParams, responder: Pool, opponent_f: f64) -> f64 {
    let cap = params.alpha(responder);
    let payoff = |f: f64| {
        let g = match responder {
            Pool::One => params.at(f, opponent_f),
            Pool::Two => params.at(opponent_f, f),
        };
        members_unchecked(&g)[responder as usize]
    };
    grid_golden_max(payoff, 0.0, cap, BR_GRID_POINTS, BR_TOL).x
}

/// The responder's most profitable infiltration power with the opponent's
/// held fixed at its value in `g`.
pub fn best_response(g: &GameScenario, responder: Pool) -> Result<f64> {
    let g = validate_game(g)?;
    let params = GameParams {
        alpha1: g.alpha1,
        alpha2: g.alpha2,
        c1: g.c1,
        c2: g.c2,
        c1p: g.c1p,
        c2p: g.c2p,
    };
    let opponent_f = match responder {
        Pool::One => g.f2,
        Pool::Two => g.f1,
    };
    Ok(respond(&params, responder, opponent_f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub start: (f64, f64),
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            tol: 1e-7,
            max_iter: 10_000,
            start: (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub f1_star: f64,
    pub f2_star: f64,
    pub r1: f64,
    pub r2: f64,
    pub member1: f64,
    pub member2: f64,
    pub rer1_pct: f64,
    pub rer2_pct: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest payoff gain either pool finds by a unilateral grid scan.
    pub max_deviation_gain: f64,
    pub trace: Vec<(f64, f64)>,
}

impl EquilibriumResult {
    pub fn deviation_stable(&self, tol: f64) -> bool {
        self.max_deviation_gain <= 10.0 * tol
    }
}

fn deviation_gain(params: &GameParams, f1: f64, f2: f64) -> f64 {
    let base = members_unchecked(&params.at(f1, f2));
    let mut gain: f64 = 0.0;
    for pool in [Pool::One, Pool::Two] {
        let cap = params.alpha(pool);
        for i in 0..DEVIATION_SCAN_POINTS {
            let f = cap * i as f64 / (DEVIATION_SCAN_POINTS - 1) as f64;
            let g = match pool {
                Pool::One => params.at(f, f2),
                Pool::Two => params.at(f1, f),
            };
            let v = members_unchecked(&g)[pool as usize];
            gain = gain.max(v - base[pool as usize]);
        }
    }
    gain
}

/// Best-response dynamics: pool 1 updates against pool 2's last move, then
/// pool 2 against pool 1's new one, until neither moves by more than `tol`.
pub fn solve_equilibrium(params: &GameParams, opts: EquilibriumOptions) -> Result<EquilibriumResult> {
    let (mut f1, mut f2) = opts.start;
    validate_game(&params.at(f1, f2))?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
    }
    if params.alpha1 <= 0.0 || params.alpha2 <= 0.0 {
        return Err(Error::DegenerateInput("both pools need positive power".into()));
    }
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let n1 = respond(params, Pool::One, f2);
        let n2 = respond(params, Pool::Two, n1);
        let moved = (n1 - f1).abs().max((n2 - f2).abs());
        f1 = n1;
        f2 = n2;
        trace.push((f1, f2));
        if moved < opts.tol {
            converged = true;
            break;
        }
    }
    let payoffs = game_payoffs(&params.at(f1, f2))?;
    Ok(EquilibriumResult {
        f1_star: f1,
        f2_star: f2,
        r1: payoffs.r1,
        r2: payoffs.r2,
        member1: payoffs.member1,
        member2: payoffs.member2,
        rer1_pct: payoffs.rer1_pct,
        rer2_pct: payoffs.rer2_pct,
        iterations,
        converged,
        max_deviation_gain: deviation_gain(params, f1, f2),
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Pool1,
    Pool2,
    BothLose,
    /// Both pools gain, or at least one sits on the borderline.
    BothGainTie,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Pool1 => "pool1",
            Winner::Pool2 => "pool2",
            Winner::BothLose => "both_lose",
            Winner::BothGainTie => "both_gain_tie",
        })
    }
}

/// Winning means earning more than honest mining would.
pub fn classify(rer1_pct: f64, rer2_pct: f64) -> Winner {
    if rer1_pct.abs() < TIE_PCT || rer2_pct.abs() < TIE_PCT {
        return Winner::BothGainTie;
    }
    match (rer1_pct > 0.0, rer2_pct > 0.0) {
        (true, false) => Winner::Pool1,
        (false, true) => Winner::Pool2,
        (false, false) => Winner::BothLose,
        (true, true) => Winner::BothGainTie,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub alpha2: f64,
    pub c: f64,
    pub f1: f64,
    pub f2: f64,
    pub rer1_pct: f64,
    pub rer2_pct: f64,
    pub winner: Winner,
    pub converged: bool,
}

/// How the pools pick their strategies in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyBasis {
    /// Both know the true `c`.
    KnownC,
    /// Both plan for the rational floor `c = alpha1 + alpha2`.
    AssumedSumOfPowers,
}

fn map_cells<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

fn sweep(
    alpha1: f64,
    alpha2_axis: &[f64],
    c_axis: &[f64],
    basis: StrategyBasis,
    opts: EquilibriumOptions,
) -> Result<Vec<RegionCell>> {
    for &a2 in alpha2_axis {
        for &c in c_axis {
            validate_game(&GameParams::symmetric(alpha1, a2, c).at(0.0, 0.0))?;
        }
    }
    let grid: Vec<(f64, f64)> = c_axis
        .iter()
        .flat_map(|&c| alpha2_axis.iter().map(move |&a2| (c, a2)))
        .collect();
    let cell = |&(c, a2): &(f64, f64)| -> Result<RegionCell> {
        let actual = GameParams::symmetric(alpha1, a2, c);
        let planned = match basis {
            StrategyBasis::KnownC => actual,
            StrategyBasis::AssumedSumOfPowers => {
                GameParams::symmetric(alpha1, a2, (alpha1 + a2).min(1.0))
            }
        };
        let eq = solve_equilibrium(&planned, opts)?;
        let p = game_payoffs(&actual.at(eq.f1_star, eq.f2_star))?;
        Ok(RegionCell {
            alpha2: a2,
            c,
            f1: eq.f1_star,
            f2: eq.f2_star,
            rer1_pct: p.rer1_pct,
            rer2_pct: p.rer2_pct,
            winner: classify(p.rer1_pct, p.rer2_pct),
            converged: eq.converged,
        })
    };
    map_cells(&grid, cell).into_iter().collect()
}

/// Equilibrium outcome on an `(alpha2, c)` grid, row-major with `c` outer.
/// Fork win probabilities follow the symmetric model `c`, `c / 2`.
pub fn sweep_regions(
    alpha1: f64,
    alpha2_axis: &[f64],
    c_axis: &[f64],
    opts: EquilibriumOptions,
) -> Result<Vec<RegionCell>> {
    sweep(alpha1, alpha2_axis, c_axis, StrategyBasis::KnownC, opts)
}

/// As [`sweep_regions`], but both pools plan for `c = alpha1 + alpha2` and
/// are paid under the grid's `c`.
pub fn sweep_regions_assumed_c(
    alpha1: f64,
    alpha2_axis: &[f64],
    c_axis: &[f64],
    opts: EquilibriumOptions,
) -> Result<Vec<RegionCell>> {
    sweep(alpha1, alpha2_axis, c_axis, StrategyBasis::AssumedSumOfPowers, opts)
}

pub const REGION_CSV_HEADER: &str = "alpha2,c,f1,f2,rer1_pct,rer2_pct,winner,converged";

pub fn regions_csv(cells: &[RegionCell]) -> String {
    let mut out = String::from(REGION_CSV_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.alpha2, c.c, c.f1, c.f2, c.rer1_pct, c.rer2_pct, c.winner, c.converged
        ));
    }
    out
}
