use faw_core::bounds::detection_resilient_exact;
use faw_core::game::{game_payoffs, solve_equilibrium, GameParams};
use faw_core::model::{MultiPoolScenario, SinglePoolScenario};
use faw_core::multi::{optimize_allocation, preset, reward_npool, AllocationOptions};
use faw_core::sim::{
    self, simulate_detection, simulate_game, simulate_multi, simulate_single, GameRound, SimConfig,
    SimOutcome,
};
use faw_core::single::{optimal_tau, reward_single, victim_reward};

fn within(name: &str, simulated: f64, se: f64, expected: f64, sigmas: f64) {
    assert!(
        (simulated - expected).abs() <= sigmas * se,
        "{name}: simulated {simulated} vs expected {expected} (se {se})"
    );
}

fn conserved(o: &SimOutcome) {
    let total: f64 = o.reward_sums.iter().sum();
    assert!((total - o.rounds_run as f64).abs() < 1e-6 * o.rounds_run as f64);
    assert_eq!(o.case_counts.total(), o.rounds_run);
}

#[test]
fn honest_mining_earns_power() {
    let s = SinglePoolScenario::new(0.2, 0.2, 0.0, 0.7).unwrap();
    let o = simulate_single(&s, &SimConfig::new(1_000_000, 1)).unwrap();
    within("attacker", o.mean(sim::single::ATTACKER), o.std_error[0], 0.2, 3.0);
    assert_eq!(o.forks.forks, 0);
    conserved(&o);
}

#[test]
fn single_pool_matches_closed_form() {
    for (c, seed) in [(0.0, 2), (1.0, 3), (0.5, 4)] {
        let tau = optimal_tau(0.2, 0.2, c).unwrap().tau_bar;
        let s = SinglePoolScenario::new(0.2, 0.2, tau, c).unwrap();
        let o = simulate_single(&s, &SimConfig::new(4_000_000, seed).with_workers(4)).unwrap();
        within("attacker", o.mean(0), o.std_error[0], reward_single(&s).unwrap(), 3.0);
        // Pool miners keep beta / (beta + tau alpha) of the pool's revenue.
        let keep = 0.2 / (0.2 + tau * 0.2);
        within("pool", o.mean(1), o.std_error[1], victim_reward(&s).unwrap() * keep, 3.0);
        conserved(&o);
    }
}

#[test]
fn outcome_does_not_depend_on_workers() {
    let s = SinglePoolScenario::new(0.25, 0.15, 0.3, 0.6).unwrap();
    let cfg = SimConfig::new(300_001, 99);
    let one = simulate_single(&s, &cfg).unwrap();
    for workers in [2, 3, 8] {
        let many = simulate_single(&s, &cfg.with_workers(workers)).unwrap();
        assert_eq!(one.reward_sums, many.reward_sums);
        assert_eq!(one.reward_sq_sums, many.reward_sq_sums);
        assert_eq!(one.case_counts, many.case_counts);
        assert_eq!(one.forks, many.forks);
    }
    let again = simulate_single(&s, &cfg).unwrap();
    assert_eq!(one, again);
    let other = simulate_single(&s, &SimConfig::new(300_001, 100)).unwrap();
    assert_ne!(one.reward_sums, other.reward_sums);
}

#[test]
fn one_pool_multi_run_is_the_single_run() {
    let s = SinglePoolScenario::new(0.2, 0.2, 0.4, 0.8).unwrap();
    let m = MultiPoolScenario::new(0.2, vec![0.2], vec![0.4], 0.8).unwrap();
    let cfg = SimConfig::new(200_000, 5);
    let a = simulate_single(&s, &cfg).unwrap();
    let b = simulate_multi(&m, &cfg).unwrap();
    assert_eq!(a.case_counts, b.case_counts);
    for i in 0..3 {
        assert!((a.mean(i) - b.mean(i)).abs() < 1e-12);
    }
}

#[test]
fn two_equal_pools_match_analytic_across_c() {
    let (alpha, betas) = preset("case1").unwrap();
    for (i, c) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        let opt = optimize_allocation(alpha, &betas, c, AllocationOptions::default()).unwrap();
        let s = MultiPoolScenario::new(alpha, betas.clone(), opt.taus.clone(), c).unwrap();
        let o = simulate_multi(&s, &SimConfig::new(4_000_000, 10 + i as u64).with_workers(4)).unwrap();
        within("attacker", o.mean(0), o.std_error[0], opt.reward, 3.0);
        conserved(&o);
        if c > 0.0 {
            assert!(o.case_counts.d > 0, "two withheld blocks should meet sometimes");
        }
    }
}

#[test]
fn four_pool_preset_matches_analytic() {
    let (alpha, betas) = preset("table2").unwrap();
    let opt = optimize_allocation(alpha, &betas, 1.0, AllocationOptions::default()).unwrap();
    let s = MultiPoolScenario::new(alpha, betas, opt.taus, 1.0).unwrap();
    let o = simulate_multi(&s, &SimConfig::new(4_000_000, 21).with_workers(4)).unwrap();
    within("attacker", o.mean(0), o.std_error[0], reward_npool(&s).unwrap(), 3.0);
    let (rer, se) = o.rer_pct(0, alpha).unwrap();
    within("rer", rer, se, 4.63, 3.0 + 0.005 / se);
}

#[test]
fn game_without_infiltration_pays_powers() {
    let g = GameParams::symmetric(0.2, 0.1, 0.5).at(0.0, 0.0);
    let o = simulate_game(&g, &SimConfig::new(1_000_000, 30)).unwrap();
    within("pool1", o.mean(0), o.std_error[0], 0.2, 3.0);
    within("pool2", o.mean(1), o.std_error[1], 0.1, 3.0);
    conserved(&o);
}

#[test]
fn game_equilibrium_matches_payoffs() {
    let params = GameParams::symmetric(0.25, 0.15, 0.8);
    let eq = solve_equilibrium(&params, Default::default()).unwrap();
    let g = params.at(eq.f1_star, eq.f2_star);
    let cfg = SimConfig::new(4_000_000, 31).with_workers(4);
    let o = simulate_game(&g, &cfg).unwrap();
    conserved(&o);
    within("member1", o.mean(0), o.std_error[0], eq.member1, 3.0);
    within("member2", o.mean(1), o.std_error[1], eq.member2, 3.0);
    let gross = GameRound::new(&g).unwrap().gross(&o);
    let p = game_payoffs(&g).unwrap();
    within("r1", gross[0].0, gross[0].1, p.r1, 3.0);
    within("r2", gross[1].0, gross[1].1, p.r2, 3.0);
    assert!(o.case_counts.d > 0);
}

#[test]
fn symmetric_game_pays_both_alike() {
    let g = GameParams::symmetric(0.2, 0.2, 0.6).at(0.05, 0.05);
    let o = simulate_game(&g, &SimConfig::new(2_000_000, 32).with_workers(2)).unwrap();
    let combined = (o.std_error[0].powi(2) + o.std_error[1].powi(2)).sqrt();
    assert!((o.mean(0) - o.mean(1)).abs() < 3.0 * combined);
}

#[test]
fn expelled_identities_match_the_exact_expectation() {
    let tau = optimal_tau(0.2, 0.2, 0.5).unwrap().tau_bar;
    let s = SinglePoolScenario::new(0.2, 0.2, tau, 0.5).unwrap();
    for (l, seed) in [(1, 40), (3, 41), (10, 42)] {
        let o = simulate_detection(&s, l, &SimConfig::new(4_000_000, seed).with_workers(4)).unwrap();
        let exact = detection_resilient_exact(&s, l).unwrap();
        // Rounds are weakly correlated through the expulsion count.
        within("attacker", o.mean(0), o.std_error[0], exact, 4.0);
        conserved(&o);
    }
}

#[test]
fn standard_error_shrinks_with_root_rounds() {
    let s = SinglePoolScenario::new(0.2, 0.2, 0.3, 0.5).unwrap();
    let se = |rounds| simulate_single(&s, &SimConfig::new(rounds, 50)).unwrap().std_error[0];
    let (a, b, c) = (se(10_000), se(100_000), se(1_000_000));
    let slope1 = (b / a).log10();
    let slope2 = (c / b).log10();
    assert!((slope1 + 0.5).abs() < 0.05, "{slope1}");
    assert!((slope2 + 0.5).abs() < 0.05, "{slope2}");
}

#[test]
fn outcome_export() {
    let s = SinglePoolScenario::new(0.2, 0.2, 0.3, 0.5).unwrap();
    let cfg = SimConfig::new(50, 7);
    let o = simulate_single(&s, &cfg).unwrap();
    assert!(o.low_sample);
    let doc: serde_json::Value = serde_json::from_str(&o.to_json(&s, &cfg).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["scenario"]["alpha"], 0.2);
    assert_eq!(doc["config"]["seed"], 7);
    assert_eq!(doc["outcome"]["rng"]["seed"], 7);
    assert!(doc["outcome"]["case_counts"]["A_innocent_win"].is_u64());
    assert_eq!(o.csv_header().split(',').count(), o.csv_row().split(',').count());
}

#[test]
fn zero_rounds_rejected() {
    let s = SinglePoolScenario::new(0.2, 0.2, 0.3, 0.5).unwrap();
    assert!(simulate_single(&s, &SimConfig::new(0, 1)).is_err());
    assert!(simulate_single(&s, &SimConfig::new(10, 1).with_workers(0)).is_err());
}
