use approx::assert_abs_diff_eq;

use repeater_core::chain::{run_generation_phase, run_swap_rounds, LinkState};
use repeater_core::purification::{swap_layers, PurificationPlan};
use repeater_core::quantum::{bell_phi_plus, depolarize, fidelity_phi_plus, DensityMatrix4, WernerForm};
use repeater_core::{
    noise_tolerance_search, run_chain, AttemptMode, ChainConfig, PairingMode, PurificationSuccessMode, Representation,
    TimeModel,
};

fn tau_ms(config: &ChainConfig) -> f64 {
    config.segment_length() * 1e3 / config.light_speed * 1e3
}

#[test]
fn direct_link_without_repeaters() {
    let config = ChainConfig::new(45.0, 0, 10.0, 0.9);
    let (links, sync, _) = run_generation_phase::<DensityMatrix4>(&config).unwrap();
    assert_eq!(links.len(), 1);
    // one 45 km segment: p = e^{-4}/2, tau = 0.225 ms
    let expected = 0.225 / ((-4.0f64).exp() / 2.0);
    assert_abs_diff_eq!(sync, expected, epsilon = 1e-9);

    let metrics = run_chain(&config).unwrap();
    assert_eq!(metrics.swap_rounds, 0);
    assert_abs_diff_eq!(metrics.generation_time, expected, epsilon = 1e-9);
    assert_eq!(metrics.cost.layer_costs, vec![1.0]);
}

#[test]
fn expected_mode_links_finish_together() {
    let config = ChainConfig::new(200.0, 6, 10.0, 0.9);
    let (links, sync, attempts) = run_generation_phase::<DensityMatrix4>(&config).unwrap();
    assert_eq!(links.len(), 7);
    let tau = tau_ms(&config);
    let raw = depolarize(&bell_phi_plus(), tau, 10.0).unwrap();
    for link in &links {
        assert_eq!(link.last_touched, sync);
        assert!(link.state.max_abs_diff(&raw) < 1e-15);
    }
    assert_abs_diff_eq!(attempts, 7.0 * 25.351293, epsilon = 1e-4);
}

#[test]
fn sampled_noiseless_links_stay_perfect() {
    let mut config = ChainConfig::new(300.0, 4, f64::INFINITY, 0.9);
    config.attempt_mode = AttemptMode::Sampled;
    config.seed = 99;
    let (links, sync, _) = run_generation_phase::<DensityMatrix4>(&config).unwrap();
    assert!(links.iter().all(|l| fidelity_phi_plus(&l.state) == 1.0));
    assert!(links.iter().all(|l| l.last_touched == sync));
}

#[test]
fn sampled_links_wait_for_the_slowest() {
    let mut config = ChainConfig::new(300.0, 4, 5.0, 0.9);
    config.attempt_mode = AttemptMode::Sampled;
    config.seed = 3;
    let (links, _, _) = run_generation_phase::<WernerForm>(&config).unwrap();
    let fidelities: Vec<f64> = links.iter().map(|l| l.state.fidelity()).collect();
    // the slowest link only saw its herald wait; the others idled longer
    let tau = tau_ms(&config);
    let herald_only = depolarize(&bell_phi_plus(), tau, 5.0).unwrap();
    let best = fidelities.iter().copied().fold(0.0, f64::max);
    assert_abs_diff_eq!(best, fidelity_phi_plus(&herald_only), epsilon = 1e-12);
    assert!(fidelities.iter().any(|&f| f < best));
}

#[test]
fn single_repeater_noiseless() {
    let mut config = ChainConfig::new(45.0, 1, f64::INFINITY, 0.9);
    config.op_latency = 0.0;
    let metrics = run_chain(&config).unwrap();
    assert_eq!(metrics.final_fidelity, 1.0);
    assert_abs_diff_eq!(metrics.generation_time, 1.662538 + 0.1125, epsilon = 1e-6);
    assert!(metrics.feasible);
}

#[test]
fn single_repeater_with_memory_noise() {
    // oracle: omega = e^{-0.1125/10} after the herald, another e^{-0.1125/10}
    // while the swap round runs, then F = (1 + 3 omega_1 omega_2) / 4
    let mut config = ChainConfig::new(45.0, 1, 10.0, 0.9);
    config.op_latency = 0.0;
    let metrics = run_chain(&config).unwrap();
    let omega = (-0.0225f64).exp();
    assert_abs_diff_eq!(
        metrics.final_fidelity,
        (1.0 + 3.0 * omega * omega) / 4.0,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(metrics.final_fidelity, 0.966998, epsilon = 1e-6);
    assert_eq!(metrics.per_layer_trace[0].max_rounds, 0);
}

#[test]
fn links_at_thresholds_need_no_purification() {
    let config = ChainConfig::new(200.0, 6, f64::INFINITY, 0.9);
    let plan = PurificationPlan::new(0.9, 7).unwrap();
    let start = WernerForm::from_fidelity(plan.layer_min_fidelity[0]).unwrap();
    let links: Vec<LinkState<WernerForm>> = (0..7)
        .map(|i| LinkState {
            left_node: i,
            right_node: i + 1,
            state: start,
            last_touched: 0.0,
        })
        .collect();
    let (final_link, metrics) = run_swap_rounds(links, &plan, &config, 0.0).unwrap();
    assert_eq!((final_link.left_node, final_link.right_node), (0, 7));
    assert!(metrics.final_fidelity >= 0.9 - 1e-12);
    assert!(metrics.per_layer_trace.iter().all(|t| t.max_rounds == 0));
    assert_eq!(metrics.cost.chain_product, 56.0);
}

#[test]
fn gapped_links_are_rejected() {
    let config = ChainConfig::new(200.0, 1, f64::INFINITY, 0.9);
    let plan = PurificationPlan::new(0.9, 2).unwrap();
    let state = WernerForm::from_omega(1.0).unwrap();
    let links = vec![
        LinkState {
            left_node: 0,
            right_node: 1,
            state,
            last_touched: 0.0,
        },
        LinkState {
            left_node: 2,
            right_node: 3,
            state,
            last_touched: 0.0,
        },
    ];
    assert!(run_swap_rounds(links, &plan, &config, 0.0).is_err());
}

#[test]
fn long_memory_needs_no_purification() {
    let metrics = run_chain(&ChainConfig::new(200.0, 6, 1000.0, 0.9)).unwrap();
    assert!(metrics.feasible);
    assert!(metrics.final_fidelity >= 0.9);
    assert_eq!(metrics.cost.layer_costs, vec![7.0, 4.0, 2.0, 1.0]);
    assert_eq!(metrics.cost.chain_product, 56.0);
    assert_eq!(metrics.cost.total, 147.0);
}

#[test]
fn short_memory_is_infeasible() {
    let metrics = run_chain(&ChainConfig::new(200.0, 6, 2.0, 0.9)).unwrap();
    assert!(!metrics.feasible);
    assert!(metrics.shortfall.is_some());
    assert!(metrics.cost.chain_product > 56.0);
}

#[test]
fn noiseless_memory_is_perfect() {
    for n_nodes in [0, 1, 6, 13, 40] {
        let metrics = run_chain(&ChainConfig::new(500.0, n_nodes, f64::INFINITY, 0.9)).unwrap();
        assert_eq!(metrics.final_fidelity, 1.0, "n_nodes={n_nodes}");
        assert!(metrics.cost.layer_costs.iter().all(|&c| c >= 1.0));
        assert_eq!(metrics.purification_attempts, 0);
    }
}

#[test]
fn swap_round_count_matches_log_depth() {
    for n_nodes in 0..40 {
        let metrics = run_chain(&ChainConfig::new(100.0, n_nodes, 50.0, 0.8)).unwrap();
        assert_eq!(metrics.swap_rounds, swap_layers(n_nodes + 1), "n_nodes={n_nodes}");
        assert_eq!(metrics.cost.layer_costs.len(), metrics.swap_rounds + 1);
    }
}

#[test]
fn paper_faithful_swap_time_without_purification() {
    for n_nodes in [1, 5, 6, 20] {
        let mut config = ChainConfig::new(200.0, n_nodes, 3.0, 0.9);
        config.purification_enabled = false;
        let metrics = run_chain(&config).unwrap();
        let k = metrics.swap_rounds as f64;
        let round = config.op_latency + tau_ms(&config);
        assert_abs_diff_eq!(metrics.swap_time, k * round, epsilon = 1e-12);
        assert_eq!(metrics.purification_time, 0.0);
        assert_abs_diff_eq!(metrics.generation_time, metrics.sync_time + k * round, epsilon = 1e-9);
    }
}

#[test]
fn purification_time_is_charged_per_round() {
    let config = ChainConfig::new(200.0, 6, 8.0, 0.9);
    let metrics = run_chain(&config).unwrap();
    let round = config.op_latency + tau_ms(&config);
    let rounds: u32 = metrics.per_layer_trace.iter().map(|t| t.max_rounds).sum();
    assert!(rounds > 0);
    assert_abs_diff_eq!(metrics.purification_time, rounds as f64 * round, epsilon = 1e-9);
    assert_abs_diff_eq!(
        metrics.generation_time,
        metrics.sync_time + metrics.purification_time + metrics.swap_time,
        epsilon = 1e-9
    );
}

#[test]
fn distance_aware_rounds_grow_with_span() {
    let mut config = ChainConfig::new(200.0, 7, f64::INFINITY, 0.9);
    config.time_model = TimeModel::DistanceAware;
    let metrics = run_chain(&config).unwrap();
    let tau = tau_ms(&config);
    // spans swapped per round: 2, 4, 8 segments
    let expected = 3.0 * config.op_latency + (2.0 + 4.0 + 8.0) * tau;
    assert_abs_diff_eq!(metrics.swap_time, expected, epsilon = 1e-12);
}

#[test]
fn matrix_and_scalar_agree() {
    for (t_depol, n_nodes) in [(2.0, 6), (5.0, 6), (10.0, 13), (30.0, 3), (4.0, 9)] {
        let mut config = ChainConfig::new(250.0, n_nodes, t_depol, 0.85);
        let matrix = run_chain(&config).unwrap();
        config.representation = Representation::WernerScalar;
        let scalar = run_chain(&config).unwrap();
        assert!((matrix.final_fidelity - scalar.final_fidelity).abs() < 1e-9);
        assert_eq!(matrix.cost.layer_costs, scalar.cost.layer_costs);
    }
}

#[test]
fn runs_are_deterministic() {
    let mut config = ChainConfig::new(300.0, 9, 6.0, 0.9);
    config.attempt_mode = AttemptMode::Sampled;
    config.purification_success_mode = PurificationSuccessMode::Stochastic;
    config.seed = 2024;
    assert_eq!(run_chain(&config).unwrap(), run_chain(&config).unwrap());
    config.seed = 2025;
    let other = run_chain(&config).unwrap();
    config.seed = 2024;
    assert_ne!(run_chain(&config).unwrap().generation_time, other.generation_time);
}

#[test]
fn stochastic_purification_costs_at_least_the_lower_bound() {
    let mut config = ChainConfig::new(200.0, 6, 8.0, 0.9);
    let lower = run_chain(&config).unwrap();
    config.purification_success_mode = PurificationSuccessMode::Stochastic;
    for seed in 0..10 {
        config.seed = seed;
        let run = run_chain(&config).unwrap();
        assert!(run.purification_attempts >= lower.purification_attempts);
        assert!(run.purification_time >= lower.purification_time - 1e-12);
    }
}

#[test]
fn nesting_costs_more_than_pumping() {
    let mut config = ChainConfig::new(200.0, 6, 8.0, 0.9);
    let pumping = run_chain(&config).unwrap();
    config.pairing_mode = PairingMode::Nesting;
    let nesting = run_chain(&config).unwrap();
    assert!(nesting.cost.chain_product > pumping.cost.chain_product);
    assert_eq!(nesting.final_fidelity, pumping.final_fidelity);
}

#[test]
fn boundary_search_examples() {
    let template = ChainConfig::new(200.0, 6, 1.0, 0.9);
    let all_inf = noise_tolerance_search(&template, 0.9, &[f64::INFINITY, f64::INFINITY]).unwrap();
    assert_eq!(all_inf.boundary, Some(f64::INFINITY));
    let tiny = noise_tolerance_search(&template, 0.9, &[0.1, 0.2]).unwrap();
    assert_eq!(tiny.boundary, None);
    assert_eq!(tiny.points.len(), 2);
    assert!(noise_tolerance_search(&template, 0.9, &[5.0, 2.0]).is_err());
    assert!(noise_tolerance_search(&template, 0.9, &[5.0]).is_err());
}

#[test]
fn invalid_config_is_an_error() {
    assert!(run_chain(&ChainConfig::new(200.0, 6, 10.0, 0.2)).is_err());
    assert!(run_chain(&ChainConfig::new(-5.0, 6, 10.0, 0.9)).is_err());
}
