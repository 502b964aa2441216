mod support;

use cascade_lens::cascade::{detect_cascades, TriggerParams};
use cascade_lens::model::{build_commit_history, top_fraction_developers};
use cascade_lens::synth::{generate_cascade_network, generate_random_network, planted_recall, SynthConfig};
use cascade_lens::validate::{permutation_test, shuffle_coedit_timestamps, PermutationConfig, PermutationResult};
use cascade_lens::EventLog;

fn run(log: &EventLog, base_seed: u64) -> PermutationResult {
    let history = build_commit_history(log);
    let top = top_fraction_developers(&history, 0.2).unwrap();
    let cfg = PermutationConfig {
        base_seed,
        ..Default::default()
    };
    permutation_test(log, &top.members, &cfg).unwrap()
}

fn config(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        ..Default::default()
    }
}

#[test]
fn planted_cascades_are_significant_and_recovered() {
    for seed in 1..=5 {
        let net = generate_cascade_network(&config(seed)).unwrap();
        let res = run(&net.log, 1000 + seed);
        assert!(res.p_value <= 0.05, "seed {seed}: p = {}", res.p_value);
        assert!(res.cohens_d >= 3.0, "seed {seed}: d = {}", res.cohens_d);

        let history = build_commit_history(&net.log);
        let top = top_fraction_developers(&history, 0.2).unwrap();
        let chains = detect_cascades(&history, net.log.coedits(), &top.members, TriggerParams::default());
        let recall = planted_recall(&net.truth, &chains);
        assert!(recall >= 0.95, "seed {seed}: recall {recall}");
        assert_eq!(net.truth.skipped_chains, 0);
    }
}

#[test]
fn random_networks_are_not_significant() {
    let mut p: Vec<f64> = (1..=20)
        .map(|seed| run(&generate_random_network(&config(seed)).unwrap().log, 1000 + seed).p_value)
        .collect();
    let above = p.iter().filter(|&&x| x > 0.1).count();
    assert!(above >= 18, "only {above}/20 runs with p > 0.1: {p:?}");
    p.sort_by(f64::total_cmp);
    let median = (p[9] + p[10]) / 2.0;
    assert!(median > 0.3, "median p {median}");
}

/// Observed data drawn from the null itself: p should not fall at or below
/// 0.05 much more often than 5% of the time.
#[test]
fn p_values_are_calibrated_on_shuffled_data() {
    let base = SynthConfig {
        commits_per_dev: 100,
        n_random_coedits: 2000,
        seed: 99,
        ..Default::default()
    };
    let net = generate_random_network(&base).unwrap();
    let runs = 200;
    let hits = (0..runs)
        .filter(|&i| {
            let log = net.log.with_coedits(shuffle_coedit_timestamps(net.log.coedits(), 50_000 + i));
            run(&log, 7_000_000 + 1000 * i).p_value <= 0.05
        })
        .count();
    let frac = hits as f64 / runs as f64;
    assert!((0.01..=0.12).contains(&frac), "fraction {frac}");
}

#[test]
fn permutation_result_does_not_depend_on_thread_count() {
    let net = generate_cascade_network(&config(3)).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let a = one.install(|| run(&net.log, 17));
    let b = many.install(|| run(&net.log, 17));
    assert_eq!(a, b);
}
