mod common;

use nmqc_core::classical::classical_bound;
use nmqc_core::protocol::{paper_instance, PAPER_INSTANCES};
use nmqc_core::quantum::{beta_quantum, ghz_state, MeasurementPlan, NoiseSpec, QuantumState};
use nmqc_core::simkit::{
    beta_from_counts, merge_tallies, poisson_resample, run_protocol, run_worker, OutcomeSampler, RunConfig, SettingCounts,
};
use rand::SeedableRng;
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

#[test]
fn identical_config_gives_identical_report() {
    let inst = paper_instance("or3").unwrap();
    let plan = MeasurementPlan::xy(4);
    let noise = NoiseSpec::white_noise(0.9).unwrap();
    let cfg = RunConfig::new(&inst, &plan, noise, 20_000, 42);
    assert_eq!(run_protocol(&cfg).unwrap(), run_protocol(&cfg).unwrap());
    let other = RunConfig::new(&inst, &plan, noise, 20_000, 43);
    assert_ne!(run_protocol(&cfg).unwrap(), run_protocol(&other).unwrap());
}

#[test]
fn worker_shares_merge_to_full_run() {
    let inst = paper_instance("or3_x1x3").unwrap();
    let plan = MeasurementPlan::xy(4);
    let mut cfg = RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 10_001, 7);
    cfg.workers = 3;
    let shares: Vec<_> = (0..3).map(|w| run_worker(&cfg, w).unwrap()).collect();
    assert_eq!(shares.iter().map(|s| s.trials).sum::<u64>(), 10_001);
    let merged = merge_tallies(&cfg, &shares).unwrap();
    assert_eq!(merged, run_protocol(&cfg).unwrap());
    assert_eq!(merged.per_setting.iter().map(|c| c.total()).sum::<u64>(), 10_001);
    for (g, c) in merged.per_setting.iter().enumerate() {
        assert_eq!(c.total(), shares.iter().map(|s| s.per_setting[g].total()).sum::<u64>());
    }
    assert!(run_worker(&cfg, 3).is_err());
}

#[test]
fn sampled_outcomes_match_born_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let draws = 100_000;
    for l in 1..=4 {
        let ghz = ghz_state(l).unwrap();
        for _ in 0..4 {
            let angles = common::random_angles(&mut rng, l);
            let probs = ghz.outcome_distribution(&angles).unwrap();
            let sampler = OutcomeSampler::new(&ghz, &angles).unwrap();
            let mut hist = vec![0u64; probs.len()];
            let mut draw_rng = ChaCha20Rng::seed_from_u64(l as u64);
            for _ in 0..draws {
                hist[sampler.sample(&mut draw_rng)] += 1;
            }
            let tv: f64 = hist
                .iter()
                .zip(&probs)
                .map(|(&h, p)| (h as f64 / draws as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.01, "l = {l}, tv = {tv}");
        }
    }
}

#[test]
fn estimates_are_consistent_with_quantum_value() {
    for name in PAPER_INSTANCES {
        let inst = paper_instance(name).unwrap();
        let plan = MeasurementPlan::xy(4);
        let q = beta_quantum(&inst, &plan, NoiseSpec::Ideal).unwrap();
        let outliers = (0..20)
            .filter(|&seed| {
                let r = run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 100_000, seed)).unwrap();
                (r.beta_hat - q).abs() >= 4.0 * r.se_beta
            })
            .count();
        assert!(outliers <= 1, "{name}: {outliers} outliers");
    }
}

#[test]
fn zero_visibility_is_a_coin_flip() {
    let inst = paper_instance("h3").unwrap();
    let plan = MeasurementPlan::xy(4);
    let r = run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::white_noise(0.0).unwrap(), 100_000, 3)).unwrap();
    assert!((r.p_hat - 0.5).abs() < 3.0 * r.se, "{}", r.p_hat);
}

#[test]
fn or3_success_rate() {
    let inst = paper_instance("or3").unwrap();
    let plan = MeasurementPlan::xy(4);
    let r = run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 100_000, 4)).unwrap();
    assert!((r.p_hat - 0.9).abs() < 3.0 * r.se, "{}", r.p_hat);
    assert_eq!(r.per_setting.iter().map(|c| c.total()).sum::<u64>(), 100_000);
    assert!((beta_from_counts(&r.per_setting) - 0.8).abs() < 0.01);
}

fn scaled(counts: &[SettingCounts], factor: u64) -> Vec<SettingCounts> {
    counts
        .iter()
        .map(|c| SettingCounts {
            even: c.even * factor,
            odd: c.odd * factor,
            ..c.clone()
        })
        .collect()
}

#[test]
fn resampling_deterministic_counts_has_no_spread() {
    let inst = paper_instance("h3").unwrap();
    let plan = MeasurementPlan::xy(4);
    let r = run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 10_000, 5)).unwrap();
    let summary = poisson_resample(&r.per_setting, 100, 0).unwrap();
    assert_eq!(summary.std_dev, 0.0);
    assert!((summary.mean - 1.0).abs() < 1e-12);
}

#[test]
fn resampling_spread_shrinks_like_inverse_root() {
    let inst = paper_instance("or3").unwrap();
    let plan = MeasurementPlan::xy(4);
    let r = run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::white_noise(0.8).unwrap(), 1_000, 6)).unwrap();
    // normalise to ~1e2 and ~1e4 counts per run
    let small: Vec<SettingCounts> = r
        .per_setting
        .iter()
        .map(|c| SettingCounts {
            even: (c.even / 10).max(1),
            odd: (c.odd / 10).max(1),
            ..c.clone()
        })
        .collect();
    let large = scaled(&small, 100);
    let s_small = poisson_resample(&small, 100, 1).unwrap().std_dev;
    let s_large = poisson_resample(&large, 100, 1).unwrap().std_dev;
    assert!(s_small > 0.0 && s_large > 0.0);
    let ratio = s_small / s_large;
    assert!((7.0..14.0).contains(&ratio), "ratio = {ratio}");
}

#[test]
fn significance_grows_like_root_trials() {
    let inst = paper_instance("or3").unwrap();
    let c = classical_bound(&inst).unwrap().bound;
    let plan = MeasurementPlan::xy(4);
    let sigma = |trials| {
        let mut cfg = RunConfig::new(&inst, &plan, NoiseSpec::Ideal, trials, 8);
        cfg.classical = Some(c.clone());
        run_protocol(&cfg).unwrap().sigma_vs_classical.unwrap()
    };
    let (a, b) = (sigma(10_000), sigma(1_000_000));
    let slope = (b / a).ln() / 100f64.ln();
    assert!((0.4..0.6).contains(&slope), "slope = {slope}");
}
