mod common;

use collapse_core::discrimination::{optimal_known_psi, reliability_advantage, reliability_known_psi, Effect};
use collapse_core::linalg::ComplexMatrix;
use collapse_core::model::{CollapseBasis, CollapseScenario, CollapseStructure};
use collapse_core::montecarlo::{
    conjecture_bound, conjecture_scan, estimate_lambda, sample_effect, simulate_reliability, EffectStrategy, ScanConfig,
};
use collapse_core::{RngStream, StateVector};
use common::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let psi = StateVector::from_weights(&[0.2, 0.3, 0.5]).unwrap();
    let scen = CollapseScenario::basis(0.4, CollapseBasis::standard(3)).unwrap();
    let e = optimal_known_psi(&psi, 0.4, &CollapseBasis::standard(3)).unwrap().e_opt;
    let stream = RngStream::new(123);
    let a = in_pool(1, || simulate_reliability(&psi, &scen, &e, 50_000, &stream).unwrap());
    let b = in_pool(4, || simulate_reliability(&psi, &scen, &e, 50_000, &stream).unwrap());
    assert_eq!(a, b);
    let la = in_pool(1, || estimate_lambda(&e, 0.3, 30_000, &stream).unwrap());
    let lb = in_pool(4, || estimate_lambda(&e, 0.3, 30_000, &stream).unwrap());
    assert_eq!(la, lb);
    let cfg = ScanConfig {
        dim: 3,
        p_grid: vec![0.2, 0.6],
        strategy: EffectStrategy::Mixed,
        n_effects: 6,
        n_samples: 5000,
    };
    let sa = in_pool(1, || conjecture_scan(&cfg, &stream).unwrap());
    let sb = in_pool(4, || conjecture_scan(&cfg, &stream).unwrap());
    assert_eq!(sa, sb);
}

#[test]
fn blind_guess_simulation() {
    let psi = StateVector::from_weights(&[0.3, 0.7]).unwrap();
    for p in [0.3, 0.7] {
        let scen = CollapseScenario::basis(p, CollapseBasis::standard(2)).unwrap();
        let r = simulate_reliability(&psi, &scen, &Effect::blind_guess(2, p), 100_000, &RngStream::new(5)).unwrap();
        assert!((r.analytic - p.max(1.0 - p)).abs() < 1e-12);
        assert!(r.z_score.abs() < 4.0);
    }
}

#[test]
fn uniform_state_complement_simulation() {
    let psi = StateVector::uniform(4);
    let scen = CollapseScenario::basis(0.4, CollapseBasis::standard(4)).unwrap();
    let e = Effect::complement_of(psi.amplitudes()).unwrap();
    let r = simulate_reliability(&psi, &scen, &e, 100_000, &RngStream::new(6)).unwrap();
    assert!((r.analytic - 0.9).abs() < 1e-12);
    assert!(r.z_score.abs() < 4.0);
    assert_eq!(r.estimate, r.successes as f64 / r.trials as f64);
}

#[test]
fn z_scores_are_small_in_almost_all_runs() {
    let psi = StateVector::from_weights(&[0.15, 0.35, 0.5]).unwrap();
    let scen = CollapseScenario::basis(0.3, CollapseBasis::standard(3)).unwrap();
    let e = optimal_known_psi(&psi, 0.3, &CollapseBasis::standard(3)).unwrap().e_opt;
    let good = (0..30)
        .filter(|&seed| {
            let r = simulate_reliability(&psi, &scen, &e, 100_000, &RngStream::new(seed)).unwrap();
            assert!(r.analytic > 0.05 && r.analytic < 0.95);
            r.z_score.abs() < 4.0
        })
        .count();
    assert!(good >= 29, "{good} of 30 runs within 4σ");
}

#[test]
fn std_error_matches_spread_across_seeds() {
    let mut r = rng(8);
    let e = sample_effect(3, EffectStrategy::Complement, 1, &mut r);
    let ests: Vec<_> = (0..30)
        .map(|seed| estimate_lambda(&e, 0.3, 20_000, &RngStream::new(1000 + seed)).unwrap())
        .collect();
    let mean = ests.iter().map(|x| x.fraction).sum::<f64>() / 30.0;
    let spread = (ests.iter().map(|x| (x.fraction - mean).powi(2)).sum::<f64>() / 29.0).sqrt();
    let predicted = ests.iter().map(|x| x.std_error).sum::<f64>() / 30.0;
    assert!(mean > 0.0);
    assert!(
        spread < 2.0 * predicted && spread > 0.5 * predicted,
        "spread {spread} vs {predicted}"
    );
    for est in &ests {
        let expected = (est.fraction * (1.0 - est.fraction) / est.n_samples as f64).sqrt();
        assert_eq!(est.std_error, expected);
    }
}

#[test]
fn scenario_simulations_match_analytic_values() {
    let mut r = rng(17);
    let p1 = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0]);
    let p2 = ComplexMatrix::from_real_diagonal(&[0.0, 0.0, 1.0]);
    let scen = CollapseScenario::new(0.5, CollapseStructure::Subspaces(vec![p1, p2])).unwrap();
    let psi = random_state(3, &mut r);
    let e = sample_effect(3, EffectStrategy::Spectral, 0, &mut r);
    let sim = simulate_reliability(&psi, &scen, &e, 100_000, &RngStream::new(3)).unwrap();
    assert!(sim.z_score.abs() < 4.0);

    let bs = CollapseBasis::standard(2);
    let scen = CollapseScenario::new(0.4, CollapseStructure::FactorSBasis { dim_t: 2, basis_s: bs }).unwrap();
    let psi = random_state(4, &mut r);
    let e = sample_effect(2, EffectStrategy::Spectral, 0, &mut r);
    let sim = simulate_reliability(&psi, &scen, &e, 100_000, &RngStream::new(4)).unwrap();
    assert!(sim.z_score.abs() < 4.0);
}

#[test]
fn analytic_value_is_the_known_state_reliability() {
    let mut r = rng(18);
    let b = CollapseBasis::standard(3);
    let psi = random_state(3, &mut r);
    let e = sample_effect(3, EffectStrategy::Spectral, 0, &mut r);
    let scen = CollapseScenario::basis(0.6, b.clone()).unwrap();
    let sim = simulate_reliability(&psi, &scen, &e, 10, &RngStream::new(0)).unwrap();
    assert!((sim.analytic - reliability_known_psi(&psi, 0.6, &e, &b).unwrap()).abs() < 1e-12);
}

#[test]
fn lambda_in_dimension_two_stays_below_half() {
    let mut r = rng(40);
    for j in 0..5 {
        let e = sample_effect(2, EffectStrategy::Mixed, j, &mut r);
        for p in [0.2, 0.6] {
            let est = estimate_lambda(&e, p, 20_000, &r.substream(j as u64)).unwrap();
            assert!(est.fraction <= 0.5 + 4.0 * est.std_error);
            assert_eq!(est.conjecture_bound, 0.5);
        }
    }
}

#[test]
fn lambda_for_small_p_stays_below_half() {
    let mut r = rng(41);
    for d in [3, 5] {
        let e = sample_effect(d, EffectStrategy::Complement, 1, &mut r);
        let est = estimate_lambda(&e, 0.1, 20_000, &RngStream::new(d as u64)).unwrap();
        assert!(est.fraction <= 0.5 + 4.0 * est.std_error);
    }
}

#[test]
fn optimal_effect_beats_blind_guessing_at_its_own_state() {
    let mut r = rng(42);
    for d in 2..6 {
        let psi = random_state(d, &mut r);
        let b = CollapseBasis::standard(d);
        let p = 0.3;
        let opt = optimal_known_psi(&psi, p, &b).unwrap();
        assert!(opt.r_max > p.max(1.0 - p));
        assert!(reliability_advantage(&psi, p, &opt.e_opt, &b).unwrap() > 0.0);
    }
}

#[test]
fn half_prior_is_flagged() {
    let psi = StateVector::uniform(3);
    let e = Effect::complement_of(psi.amplitudes()).unwrap();
    let est = estimate_lambda(&e, 0.5, 10_000, &RngStream::new(1)).unwrap();
    assert!(est.tie_at_half);
    let cfg = ScanConfig {
        dim: 3,
        p_grid: vec![0.5],
        strategy: EffectStrategy::Complement,
        n_effects: 2,
        n_samples: 2000,
    };
    let report = conjecture_scan(&cfg, &RngStream::new(2)).unwrap();
    assert!(report.notes.iter().any(|n| n.contains("0.5")));
}

#[test]
fn scan_report_shape() {
    let cfg = ScanConfig {
        dim: 3,
        p_grid: vec![0.3, 0.55],
        strategy: EffectStrategy::Spectral,
        n_effects: 4,
        n_samples: 4000,
    };
    let report = conjecture_scan(&cfg, &RngStream::new(9)).unwrap();
    assert_eq!(report.points.len(), 2);
    assert!((report.conjecture_bound - conjecture_bound(3)).abs() < 1e-15);
    assert_eq!(report.metadata.seed, 9);
    assert!(report.metadata.wall_time_seconds.is_none());
    let json = serde_json::to_value(&report).unwrap();
    assert!(json.get("metadata").unwrap().get("wall_time_seconds").is_none());
    assert_eq!(json["strategy"], "spectral");
}
