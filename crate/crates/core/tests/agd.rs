//! End-to-end behavior of the alternating iteration on the 100 x 100 rank-5
//! instance.

use lowrank_agd::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};
use lowrank_agd::{initialize, run, AgdConfig, Error, InitConfig, InitScheme, MonitorMode, Problem, Rng, Termination};

fn fig1_problem() -> Problem {
    let spec = SpectrumSpec::linspace(100, 100, 1.0, 0.5, 5).unwrap();
    Problem::new(make_matrix(&Rng::new(0, MATRIX_STREAM), &spec).unwrap()).unwrap()
}

#[test]
fn unbalanced_runs_descend_to_target() {
    let p = fig1_problem();
    let eta = 0.0683;
    let init = InitConfig::new(4.0, 1e-10, eta, 6, InitScheme::Unbalanced).unwrap();
    let cfg = AgdConfig::new(eta, 5000).target(1e-6).all_monitors(MonitorMode::Log);
    let mut good = 0;
    for stream in 0..20 {
        let (x0, y0) = initialize(&mut Rng::new(0, stream), &p, &init).unwrap();
        let rec = run(&p, x0, y0, &cfg).unwrap();
        let monotone = rec.stats.windows(2).all(|w| w[1].rel_loss <= w[0].rel_loss);
        let reached = rec.termination == Termination::TargetReached && rec.last().rel_loss <= 1e-6;
        if monotone && reached && rec.violations.is_empty() {
            good += 1;
        }
        for w in rec.stats.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }
    assert!(good >= 18, "{good} of 20 seeds clean");
}

#[test]
fn large_step_diverges_quickly() {
    let p = fig1_problem();
    let eta = 10.0 / p.sigma1().powi(2);
    let init = InitConfig::new(4.0, 1e-10, eta, 6, InitScheme::Unbalanced).unwrap();
    let (x0, y0) = initialize(&mut Rng::new(0, 0), &p, &init).unwrap();
    match run(&p, x0, y0, &AgdConfig::new(eta, 100)) {
        Err(Error::Divergence { iteration }) => assert!(iteration <= 100),
        other => panic!("expected divergence, got {:?}", other.map(|r| r.last().rel_loss)),
    }
}

#[test]
fn fatal_monitor_returns_partial_trajectory() {
    let p = fig1_problem();
    let init = InitConfig::new(4.0, 1e-10, 0.05, 6, InitScheme::PlainGaussian).unwrap();
    let (x0, y0) = initialize(&mut Rng::new(0, 0), &p, &init).unwrap();
    let cfg = AgdConfig::new(0.05, 100).all_monitors(MonitorMode::Fatal);
    match run(&p, x0, y0, &cfg) {
        Err(e @ Error::MonitorViolation(_)) => {
            assert_eq!(e.exit_code(), 4);
            let Error::MonitorViolation(rec) = e else { unreachable!() };
            assert_eq!(rec.termination, Termination::MonitorViolation);
            assert_eq!(rec.stats.len(), 1);
        }
        other => panic!("expected a monitor stop, got {:?}", other.map(|r| r.termination)),
    }
}
