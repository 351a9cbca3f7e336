//! Runtime invariant monitors at the theoretical step size, then a fatal
//! stop provoked by a step size far outside the descent regime.

use lowrank_agd::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};
use lowrank_agd::theory::{theory_report, F0Source, DEFAULT_S};
use lowrank_agd::{initialize, run, AgdConfig, Error, InitConfig, InitScheme, MonitorMode, Problem, Rng};

fn main() -> lowrank_agd::Result<()> {
    let spec = SpectrumSpec::linspace(100, 100, 1.0, 0.5, 5)?;
    let problem = Problem::new(make_matrix(&Rng::new(0, MATRIX_STREAM), &spec)?)?;
    let init = InitConfig::new(4.0, 1e-10, 1.0, 6, InitScheme::Unbalanced)?;
    let rep = theory_report(&problem, &init, 1e-8, DEFAULT_S, F0Source::Bound)?;

    let eta = rep.eta_max;
    let (x0, y0) = initialize(&mut Rng::new(0, 0), &problem, &init.with_eta(eta)?)?;
    let cfg = AgdConfig::new(eta, 2000)
        .record_every(100)
        .beta(rep.beta)
        .all_monitors(MonitorMode::Fatal);
    let record = run(&problem, x0, y0, &cfg)?;
    let last = record.last();
    println!(
        "eta={eta:.3e}: {} iterations, 2f={:.6e} under envelope {:.6e}, {} violations",
        last.t,
        2.0 * last.f,
        last.envelope.unwrap_or(f64::NAN),
        record.violations.len()
    );

    // Plain Gaussian factors leave the column span, so the monitor fires at t = 0.
    let plain = init.with_eta(0.05)?.with_scheme(InitScheme::PlainGaussian);
    let (x0, y0) = initialize(&mut Rng::new(0, 0), &problem, &plain)?;
    match run(&problem, x0, y0, &AgdConfig::new(0.05, 100).all_monitors(MonitorMode::Fatal)) {
        Err(Error::MonitorViolation(rec)) => println!("stopped as expected: {}", rec.violations[0]),
        other => println!("unexpected: {:?}", other.map(|r| r.termination)),
    }
    Ok(())
}
