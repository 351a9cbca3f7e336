//! Factorize a synthetic rank-5 matrix with the unbalanced initialization.
//!
//! cargo run --release --example factorize

use lowrank_agd::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};
use lowrank_agd::{initialize, run, AgdConfig, InitConfig, InitScheme, Problem, Rng};

fn main() -> lowrank_agd::Result<()> {
    // 100 x 100, singular values evenly spaced from 1 down to 0.5
    let spec = SpectrumSpec::linspace(100, 100, 1.0, 0.5, 5)?;
    let a = make_matrix(&Rng::new(42, MATRIX_STREAM), &spec)?;
    let problem = Problem::new(a)?;

    let eta = 0.0683;
    let init = InitConfig::new(4.0, 1e-10, eta, 6, InitScheme::Unbalanced)?;
    let (x0, y0) = initialize(&mut Rng::new(42, 0), &problem, &init)?;

    let cfg = AgdConfig::new(eta, 5000).target(1e-10).record_every(25);
    let record = run(&problem, x0, y0, &cfg)?;

    println!("{:>6} {:>12} {:>10} {:>10}", "t", "rel_loss", "sigma1(X)", "sigma1(Y)");
    for s in &record.stats {
        println!("{:>6} {:>12.3e} {:>10.4} {:>10.4}", s.t, s.rel_loss, s.sigma1_x, s.sigma1_y);
    }
    println!("{:?} after {} iterations", record.termination, record.last().t);
    Ok(())
}
