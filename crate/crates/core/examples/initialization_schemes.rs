//! The three initializations side by side: factor scales at t = 0 and the
//! number of iterations each needs to reach a relative loss of 1e-6.

use lowrank_agd::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};
use lowrank_agd::{initialize, run, AgdConfig, InitConfig, InitScheme, Problem, Rng};

fn main() -> lowrank_agd::Result<()> {
    let spec = SpectrumSpec::linspace(100, 100, 1.0, 0.5, 5)?;
    let problem = Problem::new(make_matrix(&Rng::new(0, MATRIX_STREAM), &spec)?)?;
    let eta = 0.0683;

    println!(
        "{:<18} {:>10} {:>10} {:>12} {:>10} {:>8}",
        "scheme", "sigma1(X)", "sigma1(Y)", "colspan_leak", "f0", "iters"
    );
    for scheme in InitScheme::ALL {
        let init = InitConfig::new(4.0, 1e-10, eta, 6, scheme)?;
        // the same stream for every scheme, so all three share their sketches
        let (x0, y0) = initialize(&mut Rng::new(0, 0), &problem, &init)?;
        let record = run(&problem, x0, y0, &AgdConfig::new(eta, 5000).target(1e-6).record_every(1))?;
        let s0 = &record.stats[0];
        let iters = record.iters_to(1e-6).map_or("-".to_string(), |t| t.to_string());
        println!(
            "{:<18} {:>10.3e} {:>10.3e} {:>12.3e} {:>10.4} {:>8}",
            scheme.name(),
            s0.sigma1_x,
            s0.sigma1_y,
            s0.colspan_leak,
            record.f0,
            iters
        );
    }
    Ok(())
}
