//! Derived constants for a problem instance: rho, beta, the step-size cap and
//! the iteration budgets, plus the restart schedule in its own regime.

use lowrank_agd::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};
use lowrank_agd::theory::{self, theory_report, F0Source};
use lowrank_agd::{InitConfig, InitScheme, Problem, Rng};

fn main() -> lowrank_agd::Result<()> {
    let spec = SpectrumSpec::linspace(100, 100, 1.0, 0.5, 5)?;
    let problem = Problem::new(make_matrix(&Rng::new(0, MATRIX_STREAM), &spec)?)?;

    for d in [6, 10, 20, 80] {
        let init = InitConfig::new(4.0, 1e-10, 1.0, d, InitScheme::Unbalanced)?;
        let capped = theory_report(&problem, &init, 1e-8, theory::DEFAULT_S, F0Source::Bound)?;
        let init = init.with_eta(capped.eta_max)?;
        let rep = theory_report(&problem, &init, 1e-8, theory::DEFAULT_S, F0Source::Bound)?;
        println!(
            "d={d:<3} rho={:.4} beta={:.3e} eta_max={:.3e} T={} complexity={:.3e}",
            rep.rho, rep.beta, rep.eta_max, rep.t_budget, rep.complexity
        );
    }

    // Restarted stages at epsilon = 1/16 with a first stage of 100 iterations.
    let (beta, f0): (f64, f64) = (1.0, 1.0);
    let eta = (beta / (8.0 * 100.0 * f0)).sqrt();
    println!("stages: {:?}", theory::stage_schedule(beta, eta, f0, 1.0 / 16.0, 3)?);

    for t in [0.5, 1.0, 2.0] {
        let b = theory::gaussian_sv_bounds(50, 10, t, 1.0)?;
        println!("50x10 Gaussian, t={t}: {:.3} <= sigma_r, sigma_1 <= {:.3} (each w.p. {:.3})", b.lower, b.upper, b.prob);
    }
    Ok(())
}
