//! Convergence against the conditioning of the target: three matrices with
//! smallest singular value 0.1, 0.5 and 0.9, each at 1e4 times its own
//! theoretical step size. Prints median relative loss per matrix.

use lowrank_agd::harness::experiments::{common_recorded_iters, median_rel_loss_at};
use lowrank_agd::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use lowrank_agd::InitScheme;

fn main() -> lowrank_agd::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Fig2);
    cfg.out = std::env::args().nth(1).unwrap_or_else(|| "out/fig2".into()).into();
    let out = run_experiment(&cfg)?;

    for inst in &out.instances {
        println!("sigma_r={} eta={:.4e} beta={:.4e}", inst.sigma_r, inst.eta, inst.report.beta);
    }
    let ts = common_recorded_iters(out.trials.iter().map(|t| &t.record));
    print!("{:>5}", "t");
    for inst in &out.instances {
        print!(" {:>12}", format!("sr={}", inst.sigma_r));
    }
    println!();
    for t in ts {
        print!("{t:>5}");
        for inst in &out.instances {
            let recs = out.trials_for(InitScheme::Unbalanced, inst.index).map(|t| &t.record);
            print!(" {:>12.3e}", median_rel_loss_at(recs, t).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
