//! Five trials of each initialization on one shared matrix; writes the
//! trajectory and summary CSVs to the directory given as the first argument.
//!
//! cargo run --release --example fig1 -- out/fig1

use lowrank_agd::harness::experiments::median_iters;
use lowrank_agd::harness::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> lowrank_agd::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Fig1);
    cfg.out = std::env::args().nth(1).unwrap_or_else(|| "out/fig1".into()).into();
    let out = run_experiment(&cfg)?;
    for &scheme in &cfg.schemes {
        let iters: Vec<Option<usize>> = out.summary.iter().filter(|r| r.scheme == scheme.name()).map(|r| r.iters_to_target).collect();
        println!("{:<18} {:?} median {:?}", scheme.name(), iters, median_iters(&iters));
    }
    println!("summary: {}", out.summary_path.display());
    Ok(())
}
