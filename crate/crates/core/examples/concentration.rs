//! Empirical tail rates for the extreme singular values of a Gaussian
//! matrix against the bound exp(-t^2/2).

use lowrank_agd::harness::montecarlo::concentration;

fn main() -> lowrank_agd::Result<()> {
    let rows = concentration(50, 10, 1.0, &[0.0, 0.5, 1.0, 2.0, 3.0], 2000, 0, 1)?;
    println!("{:>4} {:>8} {:>10} {:>10}", "t", "bound", "sigma_r lo", "sigma_1 hi");
    for r in rows {
        println!("{:>4} {:>8.4} {:>10.4} {:>10.4}", r.t, r.tail_bound, r.viol_lower, r.viol_upper);
    }
    Ok(())
}
