//! Sensitivity of the k = 2 refinement study to the stabilization weights.

use wave_uc::harness::{run_refinement_sweep, RunConfig};

fn main() -> wave_uc::Result<()> {
    let unit = RunConfig { k: 2, q: 2, ..RunConfig::default() };
    let tuned = RunConfig { weight_data: 100.0, weight_least_squares: 0.01, ..unit.clone() };
    for (name, cfg) in [("unit weights", unit), ("data x100, least squares x0.01", tuned)] {
        println!("{name}");
        print!("{}", run_refinement_sweep(&cfg, &[1, 2, 3, 4], &[])?.summary());
    }
    Ok(())
}
