//! Mesh refinement study in 1D for two polynomial orders, with observed orders.

use wave_uc::harness::{run_refinement_sweep, RunConfig};

fn main() -> wave_uc::Result<()> {
    let final_time = std::env::args().nth(1).map_or(Ok(0.5), |s| s.parse()).expect("final time");
    let cfg = RunConfig { final_time, ..RunConfig::default() };
    let res = run_refinement_sweep(&cfg, &[1, 2, 3, 4], &[2, 3])?;
    println!("final time {final_time}");
    print!("{}", res.summary());
    Ok(())
}
