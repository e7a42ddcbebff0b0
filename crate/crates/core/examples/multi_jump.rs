//! Three-layer medium with data on one side only: the error at t = 0.5 drops
//! once the time window exceeds the travel-time threshold.

use wave_uc::harness::{gcc_query, run_single, OmegaKind, RunConfig, SolutionKind};

fn main() -> wave_uc::Result<()> {
    let base = RunConfig {
        solution: SolutionKind::MultiJump,
        c1: 2.5,
        n: 1,
        p1: 0.4,
        omega: OmegaKind::Intervals,
        omega_intervals: vec![[0.0, 0.3]],
        dt: Some(1.0 / 32.0),
        level: 4,
        eval_time: Some(0.5),
        ..RunConfig::default()
    };
    println!("travel-time threshold {:.4}", gcc_query(&base)?);
    for final_time in [0.5, 0.75, 1.0] {
        let o = run_single(&RunConfig { final_time, ..base.clone() })?;
        println!("T = {final_time:<5} relative L2 error at t = 0.5: {:.4e}", o.relative_l2_at.unwrap_or(f64::NAN));
    }
    Ok(())
}
