//! 2D solve on the unit square with data on the frame around [0.25, 0.75]^2.

use wave_uc::harness::{run_refinement_sweep, RunConfig};

fn main() -> wave_uc::Result<()> {
    let cfg = RunConfig { dimension: 2, final_time: 0.75, k: 2, q: 2, ..RunConfig::default() };
    let res = run_refinement_sweep(&cfg, &[1, 2], &[])?;
    for r in res.rows.iter().filter_map(|r| r.outcome.as_ref()) {
        println!("L = {} unknowns {} residual {:.1e}", r.level, r.unknowns, r.report.residual);
    }
    print!("{}", res.summary());
    Ok(())
}
