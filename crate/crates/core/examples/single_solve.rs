//! One 1D solve with the default two-layer setup, printing every error measure.

use wave_uc::harness::{run_single, RunConfig};

fn main() -> wave_uc::Result<()> {
    let cfg = RunConfig { level: 3, k: 3, q: 3, eval_time: Some(0.5), ..RunConfig::default() };
    let o = run_single(&cfg)?;
    let r = &o.report;
    println!("{} unknowns, {} slabs, residual {:.2e}", o.unknowns, o.n_slabs, r.residual);
    println!("sup-in-time L2 error of u   {:.4e} (best approximation {:.4e})", r.linfty_l2_u, r.best_linfty_l2_u);
    println!("L2 error of u_t             {:.4e} (best approximation {:.4e})", r.l2_l2_ut, r.best_l2_l2_ut);
    println!("L2 error of u at t = 0      {:.4e}", r.t0_l2);
    println!("relative L2 error at t = 0.5 {:.4e}", o.relative_l2_at.unwrap_or(f64::NAN));
    Ok(())
}
