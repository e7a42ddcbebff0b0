//! Error growth with the wave-speed contrast at a fixed mesh.

use wave_uc::harness::{run_contrast_sweep, ErrorColumn, RunConfig};

fn main() -> wave_uc::Result<()> {
    let contrasts: Vec<f64> = (0..8).map(|i| 1.0 + 0.5 * i as f64).collect();
    let res = run_contrast_sweep(&RunConfig { level: 3, ..RunConfig::default() }, &contrasts)?;
    print!("{}", res.summary());
    for col in ErrorColumn::ALL {
        println!("{:<32} slope {:.2}", col.name(), res.contrast_slope(col)?);
    }
    Ok(())
}
