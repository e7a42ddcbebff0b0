//! Travel-time thresholds for the two-layer and three-layer setups.

use wave_uc::problem::{gcc_threshold, simple_gcc_threshold, ExactSolution, Region, WaveSpeedModel};

fn main() -> wave_uc::Result<()> {
    let omega = Region::intervals(&[(0.0, 0.25), (0.75, 1.0)])?;
    println!("two layers, data on [0, 0.25] U [0.75, 1]");
    for i in 0..8 {
        let c1 = 1.0 + 0.5 * i as f64;
        let t = gcc_threshold(&WaveSpeedModel::two_layer(c1, 1.0)?, &omega)?;
        println!("  c1 = {c1:<4} T_min = {t:.6} (closed form {:.6})", simple_gcc_threshold(c1));
    }

    let one_sided = Region::intervals(&[(0.0, 0.3)])?;
    println!("three layers, data on [0, 0.3]");
    for (p1, n, c1) in [(0.4, 1, 2.5), (0.4, 3, 7.5)] {
        let sol = ExactSolution::multi_jump(p1, n, c1)?;
        let t = gcc_threshold(&sol.speed_model()?, &one_sided)?;
        println!("  c1 = {c1:<4} interfaces {:?} T_min = {t:.6}", sol.interfaces());
    }
    Ok(())
}
