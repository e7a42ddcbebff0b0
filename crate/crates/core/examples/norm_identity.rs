//! Builds the discrete problem by hand and checks that the saddle-point
//! matrix tested against (U, -Z) reproduces the sum of the stabilizers.

use std::sync::Arc;

use wave_uc::assembly::{assemble_system, Assembler, CellData};
use wave_uc::mesh::{build_mesh_1d, build_time_partition, SpatialMesh};
use wave_uc::postproc::tnorm_components;
use wave_uc::problem::{ExactSolution, Region, SpaceTimeFunction};
use wave_uc::solver;
use wave_uc::space::{FieldLabel, SpaceTimeSpace, SpatialSpace};

fn main() -> wave_uc::Result<()> {
    let sol = ExactSolution::simple(2.5);
    let omega = Region::intervals(&[(0.0, 0.25), (0.75, 1.0)])?;
    let mut fitted = sol.interfaces();
    fitted.extend(omega.breakpoints(0));
    let mesh = Arc::new(SpatialMesh::OneD(build_mesh_1d(2, &fitted)?));
    let part = Arc::new(build_time_partition(0.5, 4)?);
    let space = SpaceTimeSpace::new(Arc::new(SpatialSpace::new(mesh.clone(), 2)?), 2, part);
    let c2 = sol.speed_model()?.c2_per_cell(&mesh)?;
    let cells = CellData::new(&mesh, c2, omega.cell_indicator(&mesh)?)?;
    let asm = Assembler::new(space.clone(), space, cells)?;

    let m = asm.assemble_matrix()?;
    println!("{} unknowns, {} nonzeros, symmetry defect {:.1e}", m.nrows(), m.nnz(), m.symmetry_defect());

    let x: Vec<f64> = (0..m.nrows()).map(|i| ((i * 7919) % 113) as f64 / 56.0 - 1.0).collect();
    let mut flipped = x.clone();
    for f in [FieldLabel::Z1, FieldLabel::Z2] {
        let z: Vec<f64> = asm.layout.extract(&x, f).iter().map(|v| -v).collect();
        asm.layout.insert(&mut flipped, f, &z);
    }
    let lhs = m.bilinear(&flipped, &x)?;
    let parts = tnorm_components(&asm, &x)?;
    println!("B[(U,Z),(U,-Z)] = {lhs:.12e}");
    println!("sum of parts     = {:.12e} {parts:?}", parts.total());

    let sys = assemble_system(&asm, |t, x| sol.value(t, x), |t, x| sol.value(t, x))?;
    let out = solver::solve(&sys.matrix, &sys.rhs)?;
    println!("solve residual {:.1e}", out.residual);
    Ok(())
}
