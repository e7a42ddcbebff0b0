#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wave_uc::assembly::{Assembler, CellData};
use wave_uc::mesh::{build_mesh_1d, build_mesh_2d, build_time_partition, SpatialMesh};
use wave_uc::problem::{ExactSolution, Region};
use wave_uc::space::{SpaceTimeSpace, SpatialSpace};

pub struct Problem {
    pub asm: Assembler,
    pub primal: SpaceTimeSpace,
    pub dual: SpaceTimeSpace,
}

pub struct Setup {
    pub dim: usize,
    pub level: u32,
    pub k: usize,
    pub q: usize,
    pub k_dual: usize,
    pub q_dual: usize,
    pub slabs: usize,
    pub final_time: f64,
    pub solution: ExactSolution,
    pub omega: Region,
}

impl Setup {
    /// 1D two-layer setup with data on `[0, 0.25] U [0.75, 1]`.
    pub fn one_d(level: u32, k: usize, q: usize, slabs: usize, final_time: f64) -> Self {
        Setup {
            dim: 1,
            level,
            k,
            q,
            k_dual: k,
            q_dual: q,
            slabs,
            final_time,
            solution: ExactSolution::simple(2.5),
            omega: Region::intervals(&[(0.0, 0.25), (0.75, 1.0)]).unwrap(),
        }
    }

    pub fn two_d(level: u32, k: usize, q: usize, slabs: usize, final_time: f64) -> Self {
        Setup {
            dim: 2,
            omega: Region::square_frame(),
            ..Setup::one_d(level, k, q, slabs, final_time)
        }
    }

    pub fn build(&self) -> Problem {
        let mesh = Arc::new(if self.dim == 2 {
            SpatialMesh::TwoD(build_mesh_2d(self.level).unwrap())
        } else {
            let mut pts = self.solution.interfaces();
            pts.extend(self.omega.breakpoints(0));
            SpatialMesh::OneD(build_mesh_1d(self.level, &pts).unwrap())
        });
        let part = Arc::new(build_time_partition(self.final_time, self.slabs).unwrap());
        let primal = SpaceTimeSpace::new(Arc::new(SpatialSpace::new(mesh.clone(), self.k).unwrap()), self.q, part.clone());
        let dual = SpaceTimeSpace::new(Arc::new(SpatialSpace::new(mesh.clone(), self.k_dual).unwrap()), self.q_dual, part);
        let c2 = self.solution.speed_model().unwrap().c2_per_cell(&mesh).unwrap();
        let cells = CellData::new(&mesh, c2, self.omega.cell_indicator(&mesh).unwrap()).unwrap();
        let asm = Assembler::new(primal.clone(), dual.clone(), cells).unwrap();
        Problem { asm, primal, dual }
    }
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
