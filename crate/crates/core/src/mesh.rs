//! Interface-fitted meshes of `[0,1]` and `[0,1]^2`, and the uniform time
//! partition.

use crate::error::{domain, Result};

/// Coordinates closer than this are treated as the same vertex.
pub const MERGE_TOL: f64 = 1e-12;

/// An axis-aligned cell box. Unused axes have `lo = 0, hi = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl CellBox {
    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }
}

/// A facet between two cells. `minus` is the cell on the lower-coordinate
/// side along `normal_axis`; the unit normal points from `minus` to `plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorFacet {
    pub normal_axis: usize,
    pub minus: usize,
    pub plus: usize,
}

/// A facet on the domain boundary with outward normal `outward * e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFacet {
    pub normal_axis: usize,
    pub cell: usize,
    pub outward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Interior,
    Boundary,
}

/// Interval mesh of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub vertices: Vec<f64>,
    pub cells: Vec<(usize, usize)>,
    pub interior_facets: Vec<usize>,
    pub boundary_facets: [usize; 2],
    pub h: f64,
}

/// Uniform mesh with `2^(level+1)` cells, with every required point inserted
/// as a vertex unless it already is one.
pub fn build_mesh_1d(level: u32, required_points: &[f64]) -> Result<Mesh1D> {
    let vertices = fitted_axis(level, required_points)?;
    Ok(Mesh1D::from_vertices(vertices))
}

fn fitted_axis(level: u32, required_points: &[f64]) -> Result<Vec<f64>> {
    if level > 24 {
        return domain(format!("refinement level {level} is too large"));
    }
    for &p in required_points {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("required point {p} is not inside (0, 1)"));
        }
    }
    let m = 1usize << (level + 1);
    let mut vertices: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    for &p in required_points {
        let pos = vertices.partition_point(|&v| v < p);
        let near_left = pos > 0 && (p - vertices[pos - 1]).abs() <= MERGE_TOL;
        let near_right = pos < vertices.len() && (vertices[pos] - p).abs() <= MERGE_TOL;
        if !near_left && !near_right {
            vertices.insert(pos, p);
        }
    }
    Ok(vertices)
}

impl Mesh1D {
    pub fn from_vertices(vertices: Vec<f64>) -> Self {
        let n = vertices.len() - 1;
        let cells = (0..n).map(|i| (i, i + 1)).collect();
        let h = vertices.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Mesh1D {
            interior_facets: (1..n).collect(),
            boundary_facets: [0, n],
            cells,
            vertices,
            h,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_length(&self, c: usize) -> f64 {
        let (a, b) = self.cells[c];
        self.vertices[b] - self.vertices[a]
    }

    pub fn has_vertex(&self, x: f64) -> bool {
        self.vertices.iter().any(|&v| (v - x).abs() <= MERGE_TOL)
    }
}

/// Tensor-product quadrilateral mesh of `[0, 1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub x_vertices: Vec<f64>,
    pub y_vertices: Vec<f64>,
    pub h: f64,
}

/// Lines that a 2D mesh must resolve: the interface `x = 0.5` and the
/// boundary of `[0.25, 0.75]^2`.
pub const FITTED_X_2D: [f64; 3] = [0.25, 0.5, 0.75];
pub const FITTED_Y_2D: [f64; 2] = [0.25, 0.75];

/// Uniform `2^(L+1) x 2^(L+1)` quadrilateral mesh. Level 0 cannot resolve the
/// quarter lines and is rejected.
pub fn build_mesh_2d(level: u32) -> Result<Mesh2D> {
    if level == 0 {
        return domain("2D meshes need level >= 1 to fit the data domain");
    }
    let x = fitted_axis(level, &FITTED_X_2D)?;
    let y = fitted_axis(level, &FITTED_Y_2D)?;
    Ok(Mesh2D::from_axes(x, y))
}

impl Mesh2D {
    pub fn from_axes(x_vertices: Vec<f64>, y_vertices: Vec<f64>) -> Self {
        let hx = x_vertices.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let hy = y_vertices.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Mesh2D { x_vertices, y_vertices, h: hx.max(hy) }
    }

    pub fn nx(&self) -> usize {
        self.x_vertices.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y_vertices.len() - 1
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Cell index of `(ix, iy)`; x varies fastest.
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx() * iy
    }

    /// Classifies the segment from `a` to `b` if it is exactly one mesh edge.
    pub fn locate_facet(&self, a: [f64; 2], b: [f64; 2]) -> Option<FacetKind> {
        let find = |v: &[f64], x: f64| v.iter().position(|&t| (t - x).abs() <= MERGE_TOL);
        let (lo, hi) = (
            [a[0].min(b[0]), a[1].min(b[1])],
            [a[0].max(b[0]), a[1].max(b[1])],
        );
        let (xv, yv) = (&self.x_vertices, &self.y_vertices);
        if (hi[0] - lo[0]).abs() <= MERGE_TOL {
            // vertical edge
            let i = find(xv, lo[0])?;
            let j0 = find(yv, lo[1])?;
            let j1 = find(yv, hi[1])?;
            if j1 != j0 + 1 {
                return None;
            }
            Some(if i == 0 || i == self.nx() { FacetKind::Boundary } else { FacetKind::Interior })
        } else if (hi[1] - lo[1]).abs() <= MERGE_TOL {
            let j = find(yv, lo[1])?;
            let i0 = find(xv, lo[0])?;
            let i1 = find(xv, hi[0])?;
            if i1 != i0 + 1 {
                return None;
            }
            Some(if j == 0 || j == self.ny() { FacetKind::Boundary } else { FacetKind::Interior })
        } else {
            None
        }
    }

    pub fn has_x_line(&self, x: f64) -> bool {
        self.x_vertices.iter().any(|&v| (v - x).abs() <= MERGE_TOL)
    }

    pub fn has_y_line(&self, y: f64) -> bool {
        self.y_vertices.iter().any(|&v| (v - y).abs() <= MERGE_TOL)
    }
}

/// The spatial mesh used by the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialMesh {
    OneD(Mesh1D),
    TwoD(Mesh2D),
}

impl SpatialMesh {
    pub fn dim(&self) -> usize {
        match self {
            SpatialMesh::OneD(_) => 1,
            SpatialMesh::TwoD(_) => 2,
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            SpatialMesh::OneD(m) => m.h,
            SpatialMesh::TwoD(m) => m.h,
        }
    }

    pub fn n_cells(&self) -> usize {
        match self {
            SpatialMesh::OneD(m) => m.n_cells(),
            SpatialMesh::TwoD(m) => m.n_cells(),
        }
    }

    /// Vertex coordinates along `axis`.
    pub fn axis_vertices(&self, axis: usize) -> &[f64] {
        match (self, axis) {
            (SpatialMesh::OneD(m), 0) => &m.vertices,
            (SpatialMesh::TwoD(m), 0) => &m.x_vertices,
            (SpatialMesh::TwoD(m), 1) => &m.y_vertices,
            _ => &[0.0, 1.0],
        }
    }

    /// Number of cells along each axis (`1` for unused axes).
    pub fn axis_cells(&self) -> [usize; 2] {
        match self {
            SpatialMesh::OneD(m) => [m.n_cells(), 1],
            SpatialMesh::TwoD(m) => [m.nx(), m.ny()],
        }
    }

    /// Per-axis cell index of cell `c`.
    pub fn cell_coords(&self, c: usize) -> [usize; 2] {
        let [nx, _] = self.axis_cells();
        [c % nx, c / nx]
    }

    pub fn cell_box(&self, c: usize) -> CellBox {
        let [ix, iy] = self.cell_coords(c);
        let xv = self.axis_vertices(0);
        let yv = self.axis_vertices(1);
        CellBox { lo: [xv[ix], yv[iy]], hi: [xv[ix + 1], yv[iy + 1]] }
    }

    /// Cell diameter used for the `h`-weighted terms: the longest edge.
    pub fn cell_h(&self, c: usize) -> f64 {
        let b = self.cell_box(c);
        (0..self.dim()).map(|a| b.width(a)).fold(0.0, f64::max)
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        let b = self.cell_box(c);
        (0..self.dim()).map(|a| b.width(a)).product()
    }

    pub fn interior_facets(&self) -> Vec<InteriorFacet> {
        let [nx, ny] = self.axis_cells();
        let mut out = vec![];
        for iy in 0..ny {
            for ix in 1..nx {
                out.push(InteriorFacet { normal_axis: 0, minus: ix - 1 + nx * iy, plus: ix + nx * iy });
            }
        }
        if self.dim() == 2 {
            for iy in 1..ny {
                for ix in 0..nx {
                    out.push(InteriorFacet { normal_axis: 1, minus: ix + nx * (iy - 1), plus: ix + nx * iy });
                }
            }
        }
        out
    }

    pub fn boundary_facets(&self) -> Vec<BoundaryFacet> {
        let [nx, ny] = self.axis_cells();
        let mut out = vec![];
        for iy in 0..ny {
            out.push(BoundaryFacet { normal_axis: 0, cell: nx * iy, outward: -1.0 });
            out.push(BoundaryFacet { normal_axis: 0, cell: nx - 1 + nx * iy, outward: 1.0 });
        }
        if self.dim() == 2 {
            for ix in 0..nx {
                out.push(BoundaryFacet { normal_axis: 1, cell: ix, outward: -1.0 });
                out.push(BoundaryFacet { normal_axis: 1, cell: ix + nx * (ny - 1), outward: 1.0 });
            }
        }
        out
    }

    /// Measure of a facet (1 for points in 1D).
    pub fn facet_measure(&self, normal_axis: usize, cell: usize) -> f64 {
        if self.dim() == 1 {
            1.0
        } else {
            self.cell_box(cell).width(1 - normal_axis)
        }
    }

    /// Locates the cell containing `x`. Points on a shared facet go to the
    /// lower-index cell along each axis.
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        let mut idx = [0usize; 2];
        for a in 0..self.dim() {
            let v = self.axis_vertices(a);
            let xa = x[a];
            if !(xa >= v[0] - MERGE_TOL && xa <= v[v.len() - 1] + MERGE_TOL) {
                return domain(format!("point {x:?} is outside the domain"));
            }
            let p = v.partition_point(|&t| t < xa);
            idx[a] = p.saturating_sub(1).min(v.len() - 2);
        }
        let [nx, _] = self.axis_cells();
        Ok(idx[0] + nx * idx[1])
    }
}

/// Uniform partition of `[0, T]` into time slabs.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    pub t_nodes: Vec<f64>,
    pub dt: f64,
}

pub fn build_time_partition(final_time: f64, n_slabs: usize) -> Result<TimePartition> {
    if !(final_time > 0.0 && final_time.is_finite()) {
        return domain(format!("final time must be positive, got {final_time}"));
    }
    if n_slabs == 0 {
        return domain("at least one time slab is required");
    }
    let dt = final_time / n_slabs as f64;
    let t_nodes = (0..=n_slabs)
        .map(|i| if i == n_slabs { final_time } else { i as f64 * dt })
        .collect();
    Ok(TimePartition { t_nodes, dt })
}

impl TimePartition {
    pub fn n_slabs(&self) -> usize {
        self.t_nodes.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        self.t_nodes[self.t_nodes.len() - 1]
    }

    pub fn slab_start(&self, n: usize) -> f64 {
        self.t_nodes[n]
    }

    /// Slab containing `t`. At an interior node, `side` picks the slab to the
    /// left or right.
    pub fn locate(&self, t: f64, side: TimeSide) -> Result<usize> {
        let tf = self.final_time();
        if !(t >= -MERGE_TOL && t <= tf + MERGE_TOL) {
            return domain(format!("time {t} is outside [0, {tf}]"));
        }
        let n = self.n_slabs();
        let s = (t / self.dt).floor() as isize;
        let s = s.clamp(0, n as isize - 1) as usize;
        let node = (t / self.dt).round();
        let at_node = (t - node * self.dt).abs() <= MERGE_TOL * self.dt.max(1.0);
        if at_node {
            let k = node as usize;
            return Ok(match side {
                TimeSide::Left => k.saturating_sub(1).min(n - 1),
                TimeSide::Right => k.min(n - 1),
            });
        }
        Ok(s)
    }
}

/// Which one-sided trace to take at a slab node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSide {
    Left,
    Right,
}
