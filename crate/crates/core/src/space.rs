//! Tensor space-time finite element spaces: continuous Lagrange elements in
//! space (P^k on intervals, Q^k on quadrilaterals) and nodal polynomials of
//! degree q on each time slab, discontinuous across slab boundaries.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::mesh::{SpatialMesh, TimePartition, TimeSide};

/// Lagrange polynomials on a set of distinct nodes in `[0, 1]`, stored as
/// monomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis1D {
    pub nodes: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl LagrangeBasis1D {
    pub fn new(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let coeffs = (0..n)
            .map(|l| {
                let mut c = vec![1.0];
                let mut denom = 1.0;
                for m in (0..n).filter(|&m| m != l) {
                    // multiply by (x - x_m)
                    let mut next = vec![0.0; c.len() + 1];
                    for (i, &ci) in c.iter().enumerate() {
                        next[i + 1] += ci;
                        next[i] -= nodes[m] * ci;
                    }
                    c = next;
                    denom *= nodes[l] - nodes[m];
                }
                c.iter().map(|v| v / denom).collect()
            })
            .collect();
        LagrangeBasis1D { nodes, coeffs }
    }

    /// `degree + 1` equispaced nodes including both endpoints; a single
    /// midpoint node for degree 0.
    pub fn equispaced(degree: usize) -> Self {
        if degree == 0 {
            return Self::new(vec![0.5]);
        }
        Self::new((0..=degree).map(|i| i as f64 / degree as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values, first and second derivatives at `x` (reference coordinates).
    pub fn eval(&self, x: f64, val: &mut [f64], d1: &mut [f64], d2: &mut [f64]) {
        for (l, c) in self.coeffs.iter().enumerate() {
            let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
            for &a in c.iter().rev() {
                ddp = ddp * x + 2.0 * dp;
                dp = dp * x + p;
                p = p * x + a;
            }
            val[l] = p;
            d1[l] = dp;
            d2[l] = ddp;
        }
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        let (mut v, mut d1, mut d2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        self.eval(x, &mut v, &mut d1, &mut d2);
        v
    }

    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        let (mut v, mut d1, mut d2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        self.eval(x, &mut v, &mut d1, &mut d2);
        d1
    }
}

/// Basis data of all local shape functions of one cell at one point, in
/// physical coordinates.
#[derive(Debug, Clone, Default)]
pub struct LocalBasis {
    pub val: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub lap: Vec<f64>,
    /// Second derivatives `(xx, xy, yy)`.
    pub hess: Vec<[f64; 3]>,
    // 1D scratch per axis
    v1: [Vec<f64>; 2],
    d1: [Vec<f64>; 2],
    d2: [Vec<f64>; 2],
}

/// Continuous Lagrange space of degree `k` on a tensor mesh.
#[derive(Debug, Clone)]
pub struct SpatialSpace {
    mesh: Arc<SpatialMesh>,
    degree: usize,
    basis: LagrangeBasis1D,
    axis_dofs: [usize; 2],
}

impl SpatialSpace {
    pub fn new(mesh: Arc<SpatialMesh>, degree: usize) -> Result<Self> {
        if degree == 0 {
            return domain("spatial degree must be at least 1");
        }
        let cells = mesh.axis_cells();
        let mut axis_dofs = [1usize; 2];
        for a in 0..mesh.dim() {
            axis_dofs[a] = cells[a] * degree + 1;
        }
        Ok(SpatialSpace { mesh, degree, basis: LagrangeBasis1D::equispaced(degree), axis_dofs })
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<SpatialMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn n_dofs(&self) -> usize {
        self.axis_dofs[0] * self.axis_dofs[1]
    }

    pub fn n_local(&self) -> usize {
        (self.degree + 1).pow(self.dim() as u32)
    }

    /// Global dofs of cell `c`, local index `lx + (k+1) ly`.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let [cx, cy] = self.mesh.cell_coords(c);
        let k = self.degree;
        let ly_max = if self.dim() == 2 { k } else { 0 };
        let mut out = Vec::with_capacity(self.n_local());
        for ly in 0..=ly_max {
            for lx in 0..=k {
                let gx = cx * k + lx;
                let gy = if self.dim() == 2 { cy * k + ly } else { 0 };
                out.push(gx + self.axis_dofs[0] * gy);
            }
        }
        out
    }

    /// Coordinates of the Lagrange node carrying dof `i`.
    pub fn dof_coords(&self, i: usize) -> [f64; 2] {
        let k = self.degree;
        let mut out = [0.0; 2];
        let idx = [i % self.axis_dofs[0], i / self.axis_dofs[0]];
        for a in 0..self.dim() {
            let v = self.mesh.axis_vertices(a);
            let cell = (idx[a] / k).min(v.len() - 2);
            let l = idx[a] - cell * k;
            out[a] = v[cell] + (v[cell + 1] - v[cell]) * l as f64 / k as f64;
        }
        out
    }

    pub fn new_local(&self) -> LocalBasis {
        let n = self.n_local();
        let m = self.degree + 1;
        LocalBasis {
            val: vec![0.0; n],
            grad: vec![[0.0; 2]; n],
            lap: vec![0.0; n],
            hess: vec![[0.0; 3]; n],
            v1: [vec![0.0; m], vec![1.0; m]],
            d1: [vec![0.0; m], vec![0.0; m]],
            d2: [vec![0.0; m], vec![0.0; m]],
        }
    }

    /// Evaluates all local shape functions of cell `c` at reference point
    /// `xi` in `[0,1]^dim`.
    pub fn eval_local(&self, c: usize, xi: [f64; 2], out: &mut LocalBasis) {
        let b = self.mesh.cell_box(c);
        let dim = self.dim();
        let m = self.degree + 1;
        let mut scale = [1.0; 2];
        for a in 0..dim {
            scale[a] = 1.0 / b.width(a);
            self.basis.eval(xi[a], &mut out.v1[a], &mut out.d1[a], &mut out.d2[a]);
        }
        if dim == 1 {
            for l in 0..m {
                out.val[l] = out.v1[0][l];
                out.grad[l] = [out.d1[0][l] * scale[0], 0.0];
                out.lap[l] = out.d2[0][l] * scale[0] * scale[0];
                out.hess[l] = [out.lap[l], 0.0, 0.0];
            }
        } else {
            for ly in 0..m {
                for lx in 0..m {
                    let l = lx + m * ly;
                    let (vx, vy) = (out.v1[0][lx], out.v1[1][ly]);
                    out.val[l] = vx * vy;
                    out.grad[l] = [out.d1[0][lx] * scale[0] * vy, vx * out.d1[1][ly] * scale[1]];
                    let xx = out.d2[0][lx] * scale[0] * scale[0] * vy;
                    let yy = vx * out.d2[1][ly] * scale[1] * scale[1];
                    let xy = out.d1[0][lx] * scale[0] * out.d1[1][ly] * scale[1];
                    out.lap[l] = xx + yy;
                    out.hess[l] = [xx, xy, yy];
                }
            }
        }
    }

    /// Physical point -> (cell, reference coordinates).
    pub fn locate(&self, x: &[f64]) -> Result<(usize, [f64; 2])> {
        let c = self.mesh.locate(x)?;
        let b = self.mesh.cell_box(c);
        let mut xi = [0.0; 2];
        for a in 0..self.dim() {
            xi[a] = ((x[a] - b.lo[a]) / b.width(a)).clamp(0.0, 1.0);
        }
        Ok((c, xi))
    }

    pub fn map_to_cell(&self, c: usize, xi: [f64; 2]) -> [f64; 2] {
        let b = self.mesh.cell_box(c);
        let mut x = [0.0; 2];
        for a in 0..self.dim() {
            x[a] = b.lo[a] + b.width(a) * xi[a];
        }
        x
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.n_dofs()).map(|i| f(&self.dof_coords(i)[..self.dim()])).collect()
    }
}

/// Nodal Lagrange basis in time on one slab, reference coordinate in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBasis {
    pub degree: usize,
    pub basis: LagrangeBasis1D,
}

impl TimeBasis {
    pub fn new(degree: usize) -> Self {
        TimeBasis { degree, basis: LagrangeBasis1D::equispaced(degree) }
    }

    pub fn n(&self) -> usize {
        self.degree + 1
    }

    pub fn values(&self, tau: f64) -> Vec<f64> {
        self.basis.values(tau)
    }

    /// Reference derivatives; divide by the slab length for physical ones.
    pub fn derivatives(&self, tau: f64) -> Vec<f64> {
        self.basis.derivatives(tau)
    }
}

/// Which of the four unknown fields a coefficient block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldLabel {
    U1,
    U2,
    Z1,
    Z2,
}

/// Slab-wise tensor space `P^q(I_n) x V_h^k`.
#[derive(Debug, Clone)]
pub struct SpaceTimeSpace {
    pub spatial: Arc<SpatialSpace>,
    pub time: TimeBasis,
    pub partition: Arc<TimePartition>,
}

impl SpaceTimeSpace {
    pub fn new(spatial: Arc<SpatialSpace>, time_degree: usize, partition: Arc<TimePartition>) -> Self {
        SpaceTimeSpace { spatial, time: TimeBasis::new(time_degree), partition }
    }

    pub fn n_slabs(&self) -> usize {
        self.partition.n_slabs()
    }

    pub fn slab_dofs(&self) -> usize {
        self.time.n() * self.spatial.n_dofs()
    }

    pub fn n_dofs(&self) -> usize {
        self.slab_dofs() * self.n_slabs()
    }

    /// Index of `(time node a, spatial dof i)` inside a slab block.
    pub fn local_index(&self, a: usize, i: usize) -> usize {
        a * self.spatial.n_dofs() + i
    }

    pub fn zero_field(&self, label: FieldLabel) -> DiscreteField {
        DiscreteField { space: self.clone(), label, coeffs: vec![0.0; self.n_dofs()] }
    }

    /// Nodal interpolant of `f(t, x)` on every slab.
    pub fn interpolate(&self, label: FieldLabel, f: impl Fn(f64, &[f64]) -> f64) -> DiscreteField {
        let nv = self.spatial.n_dofs();
        let dim = self.spatial.dim();
        let coords: Vec<[f64; 2]> = (0..nv).map(|i| self.spatial.dof_coords(i)).collect();
        let mut coeffs = Vec::with_capacity(self.n_dofs());
        let dt = self.partition.dt;
        for n in 0..self.n_slabs() {
            let t0 = self.partition.slab_start(n);
            for &tau in &self.time.basis.nodes {
                let t = t0 + tau * dt;
                coeffs.extend(coords.iter().map(|x| f(t, &x[..dim])));
            }
        }
        DiscreteField { space: self.clone(), label, coeffs }
    }
}

/// Pointwise evaluation result of a discrete field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointValue {
    pub value: f64,
    pub dt: f64,
    pub grad: [f64; 2],
    pub lap: f64,
    pub hess: [f64; 3],
}

/// Coefficients of one scalar field over all slabs, slab-major.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: SpaceTimeSpace,
    pub label: FieldLabel,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn from_coeffs(space: SpaceTimeSpace, label: FieldLabel, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::DimensionMismatch { expected: space.n_dofs(), got: coeffs.len() });
        }
        Ok(DiscreteField { space, label, coeffs })
    }

    pub fn slab(&self, n: usize) -> &[f64] {
        let s = self.space.slab_dofs();
        &self.coeffs[n * s..(n + 1) * s]
    }

    /// Evaluates inside slab `n` at reference time `tau` and a point of cell
    /// `c` whose local basis has already been evaluated.
    pub fn eval_with_basis(&self, n: usize, tau: f64, c: usize, local: &LocalBasis) -> PointValue {
        let sp = &self.space;
        let dofs = sp.spatial.cell_dofs(c);
        let theta = sp.time.values(tau);
        let dtheta = sp.time.derivatives(tau);
        let inv_dt = 1.0 / sp.partition.dt;
        let block = self.slab(n);
        let mut out = PointValue::default();
        for (a, (&th, &dth)) in theta.iter().zip(&dtheta).enumerate() {
            for (l, &g) in dofs.iter().enumerate() {
                let coef = block[sp.local_index(a, g)];
                if coef == 0.0 {
                    continue;
                }
                let phi = local.val[l];
                out.value += coef * th * phi;
                out.dt += coef * dth * inv_dt * phi;
                out.grad[0] += coef * th * local.grad[l][0];
                out.grad[1] += coef * th * local.grad[l][1];
                out.lap += coef * th * local.lap[l];
                for (h, lh) in out.hess.iter_mut().zip(local.hess[l]) {
                    *h += coef * th * lh;
                }
            }
        }
        out
    }

    /// Full evaluation at `(t, x)`; `side` selects the trace at slab nodes.
    pub fn eval(&self, t: f64, x: &[f64], side: TimeSide) -> Result<PointValue> {
        let sp = &self.space;
        let n = sp.partition.locate(t, side)?;
        let tau = ((t - sp.partition.slab_start(n)) / sp.partition.dt).clamp(0.0, 1.0);
        let (c, xi) = sp.spatial.locate(x)?;
        let mut local = sp.spatial.new_local();
        sp.spatial.eval_local(c, xi, &mut local);
        Ok(self.eval_with_basis(n, tau, c, &local))
    }

    pub fn value(&self, t: f64, x: &[f64], side: TimeSide) -> Result<f64> {
        Ok(self.eval(t, x, side)?.value)
    }

    pub fn grad_x(&self, t: f64, x: &[f64], side: TimeSide) -> Result<[f64; 2]> {
        Ok(self.eval(t, x, side)?.grad)
    }

    pub fn d_t(&self, t: f64, x: &[f64], side: TimeSide) -> Result<f64> {
        Ok(self.eval(t, x, side)?.dt)
    }

    fn check_interior_node(&self, node: usize) -> Result<f64> {
        let n = self.space.n_slabs();
        if node == 0 || node >= n {
            return domain(format!("time node {node} is not interior (1..={})", n.saturating_sub(1)));
        }
        Ok(self.space.partition.t_nodes[node])
    }

    /// `v(t_n^+) - v(t_n^-)` at an interior node.
    pub fn jump_value(&self, node: usize, x: &[f64]) -> Result<f64> {
        let t = self.check_interior_node(node)?;
        Ok(self.value(t, x, TimeSide::Right)? - self.value(t, x, TimeSide::Left)?)
    }

    /// Jump of the spatial gradient at an interior node.
    pub fn jump_grad(&self, node: usize, x: &[f64]) -> Result<[f64; 2]> {
        let t = self.check_interior_node(node)?;
        let r = self.grad_x(t, x, TimeSide::Right)?;
        let l = self.grad_x(t, x, TimeSide::Left)?;
        Ok([r[0] - l[0], r[1] - l[1]])
    }

    pub fn scale(&mut self, alpha: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= alpha);
    }
}
