//! Assembly of the space-time saddle-point system.
//!
//! On a uniform time partition every bilinear form is a sum of Kronecker
//! products `T ⊗ S` of a small matrix `T` on the reference slab and a sparse
//! spatial matrix `S`. The global matrix is produced by streaming these
//! products slab by slab into a CSR builder.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::mesh::SpatialMesh;
use crate::quadrature::{gauss_rule, tensor_rule, ProductRule, QuadRule};
use crate::space::{FieldLabel, LocalBasis, SpaceTimeSpace, SpatialSpace, TimeBasis};
use crate::sparse::{CsrBuilder, SparseMatrix};

/// Gauss rule with `n` points, capped at the largest tabulated size.
fn gauss(n: usize) -> QuadRule {
    gauss_rule(n.clamp(1, 20)).expect("rule sizes 1..=20 are supported")
}

fn cell_rule(rules: &[QuadRule]) -> ProductRule {
    tensor_rule(rules).expect("one or two factors")
}

/// Small dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl SmallMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SmallMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }

    fn add(&mut self, a: usize, b: usize, v: f64) {
        self.data[a * self.cols + b] += v;
    }

    pub fn transpose(&self) -> SmallMat {
        let mut t = SmallMat::zeros(self.cols, self.rows);
        for a in 0..self.rows {
            for b in 0..self.cols {
                t.data[b * self.rows + a] = self.get(a, b);
            }
        }
        t
    }

    pub fn outer(u: &[f64], v: &[f64]) -> SmallMat {
        let mut m = SmallMat::zeros(u.len(), v.len());
        for (a, x) in u.iter().enumerate() {
            for (b, y) in v.iter().enumerate() {
                m.data[a * v.len() + b] = x * y;
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> SmallMat {
        SmallMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }
}

/// One-slab time matrices between a row basis and a column basis.
#[derive(Debug, Clone)]
pub struct TimePair {
    /// `dt * int θ_a θ_b`
    pub mass: SmallMat,
    /// `int θ_a θ_b'` (trial derivative, dimensionless)
    pub deriv: SmallMat,
    /// `(1/dt) int θ_a' θ_b'`
    pub stiff: SmallMat,
}

impl TimePair {
    pub fn new(row: &TimeBasis, col: &TimeBasis, dt: f64) -> Self {
        let rule = gauss(row.n() + col.n() + 2);
        let (nr, nc) = (row.n(), col.n());
        let mut mass = SmallMat::zeros(nr, nc);
        let mut deriv = SmallMat::zeros(nr, nc);
        let mut stiff = SmallMat::zeros(nr, nc);
        for (&tau, &w) in rule.points.iter().zip(&rule.weights) {
            let (vr, dr) = (row.values(tau), row.derivatives(tau));
            let (vc, dc) = (col.values(tau), col.derivatives(tau));
            for a in 0..nr {
                for b in 0..nc {
                    mass.add(a, b, dt * w * vr[a] * vc[b]);
                    deriv.add(a, b, w * vr[a] * dc[b]);
                    stiff.add(a, b, w * dr[a] * dc[b] / dt);
                }
            }
        }
        TimePair { mass, deriv, stiff }
    }
}

/// Field block sizes of the global vector.
///
/// Layout is slab-major; inside a slab the fields are `u1, u2, z1, z2`, and
/// inside a field block the index is `a * n_space + i` for time node `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub n_slabs: usize,
    pub primal_time: usize,
    pub primal_space: usize,
    pub dual_time: usize,
    pub dual_space: usize,
}

impl DofLayout {
    pub fn field_size(&self, f: FieldLabel) -> usize {
        match f {
            FieldLabel::U1 | FieldLabel::U2 => self.primal_time * self.primal_space,
            FieldLabel::Z1 | FieldLabel::Z2 => self.dual_time * self.dual_space,
        }
    }

    pub fn space_size(&self, f: FieldLabel) -> usize {
        match f {
            FieldLabel::U1 | FieldLabel::U2 => self.primal_space,
            FieldLabel::Z1 | FieldLabel::Z2 => self.dual_space,
        }
    }

    pub fn slab_size(&self) -> usize {
        2 * self.field_size(FieldLabel::U1) + 2 * self.field_size(FieldLabel::Z1)
    }

    pub fn n_primal(&self) -> usize {
        2 * self.n_slabs * self.field_size(FieldLabel::U1)
    }

    pub fn n_dual(&self) -> usize {
        2 * self.n_slabs * self.field_size(FieldLabel::Z1)
    }

    pub fn total(&self) -> usize {
        self.n_slabs * self.slab_size()
    }

    /// Offset of field `f` inside a slab block.
    pub fn field_offset(&self, f: FieldLabel) -> usize {
        let p = self.field_size(FieldLabel::U1);
        let d = self.field_size(FieldLabel::Z1);
        match f {
            FieldLabel::U1 => 0,
            FieldLabel::U2 => p,
            FieldLabel::Z1 => 2 * p,
            FieldLabel::Z2 => 2 * p + d,
        }
    }

    pub fn offset(&self, slab: usize, f: FieldLabel) -> usize {
        slab * self.slab_size() + self.field_offset(f)
    }

    /// Copies the coefficients of one field out of a global vector.
    pub fn extract(&self, v: &[f64], f: FieldLabel) -> Vec<f64> {
        let n = self.field_size(f);
        (0..self.n_slabs).flat_map(|s| v[self.offset(s, f)..self.offset(s, f) + n].iter().copied()).collect()
    }

    /// Writes field coefficients (slab-major) into a global vector.
    pub fn insert(&self, v: &mut [f64], f: FieldLabel, coeffs: &[f64]) {
        let n = self.field_size(f);
        for s in 0..self.n_slabs {
            v[self.offset(s, f)..self.offset(s, f) + n].copy_from_slice(&coeffs[s * n..(s + 1) * n]);
        }
    }
}

/// Which slabs a term applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabFilter {
    All,
    SkipFirst,
    SkipLast,
}

/// `scale * time ⊗ space` coupling field `row` of slab `s` with field `col`
/// of slab `s + shift`.
#[derive(Debug, Clone, Copy)]
pub struct KronTerm<'a> {
    pub row: FieldLabel,
    pub col: FieldLabel,
    pub shift: isize,
    pub filter: SlabFilter,
    pub time: &'a SmallMat,
    pub space: &'a SparseMatrix,
    pub scale: f64,
}

/// Streams a list of Kronecker terms into one global matrix.
pub fn assemble_terms(layout: &DofLayout, terms: &[KronTerm]) -> Result<SparseMatrix> {
    let n = layout.total();
    let ns = layout.n_slabs;
    for t in terms {
        let (rs, cs) = (layout.space_size(t.row), layout.space_size(t.col));
        if t.space.nrows() != rs || t.space.ncols() != cs {
            return Err(Error::DimensionMismatch { expected: rs, got: t.space.nrows() });
        }
    }
    let mut builder = CsrBuilder::new(n, n);
    for s in 0..ns {
        let slab_row0 = s * layout.slab_size();
        let mut entries = Vec::new();
        for t in terms {
            let active = match t.filter {
                SlabFilter::All => true,
                SlabFilter::SkipFirst => s >= 1,
                SlabFilter::SkipLast => s + 1 < ns,
            };
            let cs = s as isize + t.shift;
            if !active || cs < 0 || cs >= ns as isize {
                continue;
            }
            let row0 = layout.offset(s, t.row) - slab_row0;
            let col0 = layout.offset(cs as usize, t.col);
            let (nr, nc) = (layout.space_size(t.row), layout.space_size(t.col));
            for a in 0..t.time.rows {
                for b in 0..t.time.cols {
                    let tv = t.scale * t.time.get(a, b);
                    if tv == 0.0 {
                        continue;
                    }
                    let (r0, c0) = (row0 + a * nr, col0 + b * nc);
                    for (i, j, v) in t.space.iter() {
                        entries.push(((r0 + i) as u32, (c0 + j) as u32, tv * v));
                    }
                }
            }
        }
        builder.append_rows(layout.slab_size(), entries)?;
    }
    builder.finish()
}

/// Spatial matrices on the primal space `V` (degree k) and dual space `V*`.
///
/// Naming: `pp` = rows and columns primal, `dp` = dual rows, primal columns,
/// `dd` = dual rows and columns.
#[derive(Debug, Clone)]
pub struct SpatialOperators {
    pub mass_pp: SparseMatrix,
    pub mass_omega_pp: SparseMatrix,
    /// `int c^4 ∇φ_j·∇φ_i`
    pub stiff_c4_pp: SparseMatrix,
    /// facet jumps of the normal flux `c^2 ∇φ·n`, weighted by facet h
    pub flux_jump_pp: SparseMatrix,
    /// `h_K^2 int (c^2 Δφ_j)(c^2 Δφ_i)`
    pub gls_lap_lap_pp: SparseMatrix,
    /// `h_K^2 int (c^2 Δφ_j) φ_i`
    pub gls_lap_val_pp: SparseMatrix,
    /// `h_K^2 int φ_j φ_i`
    pub gls_mass_pp: SparseMatrix,
    /// `h^{-1} int_{∂Ω} φ_j φ_i`
    pub boundary_pp: SparseMatrix,
    pub mass_dp: SparseMatrix,
    /// `int c^2 ∇φ_j·∇ψ_i`
    pub stiff_dp: SparseMatrix,
    /// `int_{∂Ω} (c^2 ∇φ_j·n) ψ_i`
    pub flux_boundary_dp: SparseMatrix,
    pub mass_dd: SparseMatrix,
    pub stiff_dd: SparseMatrix,
    pub boundary_dd: SparseMatrix,
}

/// Per-cell coefficient data shared by all spatial forms.
#[derive(Debug, Clone)]
pub struct CellData {
    pub c2: Vec<f64>,
    pub h: Vec<f64>,
    pub in_omega: Vec<bool>,
}

impl CellData {
    pub fn new(mesh: &SpatialMesh, c2: Vec<f64>, in_omega: Vec<bool>) -> Result<Self> {
        let n = mesh.n_cells();
        if c2.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c2.len() });
        }
        if in_omega.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: in_omega.len() });
        }
        Ok(CellData { c2, h: (0..n).map(|c| mesh.cell_h(c)).collect(), in_omega })
    }
}

fn cell_form(
    rs: &SpatialSpace,
    cs: &SpatialSpace,
    nq: usize,
    mut f: impl FnMut(usize, &LocalBasis, usize, &LocalBasis, usize) -> f64,
    include: impl Fn(usize) -> bool,
) -> Result<SparseMatrix> {
    let mesh = rs.mesh();
    let dim = mesh.dim();
    let g = gauss(nq);
    let rule = cell_rule(&vec![g; dim]);
    let (mut rb, mut cb) = (rs.new_local(), cs.new_local());
    let mut trip = Vec::new();
    for c in 0..mesh.n_cells() {
        if !include(c) {
            continue;
        }
        let (rd, cd) = (rs.cell_dofs(c), cs.cell_dofs(c));
        let meas = mesh.cell_measure(c);
        let mut local = vec![0.0; rd.len() * cd.len()];
        for q in 0..rule.weights.len() {
            let p = rule.point(q);
            let xi = [p[0], if dim == 2 { p[1] } else { 0.0 }];
            rs.eval_local(c, xi, &mut rb);
            cs.eval_local(c, xi, &mut cb);
            let w = rule.weights[q] * meas;
            for i in 0..rd.len() {
                for j in 0..cd.len() {
                    local[i * cd.len() + j] += w * f(c, &rb, i, &cb, j);
                }
            }
        }
        for i in 0..rd.len() {
            for j in 0..cd.len() {
                trip.push((rd[i], cd[j], local[i * cd.len() + j]));
            }
        }
    }
    SparseMatrix::from_triplets(rs.n_dofs(), cs.n_dofs(), &trip)
}

/// Quadrature points on a facet `xi[axis] = side` of the reference cell.
fn facet_points(dim: usize, axis: usize, side: f64, nq: usize) -> Vec<([f64; 2], f64)> {
    if dim == 1 {
        return vec![([side, 0.0], 1.0)];
    }
    let g = gauss(nq);
    g.points
        .iter()
        .zip(&g.weights)
        .map(|(&s, &w)| {
            let mut xi = [0.0; 2];
            xi[axis] = side;
            xi[1 - axis] = s;
            (xi, w)
        })
        .collect()
}

fn boundary_form(
    rs: &SpatialSpace,
    cs: &SpatialSpace,
    nq: usize,
    mut f: impl FnMut(usize, usize, f64, &LocalBasis, usize, &LocalBasis, usize) -> f64,
) -> Result<SparseMatrix> {
    let mesh = rs.mesh();
    let (mut rb, mut cb) = (rs.new_local(), cs.new_local());
    let mut trip = Vec::new();
    for bf in mesh.boundary_facets() {
        let c = bf.cell;
        let (rd, cd) = (rs.cell_dofs(c), cs.cell_dofs(c));
        let side = if bf.outward > 0.0 { 1.0 } else { 0.0 };
        let meas = mesh.facet_measure(bf.normal_axis, c);
        for (xi, w) in facet_points(mesh.dim(), bf.normal_axis, side, nq) {
            rs.eval_local(c, xi, &mut rb);
            cs.eval_local(c, xi, &mut cb);
            for i in 0..rd.len() {
                for j in 0..cd.len() {
                    let v = f(c, bf.normal_axis, bf.outward, &rb, i, &cb, j);
                    trip.push((rd[i], cd[j], w * meas * v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(rs.n_dofs(), cs.n_dofs(), &trip)
}

/// `sum_F h_F int_F [c^2 ∇u·n][c^2 ∇w·n]` over interior facets, including
/// interfaces between media.
pub fn flux_jump_matrix(space: &SpatialSpace, cells: &CellData) -> Result<SparseMatrix> {
    let mesh = space.mesh();
    let nq = space.degree() + 2;
    let (mut bm, mut bp) = (space.new_local(), space.new_local());
    let mut trip = Vec::new();
    for f in mesh.interior_facets() {
        let a = f.normal_axis;
        let (dm, dp) = (space.cell_dofs(f.minus), space.cell_dofs(f.plus));
        let hf = 0.5 * (cells.h[f.minus] + cells.h[f.plus]);
        let meas = mesh.facet_measure(a, f.minus);
        let pts_m = facet_points(mesh.dim(), a, 1.0, nq);
        let pts_p = facet_points(mesh.dim(), a, 0.0, nq);
        for ((xm, w), (xp, _)) in pts_m.into_iter().zip(pts_p) {
            space.eval_local(f.minus, xm, &mut bm);
            space.eval_local(f.plus, xp, &mut bp);
            let mut dofs = Vec::with_capacity(dm.len() + dp.len());
            let mut jump = Vec::with_capacity(dm.len() + dp.len());
            for l in 0..dm.len() {
                dofs.push(dm[l]);
                jump.push(-cells.c2[f.minus] * bm.grad[l][a]);
            }
            for l in 0..dp.len() {
                dofs.push(dp[l]);
                jump.push(cells.c2[f.plus] * bp.grad[l][a]);
            }
            for i in 0..dofs.len() {
                for j in 0..dofs.len() {
                    trip.push((dofs[i], dofs[j], hf * w * meas * jump[i] * jump[j]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(space.n_dofs(), space.n_dofs(), &trip)
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl SpatialOperators {
    pub fn new(primal: &SpatialSpace, dual: &SpatialSpace, cells: &CellData) -> Result<Self> {
        let nq = primal.degree().max(dual.degree()) + 2;
        let (p, d) = (primal, dual);
        let c2 = &cells.c2;
        let h = &cells.h;
        let all = |_: usize| true;
        Ok(SpatialOperators {
            mass_pp: cell_form(p, p, nq, |_, r, i, c, j| r.val[i] * c.val[j], all)?,
            mass_omega_pp: cell_form(p, p, nq, |_, r, i, c, j| r.val[i] * c.val[j], |c| cells.in_omega[c])?,
            stiff_c4_pp: cell_form(
                p,
                p,
                nq,
                |k, r, i, c, j| c2[k] * c2[k] * dot2(r.grad[i], c.grad[j]),
                all,
            )?,
            flux_jump_pp: flux_jump_matrix(p, cells)?,
            gls_lap_lap_pp: cell_form(
                p,
                p,
                nq,
                |k, r, i, c, j| h[k] * h[k] * c2[k] * c2[k] * r.lap[i] * c.lap[j],
                all,
            )?,
            gls_lap_val_pp: cell_form(p, p, nq, |k, r, i, c, j| h[k] * h[k] * c2[k] * c.lap[j] * r.val[i], all)?,
            gls_mass_pp: cell_form(p, p, nq, |k, r, i, c, j| h[k] * h[k] * r.val[i] * c.val[j], all)?,
            boundary_pp: boundary_form(p, p, nq, |k, _, _, r, i, c, j| r.val[i] * c.val[j] / h[k])?,
            mass_dp: cell_form(d, p, nq, |_, r, i, c, j| r.val[i] * c.val[j], all)?,
            stiff_dp: cell_form(d, p, nq, |k, r, i, c, j| c2[k] * dot2(r.grad[i], c.grad[j]), all)?,
            flux_boundary_dp: boundary_form(d, p, nq, |k, a, n, r, i, c, j| c2[k] * c.grad[j][a] * n * r.val[i])?,
            mass_dd: cell_form(d, d, nq, |_, r, i, c, j| r.val[i] * c.val[j], all)?,
            stiff_dd: cell_form(d, d, nq, |k, r, i, c, j| c2[k] * dot2(r.grad[i], c.grad[j]), all)?,
            boundary_dd: boundary_form(d, d, nq, |k, _, _, r, i, c, j| r.val[i] * c.val[j] / h[k])?,
        })
    }
}

/// Time matrices for every pairing of primal and dual bases, plus endpoint
/// couplings for the jump terms.
#[derive(Debug, Clone)]
struct TimeOperators {
    pp: TimePair,
    pp_deriv_t: SmallMat,
    dp: TimePair,
    dd: TimePair,
    start_start: SmallMat,
    end_end: SmallMat,
    start_end: SmallMat,
    end_start: SmallMat,
}

impl TimeOperators {
    fn new(primal: &TimeBasis, dual: &TimeBasis, dt: f64) -> Self {
        let pp = TimePair::new(primal, primal, dt);
        let e0 = primal.values(0.0);
        let e1 = primal.values(1.0);
        TimeOperators {
            pp_deriv_t: pp.deriv.transpose(),
            pp,
            dp: TimePair::new(dual, primal, dt),
            dd: TimePair::new(dual, dual, dt),
            start_start: SmallMat::outer(&e0, &e0),
            end_end: SmallMat::outer(&e1, &e1),
            start_end: SmallMat::outer(&e0, &e1),
            end_start: SmallMat::outer(&e1, &e0),
        }
    }
}

/// Multipliers of the individual terms of the discrete Lagrangian. All
/// default to one, which is the formulation as stated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub data: f64,
    pub flux_jump: f64,
    pub least_squares: f64,
    pub velocity: f64,
    pub boundary: f64,
    pub time_jump: f64,
    pub dual: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            data: 1.0,
            flux_jump: 1.0,
            least_squares: 1.0,
            velocity: 1.0,
            boundary: 1.0,
            time_jump: 1.0,
            dual: 1.0,
        }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.data,
            self.flux_jump,
            self.least_squares,
            self.velocity,
            self.boundary,
            self.time_jump,
            self.dual,
        ];
        if all.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return domain(format!("stabilization weights must be positive, got {self:?}"));
        }
        Ok(())
    }
}

/// The assembled system `[K A^T; A -S*] x = b`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub layout: DofLayout,
}

/// Holds spaces, coefficients and precomputed one-slab operators, and
/// produces the global blocks.
#[derive(Debug, Clone)]
pub struct Assembler {
    pub primal: SpaceTimeSpace,
    pub dual: SpaceTimeSpace,
    pub cells: CellData,
    pub layout: DofLayout,
    pub spatial: SpatialOperators,
    pub weights: Weights,
    time: TimeOperators,
    transposed: Transposed,
    jump_u1: SparseMatrix,
    jump_u2: SparseMatrix,
}

#[derive(Debug, Clone)]
struct Transposed {
    gls_lap_val: SparseMatrix,
    mass_dp: SparseMatrix,
    constraint_u1: SparseMatrix,
    dp_mass: SmallMat,
    dp_deriv: SmallMat,
}

use FieldLabel::{U1, U2, Z1, Z2};

impl Assembler {
    pub fn new(primal: SpaceTimeSpace, dual: SpaceTimeSpace, cells: CellData) -> Result<Self> {
        if !Arc::ptr_eq(primal.spatial.mesh_arc(), dual.spatial.mesh_arc()) {
            return domain("primal and dual spaces must share one mesh");
        }
        if primal.partition != dual.partition {
            return domain("primal and dual spaces must share one time partition");
        }
        let dt = primal.partition.dt;
        let spatial = SpatialOperators::new(&primal.spatial, &dual.spatial, &cells)?;
        let time = TimeOperators::new(&primal.time, &dual.time, dt);
        let layout = DofLayout {
            n_slabs: primal.n_slabs(),
            primal_time: primal.time.n(),
            primal_space: primal.spatial.n_dofs(),
            dual_time: dual.time.n(),
            dual_space: dual.spatial.n_dofs(),
        };
        let constraint_u1 = spatial.stiff_dp.add(&spatial.flux_boundary_dp, -1.0)?;
        let transposed = Transposed {
            gls_lap_val: spatial.gls_lap_val_pp.transpose(),
            mass_dp: spatial.mass_dp.transpose(),
            constraint_u1: constraint_u1.transpose(),
            dp_mass: time.dp.mass.transpose(),
            dp_deriv: time.dp.deriv.transpose(),
        };
        let jump_u1 = spatial.mass_pp.scaled(1.0 / dt).add(&spatial.stiff_c4_pp, dt)?;
        let jump_u2 = spatial.mass_pp.scaled(1.0 / dt);
        Ok(Assembler { primal, dual, cells, layout, spatial, weights: Weights::default(), time, transposed, jump_u1, jump_u2 })
    }

    pub fn with_weights(mut self, weights: Weights) -> Result<Self> {
        weights.validate()?;
        self.weights = weights;
        Ok(self)
    }

    fn weighted(mut terms: Vec<KronTerm<'_>>, w: f64) -> Vec<KronTerm<'_>> {
        for t in &mut terms {
            t.scale *= w;
        }
        terms
    }

    fn term<'a>(
        &'a self,
        row: FieldLabel,
        col: FieldLabel,
        time: &'a SmallMat,
        space: &'a SparseMatrix,
        scale: f64,
    ) -> KronTerm<'a> {
        KronTerm { row, col, shift: 0, filter: SlabFilter::All, time, space, scale }
    }

    /// Terms of `A[U, Y]` (dual rows, primal columns); `with_transpose` adds
    /// the mirrored primal-row block.
    pub fn constraint_terms(&self, with_transpose: bool) -> Vec<KronTerm<'_>> {
        let s = &self.spatial;
        let t = &self.time.dp;
        let tr = &self.transposed;
        let mut out = vec![
            self.term(Z1, U2, &t.deriv, &s.mass_dp, 1.0),
            self.term(Z2, U1, &t.deriv, &s.mass_dp, 1.0),
            self.term(Z2, U2, &t.mass, &s.mass_dp, -1.0),
        ];
        let u1_term = KronTerm { row: Z1, col: U1, shift: 0, filter: SlabFilter::All, time: &t.mass, space: &s.stiff_dp, scale: 1.0 };
        out.push(u1_term);
        out.push(KronTerm { space: &s.flux_boundary_dp, scale: -1.0, ..u1_term });
        if with_transpose {
            out.extend([
                self.term(U2, Z1, &tr.dp_deriv, &tr.mass_dp, 1.0),
                self.term(U1, Z2, &tr.dp_deriv, &tr.mass_dp, 1.0),
                self.term(U2, Z2, &tr.dp_mass, &tr.mass_dp, -1.0),
                self.term(U1, Z1, &tr.dp_mass, &tr.constraint_u1, 1.0),
            ]);
        }
        out
    }

    /// Flux-jump penalty `J`.
    pub fn flux_jump_terms(&self) -> Vec<KronTerm<'_>> {
        let t = vec![self.term(U1, U1, &self.time.pp.mass, &self.spatial.flux_jump_pp, 1.0)];
        Self::weighted(t, self.weights.flux_jump)
    }

    /// Least-squares residual of the first-order system on each cell, `G`.
    pub fn least_squares_terms(&self) -> Vec<KronTerm<'_>> {
        let s = &self.spatial;
        let t = &self.time.pp;
        let v = vec![
            self.term(U1, U1, &t.mass, &s.gls_lap_lap_pp, 1.0),
            self.term(U2, U2, &t.stiff, &s.gls_mass_pp, 1.0),
            self.term(U2, U1, &self.time.pp_deriv_t, &s.gls_lap_val_pp, -1.0),
            self.term(U1, U2, &t.deriv, &self.transposed.gls_lap_val, -1.0),
        ];
        Self::weighted(v, self.weights.least_squares)
    }

    /// Velocity consistency `(u2 - ∂t u1, w2 - ∂t w1)`, `I0`.
    pub fn velocity_terms(&self) -> Vec<KronTerm<'_>> {
        let s = &self.spatial;
        let t = &self.time.pp;
        let v = vec![
            self.term(U2, U2, &t.mass, &s.mass_pp, 1.0),
            self.term(U1, U1, &t.stiff, &s.mass_pp, 1.0),
            self.term(U2, U1, &t.deriv, &s.mass_pp, -1.0),
            self.term(U1, U2, &self.time.pp_deriv_t, &s.mass_pp, -1.0),
        ];
        Self::weighted(v, self.weights.velocity)
    }

    /// Boundary penalty `R`.
    pub fn boundary_terms(&self) -> Vec<KronTerm<'_>> {
        let t = vec![self.term(U1, U1, &self.time.pp.mass, &self.spatial.boundary_pp, 1.0)];
        Self::weighted(t, self.weights.boundary)
    }

    /// `S_h = J + G + I0 + R`.
    pub fn primal_stabilizer_terms(&self) -> Vec<KronTerm<'_>> {
        let mut v = self.flux_jump_terms();
        v.extend(self.least_squares_terms());
        v.extend(self.velocity_terms());
        v.extend(self.boundary_terms());
        v
    }

    /// Jumps between consecutive slabs, `S↑↓`.
    pub fn time_jump_terms(&self) -> Vec<KronTerm<'_>> {
        let t = &self.time;
        let mut out = vec![];
        for (f, s) in [(U1, &self.jump_u1), (U2, &self.jump_u2)] {
            let base = KronTerm { row: f, col: f, shift: 0, filter: SlabFilter::SkipFirst, time: &t.start_start, space: s, scale: 1.0 };
            out.push(base);
            out.push(KronTerm { filter: SlabFilter::SkipLast, time: &t.end_end, ..base });
            out.push(KronTerm { shift: -1, time: &t.start_end, scale: -1.0, ..base });
            out.push(KronTerm { shift: 1, filter: SlabFilter::SkipLast, time: &t.end_start, scale: -1.0, ..base });
        }
        Self::weighted(out, self.weights.time_jump)
    }

    /// Data mass `(u1, w1)_{ω_T}`.
    pub fn data_mass_terms(&self) -> Vec<KronTerm<'_>> {
        let t = vec![self.term(U1, U1, &self.time.pp.mass, &self.spatial.mass_omega_pp, 1.0)];
        Self::weighted(t, self.weights.data)
    }

    /// Dual stabilizer `S*` with positive sign.
    pub fn dual_stabilizer_terms(&self, scale: f64) -> Vec<KronTerm<'_>> {
        let s = &self.spatial;
        let t = &self.time.dd.mass;
        let scale = scale * self.weights.dual;
        vec![
            self.term(Z1, Z1, t, &s.mass_dd, scale),
            self.term(Z1, Z1, t, &s.stiff_dd, scale),
            self.term(Z1, Z1, t, &s.boundary_dd, scale),
            self.term(Z2, Z2, t, &s.mass_dd, scale),
        ]
    }

    pub fn assemble(&self, terms: &[KronTerm]) -> Result<SparseMatrix> {
        assemble_terms(&self.layout, terms)
    }

    pub fn assemble_constraint(&self) -> Result<SparseMatrix> {
        self.assemble(&self.constraint_terms(false))
    }

    pub fn assemble_primal_stabilizer(&self) -> Result<SparseMatrix> {
        self.assemble(&self.primal_stabilizer_terms())
    }

    pub fn assemble_dual_stabilizer(&self) -> Result<SparseMatrix> {
        self.assemble(&self.dual_stabilizer_terms(1.0))
    }

    pub fn assemble_time_jump_stabilizer(&self) -> Result<SparseMatrix> {
        self.assemble(&self.time_jump_terms())
    }

    pub fn assemble_data_mass(&self) -> Result<SparseMatrix> {
        self.assemble(&self.data_mass_terms())
    }

    /// The full symmetric indefinite matrix.
    pub fn assemble_matrix(&self) -> Result<SparseMatrix> {
        let mut terms = self.data_mass_terms();
        terms.extend(self.primal_stabilizer_terms());
        terms.extend(self.time_jump_terms());
        terms.extend(self.constraint_terms(true));
        terms.extend(self.dual_stabilizer_terms(-1.0));
        self.assemble(&terms)
    }

    /// `(u_ω, w1)_{ω_T}` with elevated quadrature; `data` is only sampled in
    /// cells inside `ω`.
    pub fn data_rhs(&self, data: impl Fn(f64, &[f64]) -> f64) -> Vec<f64> {
        let space = &self.primal.spatial;
        let mesh = space.mesh();
        let dim = mesh.dim();
        let rule = cell_rule(&vec![gauss(space.degree() + 6); dim]);
        let mut rhs = vec![0.0; self.layout.total()];
        let mut b = space.new_local();
        for c in (0..mesh.n_cells()).filter(|&c| self.cells.in_omega[c]) {
            let dofs = space.cell_dofs(c);
            let meas = mesh.cell_measure(c);
            let mut pts = Vec::with_capacity(rule.weights.len());
            for q in 0..rule.weights.len() {
                let p = rule.point(q);
                let xi = [p[0], if dim == 2 { p[1] } else { 0.0 }];
                space.eval_local(c, xi, &mut b);
                pts.push((space.map_to_cell(c, xi), rule.weights[q] * meas, b.val.clone()));
            }
            self.accumulate_time(&mut rhs, &dofs, &pts, &data, self.weights.data);
        }
        rhs
    }

    /// `h^{-1} (g, w1)_Σ` for boundary data `g`.
    pub fn boundary_rhs(&self, g: impl Fn(f64, &[f64]) -> f64) -> Vec<f64> {
        let space = &self.primal.spatial;
        let mesh = space.mesh();
        let mut rhs = vec![0.0; self.layout.total()];
        let mut b = space.new_local();
        for bf in mesh.boundary_facets() {
            let c = bf.cell;
            let dofs = space.cell_dofs(c);
            let side = if bf.outward > 0.0 { 1.0 } else { 0.0 };
            let scale = mesh.facet_measure(bf.normal_axis, c) / self.cells.h[c];
            let pts: Vec<_> = facet_points(mesh.dim(), bf.normal_axis, side, space.degree() + 6)
                .into_iter()
                .map(|(xi, w)| {
                    space.eval_local(c, xi, &mut b);
                    (space.map_to_cell(c, xi), w * scale, b.val.clone())
                })
                .collect();
            self.accumulate_time(&mut rhs, &dofs, &pts, &g, self.weights.boundary);
        }
        rhs
    }

    fn accumulate_time(
        &self,
        rhs: &mut [f64],
        dofs: &[usize],
        pts: &[([f64; 2], f64, Vec<f64>)],
        f: &impl Fn(f64, &[f64]) -> f64,
        weight: f64,
    ) {
        let tb = &self.primal.time;
        let tr = gauss(tb.n() + 6);
        let part = &self.primal.partition;
        let dim = self.primal.spatial.dim();
        let nv = self.layout.primal_space;
        for s in 0..self.layout.n_slabs {
            let off = self.layout.offset(s, U1);
            for (&tau, &wt) in tr.points.iter().zip(&tr.weights) {
                let t = part.slab_start(s) + tau * part.dt;
                let theta = tb.values(tau);
                for (x, w, val) in pts {
                    let fv = weight * f(t, &x[..dim]) * w * wt * part.dt;
                    for (a, th) in theta.iter().enumerate() {
                        for (l, &d) in dofs.iter().enumerate() {
                            rhs[off + a * nv + d] += fv * th * val[l];
                        }
                    }
                }
            }
        }
    }
}

/// Assembles matrix and right-hand side for measurements `data` on `ω_T` and
/// boundary values `g`.
pub fn assemble_system(
    asm: &Assembler,
    data: impl Fn(f64, &[f64]) -> f64,
    g: impl Fn(f64, &[f64]) -> f64,
) -> Result<SaddleSystem> {
    let matrix = asm.assemble_matrix()?;
    let mut rhs = asm.data_rhs(data);
    for (r, b) in rhs.iter_mut().zip(asm.boundary_rhs(g)) {
        *r += b;
    }
    Ok(SaddleSystem { matrix, rhs, layout: asm.layout })
}
