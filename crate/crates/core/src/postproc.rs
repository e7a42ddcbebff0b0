//! Error norms against reference solutions, L2 best approximation and the
//! discrete norm split into its parts.

use crate::assembly::{Assembler, SmallMat};
use crate::error::{Error, Result};
use crate::mesh::TimeSide;
use crate::problem::SpaceTimeFunction;
use crate::quadrature::{gauss_rule, tensor_rule, ProductRule};
use crate::solver;
use crate::space::{DiscreteField, FieldLabel, LocalBasis, SpaceTimeSpace};
use crate::sparse::SparseMatrix;

/// Extra quadrature points beyond the polynomial degree used for errors.
pub const ELEVATION: usize = 6;

/// Errors and diagnostics of one solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub linfty_l2_u: f64,
    pub l2_l2_ut: f64,
    pub best_linfty_l2_u: f64,
    pub best_l2_l2_ut: f64,
    /// L2 error of the right trace at `t = 0` over the whole domain.
    pub t0_l2: f64,
    pub tnorm: TnormComponents,
    pub residual: f64,
}

/// Parts of the discrete norm. Values are squared unless produced by
/// [`TnormComponents::sqrt`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TnormComponents {
    pub primal_stabilizer: f64,
    pub time_jump: f64,
    pub data: f64,
    pub dual: f64,
}

impl TnormComponents {
    pub fn total(&self) -> f64 {
        self.primal_stabilizer + self.time_jump + self.data + self.dual
    }

    pub fn sqrt(&self) -> TnormComponents {
        TnormComponents {
            primal_stabilizer: self.primal_stabilizer.max(0.0).sqrt(),
            time_jump: self.time_jump.max(0.0).sqrt(),
            data: self.data.max(0.0).sqrt(),
            dual: self.dual.max(0.0).sqrt(),
        }
    }
}

/// Quadrature points of one cell with the basis evaluated there.
struct CellSamples {
    cell: usize,
    points: Vec<([f64; 2], f64, LocalBasis)>,
}

fn spatial_rule(space: &SpaceTimeSpace) -> Result<ProductRule> {
    let g = gauss_rule((space.spatial.degree() + ELEVATION).min(20))?;
    tensor_rule(&vec![g; space.spatial.dim()])
}

fn cell_samples(space: &SpaceTimeSpace, region: &[bool]) -> Result<Vec<CellSamples>> {
    let sp = &space.spatial;
    let mesh = sp.mesh();
    if region.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch { expected: mesh.n_cells(), got: region.len() });
    }
    let rule = spatial_rule(space)?;
    let dim = sp.dim();
    let mut out = vec![];
    for c in (0..mesh.n_cells()).filter(|&c| region[c]) {
        let meas = mesh.cell_measure(c);
        let points = (0..rule.weights.len())
            .map(|q| {
                let p = rule.point(q);
                let xi = [p[0], if dim == 2 { p[1] } else { 0.0 }];
                let mut b = sp.new_local();
                sp.eval_local(c, xi, &mut b);
                (sp.map_to_cell(c, xi), rule.weights[q] * meas, b)
            })
            .collect();
        out.push(CellSamples { cell: c, points });
    }
    Ok(out)
}

/// Squared spatial L2 errors of value (and time derivative) at the given
/// reference times of every slab, indexed `[slab][sample]`.
fn squared_errors_at(
    u: &DiscreteField,
    exact: &dyn SpaceTimeFunction,
    region: &[bool],
    taus: &[f64],
    derivative: bool,
) -> Result<Vec<Vec<f64>>> {
    let sp = &u.space;
    let cells = cell_samples(sp, region)?;
    let dim = sp.spatial.dim();
    let part = &sp.partition;
    let mut out = vec![vec![0.0; taus.len()]; sp.n_slabs()];
    for (n, row) in out.iter_mut().enumerate() {
        for (k, &tau) in taus.iter().enumerate() {
            let t = part.slab_start(n) + tau * part.dt;
            let mut acc = 0.0;
            for cs in &cells {
                for (x, w, b) in &cs.points {
                    let v = u.eval_with_basis(n, tau, cs.cell, b);
                    let e = if derivative {
                        v.dt - exact.d_t(t, &x[..dim])
                    } else {
                        v.value - exact.value(t, &x[..dim])
                    };
                    acc += w * e * e;
                }
            }
            row[k] = acc;
        }
    }
    Ok(out)
}

/// Reference times sampled per slab for the sup-in-time norm: the `q + 2`
/// Gauss points plus both endpoints.
pub fn linfty_sample_times(time_degree: usize) -> Vec<f64> {
    let mut taus = vec![0.0];
    taus.extend(gauss_rule(time_degree + 2).expect("small rule").points);
    taus.push(1.0);
    taus
}

/// `max_t |u - u_h|_{L2(region)}` over the sample set of
/// [`linfty_sample_times`].
pub fn error_linfty_l2(u: &DiscreteField, exact: &dyn SpaceTimeFunction, region: &[bool]) -> Result<f64> {
    let taus = linfty_sample_times(u.space.time.degree);
    let sq = squared_errors_at(u, exact, region, &taus, false)?;
    Ok(sq.iter().flatten().fold(0.0f64, |m, &v| m.max(v)).sqrt())
}

/// `|∂t (u - u_h)|_{L2(0,T; L2(region))}` using the slab-interior time
/// derivative.
pub fn error_l2_l2_dt(u: &DiscreteField, exact: &dyn SpaceTimeFunction, region: &[bool]) -> Result<f64> {
    let rule = gauss_rule((u.space.time.degree + ELEVATION).min(20))?;
    let sq = squared_errors_at(u, exact, region, &rule.points, true)?;
    let dt = u.space.partition.dt;
    let total: f64 = sq.iter().map(|row| row.iter().zip(&rule.weights).map(|(e, w)| e * w * dt).sum::<f64>()).sum();
    Ok(total.sqrt())
}

/// Spatial L2 error at time `t`, with `side` choosing the one-sided trace.
pub fn error_l2_at(
    u: &DiscreteField,
    exact: &dyn SpaceTimeFunction,
    region: &[bool],
    t: f64,
    side: TimeSide,
) -> Result<f64> {
    let sp = &u.space;
    let n = sp.partition.locate(t, side)?;
    let tau = ((t - sp.partition.slab_start(n)) / sp.partition.dt).clamp(0.0, 1.0);
    let cells = cell_samples(sp, region)?;
    let dim = sp.spatial.dim();
    let mut acc = 0.0;
    for cs in &cells {
        for (x, w, b) in &cs.points {
            let e = u.eval_with_basis(n, tau, cs.cell, b).value - exact.value(t, &x[..dim]);
            acc += w * e * e;
        }
    }
    Ok(acc.sqrt())
}

/// Spatial L2 norm of `exact` at time `t` over `region`.
pub fn norm_l2_at(space: &SpaceTimeSpace, exact: &dyn SpaceTimeFunction, region: &[bool], t: f64) -> Result<f64> {
    let cells = cell_samples(space, region)?;
    let dim = space.spatial.dim();
    let mut acc = 0.0;
    for cs in &cells {
        for (x, w, _) in &cs.points {
            acc += w * exact.value(t, &x[..dim]).powi(2);
        }
    }
    Ok(acc.sqrt())
}

/// Solves the dense system `m x = b` by Gaussian elimination with partial
/// pivoting; `b` holds several right-hand sides as rows of length `m.rows`.
fn small_solve_columns(m: &SmallMat, rhs: &mut [Vec<f64>]) -> Result<()> {
    let n = m.rows;
    let mut a = m.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs())).unwrap_or(k);
        if a[p * n + k] == 0.0 {
            return Err(Error::Singular { index: k });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            a[i * n + k] = f;
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    for r in rhs.iter_mut() {
        let mut y: Vec<f64> = perm.iter().map(|&p| r[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= a[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= a[i * n + j] * y[j];
            }
            y[i] /= a[i * n + i];
        }
        r.copy_from_slice(&y);
    }
    Ok(())
}

/// Slab-wise space-time L2 projection of `exact` onto `space`.
///
/// On a tensor slab the mass matrix is `M_t ⊗ M_x`, so the projection is
/// `M_x^{-1} R M_t^{-1}` with `R[a][i] = ∫∫ u θ_a φ_i`.
pub fn best_approximation(
    exact: &dyn SpaceTimeFunction,
    space: &SpaceTimeSpace,
    label: FieldLabel,
) -> Result<DiscreteField> {
    let sp = &space.spatial;
    let all = vec![true; sp.mesh().n_cells()];
    let cells = cell_samples(space, &all)?;
    let nv = sp.n_dofs();
    let nt = space.time.n();
    let dim = sp.dim();
    let part = &space.partition;
    let trule = gauss_rule((space.time.degree + ELEVATION).min(20))?;

    let mut mass_trip = vec![];
    for cs in &cells {
        let dofs = sp.cell_dofs(cs.cell);
        for (_, w, b) in &cs.points {
            for i in 0..dofs.len() {
                for j in 0..dofs.len() {
                    mass_trip.push((dofs[i], dofs[j], w * b.val[i] * b.val[j]));
                }
            }
        }
    }
    let mx = SparseMatrix::from_triplets(nv, nv, &mass_trip)?;
    let fact = solver::factor(&mx)?;
    let mut mt = SmallMat::zeros(nt, nt);
    for (&tau, &w) in trule.points.iter().zip(&trule.weights) {
        let th = space.time.values(tau);
        for a in 0..nt {
            for b in 0..nt {
                mt.data[a * nt + b] += w * th[a] * th[b];
            }
        }
    }

    let mut coeffs = Vec::with_capacity(space.n_dofs());
    for n in 0..space.n_slabs() {
        let mut r = vec![vec![0.0; nv]; nt];
        for (&tau, &wt) in trule.points.iter().zip(&trule.weights) {
            let t = part.slab_start(n) + tau * part.dt;
            let th = space.time.values(tau);
            for cs in &cells {
                let dofs = sp.cell_dofs(cs.cell);
                for (x, w, b) in &cs.points {
                    let f = exact.value(t, &x[..dim]) * w * wt;
                    for a in 0..nt {
                        for (l, &d) in dofs.iter().enumerate() {
                            r[a][d] += f * th[a] * b.val[l];
                        }
                    }
                }
            }
        }
        // Spatial solve per time row, then the small time solve per dof.
        for row in r.iter_mut() {
            *row = fact.solve(row)?.x;
        }
        let mut cols: Vec<Vec<f64>> = (0..nv).map(|i| (0..nt).map(|a| r[a][i]).collect()).collect();
        small_solve_columns(&mt, &mut cols)?;
        for a in 0..nt {
            coeffs.extend(cols.iter().map(|c| c[a]));
        }
    }
    DiscreteField::from_coeffs(space.clone(), label, coeffs)
}

/// Splits `v^T M v` for `v = (U, Z)` into the parts of the discrete norm.
pub fn tnorm_components(asm: &Assembler, x: &[f64]) -> Result<TnormComponents> {
    let q = |m: SparseMatrix| m.bilinear(x, x);
    Ok(TnormComponents {
        primal_stabilizer: q(asm.assemble_primal_stabilizer()?)?,
        time_jump: q(asm.assemble_time_jump_stabilizer()?)?,
        data: q(asm.assemble_data_mass()?)?,
        dual: q(asm.assemble_dual_stabilizer()?)?,
    })
}
