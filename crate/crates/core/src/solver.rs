//! Sparse direct solution of the assembled system.
//!
//! The default factorization is a supernodal symmetric-indefinite `L B L^T`
//! with Bunch-Kaufman pivoting inside supernodes and an approximate minimum
//! degree ordering. A sparse LU with partial pivoting and column ordering is
//! the fallback. Both come from `faer` and run single-threaded so that
//! repeated solves are bit-identical.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::SolveCore;
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, IntranodeLbltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::{LuError, SupernodalThreshold};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};

use crate::error::{Error, Result};
use crate::sparse::{norm2, SparseMatrix};

/// Residual threshold above which iterative refinement is applied.
pub const REFINE_THRESHOLD: f64 = 1e-10;

/// Residual above which [`solve`] retries with the LU factorization.
pub const FALLBACK_THRESHOLD: f64 = 1e-9;

const MAX_REFINEMENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SymmetricIndefinite,
    Lu,
}

struct Lblt {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    subdiag: Vec<f64>,
    perm_fwd: Vec<usize>,
    perm_inv: Vec<usize>,
}

enum Factors {
    Lblt(Lblt),
    Lu(Lu<usize, f64>),
}

/// Factors of a square sparse matrix, bound to that matrix for residual
/// checks.
pub struct Factorization<'a> {
    matrix: &'a SparseMatrix,
    factors: Factors,
}

impl std::fmt::Debug for Factorization<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.matrix.nrows()).field("method", &self.method()).finish()
    }
}

/// Solution vector with its relative residual `|Mx - b| / |b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub x: Vec<f64>,
    pub residual: f64,
    pub refined: bool,
}

fn check_square(matrix: &SparseMatrix) -> Result<usize> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
    }
    Ok(n)
}

fn factor_lblt(matrix: &SparseMatrix) -> Result<Lblt> {
    let n = check_square(matrix)?;
    // Row r of the upper triangle is column r of the lower one; with a
    // symmetric matrix that is the upper triangle stored by columns.
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0usize);
    let mut row_idx = vec![];
    let mut vals = vec![];
    for r in 0..n {
        for (c, v) in matrix.row(r).filter(|&(c, _)| c <= r) {
            row_idx.push(c);
            vals.push(v);
        }
        col_ptr.push(row_idx.len());
    }
    let sym = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
    let params = CholeskySymbolicParams {
        supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
        ..Default::default()
    };
    let symbolic = factorize_symbolic_cholesky(sym, Side::Upper, SymmetricOrdering::Amd, params)
        .map_err(|e| Error::Solver(format!("symbolic factorization: {e:?}")))?;
    let mut values = vec![0.0; symbolic.len_val()];
    let mut subdiag = vec![0.0; n];
    let mut perm_fwd = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let req = symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(Par::Seq, Default::default());
    let mut mem = MemBuffer::try_new(req).map_err(|_| Error::Solver("out of memory for the factorization".into()))?;
    symbolic.factorize_numeric_intranode_lblt(
        &mut values,
        &mut subdiag,
        &mut perm_fwd,
        &mut perm_inv,
        SparseColMatRef::new(sym, &vals),
        Side::Upper,
        Par::Seq,
        MemStack::new(&mut mem),
        Default::default(),
    );
    if values.iter().chain(&subdiag).any(|v| !v.is_finite()) {
        return Err(Error::Singular { index: n });
    }
    Ok(Lblt { symbolic, values, subdiag, perm_fwd, perm_inv })
}

fn factor_lu(matrix: &SparseMatrix) -> Result<Lu<usize, f64>> {
    let n = check_square(matrix)?;
    // CSR of the transpose is CSC of the matrix.
    let t = matrix.transpose();
    let row_idx: Vec<usize> = t.col_idx().iter().map(|&i| i as usize).collect();
    let symbolic = SymbolicSparseColMatRef::new_checked(n, n, t.row_ptr(), None, &row_idx);
    let csc = SparseColMatRef::new(symbolic, t.values());
    let sym = SymbolicLu::try_new(symbolic).map_err(|e| Error::Solver(format!("symbolic factorization: {e:?}")))?;
    Lu::try_new_with_symbolic(sym, csc).map_err(|e| match e {
        LuError::SymbolicSingular { index } => Error::Singular { index },
        LuError::Generic(g) => Error::Solver(format!("numeric factorization: {g:?}")),
    })
}

/// Symmetric-indefinite factorization of a symmetric matrix, falling back to
/// LU when a pivot breaks down.
pub fn factor(matrix: &SparseMatrix) -> Result<Factorization<'_>> {
    match factor_with(matrix, Method::SymmetricIndefinite) {
        Err(Error::Singular { .. }) => factor_with(matrix, Method::Lu),
        other => other,
    }
}

pub fn factor_with(matrix: &SparseMatrix, method: Method) -> Result<Factorization<'_>> {
    faer::set_global_parallelism(Par::Seq);
    let factors = match method {
        Method::SymmetricIndefinite => Factors::Lblt(factor_lblt(matrix)?),
        Method::Lu => Factors::Lu(factor_lu(matrix)?),
    };
    Ok(Factorization { matrix, factors })
}

impl Factorization<'_> {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn method(&self) -> Method {
        match self.factors {
            Factors::Lblt(_) => Method::SymmetricIndefinite,
            Factors::Lu(_) => Method::Lu,
        }
    }

    fn apply_inverse(&self, b: &mut [f64]) {
        let n = b.len();
        let mat = MatMut::from_column_major_slice_mut(b, n, 1);
        match &self.factors {
            Factors::Lu(lu) => lu.solve_in_place_with_conj(Conj::No, mat),
            Factors::Lblt(f) => {
                let perm = PermRef::new_checked(&f.perm_fwd, &f.perm_inv, n);
                let lblt = IntranodeLbltRef::new(&f.symbolic, &f.values, &f.subdiag, perm);
                let mut mem = MemBuffer::new(f.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
                lblt.solve_in_place_with_conj(Conj::No, mat, Par::Seq, MemStack::new(&mut mem));
            }
        }
    }

    /// `b - Mx` with compensated (doubled-precision) row sums, so that
    /// refinement is not limited by cancellation in the residual itself.
    fn residual(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let m = self.matrix;
        if x.len() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.ncols(), got: x.len() });
        }
        Ok((0..m.nrows())
            .map(|r| {
                let (mut sum, mut comp) = (b[r], 0.0);
                for (c, v) in m.row(r) {
                    let p = v * x[c];
                    let p_err = v.mul_add(x[c], -p);
                    let (s, e) = two_sum(sum, -p);
                    sum = s;
                    comp += e - p_err;
                }
                sum + comp
            })
            .collect())
    }

    /// Solves `M x = b`, with iterative refinement while the relative residual
    /// exceeds [`REFINE_THRESHOLD`].
    pub fn solve(&self, b: &[f64]) -> Result<SolveOutput> {
        if b.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: b.len() });
        }
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(SolveOutput { x: vec![0.0; b.len()], residual: 0.0, refined: false });
        }
        let mut x = b.to_vec();
        self.apply_inverse(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("factorization produced non-finite values (singular matrix?)".into()));
        }
        let mut residual = norm2(&self.residual(&x, b)?) / bnorm;
        let mut refined = false;
        for _ in 0..MAX_REFINEMENTS {
            if residual <= REFINE_THRESHOLD {
                break;
            }
            let mut r = self.residual(&x, b)?;
            self.apply_inverse(&mut r);
            let candidate: Vec<f64> = x.iter().zip(&r).map(|(a, d)| a + d).collect();
            let res2 = norm2(&self.residual(&candidate, b)?) / bnorm;
            if res2 >= residual {
                break;
            }
            x = candidate;
            residual = res2;
            refined = true;
        }
        Ok(SolveOutput { x, residual, refined })
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Factor and solve in one call, retrying with LU if the symmetric
/// factorization leaves a residual above [`FALLBACK_THRESHOLD`].
pub fn solve(matrix: &SparseMatrix, b: &[f64]) -> Result<SolveOutput> {
    let f = factor(matrix)?;
    let out = f.solve(b);
    match out {
        Ok(o) if o.residual <= FALLBACK_THRESHOLD || f.method() == Method::Lu => Ok(o),
        _ => {
            drop(f);
            factor_with(matrix, Method::Lu)?.solve(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, -1.0]]);
        let out = solve(&m, &[3.0, 0.0]).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-14 && (out.x[1] - 1.0).abs() < 1e-14);
        assert!(out.residual < 1e-15);
    }

    #[test]
    fn zero_rhs_and_dimension_check() {
        let m = SparseMatrix::identity(3);
        let f = factor(&m).unwrap();
        assert_eq!(f.solve(&[0.0; 3]).unwrap().x, vec![0.0; 3]);
        assert!(f.solve(&[1.0; 2]).is_err());
        let rect = SparseMatrix::zeros(2, 3);
        assert!(factor(&rect).is_err());
    }

    #[test]
    fn structurally_singular_is_reported() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        match factor(&m) {
            Err(Error::Singular { .. }) | Err(Error::Solver(_)) => {}
            other => {
                let r = other.and_then(|f| f.solve(&[1.0, 1.0]));
                assert!(r.is_err(), "{r:?}");
            }
        }
    }
}
