//! Compressed sparse row storage with deterministic assembly.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Real CSR matrix. Column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from unordered `(row, col, value)` triplets; duplicates are
    /// summed in input order and exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut b = CsrBuilder::new(nrows, ncols);
        let entries = triplets
            .iter()
            .map(|&(r, c, v)| {
                if r >= nrows || c >= ncols {
                    return Err(Error::DimensionMismatch { expected: nrows.max(ncols), got: r.max(c) });
                }
                Ok((r as u32, c as u32, v))
            })
            .collect::<Result<Vec<_>>>()?;
        b.append_rows(nrows, entries)?;
        b.finish()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut t = vec![];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                t.push((i, j, v));
            }
        }
        Self::from_triplets(rows.len(), ncols, &t).expect("dense rows have consistent shape")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().zip(&self.values[range]).map(|(&c, &v)| (c as usize, v))
    }

    /// All stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: x.len() });
        }
        Ok((0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect())
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: x.len() });
        }
        Ok(self.mul_vec(y)?.iter().zip(x).map(|(a, b)| a * b).sum())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            count[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            count[i + 1] += count[i];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                let k = next[c];
                col_idx[k] = r as u32;
                values[k] = v;
                next[c] += 1;
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    pub fn scaled(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `self + alpha * other`.
    pub fn add(&self, other: &SparseMatrix, alpha: f64) -> Result<SparseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: other.nrows });
        }
        let mut b = CsrBuilder::new(self.nrows, self.ncols);
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        entries.extend(self.iter().map(|(r, c, v)| (r as u32, c as u32, v)));
        entries.extend(other.iter().map(|(r, c, v)| (r as u32, c as u32, alpha * v)));
        b.append_rows(self.nrows, entries)?;
        b.finish()
    }

    /// `max |A - A^T| / max |A|`.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - t.get(r, c)).abs());
            }
            for (c, v) in t.row(r) {
                worst = worst.max((v - self.get(r, c)).abs());
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            d[r][c] = v;
        }
        d
    }

    /// Writes `row col value` lines (zero-based) preceded by a size header.
    pub fn write_coo(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(f, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}

/// Builds a CSR matrix from consecutive blocks of rows.
///
/// Each block is sorted and merged independently, so the result depends only
/// on the order entries are pushed, not on any hashing or threading.
#[derive(Debug)]
pub struct CsrBuilder {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CsrBuilder { nrows, ncols, row_ptr: vec![0], col_idx: vec![], values: vec![] }
    }

    pub fn rows_done(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Appends `n_rows` rows; entry rows are relative to the first new row.
    pub fn append_rows(&mut self, n_rows: usize, mut entries: Vec<(u32, u32, f64)>) -> Result<()> {
        if self.rows_done() + n_rows > self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: self.rows_done() + n_rows });
        }
        if let Some(&(r, c, _)) = entries.iter().find(|e| e.0 as usize >= n_rows || e.1 as usize >= self.ncols) {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: (r as usize).max(c as usize) });
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut k = 0;
        for r in 0..n_rows as u32 {
            while k < entries.len() && entries[k].0 == r {
                let c = entries[k].1;
                let mut v = 0.0;
                while k < entries.len() && entries[k].0 == r && entries[k].1 == c {
                    v += entries[k].2;
                    k += 1;
                }
                if v != 0.0 {
                    self.col_idx.push(c);
                    self.values.push(v);
                }
            }
            self.row_ptr.push(self.col_idx.len());
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<SparseMatrix> {
        while self.rows_done() < self.nrows {
            self.row_ptr.push(self.col_idx.len());
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
        })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_and_get() {
        let m = SparseMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, 0.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]).unwrap(), vec![2.0, 3.0]);
        assert!(m.mul_vec(&[1.0]).is_err());
        assert!(SparseMatrix::from_triplets(1, 1, &[(1, 0, 1.0)]).is_err());
    }

    #[test]
    fn transpose_and_symmetry() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![0.0, 5.0]]);
        let t = m.transpose();
        assert_eq!(t.to_dense(), vec![vec![1.0, 3.0, 0.0], vec![2.0, 4.0, 5.0]]);
        assert_eq!(t.transpose(), m);
        let s = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(s.symmetry_defect(), 0.0);
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![1.0, 4.0]]);
        assert!((a.symmetry_defect() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn add_and_builder_blocks() {
        let a = SparseMatrix::identity(3);
        let b = a.add(&a, -1.0).unwrap();
        assert_eq!(b.nnz(), 0);
        let mut bld = CsrBuilder::new(3, 3);
        bld.append_rows(1, vec![(0, 2, 1.0)]).unwrap();
        bld.append_rows(1, vec![]).unwrap();
        let m = bld.finish().unwrap();
        assert_eq!(m.get(0, 2), 1.0);
        assert_eq!(m.row(2).count(), 0);
        assert!((m.bilinear(&[1.0, 0.0, 0.0], &[0.0, 0.0, 3.0]).unwrap() - 3.0).abs() < 1e-15);
    }
}
