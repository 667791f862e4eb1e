//! The centered, degree-normalized adjacency matrix
//!
//! ```text
//! M = sqrt(D/n) * Delta^{-1/2} (A - [d_i d_j / (D - 1)]) Delta^{-1/2}
//! ```
//!
//! stored densely or applied matrix-free as a sparse product plus a rank-1
//! correction `u (u . v) / (D - 1)` with `u_i = sqrt(d_i)`. The rank-1
//! subtraction is optional; it moves at most one eigenvalue.

use std::fmt::Write as _;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;

use crate::confmodel::{Multigraph, SparseRows};
use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

pub const DEFAULT_DENSE_CAP: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Dense,
    Operator,
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Mat<f64>),
    Operator(SparseRows),
}

#[derive(Debug, Clone)]
pub struct LaplacianView {
    degree_sequence: Arc<DegreeSequence>,
    adjacency: Arc<Multigraph>,
    subtract_rank1: bool,
    /// `sqrt(D/n)`
    scale: f64,
    sqrt_degrees: Vec<f64>,
    storage: Storage,
}

fn validate(ds: &DegreeSequence, a: &Multigraph) -> Result<()> {
    if a.n() != ds.n() {
        return Err(Error::DimensionMismatch { expected: ds.n(), actual: a.n() });
    }
    for (row, (&d, sum)) in ds.degrees().iter().zip(a.row_sums()).enumerate() {
        if u64::from(d) != sum {
            return Err(Error::RowSumMismatch { row, expected: u64::from(d), actual: sum });
        }
    }
    Ok(())
}

impl LaplacianView {
    /// Dense `M`, limited to `n <= DEFAULT_DENSE_CAP`.
    pub fn dense(ds: Arc<DegreeSequence>, a: Arc<Multigraph>, subtract_rank1: bool) -> Result<Self> {
        Self::dense_with_cap(ds, a, subtract_rank1, DEFAULT_DENSE_CAP)
    }

    pub fn dense_with_cap(
        ds: Arc<DegreeSequence>,
        a: Arc<Multigraph>,
        subtract_rank1: bool,
        cap: usize,
    ) -> Result<Self> {
        validate(&ds, &a)?;
        let n = ds.n();
        if n > cap {
            return Err(Error::DenseCap { n, cap });
        }
        let scale = ds.sqrt_mean_degree();
        let degrees: Vec<f64> = ds.degrees().iter().map(|&d| f64::from(d)).collect();
        let sqrt_degrees: Vec<f64> = degrees.iter().map(|d| d.sqrt()).collect();
        let centering = if subtract_rank1 { 1.0 / (ds.total() as f64 - 1.0) } else { 0.0 };
        // D = 2 with a single vertex leaves D - 1 = 1, so the divisor is never 0.
        let entry = |i: usize, j: usize, aij: f64| {
            scale * (aij - degrees[i] * degrees[j] * centering) / (sqrt_degrees[i] * sqrt_degrees[j])
        };
        // Upper triangle (column-major: row i <= column j), then mirror.
        let mut m = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            let col = m.col_as_slice_mut(j);
            for (i, x) in col.iter_mut().enumerate().take(j + 1) {
                *x = entry(i, j, 0.0);
            }
        }
        for &(i, j, aij) in a.entries() {
            m[(i, j)] = entry(i, j, f64::from(aij));
        }
        for j in 0..n {
            for i in 0..j {
                m[(j, i)] = m[(i, j)];
            }
        }
        Ok(Self {
            degree_sequence: ds,
            adjacency: a,
            subtract_rank1,
            scale,
            sqrt_degrees,
            storage: Storage::Dense(m),
        })
    }

    /// Matrix-free `M`; any size.
    pub fn operator(ds: Arc<DegreeSequence>, a: Arc<Multigraph>, subtract_rank1: bool) -> Result<Self> {
        validate(&ds, &a)?;
        let rows = a.to_rows();
        Ok(Self {
            scale: ds.sqrt_mean_degree(),
            sqrt_degrees: ds.degrees().iter().map(|&d| f64::from(d).sqrt()).collect(),
            degree_sequence: ds,
            adjacency: a,
            subtract_rank1,
            storage: Storage::Operator(rows),
        })
    }

    pub fn mode(&self) -> Mode {
        match self.storage {
            Storage::Dense(_) => Mode::Dense,
            Storage::Operator(_) => Mode::Operator,
        }
    }

    pub fn n(&self) -> usize {
        self.degree_sequence.n()
    }

    pub fn subtract_rank1(&self) -> bool {
        self.subtract_rank1
    }

    pub fn degree_sequence(&self) -> &DegreeSequence {
        &self.degree_sequence
    }

    pub fn adjacency(&self) -> &Multigraph {
        &self.adjacency
    }

    pub fn dense_matrix(&self) -> Option<&Mat<f64>> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Operator(_) => None,
        }
    }

    /// `M v`. Operator mode costs `O(nnz(A) + n)`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
        }
        let out = match &self.storage {
            Storage::Dense(m) => {
                let mut y = vec![0.0; n];
                y.par_iter_mut().enumerate().for_each(|(i, yi)| {
                    // Column i equals row i by symmetry.
                    let col = m.col_as_slice(i);
                    *yi = col.iter().zip(v).map(|(a, b)| a * b).sum();
                });
                y
            }
            Storage::Operator(rows) => self.apply_sparse(rows, v),
        };
        Ok(out)
    }

    fn apply_sparse(&self, rows: &SparseRows, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let w: Vec<f64> = v.iter().zip(&self.sqrt_degrees).map(|(x, s)| x / s).collect();
        let rank1 = if self.subtract_rank1 {
            let uv: Vec<f64> = v.iter().zip(&self.sqrt_degrees).map(|(x, s)| x * s).collect();
            pairwise_sum(&uv) / (self.degree_sequence.total() as f64 - 1.0)
        } else {
            0.0
        };
        let mut y = vec![0.0; n];
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let acc: f64 = rows.row(i).map(|(j, a)| f64::from(a) * w[j]).sum();
            *yi = self.scale * (acc / self.sqrt_degrees[i] - self.sqrt_degrees[i] * rank1);
        });
        y
    }

    /// Dense matrix as CSV, one row per line.
    pub fn to_csv(&self) -> Result<String> {
        let m = self.dense_matrix().ok_or(Error::WrongMode { expected: "dense" })?;
        let n = self.n();
        let mut out = String::with_capacity(n * n * 8);
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:e}", m[(i, j)]);
            }
            out.push('\n');
        }
        Ok(out)
    }
}
