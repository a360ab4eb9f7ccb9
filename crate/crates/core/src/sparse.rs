//! Per-element eSNR sparsification and compressed-row products.
//!
//! An entry `H(m, m')` is kept when its effective SNR
//! `10·log10(|H(m, m')|² / N0)` reaches the threshold. Each nonzero row also
//! keeps its largest-magnitude entry, whatever its eSNR, so the sparsified
//! operator never gains an all-zero row.

use std::io::{self, Write};

use crate::io::write_coordinate_csv;
use crate::{Complex64, ComplexMatrix, ComplexVector, Error, Result};

/// Threshold used when none is configured.
pub const DEFAULT_THRESHOLD_DB: f64 = -12.0;

/// Real floating-point operations charged for one complex multiply-add.
pub const FLOPS_PER_CMAC: u64 = 8;

/// Running count of real floating-point operations, owned by one solver run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FlopCounter(u64);

impl FlopCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn add(&mut self, flops: u64) {
        self.0 += flops;
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

/// Compressed-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChannelMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseChannelMatrix {
    /// Builds from per-row `(column, value)` lists. Columns must be strictly
    /// increasing within a row and values nonzero.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, Complex64)>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, row) in rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(c, v) in row {
                if c >= cols {
                    return Err(Error::IndexOutOfRange { index: c, size: cols });
                }
                if prev.is_some_and(|p| c <= p) {
                    return Err(Error::InvalidParameter(format!(
                        "row {r}: column indices must be strictly increasing"
                    )));
                }
                if v.norm_sqr() == 0.0 {
                    return Err(Error::InvalidParameter(format!("row {r}: explicit zero at column {c}")));
                }
                prev = Some(c);
                col_indices.push(c);
                values.push(v);
            }
            row_ptr.push(col_indices.len());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            row_ptr,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values stored for row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Stored entries as `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// `S·x`; charges `8·nnz` flops.
    pub fn spmv(&self, x: &ComplexVector, flops: &mut FlopCounter) -> Result<ComplexVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut y = ComplexVector::zeros(self.rows);
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        flops.add(FLOPS_PER_CMAC * self.nnz() as u64);
        Ok(y)
    }

    /// `S^H·x`; charges `8·nnz` flops.
    pub fn adjoint_spmv(&self, x: &ComplexVector, flops: &mut FlopCounter) -> Result<ComplexVector> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: x.len(),
            });
        }
        let mut y = ComplexVector::zeros(self.cols);
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            let xr = x[r];
            for (&c, v) in cols.iter().zip(vals) {
                y[c] += v.conj() * xr;
            }
        }
        flops.add(FLOPS_PER_CMAC * self.nnz() as u64);
        Ok(y)
    }

    /// `Σ_r |S(r, c)|²` for every column `c`.
    pub fn column_norms_sqr(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (&c, v) in self.col_indices.iter().zip(&self.values) {
            out[c] += v.norm_sqr();
        }
        out
    }

    /// Coordinate-format CSV, `row,col,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_coordinate_csv(out, self.entries())
    }
}

/// `10·log10(|value|² / N0)` in dB; `-∞` for a zero value.
pub fn element_esnr(value: Complex64, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    Ok(10.0 * (value.norm_sqr() / noise_power).log10())
}

/// Keeps the entries of `h` whose eSNR is at least `threshold_db`, plus each
/// row's largest-magnitude entry.
pub fn sparsify(h: &ComplexMatrix, threshold_db: f64, noise_power: f64) -> Result<SparseChannelMatrix> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    let (rows, cols) = h.shape();
    let mut any_nonzero = false;
    let mut kept = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut row = Vec::new();
        let mut best: Option<(usize, f64)> = None;
        let mut best_kept = false;
        for c in 0..cols {
            let v = h[(r, c)];
            let power = v.norm_sqr();
            if power == 0.0 {
                continue;
            }
            any_nonzero = true;
            let keep = element_esnr(v, noise_power)? >= threshold_db;
            if best.is_none_or(|(_, p)| power > p) {
                best = Some((c, power));
                best_kept = keep;
            }
            if keep {
                row.push((c, v));
            }
        }
        if let (Some((c, _)), false) = (best, best_kept) {
            let pos = row.partition_point(|&(col, _)| col < c);
            row.insert(pos, (c, h[(r, c)]));
        }
        kept.push(row);
    }
    if !any_nonzero {
        return Err(Error::ZeroMatrix);
    }
    SparseChannelMatrix::from_rows(cols, kept)
}
