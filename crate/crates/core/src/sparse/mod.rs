//! Compressed sparse storage, submatrix extraction, triple products, a sparse
//! SPD factorization and PCG.

pub mod chol;
pub mod pcg;

pub use chol::Factorization;
pub use pcg::{pcg, PcgReport};

use crate::error::Error;
use std::io::{BufRead, Write};

/// Symmetric positive-definite sparse matrix in compressed-row form.
///
/// Both triangles are stored; column indices are `u32` (grids are capped so
/// dimensions fit comfortably). Construction is by triplets or by a
/// preallocated pattern plus scatter-add; rows keep sorted column order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpd {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_ind: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseSpd {
    /// Builds from triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, Error> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::Dimension(format!(
                    "triplet ({i},{j}) outside {dim}x{dim} matrix"
                )));
            }
            entries.push((i, j, v));
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_ind: Vec<u32> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        row_ptr.push(0);
        let mut cur_row = 0usize;
        for (i, j, v) in entries {
            while cur_row < i {
                row_ptr.push(col_ind.len());
                cur_row += 1;
            }
            if col_ind.len() > *row_ptr.last().unwrap() && *col_ind.last().unwrap() == j as u32 {
                *values.last_mut().unwrap() += v;
            } else {
                col_ind.push(j as u32);
                values.push(v);
            }
        }
        while cur_row < dim {
            row_ptr.push(col_ind.len());
            cur_row += 1;
        }
        Ok(SparseSpd { dim, row_ptr, col_ind, values })
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        SparseSpd {
            dim,
            row_ptr: (0..=dim).collect(),
            col_ind: (0..dim as u32).collect(),
            values: vec![1.0; dim],
        }
    }

    /// Allocates a matrix with the given pattern (sorted columns per row) and
    /// zero values.
    pub fn with_pattern(dim: usize, row_ptr: Vec<usize>, col_ind: Vec<u32>) -> Self {
        let nnz = col_ind.len();
        debug_assert_eq!(row_ptr.len(), dim + 1);
        debug_assert_eq!(row_ptr[dim], nnz);
        SparseSpd { dim, row_ptr, col_ind, values: vec![0.0; nnz] }
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.col_ind.len()
    }

    /// Adds `v` to entry `(i, j)`, which must exist in the pattern.
    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        let j32 = j as u32;
        match self.col_ind[lo..hi].binary_search(&j32) {
            Ok(pos) => self.values[lo + pos] += v,
            Err(_) => panic!("entry ({i},{j}) not present in assembly pattern"),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_ind[lo..hi].binary_search(&(j as u32)) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_ind[p] as usize];
            }
            y[i] = acc;
        }
    }

    pub fn mul_vec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec(x, &mut y);
        y
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Largest asymmetry `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_ind[p] as usize;
                if j > i {
                    worst = worst.max((self.values[p] - self.get(j, i)).abs());
                }
            }
        }
        worst
    }

    /// Dense copy, for small oracle computations.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[i][self.col_ind[p] as usize] = self.values[p];
            }
        }
        d
    }
}

/// Rectangular sparse matrix in row-major compressed form (rows = fine/full
/// dofs, columns = coarse/kept dofs for the prolongations in this crate).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRect {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_ind: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseRect {
    pub fn from_rows(rows: usize, cols: usize, row_data: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(row_data.len(), rows);
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_ind = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut r in row_data {
            r.sort_unstable_by_key(|e| e.0);
            for (j, v) in r {
                debug_assert!(j < cols);
                col_ind.push(j as u32);
                values.push(v);
            }
            row_ptr.push(col_ind.len());
        }
        SparseRect { rows, cols, row_ptr, col_ind, values }
    }

    pub fn identity(n: usize) -> Self {
        SparseRect {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_ind: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    /// `y = P x` (x indexed by columns).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_ind[p] as usize];
            }
            y[i] = acc;
        }
        y
    }

    /// `y = Pᵀ x` (x indexed by rows).
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi != 0.0 {
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    y[self.col_ind[p] as usize] += self.values[p] * xi;
                }
            }
        }
        y
    }
}

/// Extracts the principal submatrix of `a` on a sorted, unique index set.
pub fn extract_principal_submatrix(a: &SparseSpd, index_set: &[usize]) -> Result<SparseSpd, Error> {
    let k = index_set.len();
    for w in index_set.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Dimension("index set must be sorted and unique".into()));
        }
    }
    if let Some(&last) = index_set.last() {
        if last >= a.dim {
            return Err(Error::Dimension(format!(
                "index {last} out of range for dimension {}",
                a.dim
            )));
        }
    }
    // global index -> local position
    let mut row_ptr = Vec::with_capacity(k + 1);
    let mut col_ind = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for (_li, &gi) in index_set.iter().enumerate() {
        for p in a.row_ptr[gi]..a.row_ptr[gi + 1] {
            let gj = a.col_ind[p] as usize;
            if let Ok(lj) = index_set.binary_search(&gj) {
                col_ind.push(lj as u32);
                values.push(a.values[p]);
            }
        }
        row_ptr.push(col_ind.len());
    }
    Ok(SparseSpd { dim: k, row_ptr, col_ind, values })
}

/// Forms the Galerkin triple product `Pᵀ A P`.
pub fn triple_product(p: &SparseRect, a: &SparseSpd) -> Result<SparseSpd, Error> {
    if p.rows != a.dim {
        return Err(Error::Dimension(format!(
            "P has {} rows but A is {}x{}",
            p.rows, a.dim, a.dim
        )));
    }
    // T = A * P  (rows = a.dim, cols = p.cols)
    let t = spmm_csr(a.dim, p.cols, |i| (a.row_ptr[i], a.row_ptr[i + 1]), &a.col_ind, &a.values, p);
    // C = Pᵀ * T: row i of C = sum over rows r of P with P[r,i] != 0 of P[r,i] * T[r,:]
    // Build Pᵀ as row lists.
    let mut pt_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.cols];
    for r in 0..p.rows {
        for q in p.row_ptr[r]..p.row_ptr[r + 1] {
            pt_rows[p.col_ind[q] as usize].push((r, p.values[q]));
        }
    }
    let mut row_ptr = Vec::with_capacity(p.cols + 1);
    let mut col_ind: Vec<u32> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    row_ptr.push(0);
    let mut acc: Vec<f64> = vec![0.0; p.cols];
    let mut mark: Vec<bool> = vec![false; p.cols];
    let mut touched: Vec<usize> = Vec::new();
    for i in 0..p.cols {
        for &(r, w) in &pt_rows[i] {
            for q in t.row_ptr[r]..t.row_ptr[r + 1] {
                let j = t.col_ind[q] as usize;
                if !mark[j] {
                    mark[j] = true;
                    touched.push(j);
                }
                acc[j] += w * t.values[q];
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            col_ind.push(j as u32);
            values.push(acc[j]);
            acc[j] = 0.0;
            mark[j] = false;
        }
        touched.clear();
        row_ptr.push(col_ind.len());
    }
    Ok(SparseSpd { dim: p.cols, row_ptr, col_ind, values })
}

/// CSR × SparseRect product helper; returns a SparseRect with `rows` rows.
fn spmm_csr<F>(
    rows: usize,
    cols: usize,
    row_range: F,
    a_col: &[u32],
    a_val: &[f64],
    p: &SparseRect,
) -> SparseRect
where
    F: Fn(usize) -> (usize, usize),
{
    let mut row_ptr = Vec::with_capacity(rows + 1);
    let mut col_ind: Vec<u32> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    row_ptr.push(0);
    let mut acc: Vec<f64> = vec![0.0; cols];
    let mut mark: Vec<bool> = vec![false; cols];
    let mut touched: Vec<usize> = Vec::new();
    for i in 0..rows {
        let (lo, hi) = row_range(i);
        for q in lo..hi {
            let r = a_col[q] as usize;
            let w = a_val[q];
            for s in p.row_ptr[r]..p.row_ptr[r + 1] {
                let j = p.col_ind[s] as usize;
                if !mark[j] {
                    mark[j] = true;
                    touched.push(j);
                }
                acc[j] += w * p.values[s];
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            col_ind.push(j as u32);
            values.push(acc[j]);
            acc[j] = 0.0;
            mark[j] = false;
        }
        touched.clear();
        row_ptr.push(col_ind.len());
    }
    SparseRect { rows, cols, row_ptr, col_ind, values }
}

/// Writes the matrix in Matrix Market coordinate format (real symmetric,
/// 1-based, lower triangle).
pub fn write_matrix_market<W: Write>(a: &SparseSpd, w: &mut W) -> Result<(), Error> {
    let mut lower = Vec::new();
    for i in 0..a.dim {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col_ind[p] as usize;
            if j <= i {
                lower.push((i + 1, j + 1, a.values[p]));
            }
        }
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", a.dim, a.dim, lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {:.17e}", i, j, v)?;
    }
    Ok(())
}

/// Reads a Matrix Market coordinate file (real, general or symmetric).
pub fn read_matrix_market<R: BufRead>(r: &mut R) -> Result<SparseSpd, Error> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let header = header.trim().to_ascii_lowercase();
    if !header.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(Error::Io(format!("unsupported Matrix Market header: {header}")));
    }
    let symmetric = header.ends_with("symmetric");
    let mut size_line = String::new();
    loop {
        size_line.clear();
        if r.read_line(&mut size_line)? == 0 {
            return Err(Error::Io("missing size line".into()));
        }
        if !size_line.trim_start().starts_with('%') && !size_line.trim().is_empty() {
            break;
        }
    }
    let mut it = size_line.split_whitespace();
    let nr: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Io("bad size line".into()))?;
    let nc: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Io("bad size line".into()))?;
    let nnz: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Io("bad size line".into()))?;
    if nr != nc {
        return Err(Error::Io("matrix must be square".into()));
    }
    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut line = String::new();
    for _ in 0..nnz {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Io("truncated entry list".into()));
        }
        let mut it = line.split_whitespace();
        let i: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Io("bad entry".into()))?;
        let j: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Io("bad entry".into()))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Io("bad entry".into()))?;
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    SparseSpd::from_triplets(nr, &triplets)
}

/// Tridiagonal (-1, 2, -1) test matrix.
pub fn tridiag(n: usize) -> SparseSpd {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
    }
    SparseSpd::from_triplets(n, &t).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_and_get() {
        let a = SparseSpd::from_triplets(3, &[(0, 0, 1.0), (1, 1, 2.0), (0, 0, 0.5), (2, 1, -1.0)])
            .unwrap();
        assert_eq!(a.get(0, 0), 1.5);
        assert_eq!(a.get(1, 1), 2.0);
        assert_eq!(a.get(2, 1), -1.0);
        assert_eq!(a.get(2, 2), 0.0);
        assert!(SparseSpd::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn extract_examples() {
        let a = tridiag(4);
        let full = extract_principal_submatrix(&a, &[0, 1, 2, 3]).unwrap();
        assert_eq!(full, a);
        let empty = extract_principal_submatrix(&a, &[]).unwrap();
        assert_eq!(empty.dim, 0);
        let lead = extract_principal_submatrix(&a, &[0, 1]).unwrap();
        assert_eq!(lead.get(0, 0), 2.0);
        assert_eq!(lead.get(0, 1), -1.0);
        assert_eq!(lead.get(1, 0), -1.0);
        assert_eq!(lead.get(1, 1), 2.0);
        assert!(extract_principal_submatrix(&a, &[1, 1]).is_err());
        assert!(extract_principal_submatrix(&a, &[7]).is_err());
    }

    #[test]
    fn triple_product_examples() {
        let a = tridiag(3);
        let c = triple_product(&SparseRect::identity(3), &a).unwrap();
        assert_eq!(c, a);

        // single column of ones: result = sum of all entries = 3*2 - 4 = 2
        let p = SparseRect::from_rows(3, 1, vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]]);
        let c = triple_product(&p, &a).unwrap();
        assert_eq!(c.dim, 1);
        assert!((c.get(0, 0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_market_roundtrip() {
        let a = tridiag(5);
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b = read_matrix_market(&mut std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(a, b);
    }
}
