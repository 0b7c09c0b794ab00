use alloc::vec;
use alloc::vec::Vec;

/// Compressed sparse column matrix with sorted row indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    colptr: Vec<usize>,
    rowval: Vec<usize>,
    nzval: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, colptr: vec![0; ncols + 1], rowval: Vec::new(), nzval: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowval: (0..n).collect(),
            nzval: vec![1.0; n],
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let trip: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &trip)
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    ///
    /// # Panics
    /// If an index is out of range.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows}x{ncols}");
            counts[j + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[j];
            rows[p] = i;
            vals[p] = v;
            next[j] += 1;
        }
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowval = Vec::with_capacity(triplets.len());
        let mut nzval = Vec::with_capacity(triplets.len());
        colptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for j in 0..ncols {
            order.clear();
            order.extend(counts[j]..counts[j + 1]);
            order.sort_by_key(|&p| rows[p]);
            let mut k = 0;
            while k < order.len() {
                let r = rows[order[k]];
                let mut v = 0.0;
                while k < order.len() && rows[order[k]] == r {
                    v += vals[order[k]];
                    k += 1;
                }
                if v != 0.0 {
                    rowval.push(r);
                    nzval.push(v);
                }
            }
            colptr.push(rowval.len());
        }
        Self { nrows, ncols, colptr, rowval, nzval }
    }

    pub(crate) fn from_parts_unchecked(
        nrows: usize,
        ncols: usize,
        colptr: Vec<usize>,
        rowval: Vec<usize>,
        nzval: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(colptr.len(), ncols + 1);
        Self { nrows, ncols, colptr, rowval, nzval }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.nzval.len()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowval(&self) -> &[usize] {
        &self.rowval
    }

    pub fn nzval(&self) -> &[f64] {
        &self.nzval
    }

    pub(crate) fn nzval_mut(&mut self) -> &mut [f64] {
        &mut self.nzval
    }

    pub fn col_iter(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.colptr[j]..self.colptr[j + 1];
        self.rowval[r.clone()].iter().copied().zip(self.nzval[r].iter().copied())
    }

    /// Entries in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| self.col_iter(j).map(move |(i, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.colptr[j]..self.colptr[j + 1];
        match self.rowval[r.clone()].binary_search(&i) {
            Ok(k) => self.nzval[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.nzval.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_acc(1.0, x, &mut y);
        y
    }

    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.tmul_acc(1.0, x, &mut y);
        y
    }

    /// `y += alpha * A x`
    pub fn mul_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let a = alpha * xj;
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowval[p]] += a * self.nzval[p];
            }
        }
    }

    /// `y += alpha * A^T x`
    pub fn tmul_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for (j, yj) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.colptr[j]..self.colptr[j + 1] {
                acc += self.nzval[p] * x[self.rowval[p]];
            }
            *yj += alpha * acc;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.rowval {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut rowval = vec![0usize; self.nnz()];
        let mut nzval = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowval[p];
                let q = next[i];
                rowval[q] = j;
                nzval[q] = self.nzval[p];
                next[i] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, colptr: counts, rowval, nzval }
    }

    /// Same matrix embedded with more columns (new columns are empty).
    pub fn widen(&self, ncols: usize) -> Self {
        assert!(ncols >= self.ncols);
        let mut out = self.clone();
        let last = *out.colptr.last().unwrap_or(&0);
        out.colptr.resize(ncols + 1, last);
        out.ncols = ncols;
        out
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&CscMatrix]) -> Self {
        let ncols = blocks.first().map_or(0, |b| b.ncols);
        let mut trip = Vec::new();
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.ncols, ncols, "vstack of blocks with different widths");
            trip.extend(b.triplets().map(|(i, j, v)| (i + off, j, v)));
            off += b.nrows;
        }
        Self::from_triplets(off, ncols, &trip)
    }

    /// `diag(row) * A * diag(col)`
    pub fn scale(&mut self, row: &[f64], col: &[f64]) {
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                self.nzval[p] *= row[self.rowval[p]] * col[j];
            }
        }
    }

    pub fn col_norm_inf(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.col_iter(j).fold(0.0, |m, (_, v)| f64::max(m, v.abs())))
            .collect()
    }

    pub fn row_norm_inf(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.nrows];
        for (i, _, v) in self.triplets() {
            out[i] = out[i].max(v.abs());
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }
}

/// Accumulates `(row, col, value)` entries and builds a [`CscMatrix`].
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    /// Appends a row, returning its index.
    pub fn push_row(&mut self, entries: &[(usize, f64)]) -> usize {
        let r = self.nrows;
        self.nrows += 1;
        for &(j, v) in entries {
            self.push(r, j, v);
        }
        r
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn build(&self) -> CscMatrix {
        CscMatrix::from_triplets(self.nrows, self.ncols, &self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CscMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0), (0, 1, 3.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.get(0, 1), 3.0);
    }

    #[test]
    fn products_and_transpose() {
        let m = CscMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (1, 2, 2.0), (0, 1, -1.0)]);
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![-1.0, 6.0]);
        assert_eq!(m.tmul_vec(&[1.0, 1.0]), vec![1.0, -1.0, 2.0]);
        let t = m.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.get(2, 1), 2.0);
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn vstack_and_widen() {
        let a = CscMatrix::identity(2);
        let b = CscMatrix::from_triplets(1, 2, &[(0, 1, 5.0)]);
        let s = CscMatrix::vstack(&[&a, &b]);
        assert_eq!(s.nrows(), 3);
        assert_eq!(s.get(2, 1), 5.0);
        let w = s.widen(4);
        assert_eq!(w.ncols(), 4);
        assert_eq!(w.mul_vec(&[1.0, 1.0, 9.0, 9.0]), vec![1.0, 1.0, 5.0]);
    }
}
