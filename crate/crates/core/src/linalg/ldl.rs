//! Up-looking sparse `LDL^T` for symmetric quasi-definite matrices.
//!
//! The symbolic phase (ordering, elimination tree, column counts) is done
//! once per pattern; numeric refactorization reuses it. Pivots whose sign
//! disagrees with the expected inertia, or whose magnitude is below a
//! threshold, are replaced by a signed regularization value.

use alloc::vec;
use alloc::vec::Vec;

use super::{minimum_degree_order, CscMatrix};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LdlError {
    #[error("matrix is not square upper triangular")]
    NotUpperTriangular,
    #[error("sign vector has length {got}, expected {expected}")]
    SignLength { got: usize, expected: usize },
    #[error("zero pivot at column {0}")]
    ZeroPivot(usize),
    #[error("non-finite pivot at column {0}")]
    NonFinite(usize),
}

/// Numeric factor `P K P^T = L D L^T` with unit lower `L` stored by columns.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
}

impl LdlFactor {
    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.d
    }
}

/// Sparse solver for a fixed pattern of symmetric quasi-definite matrices.
#[derive(Debug, Clone)]
pub struct QuasiDefiniteSolver {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    /// Permuted upper triangle.
    kp: CscMatrix,
    /// Original upper entry index to permuted entry index.
    map: Vec<usize>,
    signs: Vec<i8>,
    etree: Vec<usize>,
    lnz: Vec<usize>,
    factor: LdlFactor,
    pub regularized_pivots: usize,
    work: Vec<f64>,
}

impl QuasiDefiniteSolver {
    /// Symbolic analysis of the upper triangle `upper`. `signs[i]` is the
    /// expected sign of pivot `i` (in original ordering).
    pub fn new(upper: &CscMatrix, signs: &[i8]) -> Result<Self, LdlError> {
        let n = upper.ncols();
        if upper.nrows() != n {
            return Err(LdlError::NotUpperTriangular);
        }
        if signs.len() != n {
            return Err(LdlError::SignLength { got: signs.len(), expected: n });
        }
        for (i, j, _) in upper.triplets() {
            if i > j {
                return Err(LdlError::NotUpperTriangular);
            }
        }
        let perm = minimum_degree_order(upper);
        let mut iperm = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            iperm[p] = k;
        }

        // Permute the upper triangle, keeping a map for value updates.
        let nnz = upper.nnz();
        let mut counts = vec![0usize; n + 1];
        let mut dest = Vec::with_capacity(nnz);
        for (i, j, _) in upper.triplets() {
            let (pi, pj) = (iperm[i], iperm[j]);
            let (r, c) = if pi <= pj { (pi, pj) } else { (pj, pi) };
            counts[c + 1] += 1;
            dest.push((r, c));
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut slot = vec![0usize; nnz];
        for (k, &(_, c)) in dest.iter().enumerate() {
            slot[k] = next[c];
            next[c] += 1;
        }
        // Sort rows inside each column.
        let mut rows = vec![0usize; nnz];
        for (k, &(r, _)) in dest.iter().enumerate() {
            rows[slot[k]] = r;
        }
        let mut order: Vec<usize> = (0..nnz).collect();
        for j in 0..n {
            order[counts[j]..counts[j + 1]].sort_by_key(|&q| rows[q]);
        }
        let mut rank = vec![0usize; nnz];
        for (pos, &q) in order.iter().enumerate() {
            rank[q] = pos;
        }
        let map: Vec<usize> = slot.iter().map(|&s| rank[s]).collect();
        let sorted_rows: Vec<usize> = order.iter().map(|&q| rows[q]).collect();
        let mut kp = CscMatrix::from_parts_unchecked(n, n, counts, sorted_rows, vec![0.0; nnz]);
        {
            let vals = kp.nzval_mut();
            for (k, &v) in upper.nzval().iter().enumerate() {
                vals[map[k]] = v;
            }
        }
        let psigns: Vec<i8> = perm.iter().map(|&p| signs[p]).collect();

        let (etree, lnz) = elimination_tree(&kp);
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];
        let factor = LdlFactor {
            lp,
            li: vec![0; total],
            lx: vec![0.0; total],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
        };
        Ok(Self {
            n,
            perm,
            iperm,
            kp,
            map,
            signs: psigns,
            etree,
            lnz,
            factor,
            regularized_pivots: 0,
            work: vec![0.0; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.factor.nnz()
    }

    /// Replaces the matrix values. `values` follows the nonzero order of the
    /// upper triangle passed to [`QuasiDefiniteSolver::new`].
    pub fn update_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.map.len());
        let vals = self.kp.nzval_mut();
        for (k, &v) in values.iter().enumerate() {
            vals[self.map[k]] = v;
        }
    }

    /// Updates one value by its index in the original upper triangle.
    pub fn set_value(&mut self, index: usize, value: f64) {
        let slot = self.map[index];
        self.kp.nzval_mut()[slot] = value;
    }

    /// Numeric factorization. Pivots with `sign * d < eps` become
    /// `sign * delta`.
    pub fn factor(&mut self, eps: f64, delta: f64) -> Result<(), LdlError> {
        let n = self.n;
        let kp = &self.kp;
        let f = &mut self.factor;
        let colptr = kp.colptr();
        let rowval = kp.rowval();
        let nzval = kp.nzval();
        let mut y_vals = vec![0.0; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut used = vec![false; n];
        let mut next_space: Vec<usize> = f.lp[..n].to_vec();
        self.regularized_pivots = 0;

        for k in 0..n {
            let mut nnz_y = 0;
            f.d[k] = 0.0;
            for p in colptr[k]..colptr[k + 1] {
                let b = rowval[p];
                if b == k {
                    f.d[k] = nzval[p];
                    continue;
                }
                y_vals[b] = nzval[p];
                if !used[b] {
                    used[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut nx = self.etree[b];
                    while nx != NONE && nx < k {
                        if used[nx] {
                            break;
                        }
                        used[nx] = true;
                        elim[ne] = nx;
                        ne += 1;
                        nx = self.etree[nx];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let tmp = next_space[c];
                let yc = y_vals[c];
                for j in f.lp[c]..tmp {
                    y_vals[f.li[j]] -= f.lx[j] * yc;
                }
                f.li[tmp] = k;
                let lval = yc * f.dinv[c];
                f.lx[tmp] = lval;
                f.d[k] -= yc * lval;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                used[c] = false;
            }
            let s = f64::from(self.signs[k]);
            if !f.d[k].is_finite() {
                return Err(LdlError::NonFinite(self.perm[k]));
            }
            if s * f.d[k] < eps {
                if delta <= 0.0 {
                    return Err(LdlError::ZeroPivot(self.perm[k]));
                }
                f.d[k] = s * delta;
                self.regularized_pivots += 1;
            }
            f.dinv[k] = 1.0 / f.d[k];
        }
        Ok(())
    }

    /// Solves `K x = b` in place using the current factor.
    pub fn solve_in_place(&mut self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let f = &self.factor;
        let x = &mut self.work;
        for k in 0..n {
            x[k] = b[self.perm[k]];
        }
        for i in 0..n {
            let xi = x[i];
            if xi != 0.0 {
                for p in f.lp[i]..f.lp[i + 1] {
                    x[f.li[p]] -= f.lx[p] * xi;
                }
            }
        }
        for i in 0..n {
            x[i] *= f.dinv[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for p in f.lp[i]..f.lp[i + 1] {
                acc -= f.lx[p] * x[f.li[p]];
            }
            x[i] = acc;
        }
        for k in 0..n {
            b[self.perm[k]] = x[k];
        }
    }

    pub fn factor_ref(&self) -> &LdlFactor {
        &self.factor
    }

    pub fn column_counts(&self) -> &[usize] {
        &self.lnz
    }

    pub fn inverse_permutation(&self) -> &[usize] {
        &self.iperm
    }
}

fn elimination_tree(kp: &CscMatrix) -> (Vec<usize>, Vec<usize>) {
    let n = kp.ncols();
    let mut work = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let mut etree = vec![NONE; n];
    let colptr = kp.colptr();
    let rowval = kp.rowval();
    for j in 0..n {
        work[j] = j;
        for p in colptr[j]..colptr[j + 1] {
            let mut i = rowval[p];
            while work[i] != j {
                if etree[i] == NONE {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }
    (etree, lnz)
}
