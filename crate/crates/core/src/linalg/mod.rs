//! Sparse matrices, fill-reducing ordering and sparse `LDL^T` factorization.

mod amd;
mod csc;
mod ldl;

pub use amd::minimum_degree_order;
pub use csc::{CscMatrix, TripletBuilder};
pub use ldl::{LdlFactor, LdlError, QuasiDefiniteSolver};

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solves the square system `m x = rhs` through the symmetric quasi-definite
/// embedding `[[d I, m^T], [m, -d I]]` with iterative refinement against the
/// unregularized system.
///
/// Works for any nonsingular `m`, symmetric or not. Returns
/// [`Error::Singular`] when refinement cannot bring the relative residual
/// below `1e-10`.
/// Systems up to this size are solved densely with partial pivoting.
const DENSE_LIMIT: usize = 400;

fn dense_lu_solve(m: &CscMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut a = alloc::vec![0.0; n * n];
    for (i, j, v) in m.triplets() {
        a[i * n + j] += v;
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut x = rhs.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs())).unwrap_or(k);
        let piv = a[p * n + k];
        if !(piv.abs() > 1e-14 * scale) {
            return Err(Error::Singular(alloc::format!("zero pivot in column {k}")));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / a[k * n + k];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite solution".into()));
    }
    Ok(x)
}

pub fn solve_square(m: &CscMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n || rhs.len() != n {
        return Err(Error::Dimension(alloc::format!(
            "square solve with a {}x{} matrix and rhs of length {}",
            m.nrows(),
            m.ncols(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n <= DENSE_LIMIT {
        return dense_lu_solve(m, rhs);
    }
    let scale = m.max_abs().max(1e-300);
    let reg = 1e-12 * scale;
    // Upper triangle of [[reg I, m^T], [m, -reg I]]: column n + i holds row i of m.
    let mt = m.transpose();
    let mut b = TripletBuilder::new(2 * n, 2 * n);
    for j in 0..n {
        b.push(j, j, reg);
    }
    for i in 0..n {
        for (j, v) in mt.col_iter(i) {
            b.push(j, n + i, v);
        }
        b.push(n + i, n + i, -reg);
    }
    let upper = b.build();
    let mut signs = alloc::vec![1i8; 2 * n];
    signs[n..].fill(-1);
    let mut solver = QuasiDefiniteSolver::new(&upper, &signs)
        .map_err(|e| Error::Singular(alloc::format!("{e}")))?;
    solver
        .factor(1e-14 * scale, 1e-9 * scale)
        .map_err(|e| Error::Singular(alloc::format!("{e}")))?;

    // Unregularized operator applied to [x; y]: [m^T y; m x].
    let apply = |xy: &[f64], out: &mut [f64]| {
        let (x, y) = xy.split_at(n);
        let (o1, o2) = out.split_at_mut(n);
        o1.fill(0.0);
        m.tmul_acc(1.0, y, o1);
        o2.fill(0.0);
        m.mul_acc(1.0, x, o2);
    };
    let mut full_rhs = alloc::vec![0.0; 2 * n];
    full_rhs[n..].copy_from_slice(rhs);
    let mut sol = full_rhs.clone();
    solver.solve_in_place(&mut sol);
    let rhs_norm = norm_inf(rhs).max(1e-300);
    let mut resid = alloc::vec![0.0; 2 * n];
    for _ in 0..50 {
        apply(&sol, &mut resid);
        for (r, f) in resid.iter_mut().zip(&full_rhs) {
            *r = f - *r;
        }
        if norm_inf(&resid) <= 1e-13 * rhs_norm.max(scale * norm_inf(&sol)) {
            break;
        }
        solver.solve_in_place(&mut resid);
        axpy(1.0, &resid, &mut sol);
    }
    let x = sol[..n].to_vec();
    let mut r = m.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri -= bi;
    }
    let rel = norm_inf(&r) / rhs_norm.max(scale * norm_inf(&x)).max(1e-300);
    if x.iter().any(|v| !v.is_finite()) || !rel.is_finite() || rel > 1e-10 {
        return Err(Error::Singular(alloc::format!(
            "refinement stalled at relative residual {rel:e}"
        )));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_square_pivots() {
        let m = CscMatrix::from_triplets(3, 3, &[(0, 2, 1.0), (1, 0, 2.0), (2, 1, -3.0), (2, 2, 1e-3)]);
        let x = solve_square(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.mul_vec(&x).iter().zip([1.0, 2.0, 3.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-14, true);
        let singular = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]);
        assert!(matches!(solve_square(&singular, &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn solve_square_nonsymmetric() {
        let m = CscMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, -1.0), (1, 1, 3.0), (2, 1, 4.0), (2, 2, -5.0)],
        );
        let x_true = [1.0, -2.0, 0.5];
        let b = m.mul_vec(&x_true);
        let x = solve_square(&m, &b).unwrap();
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_square_detects_singular() {
        let m = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]);
        assert!(matches!(solve_square(&m, &[1.0, 0.0]), Err(Error::Singular(_))));
    }
}
