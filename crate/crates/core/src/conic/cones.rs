//! Products of zero, nonnegative and second-order cones, with the
//! Nesterov-Todd scaling used by the interior point method.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use libm::sqrt;

use crate::linalg::dot;

/// One block of a product cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConeKind {
    /// `{0}^n`
    Zero(usize),
    /// `R_+^n`
    Nonneg(usize),
    /// `{(t, x) : ||x|| <= t}` of total dimension `n`
    Soc(usize),
}

impl ConeKind {
    pub fn dim(&self) -> usize {
        match *self {
            ConeKind::Zero(n) | ConeKind::Nonneg(n) | ConeKind::Soc(n) => n,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            ConeKind::Zero(_) => 0,
            ConeKind::Nonneg(n) => n,
            ConeKind::Soc(n) => usize::from(n > 0),
        }
    }
}

/// Distance of `s` from the cone, measured per block (max over blocks).
pub fn cone_violation(cones: &[ConeKind], s: &[f64]) -> f64 {
    let mut viol = 0.0f64;
    let mut off = 0;
    for c in cones {
        let x = &s[off..off + c.dim()];
        match c {
            ConeKind::Zero(_) => viol = x.iter().fold(viol, |m, v| m.max(v.abs())),
            ConeKind::Nonneg(_) => viol = x.iter().fold(viol, |m, &v| m.max(-v)),
            ConeKind::Soc(n) if *n > 0 => viol = viol.max(sqrt(dot(&x[1..], &x[1..])) - x[0]),
            ConeKind::Soc(_) => {}
        }
        off += c.dim();
    }
    viol
}

/// Violation of the dual cone. Zero cones have the whole space as dual.
pub fn dual_cone_violation(cones: &[ConeKind], z: &[f64]) -> f64 {
    let mut viol = 0.0f64;
    let mut off = 0;
    for c in cones {
        let x = &z[off..off + c.dim()];
        match c {
            ConeKind::Zero(_) => {}
            ConeKind::Nonneg(_) => viol = x.iter().fold(viol, |m, &v| m.max(-v)),
            ConeKind::Soc(n) if *n > 0 => viol = viol.max(sqrt(dot(&x[1..], &x[1..])) - x[0]),
            ConeKind::Soc(_) => {}
        }
        off += c.dim();
    }
    viol
}

#[derive(Debug, Clone)]
enum Scaling {
    Zero,
    /// `W = diag(w)`, `w = sqrt(s / z)`.
    Nonneg { w: Vec<f64> },
    /// `W = beta (2 v v^T - J)`, `W^{-1} = (1 / beta) (2 J v v^T J - J)`,
    /// `W^2 = beta^2 (2 wbar wbar^T - J)`.
    Soc { beta: f64, v: Vec<f64>, wbar: Vec<f64> },
}

/// A product cone with its current scaling point.
#[derive(Debug, Clone)]
pub struct ConeSet {
    cones: Vec<ConeKind>,
    ranges: Vec<Range<usize>>,
    dim: usize,
    degree: usize,
    scaling: Vec<Scaling>,
    /// `lambda = W z = W^{-1} s`
    pub lambda: Vec<f64>,
}

impl ConeSet {
    pub fn new(cones: &[ConeKind]) -> Self {
        let mut ranges = Vec::with_capacity(cones.len());
        let mut off = 0;
        for c in cones {
            ranges.push(off..off + c.dim());
            off += c.dim();
        }
        let scaling = cones
            .iter()
            .map(|c| match *c {
                ConeKind::Zero(_) => Scaling::Zero,
                ConeKind::Nonneg(n) => Scaling::Nonneg { w: vec![1.0; n] },
                ConeKind::Soc(n) => {
                    let mut e = vec![0.0; n];
                    if n > 0 {
                        e[0] = 1.0;
                    }
                    Scaling::Soc { beta: 1.0, v: e.clone(), wbar: e }
                }
            })
            .collect();
        Self {
            cones: cones.to_vec(),
            ranges,
            dim: off,
            degree: cones.iter().map(ConeKind::degree).sum(),
            scaling,
            lambda: vec![0.0; off],
        }
    }

    pub fn cones(&self) -> &[ConeKind] {
        &self.cones
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Writes the identity element `e` of the cone, weighted by `alpha`, into
    /// `x` (zero blocks get 0).
    pub fn add_identity(&self, alpha: f64, x: &mut [f64]) {
        for (c, r) in self.cones.iter().zip(&self.ranges) {
            match c {
                ConeKind::Zero(_) => {}
                ConeKind::Nonneg(_) => x[r.clone()].iter_mut().for_each(|v| *v += alpha),
                ConeKind::Soc(n) if *n > 0 => x[r.start] += alpha,
                ConeKind::Soc(_) => {}
            }
        }
    }

    /// Moves `x` into the interior of each non-zero block: blocks whose
    /// smallest eigenvalue is below `margin` are shifted so that it becomes 1.
    /// Zero blocks are set to 0 when `clear_zero` is set and left alone
    /// otherwise.
    pub fn shift_to_interior(&self, x: &mut [f64], margin: f64, clear_zero: bool) {
        for (c, r) in self.cones.iter().zip(&self.ranges) {
            let b = &mut x[r.clone()];
            match c {
                ConeKind::Zero(_) => {
                    if clear_zero {
                        b.iter_mut().for_each(|v| *v = 0.0);
                    }
                }
                ConeKind::Nonneg(_) => {
                    let min = b.iter().fold(f64::INFINITY, |m, &v| m.min(v));
                    if min < margin {
                        b.iter_mut().for_each(|v| *v += 1.0 - min);
                    }
                }
                ConeKind::Soc(n) if *n > 0 => {
                    let min = b[0] - sqrt(dot(&b[1..], &b[1..]));
                    if min < margin {
                        b[0] += 1.0 - min;
                    }
                }
                ConeKind::Soc(_) => {}
            }
        }
    }

    /// Largest `alpha <= alpha_max` with `x + alpha dx` in the cone, over the
    /// non-zero blocks.
    pub fn max_step(&self, x: &[f64], dx: &[f64], alpha_max: f64) -> f64 {
        let mut alpha = alpha_max;
        for (c, r) in self.cones.iter().zip(&self.ranges) {
            match c {
                ConeKind::Zero(_) => {}
                ConeKind::Nonneg(_) => {
                    for i in r.clone() {
                        if dx[i] < 0.0 {
                            alpha = alpha.min(-x[i] / dx[i]);
                        }
                    }
                }
                ConeKind::Soc(n) if *n > 0 => {
                    alpha = alpha.min(soc_max_step(&x[r.clone()], &dx[r.clone()]));
                }
                ConeKind::Soc(_) => {}
            }
        }
        alpha.max(0.0)
    }

    /// Recomputes the scaling from strictly interior `s`, `z`. Returns `false`
    /// if some block is not interior.
    pub fn update_scaling(&mut self, s: &[f64], z: &[f64]) -> bool {
        for (k, r) in self.ranges.iter().enumerate() {
            let (sb, zb) = (&s[r.clone()], &z[r.clone()]);
            match &mut self.scaling[k] {
                Scaling::Zero => self.lambda[r.clone()].iter_mut().for_each(|v| *v = 0.0),
                Scaling::Nonneg { w } => {
                    for i in 0..sb.len() {
                        if !(sb[i] > 0.0 && zb[i] > 0.0) {
                            return false;
                        }
                        w[i] = sqrt(sb[i] / zb[i]);
                        self.lambda[r.start + i] = sqrt(sb[i] * zb[i]);
                    }
                }
                Scaling::Soc { beta, v, wbar } => {
                    if sb.is_empty() {
                        continue;
                    }
                    let sj = soc_jnorm_sq(sb);
                    let zj = soc_jnorm_sq(zb);
                    if !(sj > 0.0 && zj > 0.0 && sb[0] > 0.0 && zb[0] > 0.0) {
                        return false;
                    }
                    let (sn, zn) = (sqrt(sj), sqrt(zj));
                    let st: Vec<f64> = sb.iter().map(|x| x / sn).collect();
                    let zt: Vec<f64> = zb.iter().map(|x| x / zn).collect();
                    let gamma = sqrt((1.0 + dot(&st, &zt)) / 2.0);
                    wbar[0] = (st[0] + zt[0]) / (2.0 * gamma);
                    for i in 1..sb.len() {
                        wbar[i] = (st[i] - zt[i]) / (2.0 * gamma);
                    }
                    // v is the Jordan square root of wbar.
                    let denom = sqrt(2.0 * (wbar[0] + 1.0));
                    v[0] = (wbar[0] + 1.0) / denom;
                    for i in 1..sb.len() {
                        v[i] = wbar[i] / denom;
                    }
                    *beta = sqrt(sqrt(sj / zj));
                    // lambda = W z
                    let vz = dot(v, zb);
                    let lam = &mut self.lambda[r.clone()];
                    lam[0] = *beta * (2.0 * v[0] * vz - zb[0]);
                    for i in 1..sb.len() {
                        lam[i] = *beta * (2.0 * v[i] * vz + zb[i]);
                    }
                }
            }
        }
        true
    }

    /// `out = W x`
    pub fn w_mul(&self, x: &[f64], out: &mut [f64]) {
        for (k, r) in self.ranges.iter().enumerate() {
            let (xb, ob) = (&x[r.clone()], &mut out[r.clone()]);
            match &self.scaling[k] {
                Scaling::Zero => ob.iter_mut().for_each(|v| *v = 0.0),
                Scaling::Nonneg { w } => {
                    for i in 0..xb.len() {
                        ob[i] = w[i] * xb[i];
                    }
                }
                Scaling::Soc { beta, v, .. } => {
                    if xb.is_empty() {
                        continue;
                    }
                    let vx = dot(v, xb);
                    ob[0] = beta * (2.0 * v[0] * vx - xb[0]);
                    for i in 1..xb.len() {
                        ob[i] = beta * (2.0 * v[i] * vx + xb[i]);
                    }
                }
            }
        }
    }

    /// `out = W^{-1} x`
    pub fn winv_mul(&self, x: &[f64], out: &mut [f64]) {
        for (k, r) in self.ranges.iter().enumerate() {
            let (xb, ob) = (&x[r.clone()], &mut out[r.clone()]);
            match &self.scaling[k] {
                Scaling::Zero => ob.iter_mut().for_each(|v| *v = 0.0),
                Scaling::Nonneg { w } => {
                    for i in 0..xb.len() {
                        ob[i] = xb[i] / w[i];
                    }
                }
                Scaling::Soc { beta, v, .. } => {
                    if xb.is_empty() {
                        continue;
                    }
                    // J v
                    let jvx = v[0] * xb[0] - dot(&v[1..], &xb[1..]);
                    ob[0] = (2.0 * v[0] * jvx - xb[0]) / beta;
                    for i in 1..xb.len() {
                        ob[i] = (-2.0 * v[i] * jvx + xb[i]) / beta;
                    }
                }
            }
        }
    }

    /// `out = H x` with `H = W^2` (zero on zero blocks).
    pub fn h_mul(&self, x: &[f64], out: &mut [f64]) {
        for (k, r) in self.ranges.iter().enumerate() {
            let (xb, ob) = (&x[r.clone()], &mut out[r.clone()]);
            match &self.scaling[k] {
                Scaling::Zero => ob.iter_mut().for_each(|v| *v = 0.0),
                Scaling::Nonneg { w } => {
                    for i in 0..xb.len() {
                        ob[i] = w[i] * w[i] * xb[i];
                    }
                }
                Scaling::Soc { beta, wbar, .. } => {
                    if xb.is_empty() {
                        continue;
                    }
                    let b2 = beta * beta;
                    let wx = dot(wbar, xb);
                    ob[0] = b2 * (2.0 * wbar[0] * wx - xb[0]);
                    for i in 1..xb.len() {
                        ob[i] = b2 * (2.0 * wbar[i] * wx + xb[i]);
                    }
                }
            }
        }
    }

    /// Entry `(i, j)` of the `H` block of cone `k`, local indices.
    pub fn h_entry(&self, k: usize, i: usize, j: usize) -> f64 {
        match &self.scaling[k] {
            Scaling::Zero => 0.0,
            Scaling::Nonneg { w } => {
                if i == j {
                    w[i] * w[i]
                } else {
                    0.0
                }
            }
            Scaling::Soc { beta, wbar, .. } => {
                let jij = if i != j {
                    0.0
                } else if i == 0 {
                    1.0
                } else {
                    -1.0
                };
                beta * beta * (2.0 * wbar[i] * wbar[j] - jij)
            }
        }
    }

    /// Jordan product `out = x o y`.
    pub fn jordan_mul(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for (c, r) in self.cones.iter().zip(&self.ranges) {
            let (xb, yb, ob) = (&x[r.clone()], &y[r.clone()], &mut out[r.clone()]);
            match c {
                ConeKind::Zero(_) => ob.iter_mut().for_each(|v| *v = 0.0),
                ConeKind::Nonneg(_) => {
                    for i in 0..xb.len() {
                        ob[i] = xb[i] * yb[i];
                    }
                }
                ConeKind::Soc(n) if *n > 0 => {
                    ob[0] = dot(xb, yb);
                    for i in 1..xb.len() {
                        ob[i] = xb[0] * yb[i] + yb[0] * xb[i];
                    }
                }
                ConeKind::Soc(_) => {}
            }
        }
    }

    /// Solves `lambda o out = x` for `out`.
    pub fn lambda_div(&self, x: &[f64], out: &mut [f64]) {
        let lam = &self.lambda;
        for (c, r) in self.cones.iter().zip(&self.ranges) {
            let (lb, xb, ob) = (&lam[r.clone()], &x[r.clone()], &mut out[r.clone()]);
            match c {
                ConeKind::Zero(_) => ob.iter_mut().for_each(|v| *v = 0.0),
                ConeKind::Nonneg(_) => {
                    for i in 0..xb.len() {
                        ob[i] = xb[i] / lb[i];
                    }
                }
                ConeKind::Soc(n) if *n > 0 => {
                    let det = soc_jnorm_sq(lb);
                    let u0 = (lb[0] * xb[0] - dot(&lb[1..], &xb[1..])) / det;
                    ob[0] = u0;
                    for i in 1..xb.len() {
                        ob[i] = (xb[i] - u0 * lb[i]) / lb[0];
                    }
                }
                ConeKind::Soc(_) => {}
            }
        }
    }
}

/// `x0^2 - ||x1||^2`
fn soc_jnorm_sq(x: &[f64]) -> f64 {
    let t = sqrt(dot(&x[1..], &x[1..]));
    (x[0] - t) * (x[0] + t)
}

/// Largest step keeping `x + alpha dx` in the second-order cone, for interior
/// `x`. Returns `+inf` when the ray never leaves the cone.
fn soc_max_step(x: &[f64], dx: &[f64]) -> f64 {
    // Solve a alpha^2 + 2 b alpha + c = 0 for the first crossing of
    // (x0 + a dx0)^2 = ||x1 + a dx1||^2 with x0 + a dx0 >= 0.
    let a = dx[0] * dx[0] - dot(&dx[1..], &dx[1..]);
    let b = x[0] * dx[0] - dot(&x[1..], &dx[1..]);
    let c = soc_jnorm_sq(x).max(0.0);
    let mut alpha = f64::INFINITY;
    // Also keep the leading entry positive.
    if dx[0] < 0.0 {
        alpha = -x[0] / dx[0];
    }
    if a == 0.0 {
        if b < 0.0 {
            alpha = alpha.min(-c / (2.0 * b));
        }
        return alpha;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return alpha;
    }
    let sq = sqrt(disc);
    // Roots of a t^2 + 2 b t + c, computed stably.
    let q = -(b + if b >= 0.0 { sq } else { -sq });
    let mut roots = [f64::INFINITY; 2];
    if q != 0.0 {
        roots[0] = q / a;
        roots[1] = c / q;
    } else {
        roots[0] = 0.0;
    }
    for t in roots {
        if t > 0.0 {
            alpha = alpha.min(t);
        }
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn nt_scaling_maps_z_to_s() {
        let cones = [ConeKind::Nonneg(2), ConeKind::Soc(4), ConeKind::Zero(1)];
        let mut set = ConeSet::new(&cones);
        let s = [1.0, 0.5, 3.0, 1.0, -0.5, 2.0, 0.0];
        let z = [2.0, 4.0, 2.0, -0.3, 0.7, 0.1, 5.0];
        assert!(set.update_scaling(&s, &z));
        let mut wz = [0.0; 7];
        let mut wis = [0.0; 7];
        let mut hz = [0.0; 7];
        set.w_mul(&z, &mut wz);
        set.winv_mul(&s, &mut wis);
        set.h_mul(&z, &mut hz);
        assert!(close(&wz, &wis, 1e-12));
        assert!(close(&wz, &set.lambda, 1e-12));
        assert!(close(&hz[..6], &s[..6], 1e-12));
        // W^{-1} W = I
        let x = [0.3, -1.0, 0.2, 0.9, -0.4, 1.5, 0.0];
        let mut wx = [0.0; 7];
        let mut back = [0.0; 7];
        set.w_mul(&x, &mut wx);
        set.winv_mul(&wx, &mut back);
        assert!(close(&back[..6], &x[..6], 1e-12));
    }

    #[test]
    fn dense_h_entries_match_h_mul() {
        let mut set = ConeSet::new(&[ConeKind::Soc(3)]);
        assert!(set.update_scaling(&[2.0, 1.0, 0.5], &[1.0, -0.2, 0.3]));
        let x = [0.7, -0.1, 2.0];
        let mut hx = [0.0; 3];
        set.h_mul(&x, &mut hx);
        for i in 0..3 {
            let row: f64 = (0..3).map(|j| set.h_entry(0, i, j) * x[j]).sum();
            assert!((row - hx[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_division_inverts_product() {
        let mut set = ConeSet::new(&[ConeKind::Soc(3), ConeKind::Nonneg(1)]);
        assert!(set.update_scaling(&[3.0, 1.0, 1.0, 2.0], &[2.0, 0.5, -1.0, 1.0]));
        let x = [0.5, -2.0, 1.0, 3.0];
        let mut u = [0.0; 4];
        let mut back = [0.0; 4];
        set.lambda_div(&x, &mut u);
        let lam = set.lambda.clone();
        set.jordan_mul(&lam, &u, &mut back);
        assert!(close(&back, &x, 1e-12));
    }

    #[test]
    fn soc_step_hits_boundary() {
        let set = ConeSet::new(&[ConeKind::Soc(3)]);
        let x = [1.0, 0.0, 0.0];
        let dx = [0.0, 1.0, 0.0];
        let a = set.max_step(&x, &dx, f64::INFINITY);
        assert!((a - 1.0).abs() < 1e-14);
        let dx = [1.0, 0.5, 0.0];
        assert_eq!(set.max_step(&x, &dx, 10.0), 10.0);
        let dx = [-1.0, 0.0, 0.0];
        assert!((set.max_step(&x, &dx, 10.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn violations() {
        let cones = [ConeKind::Zero(1), ConeKind::Nonneg(1), ConeKind::Soc(2)];
        assert_eq!(cone_violation(&cones, &[0.5, -2.0, 1.0, 0.0]), 2.0);
        assert_eq!(dual_cone_violation(&cones, &[0.5, 1.0, 1.0, 3.0]), 2.0);
    }
}
