//! Primal-dual interior point method on the homogeneous self-dual embedding
//! with Nesterov-Todd scaling and Mehrotra correction.

use alloc::vec;
use alloc::vec::Vec;

use super::cones::{ConeKind, ConeSet};
use super::{Backend, ConeProgram, Residuals, SolveStatus, SolverConfig, SolverResult};
use crate::linalg::{dot, norm_inf, CscMatrix, QuasiDefiniteSolver};

/// The reference cone solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPointSolver;

impl Backend for InteriorPointSolver {
    fn name(&self) -> &str {
        "reference"
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        solve(program, config)
    }
}

/// `A_scaled = diag(d) A diag(e)`, `c_scaled = c_scale * diag(e) c`, `b_scaled = diag(d) b`.
#[derive(Debug, Clone)]
pub(super) struct Equilibration {
    pub(super) d: Vec<f64>,
    pub(super) e: Vec<f64>,
    pub(super) c_scale: f64,
}

pub(super) fn equilibrate(p: &ConeProgram, cones: &ConeSet, iters: usize) -> (CscMatrix, Vec<f64>, Vec<f64>, Equilibration) {
    let (m, n) = (p.num_rows(), p.num_vars());
    let mut a = p.a.clone();
    let mut d = vec![1.0; m];
    let mut e = vec![1.0; n];
    let clamp = |v: f64| if v > 0.0 { (1.0 / libm::sqrt(v)).clamp(1e-4, 1e4) } else { 1.0 };
    for _ in 0..iters {
        let de: Vec<f64> = a.col_norm_inf().into_iter().map(clamp).collect();
        let mut dd: Vec<f64> = a.row_norm_inf().into_iter().map(clamp).collect();
        // Second-order cones need one scale per block.
        for (c, r) in cones.cones().iter().zip(cones.ranges()) {
            if let ConeKind::Soc(k) = c {
                if *k > 0 {
                    let mean = dd[r.clone()].iter().sum::<f64>() / *k as f64;
                    dd[r.clone()].iter_mut().for_each(|v| *v = mean);
                }
            }
        }
        a.scale(&dd, &de);
        for (di, x) in d.iter_mut().zip(&dd) {
            *di *= x;
        }
        for (ej, x) in e.iter_mut().zip(&de) {
            *ej *= x;
        }
    }
    let mut c: Vec<f64> = p.c.iter().zip(&e).map(|(c, e)| c * e).collect();
    let cn = norm_inf(&c);
    let c_scale = if cn > 0.0 { (1.0 / cn).clamp(1e-4, 1e4) } else { 1.0 };
    c.iter_mut().for_each(|v| *v *= c_scale);
    let b: Vec<f64> = p.b.iter().zip(&d).map(|(b, d)| b * d).collect();
    (a, b, c, Equilibration { d, e, c_scale })
}

/// Quasi-definite KKT system `[[0, A^T], [A, -H]]` with static regularization.
#[derive(Debug)]
struct Kkt {
    n: usize,
    m: usize,
    values: Vec<f64>,
    diag_x: Vec<usize>,
    diag_z: Vec<usize>,
    /// `(cone, local i, local j, position)` of the off-diagonal SOC entries, `i < j`.
    soc_pos: Vec<(usize, usize, usize, usize)>,
    solver: QuasiDefiniteSolver,
    static_reg: f64,
}

impl Kkt {
    fn new(a: &CscMatrix, cones: &ConeSet, static_reg: f64) -> Option<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        let mut trip = Vec::with_capacity(n + m + a.nnz());
        for j in 0..n {
            trip.push((j, j, 1.0));
        }
        for (i, j, _) in a.triplets() {
            trip.push((j, n + i, 1.0));
        }
        for i in 0..m {
            trip.push((n + i, n + i, 1.0));
        }
        for (c, r) in cones.cones().iter().zip(cones.ranges()) {
            if let ConeKind::Soc(_) = c {
                for jj in r.clone() {
                    for ii in r.start..jj {
                        trip.push((n + ii, n + jj, 1.0));
                    }
                }
            }
        }
        let upper = CscMatrix::from_triplets(n + m, n + m, &trip);
        let pos = |i: usize, j: usize| -> usize {
            let start = upper.colptr()[j];
            let end = upper.colptr()[j + 1];
            start + upper.rowval()[start..end].binary_search(&i).expect("entry in pattern")
        };
        let diag_x = (0..n).map(|j| pos(j, j)).collect();
        let diag_z = (0..m).map(|i| pos(n + i, n + i)).collect();
        let a_pos: Vec<usize> = a.triplets().map(|(i, j, _)| pos(j, n + i)).collect();
        let mut soc_pos = Vec::new();
        for (k, (c, r)) in cones.cones().iter().zip(cones.ranges()).enumerate() {
            if let ConeKind::Soc(_) = c {
                for jj in r.clone() {
                    for ii in r.start..jj {
                        soc_pos.push((k, ii - r.start, jj - r.start, pos(n + ii, n + jj)));
                    }
                }
            }
        }
        let mut signs = vec![1i8; n];
        signs.resize(n + m, -1);
        let solver = QuasiDefiniteSolver::new(&upper, &signs).ok()?;
        let mut values = vec![0.0; upper.nnz()];
        for (p, (_, _, v)) in a.triplets().enumerate() {
            values[a_pos[p]] = v;
        }
        Some(Self { n, m, values, diag_x, diag_z, soc_pos, solver, static_reg })
    }

    /// Loads `-H` (or `-I` on non-zero cones when `identity`) and factors.
    fn factor(&mut self, cones: &ConeSet, identity: bool, cfg: &SolverConfig) -> bool {
        for &p in &self.diag_x {
            self.values[p] = self.static_reg;
        }
        for (k, (c, r)) in cones.cones().iter().zip(cones.ranges()).enumerate() {
            for i in r.clone() {
                let h = match c {
                    ConeKind::Zero(_) => 0.0,
                    _ if identity => 1.0,
                    _ => cones.h_entry(k, i - r.start, i - r.start),
                };
                self.values[self.diag_z[i]] = -h - self.static_reg;
            }
        }
        for &(k, i, j, p) in &self.soc_pos {
            self.values[p] = if identity { 0.0 } else { -cones.h_entry(k, i, j) };
        }
        self.solver.update_values(&self.values);
        self.solver.factor(cfg.dynamic_eps, cfg.dynamic_delta).is_ok()
    }

    /// Unregularized product `[A^T z; A x - H z]`.
    fn apply(&self, a: &CscMatrix, cones: &ConeSet, identity: bool, sol: &[f64], out: &mut [f64]) {
        let (x, z) = sol.split_at(self.n);
        let (ox, oz) = out.split_at_mut(self.n);
        ox.iter_mut().for_each(|v| *v = 0.0);
        a.tmul_acc(1.0, z, ox);
        oz.iter_mut().for_each(|v| *v = 0.0);
        a.mul_acc(1.0, x, oz);
        let mut hz = vec![0.0; self.m];
        if identity {
            for (c, r) in cones.cones().iter().zip(cones.ranges()) {
                if !matches!(c, ConeKind::Zero(_)) {
                    hz[r.clone()].copy_from_slice(&z[r.clone()]);
                }
            }
        } else {
            cones.h_mul(z, &mut hz);
        }
        for (o, h) in oz.iter_mut().zip(&hz) {
            *o -= h;
        }
    }

    fn solve(&mut self, a: &CscMatrix, cones: &ConeSet, identity: bool, rhs: &[f64], steps: usize) -> Vec<f64> {
        let mut sol = rhs.to_vec();
        self.solver.solve_in_place(&mut sol);
        let dim = self.n + self.m;
        let mut kx = vec![0.0; dim];
        let rnorm = norm_inf(rhs);
        let mut last = f64::INFINITY;
        for _ in 0..steps {
            self.apply(a, cones, identity, &sol, &mut kx);
            let mut err: Vec<f64> = rhs.iter().zip(&kx).map(|(r, k)| r - k).collect();
            let en = norm_inf(&err);
            if en <= 1e-14 * (1.0 + rnorm) || en > last / 2.0 {
                break;
            }
            last = en;
            self.solver.solve_in_place(&mut err);
            for (s, e) in sol.iter_mut().zip(&err) {
                *s += e;
            }
        }
        sol
    }
}

struct Metrics {
    pres: f64,
    dres: f64,
    gap_abs: f64,
    gap_rel: f64,
    pcost: f64,
    dcost: f64,
}

struct Unscaled {
    x: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
}

fn unscale(eq: &Equilibration, x: &[f64], s: &[f64], z: &[f64], tau: f64) -> Unscaled {
    Unscaled {
        x: x.iter().zip(&eq.e).map(|(x, e)| x * e / tau).collect(),
        s: s.iter().zip(&eq.d).map(|(s, d)| s / d / tau).collect(),
        z: z.iter().zip(&eq.d).map(|(z, d)| z * d / (eq.c_scale * tau)).collect(),
    }
}

fn metrics(p: &ConeProgram, u: &Unscaled) -> Metrics {
    let ax = p.a.mul_vec(&u.x);
    let pres = ax.iter().zip(&u.s).zip(&p.b).fold(0.0f64, |m, ((a, s), b)| m.max((a + s - b).abs()));
    let atz = p.a.tmul_vec(&u.z);
    let dres = atz.iter().zip(&p.c).fold(0.0f64, |m, (a, c)| m.max((a + c).abs()));
    let pcost = dot(&p.c, &u.x);
    let dcost = -dot(&p.b, &u.z);
    let gap_abs = (pcost - dcost).abs();
    Metrics {
        pres: pres / (1.0 + norm_inf(&p.b).max(norm_inf(&ax))),
        dres: dres / (1.0 + norm_inf(&p.c).max(norm_inf(&atz))),
        gap_abs,
        gap_rel: gap_abs / (1.0 + pcost.abs() + dcost.abs()),
        pcost,
        dcost,
    }
}

fn done(mt: &Metrics, feas: f64, gap_abs: f64, gap_rel: f64) -> bool {
    mt.pres <= feas && mt.dres <= feas && (mt.gap_abs <= gap_abs || mt.gap_rel <= gap_rel)
}

pub(crate) fn solve(program: &ConeProgram, cfg: &SolverConfig) -> SolverResult {
    if program.validate().is_err() {
        return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
    }
    let (m, n) = (program.num_rows(), program.num_vars());
    let mut cones = ConeSet::new(&program.cones);
    let (a, b, c, eq) = if cfg.equilibrate {
        equilibrate(program, &cones, cfg.equilibrate_iters)
    } else {
        (
            program.a.clone(),
            program.b.clone(),
            program.c.clone(),
            Equilibration { d: vec![1.0; m], e: vec![1.0; n], c_scale: 1.0 },
        )
    };
    let Some(mut kkt) = Kkt::new(&a, &cones, cfg.static_reg) else {
        return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
    };

    // Initial point from two least-squares type solves with H = I.
    if !kkt.factor(&cones, true, cfg) {
        return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
    }
    let mut rhs = vec![0.0; n + m];
    rhs[n..].copy_from_slice(&b);
    let sol = kkt.solve(&a, &cones, true, &rhs, cfg.refine_steps);
    let mut x = sol[..n].to_vec();
    let mut s: Vec<f64> = sol[n..].iter().map(|v| -v).collect();
    cones.shift_to_interior(&mut s, 1.0, true);
    for (r, ci) in rhs.iter_mut().zip(&c) {
        *r = -ci;
    }
    rhs[n..].iter_mut().for_each(|v| *v = 0.0);
    let sol = kkt.solve(&a, &cones, true, &rhs, cfg.refine_steps);
    let mut z = sol[n..].to_vec();
    cones.shift_to_interior(&mut z, 1.0, false);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);
    let nu = cones.degree() as f64;

    let mut rx = vec![0.0; n];
    let mut rz = vec![0.0; m];
    let mut status = SolveStatus::IterationLimit;
    let mut iter = 0;

    while iter <= cfg.max_iters {
        // Residuals of the embedding.
        rx.iter_mut().zip(&c).for_each(|(r, ci)| *r = ci * tau);
        a.tmul_acc(1.0, &z, &mut rx);
        rz.iter_mut().zip(s.iter().zip(&b)).for_each(|(r, (si, bi))| *r = si - bi * tau);
        a.mul_acc(1.0, &x, &mut rz);
        let cx = dot(&c, &x);
        let bz = dot(&b, &z);
        let rtau = cx + bz + kappa;
        let mu = (dot(&s, &z) + tau * kappa) / (nu + 1.0);

        let un = unscale(&eq, &x, &s, &z, tau);
        let mt = metrics(program, &un);
        if !(mt.pres.is_finite() && mt.dres.is_finite() && mt.gap_abs.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if done(&mt, cfg.rel_tol, cfg.abs_tol, cfg.rel_tol) {
            return finish(SolveStatus::Optimal, un, &mt, iter);
        }
        if kappa > tau {
            if let Some(res) = infeasibility(program, &eq, &x, &s, &z, cfg.infeas_tol, iter) {
                return res;
            }
        }
        if iter == cfg.max_iters {
            break;
        }
        iter += 1;

        if !cones.update_scaling(&s, &z) || !kkt.factor(&cones, false, cfg) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        let mut rhs1 = vec![0.0; n + m];
        rhs1[..n].iter_mut().zip(&c).for_each(|(r, ci)| *r = -ci);
        rhs1[n..].copy_from_slice(&b);
        let sol1 = kkt.solve(&a, &cones, false, &rhs1, cfg.refine_steps);
        let (x1, z1) = sol1.split_at(n);
        let denom = dot(&c, x1) + dot(&b, z1) - kappa / tau;

        let lam = cones.lambda.clone();
        let mut lam_sq = vec![0.0; m];
        cones.jordan_mul(&lam, &lam, &mut lam_sq);

        let mut direction = |eta: f64, ds: &[f64], dkappa: f64| -> Direction {
            let mut q = vec![0.0; m];
            cones.lambda_div(ds, &mut q);
            let mut wq = vec![0.0; m];
            cones.w_mul(&q, &mut wq);
            let mut rhs2 = vec![0.0; n + m];
            rhs2[..n].iter_mut().zip(&rx).for_each(|(r, v)| *r = -eta * v);
            rhs2[n..].iter_mut().zip(rz.iter().zip(&wq)).for_each(|(r, (v, w))| *r = -eta * v - w);
            let sol2 = kkt.solve(&a, &cones, false, &rhs2, cfg.refine_steps);
            let (x2, z2) = sol2.split_at(n);
            let dtau = (-eta * rtau - dot(&c, x2) - dot(&b, z2) - dkappa / tau) / denom;
            let dx: Vec<f64> = x2.iter().zip(x1).map(|(a, b)| a + dtau * b).collect();
            let dz: Vec<f64> = z2.iter().zip(z1).map(|(a, b)| a + dtau * b).collect();
            let mut wdz = vec![0.0; m];
            cones.w_mul(&dz, &mut wdz);
            let diff: Vec<f64> = q.iter().zip(&wdz).map(|(a, b)| a - b).collect();
            let mut ds_ = vec![0.0; m];
            cones.w_mul(&diff, &mut ds_);
            let dk = (dkappa - kappa * dtau) / tau;
            Direction { dx, ds: ds_, dz, dtau, dkappa: dk }
        };

        // Predictor.
        let ds_aff: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let aff = direction(1.0, &ds_aff, -kappa * tau);
        let alpha_aff = step_length(&cones, &s, &z, tau, kappa, &aff).min(1.0);
        let sigma = (1.0 - alpha_aff) * (1.0 - alpha_aff) * (1.0 - alpha_aff);

        // Corrector.
        let mut wdz = vec![0.0; m];
        let mut wids = vec![0.0; m];
        cones.w_mul(&aff.dz, &mut wdz);
        cones.winv_mul(&aff.ds, &mut wids);
        let mut corr = vec![0.0; m];
        cones.jordan_mul(&wids, &wdz, &mut corr);
        let mut ds_cc: Vec<f64> = lam_sq.iter().zip(&corr).map(|(l, c)| -l - c).collect();
        cones.add_identity(sigma * mu, &mut ds_cc);
        let dk_cc = -kappa * tau + sigma * mu - aff.dkappa * aff.dtau;
        let dir = direction(1.0 - sigma, &ds_cc, dk_cc);
        let alpha = (cfg.step_fraction * step_length(&cones, &s, &z, tau, kappa, &dir)).min(1.0);
        if !(alpha > 1e-10) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        for (v, d) in x.iter_mut().zip(&dir.dx) {
            *v += alpha * d;
        }
        for (v, d) in s.iter_mut().zip(&dir.ds) {
            *v += alpha * d;
        }
        for (v, d) in z.iter_mut().zip(&dir.dz) {
            *v += alpha * d;
        }
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        if !(tau > 0.0 && kappa > 0.0) {
            status = SolveStatus::NumericalFailure;
            break;
        }
    }

    let un = unscale(&eq, &x, &s, &z, tau);
    let mt = metrics(program, &un);
    finish(status, un, &mt, iter)
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<f64>,
    dz: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

fn step_length(cones: &ConeSet, s: &[f64], z: &[f64], tau: f64, kappa: f64, d: &Direction) -> f64 {
    let mut alpha = f64::INFINITY;
    if d.dtau < 0.0 {
        alpha = alpha.min(-tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        alpha = alpha.min(-kappa / d.dkappa);
    }
    alpha = cones.max_step(s, &d.ds, alpha);
    cones.max_step(z, &d.dz, alpha)
}

fn finish(status: SolveStatus, u: Unscaled, mt: &Metrics, iterations: usize) -> SolverResult {
    SolverResult {
        status,
        primal: u.x,
        slack: u.s,
        dual: u.z,
        objective: mt.pcost,
        dual_objective: mt.dcost,
        residuals: Residuals { primal: mt.pres, dual: mt.dres, gap: mt.gap_rel },
        iterations,
        solve_time: 0.0,
    }
}

/// Checks the current iterate for a Farkas-type certificate.
fn infeasibility(
    p: &ConeProgram,
    eq: &Equilibration,
    x: &[f64],
    s: &[f64],
    z: &[f64],
    tol: f64,
    iter: usize,
) -> Option<SolverResult> {
    let u = unscale(eq, x, s, z, 1.0);
    let bz = dot(&p.b, &u.z);
    if bz < 0.0 {
        let atz = p.a.tmul_vec(&u.z);
        if norm_inf(&atz) <= -tol * bz {
            let sc = -1.0 / bz;
            return Some(SolverResult {
                status: SolveStatus::PrimalInfeasible,
                primal: vec![0.0; p.num_vars()],
                slack: vec![0.0; p.num_rows()],
                dual: u.z.iter().map(|v| v * sc).collect(),
                objective: f64::INFINITY,
                dual_objective: f64::INFINITY,
                residuals: Residuals::default(),
                iterations: iter,
                solve_time: 0.0,
            });
        }
    }
    let cx = dot(&p.c, &u.x);
    if cx < 0.0 {
        let mut axs = p.a.mul_vec(&u.x);
        for (v, si) in axs.iter_mut().zip(&u.s) {
            *v += si;
        }
        if norm_inf(&axs) <= -tol * cx {
            let sc = -1.0 / cx;
            return Some(SolverResult {
                status: SolveStatus::DualInfeasibleOrUnbounded,
                primal: u.x.iter().map(|v| v * sc).collect(),
                slack: u.s.iter().map(|v| v * sc).collect(),
                dual: vec![0.0; p.num_rows()],
                objective: f64::NEG_INFINITY,
                dual_objective: f64::NEG_INFINITY,
                residuals: Residuals::default(),
                iterations: iter,
                solve_time: 0.0,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::certify;

    fn lp(c: &[f64], rows: &[(Vec<(usize, f64)>, f64)], n_zero: usize) -> ConeProgram {
        let mut trip = Vec::new();
        for (i, (r, _)) in rows.iter().enumerate() {
            for &(j, v) in r {
                trip.push((i, j, v));
            }
        }
        let a = CscMatrix::from_triplets(rows.len(), c.len(), &trip);
        let b = rows.iter().map(|r| r.1).collect();
        let mut cones = Vec::new();
        if n_zero > 0 {
            cones.push(ConeKind::Zero(n_zero));
        }
        if rows.len() > n_zero {
            cones.push(ConeKind::Nonneg(rows.len() - n_zero));
        }
        ConeProgram::new(c.to_vec(), a, b, cones).unwrap()
    }

    #[test]
    fn small_lp() {
        // min -x - y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0. Optimum at (8/5, 6/5).
        let p = lp(
            &[-1.0, -1.0],
            &[
                (vec![(0, 1.0), (1, 2.0)], 4.0),
                (vec![(0, 3.0), (1, 1.0)], 6.0),
                (vec![(0, -1.0)], 0.0),
                (vec![(1, -1.0)], 0.0),
            ],
            0,
        );
        let r = solve(&p, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.primal[0] - 1.6).abs() < 1e-7 && (r.primal[1] - 1.2).abs() < 1e-7, "{:?}", r.primal);
        assert!((r.objective + 2.8).abs() < 1e-7);
        assert!(certify(&p, &r.primal, &r.slack, &r.dual).passes(1e-7));
    }

    #[test]
    fn equality_and_soc() {
        // min t s.t. ||(x - 1, y - 2)|| <= t, x + y = 0. Optimum distance 3 / sqrt(2).
        let a = CscMatrix::from_triplets(4, 3, &[(0, 0, 1.0), (0, 1, 1.0), (1, 2, -1.0), (2, 0, -1.0), (3, 1, -1.0)]);
        let p = ConeProgram::new(
            vec![0.0, 0.0, 1.0],
            a,
            vec![0.0, 0.0, -1.0, -2.0],
            vec![ConeKind::Zero(1), ConeKind::Soc(3)],
        )
        .unwrap();
        let r = solve(&p, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0 / libm::sqrt(2.0)).abs() < 1e-7);
        assert!((r.primal[0] + 0.5).abs() < 1e-6 && (r.primal[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn detects_primal_infeasibility() {
        // x <= -1, x >= 1.
        let p = lp(&[1.0], &[(vec![(0, 1.0)], -1.0), (vec![(0, -1.0)], -1.0)], 0);
        let r = solve(&p, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::PrimalInfeasible);
    }

    #[test]
    fn detects_unboundedness() {
        // min -x s.t. -x <= 0.
        let p = lp(&[-1.0], &[(vec![(0, -1.0)], 0.0)], 0);
        let r = solve(&p, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::DualInfeasibleOrUnbounded);
    }
}
