//! Operator splitting (ADMM) cone solver.
//!
//! Splits `A x + s = b, s in K` into an equality constrained least-squares
//! step, solved with one cached factorization per penalty value, and a
//! projection onto `K`. Much slower to reach high accuracy than the interior
//! point method; useful as an independent cross-check on small programs.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use super::cones::{ConeKind, ConeSet};
use super::ipm::{equilibrate, Equilibration};
use super::{Backend, ConeProgram, Residuals, SolveStatus, SolverConfig, SolverResult};
use crate::linalg::{dot, norm_inf, CscMatrix, QuasiDefiniteSolver};

#[derive(Debug, Clone, Copy, Default)]
pub struct AdmmSolver;

impl Backend for AdmmSolver {
    fn name(&self) -> &str {
        "admm"
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        solve(program, config)
    }
}

const SIGMA: f64 = 1e-6;
const RELAX: f64 = 1.6;
const ZERO_RHO_FACTOR: f64 = 1e3;

struct Factor {
    solver: QuasiDefiniteSolver,
    diag_z: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn new(a: &CscMatrix) -> Option<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        let mut trip = Vec::with_capacity(n + m + a.nnz());
        for j in 0..n {
            trip.push((j, j, SIGMA));
        }
        for (i, j, v) in a.triplets() {
            trip.push((j, n + i, v));
        }
        for i in 0..m {
            trip.push((n + i, n + i, -1.0));
        }
        let upper = CscMatrix::from_triplets(n + m, n + m, &trip);
        let diag_z = (0..m)
            .map(|i| {
                let j = n + i;
                let (s, e) = (upper.colptr()[j], upper.colptr()[j + 1]);
                s + upper.rowval()[s..e].binary_search(&j).ok().unwrap()
            })
            .collect();
        let mut signs = vec![1i8; n];
        signs.resize(n + m, -1);
        let solver = QuasiDefiniteSolver::new(&upper, &signs).ok()?;
        Some(Self { solver, diag_z, values: upper.nzval().to_vec() })
    }

    fn refactor(&mut self, rho: &[f64]) -> bool {
        for (i, &p) in self.diag_z.iter().enumerate() {
            self.values[p] = -1.0 / rho[i];
        }
        self.solver.update_values(&self.values);
        self.solver.factor(1e-14, 1e-9).is_ok()
    }
}

fn project(cones: &ConeSet, x: &mut [f64]) {
    for (c, r) in cones.cones().iter().zip(cones.ranges()) {
        let b = &mut x[r.clone()];
        match c {
            ConeKind::Zero(_) => b.iter_mut().for_each(|v| *v = 0.0),
            ConeKind::Nonneg(_) => b.iter_mut().for_each(|v| *v = v.max(0.0)),
            ConeKind::Soc(k) if *k > 0 => {
                let t = b[0];
                let nv = sqrt(dot(&b[1..], &b[1..]));
                if nv <= t {
                } else if nv <= -t {
                    b.iter_mut().for_each(|v| *v = 0.0);
                } else {
                    let a = (t + nv) / 2.0;
                    b[0] = a;
                    for v in &mut b[1..] {
                        *v *= a / nv;
                    }
                }
            }
            ConeKind::Soc(_) => {}
        }
    }
}

fn rho_vector(cones: &ConeSet, rho: f64) -> Vec<f64> {
    let mut out = vec![rho; cones.dim()];
    for (c, r) in cones.cones().iter().zip(cones.ranges()) {
        if let ConeKind::Zero(_) = c {
            out[r.clone()].iter_mut().for_each(|v| *v = rho * ZERO_RHO_FACTOR);
        }
    }
    out
}

struct Errors {
    pres: f64,
    dres: f64,
    gap: f64,
    gap_abs: f64,
    pcost: f64,
    dcost: f64,
    /// Unnormalized residual norms, for penalty adaptation.
    p_ratio: f64,
    d_ratio: f64,
}

fn errors(p: &ConeProgram, x: &[f64], s: &[f64], z: &[f64]) -> Errors {
    let ax = p.a.mul_vec(x);
    let pr = ax.iter().zip(s).zip(&p.b).fold(0.0f64, |m, ((a, s), b)| m.max((a + s - b).abs()));
    let atz = p.a.tmul_vec(z);
    let dr = atz.iter().zip(&p.c).fold(0.0f64, |m, (a, c)| m.max((a + c).abs()));
    let pcost = dot(&p.c, x);
    let dcost = -dot(&p.b, z);
    let pn = 1.0 + norm_inf(&p.b).max(norm_inf(&ax));
    let dn = 1.0 + norm_inf(&p.c).max(norm_inf(&atz));
    Errors {
        pres: pr / pn,
        dres: dr / dn,
        gap: (pcost - dcost).abs() / (1.0 + pcost.abs() + dcost.abs()),
        gap_abs: (pcost - dcost).abs(),
        pcost,
        dcost,
        p_ratio: pr / pn,
        d_ratio: dr / dn,
    }
}

fn unscaled(eq: &Equilibration, x: &[f64], s: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        x.iter().zip(&eq.e).map(|(x, e)| x * e).collect(),
        s.iter().zip(&eq.d).map(|(s, d)| s / d).collect(),
        y.iter().zip(&eq.d).map(|(y, d)| -y * d / eq.c_scale).collect(),
    )
}

pub(crate) fn solve(program: &ConeProgram, cfg: &SolverConfig) -> SolverResult {
    if program.validate().is_err() {
        return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
    }
    let (m, n) = (program.num_rows(), program.num_vars());
    let cones = ConeSet::new(&program.cones);
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
    let Some(mut fac) = Factor::new(&a) else {
        return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
    };
    let mut rho_s = cfg.admm_rho;
    let mut rho = rho_vector(&cones, rho_s);
    if !fac.refactor(&rho) {
        return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
    }

    let mut x = vec![0.0; n];
    let mut s = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut rhs = vec![0.0; n + m];
    let check_every = 25;

    for k in 1..=cfg.admm_max_iters {
        for j in 0..n {
            rhs[j] = SIGMA * x[j] - c[j];
        }
        for i in 0..m {
            rhs[n + i] = b[i] - s[i] + y[i] / rho[i];
        }
        let mut sol = rhs.clone();
        fac.solver.solve_in_place(&mut sol);
        let (xt, nu) = sol.split_at(n);
        let mut s_next = vec![0.0; m];
        let mut s_relaxed = vec![0.0; m];
        for i in 0..m {
            let st = s[i] - (nu[i] + y[i]) / rho[i];
            s_relaxed[i] = RELAX * st + (1.0 - RELAX) * s[i];
            s_next[i] = s_relaxed[i] + y[i] / rho[i];
        }
        for j in 0..n {
            x[j] = RELAX * xt[j] + (1.0 - RELAX) * x[j];
        }
        project(&cones, &mut s_next);
        for i in 0..m {
            y[i] += rho[i] * (s_relaxed[i] - s_next[i]);
        }
        s = s_next;

        if k % check_every == 0 || k == cfg.admm_max_iters {
            let (xo, so, zo) = unscaled(&eq, &x, &s, &y);
            let er = errors(program, &xo, &so, &zo);
            if !(er.pres.is_finite() && er.dres.is_finite()) {
                return SolverResult::failed(SolveStatus::NumericalFailure, program, k);
            }
            if er.pres <= cfg.rel_tol && er.dres <= cfg.rel_tol && (er.gap_abs <= cfg.abs_tol || er.gap <= cfg.rel_tol) {
                return result(SolveStatus::Optimal, xo, so, zo, &er, k);
            }
            // Rebalance the penalty when primal and dual progress diverge.
            let ratio = sqrt(er.p_ratio / er.d_ratio.max(1e-300));
            if ratio.is_finite() && !(0.2..=5.0).contains(&ratio) {
                let new = (rho_s * ratio).clamp(1e-6, 1e6);
                if new != rho_s {
                    rho_s = new;
                    rho = rho_vector(&cones, rho_s);
                    if !fac.refactor(&rho) {
                        return SolverResult::failed(SolveStatus::NumericalFailure, program, k);
                    }
                }
            }
        }
    }
    let (xo, so, zo) = unscaled(&eq, &x, &s, &y);
    let er = errors(program, &xo, &so, &zo);
    result(SolveStatus::IterationLimit, xo, so, zo, &er, cfg.admm_max_iters)
}

fn result(status: SolveStatus, x: Vec<f64>, s: Vec<f64>, z: Vec<f64>, er: &Errors, k: usize) -> SolverResult {
    SolverResult {
        status,
        primal: x,
        slack: s,
        dual: z,
        objective: er.pcost,
        dual_objective: er.dcost,
        residuals: Residuals { primal: er.pres, dual: er.dres, gap: er.gap },
        iterations: k,
        solve_time: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::certify;

    #[test]
    fn agrees_with_known_lp_optimum() {
        // min -x - y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0.
        let a = CscMatrix::from_triplets(
            4,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 1.0), (2, 0, -1.0), (3, 1, -1.0)],
        );
        let p = ConeProgram::new(vec![-1.0, -1.0], a, vec![4.0, 6.0, 0.0, 0.0], vec![ConeKind::Nonneg(4)]).unwrap();
        let cfg = SolverConfig { abs_tol: 1e-7, rel_tol: 1e-7, ..SolverConfig::default() };
        let r = solve(&p, &cfg);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective + 2.8).abs() < 1e-5);
        assert!(certify(&p, &r.primal, &r.slack, &r.dual).passes(1e-6));
    }

    #[test]
    fn soc_projection() {
        let cones = ConeSet::new(&[ConeKind::Soc(3)]);
        let mut x = [0.0, 3.0, 4.0];
        project(&cones, &mut x);
        assert!((x[0] - 2.5).abs() < 1e-15 && (x[1] - 1.5).abs() < 1e-15 && (x[2] - 2.0).abs() < 1e-15);
        let mut x = [-6.0, 3.0, 4.0];
        project(&cones, &mut x);
        assert_eq!(x, [0.0; 3]);
    }
}
