//! The `bound` backend: cone programs handed to Clarabel.

use clarabel::algebra::CscMatrix as ClCsc;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, SupportedConeT, ZeroConeT,
};
use signflip_core::conic::{Backend, ConeKind, ConeProgram, Residuals, SolveStatus, SolverConfig, SolverResult};

#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelSolver;

fn cones(kinds: &[ConeKind]) -> Vec<SupportedConeT<f64>> {
    kinds
        .iter()
        .map(|k| match *k {
            ConeKind::Zero(n) => ZeroConeT(n),
            ConeKind::Nonneg(n) => NonnegativeConeT(n),
            ConeKind::Soc(n) => SecondOrderConeT(n),
        })
        .collect()
}

fn status(s: SolverStatus) -> SolveStatus {
    match s {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible => SolveStatus::PrimalInfeasible,
        SolverStatus::DualInfeasible => SolveStatus::DualInfeasibleOrUnbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalFailure,
    }
}

impl Backend for ClarabelSolver {
    fn name(&self) -> &str {
        "bound"
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        if program.validate().is_err() {
            return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
        }
        let (m, n) = (program.num_rows(), program.num_vars());
        let a = &program.a;
        let a = ClCsc::new(m, n, a.colptr().to_vec(), a.rowval().to_vec(), a.nzval().to_vec());
        let p = ClCsc::zeros((n, n));
        let settings = DefaultSettings {
            verbose: config.verbose,
            max_iter: config.max_iters as u32,
            tol_gap_abs: config.abs_tol,
            tol_gap_rel: config.rel_tol,
            tol_feas: config.rel_tol,
            tol_infeas_abs: config.infeas_tol,
            tol_infeas_rel: config.infeas_tol,
            ..DefaultSettings::default()
        };
        let Ok(mut solver) = DefaultSolver::new(&p, &program.c, &a, &program.b, &cones(&program.cones), settings) else {
            return SolverResult::failed(SolveStatus::NumericalFailure, program, 0);
        };
        solver.solve();
        let sol = &solver.solution;
        let st = status(sol.status);
        if !matches!(st, SolveStatus::Optimal) {
            let mut r = SolverResult::failed(st, program, sol.iterations as usize);
            let inf = if st == SolveStatus::DualInfeasibleOrUnbounded { f64::NEG_INFINITY } else { f64::INFINITY };
            r.objective = inf;
            r.dual_objective = inf;
            return r;
        }
        SolverResult {
            status: st,
            primal: sol.x.clone(),
            slack: sol.s.clone(),
            dual: sol.z.clone(),
            objective: sol.obj_val,
            dual_objective: sol.obj_val_dual,
            residuals: Residuals { primal: sol.r_prim, dual: sol.r_dual, gap: (sol.obj_val - sol.obj_val_dual).abs() },
            iterations: sol.iterations as usize,
            solve_time: sol.solve_time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use signflip_core::linalg::CscMatrix;

    #[test]
    fn lp_and_infeasible() {
        // min z s.t. z >= 3
        let p = ConeProgram::new(vec![1.0], CscMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]), vec![-3.0], vec![ConeKind::Nonneg(1)])
            .unwrap();
        let r = ClarabelSolver.solve(&p, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-7);
        assert!(r.certify(&p).passes(1e-7));

        // z >= 1, z <= 0
        let p = ConeProgram::new(
            vec![0.0],
            CscMatrix::from_triplets(2, 1, &[(0, 0, -1.0), (1, 0, 1.0)]),
            vec![-1.0, 0.0],
            vec![ConeKind::Nonneg(2)],
        )
        .unwrap();
        assert_eq!(ClarabelSolver.solve(&p, &SolverConfig::default()).status, SolveStatus::PrimalInfeasible);
    }
}
