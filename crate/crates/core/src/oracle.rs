//! Exhaustive global solvers for small instances.

use alloc::format;
use alloc::vec::Vec;

use crate::clock::NoClock;
use crate::conic::{Backend, SolverConfig};
use crate::descent::{solve_restriction, Restriction, SignVector};
use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::model::{extremal_mask, recover_theta, to_aub, AubPoint, AubProblem, Design, DesignBounds, DesignProblem, RecoverOptions};
use crate::problems::DiagonalDesignSpec;

pub const DEFAULT_MAX_M: usize = 20;

/// Values within this relative distance of the minimum count as ties, which
/// go to the lexicographically smallest candidate.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub design: Design,
    pub point: AubPoint,
    pub objective: f64,
    pub signs: SignVector,
    /// `p*(s)` for every sign vector, indexed as in [`SignVector::from_index`].
    pub values: Vec<f64>,
}

fn check_m(m: usize, max_m: usize) -> Result<()> {
    if m > max_m || m >= 63 {
        return Err(Error::TooLarge { m, max_m });
    }
    Ok(())
}

/// Index of the tie-broken minimum of `values`, skipping non-finite entries.
pub fn tie_broken_argmin(values: &[f64]) -> Option<usize> {
    let best = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    let tol = TIE_TOL * best.abs().max(1.0);
    values.iter().position(|&v| v.is_finite() && v <= best + tol)
}

/// Solves the restriction for sign vector number `k`.
pub fn evaluate_sign_index<B: Backend + ?Sized>(aub: &AubProblem, k: u64, backend: &B, cfg: &SolverConfig) -> Result<Restriction> {
    solve_restriction(aub, &SignVector::from_index(k, aub.m()), backend, &NoClock, cfg)
}

/// Picks the winner among per-pattern values and re-solves it for the point.
pub fn finish_by_signs<B: Backend + ?Sized>(
    aub: &AubProblem,
    values: Vec<f64>,
    backend: &B,
    cfg: &SolverConfig,
    opts: &RecoverOptions,
) -> Result<GlobalSolution> {
    let k = tie_broken_argmin(&values).ok_or(Error::NoFeasiblePattern)?;
    let r = evaluate_sign_index(aub, k as u64, backend, cfg)?;
    let point = r.point.ok_or(Error::Solver(r.status))?;
    let design = recover_theta(&point.v, &point.w, aub.bounds(), opts)?;
    Ok(GlobalSolution { design, point, objective: values[k], signs: SignVector::from_index(k as u64, aub.m()), values })
}

/// Minimum of the restriction over all `2^m` sign vectors.
pub fn global_by_signs<B: Backend + ?Sized>(
    problem: &DesignProblem,
    max_m: usize,
    backend: &B,
    cfg: &SolverConfig,
) -> Result<GlobalSolution> {
    let aub = to_aub(problem)?;
    let m = aub.m();
    check_m(m, max_m)?;
    let mut values = Vec::with_capacity(1 << m);
    for k in 0..(1u64 << m) {
        values.push(evaluate_sign_index(&aub, k, backend, cfg)?.objective);
    }
    finish_by_signs(&aub, values, backend, cfg, &RecoverOptions::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalSolution {
    pub design: Design,
    pub field: Vec<f64>,
    pub objective: f64,
    /// Vertices where `A + diag(theta)` was singular.
    pub skipped: Vec<u64>,
}

/// Design at vertex `k`: bit `m - 1 - i` set means `theta_i = theta_max_i`.
pub fn vertex(bounds: &DesignBounds, k: u64) -> Vec<f64> {
    let m = bounds.len();
    (0..m)
        .map(|i| if (k >> (m - 1 - i)) & 1 == 1 { bounds.theta_max()[i] } else { bounds.theta_min()[i] })
        .collect()
}

/// Best extremal design by direct physics solves at every vertex of the box.
pub fn global_extremal(spec: &DiagonalDesignSpec, max_m: usize) -> Result<ExtremalSolution> {
    spec.validate()?;
    let m = spec.n();
    check_m(m, max_m)?;
    let mut values = Vec::with_capacity(1 << m);
    let mut skipped = Vec::new();
    for k in 0..(1u64 << m) {
        match spec.physics_solve(&vertex(&spec.bounds, k)) {
            Ok(z) => values.push(spec.objective.eval(&z)),
            Err(_) => {
                values.push(f64::INFINITY);
                skipped.push(k);
            }
        }
    }
    let k = tie_broken_argmin(&values).ok_or(Error::NoFeasiblePattern)?;
    let theta = vertex(&spec.bounds, k as u64);
    let field = spec.physics_solve(&theta)?;
    let mask = extremal_mask(&theta, &spec.bounds, 1e-12);
    Ok(ExtremalSolution {
        design: Design { theta, extremal_mask: mask, clip_warnings: Vec::new() },
        field,
        objective: values[k],
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalityReport {
    pub fraction_extremal: f64,
    /// Largest `min(theta - theta_min, theta_max - theta) / width` over the design.
    pub worst_interior_gap: f64,
}

pub fn extremality_report(design: &Design, bounds: &DesignBounds, tol: f64) -> Result<ExtremalityReport> {
    if design.theta.len() != bounds.len() {
        return Err(Error::Dimension(format!("{} design values for {} bounds", design.theta.len(), bounds.len())));
    }
    let m = bounds.len();
    let mask = extremal_mask(&design.theta, bounds, tol);
    let mut worst = 0.0f64;
    for i in 0..m {
        let (lo, hi) = (bounds.theta_min()[i], bounds.theta_max()[i]);
        if hi > lo {
            let t = design.theta[i];
            worst = worst.max((t - lo).min(hi - t) / (hi - lo));
        }
    }
    let fraction = if m == 0 { 1.0 } else { mask.iter().filter(|&&b| b).count() as f64 / m as f64 };
    Ok(ExtremalityReport { fraction_extremal: fraction, worst_interior_gap: worst })
}

/// Direct physics solve at a fixed design, for cross-checks.
pub fn fixed_design_value(spec: &DiagonalDesignSpec, theta: &[f64]) -> Result<f64> {
    let z = solve_square(&spec.operator(theta), &spec.b)?;
    Ok(spec.objective.eval(&z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::InteriorPointSolver;
    use crate::linalg::CscMatrix;
    use crate::model::{ObjectiveSpec, SparseVec};
    use crate::problems::build_diagonal;

    fn toy() -> DiagonalDesignSpec {
        DiagonalDesignSpec {
            a: CscMatrix::zeros(1, 1),
            b: alloc::vec![1.0],
            bounds: DesignBounds::uniform(1, 1.0, 2.0).unwrap(),
            objective: ObjectiveSpec::linear(SparseVec::new(alloc::vec![0], alloc::vec![1.0])),
        }
    }

    #[test]
    fn toy_global_optimum() {
        let spec = toy();
        let p = build_diagonal(&spec).unwrap();
        let g = global_by_signs(&p, DEFAULT_MAX_M, &InteriorPointSolver, &SolverConfig::default()).unwrap();
        assert_eq!(g.values.len(), 2);
        assert!((g.objective - 0.5).abs() < 1e-7);
        assert!((g.design.theta[0] - 2.0).abs() < 1e-6);
        let e = global_extremal(&spec, DEFAULT_MAX_M).unwrap();
        assert!((e.objective - 0.5).abs() < 1e-15);
        assert_eq!(e.design.theta, alloc::vec![2.0]);
    }

    #[test]
    fn refuses_large_m() {
        let spec = toy();
        let p = build_diagonal(&spec).unwrap();
        assert!(matches!(
            global_by_signs(&p, 0, &InteriorPointSolver, &SolverConfig::default()),
            Err(Error::TooLarge { m: 1, max_m: 0 })
        ));
    }

    #[test]
    fn ties_take_the_first() {
        assert_eq!(tie_broken_argmin(&[f64::INFINITY, 1.0, 1.0 - 1e-12, 2.0]), Some(1));
        assert_eq!(tie_broken_argmin(&[f64::INFINITY]), None);
    }

    #[test]
    fn report_counts_endpoints() {
        let b = DesignBounds::uniform(4, 0.0, 1.0).unwrap();
        let d = Design { theta: alloc::vec![0.0, 1.0, 0.5, 1e-9], extremal_mask: alloc::vec![], clip_warnings: alloc::vec![] };
        let r = extremality_report(&d, &b, 1e-6).unwrap();
        assert_eq!(r.fraction_extremal, 0.75);
        assert_eq!(r.worst_interior_gap, 0.5);
    }
}
