//! Cone programs, the sign-fixed lowering and cone solvers.
//!
//! Programs have the form
//!
//! ```text
//! minimize c^T x  s.t.  A x + s = b,  s in K
//! ```
//!
//! where `K` is a product of zero, nonnegative and second-order cones. The
//! dual is `maximize -b^T z s.t. A^T z + c = 0, z in K*`.

mod admm;
mod cones;
mod ipm;

pub use admm::AdmmSolver;
pub use cones::{cone_violation, dual_cone_violation, ConeKind, ConeSet};
pub use ipm::InteriorPointSolver;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, CscMatrix, TripletBuilder};
use crate::model::{eval_objective, AubPoint, AubProblem, VariableLayout};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeProgram {
    pub c: Vec<f64>,
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<ConeKind>,
}

impl ConeProgram {
    pub fn new(c: Vec<f64>, a: CscMatrix, b: Vec<f64>, cones: Vec<ConeKind>) -> Result<Self> {
        let p = Self { c, a, b, cones };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.ncols() != self.c.len() {
            return Err(Error::Dimension(format!("A has {} columns, c has length {}", self.a.ncols(), self.c.len())));
        }
        if self.a.nrows() != self.b.len() {
            return Err(Error::Dimension(format!("A has {} rows, b has length {}", self.a.nrows(), self.b.len())));
        }
        let total: usize = self.cones.iter().map(ConeKind::dim).sum();
        if total != self.b.len() {
            return Err(Error::Dimension(format!("cones cover {total} rows, b has {}", self.b.len())));
        }
        if self.c.iter().chain(&self.b).chain(self.a.nzval()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("cone program data must be finite".into()));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasibleOrUnbounded,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_optimal(self) -> bool {
        self == SolveStatus::Optimal
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasibleOrUnbounded => "dual_infeasible_or_unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// Solver tolerances and limits.
///
/// A solve is optimal when the relative primal and dual residuals (see
/// [`Certificate`]) are at most `rel_tol` and the duality gap is at most
/// `abs_tol` in absolute or `rel_tol` in relative terms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub verbose: bool,
    /// Threshold for accepting an infeasibility certificate.
    pub infeas_tol: f64,
    pub equilibrate: bool,
    pub equilibrate_iters: usize,
    pub static_reg: f64,
    pub dynamic_eps: f64,
    pub dynamic_delta: f64,
    pub refine_steps: usize,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Iteration cap for the operator splitting backend.
    pub admm_max_iters: usize,
    pub admm_rho: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_iters: 200,
            verbose: false,
            infeas_tol: 1e-8,
            equilibrate: true,
            equilibrate_iters: 10,
            static_reg: 1e-8,
            dynamic_eps: 1e-13,
            dynamic_delta: 2e-7,
            refine_steps: 10,
            step_fraction: 0.99,
            admm_max_iters: 50_000,
            admm_rho: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub slack: Vec<f64>,
    /// Multiplier of the cone constraint.
    pub dual: Vec<f64>,
    /// `c^T x`
    pub objective: f64,
    /// `-b^T z`
    pub dual_objective: f64,
    /// As measured by the solver at termination.
    pub residuals: Residuals,
    pub iterations: usize,
    /// Seconds; filled in by callers that own a clock.
    pub solve_time: f64,
}

impl SolverResult {
    pub fn failed(status: SolveStatus, program: &ConeProgram, iterations: usize) -> Self {
        Self {
            status,
            primal: vec![0.0; program.num_vars()],
            slack: vec![0.0; program.num_rows()],
            dual: vec![0.0; program.num_rows()],
            objective: f64::NAN,
            dual_objective: f64::NAN,
            residuals: Residuals { primal: f64::NAN, dual: f64::NAN, gap: f64::NAN },
            iterations,
            solve_time: 0.0,
        }
    }

    pub fn certify(&self, program: &ConeProgram) -> Certificate {
        certify(program, &self.primal, &self.slack, &self.dual)
    }
}

/// A cone solver.
pub trait Backend {
    fn name(&self) -> &str;
    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        (**self).solve(program, config)
    }
}

/// Relative optimality residuals of a primal-dual pair, computed from the
/// program data alone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    /// `||A x + s - b||_inf / (1 + max(||b||_inf, ||A x||_inf))`
    pub primal_residual: f64,
    /// `||A^T z + c||_inf / (1 + max(||c||_inf, ||A^T z||_inf))`
    pub dual_residual: f64,
    /// `|c^T x + b^T z| / (1 + |c^T x| + |b^T z|)`
    pub gap: f64,
    pub cone_violation: f64,
    pub dual_cone_violation: f64,
}

impl Certificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.primal_residual.max(self.cone_violation) <= tol
            && self.dual_residual.max(self.dual_cone_violation) <= tol
            && self.gap <= tol
    }
}

pub fn certify(program: &ConeProgram, x: &[f64], s: &[f64], z: &[f64]) -> Certificate {
    let ax = program.a.mul_vec(x);
    let pr = ax.iter().zip(s).zip(&program.b).fold(0.0f64, |m, ((a, s), b)| m.max((a + s - b).abs()));
    let atz = program.a.tmul_vec(z);
    let dr = atz.iter().zip(&program.c).fold(0.0f64, |m, (a, c)| m.max((a + c).abs()));
    let cx = dot(&program.c, x);
    let bz = dot(&program.b, z);
    let scale_s = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let scale_z = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Certificate {
        primal_residual: pr / (1.0 + norm_inf(&program.b).max(norm_inf(&ax))),
        dual_residual: dr / (1.0 + norm_inf(&program.c).max(norm_inf(&atz))),
        gap: (cx + bz).abs() / (1.0 + cx.abs() + bz.abs()),
        cone_violation: cone_violation(&program.cones, s) / scale_s,
        dual_cone_violation: dual_cone_violation(&program.cones, z) / scale_z,
    }
}

/// Convex restriction of an AUB problem for one sign vector.
#[derive(Debug, Clone)]
pub struct SignFixedProgram {
    pub program: ConeProgram,
    pub layout: VariableLayout,
    /// Number of epigraph variables appended after the AUB variables.
    pub n_epigraph: usize,
}

/// Lowers the restriction `|w| <= diag(signs) v` of `aub` to a cone program
/// over `(y, t)`: `y` the stacked AUB vector and `t` one epigraph variable per
/// quadratic or norm objective term.
///
/// Coordinates with `theta_min = theta_max` get `w_i = 0` and no sign rows,
/// so `v_i` stays free there.
pub fn build_sign_fixed(aub: &AubProblem, signs: &[i8]) -> Result<SignFixedProgram> {
    let layout = *aub.layout();
    let m = layout.m;
    if signs.len() != m {
        return Err(Error::Dimension(format!("{} signs for m = {m}", signs.len())));
    }
    if let Some(i) = signs.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::Domain(format!("sign {i} is {}, expected +1 or -1", signs[i])));
    }
    let dim = layout.dim();
    let obj = aub.objective();
    let n_epi = obj.quad_terms.len() + obj.norm_terms.len();
    let n = dim + n_epi;
    let cons = aub.constraints();
    let bounds = aub.bounds();

    let g = cons.eq_matrix();
    let mut a = TripletBuilder::new(g.nrows(), n);
    for (i, j, v) in g.triplets() {
        a.push(i, j, v);
    }
    let mut b: Vec<f64> = cons.eq_rhs().to_vec();
    let mut cones = Vec::new();

    // Zero cone: equalities, coupling, pinned w and fixed variables.
    for i in 0..m {
        let (tb, rho) = (bounds.midpoint(i), bounds.radius(i));
        a.push_row(&[(layout.u_index(i), 1.0), (layout.v_index(i), -tb), (layout.w_index(i), -rho)]);
        b.push(0.0);
    }
    for i in 0..m {
        if bounds.radius(i) == 0.0 {
            a.push_row(&[(layout.w_index(i), 1.0)]);
            b.push(0.0);
        }
    }
    let (lo, hi) = (cons.var_lower(), cons.var_upper());
    for j in 0..dim {
        if lo[j] == hi[j] {
            a.push_row(&[(j, 1.0)]);
            b.push(lo[j]);
        }
    }
    let rows = a.nrows();
    cones.push(ConeKind::Zero(rows));

    // Nonnegative rows.
    let nn_start = rows;
    for i in 0..m {
        if bounds.radius(i) == 0.0 {
            continue;
        }
        let s = f64::from(signs[i]);
        a.push_row(&[(layout.w_index(i), 1.0), (layout.v_index(i), -s)]);
        b.push(0.0);
        a.push_row(&[(layout.w_index(i), -1.0), (layout.v_index(i), -s)]);
        b.push(0.0);
    }
    for j in 0..dim {
        if lo[j] == hi[j] {
            continue;
        }
        if hi[j].is_finite() {
            a.push_row(&[(j, 1.0)]);
            b.push(hi[j]);
        }
        if lo[j].is_finite() {
            a.push_row(&[(j, -1.0)]);
            b.push(-lo[j]);
        }
    }
    cones.push(ConeKind::Nonneg(a.nrows() - nn_start));

    // Quadratic terms: (t + 1, t - 1, 2 (E y - d)) in SOC.
    let mut c = vec![0.0; n];
    for (&i, &v) in obj.linear.indices.iter().zip(&obj.linear.values) {
        c[i] += v;
    }
    let mut t_idx = dim;
    for term in &obj.quad_terms {
        c[t_idx] = term.weight;
        let r0 = a.push_row(&[(t_idx, -1.0)]);
        b.push(1.0);
        a.push_row(&[(t_idx, -1.0)]);
        b.push(-1.0);
        let base = r0 + 2;
        for (i, j, v) in term.expr.matrix.triplets() {
            a.push(base + i, j, -2.0 * v);
        }
        for &d in &term.expr.offset {
            a.push_row(&[]);
            b.push(-2.0 * d);
        }
        cones.push(ConeKind::Soc(2 + term.expr.rows()));
        t_idx += 1;
    }
    // Norm terms: (t, E y - d) in SOC.
    for term in &obj.norm_terms {
        c[t_idx] = term.weight;
        let r0 = a.push_row(&[(t_idx, -1.0)]);
        b.push(0.0);
        let base = r0 + 1;
        for (i, j, v) in term.expr.matrix.triplets() {
            a.push(base + i, j, -v);
        }
        for &d in &term.expr.offset {
            a.push_row(&[]);
            b.push(-d);
        }
        cones.push(ConeKind::Soc(1 + term.expr.rows()));
        t_idx += 1;
    }
    cones.retain(|k| k.dim() > 0);
    let program = ConeProgram::new(c, a.build(), b, cones)?;
    Ok(SignFixedProgram { program, layout, n_epigraph: n_epi })
}

/// AUB point of an optimal solve and its objective, recomputed from the
/// objective spec rather than taken from the epigraph variables.
pub fn extract_point(sfp: &SignFixedProgram, result: &SolverResult, aub: &AubProblem) -> Result<(AubPoint, f64)> {
    if !result.status.is_optimal() {
        return Err(Error::Solver(result.status));
    }
    if result.primal.len() != sfp.program.num_vars() {
        return Err(Error::Dimension(format!(
            "solution of length {} for a program with {} variables",
            result.primal.len(),
            sfp.program.num_vars()
        )));
    }
    let y = &result.primal[..sfp.layout.dim()];
    Ok((AubPoint::from_stacked(&sfp.layout, y), eval_objective(y, aub.objective())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn small_aub() -> AubProblem {
        // One x, m = 1: minimize x s.t. x - v = 0... plus u = 1, theta in [1, 2].
        let layout = VariableLayout::field(1, 1);
        let g = CscMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, -1.0), (1, 1, 1.0)]);
        let c = AffineConstraintSet::equalities(g, vec![0.0, 1.0]).unwrap();
        let obj = ObjectiveSpec::linear(SparseVec::new(vec![0], vec![1.0]));
        let p = DesignProblem::new(layout, c, obj, DesignBounds::uniform(1, 1.0, 2.0).unwrap(), Metadata::default())
            .unwrap();
        to_aub(&p).unwrap()
    }

    #[test]
    fn sign_fixed_shapes() {
        let aub = small_aub();
        let sfp = build_sign_fixed(&aub, &[1]).unwrap();
        let p = &sfp.program;
        assert_eq!(p.num_vars(), 4);
        // 2 equalities + 1 coupling, 2 sign rows.
        assert_eq!(p.cones, vec![ConeKind::Zero(3), ConeKind::Nonneg(2)]);
        assert!(build_sign_fixed(&aub, &[0]).is_err());
        assert!(build_sign_fixed(&aub, &[1, 1]).is_err());
    }

    #[test]
    fn certificate_of_exact_solution() {
        // u = 1 = theta v with theta = 2 at the optimum: v = x = 1/2, w = v.
        let aub = small_aub();
        let sfp = build_sign_fixed(&aub, &[1]).unwrap();
        let x = [0.5, 1.0, 0.5, 0.5];
        let s: Vec<f64> = {
            let ax = sfp.program.a.mul_vec(&x);
            sfp.program.b.iter().zip(&ax).map(|(b, a)| b - a).collect()
        };
        // Dual: A^T z = -c. Rows: [x - v], [u], [u - 1.5 v - 0.5 w], [w - v], [-w - v].
        let z = [-1.0, -0.5, 0.5, 0.25, 0.0];
        let cert = certify(&sfp.program, &x, &s, &z);
        assert!(cert.passes(1e-12), "{cert:?}");
    }
}
