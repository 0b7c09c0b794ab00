//! Builders for the application families.
//!
//! Each builder returns a [`DesignProblem`]. The matching midpoint solves
//! produce the `v` block used to initialize sign flip descent.

mod control;
mod diffusion;
mod helmholtz;
pub mod random;

pub use control::{
    build_dynamic_control, control_midpoint, control_trajectory, simulate, ControlLayout, ControlSpec, DynamicsSign, InputCost,
    CHAIN,
};
pub use diffusion::{build_static_diffusion, center_square, diffusion_midpoint, grid_edges, DiffusionGridSpec};
pub use helmholtz::{
    build_helmholtz, helmholtz_laplacian, helmholtz_midpoint, laplacian_truncation_error, HelmholtzConfig, IndexBox,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::conic::{build_sign_fixed, extract_point, Backend, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{solve_square, CscMatrix, TripletBuilder};
use crate::model::{
    to_aub, AffineConstraintSet, DesignBounds, DesignProblem, Metadata, ObjectiveSpec, VariableLayout,
};

/// Node-edge incidence matrix: column `j` has `-1` at the tail and `+1` at the
/// head of edge `j`.
pub fn incidence_matrix(edges: &[(usize, usize)], n_nodes: usize) -> Result<CscMatrix> {
    let mut trip = Vec::with_capacity(2 * edges.len());
    for (j, &(from, to)) in edges.iter().enumerate() {
        if from >= n_nodes || to >= n_nodes {
            return Err(Error::Dimension(format!("edge {j} ({from} -> {to}) outside {n_nodes} nodes")));
        }
        if from == to {
            return Err(Error::Domain(format!("edge {j} is a self-loop at node {from}")));
        }
        trip.push((from, j, -1.0));
        trip.push((to, j, 1.0));
    }
    Ok(CscMatrix::from_triplets(n_nodes, edges.len(), &trip))
}

/// `A diag(g) A^T`
pub fn weighted_laplacian(incidence: &CscMatrix, g: &[f64]) -> CscMatrix {
    let mut trip = Vec::with_capacity(4 * incidence.ncols());
    for j in 0..incidence.ncols() {
        let col: Vec<(usize, f64)> = incidence.col_iter(j).collect();
        for &(a, va) in &col {
            for &(b, vb) in &col {
                trip.push((a, b, g[j] * va * vb));
            }
        }
    }
    CscMatrix::from_triplets(incidence.nrows(), incidence.nrows(), &trip)
}

/// `(A + diag(theta)) z = b` with a convex objective over `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalDesignSpec {
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub bounds: DesignBounds,
    /// Objective over `z` alone (`n` columns).
    pub objective: ObjectiveSpec,
}

impl DiagonalDesignSpec {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        if self.a.ncols() != n {
            return Err(Error::Dimension(format!("physics matrix is {}x{}", n, self.a.ncols())));
        }
        if self.b.len() != n || self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "operator of size {n}, excitation of length {}, {} bounds",
                self.b.len(),
                self.bounds.len()
            )));
        }
        self.objective.validate(n)
    }

    /// `A + diag(theta)`
    pub fn operator(&self, theta: &[f64]) -> CscMatrix {
        let mut trip: Vec<_> = self.a.triplets().collect();
        trip.extend(theta.iter().enumerate().map(|(i, &t)| (i, i, t)));
        CscMatrix::from_triplets(self.n(), self.n(), &trip)
    }

    /// Field `z` of `(A + diag(theta)) z = b`.
    pub fn physics_solve(&self, theta: &[f64]) -> Result<Vec<f64>> {
        solve_square(&self.operator(theta), &self.b)
    }
}

/// Layout `x = z`, `v = z` through alias rows `v - z = 0`, and `A z + u = b`.
pub fn build_diagonal(spec: &DiagonalDesignSpec) -> Result<DesignProblem> {
    spec.validate()?;
    let n = spec.n();
    if n == 0 {
        return Err(Error::Dimension("diagonal design with no unknowns".into()));
    }
    let layout = VariableLayout::field(n, n);
    let dim = layout.dim();
    let mut g = TripletBuilder::new(2 * n, dim);
    for (i, j, v) in spec.a.triplets() {
        g.push(i, layout.x_index(j), v);
    }
    for i in 0..n {
        g.push(i, layout.u_index(i), 1.0);
        g.push(n + i, layout.v_index(i), 1.0);
        g.push(n + i, layout.x_index(i), -1.0);
    }
    let mut h = spec.b.clone();
    h.resize(2 * n, 0.0);
    let constraints = AffineConstraintSet::equalities(g.build(), h)?;
    DesignProblem::new(
        layout,
        constraints,
        spec.objective.widen(dim),
        spec.bounds.clone(),
        Metadata { name: "diagonal".into(), description: format!("diagonal physical design, n = {n}") },
    )
}

/// `v = z` at `theta = theta_bar`.
pub fn diagonal_midpoint(spec: &DiagonalDesignSpec) -> Result<Vec<f64>> {
    spec.physics_solve(&spec.bounds.theta_bar())
}

/// Copy of `problem` with every design parameter fixed at its midpoint.
pub fn pin_at_midpoint(problem: &DesignProblem) -> Result<DesignProblem> {
    let tb = problem.bounds().theta_bar();
    DesignProblem::new(
        *problem.layout(),
        problem.constraints().clone(),
        problem.objective().clone(),
        DesignBounds::new(tb.clone(), tb)?,
        problem.metadata.clone(),
    )
}

/// Generic midpoint solve: the convex problem with `theta = theta_bar`
/// (signs are irrelevant once every interval has zero width).
pub fn pinned_midpoint<B: Backend + ?Sized>(problem: &DesignProblem, backend: &B, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let pinned = to_aub(&pin_at_midpoint(problem)?)?;
    let sfp = build_sign_fixed(&pinned, &vec![1; pinned.m()])?;
    let res = backend.solve(&sfp.program, cfg);
    let (pt, _) = extract_point(&sfp, &res, &pinned)?;
    Ok(pt.v)
}

/// Source of the field `v` at `theta = theta_bar` used for the initial signs.
#[derive(Debug, Clone, Copy)]
pub enum PhysicsHook<'a> {
    Diagonal(&'a DiagonalDesignSpec),
    Diffusion(&'a DiffusionGridSpec),
    /// Solve the problem itself with every design parameter pinned.
    Pinned,
}

impl PhysicsHook<'_> {
    pub fn midpoint_field<B: Backend + ?Sized>(&self, problem: &DesignProblem, backend: &B, cfg: &SolverConfig) -> Result<Vec<f64>> {
        let v = match self {
            PhysicsHook::Diagonal(spec) => diagonal_midpoint(spec),
            PhysicsHook::Diffusion(spec) => diffusion_midpoint(spec),
            PhysicsHook::Pinned => pinned_midpoint(problem, backend, cfg),
        };
        v.map_err(|e| match e {
            Error::Initialization(_) => e,
            other => Error::Initialization(format!("midpoint physics solve failed: {other}")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SparseVec, RecoverOptions};

    #[test]
    fn incidence_examples() {
        let a = incidence_matrix(&[(0, 1)], 2).unwrap();
        assert_eq!(a.to_dense(), vec![vec![-1.0], vec![1.0]]);
        assert!(incidence_matrix(&[(1, 1)], 2).is_err());
        let l = weighted_laplacian(&a, &[1.0]);
        assert_eq!(l.to_dense(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn one_by_one_toy() {
        let spec = DiagonalDesignSpec {
            a: CscMatrix::zeros(1, 1),
            b: vec![1.0],
            bounds: DesignBounds::uniform(1, 1.0, 2.0).unwrap(),
            objective: ObjectiveSpec::linear(SparseVec::new(vec![0], vec![1.0])),
        };
        let v = diagonal_midpoint(&spec).unwrap();
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-14);
        let p = build_diagonal(&spec).unwrap();
        assert_eq!(p.layout().dim(), 3);
        let _ = RecoverOptions::default();
    }

    #[test]
    fn empty_diagonal_rejected() {
        let spec = DiagonalDesignSpec {
            a: CscMatrix::zeros(0, 0),
            b: vec![],
            bounds: DesignBounds::uniform(0, 1.0, 2.0).unwrap(),
            objective: ObjectiveSpec::default(),
        };
        assert!(build_diagonal(&spec).is_err());
    }
}
