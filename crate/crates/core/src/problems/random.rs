//! Seeded random instances for property and cross-oracle tests.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiagonalDesignSpec;
use crate::error::Result;
use crate::linalg::{CscMatrix, TripletBuilder};
use crate::model::{
    AffineConstraintSet, AffineExpr, DesignBounds, DesignProblem, FieldPoint, Metadata, ObjectiveSpec, SparseVec,
    VariableLayout,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_bounds<R: Rng>(rng: &mut R, m: usize) -> Result<DesignBounds> {
    let lo: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.5..3.0)).collect();
    DesignBounds::new(lo, hi)
}

/// A general instance together with one feasible point and its design.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub problem: DesignProblem,
    pub point: FieldPoint,
    pub theta: Vec<f64>,
}

/// Random affine set through a random feasible point, with a random convex
/// objective (linear part plus a weighted squared distance and a norm term).
/// About half the `v` entries are exactly zero, the other half bounded away
/// from zero.
pub fn design_instance<R: Rng>(rng: &mut R, n_x: usize, m: usize) -> Result<RandomInstance> {
    let layout = VariableLayout::field(n_x, m);
    let dim = layout.dim();
    let bounds = uniform_bounds(rng, m)?;
    let theta: Vec<f64> = (0..m)
        .map(|i| {
            let t = rng.random_range(0.0..=1.0);
            bounds.theta_min()[i] + t * (bounds.theta_max()[i] - bounds.theta_min()[i])
        })
        .collect();
    let x: Vec<f64> = (0..n_x).map(|_| rng.random_range(-2.0..2.0)).collect();
    let v: Vec<f64> = (0..m)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                let mag = rng.random_range(0.1..2.0);
                if rng.random_bool(0.5) { mag } else { -mag }
            }
        })
        .collect();
    let u: Vec<f64> = v.iter().zip(&theta).map(|(v, t)| v * t).collect();
    let point = FieldPoint { x, u, v };
    let y = point.stacked();

    let rows = rng.random_range(1..=dim.saturating_sub(1).max(1));
    let mut g = TripletBuilder::new(rows, dim);
    for r in 0..rows {
        for c in 0..dim {
            if rng.random_bool(0.5) {
                g.push(r, c, rng.random_range(-1.0..1.0));
            }
        }
    }
    let gm = g.build();
    let h = gm.mul_vec(&y);
    let mut lo = vec![f64::NEG_INFINITY; dim];
    let mut hi = vec![f64::INFINITY; dim];
    for i in layout.x() {
        if rng.random_bool(0.3) {
            lo[i] = y[i] - rng.random_range(0.0..1.0);
            hi[i] = y[i] + rng.random_range(0.0..1.0);
        }
    }
    let constraints = AffineConstraintSet::new(gm, h, lo, hi)?;
    let objective = random_objective(rng, dim)?;
    let problem = DesignProblem::new(layout, constraints, objective, bounds, Metadata::default())?;
    Ok(RandomInstance { problem, point, theta })
}

fn random_objective<R: Rng>(rng: &mut R, dim: usize) -> Result<ObjectiveSpec> {
    let lin = SparseVec::new((0..dim).collect(), (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
    let target: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = rng.random_range(1..=dim);
    let trip: Vec<_> = (0..k).map(|r| (r, rng.random_range(0..dim), rng.random_range(0.5..2.0))).collect();
    let norm = AffineExpr::new(CscMatrix::from_triplets(k, dim, &trip), vec![0.0; k])?;
    Ok(ObjectiveSpec::linear(lin)
        .with_quad(rng.random_range(0.1..1.0), AffineExpr::new(CscMatrix::identity(dim), target)?)
        .with_norm(rng.random_range(0.0..0.5), norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Linear,
    Quadratic,
}

/// Diagonal design with strictly diagonally dominant `A` and positive design
/// bounds, so `A + diag(theta)` is nonsingular for every admissible `theta`.
pub fn diagonal_spec<R: Rng>(rng: &mut R, m: usize, kind: ObjectiveKind) -> Result<DiagonalDesignSpec> {
    let mut trip = Vec::new();
    let mut rowsum = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            if i != j && rng.random_bool(0.4) {
                let a = rng.random_range(-1.0..1.0);
                rowsum[i] += f64::abs(a);
                trip.push((i, j, a));
            }
        }
    }
    for (i, s) in rowsum.iter().enumerate() {
        trip.push((i, i, s + rng.random_range(0.0..0.5)));
    }
    let a = CscMatrix::from_triplets(m, m, &trip);
    let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bounds = uniform_bounds(rng, m)?;
    let lin = SparseVec::new((0..m).collect(), (0..m).map(|_| rng.random_range(-1.0..1.0)).collect());
    let objective = match kind {
        ObjectiveKind::Linear => ObjectiveSpec::linear(lin),
        ObjectiveKind::Quadratic => {
            let target: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..0.5)).collect();
            ObjectiveSpec::linear(lin).with_quad(1.0, AffineExpr::new(CscMatrix::identity(m), target)?)
        }
    };
    Ok(DiagonalDesignSpec { a, b, bounds, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_point_is_feasible() {
        let mut r = rng(7);
        for _ in 0..20 {
            let inst = design_instance(&mut r, 3, 4).unwrap();
            assert!(inst.problem.is_feasible(&inst.point, &inst.theta, 1e-12));
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = diagonal_spec(&mut rng(3), 5, ObjectiveKind::Linear).unwrap();
        let b = diagonal_spec(&mut rng(3), 5, ObjectiveKind::Linear).unwrap();
        assert_eq!(a, b);
    }
}
