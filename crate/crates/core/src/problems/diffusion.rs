//! Static diffusion (thermal, resistive) conductance design on a graph.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{incidence_matrix, weighted_laplacian};
use crate::error::{Error, Result};
use crate::linalg::{solve_square, CscMatrix, TripletBuilder};
use crate::model::{AffineConstraintSet, DesignBounds, DesignProblem, Metadata, ObjectiveSpec, SparseVec, VariableLayout};

/// Edges of an `m x m` grid with node index `j * m + i`: all horizontal
/// edges `(i, j) -> (i + 1, j)` first, then vertical `(i, j) -> (i, j + 1)`.
pub fn grid_edges(m: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(2 * m * m.saturating_sub(1));
    for j in 0..m {
        for i in 0..m.saturating_sub(1) {
            e.push((j * m + i, j * m + i + 1));
        }
    }
    for j in 0..m.saturating_sub(1) {
        for i in 0..m {
            e.push((j * m + i, (j + 1) * m + i));
        }
    }
    e
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionGridSpec {
    /// Grid side, or 0 for a user supplied graph.
    pub m_side: usize,
    pub incidence: CscMatrix,
    pub src: Vec<f64>,
    pub g_min: f64,
    pub g_max: f64,
    /// Objective weights on the potentials.
    pub c: Vec<f64>,
    pub ground_node: usize,
}

impl DiffusionGridSpec {
    /// Square grid with a unit source in the bottom left corner, a unit sink
    /// in the top right corner (also the ground), conductances in `[1, 10]`
    /// and the mean potential over the center square as objective.
    pub fn grid(m_side: usize) -> Result<Self> {
        if m_side < 2 {
            return Err(Error::Domain(format!("grid side {m_side} (need at least 2)")));
        }
        let n = m_side * m_side;
        let incidence = incidence_matrix(&grid_edges(m_side), n)?;
        let mut src = vec![0.0; n];
        src[0] = 1.0;
        src[n - 1] = -1.0;
        Ok(Self { m_side, incidence, src, g_min: 1.0, g_max: 10.0, c: center_square(m_side), ground_node: n - 1 })
    }

    pub fn num_nodes(&self) -> usize {
        self.incidence.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.incidence.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (nv, ne) = (self.num_nodes(), self.num_edges());
        for j in 0..ne {
            let col: Vec<_> = self.incidence.col_iter(j).collect();
            let ok = col.len() == 2 && col.iter().map(|e| e.1).sum::<f64>() == 0.0 && col.iter().all(|e| e.1.abs() == 1.0);
            if !ok {
                return Err(Error::Domain(format!("incidence column {j} is not a single +1/-1 pair")));
            }
        }
        if self.src.len() != nv || self.c.len() != nv {
            return Err(Error::Dimension(format!(
                "{nv} nodes, {} sources, {} objective weights",
                self.src.len(),
                self.c.len()
            )));
        }
        let total: f64 = self.src.iter().sum();
        let scale = self.src.iter().fold(1.0f64, |m, s| m.max(s.abs()));
        if total.abs() > 1e-12 * scale * nv as f64 {
            return Err(Error::Inconsistent(format!("sources sum to {total}, not 0")));
        }
        if self.ground_node >= nv {
            return Err(Error::Dimension(format!("ground node {} outside {nv} nodes", self.ground_node)));
        }
        if !(self.g_min > 0.0 && self.g_min <= self.g_max && self.g_max.is_finite()) {
            return Err(Error::Domain(format!("conductance range [{}, {}]", self.g_min, self.g_max)));
        }
        Ok(())
    }

    pub fn layout(&self) -> VariableLayout {
        VariableLayout::field(self.num_nodes(), self.num_edges())
    }

    /// Potentials `e` of the grounded steady state at conductances `g`.
    pub fn potentials(&self, g: &[f64]) -> Result<Vec<f64>> {
        let nv = self.num_nodes();
        let gnd = self.ground_node;
        let l = weighted_laplacian(&self.incidence, g);
        let keep = |i: usize| if i < gnd { Some(i) } else if i > gnd { Some(i - 1) } else { None };
        let trip: Vec<_> = l
            .triplets()
            .filter_map(|(i, j, v)| Some((keep(i)?, keep(j)?, v)))
            .collect();
        let reduced = CscMatrix::from_triplets(nv - 1, nv - 1, &trip);
        let rhs: Vec<f64> = (0..nv).filter(|&i| i != gnd).map(|i| self.src[i]).collect();
        let sol = solve_square(&reduced, &rhs).map_err(|e| Error::Initialization(format!("grounded Laplacian: {e}")))?;
        let mut e = sol;
        e.insert(gnd, 0.0);
        Ok(e)
    }
}

/// Averaging weights `1 / k^2` on the `k x k` center square,
/// `k = floor((m - 1) / 4)`, placed at offset `floor((m - k) / 2)` along each
/// axis.
pub fn center_square(m: usize) -> Vec<f64> {
    let k = (m.saturating_sub(1)) / 4;
    let c0 = (m - k) / 2;
    let mut c = vec![0.0; m * m];
    if k == 0 {
        return c;
    }
    let w = 1.0 / (k * k) as f64;
    for j in c0..c0 + k {
        for i in c0..c0 + k {
            c[j * m + i] = w;
        }
    }
    c
}

/// Variables `x = e`, `u = w` (flows), `v = A^T e`. Balance rows `A w = src`
/// skip the ground node, where the row is implied by the others.
pub fn build_static_diffusion(spec: &DiffusionGridSpec) -> Result<DesignProblem> {
    spec.validate()?;
    let (nv, ne) = (spec.num_nodes(), spec.num_edges());
    let layout = spec.layout();
    let mut g = TripletBuilder::new(ne + nv, layout.dim());
    let mut h = Vec::with_capacity(ne + nv);
    // v - A^T e = 0
    for j in 0..ne {
        g.push(j, layout.v_index(j), 1.0);
        for (i, a) in spec.incidence.col_iter(j) {
            g.push(j, layout.x_index(i), -a);
        }
        h.push(0.0);
    }
    let mut row_of = vec![usize::MAX; nv];
    let mut r = ne;
    for (i, slot) in row_of.iter_mut().enumerate() {
        if i != spec.ground_node {
            *slot = r;
            h.push(spec.src[i]);
            r += 1;
        }
    }
    for j in 0..ne {
        for (i, a) in spec.incidence.col_iter(j) {
            if row_of[i] != usize::MAX {
                g.push(row_of[i], layout.u_index(j), a);
            }
        }
    }
    // e_ground = 0
    g.push(r, layout.x_index(spec.ground_node), 1.0);
    h.push(0.0);
    let constraints = AffineConstraintSet::equalities(g.build(), h)?;
    let lin: Vec<(usize, f64)> = spec.c.iter().enumerate().filter(|c| *c.1 != 0.0).map(|(i, &c)| (i, c)).collect();
    let objective = ObjectiveSpec::linear(SparseVec::new(
        lin.iter().map(|l| layout.x_index(l.0)).collect(),
        lin.iter().map(|l| l.1).collect(),
    ));
    DesignProblem::new(
        layout,
        constraints,
        objective,
        DesignBounds::uniform(ne, spec.g_min, spec.g_max)?,
        Metadata {
            name: "diffusion".into(),
            description: format!("static diffusion design, {nv} nodes, {ne} edges"),
        },
    )
}

/// `v = A^T e` of the grounded solve at midpoint conductances.
pub fn diffusion_midpoint(spec: &DiffusionGridSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let g = vec![0.5 * (spec.g_min + spec.g_max); spec.num_edges()];
    let e = spec.potentials(&g)?;
    Ok(spec.incidence.tmul_vec(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let s = DiffusionGridSpec::grid(11).unwrap();
        assert_eq!(s.num_nodes(), 121);
        assert_eq!(s.num_edges(), 220);
        assert_eq!(s.c.iter().filter(|&&c| c > 0.0).count(), 4);
        assert!((s.c.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let p = build_static_diffusion(&s).unwrap();
        assert_eq!(p.layout().m, 220);
        assert_eq!(p.constraints().eq_matrix().nrows(), 220 + 121);
    }

    #[test]
    fn two_node_path() {
        let spec = DiffusionGridSpec {
            m_side: 0,
            incidence: incidence_matrix(&[(0, 1)], 2).unwrap(),
            src: vec![1.0, -1.0],
            g_min: 1.0,
            g_max: 10.0,
            c: vec![1.0, 0.0],
            ground_node: 1,
        };
        let e = spec.potentials(&[4.0]).unwrap();
        assert!((e[0] - 0.25).abs() < 1e-14 && e[1] == 0.0);
        let v = diffusion_midpoint(&spec).unwrap();
        assert!((v[0] + 1.0 / 5.5).abs() < 1e-14);
    }

    #[test]
    fn unbalanced_sources_rejected() {
        let mut s = DiffusionGridSpec::grid(3).unwrap();
        s.src[4] = 0.5;
        assert!(matches!(build_static_diffusion(&s), Err(Error::Inconsistent(_))));
    }
}
