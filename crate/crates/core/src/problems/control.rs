//! Periodic temperature control of two rooms through vents and heat pumps.
//!
//! Nodes are room 1, room 2 and the ambient reservoir; edges run
//! ambient -> room 1, room 1 -> room 2 and room 2 -> ambient, each with its
//! own time-varying conductance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::sin;

use super::incidence_matrix;
use crate::error::{Error, Result};
use crate::linalg::{CscMatrix, TripletBuilder};
use crate::model::{AffineConstraintSet, AffineExpr, DesignBounds, DesignProblem, Metadata, ObjectiveSpec, VariableLayout};

pub const ROOMS: usize = 2;
pub const NODES: usize = 3;
pub const EDGES: usize = 3;
pub const AMBIENT: usize = 2;

/// Fixed chain `ambient -> room 1 -> room 2 -> ambient`.
pub const CHAIN: [(usize, usize); EDGES] = [(AMBIENT, 0), (0, 1), (1, AMBIENT)];

/// Sign of the conduction term in the room dynamics
/// `C (e_{t+1} - e_t) = s h A w_t + h B u_t`, with `v_t = A^T e_t` and
/// `w_t = diag(g_t) v_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DynamicsSign {
    /// `s = -1`: heat flows from hot to cold, `C e_{t+1} = C e_t - h L(g_t) e_t + h B u_t`.
    #[default]
    Diffusive,
    /// `s = +1`, the constraint as typeset next to the problem statement.
    Literal,
}

impl DynamicsSign {
    fn factor(self) -> f64 {
        match self {
            DynamicsSign::Diffusive => -1.0,
            DynamicsSign::Literal => 1.0,
        }
    }
}

/// How the input trajectory is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InputCost {
    /// Euclidean norm of the stacked trajectory.
    #[default]
    Stacked,
    /// Sum of the per-step norms `sum_t ||u_t||`.
    PerStep,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ControlSpec {
    pub horizon: usize,
    /// Heat capacities of the two rooms.
    pub c_heat: [f64; ROOMS],
    /// Diagonal of the input map.
    pub b_in: [f64; ROOMS],
    pub ambient_mean: f64,
    pub ambient_amplitude: f64,
    /// Ambient oscillation periods over the horizon.
    pub ambient_cycles: f64,
    pub comfort_min: f64,
    pub comfort_max: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub eta: f64,
    pub periodic: bool,
    pub input_cost: InputCost,
    /// Weight on the input cost; `None` means the step `h`.
    pub input_weight: Option<f64>,
    pub dynamics: DynamicsSign,
}

impl Default for ControlSpec {
    fn default() -> Self {
        Self {
            horizon: 300,
            c_heat: [0.3, 0.1],
            b_in: [0.2, 0.2],
            ambient_mean: 70.0,
            ambient_amplitude: 20.0,
            ambient_cycles: 2.0,
            comfort_min: 65.0,
            comfort_max: 75.0,
            g_min: 1.0,
            g_max: 10.0,
            eta: 1e-4,
            periodic: true,
            input_cost: InputCost::Stacked,
            input_weight: None,
            dynamics: DynamicsSign::Diffusive,
        }
    }
}

impl ControlSpec {
    pub fn step(&self) -> f64 {
        1.0 / self.horizon as f64
    }

    /// Ambient temperature at 1-based time `t`.
    pub fn ambient(&self, t: usize) -> f64 {
        let w = 2.0 * core::f64::consts::PI * self.ambient_cycles / self.horizon as f64;
        self.ambient_mean + self.ambient_amplitude * sin(w * t as f64)
    }

    pub fn input_weight(&self) -> f64 {
        self.input_weight.unwrap_or_else(|| self.step())
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::Domain(format!("horizon {} (need at least 2)", self.horizon)));
        }
        if self.c_heat.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Domain(format!("heat capacities {:?} must be positive", self.c_heat)));
        }
        if !(self.comfort_min <= self.comfort_max) {
            return Err(Error::Domain(format!("comfort range [{}, {}]", self.comfort_min, self.comfort_max)));
        }
        if !(self.g_min <= self.g_max && self.g_min.is_finite() && self.g_max.is_finite()) {
            return Err(Error::Domain(format!("conductance range [{}, {}]", self.g_min, self.g_max)));
        }
        if !(self.eta >= 0.0) || !(self.input_weight() >= 0.0) {
            return Err(Error::Domain("objective weights must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn layout(&self) -> ControlLayout {
        ControlLayout { horizon: self.horizon }
    }
}

/// Index map of the stacked control variables. Time indices are 0-based:
/// temperatures for `t < T`, inputs, flows and differences for `t < T - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlLayout {
    pub horizon: usize,
}

impl ControlLayout {
    pub fn steps(&self) -> usize {
        self.horizon - 1
    }

    pub fn n_x(&self) -> usize {
        NODES * self.horizon + ROOMS * self.steps()
    }

    pub fn m(&self) -> usize {
        EDGES * self.steps()
    }

    pub fn variables(&self) -> VariableLayout {
        VariableLayout::field(self.n_x(), self.m())
    }

    /// Position of temperature `(e_t)_node` in `x`.
    pub fn e(&self, t: usize, node: usize) -> usize {
        NODES * t + node
    }

    /// Position of heat-pump input `(u_t)_room` in `x`.
    pub fn input(&self, t: usize, room: usize) -> usize {
        NODES * self.horizon + ROOMS * t + room
    }

    /// Design coordinate of edge `k` at step `t`.
    pub fn edge(&self, t: usize, k: usize) -> usize {
        EDGES * t + k
    }
}

pub fn build_dynamic_control(spec: &ControlSpec) -> Result<DesignProblem> {
    spec.validate()?;
    let cl = spec.layout();
    let layout = cl.variables();
    let (big_t, steps) = (spec.horizon, cl.steps());
    let h = spec.step();
    let a = incidence_matrix(&CHAIN, NODES)?;
    let sign = spec.dynamics.factor();
    let xi = |i: usize| layout.x_index(i);

    let mut g = TripletBuilder::new(0, layout.dim());
    let mut rhs = Vec::new();
    for t in 0..big_t {
        g.push_row(&[(xi(cl.e(t, AMBIENT)), 1.0)]);
        rhs.push(spec.ambient(t + 1));
    }
    for t in 0..steps {
        for r in 0..ROOMS {
            let mut row = vec![
                (xi(cl.e(t + 1, r)), spec.c_heat[r]),
                (xi(cl.e(t, r)), -spec.c_heat[r]),
                (xi(cl.input(t, r)), -h * spec.b_in[r]),
            ];
            for k in 0..EDGES {
                let aik = a.get(r, k);
                if aik != 0.0 {
                    row.push((layout.u_index(cl.edge(t, k)), -sign * h * aik));
                }
            }
            g.push_row(&row);
            rhs.push(0.0);
        }
        for k in 0..EDGES {
            let mut row = vec![(layout.v_index(cl.edge(t, k)), 1.0)];
            for (node, aik) in a.col_iter(k) {
                row.push((xi(cl.e(t, node)), -aik));
            }
            g.push_row(&row);
            rhs.push(0.0);
        }
    }
    if spec.periodic {
        for r in 0..ROOMS {
            g.push_row(&[(xi(cl.e(0, r)), 1.0), (xi(cl.e(big_t - 1, r)), -1.0)]);
            rhs.push(0.0);
        }
    }

    let dim = layout.dim();
    let mut lo = vec![f64::NEG_INFINITY; dim];
    let mut hi = vec![f64::INFINITY; dim];
    for t in 0..big_t {
        for r in 0..ROOMS {
            lo[xi(cl.e(t, r))] = spec.comfort_min;
            hi[xi(cl.e(t, r))] = spec.comfort_max;
        }
    }
    let constraints = AffineConstraintSet::new(g.build(), rhs, lo, hi)?;

    let mut objective = ObjectiveSpec::default();
    let wu = spec.input_weight();
    let all: Vec<usize> = (0..steps).flat_map(|t| (0..ROOMS).map(move |r| xi(cl.input(t, r)))).collect();
    match spec.input_cost {
        InputCost::Stacked => objective = objective.with_norm(wu, AffineExpr::selection(&all, dim)),
        InputCost::PerStep => {
            for idx in all.chunks(ROOMS) {
                objective = objective.with_norm(wu, AffineExpr::selection(idx, dim));
            }
        }
    }
    if spec.eta > 0.0 {
        for t in 0..steps {
            let mut trip = Vec::with_capacity(2 * NODES);
            for node in 0..NODES {
                trip.push((node, xi(cl.e(t + 1, node)), 1.0));
                trip.push((node, xi(cl.e(t, node)), -1.0));
            }
            let expr = AffineExpr::new(CscMatrix::from_triplets(NODES, dim, &trip), vec![0.0; NODES])?;
            objective = objective.with_norm(spec.eta * h, expr);
        }
    }

    DesignProblem::new(
        layout,
        constraints,
        objective,
        DesignBounds::uniform(cl.m(), spec.g_min, spec.g_max)?,
        Metadata { name: "control".into(), description: format!("two-room temperature control, T = {big_t}") },
    )
}

/// Per-step trajectory rows `(t, e_1, e_2, e_3, u_1, u_2)` read from `x`,
/// 1-based `t`, inputs reported as 0 at the final time.
pub fn control_trajectory(spec: &ControlSpec, x: &[f64]) -> Vec<[f64; 6]> {
    let cl = spec.layout();
    (0..spec.horizon)
        .map(|t| {
            let u = |r| if t < cl.steps() { x[cl.input(t, r)] } else { 0.0 };
            [(t + 1) as f64, x[cl.e(t, 0)], x[cl.e(t, 1)], x[cl.e(t, 2)], u(0), u(1)]
        })
        .collect()
}

/// Forward simulation of the room temperatures from `e0` with given inputs
/// and conductances, ambient following the spec.
pub fn simulate(spec: &ControlSpec, e0: [f64; ROOMS], inputs: &[[f64; ROOMS]], g: &[[f64; EDGES]]) -> Vec<[f64; NODES]> {
    let h = spec.step();
    let sign = spec.dynamics.factor();
    let mut e = [e0[0], e0[1], spec.ambient(1)];
    let mut out = vec![e];
    for t in 0..inputs.len().min(g.len()) {
        let v = [e[0] - e[AMBIENT], e[1] - e[0], e[AMBIENT] - e[1]];
        let w: Vec<f64> = (0..EDGES).map(|k| g[t][k] * v[k]).collect();
        // (A w)_room for the fixed chain.
        let aw = [w[0] - w[1], w[1] - w[2]];
        let mut next = [0.0; NODES];
        for r in 0..ROOMS {
            next[r] = e[r] + (sign * h * aw[r] + h * spec.b_in[r] * inputs[t][r]) / spec.c_heat[r];
        }
        next[AMBIENT] = spec.ambient(t + 2);
        e = next;
        out.push(e);
    }
    out
}

/// Pinned-midpoint solve, returning the `v` block used for the initial signs.
pub use super::pinned_midpoint as control_midpoint;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dimensions() {
        let spec = ControlSpec::default();
        let p = build_dynamic_control(&spec).unwrap();
        assert_eq!(p.layout().m, 897);
        assert_eq!(p.layout().n_x, 900 + 598);
    }

    #[test]
    fn ambient_profile() {
        let spec = ControlSpec::default();
        assert!((spec.ambient(300) - 70.0).abs() < 1e-12);
        assert!((spec.ambient(75) - 70.0).abs() < 1e-12);
        let peak = (1..=300).map(|t| spec.ambient(t)).fold(f64::MIN, f64::max);
        assert!(peak <= 90.0 && peak > 89.9);
    }

    #[test]
    fn diffusive_dynamics_relax_to_ambient() {
        let spec = ControlSpec { ambient_amplitude: 0.0, ..ControlSpec::default() };
        let traj = simulate(&spec, [60.0, 80.0], &vec![[0.0; 2]; 299], &vec![[1.0; 3]; 299]);
        let gap = |e: &[f64; 3]| (e[0] - 70.0).abs().max((e[1] - 70.0).abs());
        for w in traj.windows(2) {
            assert!(gap(&w[1]) <= gap(&w[0]) + 1e-12);
        }
        assert!(gap(traj.last().unwrap()) < gap(&traj[0]));
    }
}
