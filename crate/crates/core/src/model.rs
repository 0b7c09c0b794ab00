//! Problem data and the absolute-upper-bound reformulation.
//!
//! A [`DesignProblem`] stacks its field as `y = (x, u, v)` with `x` of length
//! `n_x` and `u`, `v` of length `m`. The bilinear coupling `u = diag(theta) v`
//! with `theta` in [`DesignBounds`] is implicit. [`to_aub`] appends a `w`
//! block and rewrites the coupling as
//! `u = diag(theta_bar) v + diag(rho) w`, `|w| <= |v|`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{norm2, norm_inf, CscMatrix};

/// Interval bounds on the design parameters. Midpoint and radius are always
/// computed from the endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignBounds {
    theta_min: Vec<f64>,
    theta_max: Vec<f64>,
}

impl DesignBounds {
    pub fn new(theta_min: Vec<f64>, theta_max: Vec<f64>) -> Result<Self> {
        if theta_min.len() != theta_max.len() {
            return Err(Error::Dimension(format!(
                "theta_min has length {}, theta_max has length {}",
                theta_min.len(),
                theta_max.len()
            )));
        }
        for (i, (lo, hi)) in theta_min.iter().zip(&theta_max).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain(format!("design bound {i} is not finite")));
            }
            if lo > hi {
                return Err(Error::Domain(format!("theta_min[{i}] = {lo} exceeds theta_max[{i}] = {hi}")));
            }
        }
        Ok(Self { theta_min, theta_max })
    }

    pub fn uniform(m: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; m], vec![hi; m])
    }

    pub fn len(&self) -> usize {
        self.theta_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_min.is_empty()
    }

    pub fn theta_min(&self) -> &[f64] {
        &self.theta_min
    }

    pub fn theta_max(&self) -> &[f64] {
        &self.theta_max
    }

    #[inline]
    pub fn midpoint(&self, i: usize) -> f64 {
        (self.theta_max[i] + self.theta_min[i]) / 2.0
    }

    #[inline]
    pub fn radius(&self, i: usize) -> f64 {
        (self.theta_max[i] - self.theta_min[i]) / 2.0
    }

    pub fn theta_bar(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.midpoint(i)).collect()
    }

    pub fn rho(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        theta.len() == self.len()
            && theta
                .iter()
                .enumerate()
                .all(|(i, &t)| t >= self.theta_min[i] - tol && t <= self.theta_max[i] + tol)
    }
}

/// Positions of the `x`, `u`, `v` (and optionally `w`) blocks in the stacked
/// decision vector, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariableLayout {
    pub n_x: usize,
    pub m: usize,
    pub has_w: bool,
}

impl VariableLayout {
    pub fn field(n_x: usize, m: usize) -> Self {
        Self { n_x, m, has_w: false }
    }

    pub fn with_w(self) -> Self {
        Self { has_w: true, ..self }
    }

    pub fn dim(&self) -> usize {
        self.n_x + if self.has_w { 3 } else { 2 } * self.m
    }

    pub fn field_dim(&self) -> usize {
        self.n_x + 2 * self.m
    }

    pub fn x(&self) -> Range<usize> {
        0..self.n_x
    }

    pub fn u(&self) -> Range<usize> {
        self.n_x..self.n_x + self.m
    }

    pub fn v(&self) -> Range<usize> {
        self.n_x + self.m..self.n_x + 2 * self.m
    }

    pub fn w(&self) -> Option<Range<usize>> {
        self.has_w.then(|| self.n_x + 2 * self.m..self.n_x + 3 * self.m)
    }

    pub fn x_index(&self, i: usize) -> usize {
        debug_assert!(i < self.n_x);
        i
    }

    pub fn u_index(&self, i: usize) -> usize {
        debug_assert!(i < self.m);
        self.n_x + i
    }

    pub fn v_index(&self, i: usize) -> usize {
        debug_assert!(i < self.m);
        self.n_x + self.m + i
    }

    pub fn w_index(&self, i: usize) -> usize {
        debug_assert!(self.has_w && i < self.m);
        self.n_x + 2 * self.m + i
    }
}

/// Affine-plus-box constraint set `{y : G y = h, lower <= y <= upper}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraintSet {
    eq_matrix: CscMatrix,
    eq_rhs: Vec<f64>,
    var_lower: Vec<f64>,
    var_upper: Vec<f64>,
}

impl AffineConstraintSet {
    pub fn new(eq_matrix: CscMatrix, eq_rhs: Vec<f64>, var_lower: Vec<f64>, var_upper: Vec<f64>) -> Result<Self> {
        let dim = eq_matrix.ncols();
        if eq_rhs.len() != eq_matrix.nrows() {
            return Err(Error::Dimension(format!(
                "{} equality rows but rhs of length {}",
                eq_matrix.nrows(),
                eq_rhs.len()
            )));
        }
        if var_lower.len() != dim || var_upper.len() != dim {
            return Err(Error::Dimension(format!(
                "box bounds of lengths {}/{} for {dim} variables",
                var_lower.len(),
                var_upper.len()
            )));
        }
        for i in 0..dim {
            if var_lower[i].is_nan() || var_upper[i].is_nan() || var_lower[i] > var_upper[i] {
                return Err(Error::Domain(format!(
                    "invalid box on variable {i}: [{}, {}]",
                    var_lower[i], var_upper[i]
                )));
            }
        }
        Ok(Self { eq_matrix, eq_rhs, var_lower, var_upper })
    }

    /// Equalities only, no box.
    pub fn equalities(eq_matrix: CscMatrix, eq_rhs: Vec<f64>) -> Result<Self> {
        let dim = eq_matrix.ncols();
        Self::new(eq_matrix, eq_rhs, vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn dim(&self) -> usize {
        self.eq_matrix.ncols()
    }

    pub fn eq_matrix(&self) -> &CscMatrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn var_lower(&self) -> &[f64] {
        &self.var_lower
    }

    pub fn var_upper(&self) -> &[f64] {
        &self.var_upper
    }

    /// `||G y - h||_inf`
    pub fn eq_residual(&self, y: &[f64]) -> f64 {
        let mut r = self.eq_matrix.mul_vec(y);
        for (ri, hi) in r.iter_mut().zip(&self.eq_rhs) {
            *ri -= hi;
        }
        norm_inf(&r)
    }

    /// Largest distance of an entry of `y` outside its interval.
    pub fn box_violation(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(self.var_lower.iter().zip(&self.var_upper))
            .fold(0.0, |m, (&yi, (&lo, &hi))| m.max(lo - yi).max(yi - hi))
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        y.len() == self.dim() && self.eq_residual(y) <= tol && self.box_violation(y) <= tol
    }

    /// The same set over a longer vector; new entries are unconstrained.
    pub fn widen(&self, dim: usize) -> Self {
        let mut lower = self.var_lower.clone();
        let mut upper = self.var_upper.clone();
        lower.resize(dim, f64::NEG_INFINITY);
        upper.resize(dim, f64::INFINITY);
        Self {
            eq_matrix: self.eq_matrix.widen(dim),
            eq_rhs: self.eq_rhs.clone(),
            var_lower: lower,
            var_upper: upper,
        }
    }
}

/// Sparse vector stored as parallel index/value arrays.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseVec {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Self {
        Self { indices, values }
    }

    pub fn dot(&self, y: &[f64]) -> f64 {
        self.indices.iter().zip(&self.values).map(|(&i, v)| v * y[i]).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Affine map `y -> E y - d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub matrix: CscMatrix,
    pub offset: Vec<f64>,
}

impl AffineExpr {
    pub fn new(matrix: CscMatrix, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != matrix.nrows() {
            return Err(Error::Dimension(format!(
                "affine expression with {} rows and offset of length {}",
                matrix.nrows(),
                offset.len()
            )));
        }
        Ok(Self { matrix, offset })
    }

    /// Picks entries `indices` of `y` with no offset.
    pub fn selection(indices: &[usize], dim: usize) -> Self {
        let trip: Vec<_> = indices.iter().enumerate().map(|(r, &c)| (r, c, 1.0)).collect();
        Self { matrix: CscMatrix::from_triplets(indices.len(), dim, &trip), offset: vec![0.0; indices.len()] }
    }

    pub fn rows(&self) -> usize {
        self.offset.len()
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut r = self.matrix.mul_vec(y);
        for (ri, di) in r.iter_mut().zip(&self.offset) {
            *ri -= di;
        }
        r
    }
}

/// One weighted term of the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTerm {
    pub weight: f64,
    pub expr: AffineExpr,
}

/// Convex objective `c^T y + sum_k a_k ||E_k y - d_k||^2 + sum_l b_l ||F_l y - g_l||`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectiveSpec {
    pub linear: SparseVec,
    pub quad_terms: Vec<WeightedTerm>,
    pub norm_terms: Vec<WeightedTerm>,
}

impl ObjectiveSpec {
    pub fn linear(linear: SparseVec) -> Self {
        Self { linear, ..Self::default() }
    }

    pub fn with_quad(mut self, weight: f64, expr: AffineExpr) -> Self {
        self.quad_terms.push(WeightedTerm { weight, expr });
        self
    }

    pub fn with_norm(mut self, weight: f64, expr: AffineExpr) -> Self {
        self.norm_terms.push(WeightedTerm { weight, expr });
        self
    }

    pub fn is_linear(&self) -> bool {
        self.quad_terms.is_empty() && self.norm_terms.is_empty()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.linear.indices.len() != self.linear.values.len() {
            return Err(Error::Dimension("linear objective indices and values differ in length".into()));
        }
        if let Some(&i) = self.linear.indices.iter().find(|&&i| i >= dim) {
            return Err(Error::Dimension(format!("linear objective index {i} outside {dim} variables")));
        }
        for t in self.quad_terms.iter().chain(&self.norm_terms) {
            if !(t.weight >= 0.0) || !t.weight.is_finite() {
                return Err(Error::Domain(format!("objective weight {} is not a nonnegative number", t.weight)));
            }
            if t.expr.matrix.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "objective term over {} variables, layout has {dim}",
                    t.expr.matrix.ncols()
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut f = self.linear.dot(y);
        for t in &self.quad_terms {
            let r = t.expr.eval(y);
            f += t.weight * r.iter().map(|v| v * v).sum::<f64>();
        }
        for t in &self.norm_terms {
            f += t.weight * norm2(&t.expr.eval(y));
        }
        f
    }

    pub fn widen(&self, dim: usize) -> Self {
        let widen_term = |t: &WeightedTerm| WeightedTerm {
            weight: t.weight,
            expr: AffineExpr { matrix: t.expr.matrix.widen(dim), offset: t.expr.offset.clone() },
        };
        Self {
            linear: self.linear.clone(),
            quad_terms: self.quad_terms.iter().map(widen_term).collect(),
            norm_terms: self.norm_terms.iter().map(widen_term).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metadata {
    pub name: String,
    pub description: String,
}

/// `minimize f(x, u, v) s.t. (x, u, v) in C, u = diag(theta) v, theta in bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    layout: VariableLayout,
    constraints: AffineConstraintSet,
    objective: ObjectiveSpec,
    bounds: DesignBounds,
    pub metadata: Metadata,
}

impl DesignProblem {
    pub fn new(
        layout: VariableLayout,
        constraints: AffineConstraintSet,
        objective: ObjectiveSpec,
        bounds: DesignBounds,
        metadata: Metadata,
    ) -> Result<Self> {
        if layout.has_w {
            return Err(Error::Dimension("a design problem layout has no w block".into()));
        }
        if constraints.dim() != layout.dim() {
            return Err(Error::Dimension(format!(
                "constraints over {} variables, layout has {}",
                constraints.dim(),
                layout.dim()
            )));
        }
        if bounds.len() != layout.m {
            return Err(Error::Dimension(format!("{} design bounds for m = {}", bounds.len(), layout.m)));
        }
        objective.validate(layout.dim())?;
        Ok(Self { layout, constraints, objective, bounds, metadata })
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn constraints(&self) -> &AffineConstraintSet {
        &self.constraints
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn bounds(&self) -> &DesignBounds {
        &self.bounds
    }

    /// Checks `(x, u, v) in C` and `u = diag(theta) v` with `theta` in bounds.
    pub fn is_feasible(&self, point: &FieldPoint, theta: &[f64], tol: f64) -> bool {
        if !self.bounds.contains(theta, tol) {
            return false;
        }
        let coupling = (0..self.layout.m).fold(0.0f64, |m, i| m.max((point.u[i] - theta[i] * point.v[i]).abs()));
        coupling <= tol && self.constraints.contains(&point.stacked(), tol)
    }
}

/// A point of the original formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldPoint {
    pub fn from_stacked(layout: &VariableLayout, y: &[f64]) -> Self {
        Self { x: y[layout.x()].to_vec(), u: y[layout.u()].to_vec(), v: y[layout.v()].to_vec() }
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.x.len() + 2 * self.u.len());
        y.extend_from_slice(&self.x);
        y.extend_from_slice(&self.u);
        y.extend_from_slice(&self.v);
        y
    }
}

/// A point of the absolute-upper-bound formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct AubPoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl AubPoint {
    pub fn from_stacked(layout: &VariableLayout, y: &[f64]) -> Self {
        let w = match layout.w() {
            Some(r) => y[r].to_vec(),
            None => vec![0.0; layout.m],
        };
        Self { x: y[layout.x()].to_vec(), u: y[layout.u()].to_vec(), v: y[layout.v()].to_vec(), w }
    }

    pub fn from_field(field: FieldPoint, w: Vec<f64>) -> Self {
        Self { x: field.x, u: field.u, v: field.v, w }
    }

    pub fn field(&self) -> FieldPoint {
        FieldPoint { x: self.x.clone(), u: self.u.clone(), v: self.v.clone() }
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut y = self.field().stacked();
        y.extend_from_slice(&self.w);
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipWarning {
    pub index: usize,
    /// Distance outside the interval before clipping.
    pub excess: f64,
}

/// Recovered design parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub theta: Vec<f64>,
    pub extremal_mask: Vec<bool>,
    pub clip_warnings: Vec<ClipWarning>,
}

impl Design {
    pub fn fraction_extremal(&self) -> f64 {
        if self.extremal_mask.is_empty() {
            return 1.0;
        }
        self.extremal_mask.iter().filter(|&&e| e).count() as f64 / self.extremal_mask.len() as f64
    }
}

/// Absolute-upper-bound problem. The `|w| <= |v|` constraint is symbolic; it
/// is made convex per sign vector by the conic lowering.
#[derive(Debug, Clone, PartialEq)]
pub struct AubProblem {
    layout: VariableLayout,
    constraints: AffineConstraintSet,
    objective: ObjectiveSpec,
    bounds: DesignBounds,
    pub metadata: Metadata,
}

impl AubProblem {
    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn constraints(&self) -> &AffineConstraintSet {
        &self.constraints
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn bounds(&self) -> &DesignBounds {
        &self.bounds
    }

    pub fn theta_bar(&self) -> Vec<f64> {
        self.bounds.theta_bar()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.bounds.rho()
    }

    pub fn m(&self) -> usize {
        self.layout.m
    }

    /// `max_i |u_i - theta_bar_i v_i - rho_i w_i|`, plus `|w_i|` where `rho_i = 0`.
    pub fn coupling_residual(&self, p: &AubPoint) -> f64 {
        let mut r = 0.0f64;
        for i in 0..self.layout.m {
            let (tb, rho) = (self.bounds.midpoint(i), self.bounds.radius(i));
            r = r.max((p.u[i] - tb * p.v[i] - rho * p.w[i]).abs());
            if rho == 0.0 {
                r = r.max(p.w[i].abs());
            }
        }
        r
    }
}

/// Appends the `w` block and rewrites the coupling around the midpoint.
pub fn to_aub(problem: &DesignProblem) -> Result<AubProblem> {
    let layout = problem.layout.with_w();
    if problem.constraints.dim() != problem.layout.dim() || problem.bounds.len() != layout.m {
        return Err(Error::Dimension("design problem is not consistent with its layout".into()));
    }
    Ok(AubProblem {
        layout,
        constraints: problem.constraints.widen(layout.dim()),
        objective: problem.objective.widen(layout.dim()),
        bounds: problem.bounds.clone(),
        metadata: problem.metadata.clone(),
    })
}

/// `w_i = ((theta_i - theta_bar_i) / rho_i) v_i`, and `w_i = 0` where `rho_i = 0`.
pub fn embed_w(v: &[f64], theta: &[f64], bounds: &DesignBounds) -> Result<Vec<f64>> {
    if v.len() != bounds.len() || theta.len() != bounds.len() {
        return Err(Error::Dimension(format!(
            "v/theta of lengths {}/{} for {} bounds",
            v.len(),
            theta.len(),
            bounds.len()
        )));
    }
    let mut w = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let (lo, hi) = (bounds.theta_min[i], bounds.theta_max[i]);
        if !(theta[i] >= lo && theta[i] <= hi) {
            return Err(Error::Domain(format!("theta[{i}] = {} outside [{lo}, {hi}]", theta[i])));
        }
        let rho = bounds.radius(i);
        if rho == 0.0 {
            w.push(0.0);
        } else {
            let ratio = ((theta[i] - bounds.midpoint(i)) / rho).clamp(-1.0, 1.0);
            w.push(ratio * v[i]);
        }
    }
    Ok(w)
}

/// Tolerances used when mapping `(v, w)` back to a design.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecoverOptions {
    /// `v_i` counts as zero when `|v_i| <= zero_threshold * max(1, ||v||_inf)`.
    pub zero_threshold: f64,
    /// Allowed `|w_i| - |v_i|`, relative to `max(1, ||v||_inf)`.
    pub feasibility_tol: f64,
    /// Silent clipping allowance, relative to the interval width.
    pub clip_tol: f64,
    /// Distance to an endpoint, relative to the interval width, that still
    /// counts as extremal.
    pub extremal_tol: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self { zero_threshold: 1e-8, feasibility_tol: 1e-6, clip_tol: 1e-6, extremal_tol: 1e-6 }
    }
}

/// `theta_i = theta_bar_i + rho_i w_i / v_i` where `v_i != 0`, else `theta_bar_i`.
pub fn recover_theta(v: &[f64], w: &[f64], bounds: &DesignBounds, opts: &RecoverOptions) -> Result<Design> {
    let m = bounds.len();
    if v.len() != m || w.len() != m {
        return Err(Error::Dimension(format!("v/w of lengths {}/{} for {m} bounds", v.len(), w.len())));
    }
    let scale = norm_inf(v).max(1.0);
    let zero = opts.zero_threshold * scale;
    let mut theta = Vec::with_capacity(m);
    let mut clip_warnings = Vec::new();
    for i in 0..m {
        let excess = w[i].abs() - v[i].abs();
        if excess > opts.feasibility_tol * scale {
            return Err(Error::Infeasible { index: i, excess });
        }
        let (lo, hi) = (bounds.theta_min[i], bounds.theta_max[i]);
        let raw = if v[i].abs() <= zero { bounds.midpoint(i) } else { bounds.midpoint(i) + bounds.radius(i) * w[i] / v[i] };
        let out = (lo - raw).max(raw - hi);
        if out > opts.clip_tol * (hi - lo) {
            clip_warnings.push(ClipWarning { index: i, excess: out });
        }
        theta.push(raw.clamp(lo, hi));
    }
    let extremal_mask = extremal_mask(&theta, bounds, opts.extremal_tol);
    Ok(Design { theta, extremal_mask, clip_warnings })
}

pub fn extremal_mask(theta: &[f64], bounds: &DesignBounds, tol: f64) -> Vec<bool> {
    theta
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (lo, hi) = (bounds.theta_min[i], bounds.theta_max[i]);
            (t - lo).min(hi - t) <= tol * (hi - lo)
        })
        .collect()
}

/// Objective at a stacked point. Works for field and AUB points alike since
/// objectives never reference the `w` block.
pub fn eval_objective(y: &[f64], objective: &ObjectiveSpec) -> f64 {
    objective.eval(y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// Max of `||G y - h||_inf` and the coupling residual.
    pub eq_residual: f64,
    pub coupling_residual: f64,
    pub box_violation: f64,
    /// `max_i |w_i| - |v_i|` (clamped at 0).
    pub abs_bound_violation: f64,
    pub feasible: bool,
}

pub fn check_feasible(point: &AubPoint, aub: &AubProblem, tol: f64) -> FeasibilityReport {
    let y = point.stacked();
    let layout = aub.layout();
    if y.len() != layout.dim() || point.u.len() != layout.m || point.w.len() != layout.m {
        return FeasibilityReport {
            eq_residual: f64::INFINITY,
            coupling_residual: f64::INFINITY,
            box_violation: f64::INFINITY,
            abs_bound_violation: f64::INFINITY,
            feasible: false,
        };
    }
    let coupling = aub.coupling_residual(point);
    let eq = aub.constraints.eq_residual(&y).max(coupling);
    let bx = aub.constraints.box_violation(&y);
    let abs_v = point.w.iter().zip(&point.v).fold(0.0f64, |m, (w, v)| m.max(w.abs() - v.abs()));
    FeasibilityReport {
        eq_residual: eq,
        coupling_residual: coupling,
        box_violation: bx,
        abs_bound_violation: abs_v,
        feasible: eq <= tol && bx <= tol && abs_v <= tol,
    }
}
