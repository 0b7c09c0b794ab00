//! Property suites over seeded random instances.
//!
//! Each suite returns raw measurements; thresholds are applied by the caller
//! through [`Tolerances`].

use signflip_core::conic::{Backend, ConeKind, ConeProgram, SolverConfig, SolverResult};
use signflip_core::descent::{init_signs, run, solve_restriction, DescentConfig, DescentTrace, Rule};
use signflip_core::model::{embed_w, recover_theta, to_aub, AubPoint, RecoverOptions};
use signflip_core::oracle::{extremality_report, fixed_design_value, global_extremal};
use signflip_core::problems::random::{design_instance, diagonal_spec, rng, ObjectiveKind};
use signflip_core::problems::{build_diagonal, build_static_diffusion, DiffusionGridSpec, PhysicsHook};
use signflip_core::NoClock;

use rand::Rng;

use crate::io::{problem_from_json, problem_to_json};
use crate::oracle::global_by_signs_par;

/// Relative difference `|a - b| / max(1, |a|, |b|)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub roundtrip: f64,
    pub objective: f64,
    pub monotone: f64,
    pub dominance: f64,
    pub certificate: f64,
    pub extremal_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { roundtrip: 1e-9, objective: 1e-6, monotone: 1e-6, dominance: 1e-6, certificate: 1e-6, extremal_fraction: 0.95 }
    }
}

/// Accepted objectives never increase and no field-rule proposal is worse
/// than its incumbent by more than `tol * max(1, |p|)`. Returns the worst
/// violation (non-positive when the property holds, up to `tol`).
pub fn monotonicity_violation(trace: &DescentTrace) -> f64 {
    let acc = trace.accepted_objectives();
    let mut worst = f64::NEG_INFINITY;
    for w in acc.windows(2) {
        worst = worst.max(if w[1] <= w[0] { 0.0 } else { f64::INFINITY });
    }
    let field = trace.worst_field_increase();
    if trace.records.iter().any(|r| r.rule == Rule::Field) {
        worst = worst.max(field);
    }
    worst.max(0.0)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundtripStats {
    pub instances: usize,
    /// Worst feasibility residual of the recovered design, relative to the point scale.
    pub worst_feasibility: f64,
    pub worst_objective: f64,
    /// Problems whose JSON round trip was not bit-identical.
    pub json_mismatches: usize,
    pub errors: Vec<String>,
}

/// Feasible points of random instances mapped to the absolute-upper-bound
/// form and back.
pub fn roundtrip(count: usize, seed: u64) -> RoundtripStats {
    let mut r = rng(seed);
    let mut s = RoundtripStats::default();
    for _ in 0..count {
        let n_x = r.random_range(1..=5);
        let m = r.random_range(1..=8);
        let inst = match design_instance(&mut r, n_x, m) {
            Ok(i) => i,
            Err(e) => {
                s.errors.push(e.to_string());
                continue;
            }
        };
        s.instances += 1;
        let p = &inst.problem;
        let outcome = (|| -> signflip_core::Result<(f64, f64)> {
            let aub = to_aub(p)?;
            let w = embed_w(&inst.point.v, &inst.theta, p.bounds())?;
            let ap = AubPoint::from_field(inst.point.clone(), w);
            let scale = ap.stacked().iter().fold(1f64, |m, v| m.max(v.abs()));
            let abs_excess = ap.w.iter().zip(&ap.v).fold(0f64, |m, (w, v)| m.max(w.abs() - v.abs()));
            let aub_feas = aub
                .coupling_residual(&ap)
                .max(aub.constraints().eq_residual(&ap.stacked()))
                .max(aub.constraints().box_violation(&ap.stacked()))
                .max(abs_excess);
            let d = recover_theta(&ap.v, &ap.w, aub.bounds(), &RecoverOptions::default())?;
            let back = ap.field();
            let coupling = (0..m).fold(0f64, |acc, i| acc.max((back.u[i] - d.theta[i] * back.v[i]).abs()));
            let bounds_ok = if p.bounds().contains(&d.theta, 0.0) { 0.0 } else { f64::INFINITY };
            let y = back.stacked();
            let feas = aub_feas
                .max(coupling)
                .max(p.constraints().eq_residual(&y))
                .max(p.constraints().box_violation(&y))
                .max(bounds_ok)
                / scale;
            let f0 = p.objective().eval(&inst.point.stacked());
            let f1 = aub.objective().eval(&ap.stacked());
            let f2 = p.objective().eval(&y);
            Ok((feas, rel_diff(f0, f1).max(rel_diff(f0, f2))))
        })();
        match outcome {
            Ok((feas, obj)) => {
                s.worst_feasibility = s.worst_feasibility.max(feas);
                s.worst_objective = s.worst_objective.max(obj);
            }
            Err(e) => s.errors.push(e.to_string()),
        }
        match problem_from_json(&problem_to_json(p)) {
            Ok(q) if &q == p => {}
            _ => s.json_mismatches += 1,
        }
    }
    s
}

impl RoundtripStats {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.errors.is_empty()
            && self.json_mismatches == 0
            && self.worst_feasibility <= tol.roundtrip
            && self.worst_objective <= tol.roundtrip
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleStats {
    pub instances: usize,
    /// Worst disagreement between the two global routes.
    pub worst_agreement: f64,
    /// Instances where no global optimum was found with every parameter extremal.
    pub non_extremal: usize,
    /// Largest `oracle - descent` relative to `max(1, |oracle|)`.
    pub worst_dominance: f64,
    pub worst_monotone: f64,
    pub errors: Vec<String>,
}

impl OracleStats {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.errors.is_empty()
            && self.instances > 0
            && self.worst_agreement <= tol.objective
            && self.non_extremal == 0
            && self.worst_dominance <= tol.dominance
            && self.worst_monotone <= tol.monotone
    }

    fn absorb_descent(&mut self, oracle: f64, descent: f64, trace: &DescentTrace) {
        self.worst_dominance = self.worst_dominance.max((oracle - descent) / oracle.abs().max(1.0));
        self.worst_monotone = self.worst_monotone.max(monotonicity_violation(trace));
    }
}

fn descent_cfg(rule: Rule) -> DescentConfig {
    DescentConfig { rule, ..DescentConfig::default() }
}

/// Solving the restriction at the brute-force optimal signs reproduces the
/// brute-force value; descent from the signs of a known feasible point never
/// beats the global value.
pub fn known_signs<B: Backend + Sync + ?Sized>(count: usize, seed: u64, backend: &B, cfg: &SolverConfig) -> OracleStats {
    let mut r = rng(seed);
    let mut s = OracleStats::default();
    for k in 0..count {
        let n_x = r.random_range(1..=5);
        let m = r.random_range(1..=8);
        let rule = if k % 2 == 0 { Rule::Field } else { Rule::Greedy };
        let outcome = (|| -> signflip_core::Result<()> {
            let inst = design_instance(&mut r, n_x, m)?;
            let g = global_by_signs_par(&inst.problem, 8, backend, cfg)?;
            let aub = to_aub(&inst.problem)?;
            let again = solve_restriction(&aub, &g.signs, backend, &NoClock, cfg)?;
            s.worst_agreement = s.worst_agreement.max(rel_diff(again.objective, g.objective));
            let init = init_signs(&inst.point.v, 1e-8);
            let d = run(&inst.problem, &init, backend, &NoClock, &descent_cfg(rule), cfg)?;
            s.absorb_descent(g.objective, d.objective, &d.trace);
            Ok(())
        })();
        s.instances += 1;
        if let Err(e) = outcome {
            s.errors.push(format!("instance {k}: {e}"));
        }
    }
    s
}

/// Linear-objective diagonal designs: brute force over sign vectors against
/// direct physics solves at every vertex of the design box.
pub fn extremal_oracle<B: Backend + Sync + ?Sized>(count: usize, seed: u64, backend: &B, cfg: &SolverConfig) -> OracleStats {
    let mut r = rng(seed);
    let mut s = OracleStats::default();
    for k in 0..count {
        let m = r.random_range(1..=8);
        let rule = if k % 2 == 0 { Rule::Field } else { Rule::Greedy };
        let outcome = (|| -> signflip_core::Result<()> {
            let spec = diagonal_spec(&mut r, m, ObjectiveKind::Linear)?;
            let problem = build_diagonal(&spec)?;
            let g = global_by_signs_par(&problem, 8, backend, cfg)?;
            let e = global_extremal(&spec, 8)?;
            // The recovered design, re-evaluated by a direct solve.
            let direct = fixed_design_value(&spec, &g.design.theta)?;
            s.worst_agreement = s.worst_agreement.max(rel_diff(g.objective, e.objective)).max(rel_diff(g.objective, direct));
            let ext_vertex = extremality_report(&e.design, &spec.bounds, 1e-12)?.fraction_extremal;
            let ext_signs = extremality_report(&g.design, &spec.bounds, 1e-6)?.fraction_extremal;
            if ext_vertex < 1.0 && ext_signs < 1.0 {
                s.non_extremal += 1;
            }
            let v = PhysicsHook::Diagonal(&spec).midpoint_field(&problem, backend, cfg)?;
            let d = run(&problem, &init_signs(&v, 1e-8), backend, &NoClock, &descent_cfg(rule), cfg)?;
            s.absorb_descent(g.objective, d.objective, &d.trace);
            Ok(())
        })();
        s.instances += 1;
        if let Err(e) = outcome {
            s.errors.push(format!("instance {k}: {e}"));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityStats {
    pub fraction: f64,
    pub objective: f64,
    pub iterations: usize,
    pub monotone: f64,
}

/// Fraction of extremal conductances of the field-rule thermal design.
pub fn thermal_extremality<B: Backend + ?Sized>(m_side: usize, backend: &B, cfg: &SolverConfig) -> signflip_core::Result<ExtremalityStats> {
    let spec = DiffusionGridSpec::grid(m_side)?;
    let problem = build_static_diffusion(&spec)?;
    let v = PhysicsHook::Diffusion(&spec).midpoint_field(&problem, backend, cfg)?;
    let d = run(&problem, &init_signs(&v, 1e-8), backend, &NoClock, &DescentConfig::default(), cfg)?;
    Ok(ExtremalityStats {
        fraction: extremality_report(&d.design, problem.bounds(), 1e-6)?.fraction_extremal,
        objective: d.objective,
        iterations: d.trace.iterations(),
        monotone: monotonicity_violation(&d.trace),
    })
}

/// A deliberately broken backend: every nonnegative-cone row is negated
/// before solving, turning `>=` into `<=`.
#[derive(Debug, Clone, Copy)]
pub struct FlippedInequalities<B>(pub B);

impl<B: Backend> Backend for FlippedInequalities<B> {
    fn name(&self) -> &str {
        "flipped"
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        let mut flip = vec![false; program.num_rows()];
        let mut row = 0;
        for k in &program.cones {
            let (n, nonneg) = match *k {
                ConeKind::Zero(n) => (n, false),
                ConeKind::Nonneg(n) => (n, true),
                ConeKind::Soc(n) => (n, false),
            };
            flip[row..row + n].iter_mut().for_each(|f| *f = nonneg);
            row += n;
        }
        let sign = |i: usize| if flip[i] { -1.0 } else { 1.0 };
        let trip: Vec<_> = program.a.triplets().map(|(i, j, v)| (i, j, sign(i) * v)).collect();
        let a = signflip_core::linalg::CscMatrix::from_triplets(program.num_rows(), program.num_vars(), &trip);
        let b = program.b.iter().enumerate().map(|(i, v)| sign(i) * v).collect();
        match ConeProgram::new(program.c.clone(), a, b, program.cones.clone()) {
            Ok(p) => self.0.solve(&p, config),
            Err(_) => SolverResult::failed(signflip_core::conic::SolveStatus::NumericalFailure, program, 0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_diff_scale() {
        assert_eq!(rel_diff(1e-12, 0.0), 1e-12);
        assert_eq!(rel_diff(200.0, 100.0), 0.5);
        assert_eq!(rel_diff(f64::INFINITY, f64::INFINITY), 0.0);
    }
}
