//! Sign flip descent.
//!
//! Each iterate is a sign vector `s`; its value is the optimum of the convex
//! restriction `|w| <= s o v`. A proposal replaces the iterate only when it
//! lowers that value by more than a small relative margin.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clock::Clock;
use crate::conic::{build_sign_fixed, extract_point, Backend, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::model::{recover_theta, to_aub, AubPoint, AubProblem, Design, DesignProblem, RecoverOptions};

/// Vector of `+1`/`-1` entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(s: Vec<i8>) -> Result<Self> {
        if let Some(i) = s.iter().position(|&x| x != 1 && x != -1) {
            return Err(Error::Domain(format!("sign entry {i} is {}", s[i])));
        }
        Ok(Self(s))
    }

    pub fn ones(m: usize) -> Self {
        Self(alloc::vec![1; m])
    }

    /// Sign vector number `k` in lexicographic order with `-1 < +1`, i.e. bit
    /// `m - 1 - i` of `k` set means `s_i = +1`.
    pub fn from_index(k: u64, m: usize) -> Self {
        Self((0..m).map(|i| if (k >> (m - 1 - i)) & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Number of entries where `self` and `other` differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Rule {
    Greedy,
    #[default]
    Field,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Greedy => "greedy",
            Rule::Field => "field",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct DescentConfig {
    pub rule: Rule,
    /// Field rule stops once an accepted step decreases the value by less.
    pub epsilon: f64,
    pub max_iters: usize,
    /// `|v_i| <= zero_threshold * max(1, ||v||_inf)` counts as zero.
    pub zero_threshold: f64,
    /// Relative acceptance margin.
    pub accept_margin: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self { rule: Rule::Field, epsilon: 1e-4, max_iters: 1000, zero_threshold: 1e-8, accept_margin: 1e-9 }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.zero_threshold >= 0.0) || !(self.accept_margin >= 0.0) {
            return Err(Error::Domain("thresholds must be nonnegative".into()));
        }
        Ok(())
    }

    fn margin(&self, p: f64) -> f64 {
        self.accept_margin * p.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iter: usize,
    pub rule: Rule,
    pub objective_before: f64,
    /// `+inf` when the proposal was not solved to optimality.
    pub objective_after: f64,
    pub accepted: bool,
    pub flips: usize,
    pub solve_time: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    /// Field rule found no zero entries of `v`.
    NoFlips,
    /// Field rule step decreased the value by less than epsilon.
    SmallDecrease,
    /// Greedy rule rejected `m` single flips in a row.
    LocalOptimum,
    MaxIters,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::NoFlips => "no_flips",
            Termination::SmallDecrease => "small_decrease",
            Termination::LocalOptimum => "local_optimum",
            Termination::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DescentTrace {
    pub initial_objective: f64,
    pub initial_solve_time: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub total_time: f64,
}

impl DescentTrace {
    /// `p^1, p^2, ...`: the incumbent value after each iteration.
    pub fn accepted_objectives(&self) -> Vec<f64> {
        let mut p = self.initial_objective;
        let mut out = alloc::vec![p];
        for r in &self.records {
            if r.accepted {
                p = r.objective_after;
            }
            out.push(p);
        }
        out
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> f64 {
        *self.accepted_objectives().last().unwrap_or(&self.initial_objective)
    }

    /// Largest relative increase `(p~ - p) / max(1, |p|)` over field-rule proposals.
    pub fn worst_field_increase(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.rule == Rule::Field)
            .map(|r| (r.objective_after - r.objective_before) / r.objective_before.abs().max(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV rows with header `iter,rule,objective_before,objective_after,accepted,flips,solve_time_s`.
    pub fn csv_rows(&self, with_time: bool) -> Vec<String> {
        let mut rows = alloc::vec![String::from("iter,rule,objective_before,objective_after,accepted,flips,solve_time_s")];
        let num = |v: f64| if v.is_finite() { format!("{v:.17e}") } else if v > 0.0 { "inf".into() } else { "-inf".into() };
        for r in &self.records {
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                r.iter,
                r.rule.as_str(),
                num(r.objective_before),
                num(r.objective_after),
                r.accepted,
                r.flips,
                if with_time { format!("{:.6}", r.solve_time) } else { String::new() }
            ));
        }
        rows
    }
}

/// `sign(v)` with `+1` on (near) zeros.
pub fn init_signs(v: &[f64], zero_threshold: f64) -> SignVector {
    let tol = zero_threshold * norm_inf(v).max(1.0);
    SignVector(v.iter().map(|&x| if x.abs() <= tol || x > 0.0 { 1 } else { -1 }).collect())
}

/// Flips entry `1 + ((k - 1) mod m)` (1-based), i.e. `(k - 1) % m` 0-based.
pub fn propose_greedy(s: &SignVector, k: usize) -> SignVector {
    let mut out = s.clone();
    if !s.is_empty() {
        out.flip((k.max(1) - 1) % s.len());
    }
    out
}

/// Flips every entry where `v` is (near) zero; returns the proposal and the
/// number of flips.
pub fn propose_field(s: &SignVector, v: &[f64], zero_threshold: f64) -> (SignVector, usize) {
    let tol = zero_threshold * norm_inf(v).max(1.0);
    let mut out = s.clone();
    let mut flips = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() <= tol {
            out.flip(i);
            flips += 1;
        }
    }
    (out, flips)
}

/// Optimal point and value of the restriction at `signs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub status: SolveStatus,
    pub objective: f64,
    pub point: Option<AubPoint>,
    pub solve_time: f64,
    pub iterations: usize,
}

pub fn solve_restriction<B, C>(aub: &AubProblem, signs: &SignVector, backend: &B, clock: &C, cfg: &SolverConfig) -> Result<Restriction>
where
    B: Backend + ?Sized,
    C: Clock + ?Sized,
{
    let sfp = build_sign_fixed(aub, signs.as_slice())?;
    let t0 = clock.now();
    let res = backend.solve(&sfp.program, cfg);
    let solve_time = clock.now() - t0;
    Ok(match extract_point(&sfp, &res, aub) {
        Ok((pt, obj)) => Restriction { status: res.status, objective: obj, point: Some(pt), solve_time, iterations: res.iterations },
        Err(_) => Restriction { status: res.status, objective: f64::INFINITY, point: None, solve_time, iterations: res.iterations },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub design: Design,
    pub point: AubPoint,
    pub objective: f64,
    pub signs: SignVector,
    pub trace: DescentTrace,
}

/// Runs sign flip descent on `problem` from `init`.
pub fn run<B, C>(
    problem: &DesignProblem,
    init: &SignVector,
    backend: &B,
    clock: &C,
    cfg: &DescentConfig,
    solver: &SolverConfig,
) -> Result<DescentResult>
where
    B: Backend + ?Sized,
    C: Clock + ?Sized,
{
    cfg.validate()?;
    let aub = to_aub(problem)?;
    run_aub(&aub, init, backend, clock, cfg, solver)
}

pub fn run_aub<B, C>(
    aub: &AubProblem,
    init: &SignVector,
    backend: &B,
    clock: &C,
    cfg: &DescentConfig,
    solver: &SolverConfig,
) -> Result<DescentResult>
where
    B: Backend + ?Sized,
    C: Clock + ?Sized,
{
    let m = aub.m();
    if init.len() != m {
        return Err(Error::Dimension(format!("{} initial signs for m = {m}", init.len())));
    }
    let start = clock.now();
    let first = solve_restriction(aub, init, backend, clock, solver)?;
    let Some(mut point) = first.point else {
        return Err(Error::Initialization(format!(
            "initial sign vector gives a {} subproblem",
            first.status.as_str()
        )));
    };
    let mut p = first.objective;
    let mut s = init.clone();
    let mut records = Vec::new();
    let mut rejected_in_row = 0usize;
    let mut termination = Termination::MaxIters;

    for k in 1..=cfg.max_iters {
        let (proposal, flips) = match cfg.rule {
            Rule::Greedy => {
                if m == 0 {
                    termination = Termination::LocalOptimum;
                    break;
                }
                (propose_greedy(&s, k), 1)
            }
            Rule::Field => {
                let (prop, flips) = propose_field(&s, &point.v, cfg.zero_threshold);
                if flips == 0 {
                    termination = Termination::NoFlips;
                    break;
                }
                (prop, flips)
            }
        };
        let r = solve_restriction(aub, &proposal, backend, clock, solver)?;
        let accepted = r.objective < p - cfg.margin(p);
        records.push(IterationRecord {
            iter: k,
            rule: cfg.rule,
            objective_before: p,
            objective_after: r.objective,
            accepted,
            flips,
            solve_time: r.solve_time,
            status: r.status,
        });
        let decrease = if accepted { p - r.objective } else { 0.0 };
        if accepted {
            s = proposal;
            p = r.objective;
            point = r.point.expect("accepted proposal has a point");
            rejected_in_row = 0;
        } else {
            rejected_in_row += 1;
        }
        match cfg.rule {
            Rule::Greedy if rejected_in_row >= m => {
                termination = Termination::LocalOptimum;
                break;
            }
            Rule::Field if decrease < cfg.epsilon => {
                termination = Termination::SmallDecrease;
                break;
            }
            _ => {}
        }
    }

    let opts = RecoverOptions { zero_threshold: cfg.zero_threshold, ..RecoverOptions::default() };
    let design = recover_theta(&point.v, &point.w, aub.bounds(), &opts)?;
    let trace = DescentTrace {
        initial_objective: first.objective,
        initial_solve_time: first.solve_time,
        records,
        termination,
        total_time: clock.now() - start,
    };
    Ok(DescentResult { design, point, objective: p, signs: s, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(s: &[i8]) -> SignVector {
        SignVector::new(s.to_vec()).unwrap()
    }

    #[test]
    fn init_examples() {
        assert_eq!(init_signs(&[2.0, -3.0, 0.0], 1e-8), sv(&[1, -1, 1]));
    }

    #[test]
    fn greedy_examples() {
        let s = sv(&[1, 1, 1]);
        assert_eq!(propose_greedy(&s, 1), sv(&[-1, 1, 1]));
        assert_eq!(propose_greedy(&s, 4), sv(&[-1, 1, 1]));
        assert_eq!(propose_greedy(&propose_greedy(&s, 2), 2), s);
    }

    #[test]
    fn field_examples() {
        let (p, f) = propose_field(&sv(&[1, 1, -1, -1]), &[1.0, 0.0, -2.0, 0.0], 1e-8);
        assert_eq!((p, f), (sv(&[1, -1, -1, 1]), 2));
        let (p, f) = propose_field(&sv(&[1, -1]), &[1.0, -1.0], 1e-8);
        assert_eq!((p, f), (sv(&[1, -1]), 0));
    }

    #[test]
    fn lexicographic_index() {
        assert_eq!(SignVector::from_index(0, 3), sv(&[-1, -1, -1]));
        assert_eq!(SignVector::from_index(1, 3), sv(&[-1, -1, 1]));
        assert_eq!(SignVector::from_index(4, 3), sv(&[1, -1, -1]));
        assert!(SignVector::new(alloc::vec![0]).is_err());
    }
}
