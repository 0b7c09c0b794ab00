//! Backend wrapper that checks every optimal solution independently.

use std::sync::Mutex;

use signflip_core::conic::{Backend, Certificate, ConeProgram, SolverConfig, SolverResult};

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct AuditSummary {
    pub optimal_solves: usize,
    pub other_solves: usize,
    /// Largest of the certificate components over optimal solves.
    pub worst: f64,
    pub worst_certificate: Option<Certificate>,
}

fn size(c: &Certificate) -> f64 {
    [c.primal_residual, c.dual_residual, c.gap, c.cone_violation, c.dual_cone_violation].into_iter().fold(0.0, f64::max)
}

/// Recomputes the certificate of each optimal result from the program data.
#[derive(Debug)]
pub struct Certified<B> {
    pub inner: B,
    summary: Mutex<AuditSummary>,
}

impl<B> Certified<B> {
    pub fn new(inner: B) -> Self {
        Self { inner, summary: Mutex::new(AuditSummary::default()) }
    }

    pub fn summary(&self) -> AuditSummary {
        *self.summary.lock().unwrap()
    }
}

impl<B: Backend> Backend for Certified<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        let res = self.inner.solve(program, config);
        let mut s = self.summary.lock().unwrap();
        if res.status.is_optimal() {
            let cert = res.certify(program);
            let v = size(&cert);
            s.optimal_solves += 1;
            if !(v <= s.worst) {
                s.worst = v;
                s.worst_certificate = Some(cert);
            }
        } else {
            s.other_solves += 1;
        }
        res
    }
}
