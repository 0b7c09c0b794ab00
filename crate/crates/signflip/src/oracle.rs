//! Parallel brute force over sign vectors.

use rayon::prelude::*;
use signflip_core::conic::{Backend, SolverConfig};
use signflip_core::model::{to_aub, DesignProblem, RecoverOptions};
use signflip_core::oracle::{evaluate_sign_index, finish_by_signs, GlobalSolution};
use signflip_core::{Error, Result};

/// Same answer as [`signflip_core::oracle::global_by_signs`], with the
/// restrictions solved on the rayon pool.
pub fn global_by_signs_par<B: Backend + Sync + ?Sized>(
    problem: &DesignProblem,
    max_m: usize,
    backend: &B,
    cfg: &SolverConfig,
) -> Result<GlobalSolution> {
    let aub = to_aub(problem)?;
    let m = aub.m();
    if m > max_m || m >= 63 {
        return Err(Error::TooLarge { m, max_m });
    }
    let values = (0..(1u64 << m))
        .into_par_iter()
        .map(|k| evaluate_sign_index(&aub, k, backend, cfg).map(|r| r.objective))
        .collect::<Result<Vec<f64>>>()?;
    finish_by_signs(&aub, values, backend, cfg, &RecoverOptions::default())
}
