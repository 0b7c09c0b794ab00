//! Build a configured problem and run descent on it.

use signflip_core::conic::{AdmmSolver, Backend, ConeProgram, InteriorPointSolver, SolverConfig, SolverResult};
use signflip_core::descent::{init_signs, run, DescentConfig, DescentResult};
use signflip_core::model::DesignProblem;
use signflip_core::problems::{
    build_dynamic_control, build_helmholtz, build_static_diffusion, ControlSpec, DiagonalDesignSpec, DiffusionGridSpec,
    HelmholtzConfig, PhysicsHook,
};
use signflip_core::Clock;

use crate::bound::ClarabelSolver;
use crate::config::{BackendKind, ExperimentConfig, ProblemKind};
use crate::io::{read_problem, IoError};

/// Any of the shipped backends, chosen at run time.
#[derive(Debug, Clone, Copy)]
pub enum AnyBackend {
    Reference(InteriorPointSolver),
    Bound(ClarabelSolver),
    Admm(AdmmSolver),
}

impl AnyBackend {
    pub fn new(kind: BackendKind) -> Self {
        match kind {
            BackendKind::Reference => AnyBackend::Reference(InteriorPointSolver),
            BackendKind::Bound => AnyBackend::Bound(ClarabelSolver),
            BackendKind::Admm => AnyBackend::Admm(AdmmSolver),
        }
    }
}

impl Backend for AnyBackend {
    fn name(&self) -> &str {
        match self {
            AnyBackend::Reference(b) => b.name(),
            AnyBackend::Bound(b) => b.name(),
            AnyBackend::Admm(b) => b.name(),
        }
    }

    fn solve(&self, program: &ConeProgram, config: &SolverConfig) -> SolverResult {
        match self {
            AnyBackend::Reference(b) => b.solve(program, config),
            AnyBackend::Bound(b) => b.solve(program, config),
            AnyBackend::Admm(b) => b.solve(program, config),
        }
    }
}

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(std::time::Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(std::time::Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::start()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// The builder data a problem came from, kept for exports and for the
/// midpoint physics solve.
#[derive(Debug, Clone)]
pub enum Family {
    Helmholtz { config: HelmholtzConfig, spec: DiagonalDesignSpec },
    Diffusion(DiffusionGridSpec),
    Control(ControlSpec),
    Custom,
}

impl Family {
    pub fn hook(&self) -> PhysicsHook<'_> {
        match self {
            Family::Helmholtz { spec, .. } => PhysicsHook::Diagonal(spec),
            Family::Diffusion(spec) => PhysicsHook::Diffusion(spec),
            Family::Control(_) | Family::Custom => PhysicsHook::Pinned,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: DesignProblem,
    pub family: Family,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Model(#[from] signflip_core::Error),
    #[error("the custom problem needs an input file")]
    MissingInput,
}

pub fn diffusion_spec(cfg: &ExperimentConfig) -> signflip_core::Result<DiffusionGridSpec> {
    let mut spec = DiffusionGridSpec::grid(cfg.diffusion.m_side)?;
    spec.g_min = cfg.diffusion.g_min;
    spec.g_max = cfg.diffusion.g_max;
    Ok(spec)
}

pub fn build(cfg: &ExperimentConfig) -> Result<Instance, BuildError> {
    Ok(match cfg.problem {
        ProblemKind::Helmholtz => {
            let spec = cfg.helmholtz.diagonal_spec()?;
            Instance { problem: build_helmholtz(&cfg.helmholtz)?, family: Family::Helmholtz { config: cfg.helmholtz.clone(), spec } }
        }
        ProblemKind::Diffusion => {
            let spec = diffusion_spec(cfg)?;
            Instance { problem: build_static_diffusion(&spec)?, family: Family::Diffusion(spec) }
        }
        ProblemKind::Control => {
            Instance { problem: build_dynamic_control(&cfg.control)?, family: Family::Control(cfg.control.clone()) }
        }
        ProblemKind::Custom => {
            let path = cfg.input.as_ref().ok_or(BuildError::MissingInput)?;
            Instance { problem: read_problem(path)?, family: Family::Custom }
        }
    })
}

/// Midpoint initialization followed by sign flip descent.
pub fn solve<B: Backend + ?Sized, C: Clock + ?Sized>(
    inst: &Instance,
    backend: &B,
    clock: &C,
    descent: &DescentConfig,
    solver: &SolverConfig,
) -> signflip_core::Result<DescentResult> {
    let v = inst.family.hook().midpoint_field(&inst.problem, backend, solver)?;
    let signs = init_signs(&v, descent.zero_threshold);
    run(&inst.problem, &signs, backend, clock, descent, solver)
}
