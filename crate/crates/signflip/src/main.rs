use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use signflip_core::conic::{Backend, SolveStatus};
use signflip_core::descent::Rule;
use signflip_core::oracle::{global_extremal, DEFAULT_MAX_M};
use signflip_core::problems::control_trajectory;
use signflip_core::{Clock, Error};

use signflip::audit::Certified;
use signflip::config::{BackendKind, ExperimentConfig, ProblemKind};
use signflip::experiment::{build, solve, AnyBackend, BuildError, Family, WallClock};
use signflip::export::{sha256_hex, write_all, Manifest, RunFiles};
use signflip::io::{read_text, IoError};
use signflip::oracle::global_by_signs_par;
use signflip::verify::{extremal_oracle, known_signs, roundtrip, thermal_extremality, Tolerances};

#[derive(Parser, Debug)]
#[command(name = "signflip", version, about = "Sign flip descent for diagonal physical design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run sign flip descent and write the results.
    Solve(Common),
    /// Brute force over every sign vector (small problems only).
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_MAX_M)]
        max_m: usize,
    },
    /// Run the property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, value_enum)]
        backend: Option<BackendKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum)]
    problem: Option<ProblemKind>,
    /// Experiment configuration (JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Thermal grid side.
    #[arg(long)]
    m_side: Option<usize>,
    /// Helmholtz grid points per side, boundary included.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Problem document for `--problem custom`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Leave solve times out of trace.csv so runs compare byte for byte.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Field,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Roundtrip,
    KnownSigns,
    Oracle,
    Extremality,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct ConfigError(String);

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json(&read_text(p)?)
                .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = self.problem {
            cfg.problem = p;
        }
        if let Some(r) = self.rule {
            cfg.descent.rule = match r {
                RuleArg::Field => Rule::Field,
                RuleArg::Greedy => Rule::Greedy,
            };
        }
        if let Some(e) = self.epsilon {
            cfg.descent.epsilon = e;
        }
        if let Some(n) = self.max_iters {
            cfg.descent.max_iters = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        if let Some(m) = self.m_side {
            cfg.diffusion.m_side = m;
        }
        if let Some(n) = self.grid_n {
            let mut h = signflip_core::problems::HelmholtzConfig::with_grid(n);
            h.omega = cfg.helmholtz.omega;
            h.theta_min = cfg.helmholtz.theta_min;
            h.theta_max = cfg.helmholtz.theta_max;
            cfg.helmholtz = h;
        }
        if let Some(i) = &self.input {
            cfg.input = Some(i.clone());
        }
        if cfg.problem == ProblemKind::Custom && cfg.input.is_none() {
            return Err(ConfigError("--problem custom needs --input".into()).into());
        }
        Ok(cfg)
    }
}

fn run_solve(common: &Common) -> anyhow::Result<()> {
    let cfg = common.config()?;
    let inst = build(&cfg)?;
    let backend = AnyBackend::new(cfg.backend);
    let clock = WallClock::start();
    let res = solve(&inst, &backend, &clock, &cfg.descent, &cfg.solver)?;
    let wall = Clock::now(&clock);
    let manifest = Manifest {
        config_sha256: sha256_hex(&cfg.to_json()),
        backend: backend.name().to_string(),
        problem: cfg.problem.as_str().to_string(),
        seed: cfg.seed,
        solver: cfg.solver.clone(),
        descent: cfg.descent,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let files = RunFiles { instance: &inst, result: &res, manifest: &manifest, with_time: !common.no_timings };
    write_all(&common.out_dir, &files)?;
    let mut extra = String::new();
    if let Family::Control(spec) = &inst.family {
        let traj = control_trajectory(spec, &res.point.x);
        let lo = traj.iter().flat_map(|r| [r[1], r[2]]).fold(f64::INFINITY, f64::min);
        let hi = traj.iter().flat_map(|r| [r[1], r[2]]).fold(f64::NEG_INFINITY, f64::max);
        extra = format!(" rooms=[{lo:.4}, {hi:.4}]");
    }
    println!(
        "problem={} rule={} objective={:.6} iterations={} termination={} extremal={:.3} time={:.2}s backend={}{extra}",
        cfg.problem.as_str(),
        cfg.descent.rule.as_str(),
        res.objective,
        res.trace.iterations(),
        res.trace.termination.as_str(),
        res.design.fraction_extremal(),
        wall,
        backend.name(),
    );
    Ok(())
}

fn run_oracle(common: &Common, max_m: usize) -> anyhow::Result<()> {
    let cfg = common.config()?;
    let inst = build(&cfg)?;
    let backend = AnyBackend::new(cfg.backend);
    let clock = WallClock::start();
    let g = global_by_signs_par(&inst.problem, max_m, &backend, &cfg.solver)?;
    let signs: String = g.signs.as_slice().iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
    let mut line = format!("global objective={:.9} signs={signs} extremal={:.3}", g.objective, g.design.fraction_extremal());
    if let Family::Helmholtz { spec, .. } = &inst.family {
        let e = global_extremal(spec, max_m)?;
        line += &format!(" vertex_objective={:.9}", e.objective);
    }
    let d = solve(&inst, &backend, &clock, &cfg.descent, &cfg.solver)?;
    let gap = d.objective - g.objective;
    let dominated = gap >= -Tolerances::default().dominance * g.objective.abs().max(1.0);
    line += &format!(" descent={:.9} dominance={} time={:.2}s", d.objective, if dominated { "ok" } else { "VIOLATED" }, clock.now());
    println!("{line}");
    if !dominated {
        anyhow::bail!("descent value {} below the global value {}", d.objective, g.objective);
    }
    Ok(())
}

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn run_verify(suite: Suite, backend: Option<BackendKind>, seed: u64) -> anyhow::Result<bool> {
    let tol = Tolerances::default();
    let backend = Certified::new(AnyBackend::new(backend.unwrap_or_default()));
    let cfg = signflip_core::conic::SolverConfig::default();
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut ok = true;
    let mut monotone = 0f64;
    if want(Suite::Roundtrip) {
        let s = roundtrip(100, seed);
        let detail = format!(
            "{} instances, feasibility {:.1e}, objective {:.1e}, json mismatches {}, errors {}",
            s.instances,
            s.worst_feasibility,
            s.worst_objective,
            s.json_mismatches,
            s.errors.len()
        );
        ok &= report("roundtrip", s.passes(&tol), detail);
    }
    let oracle_detail = |s: &signflip::verify::OracleStats| {
        let first = s.errors.first().map(|e| format!(", first error: {e}")).unwrap_or_default();
        format!(
            "{} instances, agreement {:.1e}, dominance {:.1e}, non-extremal {}, errors {}{first}",
            s.instances,
            s.worst_agreement,
            s.worst_dominance,
            s.non_extremal,
            s.errors.len()
        )
    };
    if want(Suite::KnownSigns) {
        let s = known_signs(10, seed.wrapping_add(1), &backend, &cfg);
        monotone = monotone.max(s.worst_monotone);
        ok &= report("known_signs", s.passes(&tol), oracle_detail(&s));
    }
    if want(Suite::Oracle) {
        let s = extremal_oracle(10, seed.wrapping_add(2), &backend, &cfg);
        monotone = monotone.max(s.worst_monotone);
        ok &= report("oracle", s.passes(&tol), oracle_detail(&s));
    }
    if want(Suite::Extremality) {
        match thermal_extremality(11, &backend, &cfg) {
            Ok(s) => {
                monotone = monotone.max(s.monotone);
                let detail = format!("fraction extremal {:.4} (m = 11, objective {:.6}, {} iterations)", s.fraction, s.objective, s.iterations);
                ok &= report("extremality", s.fraction >= tol.extremal_fraction, detail);
            }
            Err(e) => ok &= report("extremality", false, e.to_string()),
        }
    }
    if suite != Suite::Roundtrip {
        ok &= report("monotonicity", monotone <= tol.monotone, format!("worst violation {monotone:.1e}"));
        let a = backend.summary();
        let detail = format!("{} optimal solves, worst residual {:.1e}", a.optimal_solves, a.worst);
        ok &= report("certificate", a.worst <= tol.certificate, detail);
    }
    Ok(ok)
}

/// 1: the problem has no feasible or usable starting point, 2: bad input,
/// 3: solver or internal failure.
fn exit_code(e: &anyhow::Error) -> u8 {
    let core = e
        .downcast_ref::<Error>()
        .or_else(|| match e.downcast_ref::<BuildError>() {
            Some(BuildError::Model(m)) => Some(m),
            _ => None,
        })
        .or_else(|| match e.downcast_ref::<IoError>().or_else(|| match e.downcast_ref::<BuildError>() {
            Some(BuildError::Io(i)) => Some(i),
            _ => None,
        }) {
            Some(IoError::Model(m)) => Some(m),
            _ => None,
        });
    if let Some(c) = core {
        return match c {
            Error::Initialization(_) | Error::Infeasible { .. } | Error::NoFeasiblePattern | Error::Singular(_) => 1,
            Error::Solver(SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasibleOrUnbounded) => 1,
            Error::Domain(_) | Error::Dimension(_) | Error::Inconsistent(_) | Error::TooLarge { .. } => 2,
            _ => 3,
        };
    }
    if e.is::<ConfigError>() || e.is::<IoError>() || e.is::<BuildError>() {
        return 2;
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Solve(c) => run_solve(c).map(|_| true),
        Command::Oracle { common, max_m } => run_oracle(common, *max_m).map(|_| true),
        Command::Verify { suite, backend, seed } => run_verify(*suite, *backend, *seed),
    };
    match out {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
