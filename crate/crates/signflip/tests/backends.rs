use signflip::audit::Certified;
use signflip::bound::ClarabelSolver;
use signflip::oracle::global_by_signs_par;
use signflip::verify::{extremal_oracle, rel_diff, FlippedInequalities, Tolerances};
use signflip_core::conic::{AdmmSolver, InteriorPointSolver, SolverConfig};
use signflip_core::descent::{solve_restriction, SignVector};
use signflip_core::model::to_aub;
use signflip_core::oracle::global_by_signs;
use signflip_core::problems::random::{design_instance, rng};
use signflip_core::NoClock;

#[test]
fn clarabel_matches_the_reference_solver() {
    let cfg = SolverConfig::default();
    let mut r = rng(5);
    let clarabel = Certified::new(ClarabelSolver);
    for k in 0..40u64 {
        let inst = design_instance(&mut r, 4, 5).unwrap();
        let aub = to_aub(&inst.problem).unwrap();
        let s = SignVector::from_index(k % 32, 5);
        let a = solve_restriction(&aub, &s, &InteriorPointSolver, &NoClock, &cfg).unwrap();
        let b = solve_restriction(&aub, &s, &clarabel, &NoClock, &cfg).unwrap();
        assert_eq!(a.status.is_optimal(), b.status.is_optimal(), "instance {k}: {:?} vs {:?}", a.status, b.status);
        if a.status.is_optimal() {
            assert!(rel_diff(a.objective, b.objective) <= 1e-6, "instance {k}: {} vs {}", a.objective, b.objective);
        }
    }
    assert!(clarabel.summary().worst <= 1e-6, "{:?}", clarabel.summary());
}

#[test]
fn admm_agrees_loosely() {
    let cfg = SolverConfig::default();
    let mut r = rng(8);
    for _ in 0..10 {
        let inst = design_instance(&mut r, 3, 3).unwrap();
        let aub = to_aub(&inst.problem).unwrap();
        let s = SignVector::ones(3);
        let a = solve_restriction(&aub, &s, &InteriorPointSolver, &NoClock, &cfg).unwrap();
        let b = solve_restriction(&aub, &s, &AdmmSolver, &NoClock, &cfg).unwrap();
        if a.status.is_optimal() && b.status.is_optimal() {
            assert!(rel_diff(a.objective, b.objective) <= 1e-4, "{} vs {}", a.objective, b.objective);
        }
    }
}

#[test]
fn parallel_oracle_matches_sequential() {
    let cfg = SolverConfig::default();
    let mut r = rng(11);
    for _ in 0..5 {
        let inst = design_instance(&mut r, 3, 4).unwrap();
        let a = global_by_signs(&inst.problem, 8, &InteriorPointSolver, &cfg).unwrap();
        let b = global_by_signs_par(&inst.problem, 8, &InteriorPointSolver, &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn flipped_inequalities_fail_the_oracle_suite() {
    let cfg = SolverConfig::default();
    let tol = Tolerances::default();
    assert!(extremal_oracle(6, 2, &InteriorPointSolver, &cfg).passes(&tol));
    let broken = extremal_oracle(6, 2, &FlippedInequalities(InteriorPointSolver), &cfg);
    assert!(!broken.passes(&tol), "{broken:?}");
}
