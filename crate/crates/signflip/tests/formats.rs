use signflip::config::ExperimentConfig;
use signflip::io::{problem_from_json, problem_to_json, ProblemDoc};
use signflip_core::problems::random::{design_instance, rng};
use signflip_core::problems::{build_dynamic_control, build_helmholtz, build_static_diffusion, ControlSpec, DiffusionGridSpec, HelmholtzConfig};

#[test]
fn builder_problems_round_trip_exactly() {
    let control = ControlSpec { horizon: 6, ..ControlSpec::default() };
    let problems = [
        build_static_diffusion(&DiffusionGridSpec::grid(5).unwrap()).unwrap(),
        build_helmholtz(&HelmholtzConfig::with_grid(9)).unwrap(),
        build_dynamic_control(&control).unwrap(),
    ];
    for p in &problems {
        let text = problem_to_json(p);
        let back = problem_from_json(&text).unwrap();
        assert_eq!(&back, p, "{}", p.metadata.name);
        assert_eq!(problem_to_json(&back), text);
    }
}

#[test]
fn random_problems_round_trip_exactly() {
    let mut r = rng(17);
    for _ in 0..50 {
        let inst = design_instance(&mut r, 4, 5).unwrap();
        let back = problem_from_json(&problem_to_json(&inst.problem)).unwrap();
        assert_eq!(back, inst.problem);
        let bits: Vec<u64> = ProblemDoc::from_problem(&back).constraints.rhs.iter().map(|v| v.to_bits()).collect();
        let orig: Vec<u64> = inst.problem.constraints().eq_rhs().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, orig);
    }
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(problem_from_json("{}").is_err());
    let mut r = rng(3);
    let inst = design_instance(&mut r, 2, 2).unwrap();
    let text = problem_to_json(&inst.problem).replace("\"theta_min\": [", "\"theta_min\": [0.0, ");
    assert!(problem_from_json(&text).is_err());
}

#[test]
fn config_round_trip() {
    let mut c = ExperimentConfig::default();
    c.control.horizon = 40;
    c.descent.epsilon = 3e-5;
    c.solver.abs_tol = 1e-9;
    c.helmholtz = HelmholtzConfig::with_grid(21);
    assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
}
