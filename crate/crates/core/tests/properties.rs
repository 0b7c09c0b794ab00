use proptest::prelude::*;

use signflip_core::conic::{build_sign_fixed, ConeKind, InteriorPointSolver, SolverConfig};
use signflip_core::descent::{init_signs, run, solve_restriction, DescentConfig, Rule, SignVector, Termination};
use signflip_core::model::{embed_w, recover_theta, to_aub, DesignBounds, RecoverOptions};
use signflip_core::problems::random::{design_instance, diagonal_spec, rng, ObjectiveKind};
use signflip_core::problems::{build_diagonal, incidence_matrix, weighted_laplacian, DiffusionGridSpec, PhysicsHook};
use signflip_core::NoClock;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn edges_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| {
        let edge = (0..n, 0..n).prop_filter("no self loops", |(a, b)| a != b);
        (Just(n), prop::collection::vec((edge, 0.1f64..10.0), 1..12))
            .prop_map(|(n, es)| (n, es.iter().map(|e| e.0).collect(), es.iter().map(|e| e.1).collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_quadratic_form((n, edges, g) in edges_strategy(), x in prop::collection::vec(-3.0f64..3.0, 7)) {
        let a = incidence_matrix(&edges, n).unwrap();
        let l = weighted_laplacian(&a, &g);
        let x = &x[..n];
        let lx = l.mul_vec(x);
        let quad: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
        // sum over edges of g (x_head - x_tail)^2
        let direct: f64 = edges.iter().zip(&g).map(|(&(t, h), g)| g * (x[h] - x[t]).powi(2)).sum();
        prop_assert!(quad >= -1e-12);
        prop_assert!((quad - direct).abs() <= 1e-10 * (1.0 + direct));
        let ones = vec![1.0; n];
        prop_assert!(l.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn embed_recover_round_trip(
        m in 1usize..10,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut r = rng(seed);
        let lo: Vec<f64> = (0..m).map(|_| r.random_range(0.5..2.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + r.random_range(0.1..5.0)).collect();
        let bounds = DesignBounds::new(lo.clone(), hi.clone()).unwrap();
        let theta: Vec<f64> = (0..m).map(|i| lo[i] + r.random_range(0.0..=1.0) * (hi[i] - lo[i])).collect();
        let v: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let w = embed_w(&v, &theta, &bounds).unwrap();
        for i in 0..m {
            prop_assert!(w[i].abs() <= v[i].abs() * (1.0 + 1e-15));
        }
        let d = recover_theta(&v, &w, &bounds, &RecoverOptions::default()).unwrap();
        let scale = v.iter().fold(1f64, |a, b| a.max(b.abs()));
        for i in 0..m {
            if v[i].abs() > 1e-8 * scale {
                prop_assert!((d.theta[i] - theta[i]).abs() <= 1e-9 * (hi[i] - lo[i]) * (1.0 + scale / v[i].abs()));
            }
            // u = theta v holds for the recovered design
            prop_assert!((d.theta[i] * v[i] - theta[i] * v[i]).abs() <= 1e-9 * scale * hi[i]);
        }
    }

    #[test]
    fn objective_is_midpoint_convex(seed in any::<u64>(), t in 0.0f64..=1.0) {
        use rand::Rng;
        let mut r = rng(seed);
        let inst = design_instance(&mut r, 3, 3).unwrap();
        let dim = inst.problem.layout().dim();
        let a: Vec<f64> = (0..dim).map(|_| r.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..dim).map(|_| r.random_range(-5.0..5.0)).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let f = |y: &[f64]| inst.problem.objective().eval(y);
        prop_assert!(f(&mix) <= t * f(&a) + (1.0 - t) * f(&b) + 1e-9 * (1.0 + f(&a).abs() + f(&b).abs()));
    }
}

#[test]
fn grounding_shifts_potentials_by_a_constant() {
    let mut spec = DiffusionGridSpec::grid(5).unwrap();
    let g: Vec<f64> = (0..spec.num_edges()).map(|j| 1.0 + (j % 7) as f64).collect();
    let e1 = spec.potentials(&g).unwrap();
    spec.ground_node = 0;
    let e0 = spec.potentials(&g).unwrap();
    let shift = e1[0] - e0[0];
    assert!(e1.iter().zip(&e0).all(|(a, b)| (a - b - shift).abs() < 1e-10));
    // A diag(g) A^T e = src at every node, ground included
    let flows: Vec<f64> = spec.incidence.tmul_vec(&e1).iter().zip(&g).map(|(v, g)| g * v).collect();
    let div = spec.incidence.mul_vec(&flows);
    for (d, s) in div.iter().zip(&spec.src) {
        assert!((d - s).abs() < 1e-10, "balance {d} vs source {s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The restriction at the signs of a feasible point contains that point.
    #[test]
    fn restriction_contains_matching_points(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = design_instance(&mut r, 3, 4).unwrap();
        let aub = to_aub(&inst.problem).unwrap();
        let s = init_signs(&inst.point.v, 1e-8);
        let res = solve_restriction(&aub, &s, &InteriorPointSolver, &NoClock, &cfg()).unwrap();
        let f = inst.problem.objective().eval(&inst.point.stacked());
        prop_assert!(res.status.is_optimal());
        prop_assert!(res.objective <= f + 1e-6 * f.abs().max(1.0));
    }

    /// Flipping every sign of a problem whose data is symmetric under
    /// `y -> -y` leaves the restriction value unchanged.
    #[test]
    fn global_sign_flip_symmetry(seed in any::<u64>(), k in 0u64..16) {
        let mut r = rng(seed);
        let mut spec = diagonal_spec(&mut r, 4, ObjectiveKind::Quadratic).unwrap();
        // f(z) = ||z||^2 and b -> -b reflects the solution set
        spec.objective = signflip_core::model::ObjectiveSpec::default()
            .with_quad(1.0, signflip_core::model::AffineExpr::selection(&[0, 1, 2, 3], 4));
        let p = build_diagonal(&spec).unwrap();
        let mut neg = spec.clone();
        neg.b.iter_mut().for_each(|b| *b = -*b);
        let q = build_diagonal(&neg).unwrap();
        let s = SignVector::from_index(k, 4);
        let mut t = s.clone();
        (0..4).for_each(|i| t.flip(i));
        let a = solve_restriction(&to_aub(&p).unwrap(), &s, &InteriorPointSolver, &NoClock, &cfg()).unwrap();
        let b = solve_restriction(&to_aub(&q).unwrap(), &t, &InteriorPointSolver, &NoClock, &cfg()).unwrap();
        prop_assert_eq!(a.status.is_optimal(), b.status.is_optimal());
        if a.status.is_optimal() {
            prop_assert!((a.objective - b.objective).abs() <= 1e-6 * a.objective.abs().max(1.0));
        }
    }

    #[test]
    fn linear_objectives_lower_to_linear_programs(seed in any::<u64>(), m in 1usize..8, k in any::<u64>()) {
        let mut r = rng(seed);
        let spec = diagonal_spec(&mut r, m, ObjectiveKind::Linear).unwrap();
        let aub = to_aub(&build_diagonal(&spec).unwrap()).unwrap();
        let s = SignVector::from_index(k % (1 << m), m);
        let sfp = build_sign_fixed(&aub, s.as_slice()).unwrap();
        prop_assert!(sfp.program.cones.iter().all(|c| !matches!(c, ConeKind::Soc(_))));
        prop_assert_eq!(sfp.n_epigraph, 0);
    }

    #[test]
    fn greedy_stops_at_a_local_optimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = diagonal_spec(&mut r, 5, ObjectiveKind::Quadratic).unwrap();
        let p = build_diagonal(&spec).unwrap();
        let v = PhysicsHook::Diagonal(&spec).midpoint_field(&p, &InteriorPointSolver, &cfg()).unwrap();
        let dc = DescentConfig { rule: Rule::Greedy, ..DescentConfig::default() };
        let d = run(&p, &init_signs(&v, 1e-8), &InteriorPointSolver, &NoClock, &dc, &cfg()).unwrap();
        prop_assert_eq!(d.trace.termination, Termination::LocalOptimum);
        let aub = to_aub(&p).unwrap();
        for i in 0..5 {
            let mut s = d.signs.clone();
            s.flip(i);
            let alt = solve_restriction(&aub, &s, &InteriorPointSolver, &NoClock, &cfg()).unwrap();
            prop_assert!(alt.objective >= d.objective - 2e-9 * d.objective.abs().max(1.0));
        }
    }

    /// Field proposals never do worse than the incumbent, and reruns are
    /// identical.
    #[test]
    fn field_rule_is_safe_and_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = design_instance(&mut r, 4, 5).unwrap();
        let s = init_signs(&inst.point.v, 1e-8);
        let dc = DescentConfig::default();
        let d = run(&inst.problem, &s, &InteriorPointSolver, &NoClock, &dc, &cfg()).unwrap();
        for rec in &d.trace.records {
            prop_assert!(rec.objective_after <= rec.objective_before + 1e-6 * rec.objective_before.abs().max(1.0));
        }
        let again = run(&inst.problem, &s, &InteriorPointSolver, &NoClock, &dc, &cfg()).unwrap();
        prop_assert_eq!(d, again);
    }
}
