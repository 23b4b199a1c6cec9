use proptest::prelude::*;
use twocenter::miniball::smallest_enclosing_ball;
use twocenter::solver::{
    brute_force_decide, decide, optimize_reference, solve, Algorithm, Outcome, SolverConfig,
};
use twocenter::Point3;

fn cloud(max: usize) -> impl Strategy<Value = Vec<Point3>> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 1..max).prop_map(|v| {
        v.into_iter()
            .map(|(x, y, z)| Point3::new(x, y, z))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn solutions_cover_and_match_the_reference(pts in cloud(10), seed in 0u64..100) {
        let want = optimize_reference(&pts, &Default::default()).unwrap().radius;
        let r0 = smallest_enclosing_ball(&pts).unwrap().radius;
        prop_assert!(want <= r0 + 1e-12);
        let cfg = SolverConfig { algorithm: Algorithm::Cubic, seed, rho: 2, ..Default::default() };
        let twocenter::solver::SolveResult::Exact(s) = solve(&pts, &cfg).unwrap() else { panic!() };
        prop_assert!((s.radius - want).abs() <= 1e-9 * want.max(1.0));
        for (i, p) in pts.iter().enumerate() {
            let c = if s.partition[i] { s.c2 } else { s.c1 };
            prop_assert!(c.dist(*p) <= s.radius + 1e-9 * s.radius.max(1.0));
        }
    }

    #[test]
    fn decisions_agree_and_are_monotone(pts in cloud(9), f in 0.5..1.5f64) {
        let opt = optimize_reference(&pts, &Default::default()).unwrap().radius;
        let r = (opt * f).max(1e-6);
        let (d, _) = decide(&pts, r, &SolverConfig::default()).unwrap();
        prop_assert_eq!(d.outcome, brute_force_decide(&pts, r, &Default::default()).outcome);
        if d.outcome != Outcome::NotCoverable {
            let (d2, _) = decide(&pts, r * 1.01, &SolverConfig::default()).unwrap();
            prop_assert_eq!(d2.outcome, Outcome::StrictlyCoverable);
        }
    }
}
