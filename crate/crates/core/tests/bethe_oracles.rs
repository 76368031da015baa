use anyon_qism::bethe::{
    match_spectrum, solve_bae, BetheRoots, BetheRootsXxx, MatchOptions, Rapidity, SolverOptions, Strategy,
};
use anyon_qism::chain::{exact_spectrum, explicit_hamiltonian, ModelSpec, Sector};
use anyon_qism::linalg::C64;
use std::f64::consts::PI;

fn finite_sorted(roots: &BetheRoots) -> Vec<f64> {
    let mut v: Vec<f64> = roots.levels()[0].iter().filter_map(Rapidity::finite).map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn one_magnon_roots_and_sentinel() {
    for (l, eta) in [(4, 1.0), (6, 0.7)] {
        for th in [0.0, 1.3, PI] {
            let model = ModelSpec::xxx_angle(l, eta, th).unwrap();
            let rep = solve_bae(&model, Sector::xxx(1), Strategy::LogNewton, &SolverOptions::default()).unwrap();
            assert_eq!(rep.solutions.len(), l);
            let mut expected: Vec<f64> = (1..l).map(|m| eta / 2.0 / (PI * m as f64 / l as f64).tan()).collect();
            expected.sort_by(f64::total_cmp);
            let mut found: Vec<f64> = rep.solutions.iter().flat_map(|s| finite_sorted(&s.roots)).collect();
            found.sort_by(f64::total_cmp);
            assert_eq!(found.len(), l - 1);
            for (a, b) in found.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            let sentinel = rep.solutions.iter().filter(|s| s.roots.levels()[0] == [Rapidity::Infinite]).count();
            assert_eq!(sentinel, 1);
            for s in &rep.solutions {
                let e = s.roots.energy().unwrap();
                let k = match s.roots.levels()[0][0] {
                    Rapidity::Infinite => 0.0,
                    Rapidity::Finite(v) => 2.0 * (eta / (2.0 * v.re)).atan(),
                };
                assert!((e.re - (2.0 * k.cos() - 2.0) / eta).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn vacuum_is_empty_and_matches() {
    let model = ModelSpec::xxx_angle(4, 1.0, 0.4).unwrap();
    let rep = solve_bae(&model, Sector::xxx(0), Strategy::Multistart, &SolverOptions::default()).unwrap();
    assert_eq!(rep.solutions.len(), 1);
    assert!(rep.solutions[0].roots.levels()[0].is_empty());
    let roots: Vec<_> = rep.solutions.iter().map(|s| s.roots.clone()).collect();
    let mr = match_spectrum(&model, Sector::xxx(0), &roots, &MatchOptions::new(model.eta)).unwrap();
    assert!(mr.all_matched());
    assert_eq!(mr.completeness_deficit, 0);
}

#[test]
fn xxx_two_magnons_reproduce_ed_energies() {
    let model = ModelSpec::xxx_angle(4, 1.0, PI / 3.0).unwrap();
    let ed = exact_spectrum(&explicit_hamiltonian(&model).unwrap(), Some(Sector::xxx(2))).unwrap();
    for strategy in [Strategy::LogNewton, Strategy::Multistart, Strategy::Homotopy] {
        let rep = solve_bae(&model, Sector::xxx(2), strategy, &SolverOptions::default()).unwrap();
        assert!(!rep.solutions.is_empty());
        for s in &rep.solutions {
            let e = s.roots.energy().unwrap();
            let gap = ed.eigenvalues.iter().map(|x| (x - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(gap < 1e-8, "{strategy:?}: {e} off by {gap}");
        }
    }
}

#[test]
fn untwisted_xxx_is_complete_up_to_two_magnons() {
    let model = ModelSpec::xxx_angle(4, 1.0, 0.0).unwrap();
    for m in 0..=2 {
        let rep = solve_bae(&model, Sector::xxx(m), Strategy::LogNewton, &SolverOptions::default()).unwrap();
        let roots: Vec<_> = rep.solutions.iter().map(|s| s.roots.clone()).collect();
        let mr = match_spectrum(&model, Sector::xxx(m), &roots, &MatchOptions::new(model.eta)).unwrap();
        assert!(mr.all_matched());
        assert_eq!(mr.matched, mr.sector_dim, "M={m}");
    }
}

#[test]
fn singular_pair_is_the_missing_singlet() {
    let model = ModelSpec::xxx_angle(4, 1.0, 0.0).unwrap();
    let i = C64::new(0.0, 0.5);
    let pair = BetheRoots::Xxx(BetheRootsXxx::from_values(&model, &[i, -i]).unwrap());
    assert!(pair.max_residual().unwrap() < 1e-14);
    let mr = match_spectrum(&model, Sector::xxx(2), std::slice::from_ref(&pair), &MatchOptions::new(model.eta)).unwrap();
    assert!(mr.all_matched(), "{:?}", mr.entries[0]);
    // odd length: the regularity condition fails
    let odd = ModelSpec::xxx_angle(5, 1.0, 0.0).unwrap();
    let pair = BetheRoots::Xxx(BetheRootsXxx::from_values(&odd, &[i, -i]).unwrap());
    assert!(pair.max_residual().unwrap() > 1.0);
}

#[test]
fn tj_root_sets_match_ed_at_random_angles() {
    let model = ModelSpec::tj_angles(3, 1.0, [0.71, -2.3, 1.9]).unwrap();
    let opts = SolverOptions::default();
    let rep = solve_bae(&model, Sector::tj(2, 1), Strategy::Multistart, &opts).unwrap();
    assert!(!rep.solutions.is_empty());
    let roots: Vec<_> = rep.solutions.iter().map(|s| s.roots.clone()).collect();
    let mr = match_spectrum(&model, Sector::tj(2, 1), &roots, &MatchOptions::new(model.eta)).unwrap();
    assert!(mr.all_matched());
    for e in &mr.entries {
        assert!(e.energy_residual < 1e-7 && e.lambda_residual < 1e-7);
    }
}

#[test]
fn phase_prefactor_depends_on_the_sector() {
    // a two-magnon solution at θ solves the equations with prefactor q, not 1
    let th = 0.9;
    let model = ModelSpec::xxx_angle(5, 1.0, th).unwrap();
    let plain = ModelSpec::xxx_angle(5, 1.0, 0.0).unwrap();
    let rep = solve_bae(&model, Sector::xxx(2), Strategy::LogNewton, &SolverOptions::default()).unwrap();
    let sol = rep.solutions.iter().find(|s| s.roots.levels()[0].iter().all(|r| !r.is_infinite())).unwrap();
    let values: Vec<C64> = sol.roots.levels()[0].iter().filter_map(Rapidity::finite).collect();
    let here = BetheRoots::Xxx(BetheRootsXxx::from_values(&model, &values).unwrap());
    let there = BetheRoots::Xxx(BetheRootsXxx::from_values(&plain, &values).unwrap());
    assert!(here.relative_residual().unwrap() < 1e-9);
    assert!(there.relative_residual().unwrap() > 1e-3);
}

#[test]
fn output_order_is_reproducible() {
    let model = ModelSpec::tj_angles(3, 1.0, [0.3, 1.1, -0.6]).unwrap();
    let opts = SolverOptions { seed: 7, ..Default::default() };
    let a = solve_bae(&model, Sector::tj(2, 1), Strategy::Multistart, &opts).unwrap();
    let b = solve_bae(&model, Sector::tj(2, 1), Strategy::Multistart, &opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
