mod common;


use common::*;
use mlap_core::solver::{sample_weight, solve_singular_with_weight};
use mlap_core::{
    solve_dirichlet, solve_singular, Domain, Error, GridFunction, ProblemSpec, SolverConfig,
};
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn laplacian_of_quadratic_is_exact() {
    let g = interval(129, 1.0);
    let theta = GridFunction::sample(g, |_| 2.0);
    let r = solve_dirichlet(&theta, 2.0, &cfg()).unwrap();
    assert!(r.converged);
    assert!(max_error(&r.solution, |x| x * (1.0 - x)) <= 1e-10);
}

#[test]
fn m3_torsion_on_graded_grid() {
    let g = interval(1025, 3.0);
    let theta = GridFunction::sample(g, |_| 1.0);
    let r = solve_dirichlet(&theta, 3.0, &cfg()).unwrap();
    let err = max_error(&r.solution, |x| torsion(3.0, x));
    assert!(err <= 5e-4, "{err}");
    assert!((r.solution.sup_norm() - 0.23570).abs() < 5e-4);
    assert!(r.final_residual <= cfg().newton_tol);
}

#[test]
fn sine_eigen_identity() {
    let pi = std::f64::consts::PI;
    let mut errors = Vec::new();
    for n in [65, 129, 257] {
        let g = interval(n, 1.0);
        let theta = GridFunction::sample(g, |x| pi * pi * (pi * x).sin());
        let r = solve_dirichlet(&theta, 2.0, &cfg()).unwrap();
        errors.push(max_error(&r.solution, |x| (pi * x).sin()));
    }
    assert!(errors[2] < 2e-5);
    assert!(orders(&errors).iter().all(|&p| p > 1.9), "{errors:?}");
}

#[test]
fn radial_torsion_closed_forms() {
    for (m, dim) in [(2.0, 3), (3.0, 2), (1.5, 3)] {
        let g = ball(513, 2.0, dim);
        let theta = GridFunction::sample(g, |_| 1.0);
        let r = solve_dirichlet(&theta, m, &cfg()).unwrap();
        let err = max_error(&r.solution, |x| radial_torsion(m, dim, x));
        assert!(err < 1e-3 * radial_torsion(m, dim, 0.0), "m = {m}, N = {dim}: {err}");
    }
}

#[test]
fn manufactured_convergence_order() {
    for m in [1.5, 2.0, 3.0, 4.0] {
        let mut errors = Vec::new();
        for n in [129, 257, 513, 1025] {
            let g = interval(n, 1.0);
            let theta = GridFunction::sample(g, |x| (std::f64::consts::PI * x).sin());
            let r = solve_dirichlet(&theta, m, &cfg()).unwrap();
            errors.push(max_error(&r.solution, |x| sine_source_solution(m, x)));
        }
        let p = orders(&errors);
        assert!(p.iter().all(|&o| o >= 1.0), "m = {m}: errors {errors:?}, orders {p:?}");
    }
}

#[test]
fn homogeneity_of_degree_m_minus_one() {
    let g = interval(257, 2.0);
    for m in [1.5, 3.0] {
        let theta = GridFunction::sample(g.clone(), |x| 1.0 + x * x);
        let base = solve_dirichlet(&theta, m, &cfg()).unwrap().solution;
        for c in [0.5f64, 2.0, 10.0] {
            let scaled = theta.map(|v| c.powf(m - 1.0) * v);
            let u = solve_dirichlet(&scaled, m, &cfg()).unwrap().solution;
            let diff = u
                .values()
                .iter()
                .zip(base.values())
                .map(|(a, b)| (a - c * b).abs())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-8 * c * base.sup_norm(), "m = {m}, c = {c}: {diff}");
        }
    }
}

#[test]
fn energy_never_increases() {
    let g = interval(513, 3.0);
    for m in [1.5, 2.0, 4.0] {
        let theta = GridFunction::sample_with_delta(g.clone(), |_, d| d.powf(-0.5));
        let r = solve_dirichlet(&theta, m, &cfg()).unwrap();
        for w in r.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "m = {m}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn budget_exhaustion_reports_partial_state() {
    let g = interval(257, 3.0);
    let theta = GridFunction::sample(g, |_| 1.0);
    let tight = SolverConfig {
        max_newton_iters: 1,
        eps_schedule: vec![1e-10],
        ..SolverConfig::default()
    };
    match solve_dirichlet(&theta, 4.0, &tight) {
        Err(Error::NonConvergence { partial: Some(report), .. }) => {
            assert!(!report.converged);
            assert_eq!(report.solution.len(), 257);
        }
        other => panic!("expected NonConvergence, got {:?}", other.map(|r| r.final_residual)),
    }
}

#[test]
fn rejects_bad_inputs() {
    let g = interval(33, 1.0);
    let theta = GridFunction::sample(g.clone(), |_| 1.0);
    assert!(matches!(solve_dirichlet(&theta, 1.0, &cfg()), Err(Error::InvalidConfig(_))));
    let inf = GridFunction::sample(g, |x| if x == 0.5 { f64::INFINITY } else { 1.0 });
    assert!(solve_dirichlet(&inf, 2.0, &cfg()).is_err());
    let bad = SolverConfig {
        eps_schedule: vec![1e-2, 1e-3],
        ..SolverConfig::default()
    };
    assert!(bad.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn comparison_principle(
        a in proptest::collection::vec(0.1f64..2.0, 3),
        bump in proptest::collection::vec(0.0f64..1.0, 3),
        m in 1.5f64..4.0,
    ) {
        let g = interval(129, 2.0);
        let field = |c: &[f64], x: f64| c[0] + c[1] * x + c[2] * (5.0 * x).sin().abs();
        let lo = GridFunction::sample(g.clone(), |x| field(&a, x));
        let hi = GridFunction::sample(g.clone(), |x| field(&a, x) + field(&bump, x));
        let u = solve_dirichlet(&lo, m, &cfg()).unwrap().solution;
        let v = solve_dirichlet(&hi, m, &cfg()).unwrap().solution;
        for (p, q) in u.values().iter().zip(v.values()) {
            prop_assert!(*p <= q + 1e-10 * v.sup_norm());
        }
    }
}

#[test]
fn singular_manufactured_solution() {
    // u* = sin(πx)^{2/3} solves -u'' = K u^{-1/2} with K = (-u*'') (u*)^{1/2} ~ δ^{-1}
    let spec = ProblemSpec::new(2.0, 0.5, 1.0);
    let g = interval(2049, 3.0);
    let weight = GridFunction::sample_dirichlet(g, |x| sine_power_source(x) * sine_power_field(x).sqrt());
    let r = solve_singular_with_weight(&spec, &weight, &cfg()).unwrap();
    let err = max_error(&r.solution, sine_power_field);
    assert!(err <= 5e-3, "{err}");
}

#[test]
fn zero_singularity_reduces_to_dirichlet() {
    let spec = ProblemSpec::new(2.0, 0.0, 0.5);
    let g = interval(1025, 3.0);
    let singular = solve_singular(&spec, g.clone(), &cfg()).unwrap().solution;
    let direct = solve_dirichlet(&sample_weight(&spec, g), 2.0, &cfg()).unwrap().solution;
    let diff = singular
        .values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-9, "{diff}");
}

#[test]
fn outer_iterates_increase_and_stay_bracketed() {
    let cfg = cfg();
    for (m, p, q) in [(2.0, 0.3, 0.3), (2.0, 0.5, 0.5), (2.0, 0.5, 1.0), (3.0, 0.5, 1.0)] {
        let spec = ProblemSpec::new(m, p, q);
        let r = solve_singular(&spec, interval(1025, 3.0), &cfg).unwrap();
        assert!(r.converged);
        assert!(r.final_residual <= cfg.picard_tol);
        assert!(r.outer_steps.iter().all(|s| s.max_decrease <= cfg.picard_tol));
        let free = r.solution.grid().free_range();
        assert!(free.clone().all(|i| r.solution.values()[i] > 0.0));
        let b = r.bracket.as_ref().unwrap();
        for i in free {
            let u = r.solution.values()[i];
            assert!(b.lower.values()[i] <= u + cfg.picard_tol);
            assert!(u <= b.upper.values()[i] + cfg.picard_tol);
        }
    }
}

#[test]
fn radial_singular_solve() {
    let spec = ProblemSpec::new(2.0, 0.5, 1.0).with_domain(Domain::RadialBall { dim: 3 });
    let r = solve_singular(&spec, ball(1025, 3.0, 3), &cfg()).unwrap();
    assert!(r.converged);
    let (i, _) = r.solution.argmax();
    assert_eq!(i, 0);
}

#[test]
fn perturbed_envelope_stays_between_constant_envelopes() {
    let g = interval(513, 3.0);
    let base = ProblemSpec::new(2.0, 0.5, 1.0);
    let wavy = base.with_envelope(1.0, 2.0);
    let lo = solve_singular(&base.with_envelope(1.0, 1.0), g.clone(), &cfg()).unwrap().solution;
    let hi = solve_singular(&base.with_envelope(2.0, 2.0), g.clone(), &cfg()).unwrap().solution;
    let mid = solve_singular(&wavy, g, &cfg()).unwrap().solution;
    let tol = 1e-9;
    for i in 0..mid.len() {
        assert!(lo.values()[i] <= mid.values()[i] + tol);
        assert!(mid.values()[i] <= hi.values()[i] + tol);
    }
}
