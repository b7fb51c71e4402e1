mod common;

use benders_core::lp::HighsBackend;
use benders_core::{
    assemble_monolithic, run_adaptive, run_standard, EngineConfig, LpBackend, RunResult, SolverOptions,
    StabilisationConfig, StandardConfig, StructuredProblem,
};
use common::random_problem;

fn monolithic(p: &StructuredProblem) -> f64 {
    let mono = assemble_monolithic(p, benders_core::problem::DEFAULT_MONOLITHIC_CAP).unwrap();
    let out = HighsBackend.solve(&mono.lp, &SolverOptions::default()).unwrap();
    assert!(out.is_optimal());
    out.objective
}

fn close(run: &RunResult, exact: f64, eps_percent: f64) {
    assert!(run.converged(), "{} stopped with {:?}", run.engine, run.status);
    let tol = eps_percent / 100.0 * exact.abs().max(1.0) + 1e-6;
    assert!(run.lower_bound <= exact + tol, "{}: L {} above {exact}", run.engine, run.lower_bound);
    assert!(run.upper_bound >= exact - tol, "{}: U {} below {exact}", run.engine, run.upper_bound);
    assert!((run.upper_bound - exact).abs() <= tol, "{}: U {} vs {exact}", run.engine, run.upper_bound);
}

fn monotone(run: &RunResult) {
    for w in run.records.windows(2) {
        assert!(w[1].l_star >= w[0].l_star, "{}: L* fell", run.engine);
        assert!(w[1].u_star <= w[0].u_star, "{}: U* rose", run.engine);
    }
}

#[test]
fn engines_reach_the_monolithic_optimum() {
    for seed in 0..4 {
        let p = random_problem(seed, 3, 3, 1 + seed as usize * 2);
        let exact = monolithic(&p);
        let std = run_standard(&p, &StandardConfig::default(), &HighsBackend).unwrap();
        let ada = run_adaptive(&p, &EngineConfig::default(), &HighsBackend).unwrap();
        let stab = run_adaptive(&p, &EngineConfig::stabilised(StabilisationConfig::fixed(0.2)), &HighsBackend).unwrap();
        let dynamic = run_adaptive(&p, &EngineConfig::stabilised(StabilisationConfig::dynamic(0.5)), &HighsBackend).unwrap();
        for run in [&std, &ada, &stab, &dynamic] {
            close(run, exact, 0.1);
            monotone(run);
        }
    }
}

#[test]
fn single_node_adaptive_follows_standard() {
    let p = random_problem(6, 3, 4, 1);
    let std = run_standard(&p, &StandardConfig::default(), &HighsBackend).unwrap();
    let ada = run_adaptive(&p, &EngineConfig::default(), &HighsBackend).unwrap();
    assert_eq!(std.iterations, ada.iterations);
    for (a, b) in std.records.iter().zip(&ada.records) {
        assert!((a.l_star - b.l_star).abs() <= 1e-6 * (1.0 + a.l_star.abs()));
    }
}

#[test]
fn stabilised_queries_respect_the_level() {
    let p = random_problem(3, 4, 3, 4);
    let run = run_adaptive(&p, &EngineConfig::stabilised(StabilisationConfig::fixed(0.3)), &HighsBackend).unwrap();
    for r in &run.records {
        if let (Some(level), Some(t)) = (r.level_value, r.target) {
            assert!(level <= t + 1e-6 * t.abs().max(1.0), "level {level} above target {t}");
        }
    }
}

#[test]
fn adaptive_solves_fewer_subproblems_than_standard() {
    let p = random_problem(12, 3, 3, 6);
    let std = run_standard(&p, &StandardConfig::default(), &HighsBackend).unwrap();
    let ada = run_adaptive(&p, &EngineConfig::default(), &HighsBackend).unwrap();
    assert!(ada.exact_evaluations < std.exact_evaluations);
}
