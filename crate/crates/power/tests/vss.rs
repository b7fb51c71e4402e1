mod common;

use benders_power::vss::{compute_vss, solve_monolithic};
use benders_power::{generate_synthetic, generate_toy_case, SyntheticSpec, ToyCase, ToyParams};
use common::*;

fn small_stochastic() -> benders_power::PowerInstance {
    generate_synthetic(&SyntheticSpec {
        periods: 6,
        stages: 2,
        branching: 3,
        uncertainties: 2,
        seed: 3,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

#[test]
fn deterministic_instance_has_no_value_of_stochastic_solution() {
    let inst = generate_toy_case(ToyCase::A, &ToyParams::default());
    let (b, o) = (backend(), opts());
    let report = compute_vss(&inst, &|p| solve_monolithic(p, &b, &o)).unwrap();
    assert_eq!(report.vss, 0.0);
    assert_eq!(report.vss_percent, 0.0);
}

#[test]
fn stochastic_solution_is_never_worse_than_the_expected_value_plan() {
    let (b, o) = (backend(), opts());
    let report = compute_vss(&small_stochastic(), &|p| solve_monolithic(p, &b, &o)).unwrap();
    assert!(report.vss >= -1e-6 * report.stochastic_optimum.abs(), "{report:?}");
    assert_eq!(report.ev_root_installs.len(), small_stochastic().technologies.len());
}

#[test]
fn value_scales_with_costs() {
    let (b, o) = (backend(), opts());
    let solve = |p: &benders_core::StructuredProblem| solve_monolithic(p, &b, &o);
    let base = compute_vss(&small_stochastic(), &solve).unwrap();
    let mut doubled = small_stochastic();
    doubled.scale_costs(2.0);
    let scaled = compute_vss(&doubled, &solve).unwrap();
    let tol = 1e-6 * scaled.stochastic_optimum.abs();
    assert!((scaled.stochastic_optimum - 2.0 * base.stochastic_optimum).abs() <= tol);
    assert!((scaled.vss - 2.0 * base.vss).abs() <= tol, "{} vs {}", scaled.vss, base.vss);
}
