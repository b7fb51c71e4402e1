mod common;

use benders_core::lp::HighsBackend;
use benders_core::oracles::{seed, OracleCache, SolvedPoint, SolvedPointStore};
use benders_core::subproblem::SubproblemSolver;
use benders_core::{SolverOptions, StructuredProblem};
use common::{random_problem, random_view};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn filled_store(p: &StructuredProblem, points: usize, rng: &mut ChaCha8Rng) -> SolvedPointStore {
    let opts = SolverOptions::default();
    let solver = SubproblemSolver::new(&p.template);
    let mut store = seed(p, &HighsBackend, &opts).unwrap();
    for _ in 0..points {
        let i = rng.gen_range(0..p.node_count());
        let x = random_view(rng, p, i);
        let c = p.nodes[i].cost.clone();
        let s = solver.evaluate(&x, &c, &HighsBackend, &opts).unwrap();
        store.insert(SolvedPoint::from_exact(x, c, s));
    }
    store
}

#[test]
fn exact_value_lies_between_the_oracles() {
    let opts = SolverOptions::default();
    for seed_no in 0..3 {
        let p = random_problem(seed_no, 3, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed_no);
        let store = filled_store(&p, 15, &mut rng);
        let solver = SubproblemSolver::new(&p.template);
        for _ in 0..40 {
            let i = rng.gen_range(0..p.node_count());
            let x = random_view(&mut rng, &p, i);
            let c = &p.nodes[i].cost;
            let exact = solver.evaluate(&x, c, &HighsBackend, &opts).unwrap().theta;
            let a = store.query(&x, c, &HighsBackend, &opts).unwrap();
            let tol = 1e-6 * (1.0 + exact.abs());
            assert!(a.theta_lo <= exact + tol, "lower {} above exact {exact}", a.theta_lo);
            assert!(a.theta_hi >= exact - tol, "upper {} below exact {exact}", a.theta_hi);
        }
    }
}

#[test]
fn stored_points_are_answered_exactly() {
    let opts = SolverOptions::default();
    let p = random_problem(3, 3, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let store = filled_store(&p, 8, &mut rng);
    for pt in store.points() {
        let a = store.query(&pt.x, &pt.c, &HighsBackend, &opts).unwrap();
        assert!(a.gap() <= 1e-6 * (1.0 + pt.theta.abs()), "gap {}", a.gap());
        assert!((a.theta_lo - pt.theta).abs() <= 1e-6 * (1.0 + pt.theta.abs()));
    }
}

#[test]
fn more_points_never_loosen_the_bounds() {
    let opts = SolverOptions::default();
    let p = random_problem(8, 3, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let queries: Vec<(usize, Vec<f64>)> = (0..10)
        .map(|_| {
            let i = rng.gen_range(0..p.node_count());
            (i, random_view(&mut rng, &p, i))
        })
        .collect();
    let solver = SubproblemSolver::new(&p.template);
    let mut store = seed(&p, &HighsBackend, &opts).unwrap();
    let mut last: Vec<(f64, f64)> = queries
        .iter()
        .map(|(i, x)| {
            let a = store.query(x, &p.nodes[*i].cost, &HighsBackend, &opts).unwrap();
            (a.theta_lo, a.theta_hi)
        })
        .collect();
    for _ in 0..10 {
        let i = rng.gen_range(0..p.node_count());
        let x = random_view(&mut rng, &p, i);
        let c = p.nodes[i].cost.clone();
        let s = solver.evaluate(&x, &c, &HighsBackend, &opts).unwrap();
        store.insert(SolvedPoint::from_exact(x, c, s));
        for ((i, x), prev) in queries.iter().zip(last.iter_mut()) {
            let a = store.query(x, &p.nodes[*i].cost, &HighsBackend, &opts).unwrap();
            let tol = 1e-7 * (1.0 + a.theta_hi.abs());
            assert!(a.theta_lo >= prev.0 - tol);
            assert!(a.theta_hi <= prev.1 + tol);
            *prev = (a.theta_lo, a.theta_hi);
        }
    }
}

#[test]
fn refreshed_cache_matches_a_fresh_query() {
    let opts = SolverOptions::default();
    let p = random_problem(21, 3, 3, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut store = filled_store(&p, 3, &mut rng);
    let x = random_view(&mut rng, &p, 1);
    let c = p.nodes[1].cost.clone();
    let mut cache = OracleCache::new(&store, x.clone(), c.clone(), &HighsBackend, &opts).unwrap();
    let solver = SubproblemSolver::new(&p.template);
    for _ in 0..8 {
        let i = rng.gen_range(0..p.node_count());
        let y = random_view(&mut rng, &p, i);
        let cy = p.nodes[i].cost.clone();
        let s = solver.evaluate(&y, &cy, &HighsBackend, &opts).unwrap();
        store.insert(SolvedPoint::from_exact(y, cy, s));
        cache.refresh(&store, &HighsBackend, &opts).unwrap();
        let memo = cache.answer();
        let fresh = store.query(&x, &c, &HighsBackend, &opts).unwrap();
        let tol = 1e-7 * (1.0 + fresh.theta_hi.abs());
        assert!((memo.theta_lo - fresh.theta_lo).abs() <= tol);
        assert!((memo.theta_hi - fresh.theta_hi).abs() <= tol);
    }
}

#[test]
fn queries_below_the_floor_are_rejected() {
    let opts = SolverOptions::default();
    let p = random_problem(1, 2, 2, 2);
    let store = seed(&p, &HighsBackend, &opts).unwrap();
    let mut x = store.x_floor().to_vec();
    x[0] -= 1.0;
    assert!(store.query(&x, &p.nodes[0].cost, &HighsBackend, &opts).is_err());
    let low_cost: Vec<f64> = store.c_floor().iter().map(|c| c - 1.0).collect();
    assert!(store.query(store.x_floor(), &low_cost, &HighsBackend, &opts).is_err());
}

#[test]
fn checkpoint_round_trip() {
    let p = random_problem(4, 2, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let store = filled_store(&p, 4, &mut rng);
    let text = store.to_checkpoint().unwrap();
    let back = SolvedPointStore::from_checkpoint(&text).unwrap();
    assert_eq!(back.len(), store.len());
    assert_eq!(back.x_floor(), store.x_floor());
    assert!(SolvedPointStore::from_checkpoint("{\"format\":\"other\"}").is_err());
}
