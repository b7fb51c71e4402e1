#![allow(dead_code)]

use benders_core::lp::RowSense;
use benders_core::{DecisionNode, MasterBlock, SparseMatrix, StructuredProblem, SubproblemTemplate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small capacity-expansion problem with shared capacities and one fixed
/// demand column per node.
///
/// Node view: `(cap_0, .., cap_{T-1}, -demand_i)`.
/// Operation per period: `gen_t <= avail_t cap_t`, `-sum gen - shed <= -d_i shape_p`.
/// Cost rows: operating cost plus shedding, and emissions.
pub fn random_problem(seed: u64, techs: usize, periods: usize, nodes: usize) -> StructuredProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y_dim = periods * (techs + 1);
    let gen = |p: usize, t: usize| p * (techs + 1) + t;
    let shed = |p: usize| p * (techs + 1) + techs;
    let rows = periods * (techs + 1);
    let mut a = SparseMatrix::new(rows, y_dim);
    let mut b = SparseMatrix::new(rows, techs + 1);
    let mut senses = Vec::new();
    let mut r = 0;
    for p in 0..periods {
        for t in 0..techs {
            a.push(r, gen(p, t), 1.0);
            b.push(r, t, rng.gen_range(0.3..1.0));
            senses.push(RowSense::Le);
            r += 1;
        }
        for t in 0..techs {
            a.push(r, gen(p, t), -1.0);
        }
        a.push(r, shed(p), -1.0);
        b.push(r, techs, rng.gen_range(0.6..1.0));
        senses.push(RowSense::Le);
        r += 1;
    }
    let mut cost_map = SparseMatrix::new(2, y_dim);
    let op: Vec<f64> = (0..techs).map(|_| rng.gen_range(1.0..10.0)).collect();
    let em: Vec<f64> = (0..techs).map(|_| rng.gen_range(0.0..1.0)).collect();
    for p in 0..periods {
        for t in 0..techs {
            cost_map.push(0, gen(p, t), op[t]);
            if em[t] > 0.0 {
                cost_map.push(1, gen(p, t), em[t]);
            }
        }
        cost_map.push(0, shed(p), 50.0);
    }
    let template = SubproblemTemplate {
        a,
        b,
        cost_map,
        senses,
        y_lower: vec![0.0; y_dim],
        y_upper: vec![f64::INFINITY; y_dim],
    };

    let x_dim = techs + nodes;
    let mut objective = vec![0.0; x_dim];
    let mut x_lower = vec![0.0; x_dim];
    let mut x_upper = vec![10.0; x_dim];
    for t in 0..techs {
        objective[t] = rng.gen_range(1.0..20.0);
    }
    let mut out = Vec::new();
    for i in 0..nodes {
        let d = rng.gen_range(2.0..8.0);
        x_lower[techs + i] = -d;
        x_upper[techs + i] = -d;
        let mut picks: Vec<usize> = (0..techs).collect();
        picks.push(techs + i);
        out.push(DecisionNode {
            id: i,
            pi: 1.0 / nodes as f64,
            cost: vec![1.0, rng.gen_range(0.0..5.0)],
            selector: SparseMatrix::selection(&picks, x_dim),
        });
    }
    StructuredProblem {
        master: MasterBlock {
            objective,
            constraints: SparseMatrix::new(0, x_dim),
            senses: vec![],
            rhs: vec![],
            x_lower,
            x_upper,
            names: vec![],
        },
        template,
        nodes: out,
    }
}

/// A point of the node-view domain: capacities in the master box and the
/// node's demand column.
pub fn random_view(rng: &mut ChaCha8Rng, problem: &StructuredProblem, node: usize) -> Vec<f64> {
    let techs = problem.template.x_dim() - 1;
    let m = &problem.master;
    let mut v: Vec<f64> = (0..techs).map(|t| rng.gen_range(m.x_lower[t]..=m.x_upper[t])).collect();
    v.push(m.x_lower[techs + node]);
    v
}
