use benders_power::tree::{Parameter, Realisation, Uncertainty};
use benders_power::{build_tree, TreeSpec};
use proptest::prelude::*;

fn spec(stages: usize, branching: usize, n_unc: usize) -> TreeSpec {
    let params = [Parameter::Co2Budget, Parameter::DemandScale, Parameter::Co2Tax];
    TreeSpec {
        stages,
        kappa: 5.0,
        root: Realisation {
            co2_budget: 10.0,
            demand_scale: 1.0,
            co2_tax: 5.0,
        },
        uncertainties: params[..n_unc]
            .iter()
            .map(|&p| Uncertainty {
                parameter: p,
                outcomes: vec![(0..branching).map(|k| 1.0 + k as f64).collect(); stages - 1],
            })
            .collect(),
    }
}

proptest! {
    #[test]
    fn tree_shape_and_probabilities(stages in 1usize..4, branching in 1usize..4, n_unc in 0usize..3) {
        let tree = build_tree(&spec(stages, branching, n_unc)).unwrap();
        let per_stage = branching.pow(n_unc as u32);
        let counts = tree.stage_counts();
        for (s, &c) in counts.iter().enumerate() {
            prop_assert_eq!(c, per_stage.pow(s as u32));
            let mass: f64 = tree.nodes.iter().filter(|n| n.stage == s).map(|n| n.probability).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
        }
        for n in &tree.nodes {
            if let Some(p) = n.parent {
                prop_assert_eq!(tree.nodes[p].stage + 1, n.stage);
            }
        }
    }

    #[test]
    fn expected_value_tree_keeps_stage_means(stages in 2usize..4, branching in 1usize..4, n_unc in 1usize..3) {
        let tree = build_tree(&spec(stages, branching, n_unc)).unwrap();
        let ev = tree.expected_value_tree();
        prop_assert!(ev.is_deterministic());
        for (s, mean) in tree.stage_means().iter().enumerate() {
            prop_assert_eq!(ev.nodes[s].realisation, *mean);
        }
    }
}
