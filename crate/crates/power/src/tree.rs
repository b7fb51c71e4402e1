//! Multi-horizon scenario tree: one investment node and one embedded
//! operational node per strategic node, long-term uncertainty branching
//! between stages.

use serde::{Deserialize, Serialize};

use crate::error::{PowerError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Co2Budget,
    DemandScale,
    Co2Tax,
}

/// Long-term parameter values at a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Realisation {
    /// Tonnes per year.
    pub co2_budget: f64,
    pub demand_scale: f64,
    /// Money per tonne.
    pub co2_tax: f64,
}

impl Realisation {
    pub fn get(&self, p: Parameter) -> f64 {
        match p {
            Parameter::Co2Budget => self.co2_budget,
            Parameter::DemandScale => self.demand_scale,
            Parameter::Co2Tax => self.co2_tax,
        }
    }

    pub fn set(&mut self, p: Parameter, v: f64) {
        match p {
            Parameter::Co2Budget => self.co2_budget = v,
            Parameter::DemandScale => self.demand_scale = v,
            Parameter::Co2Tax => self.co2_tax = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub parameter: Parameter,
    /// Outcomes for each stage after the root, as absolute values.
    pub outcomes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    /// Number of stages including the root.
    pub stages: usize,
    /// Years between stages.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub root: Realisation,
    #[serde(default)]
    pub uncertainties: Vec<Uncertainty>,
}

fn default_kappa() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub stage: usize,
    /// Unconditional probability.
    pub probability: f64,
    pub realisation: Realisation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiHorizonTree {
    pub kappa: f64,
    /// Breadth-first order; node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

pub fn build_tree(spec: &TreeSpec) -> Result<MultiHorizonTree> {
    if spec.stages == 0 {
        return Err(PowerError::Tree("need at least one stage".into()));
    }
    if !(spec.kappa > 0.0) {
        return Err(PowerError::Tree("stage spacing must be positive".into()));
    }
    for u in &spec.uncertainties {
        if u.outcomes.len() + 1 < spec.stages {
            return Err(PowerError::Tree(format!(
                "{:?} has outcomes for {} stages, need {}",
                u.parameter,
                u.outcomes.len(),
                spec.stages - 1
            )));
        }
        if let Some(s) = u.outcomes.iter().take(spec.stages - 1).position(Vec::is_empty) {
            return Err(PowerError::Tree(format!("{:?} has no outcomes at stage {}", u.parameter, s + 1)));
        }
    }
    let mut nodes = vec![TreeNode {
        id: 0,
        parent: None,
        stage: 0,
        probability: 1.0,
        realisation: spec.root,
    }];
    let mut frontier = vec![0];
    for stage in 1..spec.stages {
        // Cartesian product of this stage's outcomes
        let mut combos: Vec<Vec<(Parameter, f64)>> = vec![Vec::new()];
        for u in &spec.uncertainties {
            let opts = &u.outcomes[stage - 1];
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    opts.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.push((u.parameter, v));
                        c
                    })
                })
                .collect();
        }
        let share = 1.0 / combos.len() as f64;
        let mut next = Vec::new();
        for &parent in &frontier {
            for combo in &combos {
                let mut realisation = nodes[parent].realisation;
                for &(p, v) in combo {
                    realisation.set(p, v);
                }
                let id = nodes.len();
                nodes.push(TreeNode {
                    id,
                    parent: Some(parent),
                    stage,
                    probability: nodes[parent].probability * share,
                    realisation,
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(MultiHorizonTree { kappa: spec.kappa, nodes })
}

impl MultiHorizonTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn stages(&self) -> usize {
        self.nodes.iter().map(|n| n.stage + 1).max().unwrap_or(0)
    }

    pub fn stage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.stages()];
        for n in &self.nodes {
            counts[n.stage] += 1;
        }
        counts
    }

    /// Ancestors of `id` including itself, root last.
    pub fn path(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Investment nodes whose installs of a device with `lifetime` years are
    /// still in service at operational node `id`.
    pub fn alive_installs(&self, id: usize, lifetime: f64) -> Vec<usize> {
        let stage = self.nodes[id].stage;
        self.path(id)
            .into_iter()
            .filter(|&a| self.kappa * (stage - self.nodes[a].stage) as f64 <= lifetime)
            .collect()
    }

    /// `(1 + rate)^(-years from the root)`.
    pub fn discount(&self, id: usize, rate: f64) -> f64 {
        (1.0 + rate).powf(-self.kappa * self.nodes[id].stage as f64)
    }

    /// Per-stage probability-weighted mean of the realisations.
    pub fn stage_means(&self) -> Vec<Realisation> {
        let mut sums = vec![
            Realisation {
                co2_budget: 0.0,
                demand_scale: 0.0,
                co2_tax: 0.0
            };
            self.stages()
        ];
        for n in &self.nodes {
            let s = &mut sums[n.stage];
            s.co2_budget += n.probability * n.realisation.co2_budget;
            s.demand_scale += n.probability * n.realisation.demand_scale;
            s.co2_tax += n.probability * n.realisation.co2_tax;
        }
        sums
    }

    /// The chain with one node per stage carrying the stage means.
    pub fn expected_value_tree(&self) -> MultiHorizonTree {
        let nodes = self
            .stage_means()
            .into_iter()
            .enumerate()
            .map(|(stage, realisation)| TreeNode {
                id: stage,
                parent: stage.checked_sub(1),
                stage,
                probability: 1.0,
                realisation,
            })
            .collect();
        MultiHorizonTree { kappa: self.kappa, nodes }
    }

    /// True when every stage has exactly one node.
    pub fn is_deterministic(&self) -> bool {
        self.stage_counts().iter().all(|&c| c == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn root() -> Realisation {
        Realisation {
            co2_budget: 100.0,
            demand_scale: 1.0,
            co2_tax: 10.0,
        }
    }

    fn spec(n_unc: usize, outcomes: usize, stages: usize) -> TreeSpec {
        let params = [Parameter::Co2Budget, Parameter::DemandScale, Parameter::Co2Tax];
        TreeSpec {
            stages,
            kappa: 5.0,
            root: root(),
            uncertainties: params[..n_unc]
                .iter()
                .map(|&p| Uncertainty {
                    parameter: p,
                    outcomes: vec![(0..outcomes).map(|k| 1.0 + k as f64).collect(); stages - 1],
                })
                .collect(),
        }
    }

    #[test]
    fn node_counts_follow_branching() {
        assert_eq!(build_tree(&spec(1, 3, 3)).unwrap().stage_counts(), vec![1, 3, 9]);
        assert_eq!(build_tree(&spec(2, 3, 3)).unwrap().len(), 91);
        let t3 = build_tree(&spec(3, 3, 3)).unwrap();
        assert_eq!(t3.stage_counts(), vec![1, 27, 729]);
        assert_eq!(t3.len(), 757);
        let t0 = build_tree(&spec(0, 3, 3)).unwrap();
        assert_eq!(t0.stage_counts(), vec![1, 1, 1]);
        assert!(t0.is_deterministic());
    }

    #[test]
    fn stage_probabilities_sum_to_one() {
        let t = build_tree(&spec(2, 3, 3)).unwrap();
        for s in 0..3 {
            let total: f64 = t.nodes.iter().filter(|n| n.stage == s).map(|n| n.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lifetime_filter() {
        let t = build_tree(&spec(1, 2, 3)).unwrap();
        let leaf = t.len() - 1;
        assert_eq!(t.nodes[leaf].stage, 2);
        // lifetime equal to the stage spacing: root install alive one stage on only
        let alive = t.alive_installs(leaf, 5.0);
        assert_eq!(alive.len(), 2);
        assert!(!alive.contains(&0));
        assert!(t.alive_installs(1, 5.0).contains(&0));
        assert_eq!(t.alive_installs(leaf, 10.0).len(), 3);
    }

    #[test]
    fn empty_outcomes_rejected() {
        let mut s = spec(1, 3, 3);
        s.uncertainties[0].outcomes[1].clear();
        assert!(build_tree(&s).is_err());
    }

    #[test]
    fn expected_value_chain() {
        let t = build_tree(&spec(1, 3, 2)).unwrap();
        let ev = t.expected_value_tree();
        assert_eq!(ev.len(), 2);
        assert!((ev.nodes[1].realisation.co2_budget - 2.0).abs() < 1e-12);
        assert_eq!(ev.nodes[1].realisation.co2_tax, 10.0);
    }
}
