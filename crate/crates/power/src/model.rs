//! Builds the structured investment-planning problem: the capacity-expansion
//! master over the scenario tree and one operational template shared by
//! every operational node.

use std::collections::HashSet;

use benders_core::lp::RowSense;
use benders_core::{DecisionNode, MasterBlock, SparseMatrix, StructuredProblem, SubproblemTemplate};
use serde::{Deserialize, Serialize};

use crate::data::{Economics, GridTopology, OperationalProfile, TechKind, TechnologyData};
use crate::error::{PowerError, Result};
use crate::tree::{build_tree, MultiHorizonTree, TreeSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerInstance {
    pub name: String,
    pub regions: Vec<String>,
    pub technologies: Vec<TechnologyData>,
    pub profile: OperationalProfile,
    pub tree: TreeSpec,
    #[serde(default)]
    pub economics: Economics,
}

impl PowerInstance {
    pub fn validate(&self) -> Result<GridTopology> {
        let mut names = HashSet::new();
        for t in &self.technologies {
            t.validate()?;
            if !names.insert(t.name.as_str()) {
                return Err(PowerError::data(format!("duplicate technology {}", t.name)));
            }
            if t.kind == TechKind::Renewable && !self.profile.capacity_factor.contains_key(t.profile_column()) {
                return Err(PowerError::data(format!(
                    "renewable {} has no capacity-factor series {}",
                    t.name,
                    t.profile_column()
                )));
            }
            if t.lifetime < self.tree.kappa {
                log::warn!(
                    "{} lives {} years, less than the {} years between stages",
                    t.name,
                    t.lifetime,
                    self.tree.kappa
                );
            }
        }
        self.profile.validate()?;
        for r in &self.regions {
            if !self.profile.demand.contains_key(r) {
                return Err(PowerError::data(format!("no demand series for region {r}")));
            }
        }
        if !(self.economics.discount_rate > -1.0) {
            return Err(PowerError::data("discount rate must exceed -1"));
        }
        if let Some(p) = self.economics.shed_penalty {
            if !(p > 0.0) {
                return Err(PowerError::data("shed penalty must be positive"));
            }
        }
        for n in &build_tree(&self.tree)?.nodes {
            let r = n.realisation;
            if !(r.co2_budget >= 0.0 && r.demand_scale >= 0.0 && r.co2_tax >= 0.0) {
                return Err(PowerError::Tree(format!("node {} has a negative realisation", n.id)));
            }
        }
        GridTopology::build(&self.regions, &self.technologies)
    }

    /// Multiplies every cost coefficient by `factor`.
    pub fn scale_costs(&mut self, factor: f64) {
        for t in &mut self.technologies {
            t.c_inv.iter_mut().for_each(|c| *c *= factor);
            t.c_fix *= factor;
            t.c_op *= factor;
            t.charge_cost *= factor;
        }
        let shed = self.economics.shed_penalty_for(&self.technologies);
        self.economics.shed_penalty = Some(shed * factor);
        self.tree.root.co2_tax *= factor;
        for u in &mut self.tree.uncertainties {
            if u.parameter == crate::tree::Parameter::Co2Tax {
                u.outcomes.iter_mut().flatten().for_each(|v| *v *= factor);
            }
        }
    }
}

/// Column positions in the master vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterLayout {
    pub techs: usize,
    pub nodes: usize,
}

impl MasterLayout {
    pub fn dim(&self) -> usize {
        2 * self.techs * self.nodes + 2 * self.nodes
    }

    /// Capacity of technology `p` installed at investment node `i`.
    pub fn inst(&self, p: usize, i: usize) -> usize {
        p * self.nodes + i
    }

    /// Capacity of technology `p` available at operational node `i`.
    pub fn acc(&self, p: usize, i: usize) -> usize {
        (self.techs + p) * self.nodes + i
    }

    /// Negated demand scale at node `i`.
    pub fn dneg(&self, i: usize) -> usize {
        2 * self.techs * self.nodes + i
    }

    pub fn co2(&self, i: usize) -> usize {
        2 * self.techs * self.nodes + self.nodes + i
    }
}

/// Operational variable positions; one block per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationLayout {
    pub thermals: Vec<usize>,
    pub lines: Vec<usize>,
    pub storages: Vec<usize>,
    pub regions: usize,
    pub periods: usize,
}

impl OperationLayout {
    fn new(inst: &PowerInstance) -> Self {
        let of = |pred: &dyn Fn(TechKind) -> bool| {
            inst.technologies
                .iter()
                .enumerate()
                .filter(|(_, t)| pred(t.kind))
                .map(|(k, _)| k)
                .collect::<Vec<_>>()
        };
        Self {
            thermals: of(&|k| k.is_thermal()),
            lines: of(&|k| k == TechKind::Line),
            storages: of(&|k| k == TechKind::Storage),
            regions: inst.regions.len(),
            periods: inst.profile.periods(),
        }
    }

    pub fn block(&self) -> usize {
        self.thermals.len() + self.lines.len() + 3 * self.storages.len() + 2 * self.regions
    }

    pub fn y_dim(&self) -> usize {
        self.block() * self.periods
    }

    pub fn generation(&self, g: usize, t: usize) -> usize {
        t * self.block() + g
    }

    pub fn flow(&self, l: usize, t: usize) -> usize {
        t * self.block() + self.thermals.len() + l
    }

    pub fn charge(&self, s: usize, t: usize) -> usize {
        t * self.block() + self.thermals.len() + self.lines.len() + s
    }

    pub fn discharge(&self, s: usize, t: usize) -> usize {
        self.charge(s, t) + self.storages.len()
    }

    pub fn level(&self, s: usize, t: usize) -> usize {
        self.charge(s, t) + 2 * self.storages.len()
    }

    pub fn shed(&self, z: usize, t: usize) -> usize {
        t * self.block() + self.thermals.len() + self.lines.len() + 3 * self.storages.len() + z
    }

    pub fn spill(&self, z: usize, t: usize) -> usize {
        self.shed(z, t) + self.regions
    }
}

/// Node-view layout: one capacity per technology, then negated demand scale
/// and CO2 budget.
pub fn view_dim(techs: usize) -> usize {
    techs + 2
}

#[derive(Debug, Clone)]
pub struct PowerModel {
    pub problem: StructuredProblem,
    pub tree: MultiHorizonTree,
    pub layout: MasterLayout,
    pub operations: OperationLayout,
    pub topology: GridTopology,
}

pub fn build_model(inst: &PowerInstance) -> Result<PowerModel> {
    let topology = inst.validate()?;
    let tree = build_tree(&inst.tree)?;
    let template = build_subproblem_template(inst, &topology)?;
    let (master, nodes, layout) = build_master(inst, &tree);
    let problem = StructuredProblem { master, template, nodes };
    let report = problem.validate();
    if !report.is_empty() {
        return Err(PowerError::Solver(benders_core::Error::Invalid(report)));
    }
    Ok(PowerModel {
        problem,
        tree,
        layout,
        operations: OperationLayout::new(inst),
        topology,
    })
}

pub fn build_master(inst: &PowerInstance, tree: &MultiHorizonTree) -> (MasterBlock, Vec<DecisionNode>, MasterLayout) {
    let techs = &inst.technologies;
    let layout = MasterLayout {
        techs: techs.len(),
        nodes: tree.len(),
    };
    let n = layout.dim();
    let kappa = tree.kappa;
    let rate = inst.economics.discount_rate;
    let mut objective = vec![0.0; n];
    let mut x_lower = vec![0.0; n];
    let mut x_upper = vec![0.0; n];
    let mut names = vec![String::new(); n];
    let mut constraints = SparseMatrix::new(0, n);
    let mut rhs = Vec::new();

    for (p, t) in techs.iter().enumerate() {
        for node in &tree.nodes {
            let i = node.id;
            let weight = tree.discount(i, rate) * node.probability;
            let inst_col = layout.inst(p, i);
            objective[inst_col] = weight * t.investment_cost(node.stage);
            x_upper[inst_col] = t.x_max;
            names[inst_col] = format!("inst[{},{i}]", t.name);

            let acc = layout.acc(p, i);
            objective[acc] = kappa * weight * t.c_fix;
            x_lower[acc] = t.x_hist;
            x_upper[acc] = t.x_max;
            names[acc] = format!("acc[{},{i}]", t.name);

            let row = rhs.len();
            constraints.rows += 1;
            constraints.push(row, acc, 1.0);
            for a in tree.alive_installs(i, t.lifetime) {
                constraints.push(row, layout.inst(p, a), -1.0);
            }
            rhs.push(t.x_hist);
        }
    }
    let mut nodes = Vec::with_capacity(tree.len());
    for node in &tree.nodes {
        let i = node.id;
        let r = node.realisation;
        let (d, e) = (layout.dneg(i), layout.co2(i));
        x_lower[d] = -r.demand_scale;
        x_upper[d] = -r.demand_scale;
        names[d] = format!("dneg[{i}]");
        x_lower[e] = r.co2_budget;
        x_upper[e] = r.co2_budget;
        names[e] = format!("co2[{i}]");

        let mut picks: Vec<usize> = (0..techs.len()).map(|p| layout.acc(p, i)).collect();
        picks.push(d);
        picks.push(e);
        nodes.push(DecisionNode {
            id: i,
            pi: node.probability,
            cost: vec![kappa, kappa * r.co2_tax],
            selector: SparseMatrix::selection(&picks, n),
        });
    }
    let senses = vec![RowSense::Eq; rhs.len()];
    let master = MasterBlock {
        objective,
        constraints,
        senses,
        rhs,
        x_lower,
        x_upper,
        names,
    };
    (master, nodes, layout)
}

/// Operating problem for one year: dispatch, flows, storage and shedding per
/// period. The cost map has two rows: operating cost without carbon tax, and
/// emissions in tonnes.
pub fn build_subproblem_template(inst: &PowerInstance, topo: &GridTopology) -> Result<SubproblemTemplate> {
    let ops = OperationLayout::new(inst);
    let techs = &inst.technologies;
    let prof = &inst.profile;
    let shed_cost = inst.economics.shed_penalty_for(techs);
    let view = view_dim(techs.len());
    let (dneg, co2) = (techs.len(), techs.len() + 1);

    let y_dim = ops.y_dim();
    let mut a = SparseMatrix::new(0, y_dim);
    let mut b = SparseMatrix::new(0, view);
    let mut senses = Vec::new();
    let mut y_lower = vec![0.0; y_dim];
    let y_upper = vec![f64::INFINITY; y_dim];
    let mut cost_map = SparseMatrix::new(2, y_dim);

    let mut row = |a_entries: &[(usize, f64)], b_entries: &[(usize, f64)], sense: RowSense| {
        let r = senses.len();
        a.rows += 1;
        b.rows += 1;
        for &(c, v) in a_entries {
            a.push(r, c, v);
        }
        for &(c, v) in b_entries {
            b.push(r, c, v);
        }
        senses.push(sense);
    };

    let starts: HashSet<usize> = prof.slice_bounds().iter().map(|&(s, _)| s).collect();
    let next_in_slice: Vec<usize> = {
        let mut next = vec![0; prof.periods()];
        for (s, e) in prof.slice_bounds() {
            for t in s..e {
                next[t] = if t + 1 == e { s } else { t + 1 };
            }
        }
        next
    };

    let mut emissions = Vec::new();
    for t in 0..prof.periods() {
        let w = prof.weight[t] * prof.hours[t];
        for (g, &p) in ops.thermals.iter().enumerate() {
            let tech = &techs[p];
            let col = ops.generation(g, t);
            cost_map.push(0, col, w * tech.c_op);
            cost_map.push(1, col, w * tech.emission);
            row(&[(col, 1.0)], &[(p, 1.0)], RowSense::Le);
            if !starts.contains(&t) {
                let prev = ops.generation(g, t - 1);
                row(&[(col, 1.0), (prev, -1.0)], &[(p, tech.ramp)], RowSense::Le);
                row(&[(prev, 1.0), (col, -1.0)], &[(p, tech.ramp)], RowSense::Le);
            }
            if tech.emission > 0.0 {
                emissions.push((col, w * tech.emission));
            }
        }
        for (l, &p) in ops.lines.iter().enumerate() {
            let col = ops.flow(l, t);
            y_lower[col] = f64::NEG_INFINITY;
            row(&[(col, 1.0)], &[(p, 1.0)], RowSense::Le);
            row(&[(col, -1.0)], &[(p, 1.0)], RowSense::Le);
        }
        for (s, &p) in ops.storages.iter().enumerate() {
            let tech = &techs[p];
            let (ch, dis, q) = (ops.charge(s, t), ops.discharge(s, t), ops.level(s, t));
            cost_map.push(0, ch, w * tech.charge_cost);
            row(&[(ch, 1.0)], &[(p, 1.0)], RowSense::Le);
            row(&[(dis, 1.0)], &[(p, 1.0)], RowSense::Le);
            row(&[(q, 1.0)], &[(p, tech.power_ratio)], RowSense::Le);
            // q[next] = q[t] + H (eta ch - dis), wrapping inside the slice
            let h = prof.hours[t];
            let q_next = ops.level(s, next_in_slice[t]);
            let mut entries = vec![(q, -1.0), (ch, -h * tech.efficiency), (dis, h)];
            if q_next == q {
                entries[0].1 = 0.0;
            } else {
                entries.push((q_next, 1.0));
            }
            entries.retain(|e| e.1 != 0.0);
            row(&entries, &[], RowSense::Eq);
        }
        for (z, region) in topo.regions.iter().enumerate() {
            let shed = ops.shed(z, t);
            cost_map.push(0, shed, w * shed_cost);
            let mut lhs = vec![(shed, 1.0), (ops.spill(z, t), -1.0)];
            let mut rhs = vec![(dneg, -prof.demand[region][t])];
            for &p in &topo.techs[z] {
                let tech = &techs[p];
                match tech.kind {
                    TechKind::Thermal | TechKind::ThermalCcs => {
                        let g = ops.thermals.iter().position(|&k| k == p).expect("thermal index");
                        lhs.push((ops.generation(g, t), 1.0));
                    }
                    TechKind::Storage => {
                        let s = ops.storages.iter().position(|&k| k == p).expect("storage index");
                        lhs.push((ops.discharge(s, t), 1.0));
                        lhs.push((ops.charge(s, t), -1.0));
                    }
                    TechKind::Renewable => {
                        let cf = prof.capacity_factor[tech.profile_column()][t];
                        rhs.push((p, -cf));
                    }
                    TechKind::Line => unreachable!("lines are not located in a region"),
                }
            }
            for &p in &topo.lines_in[z] {
                let l = ops.lines.iter().position(|&k| k == p).expect("line index");
                lhs.push((ops.flow(l, t), 1.0));
            }
            for &p in &topo.lines_out[z] {
                let l = ops.lines.iter().position(|&k| k == p).expect("line index");
                lhs.push((ops.flow(l, t), -1.0));
            }
            row(&lhs, &rhs, RowSense::Eq);
        }
    }
    row(&emissions, &[(co2, 1.0)], RowSense::Le);

    Ok(SubproblemTemplate {
        a,
        b,
        cost_map,
        senses,
        y_lower,
        y_upper,
    })
}

/// Fixes the installs at the root investment node to `values` (one per
/// technology).
pub fn fix_root_installs(problem: &mut StructuredProblem, layout: &MasterLayout, values: &[f64]) {
    for (p, &v) in values.iter().enumerate() {
        let c = layout.inst(p, 0);
        let v = v.clamp(problem.master.x_lower[c], problem.master.x_upper[c]);
        problem.master.x_lower[c] = v;
        problem.master.x_upper[c] = v;
    }
}

pub fn root_installs(x: &[f64], layout: &MasterLayout) -> Vec<f64> {
    (0..layout.techs).map(|p| x[layout.inst(p, 0)]).collect()
}
