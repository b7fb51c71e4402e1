#![allow(dead_code)]

use std::collections::BTreeMap;

use benders_core::lp::SolverOptions;
use benders_core::HighsBackend;
use benders_power::tree::Realisation;
use benders_power::{Economics, OperationalProfile, PowerInstance, TechnologyData, TreeSpec};

/// One region, one-hour periods with unit weight, single stage, no tax.
pub fn single_region(demand: Vec<f64>, technologies: Vec<TechnologyData>, co2_budget: f64) -> PowerInstance {
    let n = demand.len();
    let mut series = BTreeMap::new();
    series.insert("r".to_string(), demand);
    PowerInstance {
        name: "single".into(),
        regions: vec!["r".into()],
        technologies,
        profile: OperationalProfile {
            slice: vec![0; n],
            hours: vec![1.0; n],
            weight: vec![1.0; n],
            demand: series,
            capacity_factor: BTreeMap::new(),
        },
        tree: TreeSpec {
            stages: 1,
            kappa: 5.0,
            root: Realisation {
                co2_budget,
                demand_scale: 1.0,
                co2_tax: 0.0,
            },
            uncertainties: Vec::new(),
        },
        economics: Economics {
            discount_rate: 0.05,
            shed_penalty: Some(1000.0),
        },
    }
}

/// Thermal unit that already exists at full size and cannot be extended.
pub fn existing_thermal(name: &str, capacity: f64, c_op: f64, emission: f64) -> TechnologyData {
    let mut t = TechnologyData::thermal(name, "r", 1.0e6, c_op, emission, capacity);
    t.x_hist = capacity;
    t
}

pub fn backend() -> HighsBackend {
    HighsBackend
}

pub fn opts() -> SolverOptions {
    SolverOptions::default()
}
