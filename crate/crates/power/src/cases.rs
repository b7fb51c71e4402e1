//! Generated instances: the three illustrative toy cases and a seeded
//! synthetic generator for scaling studies.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Economics, OperationalProfile, TechKind, TechnologyData};
use crate::error::{PowerError, Result};
use crate::model::PowerInstance;
use crate::tree::{Parameter, Realisation, TreeSpec, Uncertainty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToyCase {
    A,
    B,
    C,
}

impl std::str::FromStr for ToyCase {
    type Err = PowerError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches("case_") {
            "a" => Ok(ToyCase::A),
            "b" => Ok(ToyCase::B),
            "c" => Ok(ToyCase::C),
            other => Err(PowerError::data(format!("unknown toy case {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    /// Hourly periods in the representative day.
    pub periods: usize,
    /// Peak demand of Case A in MW.
    pub peak_demand: f64,
    /// CO2 cap as a fraction of the uncapped emissions estimate.
    pub co2_cap_fraction: f64,
    /// Investment cost of the Case C line per MW.
    pub line_cost: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        Self {
            periods: 24,
            peak_demand: 100.0,
            co2_cap_fraction: 0.9,
            line_cost: 50_000.0,
        }
    }
}

const OCGT_EMISSION: f64 = 0.5;
const YEAR_HOURS: f64 = 8760.0;

/// Demand shape over one day, between roughly 55% and 100% of the peak.
fn daily_shape(periods: usize) -> Vec<f64> {
    (0..periods)
        .map(|t| {
            let phase = 2.0 * std::f64::consts::PI * (t as f64 + 0.5) / periods as f64;
            0.775 - 0.225 * phase.cos() + 0.05 * (2.0 * phase).sin()
        })
        .collect()
}

fn toy_techs(region: &str) -> Vec<TechnologyData> {
    let mut ocgt = TechnologyData::thermal(&format!("ocgt_{region}"), region, 300_000.0, 60.0, OCGT_EMISSION, 200.0);
    ocgt.c_fix = 5_000.0;
    ocgt.ramp = 0.5;
    let mut diesel = TechnologyData::thermal(&format!("diesel_{region}"), region, 100_000.0, 120.0, 0.7, 200.0);
    diesel.c_fix = 2_000.0;
    vec![ocgt, diesel]
}

pub fn generate_toy_case(which: ToyCase, params: &ToyParams) -> PowerInstance {
    let shape = daily_shape(params.periods);
    let demand_a: Vec<f64> = shape.iter().map(|s| s * params.peak_demand).collect();
    // uncapped emissions if everything ran on the cleaner unit
    let energy: f64 = demand_a.iter().sum::<f64>() * YEAR_HOURS / params.periods as f64;
    let cap = params.co2_cap_fraction * OCGT_EMISSION * energy;

    let (regions, shares): (Vec<String>, Vec<f64>) = match which {
        ToyCase::A => (vec!["r1".into()], vec![1.0]),
        ToyCase::B | ToyCase::C => (vec!["r1".into(), "r2".into()], vec![0.6, 0.4]),
    };
    let mut technologies: Vec<TechnologyData> = regions.iter().flat_map(|r| toy_techs(r)).collect();
    if which == ToyCase::C {
        let mut line = TechnologyData::line("line_r1_r2", "r1", "r2", params.line_cost, 200.0);
        line.c_fix = 1_000.0;
        technologies.push(line);
    }
    let demand = regions
        .iter()
        .zip(&shares)
        .map(|(r, s)| (r.clone(), demand_a.iter().map(|d| d * s).collect()))
        .collect();
    let profile = OperationalProfile {
        slice: vec![0; params.periods],
        hours: vec![1.0; params.periods],
        weight: vec![YEAR_HOURS / params.periods as f64; params.periods],
        demand,
        capacity_factor: BTreeMap::new(),
    };
    let name = match which {
        ToyCase::A => "case_a",
        ToyCase::B => "case_b",
        ToyCase::C => "case_c",
    };
    PowerInstance {
        name: name.into(),
        regions,
        technologies,
        profile,
        tree: TreeSpec {
            stages: 1,
            kappa: 5.0,
            root: Realisation {
                co2_budget: cap,
                demand_scale: 1.0,
                co2_tax: 20.0,
            },
            uncertainties: Vec::new(),
        },
        economics: Economics::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub regions: usize,
    /// Non-line technologies in total, spread over the regions.
    pub technologies: usize,
    pub periods: usize,
    /// Periods per time slice.
    pub slice_length: usize,
    /// Stages including the root.
    pub stages: usize,
    /// Outcomes per uncertain parameter per stage.
    pub branching: usize,
    /// How many of (demand scale, CO2 budget, CO2 tax) are uncertain.
    pub uncertainties: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            regions: 2,
            technologies: 4,
            periods: 24,
            slice_length: 24,
            stages: 3,
            branching: 3,
            uncertainties: 1,
            seed: 0,
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, base: f64, spread: f64) -> f64 {
    base * (1.0 + spread * (2.0 * rng.gen::<f64>() - 1.0))
}

const KINDS: [(&str, TechKind); 6] = [
    ("ocgt", TechKind::Thermal),
    ("wind", TechKind::Renewable),
    ("ccgt_ccs", TechKind::ThermalCcs),
    ("battery", TechKind::Storage),
    ("diesel", TechKind::Thermal),
    ("solar", TechKind::Renewable),
];

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<PowerInstance> {
    if spec.regions == 0 || spec.technologies == 0 || spec.periods == 0 || spec.stages == 0 {
        return Err(PowerError::data("synthetic instance needs regions, technologies, periods and stages"));
    }
    if spec.uncertainties > 3 || (spec.uncertainties > 0 && spec.branching == 0) {
        return Err(PowerError::data("at most three uncertain parameters with at least one outcome"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let regions: Vec<String> = (0..spec.regions).map(|z| format!("z{z}")).collect();

    let slice_length = spec.slice_length.clamp(1, spec.periods);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut demand = BTreeMap::new();
    let mut peaks = Vec::new();
    for r in &regions {
        let peak = jitter(&mut rng, 100.0, 0.3);
        let phase = jitter(&mut rng, 1.0, 0.2);
        let series = (0..spec.periods)
            .map(|t| {
                let h = (t % 24) as f64;
                peak * (0.7 - 0.2 * (two_pi * h / 24.0 * phase).cos() + 0.05 * jitter(&mut rng, 1.0, 1.0))
            })
            .collect::<Vec<_>>();
        peaks.push(series.iter().cloned().fold(0.0, f64::max));
        demand.insert(r.clone(), series);
    }

    let mut technologies = Vec::new();
    let mut capacity_factor = BTreeMap::new();
    for k in 0..spec.technologies {
        let z = k % spec.regions;
        let (base, kind) = KINDS[(k / spec.regions) % KINDS.len()];
        let region = &regions[z];
        let name = format!("{base}_{region}_{k}");
        let x_max = 3.0 * peaks[z];
        let mut t = match kind {
            TechKind::Thermal if base == "ocgt" => {
                let mut t = TechnologyData::thermal(&name, region, jitter(&mut rng, 300_000.0, 0.2), jitter(&mut rng, 60.0, 0.2), 0.5, x_max);
                t.ramp = 0.5;
                t.x_hist = (0.3 * peaks[z]).round();
                t
            }
            TechKind::Thermal => TechnologyData::thermal(&name, region, jitter(&mut rng, 100_000.0, 0.2), jitter(&mut rng, 120.0, 0.2), 0.7, x_max),
            TechKind::ThermalCcs => {
                let mut t = TechnologyData::thermal(&name, region, jitter(&mut rng, 900_000.0, 0.2), jitter(&mut rng, 80.0, 0.2), 0.05, x_max);
                t.kind = TechKind::ThermalCcs;
                t.ramp = 0.3;
                t
            }
            TechKind::Renewable => {
                let solar = base == "solar";
                let series: Vec<f64> = (0..spec.periods)
                    .map(|t| {
                        let h = (t % 24) as f64;
                        let v = if solar {
                            0.8 * (std::f64::consts::PI * (h - 6.0) / 12.0).sin().max(0.0)
                        } else {
                            0.4 + 0.25 * (two_pi * t as f64 / 37.0).sin() + 0.15 * (2.0 * rng.gen::<f64>() - 1.0)
                        };
                        v.clamp(0.0, 1.0)
                    })
                    .collect();
                capacity_factor.insert(name.clone(), series);
                let cost = if solar { 500_000.0 } else { 1_100_000.0 };
                TechnologyData::renewable(&name, region, jitter(&mut rng, cost, 0.2), x_max)
            }
            TechKind::Storage => {
                let mut t = TechnologyData::storage(&name, region, 400_000.0, peaks[z], 0.9, 4.0);
                t.charge_cost = 1.0;
                t
            }
            TechKind::Line => unreachable!(),
        };
        t.c_fix = 0.02 * t.investment_cost(0);
        // cheaper later
        t.c_inv = (0..spec.stages).map(|s| t.c_inv[0] * 0.9f64.powi(s as i32)).collect();
        technologies.push(t);
    }
    for z in 1..spec.regions {
        let name = format!("line_{}_{}", regions[z - 1], regions[z]);
        let mut line = TechnologyData::line(&name, &regions[z - 1], &regions[z], jitter(&mut rng, 80_000.0, 0.2), 2.0 * peaks[z]);
        line.c_fix = 500.0;
        technologies.push(line);
    }

    // storage after generation, lines last, as in instance documents
    technologies.sort_by_key(|t| match t.kind {
        TechKind::Storage => 1,
        TechKind::Line => 2,
        _ => 0,
    });
    let hours_per_period = 1.0;
    let mut profile = OperationalProfile {
        slice: (0..spec.periods).map(|t| t / slice_length).collect(),
        hours: vec![hours_per_period; spec.periods],
        weight: vec![1.0; spec.periods],
        demand,
        capacity_factor,
    };
    profile.scale_to(YEAR_HOURS);

    let energy: f64 = profile
        .demand
        .values()
        .map(|d| d.iter().zip(&profile.weight).map(|(v, w)| v * w).sum::<f64>())
        .sum();
    let root = Realisation {
        co2_budget: 0.06 * energy,
        demand_scale: 1.0,
        co2_tax: 20.0,
    };
    let params = [Parameter::DemandScale, Parameter::Co2Budget, Parameter::Co2Tax];
    let mut uncertainties = Vec::new();
    for &p in &params[..spec.uncertainties] {
        let outcomes = (1..spec.stages)
            .map(|s| {
                let centre = match p {
                    Parameter::DemandScale => 1.0 + 0.1 * s as f64,
                    Parameter::Co2Budget => root.co2_budget * (1.0 - 0.15 * s as f64).max(0.1),
                    Parameter::Co2Tax => root.co2_tax * (1.0 + 0.5 * s as f64),
                };
                (0..spec.branching)
                    .map(|k| {
                        let spread = if spec.branching == 1 {
                            0.0
                        } else {
                            0.2 * (k as f64 / (spec.branching - 1) as f64 - 0.5)
                        };
                        centre * (1.0 + spread) * (1.0 + 0.02 * (2.0 * rng.gen::<f64>() - 1.0))
                    })
                    .collect()
            })
            .collect();
        uncertainties.push(Uncertainty { parameter: p, outcomes });
    }

    Ok(PowerInstance {
        name: format!(
            "synthetic_r{}_t{}_p{}_s{}_b{}_u{}_seed{}",
            spec.regions, spec.technologies, spec.periods, spec.stages, spec.branching, spec.uncertainties, spec.seed
        ),
        regions,
        technologies,
        profile,
        tree: TreeSpec {
            stages: spec.stages,
            kappa: 5.0,
            root,
            uncertainties,
        },
        economics: Economics::default(),
    })
}
