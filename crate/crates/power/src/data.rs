//! Technology, grid and operational-profile data.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{PowerError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechKind {
    Thermal,
    ThermalCcs,
    Renewable,
    Storage,
    Line,
}

impl TechKind {
    pub fn is_thermal(self) -> bool {
        matches!(self, TechKind::Thermal | TechKind::ThermalCcs)
    }
}

/// One investable device. Units: MW, MWh, money per MW or per MWh, years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologyData {
    pub name: String,
    pub kind: TechKind,
    /// Region the device sits in; unused for lines.
    #[serde(default)]
    pub region: Option<String>,
    /// Investment cost per MW by stage; the last entry repeats for later stages.
    pub c_inv: Vec<f64>,
    /// Fixed cost per MW and year.
    #[serde(default)]
    pub c_fix: f64,
    #[serde(default)]
    pub x_hist: f64,
    pub x_max: f64,
    pub lifetime: f64,
    #[serde(default)]
    pub c_op: f64,
    /// Tonnes per MWh.
    #[serde(default)]
    pub emission: f64,
    /// Fraction of capacity per period.
    #[serde(default = "one")]
    pub ramp: f64,
    /// Capacity-factor column; defaults to the technology name.
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default = "one")]
    pub efficiency: f64,
    /// Energy capacity per MW of power capacity (hours).
    #[serde(default = "one")]
    pub power_ratio: f64,
    #[serde(default)]
    pub charge_cost: f64,
    #[serde(default)]
    pub from: Option<String>,
    #[serde(default)]
    pub to: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl TechnologyData {
    fn base(name: &str, kind: TechKind, c_inv: f64, x_max: f64, lifetime: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            region: None,
            c_inv: vec![c_inv],
            c_fix: 0.0,
            x_hist: 0.0,
            x_max,
            lifetime,
            c_op: 0.0,
            emission: 0.0,
            ramp: 1.0,
            profile: None,
            efficiency: 1.0,
            power_ratio: 1.0,
            charge_cost: 0.0,
            from: None,
            to: None,
        }
    }

    pub fn thermal(name: &str, region: &str, c_inv: f64, c_op: f64, emission: f64, x_max: f64) -> Self {
        Self {
            region: Some(region.into()),
            c_op,
            emission,
            ..Self::base(name, TechKind::Thermal, c_inv, x_max, 30.0)
        }
    }

    pub fn renewable(name: &str, region: &str, c_inv: f64, x_max: f64) -> Self {
        Self {
            region: Some(region.into()),
            ..Self::base(name, TechKind::Renewable, c_inv, x_max, 25.0)
        }
    }

    pub fn storage(name: &str, region: &str, c_inv: f64, x_max: f64, efficiency: f64, power_ratio: f64) -> Self {
        Self {
            region: Some(region.into()),
            efficiency,
            power_ratio,
            ..Self::base(name, TechKind::Storage, c_inv, x_max, 15.0)
        }
    }

    pub fn line(name: &str, from: &str, to: &str, c_inv: f64, x_max: f64) -> Self {
        Self {
            from: Some(from.into()),
            to: Some(to.into()),
            ..Self::base(name, TechKind::Line, c_inv, x_max, 40.0)
        }
    }

    pub fn investment_cost(&self, stage: usize) -> f64 {
        let k = stage.min(self.c_inv.len().saturating_sub(1));
        self.c_inv.get(k).copied().unwrap_or(0.0)
    }

    pub fn profile_column(&self) -> &str {
        self.profile.as_deref().unwrap_or(&self.name)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(PowerError::data(format!("technology {}: {what}", self.name)));
        if !(0.0 <= self.x_hist && self.x_hist <= self.x_max) {
            return bad("need 0 <= x_hist <= x_max");
        }
        if !(self.lifetime >= 1.0) {
            return bad("lifetime must be at least one year");
        }
        if self.c_inv.is_empty() || self.c_inv.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return bad("investment costs must be nonnegative and at least one must be given");
        }
        if self.c_fix < 0.0 || self.c_op < 0.0 || self.charge_cost < 0.0 {
            return bad("costs must be nonnegative");
        }
        if self.emission < 0.0 {
            return bad("emission factor must be nonnegative");
        }
        if self.kind.is_thermal() && !(self.ramp > 0.0 && self.ramp <= 1.0) {
            return bad("ramp rate must lie in (0, 1]");
        }
        if self.kind == TechKind::Storage {
            if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
                return bad("storage efficiency must lie in (0, 1]");
            }
            if !(self.power_ratio > 0.0) {
                return bad("storage power ratio must be positive");
            }
        }
        match self.kind {
            TechKind::Line if self.from.is_none() || self.to.is_none() => bad("line needs both endpoints"),
            TechKind::Line if self.from == self.to => bad("line endpoints must differ"),
            TechKind::Line => Ok(()),
            _ if self.region.is_none() => bad("missing region"),
            _ => Ok(()),
        }
    }
}

/// Regions and line incidence. A line's flow is positive from `from` to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTopology {
    pub regions: Vec<String>,
    /// Lines (by index into the technology list) flowing into each region.
    pub lines_in: Vec<Vec<usize>>,
    pub lines_out: Vec<Vec<usize>>,
    /// Non-line technologies located in each region.
    pub techs: Vec<Vec<usize>>,
}

impl GridTopology {
    pub fn build(regions: &[String], techs: &[TechnologyData]) -> Result<Self> {
        let index: HashMap<&str, usize> = regions.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
        if index.len() != regions.len() {
            return Err(PowerError::data("duplicate region names"));
        }
        let lookup = |name: &Option<String>, owner: &str| {
            name.as_deref()
                .and_then(|r| index.get(r).copied())
                .ok_or_else(|| PowerError::data(format!("{owner}: unknown region {name:?}")))
        };
        let n = regions.len();
        let mut topo = GridTopology {
            regions: regions.to_vec(),
            lines_in: vec![Vec::new(); n],
            lines_out: vec![Vec::new(); n],
            techs: vec![Vec::new(); n],
        };
        for (k, t) in techs.iter().enumerate() {
            if t.kind == TechKind::Line {
                topo.lines_out[lookup(&t.from, &t.name)?].push(k);
                topo.lines_in[lookup(&t.to, &t.name)?].push(k);
            } else {
                topo.techs[lookup(&t.region, &t.name)?].push(k);
            }
        }
        Ok(topo)
    }

    pub fn region_index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == name)
    }
}

/// Representative operating periods grouped into time slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationalProfile {
    /// Slice id of every period; periods of one slice are contiguous.
    pub slice: Vec<usize>,
    /// Period length in hours.
    pub hours: Vec<f64>,
    /// Number of times each period repeats per year.
    pub weight: Vec<f64>,
    /// Demand in MW by region name.
    pub demand: BTreeMap<String, Vec<f64>>,
    /// Capacity factors in [0, 1] by profile name.
    pub capacity_factor: BTreeMap<String, Vec<f64>>,
}

impl OperationalProfile {
    pub fn periods(&self) -> usize {
        self.hours.len()
    }

    /// Hours represented per year, `sum_t weight_t hours_t`.
    pub fn represented_hours(&self) -> f64 {
        self.hours.iter().zip(&self.weight).map(|(h, w)| h * w).sum()
    }

    /// Rescales the weights so the profile represents `hours` per year.
    pub fn scale_to(&mut self, hours: f64) {
        let f = hours / self.represented_hours();
        for w in &mut self.weight {
            *w *= f;
        }
    }

    /// Start index of the slice containing each period.
    pub fn slice_bounds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for t in 1..=self.periods() {
            if t == self.periods() || self.slice[t] != self.slice[start] {
                out.push((start, t));
                start = t;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.periods();
        if n == 0 {
            return Err(PowerError::data("profile has no periods"));
        }
        if self.slice.len() != n || self.weight.len() != n {
            return Err(PowerError::data("profile columns have different lengths"));
        }
        if self.hours.iter().chain(&self.weight).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(PowerError::data("period hours and weights must be positive"));
        }
        let mut seen = std::collections::HashSet::new();
        for (s, e) in self.slice_bounds() {
            if !seen.insert(self.slice[s]) {
                return Err(PowerError::data(format!("slice {} is not contiguous", self.slice[s])));
            }
            debug_assert!(e > s);
        }
        for (name, series) in &self.demand {
            if series.len() != n || series.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(PowerError::data(format!("demand series {name} is malformed")));
            }
        }
        for (name, series) in &self.capacity_factor {
            if series.len() != n || series.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(PowerError::data(format!(
                    "capacity factors of {name} must have one value in [0, 1] per period"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Economics {
    #[serde(default = "default_rate")]
    pub discount_rate: f64,
    /// Money per MWh of unserved load; defaults to ten times the dearest
    /// thermal operating cost.
    #[serde(default)]
    pub shed_penalty: Option<f64>,
}

fn default_rate() -> f64 {
    0.05
}

impl Default for Economics {
    fn default() -> Self {
        Self {
            discount_rate: default_rate(),
            shed_penalty: None,
        }
    }
}

pub const MIN_SHED_PENALTY: f64 = 1000.0;

impl Economics {
    pub fn shed_penalty_for(&self, techs: &[TechnologyData]) -> f64 {
        self.shed_penalty.unwrap_or_else(|| {
            let dearest = techs
                .iter()
                .filter(|t| t.kind.is_thermal())
                .map(|t| t.c_op)
                .fold(0.0, f64::max);
            (10.0 * dearest).max(MIN_SHED_PENALTY)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> OperationalProfile {
        OperationalProfile {
            slice: vec![0, 0, 1, 1, 1],
            hours: vec![1.0; 5],
            weight: vec![2.0; 5],
            demand: BTreeMap::from([("a".to_string(), vec![1.0; 5])]),
            capacity_factor: BTreeMap::new(),
        }
    }

    #[test]
    fn slices_and_scaling() {
        let mut p = profile();
        assert_eq!(p.slice_bounds(), vec![(0, 2), (2, 5)]);
        assert_eq!(p.represented_hours(), 10.0);
        p.scale_to(8760.0);
        assert!((p.represented_hours() - 8760.0).abs() < 1e-9);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn split_slice_rejected() {
        let mut p = profile();
        p.slice = vec![0, 1, 0, 0, 0];
        assert!(p.validate().is_err());
    }

    #[test]
    fn technology_checks() {
        assert!(TechnologyData::thermal("g", "a", 1.0, 1.0, 0.5, 10.0).validate().is_ok());
        let mut t = TechnologyData::thermal("g", "a", 1.0, 1.0, 0.5, 10.0);
        t.x_hist = 11.0;
        assert!(t.validate().is_err());
        let l = TechnologyData::line("l", "a", "a", 1.0, 1.0);
        assert!(l.validate().is_err());
        assert_eq!(t.investment_cost(5), 1.0);
    }

    #[test]
    fn topology_incidence() {
        let regions = vec!["a".to_string(), "b".to_string()];
        let techs = vec![
            TechnologyData::thermal("g", "a", 1.0, 1.0, 0.5, 10.0),
            TechnologyData::line("l", "a", "b", 1.0, 1.0),
        ];
        let topo = GridTopology::build(&regions, &techs).unwrap();
        assert_eq!(topo.lines_out[0], vec![1]);
        assert_eq!(topo.lines_in[1], vec![1]);
        assert_eq!(topo.techs[0], vec![0]);
        let bad = vec![TechnologyData::thermal("g", "zzz", 1.0, 1.0, 0.5, 10.0)];
        assert!(GridTopology::build(&regions, &bad).is_err());
    }
}
