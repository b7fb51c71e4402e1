//! Instance documents: a JSON file plus a CSV of operating periods.
//!
//! CSV columns: `period`, `slice`, `H_t`, `pi_t`, then `demand_<region>` for
//! every region and `cf_<profile>` for every capacity-factor series.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Economics, OperationalProfile, TechKind, TechnologyData};
use crate::error::{PowerError, Result};
use crate::model::PowerInstance;
use crate::tree::TreeSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub name: String,
    pub regions: Vec<String>,
    pub technologies: Vec<TechnologyData>,
    #[serde(default)]
    pub storage: Vec<TechnologyData>,
    #[serde(default)]
    pub lines: Vec<TechnologyData>,
    /// CSV path, relative to the document.
    pub profiles: String,
    pub tree: TreeSpec,
    #[serde(default)]
    pub economics: Economics,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PowerError + '_ {
    move |source| PowerError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, message: impl std::fmt::Display) -> PowerError {
    PowerError::Csv {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

pub fn parse_document(text: &str, path: &Path) -> Result<InstanceDocument> {
    serde_json::from_str(text).map_err(|e| PowerError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_instance(path: &Path) -> Result<PowerInstance> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let doc = parse_document(&text, path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let csv_path = dir.join(&doc.profiles);
    let profile = read_profile(&csv_path, &doc.regions)?;

    let check = |list: &[TechnologyData], ok: &dyn Fn(TechKind) -> bool, what: &str| {
        match list.iter().find(|t| !ok(t.kind)) {
            Some(t) => Err(PowerError::data(format!("{} has kind {:?}, not allowed in {what}", t.name, t.kind))),
            None => Ok(()),
        }
    };
    check(&doc.technologies, &|k| !matches!(k, TechKind::Storage | TechKind::Line), "technologies")?;
    check(&doc.storage, &|k| k == TechKind::Storage, "storage")?;
    check(&doc.lines, &|k| k == TechKind::Line, "lines")?;

    let mut technologies = doc.technologies;
    technologies.extend(doc.storage);
    technologies.extend(doc.lines);
    let inst = PowerInstance {
        name: doc.name,
        regions: doc.regions,
        technologies,
        profile,
        tree: doc.tree,
        economics: doc.economics,
    };
    inst.validate()?;
    Ok(inst)
}

pub fn read_profile(path: &Path, regions: &[String]) -> Result<OperationalProfile> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| col(name).ok_or_else(|| csv_err(path, format!("missing column {name}")));
    let (c_hours, c_weight) = (required("H_t")?, required("pi_t")?);
    let c_slice = col("slice");
    let mut profile = OperationalProfile {
        slice: Vec::new(),
        hours: Vec::new(),
        weight: Vec::new(),
        demand: BTreeMap::new(),
        capacity_factor: BTreeMap::new(),
    };
    let mut demand_cols = Vec::new();
    for r in regions {
        demand_cols.push((r.clone(), required(&format!("demand_{r}"))?));
        profile.demand.insert(r.clone(), Vec::new());
    }
    let cf_cols: Vec<(String, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(k, h)| h.trim().strip_prefix("cf_").map(|n| (n.to_string(), k)))
        .collect();
    for (n, _) in &cf_cols {
        profile.capacity_factor.insert(n.clone(), Vec::new());
    }
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let num = |k: usize| -> Result<f64> {
            let raw = record.get(k).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|_| {
                csv_err(path, format!("row {}: column {} is not a number: {raw:?}", line + 2, &headers[k]))
            })
        };
        profile.hours.push(num(c_hours)?);
        profile.weight.push(num(c_weight)?);
        profile.slice.push(match c_slice {
            Some(k) => num(k)? as usize,
            None => 0,
        });
        for (r, k) in &demand_cols {
            let v = num(*k)?;
            profile.demand.get_mut(r).expect("region series").push(v);
        }
        for (n, k) in &cf_cols {
            let v = num(*k)?;
            profile.capacity_factor.get_mut(n).expect("cf series").push(v);
        }
    }
    profile.validate()?;
    Ok(profile)
}

pub fn write_profile(path: &Path, profile: &OperationalProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["period".to_string(), "slice".into(), "H_t".into(), "pi_t".into()];
    header.extend(profile.demand.keys().map(|r| format!("demand_{r}")));
    header.extend(profile.capacity_factor.keys().map(|n| format!("cf_{n}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for t in 0..profile.periods() {
        let mut row = vec![
            t.to_string(),
            profile.slice[t].to_string(),
            profile.hours[t].to_string(),
            profile.weight[t].to_string(),
        ];
        row.extend(profile.demand.values().map(|s| s[t].to_string()));
        row.extend(profile.capacity_factor.values().map(|s| s[t].to_string()));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Writes `<dir>/<name>.json` and `<dir>/<name>_profiles.csv`; returns the
/// JSON path.
pub fn write_instance(dir: &Path, inst: &PowerInstance) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_name = format!("{}_profiles.csv", inst.name);
    write_profile(&dir.join(&csv_name), &inst.profile)?;
    let split = |pred: &dyn Fn(TechKind) -> bool| -> Vec<TechnologyData> {
        inst.technologies.iter().filter(|t| pred(t.kind)).cloned().collect()
    };
    let doc = InstanceDocument {
        name: inst.name.clone(),
        regions: inst.regions.clone(),
        technologies: split(&|k| !matches!(k, TechKind::Storage | TechKind::Line)),
        storage: split(&|k| k == TechKind::Storage),
        lines: split(&|k| k == TechKind::Line),
        profiles: csv_name,
        tree: inst.tree.clone(),
        economics: inst.economics.clone(),
    };
    let path = dir.join(format!("{}.json", inst.name));
    let text = serde_json::to_string_pretty(&doc).expect("instance documents serialise");
    std::fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}
