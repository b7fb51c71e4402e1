//! Engine runs and multi-engine comparisons.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use benders_core::level_set::StabilisationConfig;
use benders_core::{run_adaptive, run_standard, EngineConfig, LpBackend, RunResult, StandardConfig, StructuredProblem};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Standard,
    Adaptive,
    Stabilised,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Standard, Engine::Adaptive, Engine::Stabilised];
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Standard => "standard",
            Engine::Adaptive => "adaptive",
            Engine::Stabilised => "stabilised",
        })
    }
}

impl FromStr for Engine {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Engine::Standard),
            "adaptive" => Ok(Engine::Adaptive),
            "stabilised" | "stabilized" => Ok(Engine::Stabilised),
            other => Err(BenchError::Usage(format!(
                "unknown algorithm {other:?}; expected standard, adaptive or stabilised"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub engine: Engine,
    /// Percent.
    pub eps: f64,
    /// Used by the stabilised engine only.
    pub stabilisation: StabilisationConfig,
    pub iter_limit: usize,
    pub threads: usize,
}

impl RunSpec {
    pub fn new(engine: Engine, eps: f64) -> Self {
        Self {
            engine,
            eps,
            stabilisation: StabilisationConfig::default(),
            iter_limit: 5000,
            threads: 1,
        }
    }

    pub fn stabilised(eps: f64, stabilisation: StabilisationConfig) -> Self {
        Self {
            stabilisation,
            ..Self::new(Engine::Stabilised, eps)
        }
    }

    pub fn stabilisation_config(&self) -> Option<StabilisationConfig> {
        (self.engine == Engine::Stabilised).then(|| self.stabilisation.clone())
    }

    /// Directory-safe name, unique within a comparison.
    pub fn label(&self) -> String {
        let mut s = format!("{}_eps{}", self.engine, self.eps);
        if let Some(c) = self.stabilisation_config() {
            s.push_str(&format!("_gamma{}", c.gamma0));
            if c.dynamic {
                s.push_str("_dynamic");
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(BenchError::Usage(format!("eps must be positive, got {}", self.eps)));
        }
        if self.iter_limit == 0 {
            return Err(BenchError::Usage("iteration limit must be at least 1".into()));
        }
        if self.engine == Engine::Stabilised {
            self.stabilisation.validate().map_err(|e| BenchError::Usage(e.to_string()))?;
        }
        Ok(())
    }
}

pub fn run_engine(problem: &StructuredProblem, spec: &RunSpec, backend: &dyn LpBackend) -> Result<RunResult> {
    spec.validate()?;
    let threads = spec.threads.max(1);
    let run = match spec.engine {
        Engine::Standard => {
            let cfg = StandardConfig {
                eps: spec.eps,
                iter_limit: spec.iter_limit,
                threads,
                ..StandardConfig::default()
            };
            run_standard(problem, &cfg, backend)?
        }
        Engine::Adaptive | Engine::Stabilised => {
            let cfg = EngineConfig {
                eps: spec.eps,
                stabilisation: spec.stabilisation_config(),
                iter_limit: spec.iter_limit,
                threads,
                ..EngineConfig::default()
            };
            run_adaptive(problem, &cfg, backend)?
        }
    };
    Ok(run)
}

/// Runs every spec, `jobs` at a time; results keep the order of `specs`.
pub fn run_all(
    problem: &StructuredProblem,
    specs: &[RunSpec],
    backend: &dyn LpBackend,
    jobs: usize,
) -> Vec<Result<RunResult>> {
    if jobs <= 1 || specs.len() <= 1 {
        return specs.iter().map(|s| run_engine(problem, s, backend)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunResult>>>> = specs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(specs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= specs.len() {
                    break;
                }
                let out = run_engine(problem, &specs[k], backend);
                *slots[k].lock().expect("result slot") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("every spec ran"))
        .collect()
}

/// One line of `compare.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub engine: String,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub dynamic: Option<bool>,
    pub status: String,
    pub iterations: Option<usize>,
    pub evaluations: Option<usize>,
    pub time_s: Option<f64>,
    /// Standard time over this run's time at the same eps.
    pub speed_up: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub error: Option<String>,
}

impl CompareRow {
    fn new(spec: &RunSpec, outcome: &Result<RunResult>) -> Self {
        let stab = spec.stabilisation_config();
        let mut row = CompareRow {
            engine: spec.engine.to_string(),
            eps: spec.eps,
            gamma: stab.as_ref().map(|s| s.gamma0),
            dynamic: stab.as_ref().map(|s| s.dynamic),
            status: "failed".into(),
            iterations: None,
            evaluations: None,
            time_s: None,
            speed_up: None,
            lower_bound: None,
            upper_bound: None,
            error: None,
        };
        match outcome {
            Ok(run) => {
                row.status = serde_json::to_value(run.status)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default();
                row.iterations = Some(run.iterations);
                row.evaluations = Some(run.exact_evaluations);
                row.time_s = Some(run.wall_time_s);
                row.lower_bound = Some(run.lower_bound);
                row.upper_bound = Some(run.upper_bound);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

/// Builds the comparison table; failed runs appear as rows with an error.
pub fn compare(specs: &[RunSpec], outcomes: &[Result<RunResult>]) -> Vec<CompareRow> {
    let mut rows: Vec<CompareRow> = specs.iter().zip(outcomes).map(|(s, o)| CompareRow::new(s, o)).collect();
    let baselines: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.engine == "standard")
        .filter_map(|r| r.time_s.map(|t| (r.eps, t)))
        .collect();
    for row in &mut rows {
        let base = baselines.iter().find(|(eps, _)| *eps == row.eps).map(|b| b.1);
        row.speed_up = match (base, row.time_s) {
            (Some(b), Some(t)) if t > 0.0 && b > 0.0 => Some(b / t),
            _ => None,
        };
    }
    rows
}

pub fn write_compare(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| BenchError::artifact(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::artifact(path, e.error()))?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(BenchError::io(dir))?;
    }
    std::fs::write(path, bytes).map_err(BenchError::io(path))
}
