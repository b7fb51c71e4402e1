use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use benders_bench::artifacts::strip_timing;
use benders_bench::experiment::{run_all, write_compare};
use benders_bench::{compare, exit, run_engine, verify_path, write_run, BenchError, Engine, RunSpec, RunSummary};
use benders_core::level_set::StabilisationConfig;
use benders_core::lp::backend_from_env;
use benders_core::{LpBackend, RunResult, SolverOptions};
use benders_power::vss::solve_monolithic;
use benders_power::{build_model, compute_vss, generate_synthetic, generate_toy_case, load_instance, write_instance};
use benders_power::{PowerInstance, SyntheticSpec, ToyCase, ToyParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Benders decomposition engines on power-system investment instances.
#[derive(Parser)]
#[command(name = "benders-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one engine; writes trace.csv and summary.json.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "stabilised")]
        algorithm: Engine,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run several engines, tolerances and stabilisation factors; writes
    /// compare.csv plus one run directory per successful run.
    Compare {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "standard,adaptive,stabilised")]
        algorithm: Vec<Engine>,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.2")]
        gamma: Vec<f64>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Runs to execute at the same time.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Value of the stochastic solution.
    Vss {
        instance: PathBuf,
        #[arg(long, default_value = "monolithic")]
        method: VssMethod,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[command(flatten)]
        engine: EngineArgs,
        /// Also write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated instance (JSON plus profile CSV).
    Generate {
        which: Which,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        periods: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        regions: usize,
        #[arg(long, default_value_t = 4)]
        technologies: usize,
        #[arg(long, default_value_t = 24)]
        slice_length: usize,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long, default_value_t = 3)]
        branching: usize,
        #[arg(long, default_value_t = 1)]
        uncertainties: usize,
    },
    /// Check traces for monotone bounds and level feasibility.
    Verify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct EngineArgs {
    /// Adapt the stabilisation factor from the observed improvement ratio.
    #[arg(long)]
    dynamic_gamma: bool,
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    #[arg(long, default_value_t = 0.1)]
    p_low: f64,
    #[arg(long, default_value_t = 0.9)]
    p_high: f64,
    /// Threads for subproblem solves.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 5000)]
    iter_limit: usize,
    /// Zero the timing columns so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

impl EngineArgs {
    fn spec(&self, engine: Engine, eps: f64, gamma: f64) -> RunSpec {
        RunSpec {
            engine,
            eps,
            stabilisation: StabilisationConfig {
                gamma0: gamma,
                dynamic: self.dynamic_gamma,
                omega: self.omega,
                p_low: self.p_low,
                p_high: self.p_high,
                ..StabilisationConfig::default()
            },
            iter_limit: self.iter_limit,
            threads: self.threads,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum VssMethod {
    Monolithic,
    Standard,
    Adaptive,
    Stabilised,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Which {
    CaseA,
    CaseB,
    CaseC,
    SyntheticTree,
}

fn backend() -> Result<Box<dyn LpBackend>, BenchError> {
    backend_from_env().map_err(|e| BenchError::Usage(e.to_string()))
}

fn load(path: &Path) -> Result<PowerInstance, BenchError> {
    Ok(load_instance(path)?)
}

fn summarise(name: &str, spec: &RunSpec, run: &mut RunResult, no_timing: bool) -> RunSummary {
    let mut summary = RunSummary::new(name, spec, run);
    if no_timing {
        strip_timing(&mut summary, &mut run.records);
    }
    summary
}

fn solve(instance: &Path, spec: RunSpec, no_timing: bool, out: &Path) -> anyhow::Result<()> {
    let inst = load(instance)?;
    let model = build_model(&inst).map_err(BenchError::from)?;
    let backend = backend()?;
    let mut run = run_engine(&model.problem, &spec, backend.as_ref())?;
    let summary = summarise(&inst.name, &spec, &mut run, no_timing);
    write_run(out, &summary, &run.records)?;
    println!(
        "{} {}: {:?} after {} iterations, {} exact solves, bounds [{:.6e}, {:.6e}]",
        inst.name, spec.engine, run.status, run.iterations, run.exact_evaluations, run.lower_bound, run.upper_bound
    );
    if !run.converged() {
        return Err(BenchError::NotConverged {
            engine: spec.engine.to_string(),
            iterations: run.iterations,
            gap: run.gap(),
        }
        .into());
    }
    Ok(())
}

fn compare_cmd(instance: &Path, specs: Vec<RunSpec>, no_timing: bool, jobs: usize, out: &Path) -> anyhow::Result<()> {
    let mut engines: Vec<Engine> = specs.iter().map(|s| s.engine).collect();
    engines.dedup();
    if engines.len() < 2 {
        return Err(BenchError::Usage("compare needs at least two algorithms".into()).into());
    }
    for s in &specs {
        s.validate()?;
    }
    let inst = load(instance)?;
    let model = build_model(&inst).map_err(BenchError::from)?;
    let backend = backend()?;
    let mut outcomes = run_all(&model.problem, &specs, backend.as_ref(), jobs.max(1));
    let mut failed = 0;
    for (spec, outcome) in specs.iter().zip(&mut outcomes) {
        match outcome {
            Ok(run) => {
                let summary = summarise(&inst.name, spec, run, no_timing);
                write_run(&out.join(spec.label()), &summary, &run.records)?;
            }
            Err(e) => {
                failed += 1;
                log::error!("{}: {e}", spec.label());
            }
        }
    }
    let rows = compare(&specs, &outcomes);
    write_compare(&out.join("compare.csv"), &rows)?;
    for r in &rows {
        println!(
            "{:<11} eps {:<5} gamma {:<6} {:<16} iters {:>5} evals {:>6} speed-up {}",
            r.engine,
            r.eps,
            r.gamma.map(|g| g.to_string()).unwrap_or_else(|| "-".into()),
            r.status,
            r.iterations.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            r.evaluations.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            r.speed_up.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
        );
    }
    if failed > 0 {
        return Err(BenchError::RunsFailed(failed)).context("see compare.csv");
    }
    Ok(())
}

fn vss_cmd(instance: &Path, method: VssMethod, spec: RunSpec, out: Option<&Path>) -> anyhow::Result<()> {
    spec.validate()?;
    let inst = load(instance)?;
    let backend = backend()?;
    let backend = backend.as_ref();
    let opts = SolverOptions::default();
    let report = match method {
        VssMethod::Monolithic => compute_vss(&inst, &|p| solve_monolithic(p, backend, &opts)),
        _ => compute_vss(&inst, &|p| {
            let run = run_engine(p, &spec, backend).map_err(|e| match e {
                BenchError::Power(p) => p,
                BenchError::Engine(c) => benders_power::PowerError::Solver(c),
                other => benders_power::PowerError::Data(other.to_string()),
            })?;
            if !run.converged() {
                log::warn!("{} did not converge; using its incumbent", spec.engine);
            }
            Ok((run.upper_bound, run.incumbent))
        }),
    }
    .map_err(BenchError::from)?;
    println!("stochastic optimum   {:.6e}", report.stochastic_optimum);
    println!("expected-value cost  {:.6e}", report.expected_value_optimum);
    println!("EV policy cost       {:.6e}", report.ev_policy_cost);
    println!("VSS                  {:.6e} ({:.3}%)", report.vss, report.vss_percent);
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&report)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
        }
        std::fs::write(path, text).with_context(|| path.display().to_string())?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve {
            instance,
            algorithm,
            eps,
            gamma,
            engine,
            out,
        } => solve(&instance, engine.spec(algorithm, eps, gamma), engine.no_timing, &out),
        Command::Compare {
            instance,
            algorithm,
            eps,
            gamma,
            engine,
            jobs,
            out,
        } => {
            let mut specs = Vec::new();
            for &e in &eps {
                for &a in &algorithm {
                    if a == Engine::Stabilised {
                        specs.extend(gamma.iter().map(|&g| engine.spec(a, e, g)));
                    } else {
                        specs.push(engine.spec(a, e, 0.2));
                    }
                }
            }
            compare_cmd(&instance, specs, engine.no_timing, jobs, &out)
        }
        Command::Vss {
            instance,
            method,
            eps,
            gamma,
            engine,
            out,
        } => {
            let algorithm = match method {
                VssMethod::Standard => Engine::Standard,
                VssMethod::Adaptive => Engine::Adaptive,
                _ => Engine::Stabilised,
            };
            vss_cmd(&instance, method, engine.spec(algorithm, eps, gamma), out.as_deref())
        }
        Command::Generate {
            which,
            out,
            periods,
            seed,
            regions,
            technologies,
            slice_length,
            stages,
            branching,
            uncertainties,
        } => {
            if periods == 0 {
                return Err(BenchError::Usage("periods must be positive".into()).into());
            }
            let toy = |case| {
                let params = ToyParams {
                    periods,
                    ..ToyParams::default()
                };
                generate_toy_case(case, &params)
            };
            let inst = match which {
                Which::CaseA => toy(ToyCase::A),
                Which::CaseB => toy(ToyCase::B),
                Which::CaseC => toy(ToyCase::C),
                Which::SyntheticTree => generate_synthetic(&SyntheticSpec {
                    regions,
                    technologies,
                    periods,
                    slice_length,
                    stages,
                    branching,
                    uncertainties,
                    seed,
                })
                .map_err(BenchError::from)?,
            };
            inst.validate().map_err(BenchError::from)?;
            let path = write_instance(&out, &inst).map_err(BenchError::from)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Verify { paths } => {
            let mut failures = Vec::new();
            for p in &paths {
                let report = verify_path(p)?;
                println!("{}: {} trace(s), {} row(s), {} violation(s)", p.display(), report.traces, report.rows, report.violations.len());
                failures.extend(report.violations);
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(BenchError::Verify(failures).into())
            }
        }
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    err.chain()
        .find_map(|e| e.downcast_ref::<BenchError>())
        .map(BenchError::exit_code)
        .unwrap_or(exit::OTHER)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already print their source
            let mut msg = String::new();
            for cause in e.chain() {
                let text = cause.to_string();
                if !msg.contains(&text) {
                    msg = if msg.is_empty() { text } else { format!("{msg}: {text}") };
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
