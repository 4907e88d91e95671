//! Command-line front end.
//!
//! Every subcommand starts from an optional JSON [`ExperimentConfig`] file and
//! applies flag overrides on top. Output goes to standard output unless an
//! output directory is configured, in which case it is written to
//! `<output_dir>/<subcommand>.<ext>`.
//!
//! Exit status: 0 on success, 1 for invalid input, 2 for internal failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cga::{self, RunConfig};
use crate::error::{Error, Result};
use crate::harness::{self, ExperimentConfig};
use crate::landscape::FitnessSpec;
use crate::ode::{self, integrate, LimitOptions};
use crate::pv::ProbabilityVector;

#[derive(Debug, Parser)]
#[command(name = "cga-ode", version, about = "Compact GA, its mean-field ODE and stability diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one seeded cGA trajectory and dump it as JSON lines.
    Run(Common),
    /// Export the drift field on a regular grid as CSV.
    Drift {
        #[command(flatten)]
        common: Common,
        /// Grid intervals per axis.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Integrate the limiting ODE and dump it as JSON lines.
    Ode {
        #[command(flatten)]
        common: Common,
        /// Also integrate to a limit and report it on standard error.
        #[arg(long)]
        limit: bool,
    },
    /// Stability verdict of every corner, as CSV.
    Classify(Common),
    /// Terminal-corner statistics over many runs, as JSON.
    Montecarlo(Common),
    /// Sup-distance between cGA runs and the ODE for each N, as CSV.
    Alphasweep(Common),
    /// Local maxima of the fitness function, as CSV.
    Localmaxima(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in fitness kind: binval, onemax (perturbed_onemax), linear, random_injective.
    #[arg(long)]
    spec: Option<String>,
    /// Fitness spec as a JSON file.
    #[arg(long = "spec-file", conflicts_with = "spec")]
    spec_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Step count(s) N; alpha = 1/(2N). Comma separated or repeated.
    #[arg(long = "N", value_delimiter = ',')]
    alpha_steps: Vec<u32>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    runs: Option<u32>,
    /// Time horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// ODE step h.
    #[arg(long)]
    step: Option<f64>,
    /// Perturbation for perturbed_onemax.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Weights for linear (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Vec<f64>,
    /// Seed of a random_injective landscape.
    #[arg(long = "spec-seed")]
    spec_seed: Option<u64>,
    #[arg(long = "max-iters")]
    max_iters: Option<u64>,
    #[arg(long = "record-every")]
    record_every: Option<u64>,
    /// Starting point, comma separated.
    #[arg(long, value_delimiter = ',')]
    initial: Vec<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
}

fn builtin_spec(kind: &str, n: usize, c: &Common) -> Result<FitnessSpec> {
    let spec = match kind {
        "binval" => FitnessSpec::binval(n),
        "onemax" | "perturbed_onemax" => {
            FitnessSpec::perturbed_onemax(n, c.epsilon.unwrap_or_else(|| FitnessSpec::default_epsilon(n)))
        }
        "linear" => {
            if c.weights.is_empty() {
                return Err(Error::Config("--spec linear needs --weights".into()));
            }
            FitnessSpec::linear(c.weights.clone())
        }
        "random_injective" => FitnessSpec::random_injective(n, c.spec_seed.unwrap_or(0)),
        other => {
            return Err(Error::Config(format!(
                "unknown --spec {other:?}; use binval, onemax, linear, random_injective or --spec-file"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn read_input(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn resolve_config(c: &Common) -> Result<ExperimentConfig> {
    let base: Option<ExperimentConfig> = match &c.config {
        Some(path) => Some(serde_json::from_str(&read_input(path)?)?),
        None => None,
    };
    let spec = if let Some(path) = &c.spec_file {
        Some(serde_json::from_str::<FitnessSpec>(&read_input(path)?)?)
    } else if let Some(kind) = &c.spec {
        let n = c
            .n
            .or_else(|| base.as_ref().map(|b| b.spec.n()))
            .or_else(|| (!c.weights.is_empty()).then_some(c.weights.len()))
            .ok_or_else(|| Error::Config("--spec needs --n".into()))?;
        Some(builtin_spec(kind, n, c)?)
    } else {
        None
    };
    let mut cfg = match (base, spec) {
        (Some(mut b), Some(s)) => {
            b.spec = s;
            b
        }
        (Some(b), None) => b,
        (None, Some(s)) => ExperimentConfig::new(s),
        (None, None) => {
            return Err(Error::Config("no fitness function: pass --config, --spec or --spec-file".into()))
        }
    };
    if c.n.is_some() && c.n != Some(cfg.spec.n()) {
        return Err(Error::Config(format!(
            "--n {} does not match the spec length {}",
            c.n.unwrap_or_default(),
            cfg.spec.n()
        )));
    }
    if !c.alpha_steps.is_empty() {
        cfg.n_values = c.alpha_steps.clone();
    }
    if let Some(v) = c.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = &c.out {
        cfg.output_dir = Some(v.clone());
    }
    if let Some(v) = c.runs {
        cfg.runs_per_setting = v;
    }
    if let Some(v) = c.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = c.step {
        cfg.ode_step = v;
    }
    if let Some(v) = c.max_iters {
        cfg.max_iters = Some(v);
    }
    if let Some(v) = c.record_every {
        cfg.record_every = v;
    }
    if !c.initial.is_empty() {
        cfg.initial = Some(ProbabilityVector::new(c.initial.clone())?);
    }
    if let Some(v) = c.tol {
        cfg.tolerances.limit_tol = v;
    }
    if let Some(v) = c.t_max {
        cfg.tolerances.t_max = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Write `body` to `<output_dir>/<name>` when configured, else to `stdout`.
fn emit(
    cfg: &ExperimentConfig,
    name: &str,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match &cfg.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
            body(&mut file)?;
            file.flush()?;
            writeln!(stderr, "wrote {}", path.display())?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Run(c) => {
            let cfg = resolve_config(&c)?;
            let land = cfg.landscape()?;
            let rc = RunConfig {
                alpha_steps: cfg.n_values[0],
                initial: cfg.initial.clone(),
                max_iters: cfg.max_iters,
                seed: cfg.master_seed,
                run_index: 0,
                record_every: cfg.record_every,
            };
            let traj = cga::run(&land, &rc)?;
            let prov = cfg.provenance()?;
            emit(&cfg, "run.jsonl", stdout, stderr, |w| {
                traj.write_jsonl(w, &cfg.spec, Some(&prov))
            })
        }
        Command::Drift { common, resolution } => {
            let mut cfg = resolve_config(&common)?;
            if let Some(r) = resolution {
                cfg.grid_resolution = r;
            }
            let land = cfg.landscape()?;
            let prov = cfg.provenance()?;
            emit(&cfg, "drift.csv", stdout, stderr, |w| {
                harness::write_drift_grid_csv(&land, cfg.grid_resolution, w, Some(&prov))
            })
        }
        Command::Ode { common, limit } => {
            let cfg = resolve_config(&common)?;
            let land = cfg.landscape()?;
            let x0 = cfg.initial_pv();
            let traj = integrate(&land, &x0, cfg.ode_step, cfg.horizon)?;
            let prov = cfg.provenance()?;
            emit(&cfg, "ode.jsonl", stdout, stderr, |w| {
                traj.write_jsonl(w, &cfg.spec, Some(&prov))
            })?;
            if limit {
                let opts = LimitOptions {
                    step: cfg.ode_step,
                    tol: cfg.tolerances.limit_tol,
                    t_max: cfg.tolerances.t_max,
                };
                let res = ode::find_limit(&land, &x0, &opts)?;
                serde_json::to_writer(&mut *stderr, &res)?;
                writeln!(stderr)?;
            }
            Ok(())
        }
        Command::Classify(c) => {
            let cfg = resolve_config(&c)?;
            let land = cfg.landscape()?;
            let report = harness::classify_all(&land)?;
            let prov = cfg.provenance()?;
            emit(&cfg, "classify.csv", stdout, stderr, |w| report.write_csv(w, Some(&prov)))
        }
        Command::Montecarlo(c) => {
            let cfg = resolve_config(&c)?;
            let res = harness::monte_carlo(&cfg)?;
            if !res.in_theorem_scope {
                writeln!(stderr, "warning: fitness function is not injective; results are outside theorem scope")?;
            }
            emit(&cfg, "montecarlo.json", stdout, stderr, |w| res.write_json(w))
        }
        Command::Alphasweep(c) => {
            let cfg = resolve_config(&c)?;
            let res = harness::alpha_sweep(&cfg)?;
            emit(&cfg, "alphasweep.csv", stdout, stderr, |w| res.write_csv(w))
        }
        Command::Localmaxima(c) => {
            let cfg = resolve_config(&c)?;
            let land = cfg.landscape()?;
            let prov = cfg.provenance()?;
            emit(&cfg, "localmaxima.csv", stdout, stderr, |w| {
                harness::write_local_maxima_csv(&land, w, Some(&prov))
            })
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
