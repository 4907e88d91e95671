//! Campaign runners and report writers.
//!
//! Runs are dispatched in parallel with one RNG stream per run (see
//! [`rng_for_run`](crate::cga::rng_for_run)); results are collected in run
//! order, so parallelism never changes any output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cga::{self, RunConfig, StochasticTrajectory};
use crate::drift::drift;
use crate::error::{Error, Result};
use crate::landscape::{FitnessSpec, Landscape, Solution, DEFAULT_CAP, MAX_CAP};
use crate::ode::{self, classify_corner, integrate, sup_distance, Verdict};
use crate::provenance::Provenance;
use crate::pv::ProbabilityVector;

fn default_runs() -> u32 {
    100
}
fn default_horizon() -> f64 {
    5.0
}
fn default_step() -> f64 {
    ode::DEFAULT_STEP
}
fn default_record_every() -> u64 {
    1
}
fn default_resolution() -> usize {
    10
}
fn default_cap() -> usize {
    DEFAULT_CAP
}
fn default_n_values() -> Vec<u32> {
    vec![64]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// `find_limit` stopping threshold on `max_i |f_i|`.
    pub limit_tol: f64,
    pub t_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            limit_tol: ode::DEFAULT_LIMIT_TOL,
            t_max: ode::DEFAULT_T_MAX,
        }
    }
}

/// Everything that determines a campaign's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: FitnessSpec,
    #[serde(rename = "N_values", default = "default_n_values")]
    pub n_values: Vec<u32>,
    #[serde(default = "default_runs")]
    pub runs_per_setting: u32,
    #[serde(rename = "T_horizon", default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_step")]
    pub ode_step: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Starting point for runs and ODE solutions; the centre when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<ProbabilityVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u64>,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    /// Points per axis minus one for drift grid exports.
    #[serde(default = "default_resolution")]
    pub grid_resolution: usize,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
}

impl ExperimentConfig {
    pub fn new(spec: FitnessSpec) -> Self {
        ExperimentConfig {
            spec,
            n_values: default_n_values(),
            runs_per_setting: default_runs(),
            horizon: default_horizon(),
            master_seed: 0,
            output_dir: None,
            ode_step: default_step(),
            tolerances: Tolerances::default(),
            initial: None,
            max_iters: None,
            record_every: default_record_every(),
            grid_resolution: default_resolution(),
            enumeration_cap: default_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::Config("N_values must be non-empty with every N >= 1".into()));
        }
        if self.runs_per_setting == 0 {
            return Err(Error::Config("runs_per_setting must be at least 1".into()));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::Config(format!("T_horizon must be non-negative, got {}", self.horizon)));
        }
        if !(self.ode_step.is_finite() && self.ode_step > 0.0) {
            return Err(Error::Config(format!("ode_step must be positive, got {}", self.ode_step)));
        }
        if !(self.tolerances.limit_tol > 0.0 && self.tolerances.t_max >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if self.enumeration_cap == 0 || self.enumeration_cap > MAX_CAP {
            return Err(Error::Config(format!(
                "enumeration_cap must be in 1..={MAX_CAP}"
            )));
        }
        if let Some(initial) = &self.initial {
            if initial.len() != self.spec.n() {
                return Err(Error::Dimension {
                    expected: self.spec.n(),
                    actual: initial.len(),
                });
            }
        }
        Ok(())
    }

    pub fn landscape(&self) -> Result<Landscape> {
        Landscape::with_cap(self.spec.clone(), self.enumeration_cap)
    }

    pub fn initial_pv(&self) -> ProbabilityVector {
        self.initial
            .clone()
            .unwrap_or_else(|| ProbabilityVector::center(self.spec.n()))
    }

    /// Provenance over the configuration with `output_dir` left out.
    pub fn provenance(&self) -> Result<Provenance> {
        let mut hashed = self.clone();
        hashed.output_dir = None;
        Provenance::for_config(&hashed, self.master_seed)
    }

    fn run_config(&self, setting: usize, run: u32, alpha_steps: u32) -> RunConfig {
        RunConfig {
            alpha_steps,
            initial: self.initial.clone(),
            max_iters: self.max_iters,
            seed: self.master_seed,
            run_index: ((setting as u64) << 32) | u64::from(run),
            record_every: self.record_every,
        }
    }
}

/// Median, 90th percentile and maximum of a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Quantiles {
            median: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
            max: *sorted.last().expect("non-empty"),
        })
    }
}

/// Statistics for one value of `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingRecord {
    #[serde(rename = "N")]
    pub alpha_steps: u32,
    pub alpha: f64,
    pub runs: u32,
    /// Terminated runs per terminal corner.
    pub convergence_counts: BTreeMap<Solution, u32>,
    pub non_terminated: u32,
    pub mean_iterations: f64,
    /// Terminated runs whose corner is not a local maximum.
    pub outside_local_maxima: u32,
    /// Sup-distance to the ODE solution over `[0, T_horizon]`, when every run covers it.
    pub sup_distance: Option<Quantiles>,
}

impl SettingRecord {
    pub fn terminated(&self) -> u32 {
        self.convergence_counts.values().sum()
    }

    /// Share of terminated runs that ended at `corner`.
    pub fn fraction_at(&self, corner: &Solution) -> f64 {
        let t = self.terminated();
        if t == 0 {
            return 0.0;
        }
        f64::from(self.convergence_counts.get(corner).copied().unwrap_or(0)) / f64::from(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub provenance: Provenance,
    pub spec: FitnessSpec,
    /// False for non-injective fitness functions.
    pub in_theorem_scope: bool,
    pub local_maxima: Vec<Solution>,
    pub settings: Vec<SettingRecord>,
}

impl CampaignResult {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

fn run_batch(
    land: &Landscape,
    cfg: &ExperimentConfig,
    setting: usize,
    alpha_steps: u32,
    max_iters: Option<u64>,
) -> Result<Vec<StochasticTrajectory>> {
    (0..cfg.runs_per_setting)
        .into_par_iter()
        .map(|r| {
            let mut rc = cfg.run_config(setting, r, alpha_steps);
            if max_iters.is_some() {
                rc.max_iters = max_iters;
            }
            cga::run(land, &rc)
        })
        .collect()
}

/// Seeded cGA runs for every `N`, tallied by terminal corner.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let land = cfg.landscape()?;
    let maxima = land.enumerate_local_maxima();
    let x0 = cfg.initial_pv();
    let ode = integrate(&land, &x0, cfg.ode_step, cfg.horizon)?;

    let mut settings = Vec::with_capacity(cfg.n_values.len());
    for (s, &alpha_steps) in cfg.n_values.iter().enumerate() {
        let runs = run_batch(&land, cfg, s, alpha_steps, None)?;
        let mut counts = BTreeMap::new();
        let mut non_terminated = 0;
        let mut outside = 0;
        let mut total_iters = 0u64;
        for t in &runs {
            total_iters += t.iterations;
            match t.terminal_corner() {
                Some(c) => {
                    if !maxima.contains(&c) {
                        outside += 1;
                    }
                    *counts.entry(c).or_insert(0) += 1;
                }
                None => non_terminated += 1,
            }
        }
        let distances: Vec<f64> = runs
            .par_iter()
            .map(|t| sup_distance(t.interpolate(), &ode, cfg.horizon))
            .collect::<Result<_>>()
            .unwrap_or_default();
        settings.push(SettingRecord {
            alpha_steps,
            alpha: cga::alpha(alpha_steps),
            runs: cfg.runs_per_setting,
            convergence_counts: counts,
            non_terminated,
            mean_iterations: total_iters as f64 / f64::from(cfg.runs_per_setting),
            outside_local_maxima: outside,
            sup_distance: Quantiles::of(&distances),
        });
    }
    Ok(CampaignResult {
        provenance: cfg.provenance()?,
        spec: cfg.spec.clone(),
        in_theorem_scope: land.is_injective(),
        local_maxima: maxima.maxima,
        settings,
    })
}

/// One row of an [`alpha_sweep`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub alpha_steps: u32,
    pub alpha: f64,
    pub runs: u32,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
    /// Every individual sup-distance, in run order.
    #[serde(skip)]
    pub distances: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub provenance: Provenance,
    pub in_theorem_scope: bool,
    pub rows: Vec<SweepRow>,
}

/// Sup-distance between interpolated cGA runs and the ODE solution from the
/// same start, for each `N`.
pub fn alpha_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.n_values.len() < 2 {
        return Err(Error::Config("alpha sweep needs at least two N values".into()));
    }
    let land = cfg.landscape()?;
    let x0 = cfg.initial_pv();
    let ode = integrate(&land, &x0, cfg.ode_step, cfg.horizon)?;
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for (s, &alpha_steps) in cfg.n_values.iter().enumerate() {
        let budget = (cfg.horizon * 2.0 * f64::from(alpha_steps)).ceil() as u64;
        let runs = run_batch(&land, cfg, s, alpha_steps, Some(budget))?;
        let distances: Vec<f64> = runs
            .par_iter()
            .map(|t| sup_distance(t.interpolate(), &ode, cfg.horizon))
            .collect::<Result<_>>()?;
        let q = Quantiles::of(&distances).expect("runs_per_setting >= 1");
        rows.push(SweepRow {
            alpha_steps,
            alpha: cga::alpha(alpha_steps),
            runs: cfg.runs_per_setting,
            median: q.median,
            q90: q.q90,
            max: q.max,
            distances,
        });
    }
    Ok(SweepResult {
        provenance: cfg.provenance()?,
        in_theorem_scope: land.is_injective(),
        rows,
    })
}

/// Reals in CSV output: 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.provenance.csv_comment().as_bytes())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "alpha", "runs", "median_sup_distance", "q90_sup_distance", "max_sup_distance"])?;
        for r in &self.rows {
            w.write_record([
                r.alpha_steps.to_string(),
                fmt_real(r.alpha),
                r.runs.to_string(),
                fmt_real(r.median),
                fmt_real(r.q90),
                fmt_real(r.max),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub corner: Solution,
    pub fitness: f64,
    pub local_max: bool,
    pub verdict: Verdict,
    pub eigenvalues: Vec<f64>,
    /// Verdict is stable exactly when the corner is a strict local maximum.
    pub agreement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub rows: Vec<ClassificationRow>,
}

impl ClassificationReport {
    pub fn agreeing(&self) -> usize {
        self.rows.iter().filter(|r| r.agreement).count()
    }

    pub fn all_agree(&self) -> bool {
        self.agreeing() == self.rows.len()
    }

    pub fn stable_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.verdict == Verdict::AsymptoticallyStable)
            .count()
    }

    /// Columns `corner, fitness, local_max, verdict, eigenvalues, agreement`;
    /// eigenvalues are `;`-separated. A trailing comment gives the agreement total.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&Provenance>) -> Result<()> {
        if let Some(p) = provenance {
            out.write_all(p.csv_comment().as_bytes())?;
        }
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["corner", "fitness", "local_max", "verdict", "eigenvalues", "agreement"])?;
        for r in &self.rows {
            let eig: Vec<String> = r.eigenvalues.iter().map(|&e| fmt_real(e)).collect();
            w.write_record([
                r.corner.to_string(),
                fmt_real(r.fitness),
                r.local_max.to_string(),
                r.verdict.as_str().to_string(),
                eig.join(";"),
                r.agreement.to_string(),
            ])?;
        }
        w.flush()?;
        drop(w);
        writeln!(
            out,
            "# agreement={}/{} all_agree={}",
            self.agreeing(),
            self.rows.len(),
            self.all_agree()
        )?;
        Ok(())
    }
}

/// Stability verdict for every corner, checked against the local-maximum oracle.
pub fn classify_all(land: &Landscape) -> Result<ClassificationReport> {
    land.require_injective()?;
    let rows = (0..land.size())
        .map(|i| {
            let corner = Solution::from_index(i, land.n());
            let v = classify_corner(land, &corner)?;
            Ok(ClassificationRow {
                fitness: land.value_at(i),
                agreement: (v.verdict == Verdict::AsymptoticallyStable) == v.local_max,
                corner,
                local_max: v.local_max,
                verdict: v.verdict,
                eigenvalues: v.eigenvalues,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ClassificationReport { rows })
}

/// Columns `solution, fitness, strict`.
pub fn write_local_maxima_csv<W: Write>(land: &Landscape, mut out: W, provenance: Option<&Provenance>) -> Result<()> {
    if let Some(p) = provenance {
        out.write_all(p.csv_comment().as_bytes())?;
    }
    let report = land.enumerate_local_maxima();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["solution", "fitness", "strict"])?;
    for (y, strict) in report.maxima.iter().zip(&report.strict_flags) {
        w.write_record([y.to_string(), fmt_real(land.evaluate(y)?), strict.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Largest number of rows a drift grid export may produce.
pub const MAX_GRID_ROWS: usize = 2_000_000;

/// Drift on the regular grid `{0, 1/r, ..., 1}^n`, one row `p_1..p_n, f_1..f_n` per point.
pub fn write_drift_grid_csv<W: Write>(
    land: &Landscape,
    resolution: usize,
    out: W,
    provenance: Option<&Provenance>,
) -> Result<()> {
    let n = land.n();
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be at least 1".into()));
    }
    let per_axis = resolution + 1;
    let rows = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(per_axis));
    match rows {
        Some(r) if r <= MAX_GRID_ROWS => {}
        _ => {
            return Err(Error::Config(format!(
                "grid of {per_axis}^{n} points exceeds {MAX_GRID_ROWS} rows"
            )))
        }
    }
    let mut out = out;
    if let Some(p) = provenance {
        out.write_all(p.csv_comment().as_bytes())?;
    }
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=n)
        .map(|i| format!("p_{i}"))
        .chain((1..=n).map(|i| format!("f_{i}")))
        .collect();
    w.write_record(&header)?;
    let mut idx = vec![0usize; n];
    loop {
        let p: Vec<f64> = idx.iter().map(|&j| j as f64 / resolution as f64).collect();
        let f = drift(&ProbabilityVector::new(p.clone())?, land)?;
        w.write_record(p.iter().chain(f.as_slice()).map(|&v| fmt_real(v)))?;
        // odometer, last coordinate fastest
        let mut d = n;
        loop {
            if d == 0 {
                w.flush()?;
                return Ok(());
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(s: &str) -> Solution {
        s.parse().unwrap()
    }

    fn two_maxima() -> FitnessSpec {
        FitnessSpec::table([("00", 3.0), ("01", 1.0), ("10", 2.0), ("11", 4.0)]).unwrap()
    }

    #[test]
    fn quantiles_interpolate() {
        let q = Quantiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(q.median, 3.0);
        assert!((q.q90 - 4.6).abs() < 1e-12);
        assert_eq!(q.max, 5.0);
        assert!(Quantiles::of(&[]).is_none());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(FitnessSpec::binval(3));
        assert!(cfg.validate().is_ok());
        cfg.runs_per_setting = 0;
        assert!(cfg.validate().is_err());
        cfg.runs_per_setting = 1;
        cfg.n_values = vec![0];
        assert!(cfg.validate().is_err());
        cfg.n_values = vec![4];
        cfg.initial = Some(ProbabilityVector::center(2));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_uses_documented_names() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"spec":{"kind":"binval","n":3},"N_values":[8,16],"runs_per_setting":5,
                "T_horizon":2.5,"master_seed":9}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_values, vec![8, 16]);
        assert_eq!(cfg.horizon, 2.5);
        assert_eq!(cfg.ode_step, 1e-2);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"spec":{"kind":"binval","n":3},"bogus":1}"#).is_err());
    }

    #[test]
    fn monte_carlo_counts_add_up_and_respect_local_maxima() {
        let mut cfg = ExperimentConfig::new(two_maxima());
        cfg.n_values = vec![16];
        cfg.runs_per_setting = 40;
        cfg.master_seed = 3;
        let res = monte_carlo(&cfg).unwrap();
        let s = &res.settings[0];
        assert_eq!(s.terminated() + s.non_terminated, 40);
        assert!(s.convergence_counts.keys().all(|c| *c == sol("00") || *c == sol("11")));
        assert_eq!(s.outside_local_maxima, 0);
        assert!(res.in_theorem_scope);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let mut cfg = ExperimentConfig::new(FitnessSpec::binval(3));
        cfg.n_values = vec![8];
        cfg.runs_per_setting = 1;
        cfg.master_seed = 77;
        assert_eq!(monte_carlo(&cfg).unwrap(), monte_carlo(&cfg).unwrap());
    }

    #[test]
    fn non_injective_campaigns_are_labelled() {
        let mut cfg = ExperimentConfig::new(FitnessSpec::table([("0", 1.0), ("1", 1.0)]).unwrap());
        cfg.n_values = vec![4];
        cfg.runs_per_setting = 3;
        assert!(!monte_carlo(&cfg).unwrap().in_theorem_scope);
    }

    #[test]
    fn alpha_sweep_needs_two_settings() {
        let cfg = ExperimentConfig::new(FitnessSpec::binval(3));
        assert!(alpha_sweep(&cfg).is_err());
    }

    #[test]
    fn alpha_sweep_is_reproducible_and_bounded() {
        let mut cfg = ExperimentConfig::new(FitnessSpec::binval(4));
        cfg.n_values = vec![8, 32];
        cfg.runs_per_setting = 5;
        cfg.horizon = 2.0;
        let a = alpha_sweep(&cfg).unwrap();
        assert_eq!(a, alpha_sweep(&cfg).unwrap());
        for row in &a.rows {
            assert!(row.distances.iter().all(|&d| d > 0.0 && d <= 2.0));
        }
    }

    #[test]
    fn classify_binval() {
        let report = classify_all(&Landscape::new(FitnessSpec::binval(3)).unwrap()).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert_eq!(report.stable_count(), 1);
        assert!(report.all_agree());
        let stable: Vec<_> = report
            .rows
            .iter()
            .filter(|r| r.verdict == Verdict::AsymptoticallyStable)
            .map(|r| r.corner.clone())
            .collect();
        assert_eq!(stable, vec![sol("111")]);
    }

    #[test]
    fn classify_random_injective_matches_oracle() {
        let land = Landscape::new(FitnessSpec::random_injective(4, 7)).unwrap();
        let report = classify_all(&land).unwrap();
        assert_eq!(report.stable_count(), land.enumerate_local_maxima().maxima.len());
    }

    #[test]
    fn classify_refuses_non_injective() {
        let land = Landscape::new(FitnessSpec::table([("0", 1.0), ("1", 1.0)]).unwrap()).unwrap();
        assert!(matches!(classify_all(&land), Err(Error::NotInjective(_))));
    }

    #[test]
    fn drift_grid_shape() {
        let land = Landscape::new(FitnessSpec::binval(2)).unwrap();
        let mut buf = Vec::new();
        write_drift_grid_csv(&land, 2, &mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p_1,p_2,f_1,f_2");
        assert_eq!(lines.len(), 1 + 9);
        let center: Vec<f64> = lines[5].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(center, vec![0.5, 0.5, 0.5, 0.25]);
        assert!(write_drift_grid_csv(&land, 0, Vec::new(), None).is_err());
    }

    #[test]
    fn csv_reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.0, 0.880797077977882, 1e-300] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
        }
    }
}
