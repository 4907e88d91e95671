//! The limiting ODE `dX/dt = f(X)`: fixed-step RK4 integration, limit
//! detection, stability of corners, and trajectory diagnostics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cga::InterpolatedProcess;
use crate::drift::{drift, drift_at, jacobian_analytic};
use crate::error::{Error, Result};
use crate::landscape::{FitnessSpec, Landscape, LocalMaxStatus, Solution};
use crate::provenance::Provenance;
use crate::pv::{euclidean, ProbabilityVector};

pub const DEFAULT_STEP: f64 = 1e-2;
pub const DEFAULT_T_MAX: f64 = 200.0;
pub const DEFAULT_LIMIT_TOL: f64 = 1e-8;

/// Sampled solution of the ODE on a fixed grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
    pub initial: ProbabilityVector,
    /// Number of coordinates pulled back into `[0, 1]` after a step.
    pub clamp_count: usize,
}

/// One RK4 step; `k1` is the drift at `x`.
fn rk4_step(x: &[f64], k1: &[f64], h: f64, land: &Landscape) -> Result<Vec<f64>> {
    let shifted = |k: &[f64], c: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(xi, ki)| xi + c * ki).collect()
    };
    let k2 = drift_at(&shifted(k1, h / 2.0), land);
    let k3 = drift_at(&shifted(&k2, h / 2.0), land);
    let k4 = drift_at(&shifted(&k3, h), land);
    let next: Vec<f64> = (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Internal("non-finite state during integration".into()));
    }
    Ok(next)
}

fn clamp_into_cube(x: &mut [f64]) -> usize {
    let mut clamped = 0;
    for v in x.iter_mut() {
        if *v < 0.0 || *v > 1.0 {
            *v = v.clamp(0.0, 1.0);
            clamped += 1;
        }
    }
    clamped
}

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("integration step must be positive, got {h}")));
    }
    Ok(())
}

/// Integrate from `x0` over `[0, horizon]` with classical RK4 and step `h`.
///
/// The last step is shortened so the grid ends exactly at `horizon`.
pub fn integrate(land: &Landscape, x0: &ProbabilityVector, h: f64, horizon: f64) -> Result<OdeTrajectory> {
    land.check_len(x0.len())?;
    check_step(h)?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon must be non-negative, got {horizon}")));
    }
    let full_steps = (horizon / h).floor() as usize;
    let mut times = vec![0.0];
    let mut states = vec![x0.as_slice().to_vec()];
    let mut clamp_count = 0;
    let mut x = x0.as_slice().to_vec();
    let mut advance = |x: &mut Vec<f64>, dt: f64| -> Result<()> {
        *x = rk4_step(x, &drift_at(x, land), dt, land)?;
        clamp_count += clamp_into_cube(x);
        Ok(())
    };
    for k in 1..=full_steps {
        advance(&mut x, h)?;
        times.push(k as f64 * h);
        states.push(x.clone());
    }
    let t_last = full_steps as f64 * h;
    let rest = horizon - t_last;
    if rest > 1e-12 * h.max(horizon) {
        advance(&mut x, rest)?;
        times.push(horizon);
        states.push(x);
    }
    Ok(OdeTrajectory {
        times,
        states,
        step: h,
        initial: x0.clone(),
        clamp_count,
    })
}

impl OdeTrajectory {
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one state")
    }

    pub fn final_state(&self) -> ProbabilityVector {
        ProbabilityVector::new(self.states.last().expect("non-empty").clone())
            .expect("states are clamped into K")
    }

    /// Piecewise-linear interpolation between grid points.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        let end = self.horizon();
        if !(t >= 0.0 && t <= end * (1.0 + 1e-12) + 1e-15) {
            return Err(Error::Range(format!("time {t} outside [0, {end}]")));
        }
        let j = self.times.partition_point(|&s| s <= t);
        if j == 0 {
            return Ok(self.states[0].clone());
        }
        if j >= self.times.len() {
            return Ok(self.states[self.times.len() - 1].clone());
        }
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.states[j - 1]
            .iter()
            .zip(&self.states[j])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Per-step increments `f(X_k) . (X_{k+1} - X_k)` of the potential along the path.
    pub fn lyapunov_increments(&self, land: &Landscape) -> Vec<f64> {
        self.states
            .windows(2)
            .map(|w| {
                let f = drift_at(&w[0], land);
                f.iter().zip(w[1].iter().zip(&w[0])).map(|(fi, (b, a))| fi * (b - a)).sum()
            })
            .collect()
    }

    /// JSON lines: header, then one `{"t", "p"}` object per grid point.
    pub fn write_jsonl<W: Write>(
        &self,
        mut out: W,
        spec: &FitnessSpec,
        provenance: Option<&Provenance>,
    ) -> Result<()> {
        #[derive(Serialize)]
        struct Header<'a> {
            n: usize,
            step: f64,
            horizon: f64,
            initial: &'a ProbabilityVector,
            clamp_count: usize,
            spec: &'a FitnessSpec,
            #[serde(skip_serializing_if = "Option::is_none")]
            provenance: Option<&'a Provenance>,
        }
        #[derive(Serialize)]
        struct Record<'a> {
            t: f64,
            p: &'a [f64],
        }
        serde_json::to_writer(
            &mut out,
            &Header {
                n: self.initial.len(),
                step: self.step,
                horizon: self.horizon(),
                initial: &self.initial,
                clamp_count: self.clamp_count,
                spec,
                provenance,
            },
        )?;
        out.write_all(b"\n")?;
        for (t, p) in self.times.iter().zip(&self.states) {
            serde_json::to_writer(&mut out, &Record { t: *t, p })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Settings for [`find_limit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    pub step: f64,
    /// Stop once `max_i |f_i(X)| < tol`.
    pub tol: f64,
    pub t_max: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            step: DEFAULT_STEP,
            tol: DEFAULT_LIMIT_TOL,
            t_max: DEFAULT_T_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub limit: ProbabilityVector,
    pub converged: bool,
    /// Time at which integration stopped.
    pub time: f64,
    /// `max_i |f_i|` at the final state.
    pub drift_sup: f64,
    /// Reported only; the state is never snapped onto it.
    pub nearest_corner: Solution,
    pub corner_distance: f64,
    /// Smallest per-step potential increment seen along the way.
    pub min_lyapunov_increment: f64,
    pub clamp_count: usize,
}

/// Integrate until the drift falls below `opts.tol` or `opts.t_max` is reached.
pub fn find_limit(land: &Landscape, x0: &ProbabilityVector, opts: &LimitOptions) -> Result<LimitResult> {
    land.check_len(x0.len())?;
    check_step(opts.step)?;
    if !(opts.tol > 0.0 && opts.t_max >= 0.0) {
        return Err(Error::Domain("tolerance must be positive and t_max non-negative".into()));
    }
    let sup = |f: &[f64]| f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = x0.as_slice().to_vec();
    let mut f = drift_at(&x, land);
    let mut t = 0.0;
    let mut k = 0u64;
    let mut clamp_count = 0;
    let mut min_inc = f64::INFINITY;
    while sup(&f) >= opts.tol && t < opts.t_max {
        let h = opts.step.min(opts.t_max - t);
        let mut next = rk4_step(&x, &f, h, land)?;
        clamp_count += clamp_into_cube(&mut next);
        let inc: f64 = f.iter().zip(next.iter().zip(&x)).map(|(fi, (b, a))| fi * (b - a)).sum();
        min_inc = min_inc.min(inc);
        x = next;
        f = drift_at(&x, land);
        k += 1;
        t = (k as f64 * opts.step).min(opts.t_max);
    }
    let drift_sup = sup(&f);
    let limit = ProbabilityVector::new(x)?;
    let nearest_corner = limit.nearest_corner();
    let corner_distance = limit.distance(&nearest_corner.to_reals());
    Ok(LimitResult {
        converged: drift_sup < opts.tol,
        limit,
        time: t,
        drift_sup,
        nearest_corner,
        corner_distance,
        min_lyapunov_increment: min_inc,
        clamp_count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AsymptoticallyStable,
    Unstable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AsymptoticallyStable => "asymptotically_stable",
            Verdict::Unstable => "unstable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub corner: Solution,
    pub verdict: Verdict,
    pub eigenvalues: Vec<f64>,
    /// Strict local maximum according to the landscape.
    pub local_max: bool,
}

/// Linearised stability of a corner from the analytic Jacobian's eigenvalues.
pub fn classify_corner(land: &Landscape, corner: &Solution) -> Result<StabilityVerdict> {
    let jac = jacobian_analytic(corner, land)?;
    let verdict = if jac.eigenvalues.iter().all(|&e| e < 0.0) {
        Verdict::AsymptoticallyStable
    } else {
        Verdict::Unstable
    };
    Ok(StabilityVerdict {
        corner: corner.clone(),
        verdict,
        local_max: land.is_local_maximum(corner)? == LocalMaxStatus::StrictLocalMax,
        eigenvalues: jac.eigenvalues,
    })
}

/// `dF/dt = |f(p)|^2` for a potential `F` whose gradient would be `f`.
pub fn lyapunov_rate(land: &Landscape, pv: &ProbabilityVector) -> Result<f64> {
    Ok(drift(pv, land)?.norm_squared())
}

/// A path in `K` that [`sup_distance`] can compare against an ODE solution.
#[derive(Clone, Copy, Debug)]
pub enum PathRef<'a> {
    Step(InterpolatedProcess<'a>),
    Ode(&'a OdeTrajectory),
}

impl<'a> From<InterpolatedProcess<'a>> for PathRef<'a> {
    fn from(p: InterpolatedProcess<'a>) -> Self {
        PathRef::Step(p)
    }
}

impl<'a> From<&'a OdeTrajectory> for PathRef<'a> {
    fn from(p: &'a OdeTrajectory) -> Self {
        PathRef::Ode(p)
    }
}

impl PathRef<'_> {
    fn check_horizon(&self, horizon: f64) -> Result<()> {
        let end = match self {
            PathRef::Step(ip) => ip.horizon(),
            PathRef::Ode(o) => o.horizon() * (1.0 + 1e-12) + 1e-15,
        };
        if horizon > end {
            return Err(Error::Range(format!(
                "path is defined up to {end}, comparison needs {horizon}"
            )));
        }
        Ok(())
    }

    fn breakpoints(&self, horizon: f64, out: &mut Vec<f64>) {
        match self {
            PathRef::Step(ip) => {
                let alpha = ip.alpha();
                out.extend(
                    ip.trajectory()
                        .snapshots
                        .iter()
                        .map(|s| s.k as f64 * alpha)
                        .take_while(|&t| t < horizon),
                );
            }
            PathRef::Ode(o) => out.extend(o.times.iter().copied().take_while(|&t| t < horizon)),
        }
    }

    /// Values at the two ends of a segment on which the path is affine.
    fn segment(&self, start: f64, end: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            PathRef::Step(ip) => {
                let mid = 0.5 * (start + end);
                let k = ip.index_at(mid)?;
                let snaps = &ip.trajectory().snapshots;
                let i = snaps.partition_point(|s| s.k <= k) - 1;
                Ok((snaps[i].p.clone(), snaps[i].p.clone()))
            }
            PathRef::Ode(o) => Ok((o.state_at(start)?, o.state_at(end)?)),
        }
    }
}

/// `sup_{0 <= t <= horizon} |a(t) - b(t)|` in the Euclidean norm.
///
/// Both paths are affine between the merged breakpoints (step jumps and ODE
/// grid times), so the norm of the difference is convex on each segment and
/// its maximum sits at a segment end. A thinned step process is treated as
/// constant between its recorded snapshots.
pub fn sup_distance<'a>(a: impl Into<PathRef<'a>>, b: &OdeTrajectory, horizon: f64) -> Result<f64> {
    let a = a.into();
    let b = PathRef::Ode(b);
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::Range(format!("horizon must be non-negative, got {horizon}")));
    }
    a.check_horizon(horizon)?;
    b.check_horizon(horizon)?;

    let mut points = vec![0.0];
    a.breakpoints(horizon, &mut points);
    b.breakpoints(horizon, &mut points);
    points.push(horizon);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|later, earlier| *later - *earlier <= 1e-12 * horizon.max(1.0));
    if points.last() != Some(&horizon) {
        *points.last_mut().expect("non-empty") = horizon;
    }

    if points.len() == 1 {
        let (a0, _) = a.segment(0.0, 0.0)?;
        let (b0, _) = b.segment(0.0, 0.0)?;
        return Ok(euclidean(&a0, &b0));
    }
    let mut sup = 0.0f64;
    for w in points.windows(2) {
        let (a0, a1) = a.segment(w[0], w[1])?;
        let (b0, b1) = b.segment(w[0], w[1])?;
        sup = sup.max(euclidean(&a0, &b0)).max(euclidean(&a1, &b1));
    }
    Ok(sup)
}
