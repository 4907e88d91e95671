//! The compact genetic algorithm as a Markov chain on a grid of step `1/(2N)`.
//!
//! Each iteration draws two solutions from the probability vector, lets them
//! compete (the first sample wins ties) and moves every locus where winner and
//! loser disagree by `alpha = 1/(2N)` towards the winner. Runs stop when every
//! coordinate is exactly 0 or 1.
//!
//! Positions are held as integer levels `j` with `p_i = j / (2N)`, so the
//! grid and range invariants hold by construction rather than by clamping.

use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{FitnessSpec, Landscape, Solution};
use crate::provenance::Provenance;
use crate::pv::ProbabilityVector;

/// Generator used for every cGA run.
pub type RunRng = ChaCha8Rng;

/// Independent stream for run `run_index` of a campaign seeded with `master_seed`.
///
/// The master seed keys the ChaCha8 generator and the run index selects its
/// stream, so runs never share random numbers and results do not depend on
/// the order in which runs execute.
pub fn rng_for_run(master_seed: u64, run_index: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    rng
}

/// Learning step `alpha = 1/(2N)`.
pub fn alpha(alpha_steps: u32) -> f64 {
    1.0 / (2.0 * f64::from(alpha_steps))
}

/// Iteration budget used when none is given: `50 * 2N * n`.
pub fn default_max_iters(alpha_steps: u32, n: usize) -> u64 {
    50 * 2 * u64::from(alpha_steps) * n as u64
}

/// Probability vector of a running cGA, stored as grid levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CgaState {
    levels: Vec<u32>,
    alpha_steps: u32,
}

impl CgaState {
    /// The centre `(0.5, ..., 0.5)`, i.e. level `N` everywhere.
    pub fn center(n: usize, alpha_steps: u32) -> Result<Self> {
        if alpha_steps == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(CgaState {
            levels: vec![alpha_steps; n],
            alpha_steps,
        })
    }

    /// A state at an arbitrary point, which must lie on the `1/(2N)` grid.
    pub fn from_pv(pv: &ProbabilityVector, alpha_steps: u32) -> Result<Self> {
        if alpha_steps == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        let scale = 2.0 * f64::from(alpha_steps);
        let levels = pv
            .as_slice()
            .iter()
            .map(|&p| {
                let level = (p * scale).round();
                if level / scale == p {
                    Ok(level as u32)
                } else {
                    Err(Error::Domain(format!(
                        "initial coordinate {p} is not a multiple of 1/(2N) with N = {alpha_steps}"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        Ok(CgaState {
            levels,
            alpha_steps,
        })
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn alpha_steps(&self) -> u32 {
        self.alpha_steps
    }

    pub fn alpha(&self) -> f64 {
        alpha(self.alpha_steps)
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let scale = 2.0 * f64::from(self.alpha_steps);
        self.levels.iter().map(|&j| f64::from(j) / scale).collect()
    }

    pub fn to_pv(&self) -> ProbabilityVector {
        ProbabilityVector::new(self.probabilities()).expect("grid levels lie in [0, 2N]")
    }

    pub fn is_deterministic(&self) -> bool {
        let top = 2 * self.alpha_steps;
        self.levels.iter().all(|&j| j == 0 || j == top)
    }

    /// Move each locus where `winner` and `loser` differ one level towards the winner.
    pub fn apply(&mut self, winner: &Solution, loser: &Solution) -> Result<()> {
        for s in [winner, loser] {
            if s.len() != self.n() {
                return Err(Error::Dimension {
                    expected: self.n(),
                    actual: s.len(),
                });
            }
        }
        for (i, level) in self.levels.iter_mut().enumerate() {
            match (winner.bit(i), loser.bit(i)) {
                (true, false) => *level += 1,
                (false, true) => *level -= 1,
                _ => {}
            }
        }
        Ok(())
    }
}

/// Draw one solution; bit `i` is 1 with probability `p_i`, independently.
pub fn sample_solution<R: Rng + ?Sized>(pv: &ProbabilityVector, rng: &mut R) -> Solution {
    let bits = pv.as_slice().iter().map(|&p| rng.gen::<f64>() < p).collect();
    Solution::new(bits).expect("probability vectors are non-empty")
}

/// Order two samples into `(winner, loser)`; `a` wins ties.
pub fn compete(a: Solution, b: Solution, land: &Landscape) -> Result<(Solution, Solution)> {
    let ga = land.evaluate(&a)?;
    let gb = land.evaluate(&b)?;
    Ok(if ga >= gb { (a, b) } else { (b, a) })
}

/// Sample two solutions at `pv` and return the competition outcome.
pub fn draw_competition<R: Rng + ?Sized>(
    pv: &ProbabilityVector,
    land: &Landscape,
    rng: &mut R,
) -> Result<(Solution, Solution)> {
    land.check_len(pv.len())?;
    let a = sample_solution(pv, rng);
    let b = sample_solution(pv, rng);
    compete(a, b, land)
}

/// One cGA iteration.
pub fn step<R: Rng + ?Sized>(state: &CgaState, land: &Landscape, rng: &mut R) -> Result<CgaState> {
    let (w, l) = draw_competition(&state.to_pv(), land, rng)?;
    let mut next = state.clone();
    next.apply(&w, &l)?;
    Ok(next)
}

/// Parameters of a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub alpha_steps: u32,
    /// Starting point; the centre when absent.
    pub initial: Option<ProbabilityVector>,
    /// Iteration budget; [`default_max_iters`] when absent.
    pub max_iters: Option<u64>,
    pub seed: u64,
    pub run_index: u64,
    /// Keep every `record_every`-th state (plus the last one).
    pub record_every: u64,
}

impl RunConfig {
    pub fn new(alpha_steps: u32, seed: u64) -> Self {
        RunConfig {
            alpha_steps,
            initial: None,
            max_iters: None,
            seed,
            run_index: 0,
            record_every: 1,
        }
    }

    pub fn with_max_iters(mut self, max_iters: u64) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn with_initial(mut self, initial: ProbabilityVector) -> Self {
        self.initial = Some(initial);
        self
    }

    pub fn with_run_index(mut self, run_index: u64) -> Self {
        self.run_index = run_index;
        self
    }

    pub fn with_record_every(mut self, record_every: u64) -> Self {
        self.record_every = record_every;
        self
    }
}

/// One recorded state `p(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub k: u64,
    pub p: Vec<f64>,
}

/// Recorded sequence `p(0), p(1), ..., p(K)` of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticTrajectory {
    pub n: usize,
    pub alpha_steps: u32,
    pub seed: u64,
    pub run_index: u64,
    pub record_every: u64,
    pub terminated: bool,
    /// Number of iterations performed, `K`.
    pub iterations: u64,
    pub snapshots: Vec<Snapshot>,
}

/// Run the cGA until the vector reaches a corner or the budget is spent.
pub fn run(land: &Landscape, cfg: &RunConfig) -> Result<StochasticTrajectory> {
    if cfg.record_every == 0 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    let n = land.n();
    let mut state = match &cfg.initial {
        Some(pv) => {
            land.check_len(pv.len())?;
            CgaState::from_pv(pv, cfg.alpha_steps)?
        }
        None => CgaState::center(n, cfg.alpha_steps)?,
    };
    let max_iters = cfg
        .max_iters
        .unwrap_or_else(|| default_max_iters(cfg.alpha_steps, n));
    let mut rng = rng_for_run(cfg.seed, cfg.run_index);

    let mut snapshots = vec![Snapshot {
        k: 0,
        p: state.probabilities(),
    }];
    let mut terminated = state.is_deterministic();
    let mut k = 0;
    while !terminated && k < max_iters {
        state = step(&state, land, &mut rng)?;
        k += 1;
        terminated = state.is_deterministic();
        if terminated || k == max_iters || k % cfg.record_every == 0 {
            snapshots.push(Snapshot {
                k,
                p: state.probabilities(),
            });
        }
    }
    Ok(StochasticTrajectory {
        n,
        alpha_steps: cfg.alpha_steps,
        seed: cfg.seed,
        run_index: cfg.run_index,
        record_every: cfg.record_every,
        terminated,
        iterations: k,
        snapshots,
    })
}

#[derive(Serialize, Deserialize)]
struct TrajectoryHeader {
    n: usize,
    #[serde(rename = "N")]
    alpha_steps: u32,
    alpha: f64,
    seed: u64,
    run_index: u64,
    record_every: u64,
    terminated: bool,
    iterations: u64,
    spec: FitnessSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl StochasticTrajectory {
    pub fn alpha(&self) -> f64 {
        alpha(self.alpha_steps)
    }

    pub fn initial(&self) -> ProbabilityVector {
        ProbabilityVector::new(self.snapshots[0].p.clone()).expect("recorded states lie in K")
    }

    pub fn final_state(&self) -> ProbabilityVector {
        let last = self.snapshots.last().expect("at least the initial state is recorded");
        ProbabilityVector::new(last.p.clone()).expect("recorded states lie in K")
    }

    /// Corner reached, when the run terminated.
    pub fn terminal_corner(&self) -> Option<Solution> {
        if self.terminated {
            self.final_state().as_corner()
        } else {
            None
        }
    }

    pub fn interpolate(&self) -> InterpolatedProcess<'_> {
        InterpolatedProcess { traj: self }
    }

    /// JSON lines: a header object, then one `{"k", "p"}` object per snapshot.
    pub fn write_jsonl<W: Write>(
        &self,
        mut out: W,
        spec: &FitnessSpec,
        provenance: Option<&Provenance>,
    ) -> Result<()> {
        let header = TrajectoryHeader {
            n: self.n,
            alpha_steps: self.alpha_steps,
            alpha: self.alpha(),
            seed: self.seed,
            run_index: self.run_index,
            record_every: self.record_every,
            terminated: self.terminated,
            iterations: self.iterations,
            spec: spec.clone(),
            provenance: provenance.cloned(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for s in &self.snapshots {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<(Self, FitnessSpec)> {
        let mut lines = input.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Config("empty trajectory file".into()))??;
        let header: TrajectoryHeader = serde_json::from_str(&header_line)?;
        let mut snapshots = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            snapshots.push(serde_json::from_str::<Snapshot>(&line)?);
        }
        if snapshots.is_empty() {
            return Err(Error::Config("trajectory file has no snapshots".into()));
        }
        Ok((
            StochasticTrajectory {
                n: header.n,
                alpha_steps: header.alpha_steps,
                seed: header.seed,
                run_index: header.run_index,
                record_every: header.record_every,
                terminated: header.terminated,
                iterations: header.iterations,
                snapshots,
            },
            header.spec,
        ))
    }
}

/// Continuous-time embedding `p^alpha(t) = p(k)` for `t` in `[k alpha, (k+1) alpha)`.
///
/// A terminated run sits at an absorbing corner, so it is extended by its
/// final state for all later times. A run stopped by its budget is defined
/// only up to `(K+1) alpha`.
#[derive(Clone, Copy, Debug)]
pub struct InterpolatedProcess<'a> {
    traj: &'a StochasticTrajectory,
}

impl<'a> InterpolatedProcess<'a> {
    pub fn trajectory(&self) -> &'a StochasticTrajectory {
        self.traj
    }

    pub fn alpha(&self) -> f64 {
        self.traj.alpha()
    }

    /// End of the interval on which the process is defined (infinite once terminated).
    pub fn horizon(&self) -> f64 {
        if self.traj.terminated {
            f64::INFINITY
        } else {
            (self.traj.iterations + 1) as f64 * self.alpha()
        }
    }

    /// Iteration index `floor(t / alpha)`, computed as `floor(2N t)`.
    pub fn index_at(&self, t: f64) -> Result<u64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Range(format!("time {t} is not a finite non-negative number")));
        }
        let k = (t * 2.0 * f64::from(self.traj.alpha_steps)).floor() as u64;
        if k > self.traj.iterations && !self.traj.terminated {
            return Err(Error::Range(format!(
                "time {t} is beyond the recorded horizon {}",
                self.horizon()
            )));
        }
        Ok(k.min(self.traj.iterations))
    }

    /// Snapshot in force at time `t`.
    pub fn snapshot_at(&self, t: f64) -> Result<&'a Snapshot> {
        let k = self.index_at(t)?;
        let snaps = &self.traj.snapshots;
        match snaps.binary_search_by_key(&k, |s| s.k) {
            Ok(i) => Ok(&snaps[i]),
            Err(_) => Err(Error::Range(format!(
                "iteration {k} was not recorded (record_every = {})",
                self.traj.record_every
            ))),
        }
    }

    pub fn evaluate_at(&self, t: f64) -> Result<ProbabilityVector> {
        ProbabilityVector::new(self.snapshot_at(t)?.p.clone())
    }
}
