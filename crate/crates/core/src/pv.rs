use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::Solution;

/// A point `p` of the configuration space `K = [0,1]^n`.
///
/// Coordinate `i` is the marginal probability of sampling allele 1 at locus `i`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("probability vector needs n >= 1".into()));
        }
        if let Some((i, v)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::Domain(format!("p[{i}] = {v} is outside [0, 1]")));
        }
        Ok(ProbabilityVector { p })
    }

    /// The centre `(0.5, ..., 0.5)`.
    pub fn center(n: usize) -> Self {
        ProbabilityVector { p: vec![0.5; n] }
    }

    /// The corner of `K` identified with solution `y`.
    pub fn corner(y: &Solution) -> Self {
        ProbabilityVector { p: y.to_reals() }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.p
    }

    /// True when every coordinate is exactly 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.p.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// The solution this vector samples with certainty, if it is a corner.
    pub fn as_corner(&self) -> Option<Solution> {
        self.is_deterministic()
            .then(|| Solution::new(self.p.iter().map(|&v| v == 1.0).collect()).ok())
            .flatten()
    }

    /// Corner obtained by rounding every coordinate, ties towards 1.
    pub fn nearest_corner(&self) -> Solution {
        Solution::new(self.p.iter().map(|&v| v >= 0.5).collect()).expect("n >= 1")
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        euclidean(&self.p, other)
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        ProbabilityVector::new(p)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(pv: ProbabilityVector) -> Self {
        pv.p
    }
}

impl fmt::Debug for ProbabilityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ProbabilityVector").field(&self.p).finish()
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
