//! Pseudo-boolean fitness functions over bitstrings of length `n`.
//!
//! A [`FitnessSpec`] is the serializable description of a fitness function.
//! [`Landscape`] is its fully tabulated form: all `2^n` values plus the
//! ascending fitness order, which is what the drift computation and the
//! local-maximum oracle consume. Tabulation is refused above an enumeration
//! cap ([`DEFAULT_CAP`] unless configured otherwise).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default enumeration cap on `n`.
pub const DEFAULT_CAP: usize = 16;

/// Hard ceiling for a configured cap; `2^24` doubles is already 128 MiB.
pub const MAX_CAP: usize = 24;

/// A bitstring `y = (y_1, ..., y_n)`.
///
/// Solutions are identified with integers by reading `y_1` as the most
/// significant bit, so the index of a solution equals its binary value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution {
    bits: Vec<bool>,
}

impl Solution {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Domain("a solution needs at least one bit".into()));
        }
        Ok(Solution { bits })
    }

    /// Solution of length `n` whose binary value (y_1 most significant) is `index`.
    pub fn from_index(index: usize, n: usize) -> Self {
        debug_assert!(n >= 1 && (n >= usize::BITS as usize || index < (1usize << n)));
        let bits = (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect();
        Solution { bits }
    }

    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Copy with locus `i` flipped.
    pub fn flipped(&self, i: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        Solution { bits }
    }

    pub fn hamming(&self, other: &Solution) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Bits as `0.0` / `1.0`.
    pub fn to_reals(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Solution({self})")
    }
}

impl FromStr for Solution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!(
                    "invalid character {other:?} in bitstring {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Solution::new(bits)
    }
}

/// Description of a fitness function `g: {0,1}^n -> R`.
///
/// Serialized as a JSON object tagged by `"kind"`. Table keys are bitstrings
/// written with `y_1` leftmost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitnessSpec {
    /// `g(y) = sum_i y_i 2^(n-i)`.
    Binval { n: usize },
    /// `g(y) = sum_i w_i y_i`.
    Linear { n: usize, weights: Vec<f64> },
    /// `g(y) = onemax(y) + epsilon * binval(y)`, with `epsilon * (2^n - 1) < 1`.
    PerturbedOnemax { n: usize, epsilon: f64 },
    /// Explicit value for every one of the `2^n` solutions.
    Table { n: usize, table: BTreeMap<String, f64> },
    /// A seeded pseudo-random permutation of `{0, 1, ..., 2^n - 1}`.
    RandomInjective { n: usize, seed: u64 },
}

impl FitnessSpec {
    pub fn binval(n: usize) -> Self {
        FitnessSpec::Binval { n }
    }

    pub fn linear(weights: Vec<f64>) -> Self {
        FitnessSpec::Linear {
            n: weights.len(),
            weights,
        }
    }

    pub fn perturbed_onemax(n: usize, epsilon: f64) -> Self {
        FitnessSpec::PerturbedOnemax { n, epsilon }
    }

    /// Largest power of two usable as the onemax perturbation for length `n`.
    pub fn default_epsilon(n: usize) -> f64 {
        0.5f64.powi(n as i32)
    }

    pub fn random_injective(n: usize, seed: u64) -> Self {
        FitnessSpec::RandomInjective { n, seed }
    }

    /// Table spec from `(bitstring, value)` pairs.
    pub fn table<'a>(entries: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let table: BTreeMap<String, f64> = entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let n = table
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::Config("empty fitness table".into()))?;
        let spec = FitnessSpec::Table { n, table };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        match *self {
            FitnessSpec::Binval { n }
            | FitnessSpec::Linear { n, .. }
            | FitnessSpec::PerturbedOnemax { n, .. }
            | FitnessSpec::Table { n, .. }
            | FitnessSpec::RandomInjective { n, .. } => n,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FitnessSpec::Binval { .. } => "binval",
            FitnessSpec::Linear { .. } => "linear",
            FitnessSpec::PerturbedOnemax { .. } => "perturbed_onemax",
            FitnessSpec::Table { .. } => "table",
            FitnessSpec::RandomInjective { .. } => "random_injective",
        }
    }

    /// Structural checks that do not require enumerating `{0,1}^n`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::Config("fitness spec needs n >= 1".into()));
        }
        if n > MAX_CAP {
            return Err(Error::Capacity { n, cap: MAX_CAP });
        }
        match self {
            FitnessSpec::Binval { .. } | FitnessSpec::RandomInjective { .. } => Ok(()),
            FitnessSpec::Linear { weights, .. } => {
                if weights.len() != n {
                    return Err(Error::Config(format!(
                        "linear spec has {} weights for n = {n}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::Config("linear weights must be finite".into()));
                }
                Ok(())
            }
            FitnessSpec::PerturbedOnemax { epsilon, .. } => {
                let top = ((1u64 << n) - 1) as f64;
                if !(epsilon.is_finite() && *epsilon > 0.0 && epsilon * top < 1.0) {
                    return Err(Error::Config(format!(
                        "perturbed_onemax needs 0 < epsilon and epsilon * (2^n - 1) < 1, got epsilon = {epsilon}"
                    )));
                }
                Ok(())
            }
            FitnessSpec::Table { table, .. } => {
                for (key, value) in table {
                    let y: Solution = key.parse()?;
                    if y.len() != n {
                        return Err(Error::Config(format!(
                            "table key {key:?} has length {}, expected {n}",
                            y.len()
                        )));
                    }
                    if !value.is_finite() {
                        return Err(Error::Config(format!("table value for {key:?} is not finite")));
                    }
                }
                if table.len() != 1usize << n {
                    return Err(Error::Config(format!(
                        "table for n = {n} must list all {} solutions, found {}",
                        1usize << n,
                        table.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Evaluate `g(y)`.
    ///
    /// For `random_injective` this regenerates the permutation; build a
    /// [`Landscape`] when evaluating repeatedly.
    pub fn evaluate(&self, y: &Solution) -> Result<f64> {
        let n = self.n();
        if y.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: y.len(),
            });
        }
        self.validate()?;
        Ok(match self {
            FitnessSpec::Binval { .. } => y.index() as f64,
            FitnessSpec::Linear { weights, .. } => weights
                .iter()
                .zip(y.bits())
                .filter(|(_, &b)| b)
                .map(|(w, _)| w)
                .sum(),
            FitnessSpec::PerturbedOnemax { epsilon, .. } => {
                y.ones() as f64 + epsilon * y.index() as f64
            }
            FitnessSpec::Table { table, .. } => *table
                .get(&y.to_string())
                .ok_or_else(|| Error::Config(format!("table has no entry for {y}")))?,
            FitnessSpec::RandomInjective { seed, .. } => random_permutation(n, *seed)[y.index()],
        })
    }

    /// True iff all `2^n` values are pairwise distinct (exact comparison).
    pub fn is_injective(&self) -> Result<bool> {
        Ok(Landscape::new(self.clone())?.is_injective())
    }

    pub fn enumerate_local_maxima(&self) -> Result<LocalMaxReport> {
        Ok(Landscape::new(self.clone())?.enumerate_local_maxima())
    }

    pub fn is_local_maximum(&self, y: &Solution) -> Result<LocalMaxStatus> {
        Landscape::new(self.clone())?.is_local_maximum(y)
    }
}

fn random_permutation(n: usize, seed: u64) -> Vec<f64> {
    let mut values: Vec<f64> = (0..1u64 << n).map(|v| v as f64).collect();
    values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    values
}

/// Outcome of checking one solution against its Hamming-1 neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMaxStatus {
    NotMax,
    LocalMax,
    StrictLocalMax,
}

impl LocalMaxStatus {
    pub fn is_max(self) -> bool {
        self != LocalMaxStatus::NotMax
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMaxReport {
    pub maxima: Vec<Solution>,
    pub strict_flags: Vec<bool>,
}

impl LocalMaxReport {
    pub fn contains(&self, y: &Solution) -> bool {
        self.maxima.contains(y)
    }

    pub fn all_strict(&self) -> bool {
        self.strict_flags.iter().all(|&s| s)
    }
}

impl Serialize for Solution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Solution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A fully tabulated fitness function.
#[derive(Clone, Debug)]
pub struct Landscape {
    spec: FitnessSpec,
    n: usize,
    values: Vec<f64>,
    /// Solution indices in ascending fitness order; ties keep index order.
    ascending: Vec<usize>,
    /// Ranges of `ascending` sharing one fitness value.
    tie_groups: Vec<Range<usize>>,
    injective: bool,
}

impl Landscape {
    pub fn new(spec: FitnessSpec) -> Result<Self> {
        Self::with_cap(spec, DEFAULT_CAP)
    }

    pub fn with_cap(spec: FitnessSpec, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_CAP);
        spec.validate()?;
        let n = spec.n();
        if n > cap {
            return Err(Error::Capacity { n, cap });
        }
        let size = 1usize << n;
        let values: Vec<f64> = match &spec {
            FitnessSpec::RandomInjective { seed, .. } => random_permutation(n, *seed),
            FitnessSpec::Table { table, .. } => {
                let mut values = vec![0.0; size];
                for (key, &v) in table {
                    let y: Solution = key.parse()?;
                    values[y.index()] = v;
                }
                values
            }
            other => (0..size)
                .map(|i| other.evaluate(&Solution::from_index(i, n)))
                .collect::<Result<_>>()?,
        };
        let mut ascending: Vec<usize> = (0..size).collect();
        ascending.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut tie_groups = Vec::new();
        let mut start = 0;
        for k in 1..=size {
            if k == size || values[ascending[k]] != values[ascending[start]] {
                tie_groups.push(start..k);
                start = k;
            }
        }
        let injective = tie_groups.len() == size;
        Ok(Landscape {
            spec,
            n,
            values,
            ascending,
            tie_groups,
            injective,
        })
    }

    pub fn spec(&self) -> &FitnessSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of solutions, `2^n`.
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Solution indices sorted by ascending fitness.
    pub fn ascending_order(&self) -> &[usize] {
        &self.ascending
    }

    /// Ranges of [`ascending_order`](Self::ascending_order) whose solutions share a fitness value.
    pub fn tie_groups(&self) -> &[Range<usize>] {
        &self.tie_groups
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, y: &Solution) -> Result<f64> {
        self.check_len(y.len())?;
        Ok(self.values[y.index()])
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    /// Error unless the landscape is injective.
    pub fn require_injective(&self) -> Result<()> {
        if self.injective {
            Ok(())
        } else {
            Err(Error::NotInjective(format!(
                "{} spec with n = {} has repeated fitness values",
                self.spec.kind(),
                self.n
            )))
        }
    }

    fn status_of_index(&self, index: usize) -> LocalMaxStatus {
        let v = self.values[index];
        let mut strict = true;
        for bit in 0..self.n {
            match v.partial_cmp(&self.values[index ^ (1 << bit)]) {
                Some(Ordering::Greater) => {}
                Some(Ordering::Equal) => strict = false,
                _ => return LocalMaxStatus::NotMax,
            }
        }
        if strict {
            LocalMaxStatus::StrictLocalMax
        } else {
            LocalMaxStatus::LocalMax
        }
    }

    pub fn is_local_maximum(&self, y: &Solution) -> Result<LocalMaxStatus> {
        self.check_len(y.len())?;
        Ok(self.status_of_index(y.index()))
    }

    /// All solutions at least as fit as each of their `n` Hamming neighbours.
    pub fn enumerate_local_maxima(&self) -> LocalMaxReport {
        let mut maxima = Vec::new();
        let mut strict_flags = Vec::new();
        for index in 0..self.size() {
            match self.status_of_index(index) {
                LocalMaxStatus::NotMax => {}
                status => {
                    maxima.push(Solution::from_index(index, self.n));
                    strict_flags.push(status == LocalMaxStatus::StrictLocalMax);
                }
            }
        }
        LocalMaxReport {
            maxima,
            strict_flags,
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
    fn index_round_trip_uses_first_locus_as_msb() {
        assert_eq!(sol("10").index(), 2);
        assert_eq!(sol("0011").index(), 3);
        assert_eq!(Solution::from_index(6, 3).to_string(), "110");
    }

    #[test]
    fn evaluate_examples() {
        let bv = FitnessSpec::binval(2);
        assert_eq!(bv.evaluate(&sol("11")).unwrap(), 3.0);
        assert_eq!(bv.evaluate(&sol("00")).unwrap(), 0.0);
        assert_eq!(two_maxima().evaluate(&sol("10")).unwrap(), 2.0);
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let err = FitnessSpec::binval(3).evaluate(&sol("11")).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 3, actual: 2 }));
    }

    #[test]
    fn injectivity_examples() {
        assert!(FitnessSpec::binval(3).is_injective().unwrap());
        let flat = FitnessSpec::table([("0", 1.0), ("1", 1.0)]).unwrap();
        assert!(!flat.is_injective().unwrap());
        // values 0, 1.25, 1.5, 2.75
        let pom = FitnessSpec::perturbed_onemax(2, 0.25);
        let values: Vec<f64> = ["00", "01", "10", "11"]
            .iter()
            .map(|s| pom.evaluate(&sol(s)).unwrap())
            .collect();
        assert_eq!(values, vec![0.0, 1.25, 1.5, 2.75]);
        assert!(pom.is_injective().unwrap());
    }

    #[test]
    fn capacity_is_enforced() {
        let err = Landscape::with_cap(FitnessSpec::binval(5), 4).unwrap_err();
        assert!(matches!(err, Error::Capacity { n: 5, cap: 4 }));
        assert!(FitnessSpec::binval(17).is_injective().is_err());
    }

    #[test]
    fn local_maxima_examples() {
        let r = FitnessSpec::binval(2).enumerate_local_maxima().unwrap();
        assert_eq!(r.maxima, vec![sol("11")]);
        assert_eq!(r.strict_flags, vec![true]);

        let r = two_maxima().enumerate_local_maxima().unwrap();
        assert_eq!(r.maxima, vec![sol("00"), sol("11")]);
        assert!(r.all_strict());

        let flat = FitnessSpec::table([("0", 1.0), ("1", 1.0)]).unwrap();
        let r = flat.enumerate_local_maxima().unwrap();
        assert_eq!(r.maxima, vec![sol("0"), sol("1")]);
        assert_eq!(r.strict_flags, vec![false, false]);
    }

    #[test]
    fn is_local_maximum_examples() {
        let bv = FitnessSpec::binval(2);
        assert_eq!(bv.is_local_maximum(&sol("11")).unwrap(), LocalMaxStatus::StrictLocalMax);
        assert_eq!(bv.is_local_maximum(&sol("10")).unwrap(), LocalMaxStatus::NotMax);
        assert_eq!(
            two_maxima().is_local_maximum(&sol("00")).unwrap(),
            LocalMaxStatus::StrictLocalMax
        );
        assert!(bv.is_local_maximum(&sol("1")).is_err());
    }

    #[test]
    fn random_injective_is_injective_across_seeds() {
        for n in 2..=8 {
            for seed in 0..100 {
                assert!(FitnessSpec::random_injective(n, seed).is_injective().unwrap());
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(FitnessSpec::perturbed_onemax(4, 0.1).validate().is_err());
        assert!(FitnessSpec::perturbed_onemax(4, 1.0 / 16.0).validate().is_ok());
        assert!(FitnessSpec::Linear { n: 3, weights: vec![1.0] }.validate().is_err());
        assert!(FitnessSpec::table([("00", 1.0), ("01", 2.0)]).is_err());
        assert!(FitnessSpec::table([("0", 1.0), ("1x", 2.0)]).is_err());
        assert!(FitnessSpec::binval(0).validate().is_err());
    }

    #[test]
    fn json_shape() {
        let spec: FitnessSpec =
            serde_json::from_str(r#"{"kind":"table","n":1,"table":{"0":1.0,"1":2.5}}"#).unwrap();
        assert_eq!(spec.evaluate(&sol("1")).unwrap(), 2.5);
        let json = serde_json::to_value(FitnessSpec::perturbed_onemax(3, 0.125)).unwrap();
        assert_eq!(json["kind"], "perturbed_onemax");
        assert_eq!(json["epsilon"], 0.125);
        let back: FitnessSpec =
            serde_json::from_value(serde_json::to_value(FitnessSpec::random_injective(4, 9)).unwrap())
                .unwrap();
        assert_eq!(back, FitnessSpec::random_injective(4, 9));
    }

    #[test]
    fn landscape_matches_spec_evaluation() {
        for spec in [
            FitnessSpec::binval(4),
            FitnessSpec::linear(vec![1.0, -2.0, 4.5, 0.25]),
            FitnessSpec::perturbed_onemax(4, 1.0 / 16.0),
            FitnessSpec::random_injective(4, 3),
        ] {
            let land = Landscape::new(spec.clone()).unwrap();
            for i in 0..16 {
                let y = Solution::from_index(i, 4);
                assert_eq!(land.evaluate(&y).unwrap().to_bits(), spec.evaluate(&y).unwrap().to_bits());
            }
        }
    }
}
