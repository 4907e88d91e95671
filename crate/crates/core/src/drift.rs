//! Sampling, winner and loser distributions of one cGA iteration, the
//! mean-field drift `f(p) = E[w - l | p]`, and Jacobians of the drift.
//!
//! [`drift`] uses the fitness-sorted prefix-sum form and runs in
//! `O(2^n * n)`. [`drift_naive`] sums `y * (Pr(w = y) - Pr(l = y))` with the
//! winner and loser probabilities evaluated by direct double sums, so the two
//! routes share nothing beyond [`sampling_prob`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Solution};
use crate::pv::ProbabilityVector;

/// Largest `n` accepted by the quadratic-cost routes ([`winner_prob`],
/// [`loser_prob`], [`drift_naive`]).
pub const NAIVE_CAP: usize = 12;

/// Value of the drift `f(p)`; each coordinate lies in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftVector(pub Vec<f64>);

impl DriftVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

/// Jacobian of the drift at a corner of `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerJacobian {
    pub corner: Solution,
    /// `matrix[i][m] = d f_i / d p_m`.
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

fn check_pv(pv: &ProbabilityVector, land: &Landscape) -> Result<()> {
    land.check_len(pv.len())
}

fn check_naive(land: &Landscape) -> Result<()> {
    if land.n() > NAIVE_CAP {
        return Err(Error::Capacity {
            n: land.n(),
            cap: NAIVE_CAP,
        });
    }
    Ok(())
}

/// `Pr(y | p) = prod_i p_i^y_i (1 - p_i)^(1 - y_i)`.
pub fn sampling_prob(pv: &ProbabilityVector, y: &Solution) -> Result<f64> {
    if pv.len() != y.len() {
        return Err(Error::Dimension {
            expected: pv.len(),
            actual: y.len(),
        });
    }
    Ok(pv
        .as_slice()
        .iter()
        .zip(y.bits())
        .map(|(&p, &b)| if b { p } else { 1.0 - p })
        .product())
}

/// `Pr(y | p)` for every solution, indexed by [`Solution::index`].
pub fn sampling_distribution(pv: &ProbabilityVector) -> Vec<f64> {
    let mut probs = Vec::with_capacity(1 << pv.len());
    probs.push(1.0);
    for &p in pv.as_slice() {
        let q = 1.0 - p;
        probs = probs.iter().flat_map(|&v| [v * q, v * p]).collect();
    }
    probs
}

/// Sums of `Pr(z | p)` over `g(z) < g(y)`, `g(z) = g(y)` and `g(z) > g(y)`
/// for a fixed `y`, by direct enumeration.
fn direct_partition(pv: &ProbabilityVector, land: &Landscape, y: &Solution) -> Result<[f64; 3]> {
    let gy = land.evaluate(y)?;
    let mut sums = [0.0; 3];
    for index in 0..land.size() {
        let z = Solution::from_index(index, land.n());
        let pz = sampling_prob(pv, &z)?;
        let gz = land.value_at(index);
        let slot = if gz < gy {
            0
        } else if gz == gy {
            1
        } else {
            2
        };
        sums[slot] += pz;
    }
    Ok(sums)
}

/// Probability that `y` is the winner of one competition.
///
/// The first sample wins ties, so `y` wins as first sample against any `z`
/// with `g(z) <= g(y)` and as second sample against `g(z) < g(y)`.
pub fn winner_prob(pv: &ProbabilityVector, land: &Landscape, y: &Solution) -> Result<f64> {
    check_pv(pv, land)?;
    check_naive(land)?;
    let [below, equal, _] = direct_partition(pv, land, y)?;
    Ok(sampling_prob(pv, y)? * (below + (below + equal)))
}

/// Probability that `y` is the loser of one competition.
pub fn loser_prob(pv: &ProbabilityVector, land: &Landscape, y: &Solution) -> Result<f64> {
    check_pv(pv, land)?;
    check_naive(land)?;
    let [_, equal, above] = direct_partition(pv, land, y)?;
    Ok(sampling_prob(pv, y)? * (above + (above + equal)))
}

/// Mean-field drift `f(p)` via fitness-sorted prefix sums.
///
/// `f_i(p) = 2 sum_y y_i Pr(y|p) [ sum_{g(z)<g(y)} Pr(z|p) - sum_{g(z)>g(y)} Pr(z|p) ]`.
pub fn drift(pv: &ProbabilityVector, land: &Landscape) -> Result<DriftVector> {
    check_pv(pv, land)?;
    Ok(DriftVector(drift_at(pv.as_slice(), land)))
}

/// The drift polynomial at any point of `R^n`; integrator stages may sit a
/// rounding error outside `K`. `p.len()` must equal `land.n()`.
pub(crate) fn drift_at(p: &[f64], land: &Landscape) -> Vec<f64> {
    let n = land.n();
    debug_assert_eq!(p.len(), n);
    let size = land.size();

    // Pr(y|p) for all y, built in place one locus at a time
    let mut probs = vec![0.0; size];
    probs[0] = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        let q = 1.0 - pi;
        for j in (0..1usize << i).rev() {
            let v = probs[j];
            probs[2 * j + 1] = v * pi;
            probs[2 * j] = v * q;
        }
    }

    // below[y] - above[y], walking the fitness order up and then down
    let order = land.ascending_order();
    let groups = land.tie_groups();
    let mut margin = vec![0.0; size];
    let mut acc = 0.0;
    for g in groups {
        let members = &order[g.clone()];
        for &y in members {
            margin[y] = acc;
        }
        acc += members.iter().map(|&y| probs[y]).sum::<f64>();
    }
    acc = 0.0;
    for g in groups.iter().rev() {
        let members = &order[g.clone()];
        for &y in members {
            margin[y] -= acc;
        }
        acc += members.iter().map(|&y| probs[y]).sum::<f64>();
    }

    let mut f = vec![0.0; n];
    for (y, (&py, &m)) in probs.iter().zip(&margin).enumerate() {
        if py == 0.0 {
            continue;
        }
        let weight = 2.0 * py * m;
        let mut bits = y;
        for fi in f.iter_mut().rev() {
            if bits & 1 == 1 {
                *fi += weight;
            }
            bits >>= 1;
        }
    }
    f
}

/// Drift as `sum_y y (Pr(w = y | p) - Pr(l = y | p))`.
///
/// Costs `O(n * 4^n)`; used as a cross-check of [`drift`].
pub fn drift_naive(pv: &ProbabilityVector, land: &Landscape) -> Result<DriftVector> {
    check_pv(pv, land)?;
    check_naive(land)?;
    let n = land.n();
    let mut f = vec![0.0; n];
    for index in 0..land.size() {
        let y = Solution::from_index(index, n);
        let delta = winner_prob(pv, land, &y)? - loser_prob(pv, land, &y)?;
        for (fi, &b) in f.iter_mut().zip(y.bits()) {
            if b {
                *fi += delta;
            }
        }
    }
    Ok(DriftVector(f))
}

/// `d Pr(z | p) / d p_m` evaluated at the corner `p = y`.
///
/// Nonzero only when `z` agrees with `y` on every locus except possibly `m`,
/// in which case it is `+1` if `z_m = 1` and `-1` if `z_m = 0`.
pub fn partials_sampling(y: &Solution, z: &Solution, m: usize) -> Result<f64> {
    if z.len() != y.len() {
        return Err(Error::Dimension {
            expected: y.len(),
            actual: z.len(),
        });
    }
    if m >= y.len() {
        return Err(Error::Domain(format!("locus {m} out of range for n = {}", y.len())));
    }
    let sign = |bit: bool| if bit { 1.0 } else { -1.0 };
    Ok(match y.hamming(z) {
        0 => sign(y.bit(m)),
        1 if z.bit(m) != y.bit(m) => sign(z.bit(m)),
        _ => 0.0,
    })
}

fn indicator(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// Analytic Jacobian of the drift at a corner.
///
/// Only the corner itself and its `n` Hamming neighbours carry sampling mass
/// or sampling-probability derivatives there. For each column `m` the
/// contributions come from the neighbour `w` that differs from the corner at
/// `m`: one term from differentiating `Pr(w|p)` directly, one from
/// differentiating it inside the corner's below/above sums. They cancel
/// off the diagonal and add to `+-2` on it.
pub fn jacobian_analytic(corner: &Solution, land: &Landscape) -> Result<CornerJacobian> {
    land.check_len(corner.len())?;
    land.require_injective()?;
    let n = land.n();
    let g0 = land.evaluate(corner)?;
    let mut matrix = vec![vec![0.0; n]; n];
    for m in 0..n {
        let w = corner.flipped(m);
        let gw = land.evaluate(&w)?;
        let dw = partials_sampling(corner, &w, m)?;
        for (i, row) in matrix.iter_mut().enumerate() {
            let wi = indicator(w.bit(i));
            let ci = indicator(corner.bit(i));
            let t1 = wi * dw * (indicator(g0 < gw) - indicator(g0 > gw));
            let t2 = ci * dw * (indicator(gw < g0) - indicator(gw > g0));
            row[m] = 2.0 * (t1 + t2);
        }
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.iter().enumerate().any(|(m, &v)| m != i && v != 0.0) {
            return Err(Error::Internal(format!(
                "corner Jacobian at {corner} is not diagonal"
            )));
        }
    }
    let eigenvalues = (0..n).map(|i| matrix[i][i]).collect();
    Ok(CornerJacobian {
        corner: corner.clone(),
        matrix,
        eigenvalues,
    })
}

/// Central-difference Jacobian, `matrix[i][m] = (f_i(p + h e_m) - f_i(p - h e_m)) / 2h`.
pub fn jacobian_numeric(pv: &ProbabilityVector, land: &Landscape, h: f64) -> Result<Vec<Vec<f64>>> {
    check_pv(pv, land)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let n = land.n();
    let mut matrix = vec![vec![0.0; n]; n];
    for m in 0..n {
        let pm = pv.as_slice()[m];
        if pm - h < 0.0 || pm + h > 1.0 {
            return Err(Error::Domain(format!(
                "p[{m}] = {pm} +- {h} leaves [0, 1]"
            )));
        }
        let shifted = |delta: f64| {
            let mut p = pv.as_slice().to_vec();
            p[m] += delta;
            ProbabilityVector::new(p).and_then(|p| drift(&p, land))
        };
        let plus = shifted(h)?;
        let minus = shifted(-h)?;
        for (i, row) in matrix.iter_mut().enumerate() {
            row[m] = (plus.0[i] - minus.0[i]) / (2.0 * h);
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::FitnessSpec;
    use approx::assert_abs_diff_eq;

    fn sol(s: &str) -> Solution {
        s.parse().unwrap()
    }

    fn pv(p: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(p.to_vec()).unwrap()
    }

    fn land(spec: FitnessSpec) -> Landscape {
        Landscape::new(spec).unwrap()
    }

    fn two_maxima() -> Landscape {
        land(FitnessSpec::table([("00", 3.0), ("01", 1.0), ("10", 2.0), ("11", 4.0)]).unwrap())
    }

    /// Enumerates the four-way (first sample, second sample) product with the
    /// first-sample tie rule and returns `E[w - l]` plus winner/loser marginals.
    fn pair_oracle(p: &ProbabilityVector, l: &Landscape) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = l.n();
        let mut f = vec![0.0; n];
        let mut win = vec![0.0; l.size()];
        let mut lose = vec![0.0; l.size()];
        for a in 0..l.size() {
            for b in 0..l.size() {
                let pa = sampling_prob(p, &Solution::from_index(a, n)).unwrap();
                let pb = sampling_prob(p, &Solution::from_index(b, n)).unwrap();
                let (w, lo) = if l.value_at(a) >= l.value_at(b) { (a, b) } else { (b, a) };
                win[w] += pa * pb;
                lose[lo] += pa * pb;
                for (i, fi) in f.iter_mut().enumerate() {
                    let bit = |x: usize| ((x >> (n - 1 - i)) & 1) as f64;
                    *fi += pa * pb * (bit(w) - bit(lo));
                }
            }
        }
        (f, win, lose)
    }

    #[test]
    fn sampling_prob_examples() {
        assert_eq!(sampling_prob(&pv(&[0.5, 0.5]), &sol("11")).unwrap(), 0.25);
        assert_eq!(sampling_prob(&pv(&[1.0, 0.0]), &sol("10")).unwrap(), 1.0);
        assert_eq!(sampling_prob(&pv(&[1.0, 0.0]), &sol("11")).unwrap(), 0.0);
        assert_eq!(sampling_prob(&pv(&[0.25, 0.75]), &sol("01")).unwrap(), 0.5625);
        assert!(sampling_prob(&pv(&[0.5]), &sol("11")).is_err());
    }

    #[test]
    fn sampling_distribution_matches_product() {
        let p = pv(&[0.1, 0.7, 0.35]);
        let dist = sampling_distribution(&p);
        for (i, &v) in dist.iter().enumerate() {
            assert_abs_diff_eq!(v, sampling_prob(&p, &Solution::from_index(i, 3)).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn winner_loser_examples() {
        let l = land(FitnessSpec::binval(1));
        let c = pv(&[0.5]);
        assert_eq!(winner_prob(&c, &l, &sol("1")).unwrap(), 0.75);
        assert_eq!(winner_prob(&c, &l, &sol("0")).unwrap(), 0.25);
        assert_eq!(loser_prob(&c, &l, &sol("1")).unwrap(), 0.25);
        assert_eq!(loser_prob(&c, &l, &sol("0")).unwrap(), 0.75);
        let (_, win, lose) = pair_oracle(&c, &l);
        assert_eq!(win, vec![0.25, 0.75]);
        assert_eq!(lose, vec![0.75, 0.25]);
    }

    #[test]
    fn winner_loser_at_corner_are_indicators() {
        let l = two_maxima();
        let corner = pv(&[0.0, 1.0]);
        for i in 0..4 {
            let y = Solution::from_index(i, 2);
            let expect = if i == 1 { 1.0 } else { 0.0 };
            assert_eq!(winner_prob(&corner, &l, &y).unwrap(), expect);
            assert_eq!(loser_prob(&corner, &l, &y).unwrap(), expect);
        }
    }

    #[test]
    fn winner_loser_match_pair_oracle_with_ties() {
        let l = land(FitnessSpec::table([("00", 1.0), ("01", 1.0), ("10", 0.0), ("11", 2.0)]).unwrap());
        let p = pv(&[0.3, 0.8]);
        let (_, win, lose) = pair_oracle(&p, &l);
        for i in 0..4 {
            let y = Solution::from_index(i, 2);
            assert_abs_diff_eq!(winner_prob(&p, &l, &y).unwrap(), win[i], epsilon = 1e-15);
            assert_abs_diff_eq!(loser_prob(&p, &l, &y).unwrap(), lose[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn drift_examples() {
        let l1 = land(FitnessSpec::binval(1));
        assert_eq!(drift(&pv(&[0.5]), &l1).unwrap().0, vec![0.5]);
        assert_eq!(drift_naive(&pv(&[0.5]), &l1).unwrap().0, vec![0.5]);

        let l2 = land(FitnessSpec::binval(2));
        let c = pv(&[0.5, 0.5]);
        assert_eq!(drift(&c, &l2).unwrap().0, vec![0.5, 0.25]);
        let naive = drift_naive(&c, &l2).unwrap();
        assert_abs_diff_eq!(naive.0[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(naive.0[1], 0.25, epsilon = 1e-15);
        let (oracle, _, _) = pair_oracle(&c, &l2);
        assert_abs_diff_eq!(oracle[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle[1], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn drift_vanishes_exactly_at_corners() {
        for spec in [FitnessSpec::binval(3), FitnessSpec::random_injective(3, 11)] {
            let l = land(spec);
            for i in 0..8 {
                let corner = ProbabilityVector::corner(&Solution::from_index(i, 3));
                assert!(drift(&corner, &l).unwrap().0.iter().all(|&v| v == 0.0));
                assert!(drift_naive(&corner, &l).unwrap().0.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn drift_matches_pair_oracle_with_ties() {
        let l = land(FitnessSpec::table([("00", 1.0), ("01", 1.0), ("10", 0.0), ("11", 2.0)]).unwrap());
        let p = pv(&[0.3, 0.8]);
        let (oracle, _, _) = pair_oracle(&p, &l);
        let fast = drift(&p, &l).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(fast.0[i], oracle[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn partials_sampling_cases() {
        let y = sol("101");
        assert_eq!(partials_sampling(&y, &y, 0).unwrap(), 1.0);
        assert_eq!(partials_sampling(&y, &y, 1).unwrap(), -1.0);
        assert_eq!(partials_sampling(&y, &sol("011"), 0).unwrap(), 0.0);
        assert_eq!(partials_sampling(&y, &sol("111"), 1).unwrap(), 1.0);
        assert_eq!(partials_sampling(&y, &sol("100"), 2).unwrap(), -1.0);
        assert_eq!(partials_sampling(&y, &sol("111"), 0).unwrap(), 0.0);
        assert!(partials_sampling(&y, &sol("11"), 0).is_err());
    }

    #[test]
    fn partials_sampling_match_one_sided_differences() {
        // Pr(z|p) is affine in p_m, so a one-sided difference into K is exact.
        let y = sol("0110");
        let h = 0.25;
        for zi in 0..16 {
            let z = Solution::from_index(zi, 4);
            for m in 0..4 {
                let mut p = y.to_reals();
                let step = if y.bit(m) { -h } else { h };
                p[m] += step;
                let moved = sampling_prob(&pv(&p), &z).unwrap();
                let at = sampling_prob(&ProbabilityVector::corner(&y), &z).unwrap();
                assert_eq!(partials_sampling(&y, &z, m).unwrap(), (moved - at) / step);
            }
        }
    }

    #[test]
    fn jacobian_analytic_examples() {
        let l = land(FitnessSpec::binval(2));
        let j = jacobian_analytic(&sol("11"), &l).unwrap();
        assert_eq!(j.matrix, vec![vec![-2.0, 0.0], vec![0.0, -2.0]]);
        let j = jacobian_analytic(&sol("00"), &l).unwrap();
        assert_eq!(j.eigenvalues, vec![2.0, 2.0]);
        // 10 -> flip locus 1 gives 00 (3 > 2), flip locus 2 gives 11 (4 > 2)
        let j = jacobian_analytic(&sol("10"), &two_maxima()).unwrap();
        assert_eq!(j.eigenvalues, vec![2.0, 2.0]);
        let j = jacobian_analytic(&sol("01"), &two_maxima()).unwrap();
        assert_eq!(j.eigenvalues, vec![2.0, 2.0]);
        let j = jacobian_analytic(&sol("00"), &two_maxima()).unwrap();
        assert_eq!(j.eigenvalues, vec![-2.0, -2.0]);
    }

    #[test]
    fn jacobian_analytic_refuses_ties_and_bad_lengths() {
        let flat = land(FitnessSpec::table([("0", 1.0), ("1", 1.0)]).unwrap());
        assert!(matches!(jacobian_analytic(&sol("0"), &flat), Err(Error::NotInjective(_))));
        assert!(jacobian_analytic(&sol("0"), &land(FitnessSpec::binval(2))).is_err());
    }

    #[test]
    fn jacobian_numeric_near_corner_matches_analytic() {
        let l = two_maxima();
        let h = 1e-5;
        for i in 0..4 {
            let corner = Solution::from_index(i, 2);
            let inward: Vec<f64> = corner
                .bits()
                .iter()
                .map(|&b| if b { 1.0 - 2.0 * h } else { 2.0 * h })
                .collect();
            let num = jacobian_numeric(&pv(&inward), &l, h).unwrap();
            let ana = jacobian_analytic(&corner, &l).unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    assert_abs_diff_eq!(num[r][c], ana.matrix[r][c], epsilon = 1e-3);
                }
            }
        }
    }

    #[test]
    fn jacobian_numeric_domain_errors() {
        let l = land(FitnessSpec::binval(2));
        assert!(jacobian_numeric(&pv(&[0.5, 0.5]), &l, 0.0).is_err());
        assert!(jacobian_numeric(&pv(&[1.0, 0.5]), &l, 1e-5).is_err());
    }

    #[test]
    fn naive_routes_respect_cap() {
        let l = land(FitnessSpec::binval(13));
        let c = ProbabilityVector::center(13);
        assert!(matches!(drift_naive(&c, &l), Err(Error::Capacity { .. })));
        assert!(drift(&c, &l).is_ok());
    }

    #[test]
    fn injective_landscape_can_have_interior_stationary_point() {
        // On this landscape the drift vanishes at (1/2, 1/sqrt 2), so interior
        // non-stationarity is a generic property, not a universal one.
        let l = land(FitnessSpec::table([("00", 0.0), ("01", 2.0), ("10", 3.0), ("11", 1.0)]).unwrap());
        assert!(l.is_injective());
        let f = drift(&pv(&[0.5, std::f64::consts::FRAC_1_SQRT_2]), &l).unwrap();
        assert!(f.sup_norm() < 1e-15, "{f:?}");
    }
}
