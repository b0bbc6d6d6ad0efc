use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::intlat::{hnf, ExactMatrix};

/// A finite distribution over integer vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<Vec<i64>>,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    /// Merges duplicate points, drops zero weights and normalises.
    pub fn from_weights(points: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (p, w) in points {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Parameter(format!("invalid weight {w}")));
            }
            *merged.entry(p).or_insert(0.0) += w;
        }
        merged.retain(|_, w| *w > 0.0);
        let total: f64 = merged.values().sum();
        if merged.is_empty() || total <= 0.0 {
            return Err(Error::EmptySupport("distribution has no mass".into()));
        }
        let (support, probabilities) = merged.into_iter().map(|(p, w)| (p, w / total)).unzip();
        Ok(Self { support, probabilities })
    }

    pub fn support(&self) -> &[Vec<i64>] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability_of(&self, x: &[i64]) -> f64 {
        match self.support.binary_search_by(|p| p.as_slice().cmp(x)) {
            Ok(i) => self.probabilities[i],
            Err(_) => 0.0,
        }
    }

    /// Draws `shots` points.
    pub fn sample(&self, shots: usize, rng: &mut ChaCha20Rng) -> Result<Vec<Vec<i64>>> {
        let w = WeightedIndex::new(&self.probabilities).map_err(|e| Error::Parameter(e.to_string()))?;
        Ok((0..shots).map(|_| self.support[w.sample(rng)].clone()).collect())
    }
}

/// `P(x) ∝ density(x)` over `L(B) ∩ [-r, r]^n`.
///
/// Lattice points are enumerated exactly by back-substitution through the
/// column HNF `x = H·c`, last coordinate first.
pub fn brute_force_target(
    density: impl Fn(&[f64]) -> f64,
    b: &ExactMatrix,
    box_radius: f64,
) -> Result<DiscreteDistribution> {
    let points = lattice_points_in_cube(b, box_radius)?;
    let weighted = points.into_iter().map(|p| {
        let pf: Vec<f64> = p.iter().map(|&v| v as f64).collect();
        let w = density(&pf);
        (p, w)
    });
    DiscreteDistribution::from_weights(weighted)
}

/// All points of `L(B)` in the cube `[-r, r]^n`.
pub fn lattice_points_in_cube(b: &ExactMatrix, r: f64) -> Result<Vec<Vec<i64>>> {
    let h: Vec<Vec<i64>> = hnf(b)?
        .hnf
        .to_int_rows()?
        .into_iter()
        .map(|row| row.into_iter().map(|x| i64::try_from(x).map_err(|_| Error::Parameter("HNF entry overflows i64".into()))).collect())
        .collect::<Result<_>>()?;
    let n = h.len();
    let r = r.floor() as i64;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let mut c = vec![0i64; n];
    fn rec(h: &[Vec<i64>], r: i64, i: usize, c: &mut [i64], x: &mut [i64], out: &mut Vec<Vec<i64>>) {
        let n = h.len();
        // x_i = h_ii c_i + Σ_{j>i} h_ij c_j
        let rest: i64 = (i + 1..n).map(|j| h[i][j] * c[j]).sum();
        let d = h[i][i];
        let lo = (-r - rest).div_euclid(d) + i64::from((-r - rest).rem_euclid(d) != 0);
        let hi = (r - rest).div_euclid(d);
        for ci in lo..=hi {
            c[i] = ci;
            x[i] = d * ci + rest;
            if i == 0 {
                out.push(x.to_vec());
            } else {
                rec(h, r, i - 1, c, x, out);
            }
        }
    }
    rec(&h, r, n - 1, &mut c, &mut x, &mut out);
    Ok(out)
}

/// Result of matching an observed distribution against a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacReport {
    /// Half the L1 distance after matching.
    pub tv_distance: f64,
    /// The unnormalised L1 distance, `2·tv_distance`.
    pub l1_distance: f64,
    pub max_displacement: f64,
    pub matched: usize,
}

fn dist(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) as f64).powi(2)).sum::<f64>().sqrt()
}

/// Greedy one-to-one matching of support points within `match_radius`,
/// nearest pairs first; unmatched mass counts in full.
pub fn pac_distance(observed: &DiscreteDistribution, target: &DiscreteDistribution, match_radius: f64) -> PacReport {
    let cell = match_radius.max(1.0);
    let key = |p: &[i64]| -> Vec<i64> { p.iter().map(|&v| (v as f64 / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (j, p) in target.support().iter().enumerate() {
        grid.entry(key(p)).or_default().push(j);
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in observed.support().iter().enumerate() {
        let k = key(p);
        let dim = k.len();
        for off in 0..3usize.pow(dim as u32) {
            let mut nk = k.clone();
            let mut o = off;
            for v in nk.iter_mut() {
                *v += (o % 3) as i64 - 1;
                o /= 3;
            }
            if let Some(js) = grid.get(&nk) {
                for &j in js {
                    let d = dist(p, &target.support()[j]);
                    if d <= match_radius {
                        pairs.push((d, i, j));
                    }
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_o = vec![false; observed.len()];
    let mut used_t = vec![false; target.len()];
    let (mut l1, mut max_disp, mut matched) = (0f64, 0f64, 0usize);
    for (d, i, j) in pairs {
        if used_o[i] || used_t[j] {
            continue;
        }
        used_o[i] = true;
        used_t[j] = true;
        matched += 1;
        max_disp = max_disp.max(d);
        l1 += (observed.probabilities()[i] - target.probabilities()[j]).abs();
    }
    l1 += observed.probabilities().iter().zip(&used_o).filter(|(_, u)| !**u).map(|(p, _)| p).sum::<f64>();
    l1 += target.probabilities().iter().zip(&used_t).filter(|(_, u)| !**u).map(|(p, _)| p).sum::<f64>();
    PacReport { tv_distance: l1 / 2.0, l1_distance: l1, max_displacement: max_disp, matched }
}

/// Pearson chi-square goodness-of-fit p-value of `samples` against `dist`.
///
/// Points with expected count at least 5 get their own bin; the rest are
/// pooled into one bin.
pub fn chi_square_p_value(dist: &DiscreteDistribution, samples: &[Vec<i64>]) -> Result<f64> {
    let shots = samples.len() as f64;
    if samples.is_empty() {
        return Err(Error::Parameter("no samples".into()));
    }
    let mut counts: HashMap<&[i64], f64> = HashMap::new();
    for s in samples {
        *counts.entry(s.as_slice()).or_insert(0.0) += 1.0;
    }
    let (mut stat, mut bins) = (0f64, 0usize);
    let (mut pooled_exp, mut pooled_obs) = (0f64, shots);
    for (p, &prob) in dist.support().iter().zip(dist.probabilities()) {
        let exp = prob * shots;
        if exp >= 5.0 {
            let obs = counts.get(p.as_slice()).copied().unwrap_or(0.0);
            stat += (obs - exp).powi(2) / exp;
            bins += 1;
            pooled_obs -= obs;
        } else {
            pooled_exp += exp;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    if bins < 2 {
        return Ok(1.0);
    }
    let chi = ChiSquared::new((bins - 1) as f64).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(1.0 - chi.cdf(stat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn gauss(s: f64) -> impl Fn(&[f64]) -> f64 {
        move |x| (-std::f64::consts::PI * x.iter().map(|v| v * v).sum::<f64>() / (s * s)).exp()
    }

    fn basis() -> ExactMatrix {
        ExactMatrix::from_i64_rows(&[[2, 1], [0, 1]]).unwrap()
    }

    #[test]
    fn cube_enumeration_matches_filter() {
        let b = ExactMatrix::from_i64_rows(&[[3, 1, 0], [1, 4, 1], [0, -2, 5]]).unwrap();
        let mut fast = lattice_points_in_cube(&b, 7.0).unwrap();
        fast.sort();
        let mut slow = Vec::new();
        for a in -7i64..=7 {
            for c in -7i64..=7 {
                for d in -7i64..=7 {
                    let v = vec![a.into(), c.into(), d.into()];
                    if crate::intlat::membership(&b, &v).unwrap() {
                        slow.push(vec![a, c, d]);
                    }
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn single_point_and_symmetry() {
        let one = brute_force_target(gauss(1.0), &basis(), 0.5).unwrap();
        assert_eq!(one.support(), &[vec![0, 0]]);
        assert_eq!(one.probabilities(), &[1.0]);
        let d = brute_force_target(gauss(4.0), &basis(), 20.0).unwrap();
        for (p, &q) in d.support().iter().zip(d.probabilities()) {
            let neg: Vec<i64> = p.iter().map(|v| -v).collect();
            assert!((d.probability_of(&neg) - q).abs() < 1e-15);
        }
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_box_changes_little() {
        let s = 3.0;
        let a = brute_force_target(gauss(s), &basis(), 3.0 * s).unwrap();
        let b = brute_force_target(gauss(s), &basis(), 6.0 * s).unwrap();
        let tv = pac_distance(&a, &b, 0.0).tv_distance;
        // tail outside the 3s cube is below 4·e^{-9π}
        assert!(tv < 4.0 * (-9.0 * std::f64::consts::PI).exp() * 10.0, "{tv}");
    }

    #[test]
    fn pac_examples() {
        let a = DiscreteDistribution::from_weights([(vec![0, 0], 1.0), (vec![2, 0], 3.0)]).unwrap();
        let r = pac_distance(&a, &a, 0.5);
        assert_eq!((r.tv_distance, r.max_displacement), (0.0, 0.0));
        let shifted = DiscreteDistribution::from_weights([(vec![0, 1], 1.0), (vec![2, 1], 3.0)]).unwrap();
        let r = pac_distance(&a, &shifted, 1.5);
        assert!(r.tv_distance.abs() < 1e-15);
        assert_eq!(r.max_displacement, 1.0);
        let far = DiscreteDistribution::from_weights([(vec![50, 50], 1.0)]).unwrap();
        assert!((pac_distance(&a, &far, 1.5).tv_distance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_passes_chi_square() {
        let d = brute_force_target(gauss(3.0), &basis(), 12.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let xs = d.sample(100_000, &mut rng).unwrap();
        let p = chi_square_p_value(&d, &xs).unwrap();
        assert!(p > 1e-3, "{p}");
        let skewed: Vec<Vec<i64>> = xs.iter().map(|_| vec![0, 0]).collect();
        assert!(chi_square_p_value(&d, &skewed).unwrap() < 1e-6);
    }
}
