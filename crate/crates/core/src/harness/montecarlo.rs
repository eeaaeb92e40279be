//! Monte Carlo drivers: straight crossings of a length-3 interval, the
//! test statistic with fixed crossing indices, the localization error rate
//! and the statistic on observably selected crossings.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete, Normal};

use super::derive_seed;
use crate::crossings::decompose;
use crate::error::{Error, Result};
use crate::localization::oracle::{mc_statistic, sample_oracle_pair, IndexPair};
use crate::localization::{decide, word_dot, Decision, LevelCrossings, LocalizationParams};
use crate::walks::skeleton::SkeletonWalk;
use crate::walks::{compose, gen_scenery, gen_walk, represent, Rng};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StraightEstimate {
    pub seed: u64,
    pub crossings: u64,
    pub straight: u64,
    pub fraction: f64,
    /// Wilson score interval at 99%.
    pub ci99: (f64, f64),
    /// Crossing duration → count.
    pub durations: BTreeMap<u64, u64>,
}

fn z99() -> f64 {
    Normal::standard().inverse_cdf(0.995)
}

fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let d = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / d;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / d;
    ((c - h).max(0.0), (c + h).min(1.0))
}

/// P(duration = 3 + 2k) for a crossing of a length-3 interval: the walk
/// bounces k times between the two inner sites, each bounce with odds 1/4.
pub fn straight_duration_pmf(k: u64) -> f64 {
    0.75 * 0.25f64.powi(k as i32)
}

/// `count` successive crossings of `(0, 3)` by one simple random walk.
pub fn mc_straight_prob(seed: u64, count: u64) -> Result<StraightEstimate> {
    if count == 0 {
        return Err(Error::InvalidArgument("crossing count must be at least 1".into()));
    }
    let mut walk = SkeletonWalk::new(Rng::new(seed), &[(0, 3)], 0, u64::MAX);
    let mut durations = BTreeMap::new();
    let mut straight = 0;
    for _ in 0..count {
        let t = walk.next_traversal().expect("unbounded budget");
        let d = t.duration() as u64;
        straight += (d == 3) as u64;
        *durations.entry(d).or_insert(0) += 1;
    }
    Ok(StraightEstimate {
        seed,
        crossings: count,
        straight,
        fraction: straight as f64 / count as f64,
        ci99: wilson(straight, count, z99()),
        durations,
    })
}

/// Success probability of one word position under each hypothesis.
pub fn lemma8_p(h: Decision) -> f64 {
    match h {
        Decision::H0 => 27.0 / 64.0,
        Decision::H1 => 81.0 / 256.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma8Trial {
    pub trial: u64,
    pub hypothesis: Decision,
    pub n: usize,
    pub statistic: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma8Summary {
    pub n: usize,
    pub hypothesis: Decision,
    pub trials: usize,
    pub completed: usize,
    pub incomplete: usize,
    pub mean: f64,
    pub mean_over_n: f64,
    pub variance: f64,
    pub histogram: Vec<u64>,
    pub p: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Statistic for each trial index; `None` where the horizon ran out.
pub fn lemma8_trials(seed: u64, n: usize, trials: u64, h: Decision, horizon: u64) -> Vec<Lemma8Trial> {
    let idx = IndexPair::for_hypothesis(h);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let rs = derive_seed(seed, "lemma8-r", i);
            let ss = derive_seed(seed, "lemma8-s", i);
            let statistic = mc_statistic(rs, ss, n, idx.ia, idx.za, idx.ib, idx.zb, horizon);
            Lemma8Trial { trial: i, hypothesis: h, n, statistic }
        })
        .collect()
}

/// Pearson statistic against Binomial(n, p), merging adjacent cells until
/// each expects at least 5. Returns (statistic, degrees of freedom, p-value).
pub fn chi_square_binomial(histogram: &[u64], p: f64) -> (f64, usize, f64) {
    let n = histogram.len() as u64 - 1;
    let total: u64 = histogram.iter().sum();
    let pmf = Binomial::new(p, n).expect("valid binomial");
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (k, &h) in histogram.iter().enumerate() {
        obs += h as f64;
        exp += total as f64 * pmf.pmf(k as u64);
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => cells.push((obs, exp)),
    }
    if cells.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let stat: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat);
    (stat, dof, p_value)
}

pub fn summarize_lemma8(n: usize, h: Decision, results: &[Lemma8Trial]) -> Result<Lemma8Summary> {
    let done: Vec<usize> = results.iter().filter_map(|r| r.statistic).collect();
    let trials = results.len();
    if done.is_empty() || done.len() * 10 < trials * 9 {
        return Err(Error::InsufficientCompletedTrials { completed: done.len(), trials });
    }
    let mut histogram = vec![0u64; n + 1];
    for &x in &done {
        histogram[x] += 1;
    }
    let m = done.len() as f64;
    let mean = done.iter().sum::<usize>() as f64 / m;
    let variance = if done.len() > 1 {
        done.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let p = lemma8_p(h);
    let (chi_square, dof, p_value) = chi_square_binomial(&histogram, p);
    Ok(Lemma8Summary {
        n,
        hypothesis: h,
        trials,
        completed: done.len(),
        incomplete: trials - done.len(),
        mean,
        mean_over_n: mean / n as f64,
        variance,
        histogram,
        p,
        chi_square,
        dof,
        p_value,
    })
}

pub fn mc_lemma8(seed: u64, n: usize, trials: u64, h: Decision, horizon: u64) -> Result<Lemma8Summary> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidArgument("n and trials must be at least 1".into()));
    }
    summarize_lemma8(n, h, &lemma8_trials(seed, n, trials, h, horizon))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationErrors {
    pub n: usize,
    pub pairs: u64,
    pub threshold: f64,
    pub h0_errors: u64,
    pub h1_errors: u64,
    pub h0_rate: f64,
    pub h1_rate: f64,
    pub h0_mean_over_n: f64,
    pub h1_mean_over_n: f64,
}

/// Misclassification counts of the test on oracle-labeled pairs of
/// crossings of `(0, 3n)`, `pairs` per hypothesis.
pub fn localization_error(seed: u64, n: usize, pairs: u64) -> Result<LocalizationErrors> {
    let params = LocalizationParams::new(n)?;
    let run = |h: Decision, stream: &str| -> Result<(u64, f64)> {
        let out: Vec<(bool, usize)> = (0..pairs)
            .into_par_iter()
            .map(|i| {
                let (wa, wb) = sample_oracle_pair(derive_seed(seed, stream, i), n, h);
                let dot = word_dot(&wa, &wb)?;
                Ok((decide(&wa, &wb, &params)? != h, dot))
            })
            .collect::<Result<_>>()?;
        let errors = out.iter().filter(|o| o.0).count() as u64;
        let mean = out.iter().map(|o| o.1).sum::<usize>() as f64 / (pairs.max(1) * n as u64) as f64;
        Ok((errors, mean))
    };
    let (h0_errors, h0_mean) = run(Decision::H0, "localization-h0")?;
    let (h1_errors, h1_mean) = run(Decision::H1, "localization-h1")?;
    let rate = |e: u64| e as f64 / pairs.max(1) as f64;
    Ok(LocalizationErrors {
        n,
        pairs,
        threshold: params.threshold(),
        h0_errors,
        h1_errors,
        h0_rate: rate(h0_errors),
        h1_rate: rate(h1_errors),
        h0_mean_over_n: h0_mean,
        h1_mean_over_n: h1_mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSummary {
    pub n: usize,
    pub trials: u64,
    pub without_crossing: u64,
    pub h0_pairs: u64,
    pub h1_pairs: u64,
    pub h0_mean_over_n: Option<f64>,
    pub h1_mean_over_n: Option<f64>,
}

/// `w_1 × w_j` for the first crossing of `(0, 3n)` by T against each of the
/// next `max_j − 1` crossings, split by whether the oracle puts both on the
/// same crossing of R.
pub fn mc_observable(seed: u64, n: usize, trials: u64, steps: usize, max_j: usize) -> Result<ObservableSummary> {
    LocalizationParams::new(n)?;
    let per: Vec<Option<[(u64, u64); 2]>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = gen_walk(derive_seed(seed, "observable-walk", i), steps);
            let (lo, hi) = s.min_max().expect("nonempty walk");
            let xi = gen_scenery(derive_seed(seed, "observable-scenery", i), lo, hi)?;
            let r = represent(&xi)?;
            let t = compose(&r, &s).expect("walk inside window");
            let level = LevelCrossings::new(&t, n);
            let Some(c1) = level.crossings.first() else { return Ok(None) };
            let k1 = decompose(&s, &r, c1)?;
            let mut acc = [(0u64, 0u64); 2];
            for j in 1..level.len().min(max_j) {
                let k = decompose(&s, &r, &level.crossings[j])?;
                let same = (k.t1.min(k.t2), k.t1.max(k.t2)) == (k1.t1.min(k1.t2), k1.t1.max(k1.t2));
                let dot = word_dot(&level.words[0], &level.words[j])? as u64;
                let slot = &mut acc[if same { 0 } else { 1 }];
                slot.0 += 1;
                slot.1 += dot;
            }
            Ok(Some(acc))
        })
        .collect::<Result<_>>()?;
    let mut tot = [(0u64, 0u64); 2];
    for acc in per.iter().flatten() {
        for h in 0..2 {
            tot[h].0 += acc[h].0;
            tot[h].1 += acc[h].1;
        }
    }
    let mean = |(c, s): (u64, u64)| (c > 0).then(|| s as f64 / (c * n as u64) as f64);
    Ok(ObservableSummary {
        n,
        trials,
        without_crossing: per.iter().filter(|p| p.is_none()).count() as u64,
        h0_pairs: tot[0].0,
        h1_pairs: tot[1].0,
        h0_mean_over_n: mean(tot[0]),
        h1_mean_over_n: mean(tot[1]),
    })
}
