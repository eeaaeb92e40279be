//! Oracle-assisted sampling of the test statistic with fixed crossing
//! indices. These samplers see R and S and exist only for validation.

use crate::crossings::{associated_word, index_crossings_r, AssociatedWord, Crossing};
use crate::walks::skeleton::SkeletonWalk;
use crate::walks::{phi_of, NNPath, PeriodicScenery, Rng};

use super::{word_dot, Decision};

/// Nonrandom `(i, z)` indices of the two compared crossings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexPair {
    pub ia: usize,
    pub za: i64,
    pub ib: usize,
    pub zb: i64,
}

impl IndexPair {
    /// First and second crossing by S of the first positive-side crossing of R.
    pub const H0: IndexPair = IndexPair { ia: 1, za: 1, ib: 2, zb: 1 };
    /// First crossings by S of the crossings of R on either side of 0.
    pub const H1: IndexPair = IndexPair { ia: 1, za: 1, ib: 1, zb: -1 };

    pub fn for_hypothesis(h: Decision) -> Self {
        match h {
            Decision::H0 => IndexPair::H0,
            Decision::H1 => IndexPair::H1,
        }
    }
}

// R on sites 0, ±1, ±2, ... until `needed` crossings of (0, 3n) completed.
fn r_side(rng: &mut Rng, phi: &PeriodicScenery, n: usize, needed: usize, cap: u64) -> Option<Vec<i64>> {
    let top = 3 * n as i64;
    let mut vals = vec![0i64];
    let mut last_wall_top = false;
    let mut count = 0;
    let mut x = 0i64;
    while count < needed {
        if vals.len() as u64 > cap {
            return None;
        }
        x = phi.next(x, rng.bit());
        vals.push(x);
        if x == 0 || x == top {
            let at_top = x == top;
            if at_top != last_wall_top {
                count += 1;
            }
            last_wall_top = at_top;
        }
    }
    Some(vals)
}

fn traversal_word(r: &NNPath, c: &Crossing, path: &[i64], n: usize) -> AssociatedWord {
    let t = NNPath { t0: 0, positions: path.iter().map(|&k| r.pos(k)).collect() };
    let last = path.len() as i64 - 1;
    let tc = if path[0] == c.t1 {
        Crossing { t1: 0, t2: last, x1: c.x1, x2: c.x2 }
    } else {
        Crossing { t1: last, t2: 0, x1: c.x1, x2: c.x2 }
    };
    associated_word(&t, &tc, n).expect("crossing of (0, 3n)")
}

/// Words of the `(ia, za)`-th and `(ib, zb)`-th crossings of `(0, 3n)` by R∘S.
///
/// The scenery is drawn site by site from `r_seed`. S only materializes its
/// crossings of the two crossings of R involved (conditioned skeleton walk).
/// `horizon` caps the scenery sites per side and the skeleton steps of S.
pub fn mc_words(r_seed: u64, s_seed: u64, n: usize, idx: IndexPair, horizon: u64) -> Option<(AssociatedWord, AssociatedWord)> {
    assert!(n >= 1 && idx.ia >= 1 && idx.ib >= 1 && idx.za != 0 && idx.zb != 0);
    let mut rng = Rng::new(r_seed);
    let phi = phi_of(rng.bit());
    let need_pos = idx.za.max(idx.zb).max(0) as usize;
    let need_neg = (-idx.za.min(idx.zb)).max(0) as usize;
    let pos = r_side(&mut rng, &phi, n, need_pos, horizon)?;
    let neg = r_side(&mut rng, &phi, n, need_neg, horizon)?;
    let mut positions: Vec<i64> = neg[1..].iter().rev().copied().collect();
    positions.extend(&pos);
    let r = NNPath { t0: -(neg.len() as i64 - 1), positions };

    let z = index_crossings_r(&r, n);
    let ca = *z.get(idx.za)?;
    let cb = *z.get(idx.zb)?;
    let mut walk = SkeletonWalk::conditioned(Rng::new(s_seed), &[(ca.t1, ca.t2), (cb.t1, cb.t2)], 0, horizon);
    let ia_iv = walk.interval_index(ca.t1, ca.t2)?;
    let ib_iv = walk.interval_index(cb.t1, cb.t2)?;
    let mut counts = vec![0usize; walk.intervals().len()];
    let (mut pa, mut pb) = (None, None);
    while pa.is_none() || pb.is_none() {
        let tr = walk.next_traversal_where(|i| {
            (i == ia_iv && counts[i] + 1 == idx.ia) || (i == ib_iv && counts[i] + 1 == idx.ib)
        })?;
        counts[tr.interval] += 1;
        let k = counts[tr.interval];
        if tr.interval == ia_iv && k == idx.ia {
            pa = Some(tr.path.clone());
        }
        if tr.interval == ib_iv && k == idx.ib {
            pb = Some(tr.path);
        }
    }
    let wa = traversal_word(&r, &ca, &pa?, n);
    let wb = traversal_word(&r, &cb, &pb?, n);
    Some((wa, wb))
}

/// `w_a × w_b` for fixed indices; `None` if a crossing is not reached
/// within the horizon.
#[allow(clippy::too_many_arguments)]
pub fn mc_statistic(r_seed: u64, s_seed: u64, n: usize, ia: usize, za: i64, ib: usize, zb: i64, horizon: u64) -> Option<usize> {
    let (wa, wb) = mc_words(r_seed, s_seed, n, IndexPair { ia, za, ib, zb }, horizon)?;
    Some(word_dot(&wa, &wb).expect("equal lengths"))
}

/// First-passage summary of a crossing of `(0, 3n)` by R, in sites relative
/// to its start: `y[m]` is the first site where R = 3(m + 1), and
/// `straight_end[m]` tells whether R(y[m] − 3) = 3m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RCrossingSkeleton {
    pub y: Vec<i64>,
    pub straight_end: Vec<bool>,
}

/// A crossing of `(0, 3n)` by R: a simple walk from 0 conditioned to reach
/// 3n before returning to 0, which is the walk with up-probability
/// (x + 1) / 2x at x.
pub fn sample_r_crossing(rng: &mut Rng, n: usize) -> RCrossingSkeleton {
    let top = 3 * n as i64;
    let mut y = Vec::with_capacity(n);
    let mut straight_end = Vec::with_capacity(n);
    // last four values of R, newest at index (k % 4)
    let mut ring = [0i64; 4];
    let mut x = 0i64;
    let mut k = 0i64;
    while x < top {
        x = if x == 0 || rng.chance((x + 1) as u64, 2 * x as u64) { x + 1 } else { x - 1 };
        k += 1;
        ring[(k % 4) as usize] = x;
        if x == 3 * (y.len() as i64 + 1) {
            let m = y.len() as i64;
            y.push(k);
            straight_end.push(ring[((k + 1) % 4) as usize] == 3 * m && k >= 3);
        }
    }
    RCrossingSkeleton { y, straight_end }
}

/// Word of a crossing by S, entered from the start, of the crossing of R
/// summarized by `sk`. Only the last approach to each first-passage site is
/// simulated step by step; the rest uses gambler's-ruin probabilities.
pub fn sample_s_word(rng: &mut Rng, sk: &RCrossingSkeleton) -> AssociatedWord {
    let n = sk.y.len();
    let a = |m: usize| sk.y[m] - 3;
    'attempt: loop {
        let mut bits = Vec::with_capacity(n);
        let mut m = 0;
        loop {
            let am = a(m);
            if rng.bit() == 1 {
                let (mut x, mut len) = (1i64, 1usize);
                while x != 0 && x != 3 {
                    x += rng.step();
                    len += 1;
                }
                if x == 3 {
                    bits.push((len == 3 && sk.straight_end[m]) as u8);
                    m += 1;
                    if m == n {
                        return AssociatedWord::new(bits);
                    }
                    let (from, to) = (sk.y[m - 1], a(m));
                    if to > from && !rng.chance(from as u64, to as u64) {
                        continue 'attempt;
                    }
                } else if am == 0 {
                    continue 'attempt;
                }
            } else if am > 0 && !rng.chance((am - 1) as u64, am as u64) {
                continue 'attempt;
            }
        }
    }
}

/// Words of two crossings by R∘S of `(0, 3n)`: under H0 two independent
/// crossings by S of one crossing of R, under H1 one crossing by S of each
/// of two independent crossings of R.
pub fn sample_oracle_pair(seed: u64, n: usize, h: Decision) -> (AssociatedWord, AssociatedWord) {
    let mut rng = Rng::new(seed);
    let ra = sample_r_crossing(&mut rng, n);
    match h {
        Decision::H0 => {
            let wa = sample_s_word(&mut rng, &ra);
            let wb = sample_s_word(&mut rng, &ra);
            (wa, wb)
        }
        Decision::H1 => {
            let rb = sample_r_crossing(&mut rng, n);
            let wa = sample_s_word(&mut rng, &ra);
            let wb = sample_s_word(&mut rng, &rb);
            (wa, wb)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistic_bounded_and_seeded() {
        for seed in 0..50 {
            let a = mc_statistic(seed, seed + 1000, 1, 1, 1, 2, 1, 1_000_000);
            assert!(matches!(a, Some(0) | Some(1)));
            assert_eq!(a, mc_statistic(seed, seed + 1000, 1, 1, 1, 2, 1, 1_000_000));
            let b = mc_statistic(seed, seed + 1000, 3, 1, 1, 1, -1, 1_000_000).unwrap();
            assert!(b <= 3);
        }
    }

    #[test]
    fn tiny_horizon_gives_none() {
        assert_eq!(mc_statistic(1, 2, 8, 1, 1, 1, -1, 5), None);
    }

    #[test]
    fn skeleton_of_r_crossing() {
        let mut rng = Rng::new(5);
        for _ in 0..200 {
            let sk = sample_r_crossing(&mut rng, 5);
            assert_eq!(sk.y.len(), 5);
            assert!(sk.y[0] >= 3);
            for w in sk.y.windows(2) {
                assert!(w[1] - w[0] >= 3);
            }
        }
    }

    #[test]
    fn fully_straight_crossing_flags() {
        let sk = RCrossingSkeleton { y: vec![3, 6], straight_end: vec![true, true] };
        let mut rng = Rng::new(9);
        let mut ones = 0;
        for _ in 0..20_000 {
            ones += sample_s_word(&mut rng, &sk).bits[0] as usize;
        }
        let p = ones as f64 / 20_000.0;
        assert!((p - 0.75).abs() < 0.015, "{p}");
    }

    // Per-position rates of R's straight first passages: 3/4 each.
    #[test]
    fn r_straight_end_rate() {
        let mut rng = Rng::new(6);
        let mut ones = 0;
        let mut total = 0;
        for _ in 0..4000 {
            let sk = sample_r_crossing(&mut rng, 4);
            ones += sk.straight_end.iter().filter(|&&b| b).count();
            total += 4;
        }
        let p = ones as f64 / total as f64;
        assert!((p - 0.75).abs() < 0.015, "{p}");
    }
}
