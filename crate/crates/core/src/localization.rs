//! The localization test on associated words, the stopping times at which
//! the walker is believed to stand on the far end of the first crossing,
//! and the estimate of the crossing that reaches the other side.

use serde::{Deserialize, Serialize};

use crate::crossings::{associated_word, find_crossings, AssociatedWord, Crossing};
use crate::error::{Error, Result};
use crate::walks::NNPath;

pub mod oracle;

/// c = ((3/4)³ + (3/4)⁴) / 2 = 189/512.
pub const C_NUM: u64 = 189;
pub const C_DEN: u64 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizationParams {
    pub n: usize,
}

impl LocalizationParams {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(LocalizationParams { n })
    }

    /// `dot > c·n`, exactly.
    pub fn exceeds_threshold(&self, dot: usize) -> bool {
        C_DEN * dot as u64 > C_NUM * self.n as u64
    }

    pub fn threshold(&self) -> f64 {
        C_NUM as f64 * self.n as f64 / C_DEN as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    H0,
    H1,
}

pub fn word_dot(a: &AssociatedWord, b: &AssociatedWord) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.bits.iter().zip(&b.bits).filter(|(&x, &y)| x == 1 && y == 1).count())
}

pub fn decide(a: &AssociatedWord, b: &AssociatedWord, params: &LocalizationParams) -> Result<Decision> {
    if a.len() != params.n {
        return Err(Error::LengthMismatch(a.len(), params.n));
    }
    let dot = word_dot(a, b)?;
    Ok(if params.exceeds_threshold(dot) { Decision::H0 } else { Decision::H1 })
}

/// Crossings of `(0, 3n)` by T in order of appearance, with their words.
#[derive(Clone, Debug, Default)]
pub struct LevelCrossings {
    pub n: usize,
    pub crossings: Vec<Crossing>,
    pub words: Vec<AssociatedWord>,
}

impl LevelCrossings {
    pub fn new(t: &NNPath, n: usize) -> Self {
        let crossings = find_crossings(t, 0, 3 * n as i64).crossings;
        let words = crossings
            .iter()
            .map(|c| associated_word(t, c, n).expect("interval (0, 3n) has length 3n"))
            .collect();
        LevelCrossings { n, crossings, words }
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingTime {
    pub time: i64,
    /// 1-based index of the generating crossing.
    pub j: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingTimes {
    pub times: Vec<StoppingTime>,
}

impl StoppingTimes {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// τ(i): the i-th t2ⱼ whose crossing passes the test against the first one.
pub fn tau_times(t: &NNPath, n: usize, max_i: usize) -> Result<StoppingTimes> {
    tau_times_from(&LevelCrossings::new(t, n), max_i)
}

pub fn tau_times_from(level: &LevelCrossings, max_i: usize) -> Result<StoppingTimes> {
    let params = LocalizationParams::new(level.n)?;
    let w1 = level.words.first().ok_or(Error::NoFirstCrossing(3 * level.n as i64))?;
    let mut times = Vec::new();
    for (j, (c, w)) in level.crossings.iter().zip(&level.words).enumerate() {
        if times.len() >= max_i {
            break;
        }
        // a negative crossing can end where the previous one ended
        if decide(w, w1, &params)? == Decision::H0 && times.last().is_none_or(|s: &StoppingTime| s.time < c.t2) {
            times.push(StoppingTime { time: c.t2, j: j + 1 });
        }
    }
    Ok(StoppingTimes { times })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TcEstimate {
    pub found: bool,
    pub crossing: Option<Crossing>,
    pub word: Option<AssociatedWord>,
    /// 1-based index among the crossings of `(0, 3n)`.
    pub index: Option<usize>,
}

impl TcEstimate {
    fn none() -> Self {
        TcEstimate { found: false, crossing: None, word: None, index: None }
    }
}

/// First crossing i > 1 that fails the test against crossing 1 while
/// crossing i − 1 is negative and passes it.
pub fn estimate_tc(t: &NNPath, n: usize, horizon: i64) -> TcEstimate {
    estimate_tc_from(&LevelCrossings::new(t, n), horizon)
}

pub fn estimate_tc_from(level: &LevelCrossings, horizon: i64) -> TcEstimate {
    let Ok(params) = LocalizationParams::new(level.n) else {
        return TcEstimate::none();
    };
    let Some(w1) = level.words.first() else {
        return TcEstimate::none();
    };
    let test = |w: &AssociatedWord| decide(w, w1, &params).unwrap_or(Decision::H1);
    for i in 1..level.len() {
        let (c, prev) = (level.crossings[i], level.crossings[i - 1]);
        if c.end() > horizon {
            break;
        }
        if test(&level.words[i]) == Decision::H1
            && prev.t1 > prev.t2
            && test(&level.words[i - 1]) == Decision::H0
        {
            return TcEstimate {
                found: true,
                crossing: Some(c),
                word: Some(level.words[i].clone()),
                index: Some(i + 1),
            };
        }
    }
    TcEstimate::none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossings::fixtures::*;
    use crate::walks::compose;
    use proptest::prelude::*;

    fn w(s: &str) -> AssociatedWord {
        AssociatedWord::new(s.bytes().map(|c| c - b'0').collect())
    }

    fn path(runs: &[(i64, usize)]) -> NNPath {
        let mut p = vec![0i64];
        for &(d, k) in runs {
            for _ in 0..k {
                p.push(p.last().unwrap() + d);
            }
        }
        NNPath::new(0, p).unwrap()
    }

    #[test]
    fn dot_examples() {
        assert_eq!(word_dot(&w("101"), &w("010")).unwrap(), 0);
        assert_eq!(word_dot(&w("101"), &w("100")).unwrap(), 1);
        assert_eq!(word_dot(&w("000"), &w("111")).unwrap(), 0);
        assert!(matches!(word_dot(&w("10"), &w("100")), Err(Error::LengthMismatch(2, 3))));
    }

    #[test]
    fn example_words_are_not_localized_together() {
        let r = example_r();
        let ta = compose(&r, &example_s_a()).unwrap();
        let tb = compose(&r, &example_s_b()).unwrap();
        let wa = associated_word(&ta, &Crossing { t1: 0, t2: 17, x1: 0, x2: 9 }, 3).unwrap();
        let wb = associated_word(&tb, &Crossing { t1: 100, t2: 125, x1: 0, x2: 9 }, 3).unwrap();
        assert_eq!(word_dot(&wa, &wb).unwrap(), 0);
    }

    #[test]
    fn decide_examples() {
        let p = LocalizationParams::new(3).unwrap();
        assert_eq!(decide(&w("100"), &w("110"), &p).unwrap(), Decision::H1);
        assert_eq!(decide(&w("110"), &w("110"), &p).unwrap(), Decision::H0);
        assert_eq!(decide(&w("000"), &w("111"), &p).unwrap(), Decision::H1);
        assert!(decide(&w("11"), &w("11"), &p).is_err());
        assert!(LocalizationParams::new(0).is_err());
    }

    #[test]
    fn threshold_is_exact_rational() {
        // 189·n/512 is never an integer for n < 512
        for n in 1..512usize {
            let p = LocalizationParams::new(n).unwrap();
            let floor = (189 * n) / 512;
            assert!(!p.exceeds_threshold(floor));
            assert!(p.exceeds_threshold(floor + 1));
        }
        let p400 = LocalizationParams::new(400).unwrap();
        assert!(!p400.exceeds_threshold(147) && p400.exceeds_threshold(148));
    }

    #[test]
    fn tau_includes_first_crossing() {
        // word of the first crossing: straight, detour, straight = 101
        let t = path(&[(1, 5), (-1, 1), (1, 5)]);
        let level = LevelCrossings::new(&t, 3);
        assert_eq!(level.words[0], w("101"));
        let tau = tau_times(&t, 3, 5).unwrap();
        assert_eq!(tau.times, vec![StoppingTime { time: level.crossings[0].t2, j: 1 }]);
    }

    #[test]
    fn tau_requires_a_crossing() {
        let t = path(&[(1, 5), (-1, 5)]);
        assert_eq!(tau_times(&t, 3, 5), Err(Error::NoFirstCrossing(9)));
    }

    #[test]
    fn tau_with_failing_self_test() {
        // a single crossing whose word is 000 never passes against itself
        let mut runs: Vec<(i64, usize)> = [(1, 2), (-1, 1)].iter().cycle().take(14).copied().collect();
        runs.push((1, 2));
        let t = path(&runs);
        let level = LevelCrossings::new(&t, 3);
        assert_eq!(level.len(), 1);
        assert_eq!(level.words[0], w("000"));
        assert!(tau_times(&t, 3, 5).unwrap().is_empty());
    }

    #[test]
    fn tc_needs_two_crossings() {
        let t = path(&[(1, 9)]);
        assert!(!estimate_tc(&t, 3, 1_000).found);
    }

    // crossing words: 1: 111, 2 (positive): 000, 3 (negative): 111, 4 (positive): 000
    fn tc_path() -> NNPath {
        let zig = [(1, 2), (-1, 1), (1, 2)];
        let mut runs = vec![(1, 9), (-1, 9)];
        runs.extend(zig.iter().cycle().take(9).copied());
        runs.push((-1, 9));
        runs.extend(zig.iter().cycle().take(9).copied());
        path(&runs)
    }

    #[test]
    fn tc_skips_positive_predecessor() {
        let t = tc_path();
        let level = LevelCrossings::new(&t, 3);
        let signs: Vec<_> = level.crossings.iter().map(|c| c.is_positive()).collect();
        assert_eq!(signs, vec![true, false, true, false, true]);
        let words: Vec<_> = level.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["111", "111", "000", "111", "000"]);
        // i = 3 has an H0 negative predecessor; i = 2 itself passes the test
        let est = estimate_tc(&t, 3, i64::MAX);
        assert!(est.found);
        assert_eq!(est.index, Some(3));
        assert_eq!(est.crossing, Some(level.crossings[2]));
        assert_eq!(est.word, Some(w("000")));
        assert!(!estimate_tc(&t, 3, level.crossings[2].end() - 1).found);
    }

    #[test]
    fn tc_by_direct_conditions() {
        // brute evaluation of the three conditions against estimate_tc
        let t = crate::walks::gen_walk(77, 200_000);
        for n in 1..4 {
            let level = LevelCrossings::new(&t, n);
            let p = LocalizationParams::new(n).unwrap();
            let est = estimate_tc_from(&level, i64::MAX);
            let expect = (1..level.len()).find(|&i| {
                decide(&level.words[i], &level.words[0], &p).unwrap() == Decision::H1
                    && level.crossings[i - 1].t1 > level.crossings[i - 1].t2
                    && decide(&level.words[i - 1], &level.words[0], &p).unwrap() == Decision::H0
            });
            assert_eq!(est.index, expect.map(|i| i + 1));
        }
    }

    fn arb_word(n: usize) -> impl Strategy<Value = AssociatedWord> {
        proptest::collection::vec(0u8..2, n).prop_map(AssociatedWord::new)
    }

    proptest! {
        #[test]
        fn dot_bounds_and_symmetry((a, b) in (1usize..40).prop_flat_map(|n| (arb_word(n), arb_word(n)))) {
            let d = word_dot(&a, &b).unwrap();
            prop_assert!(d <= a.popcount().min(b.popcount()));
            prop_assert!(d <= a.len());
            let p = LocalizationParams::new(a.len()).unwrap();
            prop_assert_eq!(decide(&a, &b, &p).unwrap(), decide(&b, &a, &p).unwrap());
        }
    }
}
