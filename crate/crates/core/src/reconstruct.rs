//! Level-n reconstruction of a scenery piece from the color record alone,
//! word containment, and assembly of nested pieces into one scenery.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crossings::Crossing;
use crate::error::{Error, Result};
use crate::localization::{estimate_tc_from, tau_times_from, LevelCrossings};
use crate::walks::{lift, phi_of, NNPath, Observations, Scenery};

pub fn transpose(w: &[u8]) -> Vec<u8> {
    w.iter().rev().copied().collect()
}

/// All ordered pairs `(j1, j2)` such that reading `w` from `j1` to `j2` in unit
/// steps spells `v`.
pub fn contains(v: &[u8], w: &[u8]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let k = v.len();
    if k == 0 || k > w.len() {
        return out;
    }
    for j1 in 0..w.len() {
        if j1 + k <= w.len() && w[j1..j1 + k] == *v {
            out.push((j1, j1 + k - 1));
        }
        if k > 1 && j1 + 1 >= k && w[j1 + 1 - k..=j1].iter().rev().eq(v.iter()) {
            out.push((j1, j1 + 1 - k));
        }
    }
    out.sort_unstable();
    out
}

pub fn uniquely_contains(v: &[u8], w: &[u8]) -> bool {
    contains(v, w).len() == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelParams {
    pub n: usize,
    pub n_loc: usize,
    #[serde(rename = "I_max")]
    pub i_max: usize,
    #[serde(rename = "W")]
    pub w: i64,
    pub horizon: i64,
}

impl LevelParams {
    pub fn new(n: usize, n_loc: usize, i_max: usize, w: i64, horizon: i64) -> Result<Self> {
        let p = LevelParams { n, n_loc, i_max, w, horizon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n_loc < self.n || self.i_max < 1 || self.w < 1 || self.horizon < 0 {
            return Err(Error::InvalidArgument(format!("invalid level parameters {self:?}")));
        }
        Ok(())
    }
}

/// The asymptotic parameter choices at level n, in log10 where they
/// overflow: n̄ = n^10.89, ṅ = n^11, window n^220, budget e^n̄.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PaperScale {
    pub n_bar: f64,
    pub n_dot: f64,
    pub log10_window: f64,
    pub log10_budget: f64,
}

pub fn paper_scale(n: usize) -> PaperScale {
    let n = n as f64;
    let n_bar = n.powf(10.89);
    PaperScale {
        n_bar,
        n_dot: n.powi(11),
        log10_window: 220.0 * n.log10(),
        log10_budget: n_bar * std::f64::consts::LOG10_E,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    NoFirstCrossing,
    NoTcEstimate,
    NoCandidatePair,
    HorizonExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub level: usize,
    pub word: Vec<u8>,
    pub s: i64,
    pub r: i64,
}

/// Serialized form of a level outcome: `{level, word, s, r, reason?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceRecord {
    pub level: usize,
    pub word: Option<Vec<u8>>,
    pub s: Option<i64>,
    pub r: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<FailureReason>,
}

impl PieceRecord {
    pub fn new(level: usize, outcome: &std::result::Result<Piece, FailureReason>) -> Self {
        match outcome {
            Ok(p) => PieceRecord { level, word: Some(p.word.clone()), s: Some(p.s), r: Some(p.r), reason: None },
            Err(e) => PieceRecord { level, word: None, s: None, r: None, reason: Some(*e) },
        }
    }
}

/// Everything the level-n search derives from T, kept for diagnostics.
#[derive(Clone, Debug)]
pub struct LevelSearch {
    pub t: NNPath,
    pub level: LevelCrossings,
    pub loc: LevelCrossings,
}

impl LevelSearch {
    pub fn new(chi: &Observations, p: &LevelParams) -> Option<Self> {
        let first = *chi.bits.first()?;
        let end = (p.horizon.max(0) as usize).saturating_add(1).min(chi.len());
        let head = Observations { bits: chi.bits[..end].to_vec() };
        let t = lift(&head, &phi_of(first)).ok()?;
        let level = LevelCrossings::new(&t, p.n);
        let loc = if p.n_loc == p.n { level.clone() } else { LevelCrossings::new(&t, p.n_loc) };
        Some(LevelSearch { t, level, loc })
    }
}

/// Find `(s, r)` minimizing `(r − s, s)` such that some stopping window
/// `[τ(i), τ(i) + W]`, i ≤ I_max, contains both, `s` ends a negative crossing
/// of `(0, 3n)` whose word dominates ŵ_c, `r` ends a positive crossing whose
/// word dominates w_a, and the first crossing is over before the second
/// begins. Returns χ(s..=r).
pub fn reconstruct_level(chi: &Observations, p: &LevelParams) -> std::result::Result<Piece, FailureReason> {
    let search = LevelSearch::new(chi, p).ok_or(FailureReason::NoFirstCrossing)?;
    reconstruct_from(chi, p, &search)
}

pub fn reconstruct_from(chi: &Observations, p: &LevelParams, search: &LevelSearch) -> std::result::Result<Piece, FailureReason> {
    let level = &search.level;
    let wa = level.words.first().ok_or(FailureReason::NoFirstCrossing)?;
    let tc = estimate_tc_from(level, p.horizon);
    let wc = tc.word.as_ref().ok_or(FailureReason::NoTcEstimate)?;
    let tau = tau_times_from(&search.loc, p.i_max).map_err(|_| FailureReason::HorizonExhausted)?;
    if tau.is_empty() {
        return Err(FailureReason::HorizonExhausted);
    }

    let pick = |pos: bool, w| -> Vec<Crossing> {
        level
            .crossings
            .iter()
            .zip(&level.words)
            .filter(|(c, word)| c.is_positive() == pos && word.dominates(w))
            .map(|(c, _)| *c)
            .collect()
    };
    // (s1, s2) with s2 < s1, ordered by s2; (r1, r2) with r1 < r2, ordered by r1
    let s_cands = pick(false, wc);
    let r_cands = pick(true, wa);

    let mut best: Option<(i64, i64)> = None;
    for st in &tau.times {
        let lo = st.time;
        let hi = st.time.saturating_add(p.w);
        let first = s_cands.partition_point(|c| c.t2 < lo);
        for sc in s_cands[first..].iter().take_while(|c| c.t2 <= hi) {
            let k = r_cands.partition_point(|c| c.t1 < sc.t1);
            let Some(rc) = r_cands.get(k) else { break };
            if rc.t2 > hi {
                continue;
            }
            let cand = (rc.t2 - sc.t2, sc.t2);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    let (len, s) = best.ok_or(FailureReason::NoCandidatePair)?;
    let r = s + len;
    Ok(Piece { level: p.n, word: chi.bits[s as usize..=r as usize].to_vec(), s, r })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assembled {
    pub n0: usize,
    pub placements: BTreeMap<usize, (i64, i64)>,
    pub window: (i64, i64),
    pub bits: Vec<u8>,
}

impl Assembled {
    pub fn scenery(&self) -> Scenery {
        Scenery { offset: self.window.0, bits: self.bits.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum AssembleFailure {
    MissingLevel { level: usize },
    NotUniquelyContained { level: usize, matches: usize },
}

impl AssembleFailure {
    pub fn level(&self) -> usize {
        match self {
            AssembleFailure::MissingLevel { level } | AssembleFailure::NotUniquelyContained { level, .. } => *level,
        }
    }
}

/// Place each piece over the previous one, starting with the level-`n0`
/// piece on `[0, l]`.
pub fn assemble(pieces: &[Piece], n0: usize) -> std::result::Result<Assembled, AssembleFailure> {
    let by_level: BTreeMap<usize, &Piece> = pieces.iter().filter(|p| p.level >= n0).map(|p| (p.level, p)).collect();
    let top = *by_level.keys().next_back().ok_or(AssembleFailure::MissingLevel { level: n0 })?;
    let first = by_level.get(&n0).ok_or(AssembleFailure::MissingLevel { level: n0 })?;
    let mut bits = first.word.clone();
    let mut window = (0i64, bits.len() as i64 - 1);
    let mut placements = BTreeMap::from([(n0, window)]);
    for level in n0 + 1..=top {
        let next = &by_level.get(&level).ok_or(AssembleFailure::MissingLevel { level })?.word;
        let found = contains(&bits, next);
        if found.len() != 1 {
            return Err(AssembleFailure::NotUniquelyContained { level, matches: found.len() });
        }
        let (j1, j2) = found[0];
        let l = next.len() as i64 - 1;
        let d1 = window.0;
        let forward = j1 <= j2;
        let d1n = if forward { d1 - j1 as i64 } else { d1 + j1 as i64 - l };
        bits = if forward { next.clone() } else { transpose(next) };
        window = (d1n, d1n + l);
        placements.insert(level, window);
    }
    Ok(Assembled { n0, placements, window, bits })
}

/// Whether `a` embeds into `b` under some shift and reflection.
pub fn equivalent(a: &Scenery, b: &Scenery) -> bool {
    for sign in [1i64, -1] {
        let (img_lo, img_hi) = if sign == 1 { (a.lo(), a.hi()) } else { (-a.hi(), -a.lo()) };
        for shift in b.lo() - img_lo..=b.hi() - img_hi {
            if (a.lo()..=a.hi()).all(|x| a.get(x) == b.get(shift + sign * x)) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    // exhaustive double loop over ordered pairs
    fn brute_contains(v: &[u8], w: &[u8]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j1 in 0..w.len() {
            for j2 in 0..w.len() {
                let u: i64 = if j2 >= j1 { 1 } else { -1 };
                let len = (j2 as i64 - j1 as i64).unsigned_abs() as usize + 1;
                if len == v.len() && (0..len).all(|i| w[(j1 as i64 + u * i as i64) as usize] == v[i]) {
                    out.push((j1, j2));
                }
            }
        }
        out
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(transpose(&w("011")), w("110"));
        assert_eq!(transpose(&w("010")), w("010"));
    }

    #[test]
    fn containment_examples() {
        assert_eq!(contains(&w("011"), &w("00110")), vec![(1, 3), (4, 2)]);
        assert_eq!(contains(&w("011"), &w("00111")), vec![(1, 3)]);
        assert_eq!(contains(&w("010"), &w("0100")), vec![(0, 2), (2, 0)]);
        assert!(!uniquely_contains(&w("011"), &w("00110")));
        assert!(uniquely_contains(&w("011"), &w("00111")));
        assert!(!uniquely_contains(&w("010"), &w("0100")));
        assert!(!uniquely_contains(&w("0"), &w("00")));
        let v = w("0110");
        assert_eq!(contains(&v, &v), vec![(0, 3), (3, 0)]);
        let v = w("0111");
        assert_eq!(contains(&v, &v), vec![(0, 3)]);
    }

    #[test]
    fn assemble_example() {
        let pieces = [
            Piece { level: 1, word: w("011"), s: 0, r: 2 },
            Piece { level: 2, word: w("00111"), s: 0, r: 4 },
        ];
        let a = assemble(&pieces, 1).unwrap();
        assert_eq!(a.window, (-1, 3));
        assert_eq!(a.bits, w("00111"));
        assert_eq!(a.placements, BTreeMap::from([(1, (0, 2)), (2, (-1, 3))]));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"n0":1,"placements":{"1":[0,2],"2":[-1,3]},"window":[-1,3],"bits":[0,0,1,1,1]}"#);
    }

    #[test]
    fn assemble_reversed_placement() {
        let pieces = [
            Piece { level: 1, word: w("011"), s: 0, r: 2 },
            Piece { level: 2, word: w("11100"), s: 0, r: 4 },
        ];
        let a = assemble(&pieces, 1).unwrap();
        assert_eq!(a.window, (-1, 3));
        assert_eq!(a.bits, w("00111"));
    }

    #[test]
    fn assemble_identical_and_failures() {
        let v = w("0111");
        let pieces = [
            Piece { level: 3, word: v.clone(), s: 0, r: 3 },
            Piece { level: 4, word: v.clone(), s: 0, r: 3 },
        ];
        let a = assemble(&pieces, 3).unwrap();
        assert_eq!(a.placements[&3], a.placements[&4]);
        assert_eq!(a.bits, v);
        let twice = [Piece { level: 1, word: w("011"), s: 0, r: 2 }, Piece { level: 2, word: w("0111011"), s: 0, r: 6 }];
        assert_eq!(assemble(&twice, 1), Err(AssembleFailure::NotUniquelyContained { level: 2, matches: 3 }));
        let gap = [Piece { level: 1, word: w("011"), s: 0, r: 2 }, Piece { level: 3, word: w("00111"), s: 0, r: 4 }];
        assert_eq!(assemble(&gap, 1), Err(AssembleFailure::MissingLevel { level: 2 }));
    }

    #[test]
    fn equivalence_examples() {
        let xi = Scenery::new(-3, w("0010111")).unwrap();
        assert!(equivalent(&xi, &xi));
        let mirror = Scenery::new(5, transpose(&xi.bits)).unwrap();
        assert!(equivalent(&xi, &mirror));
        assert!(!equivalent(&Scenery::new(0, w("011")).unwrap(), &Scenery::new(0, w("000")).unwrap()));
        assert!(equivalent(&Scenery::new(0, w("110")).unwrap(), &Scenery::new(-9, w("10011")).unwrap()));
    }

    #[test]
    fn no_crossing_means_no_first_crossing() {
        // T stays on {0, 1}
        let phi = phi_of(0);
        let chi = Observations::new((0..50).map(|t| phi.at(t % 2)).collect()).unwrap();
        let p = LevelParams::new(1, 1, 10, 100, 1000).unwrap();
        assert_eq!(reconstruct_level(&chi, &p), Err(FailureReason::NoFirstCrossing));
        let empty = Observations::new(vec![]).unwrap();
        assert_eq!(reconstruct_level(&empty, &p), Err(FailureReason::NoFirstCrossing));
    }

    fn chi_of(t: &[i64]) -> Observations {
        let phi = phi_of(0);
        Observations::new(t.iter().map(|&x| phi.at(x)).collect()).unwrap()
    }

    fn runs(r: &[(i64, usize)]) -> Vec<i64> {
        let mut p = vec![0i64];
        for &(d, k) in r {
            for _ in 0..k {
                p.push(p.last().unwrap() + d);
            }
        }
        p
    }

    #[test]
    fn reconstruct_hand_built() {
        // n = 1: crossings (0,3) (6,3) (6,11) (14,11) (14,17) with words 1 1 0 1 1
        let t = runs(&[(1, 3), (-1, 3), (1, 2), (-1, 1), (1, 2), (-1, 3), (1, 3)]);
        let chi = chi_of(&t);
        let p = LevelParams::new(1, 1, 10, 100, 1000).unwrap();
        let search = LevelSearch::new(&chi, &p).unwrap();
        assert_eq!(search.t.positions, t);
        let words: Vec<_> = search.level.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["1", "1", "0", "1", "1"]);
        let piece = reconstruct_level(&chi, &p).unwrap();
        // tc is crossing 3, so ŵ_c = 0; (14, 11) pairs with (14, 17)
        assert_eq!((piece.s, piece.r), (11, 17));
        assert_eq!(piece.word, chi.bits[11..=17].to_vec());
        assert_eq!(piece.word.len() as i64, piece.r - piece.s + 1);
    }

    #[test]
    fn tie_break_prefers_smaller_s() {
        // two pairs of equal length: the earlier one wins
        let t = runs(&[(1, 3), (-1, 3), (1, 2), (-1, 1), (1, 2), (-1, 3), (1, 3), (-1, 3), (1, 3)]);
        let chi = chi_of(&t);
        let p = LevelParams::new(1, 1, 10, 100, 1000).unwrap();
        let piece = reconstruct_level(&chi, &p).unwrap();
        assert_eq!((piece.s, piece.r), (11, 17));
        // a window too short for the first pair leaves only the second
        let late = LevelParams::new(1, 1, 10, 6, 1000).unwrap();
        assert_eq!(reconstruct_level(&chi, &late).map(|p| (p.s, p.r)), Ok((11, 17)));
    }

    #[test]
    fn paper_scale_values() {
        let ps = paper_scale(2);
        assert_eq!(ps.n_dot, 2048.0);
        assert!((ps.log10_window - 220.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn piece_record_json() {
        let ok = PieceRecord::new(3, &Ok(Piece { level: 3, word: vec![0, 1], s: 4, r: 5 }));
        assert_eq!(serde_json::to_string(&ok).unwrap(), r#"{"level":3,"word":[0,1],"s":4,"r":5}"#);
        let bad = PieceRecord::new(3, &Err(FailureReason::NoTcEstimate));
        assert_eq!(
            serde_json::to_string(&bad).unwrap(),
            r#"{"level":3,"word":null,"s":null,"r":null,"reason":"no-tc-estimate"}"#
        );
    }

    fn word(max: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..2, 1..=max)
    }

    proptest! {
        #[test]
        fn contains_matches_brute_force(v in word(6), w in word(16)) {
            prop_assert_eq!(contains(&v, &w), brute_contains(&v, &w));
        }

        #[test]
        fn reversal_symmetry(v in word(5), w in word(14)) {
            let fwd = contains(&v, &w);
            let mut rev: Vec<_> = contains(&transpose(&v), &w).into_iter().map(|(a, b)| (b, a)).collect();
            rev.sort_unstable();
            prop_assert_eq!(fwd, rev);
        }

        #[test]
        fn transpose_involution(v in word(20)) {
            prop_assert_eq!(transpose(&transpose(&v)), v);
        }

        // nest a ⪯ b ⪯ c ⪯ d by padding; a ⪯₁ d forces b ⪯₁ c
        #[test]
        fn sandwich(a in word(6), pads in proptest::collection::vec(word(4), 6), flips in proptest::collection::vec(any::<bool>(), 3)) {
            let grow = |x: &[u8], l: &[u8], r: &[u8], flip: bool| {
                let mut y = l.to_vec();
                y.extend_from_slice(x);
                y.extend_from_slice(r);
                if flip { transpose(&y) } else { y }
            };
            let b = grow(&a, &pads[0], &pads[1], flips[0]);
            let c = grow(&b, &pads[2], &pads[3], flips[1]);
            let d = grow(&c, &pads[4], &pads[5], flips[2]);
            if uniquely_contains(&a, &d) {
                prop_assert!(uniquely_contains(&b, &c));
            }
        }

        #[test]
        fn assembled_matches_nested_source(src in word(40), cuts in proptest::collection::vec((0usize..8, 0usize..8, any::<bool>()), 3)) {
            // pieces cut from one source, each containing the previous
            let mut spans = vec![(src.len() / 2, src.len() / 2)];
            for &(l, r, _) in &cuts {
                let &(a, b) = spans.last().unwrap();
                spans.push((a.saturating_sub(l), (b + r).min(src.len() - 1)));
            }
            let pieces: Vec<Piece> = spans.iter().enumerate().map(|(i, &(a, b))| {
                let word = src[a..=b].to_vec();
                let word = if i > 0 && cuts[i - 1].2 { transpose(&word) } else { word };
                Piece { level: i + 1, word, s: 0, r: (b - a) as i64 }
            }).collect();
            let chained = pieces.windows(2).all(|p| uniquely_contains(&p[0].word, &p[1].word));
            match assemble(&pieces, 1) {
                Ok(asm) => {
                    prop_assert!(chained);
                    let (a, b) = *spans.last().unwrap();
                    let truth = Scenery::new(a as i64, src[a..=b].to_vec()).unwrap();
                    prop_assert!(equivalent(&asm.scenery(), &truth));
                    for (lvl, &(d1, d2)) in &asm.placements {
                        prop_assert_eq!((d2 - d1 + 1) as usize, pieces[lvl - 1].word.len());
                    }
                }
                Err(_) => prop_assert!(!chained),
            }
        }
    }
}
