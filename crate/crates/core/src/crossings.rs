//! Crossings of an interval by a nearest-neighbor walk, first crossings
//! during another crossing, and the binary word attached to a crossing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::walks::NNPath;

/// `(t1, t2)` is a crossing of `(x1, x2)`: T(t1) = x1, T(t2) = x2 and T stays
/// strictly between x1 and x2 in between. Negative crossings have t2 < t1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize)]
pub struct Crossing {
    pub t1: i64,
    pub t2: i64,
    pub x1: i64,
    pub x2: i64,
}

impl Crossing {
    pub fn is_positive(&self) -> bool {
        self.t2 > self.t1
    }

    pub fn is_straight(&self) -> bool {
        (self.t1 - self.t2).abs() == (self.x1 - self.x2).abs()
    }

    pub fn start(&self) -> i64 {
        self.t1.min(self.t2)
    }

    pub fn end(&self) -> i64 {
        self.t1.max(self.t2)
    }

    pub fn duration(&self) -> i64 {
        (self.t1 - self.t2).abs()
    }
}

impl Serialize for Crossing {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Rec {
            t1: i64,
            t2: i64,
            x1: i64,
            x2: i64,
            straight: bool,
            positive: bool,
        }
        Rec {
            t1: self.t1,
            t2: self.t2,
            x1: self.x1,
            x2: self.x2,
            straight: self.is_straight(),
            positive: self.is_positive(),
        }
        .serialize(s)
    }
}

pub fn is_straight(c: &Crossing) -> bool {
    c.is_straight()
}

/// Crossings in order of appearance. `get(i)` is 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CrossingList {
    pub crossings: Vec<Crossing>,
}

impl CrossingList {
    pub fn get(&self, i: usize) -> Option<&Crossing> {
        i.checked_sub(1).and_then(|k| self.crossings.get(k))
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Crossing> {
        self.crossings.iter()
    }
}

/// Definitional check of a crossing against a path.
pub fn is_crossing(path: &NNPath, c: &Crossing) -> bool {
    if c.x1 == c.x2 || path.at(c.t1) != Some(c.x1) || path.at(c.t2) != Some(c.x2) {
        return false;
    }
    let (lo, hi) = (c.x1.min(c.x2), c.x1.max(c.x2));
    (c.start() + 1..c.end()).all(|t| {
        let x = path.pos(t);
        x > lo && x < hi
    })
}

pub fn find_crossings(path: &NNPath, x1: i64, x2: i64) -> CrossingList {
    find_crossings_between(path, x1, x2, path.t0, path.t_end())
}

/// Crossings of `(x1, x2)` with both times inside `[from, to]`.
pub fn find_crossings_between(path: &NNPath, x1: i64, x2: i64, from: i64, to: i64) -> CrossingList {
    assert_ne!(x1, x2, "crossing walls must differ");
    let mut out = Vec::new();
    let from = from.max(path.t0);
    let to = to.min(path.t_end());
    if from > to {
        return CrossingList { crossings: out };
    }
    let seg = &path.positions[(from - path.t0) as usize..=(to - path.t0) as usize];
    // last wall visited: (time, true if x1)
    let mut last: Option<(i64, bool)> = None;
    for (k, &x) in seg.iter().enumerate() {
        let at1 = x == x1;
        if !at1 && x != x2 {
            continue;
        }
        let t = from + k as i64;
        if let Some((p, was1)) = last {
            if was1 != at1 {
                let c = if was1 {
                    Crossing { t1: p, t2: t, x1, x2 }
                } else {
                    Crossing { t1: t, t2: p, x1, x2 }
                };
                out.push(c);
            }
        }
        last = Some((t, at1));
    }
    CrossingList { crossings: out }
}

/// The crossing of `(x3, x4)` lying in the time span of `outer` that is
/// closest to `outer.t1`.
pub fn first_crossing_during(path: &NNPath, outer: &Crossing, x3: i64, x4: i64) -> Option<Crossing> {
    let inner = find_crossings_between(path, x3, x4, outer.start(), outer.end());
    if outer.is_positive() {
        inner.crossings.first().copied()
    } else {
        inner.crossings.last().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssociatedWord {
    pub bits: Vec<u8>,
}

impl AssociatedWord {
    pub fn new(bits: Vec<u8>) -> Self {
        AssociatedWord { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Bitwise `self ≥ other`.
    pub fn dominates(&self, other: &AssociatedWord) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(a, b)| a >= b)
    }
}

impl std::fmt::Display for AssociatedWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn word_geometry(c: &Crossing, n: usize) -> Result<i64> {
    let d = c.x2 - c.x1;
    if d == 0 || d % 3 != 0 {
        return Err(Error::IntervalNotMultipleOf3 { x1: c.x1, x2: c.x2 });
    }
    if (d / 3).unsigned_abs() as usize != n {
        return Err(Error::LengthMismatch((d / 3).unsigned_abs() as usize, n));
    }
    Ok(d.signum())
}

/// Bit m is 1 iff the first crossing during `c` of the m-th length-3
/// subinterval, counted from x1, is straight.
///
/// One scan from t1 towards t2: the first crossing of
/// `(x1 + 3m·u, x1 + 3(m+1)·u)` ends at the first passage h to the far wall,
/// and it is straight iff the walk sat on the near wall at h − 3.
pub fn associated_word(t: &NNPath, c: &Crossing, n: usize) -> Result<AssociatedWord> {
    let u = word_geometry(c, n)?;
    let dir = if c.is_positive() { 1 } else { -1 };
    let mut bits = Vec::with_capacity(n);
    let mut time = c.t1;
    for m in 0..n as i64 {
        let near = c.x1 + 3 * m * u;
        let far = near + 3 * u;
        while t.pos(time) != far {
            time += dir;
        }
        bits.push((t.pos(time - 3 * dir) == near) as u8);
    }
    Ok(AssociatedWord { bits })
}

/// Same word, computed literally through [`first_crossing_during`].
pub fn associated_word_by_definition(t: &NNPath, c: &Crossing, n: usize) -> Result<AssociatedWord> {
    let u = word_geometry(c, n)?;
    let bits = (0..n as i64)
        .map(|m| {
            let near = c.x1 + 3 * m * u;
            first_crossing_during(t, c, near, near + 3 * u).is_some_and(|f| f.is_straight()) as u8
        })
        .collect();
    Ok(AssociatedWord { bits })
}

/// Crossings of `(0, 3n)` by R indexed by z ≠ 0: z > 0 counts forward from
/// site 0, z < 0 counts backward from site 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ZIndexedCrossings {
    pub by_z: BTreeMap<i64, Crossing>,
}

impl ZIndexedCrossings {
    pub fn get(&self, z: i64) -> Option<&Crossing> {
        self.by_z.get(&z)
    }
}

pub fn index_crossings_r(r: &NNPath, n: usize) -> ZIndexedCrossings {
    let x2 = 3 * n as i64;
    let mut by_z = BTreeMap::new();
    if r.contains_time(0) {
        let fwd = find_crossings_between(r, 0, x2, 0, r.t_end());
        for (i, c) in fwd.crossings.into_iter().enumerate() {
            by_z.insert(i as i64 + 1, c);
        }
        let bwd = find_crossings_between(r, 0, x2, r.t0, 0);
        for (i, c) in bwd.crossings.into_iter().rev().enumerate() {
            by_z.insert(-(i as i64) - 1, c);
        }
    }
    ZIndexedCrossings { by_z }
}

/// Split a crossing of R∘S into the crossing `(S(t1), S(t2))` by R.
pub fn decompose(s: &NNPath, r: &NNPath, c: &Crossing) -> Result<Crossing> {
    let bad = Error::DecompositionViolated { t1: c.t1, t2: c.t2 };
    let (k1, k2) = match (s.at(c.t1), s.at(c.t2)) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => return Err(bad),
    };
    let by_s = Crossing { t1: c.t1, t2: c.t2, x1: k1, x2: k2 };
    let by_r = Crossing { t1: k1, t2: k2, x1: c.x1, x2: c.x2 };
    if is_crossing(s, &by_s) && is_crossing(r, &by_r) {
        Ok(by_r)
    } else {
        Err(bad)
    }
}
