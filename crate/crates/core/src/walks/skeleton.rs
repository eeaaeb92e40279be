//! Simple random walk that is simulated step by step only inside a set of
//! marked site intervals. Between marked intervals the walk jumps to the
//! next boundary it hits, with exact gambler's-ruin probabilities; an
//! excursion into an unbounded ray always returns.
//!
//! In conditioned mode excursions that leave a boundary and come back to it
//! are skipped too: from a boundary the walk picks the side it will cross
//! next (odds 1/width per side) and a crossing of a marked interval is drawn
//! directly as a walk conditioned to reach the far end.

use super::Rng;

/// A completed traversal of a marked interval from one endpoint to the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traversal {
    /// Index into [`SkeletonWalk::intervals`].
    pub interval: usize,
    /// Sites visited, from the start endpoint to the end endpoint.
    pub path: Vec<i64>,
}

impl Traversal {
    pub fn from(&self) -> i64 {
        self.path[0]
    }

    pub fn to(&self) -> i64 {
        *self.path.last().unwrap()
    }

    pub fn duration(&self) -> usize {
        self.path.len() - 1
    }
}

pub struct SkeletonWalk {
    rng: Rng,
    intervals: Vec<(i64, i64)>,
    bounds: Vec<i64>,
    // marked[j] covers (bounds[j], bounds[j + 1])
    marked: Vec<Option<usize>>,
    pos: i64,
    steps: u64,
    budget: u64,
    conditioned: bool,
}

impl SkeletonWalk {
    /// `intervals` are closed site intervals `(lo, hi)`, `lo < hi`, with
    /// pairwise disjoint interiors. Duplicates are merged.
    pub fn new(rng: Rng, intervals: &[(i64, i64)], start: i64, budget: u64) -> Self {
        let mut iv: Vec<(i64, i64)> = intervals.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        iv.sort_unstable();
        iv.dedup();
        let mut bounds: Vec<i64> = iv.iter().flat_map(|&(a, b)| [a, b]).collect();
        bounds.sort_unstable();
        bounds.dedup();
        let mut marked = vec![None; bounds.len().saturating_sub(1)];
        for (i, &(a, b)) in iv.iter().enumerate() {
            let j = bounds.binary_search(&a).unwrap();
            assert_eq!(bounds[j + 1], b, "marked intervals overlap");
            marked[j] = Some(i);
        }
        SkeletonWalk { rng, intervals: iv, bounds, marked, pos: start, steps: 0, budget, conditioned: false }
    }

    /// Same walk, with returning excursions skipped.
    pub fn conditioned(rng: Rng, intervals: &[(i64, i64)], start: i64, budget: u64) -> Self {
        SkeletonWalk { conditioned: true, ..Self::new(rng, intervals, start, budget) }
    }

    pub fn intervals(&self) -> &[(i64, i64)] {
        &self.intervals
    }

    pub fn interval_index(&self, lo: i64, hi: i64) -> Option<usize> {
        self.intervals.binary_search(&(lo.min(hi), lo.max(hi))).ok()
    }

    /// Explicit steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn position(&self) -> i64 {
        self.pos
    }

    /// Run until the next traversal of a marked interval; `None` once the
    /// step budget is spent.
    pub fn next_traversal(&mut self) -> Option<Traversal> {
        self.next_traversal_where(|_| true)
    }

    /// Like [`next_traversal`](Self::next_traversal), but in conditioned mode
    /// the path of a traversal of interval `i` is only drawn when `want(i)`;
    /// otherwise it is reported as its two endpoints.
    pub fn next_traversal_where(&mut self, want: impl Fn(usize) -> bool) -> Option<Traversal> {
        if self.bounds.is_empty() {
            return None;
        }
        loop {
            if self.steps >= self.budget {
                return None;
            }
            match self.bounds.binary_search(&self.pos) {
                Ok(j) if self.conditioned => {
                    if let Some(t) = self.cross_from(j, &want) {
                        return Some(t);
                    }
                }
                Ok(j) => {
                    let b = self.pos;
                    let d = self.rng.step();
                    self.steps += 1;
                    let seg = if d > 0 { Some(j) } else { j.checked_sub(1) };
                    let seg_marked = seg.and_then(|s| self.marked.get(s).copied().flatten());
                    match seg_marked {
                        Some(i) => {
                            if let Some(t) = self.excursion(i, b, b + d) {
                                return Some(t);
                            }
                        }
                        None => {
                            self.pos = b + d;
                            self.leave_gap();
                        }
                    }
                }
                Err(g) => {
                    let seg = g.checked_sub(1);
                    if let Some(i) = seg.and_then(|s| self.marked.get(s).copied().flatten()) {
                        // started inside a marked interval: no traversal yet
                        let (lo, hi) = self.intervals[i];
                        while self.pos != lo && self.pos != hi {
                            self.pos += self.rng.step();
                            self.steps += 1;
                        }
                    } else {
                        self.leave_gap();
                    }
                }
            }
        }
    }

    fn excursion(&mut self, i: usize, from: i64, first: i64) -> Option<Traversal> {
        let (lo, hi) = self.intervals[i];
        let mut path = vec![from, first];
        let mut x = first;
        while x != lo && x != hi {
            x += self.rng.step();
            self.steps += 1;
            path.push(x);
        }
        self.pos = x;
        if x != from {
            Some(Traversal { interval: i, path })
        } else {
            None
        }
    }

    // From boundary j, the next side crossed to its far end.
    fn cross_from(&mut self, j: usize, want: &impl Fn(usize) -> bool) -> Option<Traversal> {
        let b = self.bounds[j];
        let left = j.checked_sub(1).map(|k| b - self.bounds[k]);
        let right = self.bounds.get(j + 1).map(|&r| r - b);
        let go_right = match (left, right) {
            (Some(l), Some(r)) => self.rng.chance(l as u64, (l + r) as u64),
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (None, None) => unreachable!(),
        };
        self.steps += 1;
        let (seg, d, width) = if go_right { (j, 1, right.unwrap()) } else { (j - 1, -1, left.unwrap()) };
        match self.marked[seg] {
            None => {
                self.pos = b + d * width;
                None
            }
            Some(i) if !want(i) => {
                self.pos = b + d * width;
                Some(Traversal { interval: i, path: vec![b, self.pos] })
            }
            Some(i) => {
                // h-transform towards the far end: up-probability (x + 1) / 2x
                let mut path = Vec::with_capacity(width as usize + 1);
                path.push(b);
                let mut x = 0i64;
                while x < width {
                    x = if x == 0 || self.rng.chance((x + 1) as u64, 2 * x as u64) { x + 1 } else { x - 1 };
                    self.steps += 1;
                    path.push(b + d * x);
                }
                self.pos = b + d * width;
                Some(Traversal { interval: i, path })
            }
        }
    }

    // From a non-boundary site in an unmarked gap, move to the boundary hit first.
    fn leave_gap(&mut self) {
        let x = self.pos;
        let g = match self.bounds.binary_search(&x) {
            Ok(_) => return,
            Err(g) => g,
        };
        let left = g.checked_sub(1).map(|j| self.bounds[j]);
        let right = self.bounds.get(g).copied();
        self.pos = match (left, right) {
            (Some(l), Some(r)) => {
                if self.rng.chance((x - l) as u64, (r - l) as u64) {
                    r
                } else {
                    l
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!(),
        };
    }
}
