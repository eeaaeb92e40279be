//! Exhaustive checks of the crossing decomposition, straightness and
//! first-crossing correspondence on simulated (R, S) pairs.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use super::derive_seed;
use crate::crossings::{decompose, find_crossings, first_crossing_during, Crossing};
use crate::error::Result;
use crate::walks::{compose, gen_scenery, gen_walk, represent, NNPath};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaCounts {
    pub decomposition: u64,
    pub converse: u64,
    pub straightness: u64,
    pub first_crossing: u64,
}

impl LemmaCounts {
    fn add(&mut self, o: &LemmaCounts) {
        self.decomposition += o.decomposition;
        self.converse += o.converse;
        self.straightness += o.straightness;
        self.first_crossing += o.first_crossing;
    }

    pub fn total(&self) -> u64 {
        self.decomposition + self.converse + self.straightness + self.first_crossing
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub instances: u64,
    pub steps: usize,
    pub crossings: u64,
    pub checked: LemmaCounts,
    pub violations: LemmaCounts,
    pub first_violation: Option<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.total() == 0
    }
}

struct Instance {
    crossings: u64,
    checked: LemmaCounts,
    violations: LemmaCounts,
    first: Option<String>,
}

fn check_instance(s: &NNPath, r: &NNPath, n: usize) -> Instance {
    let t = compose(r, s).expect("walk inside window");
    let top = 3 * n as i64;
    let mut out = Instance { crossings: 0, checked: LemmaCounts::default(), violations: LemmaCounts::default(), first: None };
    let fail = |out: &mut Instance, what: String| {
        if out.first.is_none() {
            out.first = Some(what);
        }
    };
    let tc = find_crossings(&t, 0, top);
    out.crossings = tc.len() as u64;
    for c in tc.iter() {
        out.checked.decomposition += 1;
        let k = match decompose(s, r, c) {
            Ok(k) => k,
            Err(e) => {
                out.violations.decomposition += 1;
                fail(&mut out, format!("n={n}: {e}"));
                continue;
            }
        };
        let by_s = Crossing { t1: c.t1, t2: c.t2, x1: k.t1, x2: k.t2 };
        out.checked.straightness += 1;
        if c.is_straight() != (by_s.is_straight() && k.is_straight()) {
            out.violations.straightness += 1;
            fail(&mut out, format!("n={n}: straightness of ({}, {})", c.t1, c.t2));
        }
        for m in 0..n as i64 {
            for (a, b) in [(3 * m, 3 * m + 3), (3 * m + 3, 3 * m)] {
                out.checked.first_crossing += 1;
                let direct = first_crossing_during(&t, c, a, b);
                let via = first_crossing_during(r, &k, a, b).and_then(|kk| first_crossing_during(s, &by_s, kk.t1, kk.t2));
                let same = match (direct, via) {
                    (Some(x), Some(y)) => (x.t1, x.t2) == (y.t1, y.t2),
                    _ => false,
                };
                if !same {
                    out.violations.first_crossing += 1;
                    fail(&mut out, format!("n={n}: first crossing of ({a}, {b}) during ({}, {})", c.t1, c.t2));
                }
            }
        }
    }
    let seen: HashSet<(i64, i64)> = tc.iter().map(|c| (c.t1, c.t2)).collect();
    for k in find_crossings(r, 0, top).iter() {
        for c in find_crossings(s, k.t1, k.t2).iter() {
            out.checked.converse += 1;
            if !seen.contains(&(c.t1, c.t2)) {
                out.violations.converse += 1;
                fail(&mut out, format!("n={n}: crossing ({}, {}) by S of ({}, {}) missing", c.t1, c.t2, k.t1, k.t2));
            }
        }
    }
    out
}

/// `instances` simulated pairs with n cycling through 1, 2, 3. The scenery
/// window is the range of S, so no walk leaves it.
pub fn verify_lemmas(seed: u64, instances: u64, steps: usize) -> Result<LemmaReport> {
    let per: Vec<Instance> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let s = gen_walk(derive_seed(seed, "lemmas-walk", i), steps);
            let (lo, hi) = s.min_max().expect("nonempty walk");
            let xi = gen_scenery(derive_seed(seed, "lemmas-scenery", i), lo, hi)?;
            let r = represent(&xi)?;
            Ok(check_instance(&s, &r, 1 + (i % 3) as usize))
        })
        .collect::<Result<_>>()?;
    let mut rep = LemmaReport {
        seed,
        instances,
        steps,
        crossings: 0,
        checked: LemmaCounts::default(),
        violations: LemmaCounts::default(),
        first_violation: None,
    };
    for inst in &per {
        rep.crossings += inst.crossings;
        rep.checked.add(&inst.checked);
        rep.violations.add(&inst.violations);
        if rep.first_violation.is_none() {
            rep.first_violation.clone_from(&inst.first);
        }
    }
    Ok(rep)
}
