//! The crossings of `(0, 3n)` by R nearest to the origin, which of them S
//! crosses first, and the true level-n piece between their far ends.

use serde::Serialize;

use crate::crossings::{index_crossings_r, Crossing};
use crate::walks::{represent, NNPath, Scenery};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleKeypoints {
    pub n: usize,
    /// First crossing of `(0, 3n)` by R at nonnegative sites.
    pub k_plus: Crossing,
    /// Last crossing of `(0, 3n)` by R at nonpositive sites.
    pub k_minus: Crossing,
    /// Whether S reaches `k_plus` first.
    pub a_is_plus: bool,
    pub k1a: i64,
    pub k2a: i64,
    pub k1c: i64,
    pub k2c: i64,
    /// Time S first stands on `k2a`.
    pub t2a: i64,
    /// ξ read site by site from `k2c` to `k2a`.
    pub xi_n: Vec<u8>,
    /// ξ read site by site from `k1c` to `k1a`.
    pub xi_n_k1: Vec<u8>,
}

impl OracleKeypoints {
    pub fn ka(&self) -> Crossing {
        if self.a_is_plus {
            self.k_plus
        } else {
            self.k_minus
        }
    }

    pub fn kc(&self) -> Crossing {
        if self.a_is_plus {
            self.k_minus
        } else {
            self.k_plus
        }
    }
}

pub fn oracle_keypoints(xi: &Scenery, s: &NNPath, n: usize) -> Option<OracleKeypoints> {
    let r = represent(xi).ok()?;
    oracle_keypoints_with(xi, &r, s, n)
}

/// Same as [`oracle_keypoints`] with R = represent(ξ) already computed.
pub fn oracle_keypoints_with(xi: &Scenery, r: &NNPath, s: &NNPath, n: usize) -> Option<OracleKeypoints> {
    let z = index_crossings_r(r, n);
    let k_plus = *z.get(1)?;
    let k_minus = *z.get(-1)?;
    let k = s.positions.iter().position(|&x| x == k_plus.t2 || x == k_minus.t2)?;
    let a_is_plus = s.positions[k] == k_plus.t2;
    let (ka, kc) = if a_is_plus { (k_plus, k_minus) } else { (k_minus, k_plus) };
    let read = |from: i64, to: i64| -> Option<Vec<u8>> {
        let u = if to >= from { 1 } else { -1 };
        (0..=(to - from).abs()).map(|i| xi.get(from + u * i)).collect()
    };
    Some(OracleKeypoints {
        n,
        k_plus,
        k_minus,
        a_is_plus,
        k1a: ka.t1,
        k2a: ka.t2,
        k1c: kc.t1,
        k2c: kc.t2,
        t2a: s.t0 + k as i64,
        xi_n: read(kc.t2, ka.t2)?,
        xi_n_k1: read(kc.t1, ka.t1)?,
    })
}
