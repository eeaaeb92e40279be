//! Sceneries, simple random walks, the color record and the representation
//! of a two-color scenery as a nearest-neighbor walk over a 4-periodic scenery.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod skeleton;

/// Seeded generator. ChaCha8 keyed through `seed_from_u64`, so a seed fixes
/// the whole stream.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
    buf: u64,
    left: u32,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { seed, inner: ChaCha8Rng::seed_from_u64(seed), buf: 0, left: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One fair bit; bits are drawn 64 at a time.
    #[inline]
    pub fn bit(&mut self) -> u8 {
        if self.left == 0 {
            self.buf = self.inner.next_u64();
            self.left = 64;
        }
        let b = (self.buf & 1) as u8;
        self.buf >>= 1;
        self.left -= 1;
        b
    }

    /// A fair ±1 step.
    #[inline]
    pub fn step(&mut self) -> i64 {
        if self.bit() == 1 {
            1
        } else {
            -1
        }
    }

    /// Exact Bernoulli(num/den).
    #[inline]
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        debug_assert!(den > 0 && num <= den);
        if num == den {
            return true;
        }
        self.inner.random_range(0..den) < num
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenery {
    pub offset: i64,
    pub bits: Vec<u8>,
}

impl Scenery {
    pub fn new(offset: i64, bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyWindow { lo: offset, hi: offset - 1 });
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b as i64));
        }
        Ok(Scenery { offset, bits })
    }

    pub fn lo(&self) -> i64 {
        self.offset
    }

    pub fn hi(&self) -> i64 {
        self.offset + self.bits.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains_site(&self, x: i64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    pub fn get(&self, x: i64) -> Option<u8> {
        if self.contains_site(x) {
            Some(self.bits[(x - self.offset) as usize])
        } else {
            None
        }
    }

    /// Restriction to `[lo, hi]` (clamped to the window).
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Scenery> {
        let lo = lo.max(self.lo());
        let hi = hi.min(self.hi());
        if lo > hi {
            return Err(Error::EmptyWindow { lo, hi });
        }
        let a = (lo - self.offset) as usize;
        let b = (hi - self.offset) as usize;
        Ok(Scenery { offset: lo, bits: self.bits[a..=b].to_vec() })
    }

    pub fn to_text(&self) -> String {
        write_text(self.offset, self.bits.iter().map(|&b| b as i64))
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let (offset, vals) = read_text(s)?;
        let bits = vals
            .into_iter()
            .map(|v| if v == 0 || v == 1 { Ok(v as u8) } else { Err(Error::InvalidBit(v)) })
            .collect::<Result<Vec<u8>>>()?;
        Scenery::new(offset, bits)
    }
}

/// Integer-time nearest-neighbor walk on `[t0, t0 + len - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NNPath {
    pub t0: i64,
    pub positions: Vec<i64>,
}

impl NNPath {
    pub fn new(t0: i64, positions: Vec<i64>) -> Result<Self> {
        if let Some(index) = positions.windows(2).position(|w| (w[1] - w[0]).abs() != 1) {
            return Err(Error::NotNearestNeighbor { index });
        }
        Ok(NNPath { t0, positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn t_end(&self) -> i64 {
        self.t0 + self.positions.len() as i64 - 1
    }

    pub fn contains_time(&self, t: i64) -> bool {
        t >= self.t0 && t <= self.t_end()
    }

    pub fn at(&self, t: i64) -> Option<i64> {
        if self.contains_time(t) {
            Some(self.positions[(t - self.t0) as usize])
        } else {
            None
        }
    }

    /// Position at `t`; panics outside the time range.
    #[inline]
    pub fn pos(&self, t: i64) -> i64 {
        self.positions[(t - self.t0) as usize]
    }

    /// Sub-path on `[a, b]` keeping absolute times.
    pub fn slice(&self, a: i64, b: i64) -> NNPath {
        let a = a.max(self.t0);
        let b = b.min(self.t_end());
        if a > b {
            return NNPath { t0: a, positions: Vec::new() };
        }
        NNPath {
            t0: a,
            positions: self.positions[(a - self.t0) as usize..=(b - self.t0) as usize].to_vec(),
        }
    }

    pub fn min_max(&self) -> Option<(i64, i64)> {
        let lo = *self.positions.iter().min()?;
        let hi = *self.positions.iter().max()?;
        Some((lo, hi))
    }

    pub fn to_text(&self) -> String {
        write_text(self.t0, self.positions.iter().copied())
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let (t0, vals) = read_text(s)?;
        NNPath::new(t0, vals)
    }
}

fn write_text(offset: i64, vals: impl Iterator<Item = i64>) -> String {
    let mut out = format!("offset {offset}\n");
    for v in vals {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

fn read_text(s: &str) -> Result<(i64, Vec<i64>)> {
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    let offset = header
        .strip_prefix("offset")
        .map(str::trim)
        .and_then(|v| v.parse::<i64>().ok())
        .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
    let vals = lines
        .map(|l| l.parse::<i64>().map_err(|e| Error::Parse(format!("{l:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((offset, vals))
}

/// The 4-periodic scenery φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicScenery {
    pub base: [u8; 4],
}

impl PeriodicScenery {
    #[inline]
    pub fn at(&self, x: i64) -> u8 {
        self.base[x.rem_euclid(4) as usize]
    }

    /// The neighbor of `x` carrying `color`.
    #[inline]
    pub fn next(&self, x: i64, color: u8) -> i64 {
        if self.at(x + 1) == color {
            x + 1
        } else {
            x - 1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observations {
    pub bits: Vec<u8>,
}

impl Observations {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b as i64));
        }
        Ok(Observations { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn gen_scenery(seed: u64, lo: i64, hi: i64) -> Result<Scenery> {
    if lo > hi {
        return Err(Error::EmptyWindow { lo, hi });
    }
    if lo > 0 || hi < 0 {
        return Err(Error::WindowExcludesOrigin { lo, hi });
    }
    let mut rng = Rng::new(seed);
    let bits = (lo..=hi).map(|_| rng.bit()).collect();
    Ok(Scenery { offset: lo, bits })
}

pub fn gen_walk(seed: u64, steps: usize) -> NNPath {
    let mut rng = Rng::new(seed);
    let mut positions = Vec::with_capacity(steps + 1);
    let mut x = 0i64;
    positions.push(x);
    for _ in 0..steps {
        x += rng.step();
        positions.push(x);
    }
    NNPath { t0: 0, positions }
}

pub fn observe(xi: &Scenery, s: &NNPath) -> Result<Observations> {
    let mut bits = Vec::with_capacity(s.len());
    for (k, &x) in s.positions.iter().enumerate() {
        match xi.get(x) {
            Some(b) => bits.push(b),
            None => return Err(Error::WalkExitsWindow { time: s.t0 + k as i64, site: x }),
        }
    }
    Ok(Observations { bits })
}

pub fn phi_of(xi0: u8) -> PeriodicScenery {
    if xi0 == 0 {
        PeriodicScenery { base: [0, 0, 1, 1] }
    } else {
        PeriodicScenery { base: [1, 1, 0, 0] }
    }
}

pub fn eval_periodic(phi: &PeriodicScenery, x: i64) -> u8 {
    phi.at(x)
}

/// R with R(0) = 0 and φ∘R = ξ, indexed by the sites of ξ's window.
pub fn represent(xi: &Scenery) -> Result<NNPath> {
    let x0 = xi.get(0).ok_or(Error::WindowExcludesOrigin { lo: xi.lo(), hi: xi.hi() })?;
    let phi = phi_of(x0);
    let zero = (-xi.offset) as usize;
    let mut pos = vec![0i64; xi.len()];
    for k in zero + 1..xi.len() {
        pos[k] = phi.next(pos[k - 1], xi.bits[k]);
    }
    for k in (0..zero).rev() {
        pos[k] = phi.next(pos[k + 1], xi.bits[k]);
    }
    Ok(NNPath { t0: xi.offset, positions: pos })
}

/// Recover T = R∘S from the color record.
pub fn lift(chi: &Observations, phi: &PeriodicScenery) -> Result<NNPath> {
    let mut positions = Vec::with_capacity(chi.len());
    if let Some(&c0) = chi.bits.first() {
        if c0 != phi.at(0) {
            return Err(Error::ColorMismatchAtOrigin { observed: c0, expected: phi.at(0) });
        }
        let mut x = 0i64;
        positions.push(x);
        for &c in &chi.bits[1..] {
            x = phi.next(x, c);
            positions.push(x);
        }
    }
    Ok(NNPath { t0: 0, positions })
}

/// Pointwise composition `outer ∘ inner`; `None` if inner leaves outer's domain.
pub fn compose(outer: &NNPath, inner: &NNPath) -> Option<NNPath> {
    let positions = inner.positions.iter().map(|&k| outer.at(k)).collect::<Option<Vec<_>>>()?;
    Some(NNPath { t0: inner.t0, positions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn table_representation() {
        let xi = Scenery::new(-4, bits("101000111001")).unwrap();
        let r = represent(&xi).unwrap();
        assert_eq!(r.t0, -4);
        assert_eq!(&r.positions[4..], &[0, 1, 2, 3, 2, 1, 0, -1]);
        assert_eq!(&r.positions[..5], &[2, 1, 2, 1, 0]);
    }

    #[test]
    fn single_site_representation() {
        let r = represent(&Scenery::new(0, vec![1]).unwrap()).unwrap();
        assert_eq!(r.positions, vec![0]);
    }

    #[test]
    fn table_lift() {
        let chi = Observations::new(bits("01011000101")).unwrap();
        let t = lift(&chi, &phi_of(0)).unwrap();
        assert_eq!(t.positions, vec![0, -1, 0, -1, -2, -3, -4, -3, -2, -3, -2]);
    }

    #[test]
    fn lift_forced_and_trivial() {
        let phi = phi_of(0);
        let chi = Observations::new(vec![phi.at(0), phi.at(1), phi.at(2)]).unwrap();
        assert_eq!(lift(&chi, &phi).unwrap().positions, vec![0, 1, 2]);
        let one = Observations::new(vec![phi.at(0)]).unwrap();
        assert_eq!(lift(&one, &phi).unwrap().positions, vec![0]);
        let bad = Observations::new(vec![1]).unwrap();
        assert!(matches!(lift(&bad, &phi), Err(Error::ColorMismatchAtOrigin { .. })));
    }

    #[test]
    fn phi_bases() {
        assert_eq!(phi_of(0).base, [0, 0, 1, 1]);
        assert_eq!(phi_of(1).base, [1, 1, 0, 0]);
        for b in 0..2 {
            let p = phi_of(b);
            assert_eq!(p.at(-1), 1 - p.at(1));
            for x in -20..20 {
                assert_ne!(p.at(x - 1), p.at(x + 1));
            }
        }
        assert_eq!(eval_periodic(&phi_of(0), 2), 1);
        assert_eq!(eval_periodic(&phi_of(0), -1), 1);
        assert_eq!(eval_periodic(&phi_of(1), 4), 1);
    }

    #[test]
    fn observe_examples() {
        let xi = Scenery::new(0, bits("00111001")).unwrap();
        let straight = NNPath::new(0, (0..8).collect()).unwrap();
        assert_eq!(observe(&xi, &straight).unwrap().bits, bits("00111001"));
        assert_eq!(observe(&xi, &NNPath::new(0, vec![0]).unwrap()).unwrap().bits, vec![0]);
        assert_eq!(observe(&xi, &NNPath::new(0, vec![0, 1, 0]).unwrap()).unwrap().bits, vec![0, 0, 0]);
        let out = NNPath::new(0, vec![0, -1]).unwrap();
        assert_eq!(observe(&xi, &out), Err(Error::WalkExitsWindow { time: 1, site: -1 }));
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(gen_scenery(5, -4, 7).unwrap(), gen_scenery(5, -4, 7).unwrap());
        assert_eq!(gen_scenery(5, 0, 0).unwrap().len(), 1);
        assert!(matches!(gen_scenery(1, 1, 3), Err(Error::WindowExcludesOrigin { .. })));
        assert!(matches!(gen_scenery(1, 2, 1), Err(Error::EmptyWindow { .. })));
        assert_eq!(gen_walk(9, 0).positions, vec![0]);
        assert_eq!(gen_walk(9, 100), gen_walk(9, 100));
    }

    #[test]
    fn fair_bits_and_steps() {
        let xi = gen_scenery(11, 0, 999_999).unwrap();
        let ones = xi.bits.iter().map(|&b| b as u64).sum::<u64>() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&ones), "{ones}");
        let s = gen_walk(12, 1_000_000);
        let ups = s.positions.windows(2).filter(|w| w[1] > w[0]).count() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&ups), "{ups}");
    }

    #[test]
    fn representation_increments_are_fair() {
        let xi = gen_scenery(13, -1_000_000, 1_000_000).unwrap();
        let r = represent(&xi).unwrap();
        let zero = 1_000_000usize;
        let right = &r.positions[zero..];
        let left: Vec<i64> = r.positions[..=zero].iter().rev().copied().collect();
        for side in [right, &left[..]] {
            let ups = side.windows(2).filter(|w| w[1] > w[0]).count() as f64 / (side.len() - 1) as f64;
            assert!((0.49..=0.51).contains(&ups), "{ups}");
        }
    }

    #[test]
    fn text_round_trip() {
        let xi = Scenery::new(-2, bits("0110")).unwrap();
        assert_eq!(xi.to_text(), "offset -2\n0\n1\n1\n0\n");
        assert_eq!(Scenery::from_text(&xi.to_text()).unwrap(), xi);
        let p = NNPath::new(3, vec![0, 1, 0, -1]).unwrap();
        assert_eq!(NNPath::from_text(&p.to_text()).unwrap(), p);
        assert!(NNPath::from_text("offset 0\n0\n2\n").is_err());
        assert!(Scenery::from_text("0\n1\n").is_err());
        assert_eq!(serde_json::to_string(&xi).unwrap(), r#"{"offset":-2,"bits":[0,1,1,0]}"#);
    }

    #[test]
    fn rng_chance_is_exact_at_edges() {
        let mut rng = Rng::new(3);
        assert!(rng.chance(4, 4));
        assert!(!(0..100).any(|_| rng.chance(0, 7)));
    }
}
