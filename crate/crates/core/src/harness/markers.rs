//! The four-color marker illustration: with a 2 placed at x and a 3 at y,
//! the shortest 2-to-3 lapse in the record reads the scenery between them.

use crate::error::{Error, Result};

/// Interior of the closest pair `(t1, t2)`, `t1 < t2`, with `χ4(t1) = 2` and
/// `χ4(t2) = 3`; the earliest pair wins ties.
pub fn marker_demo(chi4: &[u8]) -> Result<Vec<u8>> {
    let mut last_two = None;
    let mut best: Option<(usize, usize)> = None;
    for (t, &c) in chi4.iter().enumerate() {
        match c {
            2 => last_two = Some(t),
            3 => {
                if let Some(t1) = last_two {
                    if best.is_none_or(|(a, b)| t - t1 < b - a) {
                        best = Some((t1, t));
                    }
                }
            }
            0 | 1 => {}
            other => return Err(Error::InvalidArgument(format!("marker record value {other} outside 0..=3"))),
        }
    }
    let (t1, t2) = best.ok_or(Error::NoMarkerPair)?;
    Ok(chi4[t1 + 1..t2].to_vec())
}
