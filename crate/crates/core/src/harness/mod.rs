//! Ground-truth oracles, Monte Carlo drivers, per-trial event diagnostics
//! and the four-color marker demo. Everything here may look at ξ, S and R.

use sha2::{Digest, Sha256};

pub mod keypoints;
pub mod lemmas;
pub mod markers;
pub mod montecarlo;
pub mod trial;

pub use keypoints::{oracle_keypoints, oracle_keypoints_with, OracleKeypoints};
pub use lemmas::{verify_lemmas, LemmaReport};
pub use markers::marker_demo;
pub use montecarlo::{
    localization_error, mc_lemma8, mc_observable, mc_straight_prob, Lemma8Summary, LocalizationErrors,
    ObservableSummary, StraightEstimate,
};
pub use trial::{run_trial, sweep, EventFlags, Flag, LevelReport, TrialConfig, TrialReport};

/// Seed for item `index` of `stream`: SHA-256 of master ‖ len(stream) ‖
/// stream ‖ index, first 8 bytes little-endian.
pub fn derive_seed(master: u64, stream: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((stream.len() as u64).to_le_bytes());
    h.update(stream.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&d[..8]);
    u64::from_le_bytes(b)
}

/// Worker count from `SCENERY_LAB_THREADS`; 0 or unset means automatic.
pub fn threads_from_env() -> usize {
    std::env::var("SCENERY_LAB_THREADS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}
