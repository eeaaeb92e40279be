//! Python bindings. Scenery and paths cross the boundary as `(offset, values)`
//! pairs; bit sequences come back as `bytes` and reports as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use scenery_lab::crossings::{self, AssociatedWord, Crossing};
use scenery_lab::harness::{self, TrialConfig};
use scenery_lab::localization::{self, Decision, LocalizationParams};
use scenery_lab::reconstruct;
use scenery_lab::walks::{self, NNPath, Observations, Scenery};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(err)
}

fn decision(mode: &str) -> PyResult<Decision> {
    match mode.to_ascii_lowercase().as_str() {
        "h0" => Ok(Decision::H0),
        "h1" => Ok(Decision::H1),
        _ => Err(PyValueError::new_err(format!("mode must be 'h0' or 'h1', got {mode:?}"))),
    }
}

#[pyfunction]
fn derive_seed(master: u64, stream: &str, index: u64) -> u64 {
    harness::derive_seed(master, stream, index)
}

/// Fair-coin scenery on `[lo, hi]` as `(offset, bits)`.
#[pyfunction]
fn gen_scenery(seed: u64, lo: i64, hi: i64) -> PyResult<(i64, Vec<u8>)> {
    let xi = walks::gen_scenery(seed, lo, hi).map_err(err)?;
    Ok((xi.offset, xi.bits))
}

/// Simple random walk positions at times `0..=steps`.
#[pyfunction]
fn gen_walk(seed: u64, steps: usize) -> Vec<i64> {
    walks::gen_walk(seed, steps).positions
}

#[pyfunction]
fn observe(offset: i64, bits: Vec<u8>, walk: Vec<i64>) -> PyResult<Vec<u8>> {
    let xi = Scenery::new(offset, bits).map_err(err)?;
    let s = NNPath::new(0, walk).map_err(err)?;
    Ok(walks::observe(&xi, &s).map_err(err)?.bits)
}

/// R on the sites `offset..offset + len(bits)`.
#[pyfunction]
fn represent(offset: i64, bits: Vec<u8>) -> PyResult<Vec<i64>> {
    let xi = Scenery::new(offset, bits).map_err(err)?;
    Ok(walks::represent(&xi).map_err(err)?.positions)
}

/// T = R∘S from a color record, using φ fixed by its first color.
#[pyfunction]
fn lift(chi: Vec<u8>) -> PyResult<Vec<i64>> {
    let first = *chi.first().ok_or_else(|| PyValueError::new_err("empty record"))?;
    let obs = Observations::new(chi).map_err(err)?;
    Ok(walks::lift(&obs, &walks::phi_of(first)).map_err(err)?.positions)
}

/// Crossings of `(x1, x2)` by the path starting at time `t0`, as `(t1, t2)`.
#[pyfunction]
fn find_crossings(t0: i64, positions: Vec<i64>, x1: i64, x2: i64) -> PyResult<Vec<(i64, i64)>> {
    let p = NNPath::new(t0, positions).map_err(err)?;
    Ok(crossings::find_crossings(&p, x1, x2).iter().map(|c| (c.t1, c.t2)).collect())
}

#[pyfunction]
fn associated_word(t0: i64, positions: Vec<i64>, t1: i64, t2: i64, n: usize) -> PyResult<Vec<u8>> {
    let p = NNPath::new(t0, positions).map_err(err)?;
    let c = Crossing { t1, t2, x1: p.at(t1).unwrap_or(0), x2: p.at(t2).unwrap_or(0) };
    if !crossings::is_crossing(&p, &c) {
        return Err(PyValueError::new_err(format!("({t1}, {t2}) is not a crossing")));
    }
    Ok(crossings::associated_word(&p, &c, n).map_err(err)?.bits)
}

/// "H0" when `a × b > c·n`, else "H1".
#[pyfunction]
fn decide(a: Vec<u8>, b: Vec<u8>) -> PyResult<&'static str> {
    let params = LocalizationParams::new(a.len()).map_err(err)?;
    let d = localization::decide(&AssociatedWord::new(a), &AssociatedWord::new(b), &params).map_err(err)?;
    Ok(match d {
        Decision::H0 => "H0",
        Decision::H1 => "H1",
    })
}

#[pyfunction]
fn transpose(w: Vec<u8>) -> Vec<u8> {
    reconstruct::transpose(&w)
}

#[pyfunction]
fn contains(v: Vec<u8>, w: Vec<u8>) -> Vec<(usize, usize)> {
    reconstruct::contains(&v, &w)
}

#[pyfunction]
fn uniquely_contains(v: Vec<u8>, w: Vec<u8>) -> bool {
    reconstruct::uniquely_contains(&v, &w)
}

#[pyfunction]
fn marker_demo(chi4: Vec<u8>) -> PyResult<Vec<u8>> {
    harness::marker_demo(&chi4).map_err(err)
}

#[pyfunction]
fn mc_straight_prob(seed: u64, count: u64) -> PyResult<String> {
    json(&harness::mc_straight_prob(seed, count).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (seed, n, trials, mode, horizon = 10_000_000))]
fn mc_lemma8(py: Python<'_>, seed: u64, n: usize, trials: u64, mode: &str, horizon: u64) -> PyResult<String> {
    let h = decision(mode)?;
    let s = py.detach(|| harness::mc_lemma8(seed, n, trials, h, horizon)).map_err(err)?;
    json(&s)
}

#[pyfunction]
fn localization_error(py: Python<'_>, seed: u64, n: usize, pairs: u64) -> PyResult<String> {
    json(&py.detach(|| harness::localization_error(seed, n, pairs)).map_err(err)?)
}

#[pyfunction]
fn verify_lemmas(py: Python<'_>, seed: u64, instances: u64, steps: usize) -> PyResult<String> {
    json(&py.detach(|| harness::verify_lemmas(seed, instances, steps)).map_err(err)?)
}

/// One trial report for a JSON config.
#[pyfunction]
fn run_trial(py: Python<'_>, config: &str, index: u64) -> PyResult<String> {
    let cfg = TrialConfig::from_json(config).map_err(err)?;
    json(&py.detach(|| harness::run_trial(&cfg, index)))
}

#[pymodule]
#[pyo3(name = "scenery_lab")]
fn scenery_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(gen_scenery, m)?)?;
    m.add_function(wrap_pyfunction!(gen_walk, m)?)?;
    m.add_function(wrap_pyfunction!(observe, m)?)?;
    m.add_function(wrap_pyfunction!(represent, m)?)?;
    m.add_function(wrap_pyfunction!(lift, m)?)?;
    m.add_function(wrap_pyfunction!(find_crossings, m)?)?;
    m.add_function(wrap_pyfunction!(associated_word, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(transpose, m)?)?;
    m.add_function(wrap_pyfunction!(contains, m)?)?;
    m.add_function(wrap_pyfunction!(uniquely_contains, m)?)?;
    m.add_function(wrap_pyfunction!(marker_demo, m)?)?;
    m.add_function(wrap_pyfunction!(mc_straight_prob, m)?)?;
    m.add_function(wrap_pyfunction!(mc_lemma8, m)?)?;
    m.add_function(wrap_pyfunction!(localization_error, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemmas, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    Ok(())
}
