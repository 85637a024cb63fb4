//! Browser front end: three small computations behind `wasm-bindgen`.
//!
//! Every export takes plain numbers or text and returns a JSON string, so the
//! page needs no glue beyond `JSON.parse`. The `*_json` functions are the same
//! computations as ordinary Rust and are what the tests call.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spin7_core::form::multi_indices;
use spin7_core::{AltForm, CayleyStructure, Space};
use spin7_dynamics::{ActionParams, Flow, FlowConfig, Scheme};
use spin7_fields::{FrameFamily, LatticeSpec};
use spin7_linear::{check_ellipticity, linearized_action_kernel, Momentum};
use wasm_bindgen::prelude::*;

/// Parse `ijkl: value` terms, one per line or comma separated.
/// Indices are single digits 0..7; `#` starts a comment.
pub fn parse_terms(text: &str) -> Result<AltForm, String> {
    let mut form = AltForm::zeros(4);
    for raw in text.split(['\n', ',', ';']) {
        let item = raw.split('#').next().unwrap_or("").trim();
        if item.is_empty() {
            continue;
        }
        let (idx, val) = item.split_once([':', '=']).ok_or_else(|| format!("expected 'ijkl: value', got '{item}'"))?;
        let val: f64 = val.trim().parse().map_err(|_| format!("bad coefficient in '{item}'"))?;
        let mut digits: Vec<usize> = Vec::new();
        for c in idx.trim().chars().filter(|c| !c.is_whitespace()) {
            let d = c.to_digit(10).filter(|d| *d < 8).ok_or_else(|| format!("bad index '{c}' in '{item}'"))?;
            digits.push(d as usize);
        }
        if digits.len() != 4 {
            return Err(format!("'{item}' needs four indices"));
        }
        // sort, tracking the sign of the permutation
        let mut sign = 1.0;
        for i in 0..4 {
            for j in 0..3 - i {
                if digits[j] > digits[j + 1] {
                    digits.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("'{item}' repeats an index"));
        }
        form.axpy(sign * val, &AltForm::from_terms(4, &[(1.0, &digits)]));
    }
    Ok(form)
}

/// The inverse of [`parse_terms`]: nonzero components as text.
pub fn format_terms(form: &AltForm) -> String {
    let mut out = String::new();
    for (idx, v) in multi_indices(4).iter().zip(form.comp()) {
        if v.abs() > 1e-12 {
            let name: String = idx.iter().map(|i| char::from(b'0' + *i as u8)).collect();
            out.push_str(&format!("{name}: {}\n", round(*v)));
        }
    }
    out
}

fn round(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Serialize)]
struct Piece {
    space: String,
    dim: usize,
    eigenvalue: f64,
    norm: f64,
    fraction: f64,
    /// `max |J(part) - λ part|`
    residual: f64,
}

#[derive(Serialize)]
struct DecompositionOut {
    norm: f64,
    pieces: Vec<Piece>,
    reconstruction: f64,
    spectrum: Vec<(f64, usize)>,
}

fn space_name(s: Space) -> &'static str {
    match s {
        Space::L4_1 => "Λ⁴₁",
        Space::L4_7 => "Λ⁴₇",
        Space::L4_27 => "Λ⁴₂₇",
        Space::L4_35 => "Λ⁴₃₅",
        _ => "?",
    }
}

pub fn decompose_json(text: &str) -> Result<String, String> {
    let form = parse_terms(text)?;
    let cs = CayleyStructure::reference();
    let dec = cs.decompose(&form).map_err(|e| e.to_string())?;
    let j = cs.j_operator(4).map_err(|e| e.to_string())?;
    let norm = form.dot(&form).sqrt();
    let pieces = dec
        .parts
        .iter()
        .map(|(s, p)| {
            let n = p.dot(p).sqrt();
            Piece {
                space: space_name(*s).into(),
                dim: s.dim(),
                eigenvalue: s.eigenvalue(),
                norm: n,
                fraction: if norm > 0.0 { n * n / (norm * norm) } else { 0.0 },
                residual: j.apply(p).sub(&p.scale(s.eigenvalue())).max_abs(),
            }
        })
        .collect();
    let out = DecompositionOut {
        norm,
        pieces,
        reconstruction: dec.sum().sub(&form).max_abs(),
        spectrum: j.spectrum(1e-8).into_iter().map(|(v, m)| (round(v), m)).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn reference_terms() -> String {
    format_terms(CayleyStructure::reference().phi())
}

pub fn random_terms(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = spin7_core::random::random_form(4, &mut rng);
    format_terms(&w.scale(0.25))
}

#[derive(Serialize)]
struct KappaPoint {
    kappa: f64,
    rho: f64,
    mu: f64,
    /// `6/D`, the factor between the action kernel and the `(ρ, μ)` family
    scale: f64,
    /// restricted eigenvalues of the `(ρ, μ)` kernel over `|p|²`, ascending
    eigenvalues: Vec<f64>,
    negative: usize,
    zero: usize,
    /// negative count for the action kernel itself, which carries the sign of `6/D`
    action_negative: usize,
    elliptic: bool,
}

/// Restricted spectrum of the linearized action at `n` values of κ.
/// Points too close to the singular values κ = 1 and κ = -6 are skipped.
pub fn kappa_scan_json(from: f64, to: f64, n: usize) -> Result<String, String> {
    if n < 2 || n > 400 || !(from < to) {
        return Err("need from < to and 2 ≤ n ≤ 400".into());
    }
    let p: Momentum = spin7_linear::generic_momentum();
    let mut points = Vec::new();
    for i in 0..n {
        let kappa = from + (to - from) * i as f64 / (n - 1) as f64;
        let Ok(la) = linearized_action_kernel(kappa, p) else { continue };
        if la.scale.abs() > 1e3 {
            continue;
        }
        let rep = check_ellipticity(p, &la.coeffs());
        let eigenvalues: Vec<f64> = rep.restricted.iter().map(|v| round(*v)).collect();
        let top = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * top.max(1.0);
        let negative = eigenvalues.iter().filter(|v| **v < -tol).count();
        let zero = eigenvalues.iter().filter(|v| v.abs() <= tol).count();
        points.push(KappaPoint {
            kappa,
            rho: la.rho,
            mu: la.mu,
            scale: la.scale,
            negative,
            zero,
            action_negative: if la.scale > 0.0 { negative } else { eigenvalues.len() - negative - zero },
            eigenvalues,
            elliptic: rep.elliptic,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct FlowOut {
    dt: f64,
    sign: f64,
    time: Vec<f64>,
    action: Vec<f64>,
    max_torsion: Vec<f64>,
    min_det: Vec<f64>,
}

/// Explicit flow of a near-flat one-dimensional field.
pub fn flow_json(seed: u64, amplitude: f64, kappa: f64, points: usize, steps: usize) -> Result<String, String> {
    if !(8..=64).contains(&points) || steps > 2000 {
        return Err("points must be in 8..=64 and steps at most 2000".into());
    }
    let spec = LatticeSpec::new(1, points, 2).map_err(|e| e.to_string())?;
    let frames = FrameFamily::near_flat(seed, 1, amplitude).sample(&spec).map_err(|e| e.to_string())?;
    let params = ActionParams::new(kappa, 0.0).map_err(|e| e.to_string())?;
    let mut flow = Flow::new(spec, frames, FlowConfig::new(params, Scheme::Euler, steps)).map_err(|e| e.to_string())?;
    let records = flow.run(|_| {}).map_err(|e| e.to_string())?;
    let out = FlowOut {
        dt: flow.dt(),
        sign: flow.sign(),
        time: records.iter().map(|r| r.time).collect(),
        action: records.iter().map(|r| r.action).collect(),
        max_torsion: records.iter().map(|r| r.max_torsion).collect(),
        min_det: records.iter().map(|r| r.min_det).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Split a 4-form, given as `ijkl: value` terms, into its Λ⁴ pieces.
#[wasm_bindgen]
pub fn decompose(terms: &str) -> Result<String, JsError> {
    js(decompose_json(terms))
}

#[wasm_bindgen(js_name = referenceForm)]
pub fn reference_form() -> String {
    reference_terms()
}

#[wasm_bindgen(js_name = randomForm)]
pub fn random_form(seed: u32) -> String {
    random_terms(seed as u64)
}

#[wasm_bindgen(js_name = kappaScan)]
pub fn kappa_scan(from: f64, to: f64, n: u32) -> Result<String, JsError> {
    js(kappa_scan_json(from, to, n as usize))
}

#[wasm_bindgen]
pub fn flow(seed: u32, amplitude: f64, kappa: f64, points: u32, steps: u32) -> Result<String, JsError> {
    js(flow_json(seed as u64, amplitude, kappa, points as usize, steps as usize))
}
