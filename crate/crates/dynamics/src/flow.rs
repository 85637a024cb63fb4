//! Explicit gradient flow of the lattice action on the Cayley orbit.
//!
//! Frames move by `∂_t E = E·V` with `V = -G/√g` (see
//! [`LatticeState::velocity`]); `Φ = E·Φ₀` stays a Cayley form because only
//! the frame is evolved. Splitting `V = h + ξ/4` into symmetric and Λ²₇
//! parts gives the usual `(h, ξ)` description.

use crate::action::PartNorms;
use crate::lattice::LatticeState;
use crate::params::ActionParams;
use crate::DynError;
use serde::{Deserialize, Serialize};
use spin7_core::Mat8;
use spin7_fields::{LatticeSpec, MIN_DET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk2,
}

impl std::str::FromStr for Scheme {
    type Err = DynError;
    fn from_str(s: &str) -> Result<Self, DynError> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "rk2" | "heun" => Ok(Scheme::Rk2),
            _ => Err(DynError::Params(format!("unknown scheme '{s}'"))),
        }
    }
}

fn default_cfl() -> f64 {
    0.1
}

fn default_det() -> f64 {
    MIN_DET
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub params: ActionParams,
    pub scheme: Scheme,
    pub steps: usize,
    /// Defaults to `cfl·h²`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_det")]
    pub det_threshold: f64,
    /// Flip the direction if a trial first step raises the action.
    #[serde(default = "yes")]
    pub sign_check: bool,
}

impl FlowConfig {
    pub fn new(params: ActionParams, scheme: Scheme, steps: usize) -> Self {
        FlowConfig { params, scheme, steps, dt: None, cfl: default_cfl(), det_threshold: default_det(), sign_check: true }
    }

    pub fn time_step(&self, spec: &LatticeSpec) -> Result<f64, DynError> {
        let h = spec.spacing();
        let bound = self.cfl * h * h;
        let dt = self.dt.unwrap_or(bound);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynError::Params(format!("time step must be positive, got {dt}")));
        }
        if dt > bound * (1.0 + 1e-12) {
            return Err(DynError::Params(format!("dt = {dt:.3e} exceeds the bound cfl·h² = {bound:.3e}")));
        }
        Ok(dt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowRecord {
    pub step: usize,
    pub time: f64,
    pub action: f64,
    pub max_torsion: f64,
    pub residual: PartNorms,
    pub min_det: f64,
}

impl FlowRecord {
    pub const CSV_HEADER: &'static str = "step,time,action,max_torsion,residual_l1,residual_l7,residual_l35,residual_l27,min_det";

    fn of(state: &LatticeState, params: &ActionParams, step: usize, time: f64) -> Self {
        FlowRecord {
            step,
            time,
            action: state.action(params),
            max_torsion: state.max_torsion(),
            residual: state.residual_norms(params),
            min_det: state.min_det(),
        }
    }

    pub fn csv_row(&self) -> String {
        let r = &self.residual;
        format!(
            "{},{:.10e},{:.15e},{:.10e},{:.6e},{:.6e},{:.6e},{:.6e},{:.10e}",
            self.step, self.time, self.action, self.max_torsion, r.l1, r.l7, r.l35, r.l27, self.min_det
        )
    }
}

/// `(h, ξ)` with `V = h + ξ/4`.
pub fn split_velocity(v: &Mat8) -> (Mat8, Mat8) {
    ((v + v.transpose()) * 0.5, (v - v.transpose()) * 2.0)
}

fn advance(frames: &[Mat8], v: &[Mat8], dt: f64) -> Vec<Mat8> {
    frames.iter().zip(v).map(|(e, v)| e + e * v * dt).collect()
}

/// One explicit step. `sign` multiplies the descent velocity.
pub fn flow_step(
    spec: &LatticeSpec,
    frames: &[Mat8],
    params: &ActionParams,
    dt: f64,
    scheme: Scheme,
    sign: f64,
) -> Result<Vec<Mat8>, DynError> {
    let v1: Vec<Mat8> = LatticeState::new(spec, frames, params)?.velocity(params).iter().map(|v| v * sign).collect();
    let e1 = advance(frames, &v1, dt);
    match scheme {
        Scheme::Euler => Ok(e1),
        Scheme::Rk2 => {
            // Heun: E + dt/2 (E V(E) + E₁ V(E₁))
            let v2: Vec<Mat8> = LatticeState::new(spec, &e1, params)?.velocity(params).iter().map(|v| v * sign).collect();
            Ok((0..frames.len()).map(|k| frames[k] + (frames[k] * v1[k] + e1[k] * v2[k]) * (0.5 * dt)).collect())
        }
    }
}

pub struct Flow {
    spec: LatticeSpec,
    config: FlowConfig,
    dt: f64,
    sign: f64,
    frames: Vec<Mat8>,
    generation: usize,
    time: f64,
}

impl Flow {
    pub fn new(spec: LatticeSpec, frames: Vec<Mat8>, config: FlowConfig) -> Result<Self, DynError> {
        config.params.validate()?;
        let dt = config.time_step(&spec)?;
        LatticeState::new(&spec, &frames, &config.params)?;
        Ok(Flow { spec, config, dt, sign: 1.0, frames, generation: 0, time: 0.0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `+1` unless the trial step flipped the direction.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn frames(&self) -> &[Mat8] {
        &self.frames
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn record(&self) -> Result<FlowRecord, DynError> {
        let state = LatticeState::new(&self.spec, &self.frames, &self.config.params)?;
        Ok(FlowRecord::of(&state, &self.config.params, self.generation, self.time))
    }

    fn check(&self, frames: &[Mat8]) -> Result<(), DynError> {
        for (site, e) in frames.iter().enumerate() {
            let det = e.determinant();
            if !det.is_finite() || det < self.config.det_threshold {
                return Err(DynError::Degenerate { step: self.generation + 1, site, det });
            }
        }
        Ok(())
    }

    /// Decide the sign with a trial Euler step from the current frames.
    pub fn calibrate(&mut self) -> Result<(), DynError> {
        let p = &self.config.params;
        let s0 = LatticeState::new(&self.spec, &self.frames, p)?.action(p);
        let trial = flow_step(&self.spec, &self.frames, p, self.dt, Scheme::Euler, 1.0)?;
        self.check(&trial)?;
        let s1 = LatticeState::new(&self.spec, &trial, p)?.action(p);
        if s1 > s0 {
            self.sign = -1.0;
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<FlowRecord, DynError> {
        let next = flow_step(&self.spec, &self.frames, &self.config.params, self.dt, self.config.scheme, self.sign)?;
        self.check(&next)?;
        self.frames = next;
        self.generation += 1;
        self.time += self.dt;
        self.record()
    }

    /// Initial record plus one per step; `observe` sees each as it is made.
    pub fn run(&mut self, mut observe: impl FnMut(&FlowRecord)) -> Result<Vec<FlowRecord>, DynError> {
        if self.config.sign_check && self.generation == 0 {
            self.calibrate()?;
        }
        let first = self.record()?;
        observe(&first);
        let mut out = vec![first];
        for _ in 0..self.config.steps {
            let r = self.step()?;
            observe(&r);
            out.push(r);
        }
        Ok(out)
    }
}
