//! Scenario files: one JSON object, unknown keys rejected.

use crate::CliError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spin7_core::Mat8;
use spin7_dynamics::{ActionParams, FlowConfig, Scheme};
use spin7_fields::{FrameFamily, LatticeSpec, TrigMode};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub lattice: LatticeSpec,
    pub frame: FrameSpec,
    pub params: ActionParams,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Refinements used for measured convergence orders.
    #[serde(default = "two")]
    pub refinements: usize,
    /// Perturb one component of the reference form before the algebraic checks.
    #[serde(default)]
    pub corrupt_phi: Option<Corruption>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn two() -> usize {
    2
}

type Rows8 = [[f64; 8]; 8];

fn to_mat(m: &Rows8) -> Mat8 {
    Mat8::from_fn(|a, b| m[a][b])
}

/// Frame families. `matrix` entries are row-major `E[a][p]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameSpec {
    /// Identity unless a matrix or a seed is given; a seed draws `exp(A)`, `‖A‖ ≤ spread`.
    Constant {
        #[serde(default)]
        matrix: Option<Rows8>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "spread")]
        spread: f64,
    },
    /// `exp(A sin x⁰)`; `A` given, or random with Frobenius norm `amplitude`.
    SingleMode {
        #[serde(default)]
        matrix: Option<Rows8>,
        #[serde(default)]
        seed: u64,
        #[serde(default = "spread")]
        amplitude: f64,
    },
    /// Random `E₀ + A sin x⁰ + B cos x¹ + C sin(x⁰ + 2x¹)`.
    TwoMode { seed: u64, amplitude: f64 },
    RandomSmooth { seed: u64, amplitude: f64 },
    /// Identity plus random low modes.
    NearFlat { seed: u64, amplitude: f64 },
    /// `x⁰ ↦ x⁰ + amplitude·sin x⁰` pulled back: torsion free.
    Reparametrized { amplitude: f64 },
}

fn spread() -> f64 {
    0.4
}

impl FrameSpec {
    pub fn with_seed(&mut self, s: u64) {
        match self {
            FrameSpec::Constant { seed, .. } => *seed = Some(s),
            FrameSpec::SingleMode { seed, .. } | FrameSpec::TwoMode { seed, .. } | FrameSpec::RandomSmooth { seed, .. } | FrameSpec::NearFlat { seed, .. } => *seed = s,
            FrameSpec::Reparametrized { .. } => {}
        }
    }

    pub fn family(&self, spec: &LatticeSpec) -> FrameFamily {
        match self {
            FrameSpec::Constant { matrix: Some(m), .. } => FrameFamily::Constant(to_mat(m)),
            FrameSpec::Constant { seed: Some(s), spread, .. } => {
                FrameFamily::Constant(spin7_core::random::random_frame(&mut ChaCha8Rng::seed_from_u64(*s), *spread))
            }
            FrameSpec::Constant { .. } => FrameFamily::Constant(Mat8::identity()),
            FrameSpec::SingleMode { matrix: Some(m), .. } => FrameFamily::SingleMode(to_mat(m)),
            FrameSpec::SingleMode { seed, amplitude, .. } => FrameFamily::random_bump(*seed, *amplitude),
            FrameSpec::TwoMode { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let e0 = spin7_core::random::random_frame(&mut rng, 0.4);
                let mut m = || spin7_core::random::random_matrix(&mut rng) * *amplitude;
                FrameFamily::two_mode(e0, m(), m(), m())
            }
            FrameSpec::RandomSmooth { seed, amplitude } => FrameFamily::random_smooth(*seed, spec.active_dims(), *amplitude),
            FrameSpec::NearFlat { seed, amplitude } => FrameFamily::near_flat(*seed, spec.active_dims(), *amplitude),
            FrameSpec::Reparametrized { amplitude } => {
                let mut cos = Mat8::zeros();
                cos[(0, 0)] = *amplitude;
                FrameFamily::Trig { base: Mat8::identity(), modes: vec![TrigMode { wave: [1, 0, 0], sin: Mat8::zeros(), cos }] }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub scheme: Scheme,
    pub steps: usize,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "cfl")]
    pub cfl: f64,
    /// Write the final frames as a snapshot next to the CSV.
    #[serde(default)]
    pub snapshot: bool,
}

fn cfl() -> f64 {
    0.1
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection { scheme: Scheme::Euler, steps: 50, dt: None, cfl: cfl(), snapshot: false }
    }
}

impl FlowSection {
    pub fn config(&self, params: ActionParams) -> FlowConfig {
        FlowConfig { dt: self.dt, cfl: self.cfl, ..FlowConfig::new(params, self.scheme, self.steps) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// pointwise algebraic identities, absolute
    pub algebra: f64,
    /// lattice identities with exact derivatives, relative to `1 + |lhs|`
    pub lattice: f64,
    /// allowed gap between measured and nominal convergence order
    pub order: f64,
    /// field-equation rewritings, relative
    pub equations: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { algebra: 1e-9, lattice: 1e-9, order: 0.5, equations: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corruption {
    pub component: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: String,
    pub flow_csv: String,
    pub snapshot: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { report: "report.json".into(), flow_csv: "flow.csv".into(), snapshot: "final.snap".into() }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(c) = self.corrupt_phi {
            if c.component >= 70 {
                return Err(CliError::Config(format!("corrupt_phi.component must be below 70, got {}", c.component)));
            }
        }
        if self.refinements > 4 {
            return Err(CliError::Config("at most 4 refinements".into()));
        }
        self.family().check_against(&self.lattice).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn family(&self) -> FrameFamily {
        self.frame.family(&self.lattice)
    }

    pub fn frames(&self) -> Result<Vec<Mat8>, CliError> {
        Ok(self.family().sample(&self.lattice)?)
    }
}
