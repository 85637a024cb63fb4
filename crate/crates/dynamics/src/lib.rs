//! Actions, field equations and gradient flow for Cayley forms.
//!
//! The action is `S = ∫ L` with `C` an auxiliary 3-form; eliminating `C`
//! through its algebraic equation leaves a functional of `Φ` alone. All
//! pointwise work happens in frame components.

pub mod action;
pub mod equations;
pub mod flow;
pub mod lattice;
pub mod params;

pub use action::{FieldEqResidual, PartNorms};
pub use flow::{flow_step, Flow, FlowConfig, FlowRecord, Scheme};
pub use lattice::{analytic_action, gateaux_c, CDirection, LatticeState};
pub use params::ActionParams;

use spin7_fields::FieldError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("κ = {0} makes the C-equation singular")]
    SingularKappa(f64),
    #[error("frame degenerated at step {step}, site {site} (det {det:.3e})")]
    Degenerate { step: usize, site: usize, det: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}
