//! Cayley structures on periodic lattices.
//!
//! A field is a frame `E(x)` per site; `Φ = E·Φ₀` and `g = E Eᵀ`. Torsion
//! is recovered from `dΦ` alone, curvature from the metric alone, and the
//! identities in [`verify`] tie the two together.

pub mod frame;
pub mod geometry;
pub mod lattice;
pub mod snapshot;
pub mod verify;

pub use frame::{check_frames, FrameFamily, FrameJet, TrigMode, MIN_DET};
pub use geometry::{Geometry, SiteGeometry, Source};
pub use lattice::{exterior_derivative, FieldValue, LatticeSpec, PERIOD};
pub use snapshot::Snapshot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error("frame at site {site} is degenerate (det {det:.3e})")]
    Degenerate { site: usize, det: f64 },
    #[error("frame at site {site} is not finite")]
    NonFinite { site: usize },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FieldError {
    pub(crate) fn at_site(self, n: usize) -> Self {
        match self {
            FieldError::Degenerate { det, .. } => FieldError::Degenerate { site: n, det },
            FieldError::NonFinite { .. } => FieldError::NonFinite { site: n },
            e => e,
        }
    }
}

/// `(0..n).map(f)`, across threads when the `parallel` feature is on.
pub fn map_sites<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
