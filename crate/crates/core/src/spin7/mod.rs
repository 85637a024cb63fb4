//! Cayley 4-forms and the Spin(7) algebra built from them.

mod identities;
mod ops;

pub use identities::{IdentityReport, IdentityRow, tt_identity_residual};
pub use ops::{Decomposition, FormOperator, Psi27, Space, SpaceParseError};

use crate::form::{AltForm, FormError};
use crate::metric::{Metric, MetricError};
use crate::tensor::Tensor;
use crate::Mat8;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Spin7Error {
    #[error("Cayley form must have degree 4, got {0}")]
    Degree(usize),
    #[error("orientation must be +1 or -1, got {0}")]
    Orientation(f64),
    #[error("frame determinant {0:.3e} is not usable")]
    Frame(f64),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),
    #[error("Ψ violates its invariants: {0}")]
    Psi(String),
}

/// The 14 terms of the reference form, `Φ₀ = -(e⁰∧φ + ⋆₇φ)` with
/// `φ = e123 + e145 + e167 + e246 - e257 - e347 - e356`.
const REFERENCE_TERMS: [(f64, [usize; 4]); 14] = [
    (-1.0, [0, 1, 2, 3]),
    (-1.0, [0, 1, 4, 5]),
    (-1.0, [0, 1, 6, 7]),
    (-1.0, [0, 2, 4, 6]),
    (1.0, [0, 2, 5, 7]),
    (1.0, [0, 3, 4, 7]),
    (1.0, [0, 3, 5, 6]),
    (-1.0, [4, 5, 6, 7]),
    (-1.0, [2, 3, 6, 7]),
    (-1.0, [2, 3, 4, 5]),
    (-1.0, [1, 3, 5, 7]),
    (1.0, [1, 3, 4, 6]),
    (1.0, [1, 2, 5, 6]),
    (1.0, [1, 2, 4, 7]),
];

#[derive(Clone, Debug)]
struct DenseCache {
    lower: Tensor,
    /// `Φ_{ij}^{pq}`
    mixed22: Tensor,
    /// `Φ_i^{pqr}`
    mixed13: Tensor,
    upper: Tensor,
}

/// A Cayley 4-form with its metric and orientation.
#[derive(Clone, Debug)]
pub struct CayleyStructure {
    phi: AltForm,
    metric: Metric,
    orientation: f64,
    dense: OnceLock<DenseCache>,
    ops: OnceLock<ops::OperatorTable>,
}

impl CayleyStructure {
    /// Assemble without checking the identities; use [`CayleyStructure::identity_report`] for that.
    pub fn new(phi: AltForm, metric: Metric, orientation: f64) -> Result<Self, Spin7Error> {
        if phi.degree() != 4 {
            return Err(Spin7Error::Degree(phi.degree()));
        }
        if orientation != 1.0 && orientation != -1.0 {
            return Err(Spin7Error::Orientation(orientation));
        }
        Ok(CayleyStructure { phi, metric, orientation, dense: OnceLock::new(), ops: OnceLock::new() })
    }

    /// The reference form with `g = δ` and positive orientation.
    ///
    /// The first call certifies the contraction identities and self-duality
    /// and panics if any of them fails.
    pub fn reference() -> Self {
        static REF: OnceLock<CayleyStructure> = OnceLock::new();
        REF.get_or_init(|| {
            let terms: Vec<(f64, &[usize])> =
                REFERENCE_TERMS.iter().map(|(c, i)| (*c, &i[..])).collect();
            let cs = CayleyStructure::new(AltForm::from_terms(4, &terms), Metric::euclidean(), 1.0)
                .expect("static data");
            let rep = cs.contraction_report();
            assert!(rep.max_residual() < 1e-12, "reference Cayley form failed certification: {rep:?}");
            cs
        })
        .clone()
    }

    /// `Φ = e·Φ₀`, `g = e eᵀ`, orientation `sign det e`.
    pub fn from_frame(e: &Mat8) -> Result<Self, Spin7Error> {
        let det = e.determinant();
        if !det.is_finite() || det == 0.0 {
            return Err(Spin7Error::Frame(det));
        }
        let phi = reference_form().frame_act(e)?;
        let metric = Metric::from_frame(e)?;
        CayleyStructure::new(phi, metric, det.signum())
    }

    pub fn phi(&self) -> &AltForm {
        &self.phi
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    fn dense(&self) -> &DenseCache {
        self.dense.get_or_init(|| {
            let lower = self.phi.expand();
            let gi = self.metric.g_inv();
            let mixed22 = lower.apply_slot(2, gi).apply_slot(3, gi);
            let mixed13 = mixed22.apply_slot(1, gi);
            let upper = mixed13.apply_slot(0, gi);
            DenseCache { lower, mixed22, mixed13, upper }
        })
    }

    /// `Φ_{abcd}` as a dense tensor.
    pub fn phi_lower(&self) -> &Tensor {
        &self.dense().lower
    }

    /// `Φ_{ab}{}^{cd}`
    pub fn phi_mixed22(&self) -> &Tensor {
        &self.dense().mixed22
    }

    /// `Φ_a{}^{bcd}`
    pub fn phi_mixed13(&self) -> &Tensor {
        &self.dense().mixed13
    }

    /// `Φ^{abcd}`
    pub fn phi_upper(&self) -> &Tensor {
        &self.dense().upper
    }

    pub(crate) fn ops(&self) -> &ops::OperatorTable {
        self.ops.get_or_init(|| ops::OperatorTable::build(self))
    }

    /// Copy of this structure with one compressed component of Φ shifted.
    pub fn with_corrupted_component(&self, index: usize, delta: f64) -> Self {
        let mut phi = self.phi.clone();
        phi.comp_mut()[index] += delta;
        CayleyStructure::new(phi, self.metric.clone(), self.orientation).expect("same shape")
    }

    /// Same Φ and metric with the orientation reversed.
    pub fn with_flipped_orientation(&self) -> Self {
        CayleyStructure::new(self.phi.clone(), self.metric.clone(), -self.orientation).expect("same shape")
    }
}

/// The compressed reference form Φ₀.
pub fn reference_form() -> AltForm {
    CayleyStructure::reference().phi.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_has_fourteen_unit_terms() {
        let phi = reference_form();
        let nz: Vec<f64> = phi.comp().iter().copied().filter(|x| *x != 0.0).collect();
        assert_eq!(nz.len(), 14);
        assert!(nz.iter().all(|x| x.abs() == 1.0));
    }

    #[test]
    fn self_dual_and_norm() {
        let cs = CayleyStructure::reference();
        let star = cs.phi().hodge_star(cs.metric(), cs.orientation());
        assert_eq!(star, *cs.phi());
        assert_eq!(cs.phi().full_norm_sq(cs.metric()), 336.0);
    }

    #[test]
    fn volume_from_phi_wedge_phi() {
        let cs = CayleyStructure::reference();
        let top = cs.phi().wedge(cs.phi()).unwrap();
        assert_eq!(top.comp()[0], 14.0);
    }

    #[test]
    fn constructor_errors() {
        let m = Metric::euclidean();
        assert_eq!(CayleyStructure::new(AltForm::zeros(3), m.clone(), 1.0).unwrap_err(), Spin7Error::Degree(3));
        assert!(matches!(
            CayleyStructure::new(AltForm::zeros(4), m, 0.5),
            Err(Spin7Error::Orientation(_))
        ));
        assert!(CayleyStructure::from_frame(&Mat8::zeros()).is_err());
    }
}
