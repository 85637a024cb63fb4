use crate::DynError;
use serde::{Deserialize, Serialize};
use spin7_core::AltForm;
use spin7_fields::geometry::reference;
use spin7_fields::geometry::j3_inv;

/// Coupling constants of the action. `kappa` weights `|C|²`, `lambda` is
/// the cosmological term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionParams {
    pub kappa: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl ActionParams {
    pub fn new(kappa: f64, lambda: f64) -> Result<Self, DynError> {
        let p = ActionParams { kappa, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynError> {
        if !self.kappa.is_finite() || !self.lambda.is_finite() {
            return Err(DynError::Params("kappa and lambda must be finite".into()));
        }
        if self.denominator().abs() < 1e-9 {
            return Err(DynError::SingularKappa(self.kappa));
        }
        Ok(())
    }

    /// `6 - 5κ - κ²`, zero at κ = 1 and κ = -6.
    pub fn denominator(&self) -> f64 {
        6.0 - (5.0 + self.kappa) * self.kappa
    }

    /// `C = (6T + κJ₃T) / (6 - 5κ - κ²)`, the solution of the C-equation.
    pub fn c_from_torsion(&self, t: &AltForm) -> AltForm {
        let j = reference().j_operator(3).expect("degree 3").apply(t);
        let mut c = t.scale(6.0);
        c.axpy(self.kappa, &j);
        c.scale(1.0 / self.denominator())
    }

    /// `J₃⁻¹(J₃C - κC)`
    pub fn torsion_from_c(&self, c: &AltForm) -> AltForm {
        let mut lhs = reference().j_operator(3).expect("degree 3").apply(c);
        lhs.axpy(-self.kappa, c);
        j3_inv().apply(&lhs)
    }
}
