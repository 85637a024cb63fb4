//! Perturbations `φ ∈ Λ⁴₁₊₇₊₃₅` of the flat Cayley form and their `(h, ξ)`
//! description, `φ = D_{h + ξ/4} Φ₀`.
//!
//! Packed coordinates: 36 entries `h_ij`, `i ≤ j`, row-major, then 7
//! coordinates of `ξ` in an orthonormal basis of Λ²₇ (unit full norm
//! `ξ_{ab}ξ_{ab} = 1`). The basis is Gram-Schmidt on the columns of the
//! Λ²₇ projector, taken in order, so it never changes.

use crate::LinearError;
use nalgebra::DVector;
use spin7_core::{einsum, AltForm, CayleyStructure, Mat8, Space, DIM};
use std::sync::OnceLock;

pub const H_DIM: usize = 36;
pub const XI_DIM: usize = 7;
pub const PACKED: usize = H_DIM + XI_DIM;

pub(crate) fn reference() -> &'static CayleyStructure {
    static CS: OnceLock<CayleyStructure> = OnceLock::new();
    CS.get_or_init(CayleyStructure::reference)
}

/// Orthonormal Λ²₇ basis as antisymmetric matrices of unit full norm.
pub fn xi_basis() -> &'static [Mat8; XI_DIM] {
    static B: OnceLock<[Mat8; XI_DIM]> = OnceLock::new();
    B.get_or_init(|| {
        let proj = reference().projector(Space::L2_7).matrix().clone();
        let mut found: Vec<nalgebra::DVector<f64>> = Vec::new();
        for j in 0..proj.ncols() {
            let mut v = proj.column(j).into_owned();
            for b in &found {
                let c = b.dot(&v);
                v -= b * c;
            }
            let n = v.norm();
            if n > 1e-8 {
                found.push(v / n);
            }
            if found.len() == XI_DIM {
                break;
            }
        }
        assert_eq!(found.len(), XI_DIM, "Λ²₇ has dimension 7");
        std::array::from_fn(|k| {
            let form = AltForm::new(2, found[k].iter().copied().collect()).expect("28 components");
            form.expand().to_mat() * std::f64::consts::FRAC_1_SQRT_2
        })
    })
}

/// `π₇` on an antisymmetric matrix.
pub fn pi7(m: &Mat8) -> Mat8 {
    reference().pi7_matrix(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    /// symmetric, trace included
    pub h: Mat8,
    /// in Λ²₇
    pub xi: Mat8,
}

impl Perturbation {
    pub fn new(h: Mat8, xi: Mat8) -> Result<Self, LinearError> {
        if (h - h.transpose()).amax() > 1e-12 * (1.0 + h.amax()) {
            return Err(LinearError::Invalid("h is not symmetric".into()));
        }
        if (xi + xi.transpose()).amax() > 1e-12 * (1.0 + xi.amax()) || (pi7(&xi) - xi).amax() > 1e-12 * (1.0 + xi.amax()) {
            return Err(LinearError::Invalid("ξ is not in Λ²₇".into()));
        }
        Ok(Perturbation { h, xi })
    }

    pub fn zero() -> Self {
        Perturbation { h: Mat8::zeros(), xi: Mat8::zeros() }
    }

    pub fn pack(&self) -> DVector<f64> {
        let mut v = DVector::zeros(PACKED);
        let mut n = 0;
        for i in 0..DIM {
            for j in i..DIM {
                v[n] = self.h[(i, j)];
                n += 1;
            }
        }
        for (k, b) in xi_basis().iter().enumerate() {
            v[H_DIM + k] = b.dot(&self.xi);
        }
        v
    }

    pub fn unpack(v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), PACKED, "packed perturbations have 43 coordinates");
        let mut h = Mat8::zeros();
        let mut n = 0;
        for i in 0..DIM {
            for j in i..DIM {
                h[(i, j)] = v[n];
                h[(j, i)] = v[n];
                n += 1;
            }
        }
        let xi = xi_basis().iter().enumerate().fold(Mat8::zeros(), |acc, (k, b)| acc + b * v[H_DIM + k]);
        Perturbation { h, xi }
    }

    pub fn from_coords(v: &[f64]) -> Self {
        Self::unpack(&DVector::from_column_slice(v))
    }

    /// `-4 (h + ξ/4)_{[a}{}^p Φ_{bcd]p}`
    pub fn to_4form(&self) -> AltForm {
        reference().phi().derivation(&(self.h + self.xi * 0.25))
    }

    /// `h_{ab}h_{ab} + ¾h² + ¼ξ_{ab}ξ_{ab}`
    pub fn norm_sq(&self) -> f64 {
        let tr = self.h.trace();
        self.h.dot(&self.h) + 0.75 * tr * tr + 0.25 * self.xi.dot(&self.xi)
    }
}

/// `(1/24)(φ_{(a}{}^{pqr}Φ_{b)pqr} - ⅛δφ·Φ)`, `(1/24)φ_{[a}{}^{pqr}Φ_{b]pqr}` and
/// `h = φ·Φ/168`, reassembled as `h_{ab} = h̃_{ab} + (h/8)δ_{ab}`.
pub fn fields_from_4form(phi: &AltForm) -> Result<Perturbation, LinearError> {
    if phi.degree() != 4 {
        return Err(LinearError::Invalid("expected a 4-form".into()));
    }
    let cs = reference();
    let l27 = cs.projector(Space::L4_27).apply(phi).max_abs();
    if l27 > 1e-10 * (1.0 + phi.max_abs()) {
        return Err(LinearError::NotTangent(l27));
    }
    let m = einsum("apqr,bpqr->ab", &[&phi.expand(), cs.phi_lower()]).to_mat();
    let full = m.trace();
    let h_tilde = ((m + m.transpose()) * 0.5 - Mat8::identity() * (full / 8.0)) / 24.0;
    let xi = (m - m.transpose()) * (0.5 / 24.0);
    let trace = full / 168.0;
    Ok(Perturbation { h: h_tilde + Mat8::identity() * (trace / 8.0), xi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_order_is_upper_triangle_then_xi() {
        let mut h = Mat8::zeros();
        h[(0, 1)] = 1.0;
        h[(1, 0)] = 1.0;
        h[(7, 7)] = 2.0;
        let v = Perturbation { h, xi: Mat8::zeros() }.pack();
        assert_eq!((v[1], v[35], v.sum()), (1.0, 2.0, 3.0));
        let xi = xi_basis()[3];
        let v = Perturbation { h: Mat8::zeros(), xi }.pack();
        assert!((v[H_DIM + 3] - 1.0).abs() < 1e-14 && v.amax() < 1.0 + 1e-14);
        for a in xi_basis() {
            for b in xi_basis() {
                let d = a.dot(b);
                assert!(d.abs() < 1e-13 || (d - 1.0).abs() < 1e-13);
            }
        }
    }
}
