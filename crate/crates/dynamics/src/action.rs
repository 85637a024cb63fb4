//! Pointwise action density and its first variations, in frame components
//! (`Φ = Φ₀`, `g = δ`).
//!
//! `L = (√g/6) [Φ·∂C - (3/2)Φ_{ijkl}C_{ijp}C_{klp} + κ|C|² + λ]`, all
//! contractions over every index. Varying `Φ` at fixed coordinate `C`
//! gives the 4-form `E`; `E′ = E - 2π₁(E)` is the form the equations are
//! usually written in.

use crate::params::ActionParams;
use serde::Serialize;
use spin7_core::{einsum, AltForm, CayleyStructure, Mat8, Space, Tensor, DIM};
use spin7_fields::geometry::{phi0, reference};
use spin7_fields::verify::{dense_forms, phi_tt};

fn phi_dense() -> &'static Tensor {
    reference().phi_lower()
}

/// `Σ Φ_{abcd} W_{abcd}` over all index values.
pub fn full_dot(a: &AltForm, b: &AltForm) -> f64 {
    let k = a.degree();
    (1..=k).product::<usize>() as f64 * a.dot(b)
}

/// `Φ_{abcd} ∂_a C_{bcd}`, full contraction.
pub fn phi_dot_dc(dc: &[AltForm; DIM]) -> f64 {
    let mut acc = 0.0;
    for (a, w) in dc.iter().enumerate() {
        for (n, idx) in spin7_core::form::multi_indices(3).iter().enumerate() {
            let c = w.comp()[n];
            if c != 0.0 {
                acc += phi0().get(&[a, idx[0], idx[1], idx[2]]) * c;
            }
        }
    }
    6.0 * acc
}

pub fn density(sqrt_g: f64, c: &AltForm, dc: &[AltForm; DIM], params: &ActionParams) -> f64 {
    let bracket = phi_dot_dc(dc) - 1.5 * phi_tt(c) + params.kappa * full_dot(c, c) + params.lambda;
    sqrt_g / 6.0 * bracket
}

/// `M_{ae} = Φ_{ijkl} C_{ija} C_{kle}`
fn phi_cc(c: &Tensor) -> Mat8 {
    let pc = einsum("ijkl,ija->kla", &[phi_dense(), c]);
    einsum("kla,kle->ae", &[&pc, c]).to_mat()
}

/// The Φ-variation of `6L/√g` at fixed coordinate `C, ∂C`.
pub fn euler_lagrange(c: &AltForm, dc: &[AltForm; DIM], params: &ActionParams) -> AltForm {
    let ch = c.expand();
    let k = params.kappa;
    let sc = phi_tt(c);
    let c2 = full_dot(c, c);
    let trace = phi_dot_dc(dc);

    let mut e = AltForm::alt_of(&dense_forms(dc));
    e.axpy(-1.5, &AltForm::alt_of(&einsum("abp,cdp->abcd", &[&ch, &ch])));
    // alt(M_{ae}Φ_{ebcd}) = ¼ D_M Φ
    e.axpy(-1.0 / 32.0, &phi0().derivation(&phi_cc(&ch)));
    let cc = einsum("iab,jab->ij", &[&ch, &ch]).to_mat();
    e.axpy(k / 16.0, &phi0().derivation(&cc));
    let scalar = 3.0 / 224.0 * sc - (trace - 1.5 * sc + k * c2 + params.lambda) / 168.0 - 3.0 * k / 112.0 * c2;
    e.axpy(scalar, phi0());
    e
}

/// `E′ = E - 2(Φ·E/336)Φ`
pub fn e_prime(e: &AltForm) -> AltForm {
    let tr = full_dot(phi0(), e);
    let mut out = e.clone();
    out.axpy(-2.0 * tr / 336.0, phi0());
    out
}

/// `Φ_{bpqr} W_{apqr}`
pub fn mixed_form(w: &AltForm) -> Mat8 {
    einsum("bpqr,apqr->ab", &[phi_dense(), &w.expand()]).to_mat()
}

/// Max-abs of each irreducible piece of a 4-form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PartNorms {
    pub l1: f64,
    pub l7: f64,
    pub l35: f64,
    pub l27: f64,
}

impl PartNorms {
    pub fn max(&self, other: &PartNorms) -> PartNorms {
        PartNorms {
            l1: self.l1.max(other.l1),
            l7: self.l7.max(other.l7),
            l35: self.l35.max(other.l35),
            l27: self.l27.max(other.l27),
        }
    }

    /// The pieces the equations constrain; Λ⁴₂₇ is left free.
    pub fn constrained(&self) -> f64 {
        self.l1.max(self.l7).max(self.l35)
    }
}

#[derive(Clone, Debug)]
pub struct FieldEqResidual {
    pub e_prime: AltForm,
    pub parts: spin7_core::Decomposition,
    pub mixed: Mat8,
}

impl FieldEqResidual {
    pub fn new(c: &AltForm, dc: &[AltForm; DIM], params: &ActionParams) -> Self {
        let e_prime = e_prime(&euler_lagrange(c, dc, params));
        let parts = reference().decompose(&e_prime).expect("degree 4");
        let mixed = mixed_form(&e_prime);
        FieldEqResidual { e_prime, parts, mixed }
    }

    pub fn norms(&self) -> PartNorms {
        let n = |s: Space| self.parts.part(s).map_or(0.0, AltForm::max_abs);
        PartNorms { l1: n(Space::L4_1), l7: n(Space::L4_7), l35: n(Space::L4_35), l27: n(Space::L4_27) }
    }

    /// `Φ·E′`, full contraction.
    pub fn trace(&self) -> f64 {
        full_dot(phi0(), &self.e_prime)
    }
}

/// `G_{ap}` with `dS = h^d Σ tr(Gᵀ Y)` for `E → E(I + Y)`:
/// `G_{ap} = -(2/3) √g Φ_{abcd} E_{pbcd}`.
pub fn orbit_gradient(sqrt_g: f64, e: &AltForm) -> Mat8 {
    einsum("abcd,pbcd->ap", &[phi_dense(), &e.expand()]).to_mat() * (-2.0 / 3.0 * sqrt_g)
}

/// `δg_{ij} = (1/12)(δΦ_{(i|pqr|}Φ_{j)}{}^{pqr} - (3/28) g_{ij} δΦ·Φ)`
pub fn metric_variation(dphi: &AltForm, cs: &CayleyStructure) -> Mat8 {
    let d = dphi.expand();
    let m = einsum("ipqr,jpqr->ij", &[&d, cs.phi_mixed13()]).to_mat();
    let tr = d.dot(cs.phi_upper());
    ((m + m.transpose()) * 0.5 - cs.metric().g() * (3.0 / 28.0 * tr)) / 12.0
}

/// `δΦ = 2 δg_{[i|p|} Φ^p{}_{jkl]}`, the inverse direction.
pub fn phi_from_metric_variation(dg: &Mat8, cs: &CayleyStructure) -> AltForm {
    cs.phi().derivation(&(dg * cs.metric().g_inv())).scale(0.5)
}
