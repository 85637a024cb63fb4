//! Linearized torsion and the quadratic action it induces around flat space.
//!
//! With `u_{abc} = (1/48) ε_{abc}{}^{pijkl} p_p φ_{ijkl}` the first-order torsion
//! is `t = J₃⁻¹u`, and the quadratic Lagrangian after eliminating `C` is
//! `[κ u·u + u·(J₃u + 5u)] / 6(6 - 5κ - κ²)` with full contractions.

use crate::kernel::{Coeffs, Momentum, QuadraticKernel};
use crate::perturbation::{reference, Perturbation};
use crate::LinearError;
use serde::Serialize;
use spin7_core::{einsum, AltForm, Metric, Tensor, DIM};

fn momentum_form(p: &Momentum) -> AltForm {
    AltForm::new(1, p.to_vec()).expect("8 components")
}

fn momentum_tensor(p: &Momentum) -> Tensor {
    Tensor::from_fn(1, |i| p[i[0]])
}

/// `u = (1/48) ε p φ = ½ ⋆(p ∧ φ)`
pub fn epsilon_contraction(phi: &AltForm, p: &Momentum) -> AltForm {
    let cs = reference();
    let wedge = momentum_form(p).wedge(phi).expect("degree 5");
    wedge.hodge_star(&Metric::euclidean(), cs.orientation()).scale(0.5)
}

/// `t = J₃⁻¹ u`
pub fn linearized_torsion(phi: &AltForm, p: &Momentum) -> AltForm {
    reference().j3_inverse().apply(&epsilon_contraction(phi, p))
}

/// `(5/288) ε p φ + (1/12) Φ_{[a}{}^{pqr} p_b φ_{c]pqr} + (1/8) Φ_{[a}{}^{pqr} p_{|p|} φ_{bc]qr}`
pub fn linearized_torsion_closed(phi: &AltForm, p: &Momentum) -> AltForm {
    let (j, k) = j3_terms(phi, p);
    epsilon_contraction(phi, p).scale(5.0 / 6.0).add(&j.scale(1.0 / 6.0)).add(&k.scale(1.0 / 6.0))
}

/// The two pieces of `J₃(u)` written through `φ`:
/// `½Φ_{[a}{}^{pqr}p_bφ_{c]pqr}` and `¾Φ_{[a}{}^{pqr}p_{|p|}φ_{bc]qr}`.
fn j3_terms(phi: &AltForm, p: &Momentum) -> (AltForm, AltForm) {
    let big = reference().phi_lower();
    let pt = momentum_tensor(p);
    let f = phi.expand();
    let a = AltForm::alt_of(&einsum("apqr,b,cpqr->abc", &[big, &pt, &f])).scale(0.5);
    let b = AltForm::alt_of(&einsum("apqr,p,bcqr->abc", &[big, &pt, &f])).scale(0.75);
    (a, b)
}

/// `J₃(u)` from `φ` without applying `J₃`.
pub fn j3_of_u_closed(phi: &AltForm, p: &Momentum) -> AltForm {
    let (a, b) = j3_terms(phi, p);
    a.add(&b)
}

/// `u` written directly through `(h, ξ)` with `w = h - ξ/4`:
/// `-½Φ_{bcd}{}^a p^i w_{ia} + ½Φ_{bcd}{}^i p_i h - (3/2)Φ_{[bc}{}^{ai} p_i w_{d]a}`.
pub fn u_from_fields(x: &Perturbation, p: &Momentum) -> AltForm {
    let big = reference().phi_lower();
    let pt = momentum_tensor(p);
    let w = Tensor::from_mat(&(x.h - x.xi * 0.25));
    let first = einsum("bcda,i,ia->bcd", &[big, &pt, &w]).scale(-0.5);
    let second = einsum("bcdi,i->bcd", &[big, &pt]).scale(0.5 * x.h.trace());
    let third = AltForm::alt_of(&einsum("bcai,i,da->bcd", &[big, &pt, &w])).scale(-1.5);
    AltForm::compress(&first.add(&second)).add(&third)
}

/// The Λ³₈ part of the torsion, `t_{abc}Φ^{mabc} = (1/48)(Φ·φ)p^m + (1/12)Φ^{abcd}p_aφ_{bcdm}`.
pub fn torsion_vector_closed(phi: &AltForm, p: &Momentum) -> [f64; DIM] {
    let cs = reference();
    let big = cs.phi_lower();
    let f = phi.expand();
    let pf = big.dot(&f) / 48.0;
    let v = einsum("abcd,a,bcdm->m", &[big, &momentum_tensor(p), &f]);
    std::array::from_fn(|m| pf * p[m] + v.get(&[m]) / 12.0)
}

pub fn torsion_vector(t: &AltForm) -> [f64; DIM] {
    let v = einsum("abc,mabc->m", &[&t.expand(), reference().phi_lower()]);
    std::array::from_fn(|m| v.get(&[m]))
}

/// `6 - 5κ - κ²`
pub fn denominator(kappa: f64) -> f64 {
    6.0 - 5.0 * kappa - kappa * kappa
}

/// `ρ = 1 + κ/6`, `μ = (2/3)(1 + κ/2)`
pub fn rho_mu(kappa: f64) -> (f64, f64) {
    (1.0 + kappa / 6.0, 2.0 / 3.0 * (1.0 + kappa / 2.0))
}

fn check_kappa(kappa: f64) -> Result<f64, LinearError> {
    let d = denominator(kappa);
    if !kappa.is_finite() || d.abs() < 1e-9 {
        return Err(LinearError::SingularKappa(kappa));
    }
    Ok(d)
}

/// Full contraction `u^{abc}v_{abc}`.
fn full_dot3(u: &AltForm, v: &AltForm) -> f64 {
    6.0 * u.dot(v)
}

#[derive(Clone, Debug)]
pub struct LinearizedAction {
    pub kappa: f64,
    pub rho: f64,
    pub mu: f64,
    /// `6/(6 - 5κ - κ²)`
    pub scale: f64,
    pub kernel: QuadraticKernel,
}

impl LinearizedAction {
    /// `kernel / scale`, the part that should equal the `(ρ, μ)` kernel.
    pub fn normalized(&self) -> QuadraticKernel {
        self.kernel.scale(1.0 / self.scale)
    }

    pub fn coeffs(&self) -> Coeffs {
        Coeffs::invariant(self.rho, self.mu)
    }
}

/// Polarized quadratic action at momentum `p`.
pub fn action_bilinear(kappa: f64, p: &Momentum, x: &Perturbation, y: &Perturbation) -> Result<f64, LinearError> {
    let d = check_kappa(kappa)?;
    let j3 = reference().j_operator(3).expect("degree 3");
    let ux = epsilon_contraction(&x.to_4form(), p);
    let uy = epsilon_contraction(&y.to_4form(), p);
    let sym = |a: &AltForm, b: &AltForm| kappa * full_dot3(a, b) + full_dot3(a, &j3.apply(b).add(&b.scale(5.0)));
    Ok(0.5 * (sym(&ux, &uy) + sym(&uy, &ux)) / (6.0 * d))
}

pub fn linearized_action_kernel(kappa: f64, p: Momentum) -> Result<LinearizedAction, LinearError> {
    let d = check_kappa(kappa)?;
    let kernel = QuadraticKernel::from_bilinear(p, |x, y| action_bilinear(kappa, &p, x, y).expect("κ checked"));
    let (rho, mu) = rho_mu(kappa);
    Ok(LinearizedAction { kappa, rho, mu, scale: 6.0 / d, kernel })
}

/// Eigenvalues of the `(h, ξ)` metric-normalized kernel, ascending.
pub fn spectrum(k: &QuadraticKernel) -> Vec<f64> {
    let w = |i: usize| if i < 36 && !is_diag(i) { 2.0f64.sqrt() } else { 1.0 };
    let n = k.matrix.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| k.matrix[(i, j)] / (w(i) * w(j)));
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn is_diag(packed: usize) -> bool {
    let mut n = 0;
    for i in 0..DIM {
        for j in i..DIM {
            if n == packed {
                return i == j;
            }
            n += 1;
        }
    }
    false
}

#[derive(Clone, Debug, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

pub fn signature(eigs: &[f64], rel_tol: f64) -> Signature {
    let top = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = eigs.iter().filter(|v| v.abs() <= rel_tol * top).count();
    let positive = eigs.iter().filter(|v| **v > rel_tol * top).count();
    Signature { positive, negative: eigs.len() - zero - positive, zero }
}

