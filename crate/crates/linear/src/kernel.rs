//! Quadratic kernels of the two-field Lagrangian family in momentum space.
//!
//! A plane wave `X cos(p·x)` (or `X sin(p·x)`) has `∂ → p` on one factor and
//! `-p` on the other after averaging; dropping the common `½` from `⟨cos²⟩`,
//! a term like `(∂h)²` becomes `p²|h|²` and `h∂∂h` becomes `-h(pp)h`. So the
//! kernels below are the Fourier symbols with `i p` replaced by the real `p`,
//! and `L_p(X) = Xᵀ K X` equals twice the spatial average of the Lagrangian.

use crate::perturbation::{pi7, Perturbation, PACKED};
use crate::LinearError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use spin7_core::{Mat8, DIM};

pub type Momentum = [f64; DIM];

/// `(1, √2, √3, √5, √7, √11, √13, √17)/norm`
pub fn generic_momentum() -> Momentum {
    let raw = [1.0f64, 2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0].map(f64::sqrt);
    let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.map(|v| v / n)
}

fn p_sq(p: &Momentum) -> f64 {
    p.iter().map(|v| v * v).sum()
}

/// `(p·X)_b = p^a X_{ab}`
fn contract_p(p: &Momentum, x: &Mat8) -> [f64; DIM] {
    std::array::from_fn(|b| (0..DIM).map(|a| p[a] * x[(a, b)]).sum())
}

fn dot8(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn p_x_p(p: &Momentum, x: &Mat8) -> f64 {
    dot8(&contract_p(p, x), p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coeffs {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Coeffs {
    /// The two-parameter family on which the action is diffeomorphism invariant.
    pub fn invariant(rho: f64, mu: f64) -> Self {
        Coeffs { rho, alpha: -rho + mu, beta: rho - mu, gamma: rho - mu / 2.0, lambda: mu / 8.0, mu }
    }

    pub fn gr() -> Self {
        Self::invariant(1.0, 0.0)
    }

    pub fn prime() -> Self {
        Self::invariant(0.0, 1.0)
    }
}

/// The bilinear form polarizing the Lagrangian:
/// `ρ/2 (∂h)² + α/2 (∂h)² - β h ∂∂h - γ(∂h)² + λ/2 (∂ξ)² - μ ∂h ∂ξ`
/// with the traces and contractions spelled out in [`kernel_raw`].
pub fn bilinear(p: &Momentum, c: &Coeffs, x: &Perturbation, y: &Perturbation) -> f64 {
    let pp = p_sq(p);
    let (tx, ty) = (x.h.trace(), y.h.trace());
    let (phx, phy) = (contract_p(p, &x.h), contract_p(p, &y.h));
    let (pxx, pxy) = (contract_p(p, &x.xi), contract_p(p, &y.xi));
    c.rho / 2.0 * pp * x.h.dot(&y.h) + c.alpha / 2.0 * pp * tx * ty + c.beta / 2.0 * (tx * p_x_p(p, &y.h) + ty * p_x_p(p, &x.h))
        - c.gamma * dot8(&phx, &phy)
        + c.lambda / 2.0 * pp * x.xi.dot(&y.xi)
        - c.mu / 2.0 * (dot8(&phx, &pxy) + dot8(&phy, &pxx))
}

/// The completed-square arrangement
/// `ρ/2 (∂h)² + (α/2 + β²/4γ)(∂h)² + (λ/2 + μ²/32γ)(∂ξ)² - γ(∂^a(h_{ab} - β/2γ δ h + μ/2γ ξ_{ab}))²`.
pub fn bilinear_completed(p: &Momentum, c: &Coeffs, x: &Perturbation, y: &Perturbation) -> Result<f64, LinearError> {
    if c.gamma == 0.0 {
        return Err(LinearError::Invalid("the completed square needs γ ≠ 0".into()));
    }
    let g = c.gamma;
    let pp = p_sq(p);
    let (tx, ty) = (x.h.trace(), y.h.trace());
    let w = |z: &Perturbation| z.h - Mat8::identity() * (c.beta / (2.0 * g) * z.h.trace()) + z.xi * (c.mu / (2.0 * g));
    Ok(c.rho / 2.0 * pp * x.h.dot(&y.h)
        + (c.alpha / 2.0 + c.beta * c.beta / (4.0 * g)) * pp * tx * ty
        + (c.lambda / 2.0 + c.mu * c.mu / (32.0 * g)) * pp * x.xi.dot(&y.xi)
        - g * dot8(&contract_p(p, &w(x)), &contract_p(p, &w(y))))
}

/// Symmetric 43×43 matrix at one momentum, on packed coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticKernel {
    pub p: Momentum,
    pub matrix: DMatrix<f64>,
}

impl QuadraticKernel {
    /// Matrix of a symmetric bilinear form on perturbations.
    pub fn from_bilinear(p: Momentum, mut f: impl FnMut(&Perturbation, &Perturbation) -> f64) -> Self {
        let basis: Vec<Perturbation> = (0..PACKED).map(|i| Perturbation::unpack(&DVector::from_fn(PACKED, |k, _| (k == i) as u8 as f64))).collect();
        let mut m = DMatrix::zeros(PACKED, PACKED);
        for i in 0..PACKED {
            for j in i..PACKED {
                let v = f(&basis[i], &basis[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        QuadraticKernel { p, matrix: m }
    }

    pub fn value(&self, x: &Perturbation) -> f64 {
        let v = x.pack();
        v.dot(&(&self.matrix * &v))
    }

    pub fn apply(&self, x: &Perturbation) -> DVector<f64> {
        &self.matrix * x.pack()
    }

    pub fn scale(&self, s: f64) -> Self {
        QuadraticKernel { p: self.p, matrix: &self.matrix * s }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    pub fn max_diff(&self, other: &QuadraticKernel) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

pub fn kernel_raw(p: Momentum, c: &Coeffs) -> QuadraticKernel {
    QuadraticKernel::from_bilinear(p, |x, y| bilinear(&p, c, x, y))
}

pub fn kernel_completed(p: Momentum, c: &Coeffs) -> Result<QuadraticKernel, LinearError> {
    if c.gamma == 0.0 {
        return Err(LinearError::Invalid("the completed square needs γ ≠ 0".into()));
    }
    Ok(QuadraticKernel::from_bilinear(p, |x, y| bilinear_completed(&p, c, x, y).expect("γ checked")))
}

pub fn kernel_gr(p: Momentum) -> QuadraticKernel {
    kernel_raw(p, &Coeffs::gr())
}

pub fn kernel_prime(p: Momentum) -> QuadraticKernel {
    kernel_raw(p, &Coeffs::prime())
}

/// Linearized diffeomorphism along `v` at momentum `p`:
/// `δh = p_{(a}v_{b)}`, `δξ = 4π₇(p_{[a}v_{b]})`.
///
/// The factor 4 is the one for which the change of `φ` is exactly
/// `-4 p_{[a}v^pΦ_{bcd]p}`.
pub fn gauge_direction(p: &Momentum, v: &[f64; DIM]) -> Perturbation {
    let pv = Mat8::from_fn(|a, b| p[a] * v[b]);
    Perturbation { h: (pv + pv.transpose()) * 0.5, xi: pi7(&((pv - pv.transpose()) * 0.5)) * 4.0 }
}

/// `-4 p_{[a}v^pΦ_{bcd]p}`
pub fn diffeo_4form(p: &Momentum, v: &[f64; DIM]) -> spin7_core::AltForm {
    let pv = Mat8::from_fn(|a, b| p[a] * v[b]);
    crate::perturbation::reference().phi().derivation(&pv)
}

/// Weights making packed coordinates orthonormal for `|h|² + |ξ|²`.
fn metric_weights() -> DVector<f64> {
    let mut w = DVector::from_element(PACKED, 1.0);
    let mut n = 0;
    for i in 0..DIM {
        for j in i..DIM {
            if i != j {
                w[n] = 2.0f64.sqrt();
            }
            n += 1;
        }
    }
    w
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityReport {
    pub coeffs: Coeffs,
    pub p: Momentum,
    /// `None` when γ = 0
    pub completed_square_residual: Option<f64>,
    /// `max |K g| / max |K|` over the 8 coordinate gauge directions
    pub gauge_residual: f64,
    pub gauge_invariant: bool,
    /// rank of the gauge directions annihilated by the kernel
    pub gauge_null_dim: usize,
    pub null_dim: usize,
    /// eigenvalues on the orthogonal complement of the gauge directions, divided by `p²`
    pub restricted: Vec<f64>,
    pub restricted_zero_modes: usize,
    pub elliptic: bool,
}

const REL_ZERO: f64 = 1e-9;

pub fn check_ellipticity(p: Momentum, c: &Coeffs) -> EllipticityReport {
    let k = kernel_raw(p, c);
    let scale = k.max_abs().max(f64::MIN_POSITIVE);
    let completed_square_residual = kernel_completed(p, c).ok().map(|kc| kc.max_diff(&k) / scale);

    let w = metric_weights();
    let kt = DMatrix::from_fn(PACKED, PACKED, |i, j| k.matrix[(i, j)] / (w[i] * w[j]));
    let mut gauge = DMatrix::zeros(PACKED, DIM);
    let mut gauge_residual: f64 = 0.0;
    for a in 0..DIM {
        let v: [f64; DIM] = std::array::from_fn(|b| (a == b) as u8 as f64);
        let g = gauge_direction(&p, &v);
        gauge_residual = gauge_residual.max(k.apply(&g).amax() / scale);
        gauge.set_column(a, &g.pack().component_mul(&w));
    }
    let gauge_invariant = gauge_residual < REL_ZERO;

    let eig = kt.clone().symmetric_eigen();
    let emax = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let null_dim = eig.eigenvalues.iter().filter(|v| v.abs() < REL_ZERO * emax).count();

    let gsv = gauge.clone().svd(true, false);
    let gmax = gsv.singular_values.max();
    let gauge_rank = gsv.singular_values.iter().filter(|s| **s > REL_ZERO * gmax).count();
    let gauge_null_dim = if gauge_invariant { gauge_rank } else { 0 };

    // orthonormal basis of the complement: eigenvectors of the projector with eigenvalue 1
    let gtg = gauge.transpose() * &gauge;
    let proj = DMatrix::identity(PACKED, PACKED) - &gauge * gtg.pseudo_inverse(1e-12).expect("pseudo-inverse") * gauge.transpose();
    let pe = proj.symmetric_eigen();
    let cols: Vec<DVector<f64>> = (0..PACKED).filter(|&i| pe.eigenvalues[i] > 0.5).map(|i| pe.eigenvectors.column(i).into_owned()).collect();
    let q = DMatrix::from_columns(&cols);
    let restricted_matrix = q.transpose() * &kt * &q;
    let pp = p_sq(&p).max(f64::MIN_POSITIVE);
    let mut restricted: Vec<f64> = restricted_matrix.symmetric_eigen().eigenvalues.iter().map(|v| v / pp).collect();
    restricted.sort_by(|a, b| a.total_cmp(b));
    let restricted_zero_modes = restricted.iter().filter(|v| v.abs() * pp < REL_ZERO * emax).count();
    EllipticityReport {
        coeffs: *c,
        p,
        completed_square_residual,
        gauge_residual,
        gauge_invariant,
        gauge_null_dim,
        null_dim,
        restricted,
        restricted_zero_modes,
        elliptic: gauge_invariant && restricted_zero_modes == 0,
    }
}
