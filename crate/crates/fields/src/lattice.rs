//! Periodic cubic lattices on the torus `[0, 2π)^d` embedded in ℝ⁸.
//!
//! The first `active_dims` coordinates vary; the remaining ones are frozen
//! at zero and every derivative along them vanishes.

use crate::FieldError;
use serde::{Deserialize, Serialize};
use spin7_core::{AltForm, Mat8, Tensor, DIM};
use std::f64::consts::PI;

pub const PERIOD: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct LatticeSpec {
    active_dims: usize,
    points: usize,
    fd_order: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    active_dims: usize,
    points: usize,
    #[serde(default = "default_order")]
    fd_order: usize,
}

fn default_order() -> usize {
    2
}

impl TryFrom<RawSpec> for LatticeSpec {
    type Error = FieldError;
    fn try_from(r: RawSpec) -> Result<Self, FieldError> {
        LatticeSpec::new(r.active_dims, r.points, r.fd_order)
    }
}

impl From<LatticeSpec> for RawSpec {
    fn from(s: LatticeSpec) -> Self {
        RawSpec { active_dims: s.active_dims, points: s.points, fd_order: s.fd_order }
    }
}

const STENCIL2: [(isize, f64); 2] = [(1, 0.5), (-1, -0.5)];
const STENCIL4: [(isize, f64); 4] = [(2, -1.0 / 12.0), (1, 8.0 / 12.0), (-1, -8.0 / 12.0), (-2, 1.0 / 12.0)];

impl LatticeSpec {
    pub fn new(active_dims: usize, points: usize, fd_order: usize) -> Result<Self, FieldError> {
        if !(1..=3).contains(&active_dims) {
            return Err(FieldError::Spec(format!("active_dims must be 1, 2 or 3, got {active_dims}")));
        }
        if points < 8 {
            return Err(FieldError::Spec(format!("need at least 8 points per dimension, got {points}")));
        }
        if fd_order != 2 && fd_order != 4 {
            return Err(FieldError::Spec(format!("fd_order must be 2 or 4, got {fd_order}")));
        }
        Ok(LatticeSpec { active_dims, points, fd_order })
    }

    pub fn active_dims(&self) -> usize {
        self.active_dims
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn fd_order(&self) -> usize {
        self.fd_order
    }

    pub fn spacing(&self) -> f64 {
        PERIOD / self.points as f64
    }

    pub fn num_sites(&self) -> usize {
        self.points.pow(self.active_dims as u32)
    }

    /// Volume of one lattice cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.active_dims as i32)
    }

    /// Same lattice with twice the points per dimension.
    pub fn refined(&self) -> LatticeSpec {
        LatticeSpec { points: self.points * 2, ..*self }
    }

    pub fn with_order(&self, fd_order: usize) -> Result<LatticeSpec, FieldError> {
        LatticeSpec::new(self.active_dims, self.points, fd_order)
    }

    /// Per-dimension integer position; dimension 0 varies slowest.
    pub fn site_index(&self, site: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut s = site;
        for d in (0..self.active_dims).rev() {
            out[d] = s % self.points;
            s /= self.points;
        }
        out
    }

    pub fn site_of(&self, idx: [usize; 3]) -> usize {
        (0..self.active_dims).fold(0, |acc, d| acc * self.points + idx[d] % self.points)
    }

    pub fn coordinates(&self, site: usize) -> [f64; DIM] {
        let idx = self.site_index(site);
        let mut x = [0.0; DIM];
        for d in 0..self.active_dims {
            x[d] = idx[d] as f64 * self.spacing();
        }
        x
    }

    /// Periodic neighbour `offset` steps along `dim`.
    pub fn shift(&self, site: usize, dim: usize, offset: isize) -> usize {
        let mut idx = self.site_index(site);
        let n = self.points as isize;
        idx[dim] = (idx[dim] as isize + offset).rem_euclid(n) as usize;
        self.site_of(idx)
    }

    /// Central stencil as `(offset, weight)`; divide by the spacing.
    pub fn stencil(&self) -> &'static [(isize, f64)] {
        if self.fd_order == 2 {
            &STENCIL2
        } else {
            &STENCIL4
        }
    }

    /// Central difference of a lattice field along coordinate `dim`.
    /// Inactive directions give zero.
    pub fn derivative<V: FieldValue>(&self, field: &[V], site: usize, dim: usize) -> V {
        let mut out = field[site].zero_like();
        if dim >= self.active_dims {
            return out;
        }
        let inv_h = 1.0 / self.spacing();
        for &(off, w) in self.stencil() {
            out.axpy(w * inv_h, &field[self.shift(site, dim, off)]);
        }
        out
    }

    /// All eight coordinate derivatives at every site.
    pub fn gradient<V: FieldValue>(&self, field: &[V]) -> Vec<[V; DIM]> {
        crate::map_sites(self.num_sites(), |s| std::array::from_fn(|a| self.derivative(field, s, a)))
    }
}

/// Values that can live on lattice sites and be differenced.
pub trait FieldValue: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn axpy(&mut self, s: f64, other: &Self);
}

impl FieldValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, s: f64, other: &Self) {
        *self += s * other;
    }
}

impl FieldValue for Mat8 {
    fn zero_like(&self) -> Self {
        Mat8::zeros()
    }
    fn axpy(&mut self, s: f64, other: &Self) {
        *self += other * s;
    }
}

impl FieldValue for AltForm {
    fn zero_like(&self) -> Self {
        AltForm::zeros(self.degree())
    }
    fn axpy(&mut self, s: f64, other: &Self) {
        AltForm::axpy(self, s, other);
    }
}

impl FieldValue for Tensor {
    fn zero_like(&self) -> Self {
        Tensor::zeros(self.rank())
    }
    fn axpy(&mut self, s: f64, other: &Self) {
        Tensor::axpy(self, s, other);
    }
}

/// Exterior derivative of a field of `k`-forms,
/// `(dw)_{j0..jk} = Σ_m (-1)^m ∂_{j_m} w_{j0..ĵm..jk}`.
pub fn exterior_derivative(spec: &LatticeSpec, field: &[AltForm]) -> Vec<AltForm> {
    let k = field[0].degree();
    let lists = spin7_core::form::multi_indices(k + 1);
    crate::map_sites(spec.num_sites(), |site| {
        let partials: Vec<AltForm> = (0..spec.active_dims()).map(|a| spec.derivative(field, site, a)).collect();
        let mut out = AltForm::zeros(k + 1);
        for (n, j) in lists.iter().enumerate() {
            let mut acc = 0.0;
            for m in 0..=k {
                if j[m] >= spec.active_dims() {
                    continue;
                }
                let rest: Vec<usize> = j.iter().enumerate().filter(|(q, _)| *q != m).map(|(_, v)| *v).collect();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * partials[j[m]].get(&rest);
            }
            out.comp_mut()[n] = acc;
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrips() {
        let spec = LatticeSpec::new(3, 8, 2).unwrap();
        for s in 0..spec.num_sites() {
            assert_eq!(spec.site_of(spec.site_index(s)), s);
        }
        let s = spec.site_of([7, 0, 3]);
        assert_eq!(spec.site_index(spec.shift(s, 0, 1)), [0, 0, 3]);
        assert_eq!(spec.site_index(spec.shift(s, 1, -1)), [7, 7, 3]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(LatticeSpec::new(0, 16, 2).is_err());
        assert!(LatticeSpec::new(4, 16, 2).is_err());
        assert!(LatticeSpec::new(1, 4, 2).is_err());
        assert!(LatticeSpec::new(1, 16, 3).is_err());
        let bad: Result<LatticeSpec, _> = serde_json::from_str(r#"{"active_dims":1,"points":16,"fd_order":2,"x":1}"#);
        assert!(bad.is_err());
        let ok: LatticeSpec = serde_json::from_str(r#"{"active_dims":2,"points":16}"#).unwrap();
        assert_eq!(ok.fd_order(), 2);
    }

    #[test]
    fn stencils_have_their_order() {
        for order in [2, 4] {
            let errs: Vec<f64> = [16, 32]
                .iter()
                .map(|&n| {
                    let spec = LatticeSpec::new(1, n, order).unwrap();
                    let f: Vec<f64> = (0..n).map(|s| spec.coordinates(s)[0].sin()).collect();
                    (0..n)
                        .map(|s| (spec.derivative(&f, s, 0) - spec.coordinates(s)[0].cos()).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            let p = (errs[0] / errs[1]).log2();
            assert!((p - order as f64).abs() < 0.1, "order {order}: measured {p}");
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let spec = LatticeSpec::new(2, 12, 4).unwrap();
        let field: Vec<AltForm> = (0..spec.num_sites())
            .map(|s| {
                let x = spec.coordinates(s);
                let comp = (0..28).map(|n| (x[0] * (n % 3) as f64 + x[1]).sin() * (n as f64 + 1.0)).collect();
                AltForm::new(2, comp).unwrap()
            })
            .collect();
        let dd = exterior_derivative(&spec, &exterior_derivative(&spec, &field));
        assert!(dd.iter().all(|w| w.max_abs() < 1e-12));
    }
}
