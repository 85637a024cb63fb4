//! Alternating forms in compressed storage.
//!
//! A degree-k form keeps one component per strictly increasing multi-index,
//! ordered lexicographically, so `comp.len() == C(8, k)`. The basis element
//! for `I = (i1 < .. < ik)` is `e^{i1} ∧ .. ∧ e^{ik}` and its expansion is the
//! totally antisymmetric tensor with `T[I] = 1`.

use crate::metric::Metric;
use crate::perm::{factorial, permutations, sort_sign};
use crate::tensor::{pow8, Tensor};
use crate::{Mat8, DIM};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormError {
    #[error("degree {0} outside 0..=8")]
    Degree(usize),
    #[error("degree {degree} needs {expected} components, got {got}")]
    Length { degree: usize, expected: usize, got: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("frame is singular")]
    SingularFrame,
    #[error("wedge degree {0} exceeds 8")]
    WedgeTooLarge(usize),
}

struct Tables {
    lists: Vec<Vec<Vec<usize>>>,
    index_of_mask: [usize; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut lists: Vec<Vec<Vec<usize>>> = vec![Vec::new(); DIM + 1];
        // Lexicographic order of increasing tuples: recurse on the first element.
        fn rec(start: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..DIM {
                cur.push(i);
                rec(i + 1, k, cur, out);
                cur.pop();
            }
        }
        for (k, list) in lists.iter_mut().enumerate() {
            rec(0, k, &mut Vec::new(), list);
        }
        let mut index_of_mask = [0usize; 256];
        for list in &lists {
            for (n, idx) in list.iter().enumerate() {
                index_of_mask[mask(idx)] = n;
            }
        }
        Tables { lists, index_of_mask }
    })
}

fn mask(idx: &[usize]) -> usize {
    idx.iter().fold(0, |m, &i| m | (1 << i))
}

/// Increasing multi-indices of length k in storage order.
pub fn multi_indices(k: usize) -> &'static [Vec<usize>] {
    &tables().lists[k]
}

/// Storage position of an increasing multi-index.
pub fn position(sorted: &[usize]) -> usize {
    tables().index_of_mask[mask(sorted)]
}

pub fn binomial8(k: usize) -> usize {
    multi_indices(k).len()
}

/// Complement of a sorted multi-index in {0..7}, sorted.
pub fn complement(idx: &[usize]) -> Vec<usize> {
    (0..DIM).filter(|i| !idx.contains(i)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltForm {
    degree: usize,
    comp: Vec<f64>,
}

impl AltForm {
    pub fn zeros(degree: usize) -> Self {
        assert!(degree <= DIM, "degree {degree} > 8");
        AltForm { degree, comp: vec![0.0; binomial8(degree)] }
    }

    pub fn new(degree: usize, comp: Vec<f64>) -> Result<Self, FormError> {
        if degree > DIM {
            return Err(FormError::Degree(degree));
        }
        let expected = binomial8(degree);
        if comp.len() != expected {
            return Err(FormError::Length { degree, expected, got: comp.len() });
        }
        Ok(AltForm { degree, comp })
    }

    pub fn basis(degree: usize, n: usize) -> Self {
        let mut w = AltForm::zeros(degree);
        w.comp[n] = 1.0;
        w
    }

    /// Sum of `coef · e^{i1} ∧ .. ∧ e^{ik}`; indices need not be sorted.
    pub fn from_terms(degree: usize, terms: &[(f64, &[usize])]) -> Self {
        let mut w = AltForm::zeros(degree);
        for (c, idx) in terms {
            assert_eq!(idx.len(), degree);
            let s = sort_sign(idx);
            if s != 0.0 {
                let mut sorted = idx.to_vec();
                sorted.sort_unstable();
                w.comp[position(&sorted)] += s * c;
            }
        }
        w
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn comp(&self) -> &[f64] {
        &self.comp
    }

    pub fn comp_mut(&mut self) -> &mut [f64] {
        &mut self.comp
    }

    pub fn into_comp(self) -> Vec<f64> {
        self.comp
    }

    /// Component at an arbitrary multi-index (sign from reordering, 0 on repeats).
    pub fn get(&self, idx: &[usize]) -> f64 {
        let s = sort_sign(idx);
        if s == 0.0 {
            return 0.0;
        }
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        s * self.comp[position(&sorted)]
    }

    pub fn expand(&self) -> Tensor {
        let k = self.degree;
        let mut t = Tensor::zeros(k);
        for (n, idx) in multi_indices(k).iter().enumerate() {
            let c = self.comp[n];
            if c == 0.0 {
                continue;
            }
            for p in permutations(k) {
                let off = p.perm.iter().fold(0, |acc, &m| acc * DIM + idx[m]);
                t.data_mut()[off] = p.sign * c;
            }
        }
        t
    }

    /// Read the sorted-index components of a tensor assumed antisymmetric.
    pub fn compress(t: &Tensor) -> Self {
        let k = t.rank();
        let comp = multi_indices(k).iter().map(|idx| t.get(idx)).collect();
        AltForm { degree: k, comp }
    }

    /// Weight-one antisymmetrisation of an arbitrary tensor, compressed.
    pub fn alt_of(t: &Tensor) -> Self {
        let k = t.rank();
        let perms = permutations(k);
        let inv = 1.0 / perms.len() as f64;
        let data = t.data();
        let comp = multi_indices(k)
            .iter()
            .map(|idx| {
                let mut acc = 0.0;
                for p in perms {
                    let off = p.perm.iter().fold(0, |a, &m| a * DIM + idx[m]);
                    acc += p.sign * data[off];
                }
                acc * inv
            })
            .collect();
        AltForm { degree: k, comp }
    }

    pub fn scale(&self, s: f64) -> AltForm {
        AltForm { degree: self.degree, comp: self.comp.iter().map(|x| x * s).collect() }
    }

    pub fn axpy(&mut self, s: f64, other: &AltForm) {
        assert_eq!(self.degree, other.degree, "degree mismatch in axpy");
        for (a, b) in self.comp.iter_mut().zip(&other.comp) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &AltForm) -> AltForm {
        let mut w = self.clone();
        w.axpy(1.0, other);
        w
    }

    pub fn sub(&self, other: &AltForm) -> AltForm {
        let mut w = self.clone();
        w.axpy(-1.0, other);
        w
    }

    pub fn max_abs(&self) -> f64 {
        self.comp.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Sum over increasing multi-indices of products of components (Euclidean pairing).
    pub fn dot(&self, other: &AltForm) -> f64 {
        assert_eq!(self.degree, other.degree);
        self.comp.iter().zip(&other.comp).map(|(a, b)| a * b).sum()
    }

    /// Form inner product `(1/k!) u_I v^I` using the metric to raise `v`.
    pub fn inner(&self, other: &AltForm, metric: &Metric) -> f64 {
        if metric.is_euclidean() {
            return self.dot(other);
        }
        let raised = AltForm::compress(&other.expand().act(metric.g_inv()));
        self.dot(&raised)
    }

    /// Full contraction `w^{I} w_{I}` over all index orderings, i.e. `k! ⟨w, w⟩`.
    pub fn full_norm_sq(&self, metric: &Metric) -> f64 {
        factorial(self.degree) as f64 * self.inner(self, metric)
    }

    pub fn wedge(&self, other: &AltForm) -> Result<AltForm, FormError> {
        let k = self.degree + other.degree;
        if k > DIM {
            return Err(FormError::WedgeTooLarge(k));
        }
        let mut out = AltForm::zeros(k);
        let lb = multi_indices(other.degree);
        for (i, a) in multi_indices(self.degree).iter().enumerate() {
            let ca = self.comp[i];
            if ca == 0.0 {
                continue;
            }
            let ma = mask(a);
            for (j, b) in lb.iter().enumerate() {
                let cb = other.comp[j];
                if cb == 0.0 || ma & mask(b) != 0 {
                    continue;
                }
                let joined: Vec<usize> = a.iter().chain(b).copied().collect();
                let s = sort_sign(&joined);
                out.comp[tables().index_of_mask[ma | mask(b)]] += s * ca * cb;
            }
        }
        Ok(out)
    }

    /// Hodge dual: `(⋆w)_J = orientation · √det g · sign(J, Jᶜ) · w^{Jᶜ}`.
    /// Equivalent to `(1/k!) ε_J^{I} w_I`. On Euclidean 8-space `⋆⋆ = (-1)^k`.
    pub fn hodge_star(&self, metric: &Metric, orientation: f64) -> AltForm {
        let k = self.degree;
        let raised = if metric.is_euclidean() {
            self.clone()
        } else {
            AltForm::compress(&self.expand().act(metric.g_inv()))
        };
        let scale = orientation * metric.sqrt_det();
        let mut out = AltForm::zeros(DIM - k);
        for (n, j) in multi_indices(DIM - k).iter().enumerate() {
            let jc = complement(j);
            let joined: Vec<usize> = j.iter().chain(&jc).copied().collect();
            out.comp[n] = scale * sort_sign(&joined) * raised.comp[position(&jc)];
        }
        out
    }

    /// Pullback action `(e·w)_{a..d} = e_a^p .. e_d^s w_{p..s}`.
    pub fn frame_act(&self, e: &Mat8) -> Result<AltForm, FormError> {
        let det = e.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(FormError::SingularFrame);
        }
        Ok(self.act_unchecked(e))
    }

    /// Frame action without the singularity check; also valid for derivations' building blocks.
    pub fn act_unchecked(&self, e: &Mat8) -> AltForm {
        let k = self.degree;
        let mut out = AltForm::zeros(k);
        // (e·w)_I = Σ_J det(e[I, J]) w_J
        let lists = multi_indices(k);
        let mut sub = vec![0.0; k * k];
        for (ni, i) in lists.iter().enumerate() {
            let mut acc = 0.0;
            for (nj, j) in lists.iter().enumerate() {
                let c = self.comp[nj];
                if c == 0.0 {
                    continue;
                }
                for r in 0..k {
                    for s in 0..k {
                        sub[r * k + s] = e[(i[r], j[s])];
                    }
                }
                acc += c * small_det(&mut sub, k);
            }
            out.comp[ni] = acc;
        }
        out
    }

    /// Derivation action of `m ∈ gl(8)`: `Σ_slots m` applied to one slot.
    pub fn derivation(&self, m: &Mat8) -> AltForm {
        let k = self.degree;
        let mut out = AltForm::zeros(k);
        let lists = multi_indices(k);
        for (ni, i) in lists.iter().enumerate() {
            let mut acc = 0.0;
            let mut idx = i.clone();
            for s in 0..k {
                for p in 0..DIM {
                    let m_ip = m[(i[s], p)];
                    if m_ip == 0.0 {
                        continue;
                    }
                    idx[s] = p;
                    acc += m_ip * self.get(&idx);
                }
                idx[s] = i[s];
            }
            out.comp[ni] = acc;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.comp.iter().all(|x| x.is_finite())
    }
}

fn small_det(a: &mut [f64], n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => {
            let mut det = 1.0;
            for c in 0..n {
                let mut piv = c;
                for r in c + 1..n {
                    if a[r * n + c].abs() > a[piv * n + c].abs() {
                        piv = r;
                    }
                }
                if a[piv * n + c] == 0.0 {
                    return 0.0;
                }
                if piv != c {
                    for s in 0..n {
                        a.swap(c * n + s, piv * n + s);
                    }
                    det = -det;
                }
                let d = a[c * n + c];
                det *= d;
                for r in c + 1..n {
                    let f = a[r * n + c] / d;
                    if f != 0.0 {
                        for s in c..n {
                            a[r * n + s] -= f * a[c * n + s];
                        }
                    }
                }
            }
            det
        }
    }
}

/// Component of the alternating symbol with `ε_{01234567} = orientation`.
pub fn epsilon_component(idx: &[usize; 8], orientation: f64) -> f64 {
    orientation * sort_sign(idx)
}

/// The dense rank-8 alternating symbol (8^8 components, about 134 MB).
pub fn epsilon8(orientation: f64) -> Tensor {
    let mut t = Tensor::zeros(8);
    for p in permutations(8) {
        let off = p.perm.iter().fold(0, |acc, &m| acc * DIM + m);
        t.data_mut()[off] = orientation * p.sign;
    }
    debug_assert_eq!(t.data().len(), pow8(8));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_form(k: usize, rng: &mut ChaCha8Rng) -> AltForm {
        AltForm::new(k, (0..binomial8(k)).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn table_sizes() {
        let sizes: Vec<usize> = (0..=8).map(binomial8).collect();
        assert_eq!(sizes, vec![1, 8, 28, 56, 70, 56, 28, 8, 1]);
        assert_eq!(multi_indices(3)[0], vec![0, 1, 2]);
        assert_eq!(multi_indices(3)[1], vec![0, 1, 3]);
        assert_eq!(position(&[5, 6, 7]), 55);
    }

    #[test]
    fn expand_compress_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..=5 {
            let w = rand_form(k, &mut rng);
            let t = w.expand();
            assert_eq!(AltForm::compress(&t), w);
            assert!(AltForm::alt_of(&t).sub(&w).max_abs() < 1e-14);
        }
    }

    #[test]
    fn expansion_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t = rand_form(4, &mut rng).expand();
        let swapped = t.permute(&[0, 2, 1, 3]);
        assert_eq!(t.add(&swapped).max_abs(), 0.0);
    }

    #[test]
    fn hodge_of_basis_four_form() {
        let w = AltForm::from_terms(4, &[(1.0, &[0, 1, 2, 3])]);
        let s = w.hodge_star(&Metric::euclidean(), 1.0);
        assert_eq!(s, AltForm::from_terms(4, &[(1.0, &[4, 5, 6, 7])]));
    }

    #[test]
    fn double_star_sign_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = Metric::euclidean();
        for k in 0..=8 {
            let u = rand_form(k, &mut rng);
            let v = rand_form(k, &mut rng);
            let ss = u.hodge_star(&g, 1.0).hodge_star(&g, 1.0);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!(ss.sub(&u.scale(sign)).max_abs() < 1e-15);
            let d = u.hodge_star(&g, 1.0).dot(&v.hodge_star(&g, 1.0)) - u.dot(&v);
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn wedge_matches_basis_rule() {
        let a = AltForm::from_terms(1, &[(1.0, &[3])]);
        let b = AltForm::from_terms(2, &[(1.0, &[0, 5])]);
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.get(&[3, 0, 5]), 1.0);
        assert_eq!(w.get(&[0, 3, 5]), -1.0);
        assert!(a.wedge(&AltForm::zeros(8)).is_err());
    }

    #[test]
    fn frame_action_minors_match_dense_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let e = Mat8::from_fn(|_, _| rng.random_range(-1.0..1.0));
        for k in 1..=4 {
            let w = rand_form(k, &mut rng);
            let dense = AltForm::compress(&w.expand().act(&e));
            assert!(w.frame_act(&e).unwrap().sub(&dense).max_abs() < 1e-12);
            let der = AltForm::compress(&w.expand().derivation(&e));
            assert!(w.derivation(&e).sub(&der).max_abs() < 1e-12);
        }
        assert_eq!(AltForm::zeros(2).frame_act(&Mat8::zeros()), Err(FormError::SingularFrame));
    }

    #[test]
    fn epsilon_entries() {
        assert_eq!(epsilon_component(&[0, 1, 2, 3, 4, 5, 6, 7], 1.0), 1.0);
        assert_eq!(epsilon_component(&[1, 0, 2, 3, 4, 5, 6, 7], 1.0), -1.0);
        assert_eq!(epsilon_component(&[0, 0, 2, 3, 4, 5, 6, 7], 1.0), 0.0);
    }
}
