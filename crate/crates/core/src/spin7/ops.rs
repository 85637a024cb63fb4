//! J-operators, projectors onto irreducible pieces, the K and K′ maps and
//! the Λ⁴₂₇ parametrisation.

use super::{CayleyStructure, Spin7Error};
use crate::form::{binomial8, multi_indices, AltForm};
use crate::tensor::{einsum, Tensor};
use crate::Mat8;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Irreducible Spin(7) pieces of Λ², Λ³, Λ⁴.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    L2_7,
    L2_21,
    L3_8,
    L3_48,
    L4_1,
    L4_7,
    L4_27,
    L4_35,
}

impl Space {
    pub const ALL: [Space; 8] =
        [Space::L2_7, Space::L2_21, Space::L3_8, Space::L3_48, Space::L4_1, Space::L4_7, Space::L4_27, Space::L4_35];

    pub fn degree(self) -> usize {
        match self {
            Space::L2_7 | Space::L2_21 => 2,
            Space::L3_8 | Space::L3_48 => 3,
            _ => 4,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Space::L2_7 => 7,
            Space::L2_21 => 21,
            Space::L3_8 => 8,
            Space::L3_48 => 48,
            Space::L4_1 => 1,
            Space::L4_7 => 7,
            Space::L4_27 => 27,
            Space::L4_35 => 35,
        }
    }

    /// Eigenvalue of the J-operator of the same degree on this piece.
    pub fn eigenvalue(self) -> f64 {
        match self {
            Space::L2_7 => -3.0,
            Space::L2_21 => 1.0,
            Space::L3_8 => -6.0,
            Space::L3_48 => 1.0,
            Space::L4_1 => -12.0,
            Space::L4_7 => -6.0,
            Space::L4_27 => 2.0,
            Space::L4_35 => 0.0,
        }
    }

    pub fn of_degree(degree: usize) -> &'static [Space] {
        match degree {
            2 => &Space::ALL[0..2],
            3 => &Space::ALL[2..4],
            4 => &Space::ALL[4..8],
            _ => &[],
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.degree(), self.dim())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown space `{0}` (expected one of 2_7 2_21 3_8 3_48 4_1 4_7 4_27 4_35)")]
pub struct SpaceParseError(pub String);

impl FromStr for Space {
    type Err = SpaceParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches("L").trim_start_matches("Lambda");
        Space::ALL
            .iter()
            .copied()
            .find(|sp| sp.to_string() == t)
            .ok_or_else(|| SpaceParseError(s.to_string()))
    }
}

/// A linear map on compressed forms of one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct FormOperator {
    degree: usize,
    matrix: DMatrix<f64>,
}

impl FormOperator {
    pub fn new(degree: usize, matrix: DMatrix<f64>) -> Self {
        let n = binomial8(degree);
        assert_eq!(matrix.shape(), (n, n), "operator shape");
        FormOperator { degree, matrix }
    }

    pub fn identity(degree: usize) -> Self {
        let n = binomial8(degree);
        FormOperator { degree, matrix: DMatrix::identity(n, n) }
    }

    /// Matrix of a linear map given by its action on forms.
    pub fn from_fn(degree: usize, f: impl Fn(&AltForm) -> AltForm) -> Self {
        let n = binomial8(degree);
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = f(&AltForm::basis(degree, j));
            assert_eq!(col.degree(), degree);
            for (i, v) in col.comp().iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        FormOperator { degree, matrix: m }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, w: &AltForm) -> AltForm {
        assert_eq!(w.degree(), self.degree, "operator degree");
        let v = &self.matrix * nalgebra::DVector::from_column_slice(w.comp());
        AltForm::new(self.degree, v.as_slice().to_vec()).expect("length")
    }

    pub fn compose(&self, other: &FormOperator) -> FormOperator {
        FormOperator { degree: self.degree, matrix: &self.matrix * &other.matrix }
    }

    pub fn add(&self, other: &FormOperator) -> FormOperator {
        FormOperator { degree: self.degree, matrix: &self.matrix + &other.matrix }
    }

    pub fn sub(&self, other: &FormOperator) -> FormOperator {
        FormOperator { degree: self.degree, matrix: &self.matrix - &other.matrix }
    }

    pub fn scale(&self, s: f64) -> FormOperator {
        FormOperator { degree: self.degree, matrix: &self.matrix * s }
    }

    /// `self + s·I`
    pub fn shift(&self, s: f64) -> FormOperator {
        let n = self.matrix.nrows();
        FormOperator { degree: self.degree, matrix: &self.matrix + DMatrix::identity(n, n) * s }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Numeric rank: singular values below `rel_tol·σ_max` count as zero.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let sv = self.matrix.clone().singular_values();
        let smax = sv.max();
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > rel_tol * smax).count()
    }

    /// Dimension of the λ-eigenspace, `n - rank(J - λI)` at relative tolerance 1e-8.
    pub fn eigenspace_dim(&self, lambda: f64) -> usize {
        self.matrix.nrows() - self.shift(-lambda).rank(1e-8)
    }

    /// Real parts of the eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = &self.matrix;
        let mut ev: Vec<f64> = if (m - m.transpose()).amax() <= 1e-12 * m.amax().max(1.0) {
            m.clone().symmetric_eigenvalues().iter().copied().collect()
        } else {
            m.clone().complex_eigenvalues().iter().map(|z| z.re).collect()
        };
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        ev
    }

    /// Eigenvalues grouped within `tol`, as (mean value, multiplicity).
    pub fn spectrum(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut group: Vec<f64> = Vec::new();
        for v in self.eigenvalues() {
            if let Some(&last) = group.last() {
                if v - last > tol {
                    out.push((group.iter().sum::<f64>() / group.len() as f64, group.len()));
                    group.clear();
                }
            }
            group.push(v);
        }
        if !group.is_empty() {
            out.push((group.iter().sum::<f64>() / group.len() as f64, group.len()));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub(crate) struct OperatorTable {
    j: [FormOperator; 3],
    projectors: Vec<(Space, FormOperator)>,
}

impl OperatorTable {
    pub(crate) fn build(cs: &CayleyStructure) -> Self {
        let j = [2, 3, 4].map(|k| FormOperator::from_fn(k, |w| cs.j_formula(w)));
        let id = |k: usize| FormOperator::identity(k);
        let (j2, j3, j4) = (&j[0], &j[1], &j[2]);
        let poly = |roots: &[f64], norm: f64| {
            let mut acc = id(4);
            for r in roots {
                acc = acc.compose(&j4.shift(-r));
            }
            acc.scale(1.0 / norm)
        };
        let projectors = vec![
            (Space::L2_7, id(2).sub(j2).scale(0.25)),
            (Space::L2_21, j2.shift(3.0).scale(0.25)),
            (Space::L3_8, id(3).sub(j3).scale(1.0 / 7.0)),
            (Space::L3_48, j3.shift(6.0).scale(1.0 / 7.0)),
            (Space::L4_1, poly(&[0.0, -6.0, 2.0], -1008.0)),
            (Space::L4_7, poly(&[0.0, -12.0, 2.0], 288.0)),
            (Space::L4_27, poly(&[0.0, -12.0, -6.0], 224.0)),
            (Space::L4_35, poly(&[-12.0, -6.0, 2.0], -144.0)),
        ];
        OperatorTable { j, projectors }
    }
}

impl CayleyStructure {
    /// Index formulas: `J₂(β)_{ij} = ½Φ_{ij}^{pq}β_{pq}`,
    /// `J₃(γ)_{ijk} = (3/2)Φ_{[ij}^{pq}γ_{k]pq}`, `J₄(σ)_{ijkl} = 3Φ_{[ij}^{pq}σ_{kl]pq}`.
    pub fn j_formula(&self, w: &AltForm) -> AltForm {
        let m = self.phi_mixed22();
        let t = w.expand();
        match w.degree() {
            2 => AltForm::compress(&einsum("ijpq,pq->ij", &[m, &t]).scale(0.5)),
            3 => AltForm::alt_of(&einsum("ijpq,kpq->ijk", &[m, &t])).scale(1.5),
            4 => AltForm::alt_of(&einsum("ijpq,klpq->ijkl", &[m, &t])).scale(3.0),
            d => panic!("J is defined on degrees 2, 3, 4, not {d}"),
        }
    }

    pub fn j_operator(&self, degree: usize) -> Result<&FormOperator, Spin7Error> {
        match degree {
            2..=4 => Ok(&self.ops().j[degree - 2]),
            d => Err(Spin7Error::UnsupportedDegree(d)),
        }
    }

    pub fn projector(&self, space: Space) -> &FormOperator {
        &self.ops().projectors.iter().find(|(s, _)| *s == space).expect("all spaces built").1
    }

    /// `J₃⁻¹ = (J₃ + 5)/6`
    pub fn j3_inverse(&self) -> FormOperator {
        self.ops().j[1].shift(5.0).scale(1.0 / 6.0)
    }

    /// `K(H)_{ijkl} = 4 H_{[i}{}^p Φ_{|p|jkl]}` for `H` with both indices down.
    pub fn k_map(&self, h: &Mat8) -> AltForm {
        let hm = h * self.metric().g_inv();
        AltForm::alt_of(&self.phi_lower().apply_slot(0, &hm)).scale(4.0)
    }

    /// `K′(σ)_{ij} = ½Φ_j{}^{pqr}σ_{ipqr} - ½Φ_i{}^{pqr}σ_{jpqr}`; satisfies `K′∘K = 96π₇`.
    pub fn kprime_map(&self, sigma: &AltForm) -> Mat8 {
        let a = einsum("ipqr,jpqr->ij", &[&sigma.expand(), self.phi_mixed13()]).to_mat() * 0.5;
        a - a.transpose()
    }

    /// `π₇` on a 2-form stored as an antisymmetric matrix.
    pub fn pi7_matrix(&self, beta: &Mat8) -> Mat8 {
        let b = AltForm::compress(&Tensor::from_mat(beta));
        self.projector(Space::L2_7).apply(&b).expand().to_mat()
    }

    /// `X ↦ X^p Φ_{pijk}`, landing in Λ³₈.
    pub fn lambda3_8_embed(&self, x: &[f64; 8]) -> AltForm {
        let v = Tensor::from_fn(1, |i| x[i[0]]);
        AltForm::compress(&einsum("p,pijk->ijk", &[&v, self.phi_lower()]))
    }

    /// Split a form of degree 2, 3 or 4 into its irreducible pieces.
    pub fn decompose(&self, w: &AltForm) -> Result<Decomposition, Spin7Error> {
        let spaces = Space::of_degree(w.degree());
        if spaces.is_empty() {
            return Err(Spin7Error::UnsupportedDegree(w.degree()));
        }
        let parts = spaces.iter().map(|s| (*s, self.projector(*s).apply(w))).collect();
        Ok(Decomposition { degree: w.degree(), parts })
    }

    /// `Φ_{[ij}^{ab}Φ_{kl]}^{cd}σ_{abcd}`
    fn phi_phi_sigma(&self, sigma: &Tensor) -> AltForm {
        let m = self.phi_mixed22();
        let x = einsum("klcd,abcd->klab", &[m, sigma]);
        AltForm::alt_of(&einsum("ijab,klab->ijkl", &[m, &x]))
    }

    fn phi_sigma(&self, sigma: &Tensor) -> AltForm {
        AltForm::alt_of(&einsum("ijab,klab->ijkl", &[self.phi_mixed22(), sigma]))
    }

    fn phi_dot(&self, sigma: &Tensor) -> f64 {
        self.phi_upper().dot(sigma)
    }

    /// Closed-form projector onto Λ⁴₂₇:
    /// `(3/32)(ΦΦσ - 4Φσ - (1/7)Φ(Φ·σ) + 4σ)`.
    pub fn projector27_closed(&self, sigma: &AltForm) -> AltForm {
        let t = sigma.expand();
        let mut out = self.phi_phi_sigma(&t);
        out.axpy(-4.0, &self.phi_sigma(&t));
        out.axpy(-self.phi_dot(&t) / 7.0, self.phi());
        out.axpy(4.0, sigma);
        out.scale(3.0 / 32.0)
    }

    /// Closed-form complement `(1/32)(20σ - 3ΦΦσ + 12Φσ + (3/7)Φ(Φ·σ))`.
    pub fn complement27_closed(&self, sigma: &AltForm) -> AltForm {
        let t = sigma.expand();
        let mut out = sigma.scale(20.0);
        out.axpy(-3.0, &self.phi_phi_sigma(&t));
        out.axpy(12.0, &self.phi_sigma(&t));
        out.axpy(3.0 / 7.0 * self.phi_dot(&t), self.phi());
        out.scale(1.0 / 32.0)
    }

    /// `π₇ ∘ σ ∘ π₇` with σ read as a map on 2-forms, antisymmetrised back to Λ⁴,
    /// by literal composition of projector tensors.
    pub fn pi7_sigma_pi7(&self, sigma: &AltForm) -> AltForm {
        let p7 = self.pi7_tensor();
        let x = einsum("abcd,klcd->abkl", &[&sigma.expand(), &p7]);
        AltForm::alt_of(&einsum("ijab,abkl->ijkl", &[&p7, &x]))
    }

    /// Closed form `(1/64)(ΦΦσ - 4Φσ + 4σ)` of [`CayleyStructure::pi7_sigma_pi7`].
    pub fn pi7_sigma_pi7_closed(&self, sigma: &AltForm) -> AltForm {
        let t = sigma.expand();
        let mut out = self.phi_phi_sigma(&t);
        out.axpy(-4.0, &self.phi_sigma(&t));
        out.axpy(4.0, sigma);
        out.scale(1.0 / 64.0)
    }

    /// `(π₇)_{ij}{}^{ab} = ¼(δ_{[i}^a δ_{j]}^b - ½Φ_{ij}{}^{ab})`
    pub fn pi7_tensor(&self) -> Tensor {
        let m = self.phi_mixed22();
        Tensor::from_fn(4, |x| {
            let (i, j, a, b) = (x[0], x[1], x[2], x[3]);
            let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
            0.25 * (0.5 * (d(i, a) * d(j, b) - d(i, b) * d(j, a)) - 0.5 * m.get(x))
        })
    }
}

/// Irreducible pieces of a form, in the fixed order of [`Space::of_degree`].
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub degree: usize,
    pub parts: Vec<(Space, AltForm)>,
}

impl Decomposition {
    pub fn sum(&self) -> AltForm {
        let mut s = AltForm::zeros(self.degree);
        for (_, p) in &self.parts {
            s.axpy(1.0, p);
        }
        s
    }

    pub fn part(&self, space: Space) -> Option<&AltForm> {
        self.parts.iter().find(|(s, _)| *s == space).map(|(_, p)| p)
    }

    /// Max over parts of `|J(part) - λ part|`.
    pub fn eigen_residual(&self, cs: &CayleyStructure) -> f64 {
        let j = cs.j_operator(self.degree).expect("degree checked at construction");
        self.parts
            .iter()
            .map(|(s, p)| j.apply(p).sub(&p.scale(s.eigenvalue())).max_abs())
            .fold(0.0, f64::max)
    }
}

/// A symmetric tracefree element of Λ²₇ ⊗ Λ²₇, stored as a 28×28 matrix on
/// increasing index pairs with both pairs down.
#[derive(Clone, Debug, PartialEq)]
pub struct Psi27 {
    psi: DMatrix<f64>,
}

impl Psi27 {
    pub fn zero() -> Self {
        Psi27 { psi: DMatrix::zeros(28, 28) }
    }

    pub fn from_matrix(psi: DMatrix<f64>) -> Self {
        assert_eq!(psi.shape(), (28, 28));
        Psi27 { psi }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.psi
    }

    /// `π₇ M π₇ᵀ` for a Gaussian symmetric `M`, with its trace part removed.
    pub fn random<R: Rng + ?Sized>(cs: &CayleyStructure, rng: &mut R) -> Self {
        let m = DMatrix::<f64>::from_fn(28, 28, |_, _| rng.sample(StandardNormal));
        let m = (&m + m.transpose()) * 0.5;
        let p7 = cs.projector(Space::L2_7).matrix();
        let raw = p7 * m * p7.transpose();
        // the identity of Λ²₇ with both pairs lowered
        let unit = p7 * pair_metric(cs.metric().g()) * p7.transpose();
        let t = trace_with(&raw, cs) / trace_with(&unit, cs);
        Psi27 { psi: raw - unit * t }
    }

    /// `Ψ_{ab}{}^{ab}`
    pub fn trace(&self, cs: &CayleyStructure) -> f64 {
        trace_with(&self.psi, cs)
    }

    /// Pair-exchange symmetry, tracelessness and `π₇Ψ = Ψ`, to `tol` relative to max(1, |Ψ|).
    pub fn validate(&self, cs: &CayleyStructure, tol: f64) -> Result<(), Spin7Error> {
        let scale = self.psi.amax().max(1.0);
        let asym = (&self.psi - self.psi.transpose()).amax();
        if asym > tol * scale {
            return Err(Spin7Error::Psi(format!("not pair-exchange symmetric ({asym:.2e})")));
        }
        let tr = self.trace(cs).abs();
        if tr > tol * scale {
            return Err(Spin7Error::Psi(format!("trace {tr:.2e}")));
        }
        let p7 = cs.projector(Space::L2_7).matrix();
        let off = (p7 * &self.psi - &self.psi).amax();
        if off > tol * scale {
            return Err(Spin7Error::Psi(format!("not in Λ²₇ ⊗ Λ²₇ ({off:.2e})")));
        }
        Ok(())
    }

    /// Dense `Ψ_{abcd}`.
    pub fn to_tensor(&self) -> Tensor {
        let pairs = multi_indices(2);
        let mut t = Tensor::zeros(4);
        for (i, ab) in pairs.iter().enumerate() {
            for (j, cd) in pairs.iter().enumerate() {
                let v = self.psi[(i, j)];
                let (a, b, c, d) = (ab[0], ab[1], cd[0], cd[1]);
                t.set(&[a, b, c, d], v);
                t.set(&[b, a, c, d], -v);
                t.set(&[a, b, d, c], -v);
                t.set(&[b, a, d, c], v);
            }
        }
        t
    }

    /// `(ΨΦ)_{abcd} = Ψ_{[ab}{}^{pq}Φ_{cd]pq}`
    pub fn embed(&self, cs: &CayleyStructure) -> Result<AltForm, Spin7Error> {
        self.validate(cs, 1e-9)?;
        Ok(AltForm::alt_of(&einsum("abrs,cdrs->abcd", &[&self.to_tensor(), cs.phi_mixed22()])))
    }
}

/// `g_{ac}g_{bd} - g_{ad}g_{bc}` on increasing pairs.
fn pair_metric(g: &Mat8) -> DMatrix<f64> {
    let pairs = multi_indices(2);
    DMatrix::from_fn(28, 28, |i, j| {
        let (a, b, c, d) = (pairs[i][0], pairs[i][1], pairs[j][0], pairs[j][1]);
        g[(a, c)] * g[(b, d)] - g[(a, d)] * g[(b, c)]
    })
}

fn trace_with(psi: &DMatrix<f64>, cs: &CayleyStructure) -> f64 {
    let up = pair_metric(cs.metric().g_inv());
    2.0 * (psi * up).trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_form, random_frame, random_matrix, random_vector};
    use crate::DIM;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> CayleyStructure {
        CayleyStructure::reference()
    }

    #[test]
    fn spectra_and_multiplicities() {
        let cs = reference();
        let expect: [&[(f64, usize)]; 3] = [
            &[(-3.0, 7), (1.0, 21)],
            &[(-6.0, 8), (1.0, 48)],
            &[(-12.0, 1), (-6.0, 7), (0.0, 35), (2.0, 27)],
        ];
        for (k, exp) in (2..=4).zip(expect) {
            let j = cs.j_operator(k).unwrap();
            let spec = j.spectrum(1e-6);
            assert_eq!(spec.len(), exp.len());
            for ((v, m), (ev, em)) in spec.iter().zip(exp) {
                assert!((v - ev).abs() < 1e-10);
                assert_eq!(m, em);
                assert_eq!(j.eigenspace_dim(*ev), *em);
            }
        }
        assert!(cs.j_operator(5).is_err());
    }

    #[test]
    fn minimal_polynomials() {
        let cs = reference();
        let j2 = cs.j_operator(2).unwrap();
        let j3 = cs.j_operator(3).unwrap();
        let j4 = cs.j_operator(4).unwrap();
        assert!(j2.compose(j2).add(&j2.scale(2.0)).shift(-3.0).max_abs() < 1e-10);
        assert!(j3.compose(j3).add(&j3.scale(5.0)).shift(-6.0).max_abs() < 1e-10);
        let p = j4.shift(12.0).compose(&j4.shift(6.0)).compose(&j4.shift(-2.0)).compose(j4);
        assert!(p.max_abs() < 1e-10);
        assert!(j3.compose(&cs.j3_inverse()).shift(-1.0).max_abs() < 1e-10);
    }

    #[test]
    fn j_matrix_matches_naive_index_loop() {
        let cs = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = random_form(3, &mut rng);
        let p = cs.phi_lower();
        let gt = g.expand();
        let mut naive = Tensor::zeros(3);
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut s = 0.0;
                    for q in 0..DIM {
                        for r in 0..DIM {
                            // (3/2)·(1/3)(Φ_ij γ_k + Φ_jk γ_i + Φ_ki γ_j), cyclic sum suffices
                            s += p.get(&[i, j, q, r]) * gt.get(&[k, q, r])
                                + p.get(&[j, k, q, r]) * gt.get(&[i, q, r])
                                + p.get(&[k, i, q, r]) * gt.get(&[j, q, r]);
                        }
                    }
                    naive.set(&[i, j, k], 0.5 * s);
                }
            }
        }
        let m = cs.j_operator(3).unwrap().apply(&g);
        assert!(m.sub(&AltForm::compress(&naive)).max_abs() < 1e-12);
    }

    #[test]
    fn projectors_are_complete_idempotent_commuting() {
        let cs = reference();
        for k in 2..=4 {
            let j = cs.j_operator(k).unwrap();
            let mut sum = FormOperator::identity(k).scale(0.0);
            for s in Space::of_degree(k) {
                let p = cs.projector(*s);
                assert!(p.compose(p).sub(p).max_abs() < 1e-10);
                assert_eq!(p.rank(1e-8), s.dim());
                assert!((p.trace() - s.dim() as f64).abs() < 1e-10);
                assert!(p.compose(j).sub(&j.compose(p)).max_abs() < 1e-10);
                sum = sum.add(p);
            }
            assert!(sum.sub(&FormOperator::identity(k)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_projectors() {
        let cs = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let p27 = cs.projector(Space::L4_27);
        for _ in 0..3 {
            let s = random_form(4, &mut rng);
            let a = p27.apply(&s);
            assert!(cs.projector27_closed(&s).sub(&a).max_abs() < 1e-10);
            assert!(cs.complement27_closed(&s).sub(&s.sub(&a)).max_abs() < 1e-10);
            let x = cs.pi7_sigma_pi7(&s);
            assert!(x.sub(&cs.pi7_sigma_pi7_closed(&s)).max_abs() < 1e-12);
            let y = x.scale(6.0);
            let tr = y.dot(cs.phi()) / 14.0;
            let y = y.sub(&cs.phi().scale(tr));
            assert!(y.sub(&a).max_abs() < 1e-10);
        }
    }

    #[test]
    fn k_and_kprime() {
        let cs = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let p27 = cs.projector(Space::L4_27);
        let j4 = cs.j_operator(4).unwrap();
        for _ in 0..5 {
            let h = random_matrix(&mut rng);
            let kh = cs.k_map(&h);
            assert!(p27.apply(&kh).max_abs() < 1e-10);
            let hh = h - h.transpose();
            let rhs = cs.k_map(&hh).scale(-3.0).sub(&cs.phi().scale(6.0 * h.trace()));
            assert!(j4.apply(&kh).sub(&rhs).max_abs() < 1e-10);
            let b = (h - h.transpose()) * 0.5;
            let kk = cs.kprime_map(&cs.k_map(&b));
            assert!((kk - cs.pi7_matrix(&b) * 96.0).amax() < 1e-10);
            let kp = cs.kprime_map(&random_form(4, &mut rng));
            let kp_form = AltForm::compress(&Tensor::from_mat(&kp));
            assert!(cs.projector(Space::L2_21).apply(&kp_form).max_abs() < 1e-10);
        }
        // K(g) = 4Φ sits in the -12 eigenspace
        let kg = cs.k_map(&Mat8::identity());
        assert!(kg.sub(&cs.phi().scale(4.0)).max_abs() < 1e-14);
        assert!(j4.apply(&kg).add(&kg.scale(12.0)).max_abs() < 1e-10);
        // Λ²₂₁ is killed
        let b21 = cs.projector(Space::L2_21).apply(&random_form(2, &mut rng)).expand().to_mat();
        assert!(cs.k_map(&b21).max_abs() < 1e-12);
        let s35 = cs.projector(Space::L4_35).apply(&random_form(4, &mut rng));
        assert!(cs.kprime_map(&s35).amax() < 1e-12);
        assert_eq!(cs.kprime_map(&AltForm::zeros(4)), Mat8::zeros());
    }

    #[test]
    fn psi_embedding() {
        let cs = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let p27 = cs.projector(Space::L4_27);
        let mut images = Vec::new();
        for _ in 0..30 {
            let psi = Psi27::random(&cs, &mut rng);
            let w = psi.embed(&cs).unwrap();
            assert!(p27.apply(&w).sub(&w).max_abs() < 1e-10);
            let c = einsum("ipqr,apqr->ia", &[&w.expand(), cs.phi_mixed13()]);
            assert!(c.max_abs() < 1e-10);
            images.push(w);
        }
        let m = DMatrix::from_fn(70, images.len(), |i, j| images[j].comp()[i]);
        let sv = m.singular_values();
        let rank = sv.iter().filter(|s| **s > 1e-8 * sv.max()).count();
        assert_eq!(rank, 27);
        assert_eq!(Psi27::zero().embed(&cs).unwrap(), AltForm::zeros(4));
        let bad = Psi27::from_matrix(DMatrix::identity(28, 28));
        assert!(bad.embed(&cs).is_err());
    }

    #[test]
    fn decomposition_and_lambda3() {
        let cs = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let w = random_form(4, &mut rng);
        let d = cs.decompose(&w).unwrap();
        assert!(d.sum().sub(&w).max_abs() < 1e-12);
        assert!(d.eigen_residual(&cs) < 1e-10);
        let dphi = cs.decompose(cs.phi()).unwrap();
        assert!(dphi.part(Space::L4_1).unwrap().sub(cs.phi()).max_abs() < 1e-12);
        let x = random_vector(&mut rng);
        let g8 = cs.lambda3_8_embed(&x);
        let j3 = cs.j_operator(3).unwrap();
        assert!(j3.apply(&g8).add(&g8.scale(6.0)).max_abs() < 1e-10);
        let g48 = cs.projector(Space::L3_48).apply(&random_form(3, &mut rng));
        assert!(g48.wedge(cs.phi()).unwrap().max_abs() < 1e-12);
        assert!(cs.decompose(&AltForm::zeros(5)).is_err());
    }

    #[test]
    fn xi_square_identity() {
        let cs = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let xi = cs.projector(Space::L2_7).apply(&random_form(2, &mut rng)).expand().to_mat();
        let lhs = xi.transpose() * xi;
        let xi2 = xi.component_mul(&xi).sum();
        assert!((lhs - Mat8::identity() * (xi2 / 8.0)).amax() < 1e-12);
    }

    #[test]
    fn operators_on_transformed_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let cs = CayleyStructure::from_frame(&random_frame(&mut rng, 0.5)).unwrap();
        let j4 = cs.j_operator(4).unwrap();
        for (v, m) in [(-12.0, 1), (-6.0, 7), (2.0, 27), (0.0, 35)] {
            assert_eq!(j4.eigenspace_dim(v), m);
        }
        let psi = Psi27::random(&cs, &mut rng);
        let w = psi.embed(&cs).unwrap();
        assert!(cs.projector(Space::L4_27).apply(&w).sub(&w).max_abs() < 1e-9);
    }

    #[test]
    fn space_labels_roundtrip() {
        for s in Space::ALL {
            assert_eq!(s.to_string().parse::<Space>().unwrap(), s);
        }
        assert!("4_9".parse::<Space>().is_err());
    }
}
