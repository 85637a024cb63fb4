//! Per-site jets of a Cayley structure: torsion, its derivatives and the
//! Riemann tensor, all in orthonormal-frame components (where `Φ = Φ₀`,
//! `g = δ`).
//!
//! Two routes produce the same [`SiteGeometry`]: closed-form derivatives of
//! an analytic [`FrameFamily`], and central differences on lattice samples.
//! The second one never looks at the family.

use crate::frame::{check_frames, FrameFamily, FrameJet};
use crate::lattice::{exterior_derivative, FieldValue, LatticeSpec};
use crate::{map_sites, FieldError};
use spin7_core::{AltForm, CayleyStructure, FormOperator, Mat8, Metric, Tensor, DIM};
use std::sync::OnceLock;

pub fn reference() -> &'static CayleyStructure {
    static CS: OnceLock<CayleyStructure> = OnceLock::new();
    CS.get_or_init(CayleyStructure::reference)
}

pub fn phi0() -> &'static AltForm {
    reference().phi()
}

pub fn j3_inv() -> &'static FormOperator {
    static OP: OnceLock<FormOperator> = OnceLock::new();
    OP.get_or_init(|| reference().j3_inverse())
}

/// `⋆₀ Alt(W)` for a covector of 4-forms `W_α`; with `W = ∂̂Φ` this is
/// `s = (1/5!) ε ∂Φ`, one fifth of `⋆dΦ`.
pub fn star_alt(w: &[AltForm; DIM]) -> AltForm {
    let lists = spin7_core::form::multi_indices(5);
    let mut five = AltForm::zeros(5);
    for (n, j) in lists.iter().enumerate() {
        let mut acc = 0.0;
        for m in 0..5 {
            let rest: Vec<usize> = j.iter().enumerate().filter(|(q, _)| *q != m).map(|(_, v)| *v).collect();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * w[j[m]].get(&rest);
        }
        five.comp_mut()[n] = acc / 5.0;
    }
    five.hodge_star(&Metric::euclidean(), 1.0)
}

/// `T = (5/2) J₃⁻¹ s`
pub fn torsion_from_star(s: &AltForm) -> AltForm {
    j3_inv().apply(s).scale(2.5)
}

/// Matrix `(T_a)_{ip} = T_{aip}` of a frame 3-form.
pub fn slot_matrix(t: &AltForm, a: usize) -> Mat8 {
    Mat8::from_fn(|i, p| t.get(&[a, i, p]))
}

/// `½(∂_b g_{dc} + ∂_c g_{db} - ∂_d g_{bc})` indexed `[d][(b, c)]`.
fn lowered_christoffel(dg: &[Mat8; DIM]) -> [Mat8; DIM] {
    std::array::from_fn(|d| Mat8::from_fn(|b, c| 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)])))
}

/// `Γ^a_{bc}` indexed `[a][(b, c)]`.
pub fn christoffel(g_inv: &Mat8, dg: &[Mat8; DIM]) -> [Mat8; DIM] {
    let low = lowered_christoffel(dg);
    std::array::from_fn(|a| (0..DIM).fold(Mat8::zeros(), |acc, d| acc + low[d] * g_inv[(a, d)]))
}

/// `R_{abcd}` with `R^a_{bcd} = ∂_cΓ^a_{db} - ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} - Γ^a_{de}Γ^e_{cb}`,
/// first index lowered with `g`. `dgamma[e][a]` is `∂_e Γ^a`.
pub fn riemann(g: &Mat8, gamma: &[Mat8; DIM], dgamma: &[[Mat8; DIM]; DIM]) -> Tensor {
    let up = Tensor::from_fn(4, |x| {
        let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
        let mut v = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
        for e in 0..DIM {
            v += gamma[a][(c, e)] * gamma[e][(d, b)] - gamma[a][(d, e)] * gamma[e][(c, b)];
        }
        v
    });
    up.apply_slot(0, g)
}

#[derive(Clone, Debug)]
pub struct SiteGeometry {
    pub x: [f64; DIM],
    pub e: Mat8,
    pub e_inv: Mat8,
    /// `det E`
    pub sqrt_g: f64,
    /// `E⁻¹ ∂_a E`
    pub p: [Mat8; DIM],
    /// `E⁻¹ (∂_a E - N_a E)` with `(N_a)_{ip} = Γ^p_{ai}`
    pub q: [Mat8; DIM],
    /// Coordinate `Γ^a_{bc}`, indexed `[a][(b, c)]`.
    pub gamma: [Mat8; DIM],
    /// Coordinate components `∂_a Φ`.
    pub dphi: [AltForm; DIM],
    /// `(1/5!) ε ∂Φ`
    pub s: AltForm,
    pub t: AltForm,
    /// `∂_a` of the frame components of `T`, `a` a coordinate direction.
    pub dt: [AltForm; DIM],
    /// `R_{abcd}`
    pub riemann: Tensor,
}

fn zeros_like_forms(k: usize) -> [AltForm; DIM] {
    std::array::from_fn(|_| AltForm::zeros(k))
}

impl SiteGeometry {
    /// Coordinate derivative of a frame-component field, converted to frame
    /// components in every slot: `Σ_a (E⁻¹)_{αa} (D_{p_a} F + ∂_a F)`.
    pub fn frame_derivative(&self, f: &AltForm, df: &[AltForm; DIM]) -> [AltForm; DIM] {
        self.mix(f, df, &self.p)
    }

    /// Levi-Civita covariant derivative of a frame-component field, in frame components.
    pub fn covariant(&self, f: &AltForm, df: &[AltForm; DIM]) -> [AltForm; DIM] {
        self.mix(f, df, &self.q)
    }

    fn mix(&self, f: &AltForm, df: &[AltForm; DIM], conn: &[Mat8; DIM]) -> [AltForm; DIM] {
        let per_coord: Vec<AltForm> = (0..DIM)
            .map(|a| {
                let mut v = f.derivation(&conn[a]);
                v.axpy(1.0, &df[a]);
                v
            })
            .collect();
        std::array::from_fn(|al| {
            let mut out = AltForm::zeros(f.degree());
            for (a, v) in per_coord.iter().enumerate() {
                let w = self.e_inv[(al, a)];
                if w != 0.0 {
                    out.axpy(w, v);
                }
            }
            out
        })
    }

    pub fn nabla_t(&self) -> [AltForm; DIM] {
        self.covariant(&self.t, &self.dt)
    }

    /// `∇Φ` from the Levi-Civita connection alone.
    pub fn nabla_phi(&self) -> [AltForm; DIM] {
        self.covariant(phi0(), &zeros_like_forms(4))
    }

    /// `R_{ab} = R^c_{acb}`, frame components.
    pub fn ricci(&self) -> Mat8 {
        Mat8::from_fn(|a, b| (0..DIM).map(|c| self.riemann.get(&[c, a, c, b])).sum())
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.ricci().trace()
    }

    pub fn metric(&self) -> Metric {
        Metric::from_frame(&self.e).expect("frames are checked on construction")
    }

    pub fn phi_coordinates(&self) -> AltForm {
        phi0().act_unchecked(&self.e)
    }

    pub fn torsion_coordinates(&self) -> AltForm {
        self.t.act_unchecked(&self.e)
    }

    pub fn ricci_coordinates(&self) -> Mat8 {
        self.e * self.ricci() * self.e.transpose()
    }

    /// Closed-form jets of an analytic family at `x`.
    pub fn analytic(family: &FrameFamily, x: [f64; DIM]) -> Result<Self, FieldError> {
        let jet = family.jet(&x);
        check_frames(std::slice::from_ref(&jet.e))?;
        Ok(Self::from_jet(&jet, x))
    }

    fn from_jet(jet: &FrameJet, x: [f64; DIM]) -> Self {
        let e = jet.e;
        let ei = e.try_inverse().expect("checked frame");
        let p: [Mat8; DIM] = std::array::from_fn(|a| ei * jet.de[a]);
        let omega = |m: &[Mat8; DIM], al: usize, left: &Mat8| (0..DIM).fold(Mat8::zeros(), |acc, b| acc + m[b] * left[(al, b)]);
        let w: [AltForm; DIM] = std::array::from_fn(|al| phi0().derivation(&omega(&p, al, &ei)));
        let s = star_alt(&w);
        let t = torsion_from_star(&s);

        // ∂_a ω_α = Σ_b (∂_a E⁻¹)_{αb} p_b + (E⁻¹)_{αb} ∂_a p_b
        let active: Vec<bool> = (0..DIM).map(|a| jet.de[a] != Mat8::zeros() || jet.dde[a].iter().any(|m| *m != Mat8::zeros())).collect();
        let dt: [AltForm; DIM] = std::array::from_fn(|a| {
            if !active[a] {
                return AltForm::zeros(3);
            }
            let dei = -p[a] * ei;
            let dp: [Mat8; DIM] = std::array::from_fn(|b| -p[a] * p[b] + ei * jet.dde[a][b]);
            let dw: [AltForm; DIM] = std::array::from_fn(|al| {
                let m = omega(&p, al, &dei) + omega(&dp, al, &ei);
                phi0().derivation(&m)
            });
            torsion_from_star(&star_alt(&dw))
        });

        let g = e * e.transpose();
        let g_inv = ei.transpose() * ei;
        let dg: [Mat8; DIM] = std::array::from_fn(|a| jet.de[a] * e.transpose() + e * jet.de[a].transpose());
        let gamma = christoffel(&g_inv, &dg);
        let low = lowered_christoffel(&dg);
        let dgamma: [[Mat8; DIM]; DIM] = std::array::from_fn(|c| {
            if !active[c] {
                return [Mat8::zeros(); DIM];
            }
            let ddg: [Mat8; DIM] = std::array::from_fn(|b| {
                let m = jet.dde[c][b] * e.transpose() + jet.de[c] * jet.de[b].transpose();
                m + m.transpose()
            });
            let dlow = lowered_christoffel(&ddg);
            let dginv = -g_inv * dg[c] * g_inv;
            std::array::from_fn(|a| (0..DIM).fold(Mat8::zeros(), |acc, d| acc + low[d] * dginv[(a, d)] + dlow[d] * g_inv[(a, d)]))
        });
        let riemann = riemann(&g, &gamma, &dgamma).act(&ei);
        let phi = phi0().act_unchecked(&e);
        let dphi: [AltForm; DIM] = std::array::from_fn(|a| {
            if active[a] {
                phi.derivation(&(jet.de[a] * ei))
            } else {
                AltForm::zeros(4)
            }
        });
        Self::assemble(x, e, ei, p, gamma, dphi, s, t, dt, riemann)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        x: [f64; DIM],
        e: Mat8,
        e_inv: Mat8,
        p: [Mat8; DIM],
        gamma: [Mat8; DIM],
        dphi: [AltForm; DIM],
        s: AltForm,
        t: AltForm,
        dt: [AltForm; DIM],
        riemann: Tensor,
    ) -> Self {
        let q = std::array::from_fn(|a| {
            let n = Mat8::from_fn(|i, pp| gamma[pp][(a, i)]);
            p[a] - e_inv * n * e
        });
        SiteGeometry { x, sqrt_g: e.determinant(), e, e_inv, p, q, gamma, dphi, s, t, dt, riemann }
    }
}

impl<V: FieldValue> FieldValue for [V; DIM] {
    fn zero_like(&self) -> Self {
        std::array::from_fn(|i| self[i].zero_like())
    }
    fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.axpy(s, b);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Analytic,
    FiniteDifference,
}

/// Site jets over a whole lattice.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub spec: LatticeSpec,
    pub source: Source,
    pub sites: Vec<SiteGeometry>,
}

impl Geometry {
    pub fn analytic(family: &FrameFamily, spec: &LatticeSpec) -> Result<Self, FieldError> {
        family.check_against(spec)?;
        let sites: Vec<Result<SiteGeometry, FieldError>> =
            map_sites(spec.num_sites(), |s| SiteGeometry::analytic(family, spec.coordinates(s)));
        let sites = sites.into_iter().enumerate().map(|(n, r)| r.map_err(|e| e.at_site(n))).collect::<Result<_, _>>()?;
        Ok(Geometry { spec: *spec, source: Source::Analytic, sites })
    }

    /// Everything from samples: `dΦ`, `∂g`, `∂Γ` and `∂T` by central differences.
    pub fn finite_difference(frames: &[Mat8], spec: &LatticeSpec) -> Result<Self, FieldError> {
        if frames.len() != spec.num_sites() {
            return Err(FieldError::Spec(format!("{} frames for {} sites", frames.len(), spec.num_sites())));
        }
        check_frames(frames)?;
        let n = spec.num_sites();
        let inv: Vec<Mat8> = frames.iter().map(|e| e.try_inverse().expect("checked frame")).collect();
        let phi: Vec<AltForm> = frames.iter().map(|e| phi0().act_unchecked(e)).collect();
        let dphi = spec.gradient(&phi);
        let d_phi = exterior_derivative(spec, &phi);
        let s: Vec<AltForm> = map_sites(n, |k| d_phi[k].act_unchecked(&inv[k]).hodge_star(&Metric::euclidean(), 1.0).scale(0.2));
        let t: Vec<AltForm> = s.iter().map(torsion_from_star).collect();
        let dt = spec.gradient(&t);
        let de = spec.gradient(frames);
        let g: Vec<Mat8> = frames.iter().map(|e| e * e.transpose()).collect();
        let dg = spec.gradient(&g);
        let gamma: Vec<[Mat8; DIM]> = (0..n).map(|k| christoffel(&(inv[k].transpose() * inv[k]), &dg[k])).collect();
        let dgamma = spec.gradient(&gamma);
        let mut sites = Vec::with_capacity(n);
        let built: Vec<SiteGeometry> = map_sites(n, |k| {
            let p = std::array::from_fn(|a| inv[k] * de[k][a]);
            let r = riemann(&g[k], &gamma[k], &dgamma[k]).act(&inv[k]);
            SiteGeometry::assemble(
                spec.coordinates(k),
                frames[k],
                inv[k],
                p,
                gamma[k],
                dphi[k].clone(),
                s[k].clone(),
                t[k].clone(),
                dt[k].clone(),
                r,
            )
        });
        sites.extend(built);
        Ok(Geometry { spec: *spec, source: Source::FiniteDifference, sites })
    }

    pub fn frames(&self) -> Vec<Mat8> {
        self.sites.iter().map(|s| s.e).collect()
    }

    /// `Σ h^d √g f(site)`
    pub fn integrate(&self, f: impl Fn(&SiteGeometry) -> f64) -> f64 {
        self.spec.cell_volume() * self.sites.iter().map(|s| s.sqrt_g * f(s)).sum::<f64>()
    }

    pub fn max_torsion(&self) -> f64 {
        self.sites.iter().map(|s| s.t.max_abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_frames_have_no_torsion_or_curvature() {
        let e = spin7_core::random::random_frame(&mut ChaCha8Rng::seed_from_u64(2), 0.5);
        let spec = LatticeSpec::new(2, 8, 4).unwrap();
        let fam = FrameFamily::Constant(e);
        for geo in [Geometry::analytic(&fam, &spec).unwrap(), Geometry::finite_difference(&fam.sample(&spec).unwrap(), &spec).unwrap()] {
            assert!(geo.max_torsion() < 1e-12);
            assert!(geo.sites.iter().all(|s| s.riemann.max_abs() < 1e-12));
        }
    }

    #[test]
    fn star_alt_matches_dense_epsilon_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w: [AltForm; DIM] = std::array::from_fn(|_| spin7_core::random::random_form(4, &mut rng));
        let s = star_alt(&w);
        // s_{mnr} = (1/120) Σ ε_{mnr a ijkl} W_{a ijkl}, sorted ijkl carry a factor 24
        let lists = spin7_core::form::multi_indices(4);
        let mut idx = [0usize; 8];
        let (m, n, r) = (0, 3, 6);
        let mut acc = 0.0;
        for a in 0..DIM {
            for ijkl in lists {
                idx[..3].copy_from_slice(&[m, n, r]);
                idx[3] = a;
                idx[4..].copy_from_slice(ijkl);
                acc += 24.0 * spin7_core::perm::sort_sign(&idx) * w[a].get(ijkl);
            }
        }
        assert!((acc / 120.0 - s.get(&[m, n, r])).abs() < 1e-13);
    }
}
