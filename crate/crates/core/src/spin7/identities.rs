//! The algebraic identity suite.
//!
//! Everything is evaluated with genuine metric contractions, so the suite is
//! a real test of GL(8) covariance when run on `e·Φ₀` with `g = e eᵀ`.
//! The ε identities and the eight-index identity are evaluated on increasing
//! multi-indices only; no dense rank-8 or rank-10 tensors are formed.

use super::CayleyStructure;
use crate::form::{multi_indices, position};
use crate::perm::{permutations, sort_sign};
use crate::tensor::{einsum, Tensor};
use crate::form::AltForm;
use crate::DIM;
use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityRow {
    pub name: &'static str,
    pub residual: f64,
    /// Max-abs of the left-hand side, for scaling.
    pub scale: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.name == name).map(|r| r.residual)
    }
}

fn row(name: &'static str, lhs: &Tensor, rhs: &Tensor) -> IdentityRow {
    IdentityRow { name, residual: lhs.sub(rhs).max_abs(), scale: lhs.max_abs() }
}

impl CayleyStructure {
    fn phi_last_up(&self) -> Tensor {
        self.phi_lower().apply_slot(3, self.metric().g_inv())
    }

    /// Single, double and triple contraction identities plus self-duality.
    pub fn contraction_report(&self) -> IdentityReport {
        let g = self.metric().g();
        let p = self.phi_lower();
        let lhs1 = einsum("ijkp,abcp->ijkabc", &[p, &self.phi_last_up()]);
        let rhs1 = Tensor::from_fn(6, |x| {
            let (i, j, k, a, b, c) = (x[0], x[1], x[2], x[3], x[4], x[5]);
            let gg = g[(i, a)] * g[(j, b)] * g[(k, c)]
                + g[(i, b)] * g[(j, c)] * g[(k, a)]
                + g[(i, c)] * g[(j, a)] * g[(k, b)]
                - g[(i, a)] * g[(j, c)] * g[(k, b)]
                - g[(i, c)] * g[(j, b)] * g[(k, a)]
                - g[(i, b)] * g[(j, a)] * g[(k, c)];
            let f = |q: usize, r: usize, s: usize, t: usize| p.get(&[q, r, s, t]);
            let gp = g[(i, a)] * f(j, k, b, c)
                + g[(j, a)] * f(k, i, b, c)
                + g[(k, a)] * f(i, j, b, c)
                + g[(i, b)] * f(j, k, c, a)
                + g[(j, b)] * f(k, i, c, a)
                + g[(k, b)] * f(i, j, c, a)
                + g[(i, c)] * f(j, k, a, b)
                + g[(j, c)] * f(k, i, a, b)
                + g[(k, c)] * f(i, j, a, b);
            gg - gp
        });
        let lhs2 = einsum("ijpq,abpq->ijab", &[p, self.phi_mixed22()]);
        let rhs2 = Tensor::from_fn(4, |x| {
            let (i, j, a, b) = (x[0], x[1], x[2], x[3]);
            6.0 * g[(i, a)] * g[(j, b)] - 6.0 * g[(i, b)] * g[(j, a)] - 4.0 * p.get(x)
        });
        let lhs3 = einsum("ipqr,apqr->ia", &[p, self.phi_mixed13()]);
        let rhs3 = Tensor::from_mat(g).scale(42.0);
        let star = self.phi().hodge_star(self.metric(), self.orientation());
        IdentityReport {
            rows: vec![
                row("phi-single-contraction", &lhs1, &rhs1),
                row("phi-double-contraction", &lhs2, &rhs2),
                row("phi-triple-contraction", &lhs3, &rhs3),
                IdentityRow {
                    name: "self-duality",
                    residual: star.sub(self.phi()).max_abs(),
                    scale: star.max_abs(),
                },
            ],
        }
    }

    /// Upper-index alternating tensor component `ε^{idx}`.
    fn eps_up(&self, idx: &[usize; 8]) -> f64 {
        self.orientation() * sort_sign(idx) / self.metric().sqrt_det()
    }

    /// The three ε–Φ identities, coefficients 30, 60 and 210.
    pub fn epsilon_report(&self) -> IdentityReport {
        let p = self.phi_lower();
        let up = AltForm::compress(self.phi_upper());
        // δ_{a1}^{[x1} .. δ_{am}^{xm} Φ^{rest]} on an increasing index set S
        let delta_phi = |lower: &[usize], s: &[usize]| -> f64 {
            let mut rest: Vec<usize> = s.to_vec();
            for a in lower {
                match rest.iter().position(|x| x == a) {
                    Some(n) => {
                        rest.remove(n);
                    }
                    None => return 0.0,
                }
            }
            let joined: Vec<usize> = lower.iter().chain(&rest).copied().collect();
            let m = lower.len();
            let weight = 24.0 / (1..=m + 4).product::<usize>() as f64;
            weight * sort_sign(&joined) * up.comp()[position(&rest)]
        };
        let mut rows = Vec::new();
        for (m, coef, name) in [(1usize, 30.0, "epsilon-phi-3"), (2, 60.0, "epsilon-phi-2"), (3, 210.0, "epsilon-phi-1")] {
            let nfree = 4 + m;
            let nsum = 4 - m;
            let mut res: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for s in multi_indices(nfree) {
                for lower_off in 0..DIM.pow(m as u32) {
                    let mut lower = vec![0usize; m];
                    let mut o = lower_off;
                    for l in lower.iter_mut().rev() {
                        *l = o % DIM;
                        o /= DIM;
                    }
                    let mut lhs = 0.0;
                    for sum_off in 0..DIM.pow(nsum as u32) {
                        let mut summed = vec![0usize; nsum];
                        let mut o = sum_off;
                        for l in summed.iter_mut().rev() {
                            *l = o % DIM;
                            o /= DIM;
                        }
                        let mut e = [0usize; 8];
                        for (n, v) in s.iter().chain(&summed).enumerate() {
                            e[n] = *v;
                        }
                        let ev = self.eps_up(&e);
                        if ev == 0.0 {
                            continue;
                        }
                        let mut pi = [0usize; 4];
                        for (n, v) in lower.iter().chain(&summed).enumerate() {
                            pi[n] = *v;
                        }
                        lhs += ev * p.get(&pi);
                    }
                    let rhs = coef * delta_phi(&lower, s);
                    res = res.max((lhs - rhs).abs());
                    scale = scale.max(lhs.abs());
                }
            }
            rows.push(IdentityRow { name, residual: res, scale });
        }
        IdentityReport { rows }
    }

    /// Left-hand side of the eight-index quadratic identity as a 70×70 matrix
    /// over (increasing lower quadruple, increasing upper quadruple).
    pub fn master_identity_lhs(&self) -> DMatrix<f64> {
        let a1 = self.phi_last_up();
        let b1 = self.phi_mixed13();
        let m22 = self.phi_mixed22();
        let up = self.phi_upper();
        let low = self.phi_lower();
        let quads = multi_indices(4);
        let perms = permutations(4);
        let mut out = DMatrix::zeros(70, 70);
        let mut xs = [[0usize; 4]; 24];
        let mut ys = [[0usize; 4]; 24];
        for (ni, i) in quads.iter().enumerate() {
            for (n, p) in perms.iter().enumerate() {
                for m in 0..4 {
                    xs[n][m] = i[p.perm[m]];
                }
            }
            for (na, a) in quads.iter().enumerate() {
                for (n, p) in perms.iter().enumerate() {
                    for m in 0..4 {
                        ys[n][m] = a[p.perm[m]];
                    }
                }
                let mut acc = 0.0;
                for (sx, x) in perms.iter().zip(&xs) {
                    for (sy, y) in perms.iter().zip(&ys) {
                        let t1 = a1.get(&[x[0], x[1], x[2], y[0]]) * b1.get(&[x[3], y[1], y[2], y[3]]);
                        let m = m22.get(&[x[0], x[1], y[0], y[1]]);
                        let t2 = m * m22.get(&[x[2], x[3], y[2], y[3]]);
                        let t3 = if x[2] == y[2] && x[3] == y[3] { m } else { 0.0 };
                        acc += sx.sign * sy.sign * (-2.0 * t1 - 3.0 * t2 + 42.0 * t3);
                    }
                }
                out[(ni, na)] = acc / 576.0 + low.get(i) * up.get(a);
            }
        }
        out
    }

    pub fn master_identity_residual(&self) -> f64 {
        self.master_identity_lhs().amax()
    }

    /// Max-abs of the left-hand side with the first lower and first upper index traced.
    pub fn master_identity_trace(&self) -> f64 {
        let lhs = self.master_identity_lhs();
        let get = |i: &[usize], a: &[usize]| -> f64 {
            let si = sort_sign(i);
            let sa = sort_sign(a);
            if si == 0.0 || sa == 0.0 {
                return 0.0;
            }
            let mut i2 = i.to_vec();
            i2.sort_unstable();
            let mut a2 = a.to_vec();
            a2.sort_unstable();
            si * sa * lhs[(position(&i2), position(&a2))]
        };
        let mut worst: f64 = 0.0;
        for rest in multi_indices(3) {
            for rest_a in multi_indices(3) {
                let s: f64 = (0..DIM)
                    .map(|t| get(&[t, rest[0], rest[1], rest[2]], &[t, rest_a[0], rest_a[1], rest_a[2]]))
                    .sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// Every identity of the suite in one report.
    pub fn identity_report(&self) -> IdentityReport {
        let mut rep = self.contraction_report();
        rep.rows.extend(self.epsilon_report().rows);
        let lhs = self.master_identity_lhs();
        rep.rows.push(IdentityRow {
            name: "quadratic-identity",
            residual: lhs.amax(),
            scale: 42.0,
        });
        rep
    }
}

/// Residual of the quadratic-in-torsion identity
/// `¼ Φ_a^{pqr} Φ_b^{ijk} T_{pqi} T_{rjk} = -2 Φ_{(a}^{pqr} T_{b)ps} T_{qrs} + ½ g_{ab} ΦTT
///  - ½ Φ^{pqrs} T_{apq} T_{brs} + (1/12) (Φ_a^{pqr} T_{pqr})(Φ_b^{ijk} T_{ijk})`,
/// with `T` in orthonormal-frame components of the reference structure.
pub fn tt_identity_residual(t: &AltForm) -> f64 {
    let cs = CayleyStructure::reference();
    let p = cs.phi_lower();
    let t = t.expand();
    let x = einsum("apqr,pqi->air", &[p, &t]);
    let y = einsum("bijk,rjk->bir", &[p, &t]);
    let lhs = einsum("air,bir->ab", &[&x, &y]).scale(0.25);
    let z = einsum("apqr,qrs->aps", &[p, &t]);
    let w = einsum("aps,bps->ab", &[&z, &t]);
    let w = w.add(&w.permute(&[1, 0])).scale(-1.0);
    let ptt = einsum("ijkl,ijp->klp", &[p, &t]).dot(&t);
    let u = einsum("pqrs,apq->ars", &[p, &t]);
    let v = einsum("ars,brs->ab", &[&u, &t]).scale(-0.5);
    let va = einsum("apqr,pqr->a", &[p, &t]);
    let outer = einsum("a,b->ab", &[&va, &va]).scale(1.0 / 12.0);
    let mut rhs = w.add(&v).add(&outer);
    rhs.axpy(0.5 * ptt, &Tensor::delta());
    lhs.sub(&rhs).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::epsilon8;
    use crate::random::{random_form, random_frame};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_passes_everything() {
        let rep = CayleyStructure::reference().identity_report();
        assert_eq!(rep.rows.len(), 8);
        for r in &rep.rows {
            assert!(r.residual < 1e-12, "{} residual {}", r.name, r.residual);
        }
    }

    #[test]
    fn corrupted_component_is_detected() {
        let cs = CayleyStructure::reference().with_corrupted_component(0, 0.1);
        assert!(cs.contraction_report().max_residual() >= 0.01);
    }

    #[test]
    fn wrong_orientation_breaks_epsilon_identities() {
        let cs = CayleyStructure::reference().with_flipped_orientation();
        let rep = cs.epsilon_report();
        assert!(rep.rows.iter().all(|r| r.residual > 0.5), "{rep:?}");
    }

    #[test]
    fn covariant_under_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let e = random_frame(&mut rng, 0.5);
            let cs = CayleyStructure::from_frame(&e).unwrap();
            let rep = cs.identity_report();
            assert!(rep.max_residual() < 1e-9, "{rep:?}");
        }
    }

    #[test]
    fn traced_quadratic_identity_vanishes() {
        assert!(CayleyStructure::reference().master_identity_trace() < 1e-12);
    }

    #[test]
    fn epsilon_three_against_dense_symbol() {
        let cs = CayleyStructure::reference();
        let eps = epsilon8(1.0);
        let lhs = einsum("aijklpqr,bpqr->baijkl", &[&eps, cs.phi_lower()]);
        drop(eps);
        // Compare with the compressed evaluation through a random probe.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let probe = random_form(5, &mut rng).expand();
        let dense = einsum("baijkl,aijkl->b", &[&lhs, &probe]);
        let up = cs.phi_upper();
        // the probe is alternating, so the bracket can be dropped
        let rhs = einsum("ijkl,bijkl->b", &[up, &probe]).scale(30.0);
        assert!(dense.sub(&rhs).max_abs() < 1e-10);
    }

    #[test]
    fn quadratic_torsion_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..3 {
            assert!(tt_identity_residual(&random_form(3, &mut rng)) < 1e-12);
        }
    }
}
