//! Identities between torsion and curvature, evaluated on site jets, plus
//! finite-difference convergence measurements.
//!
//! All site quantities are frame components, so `Φ = Φ₀` and indices are
//! raised with `δ`.

use crate::frame::FrameFamily;
use crate::geometry::{phi0, reference, slot_matrix, Geometry, SiteGeometry};
use crate::lattice::LatticeSpec;
use crate::FieldError;
use spin7_core::spin7::{IdentityReport, IdentityRow};
use spin7_core::{einsum, AltForm, Mat8, Space, Tensor, DIM};

fn phi_dense() -> &'static Tensor {
    reference().phi_lower()
}

pub fn dense_forms(v: &[AltForm; DIM]) -> Tensor {
    let x: Vec<Tensor> = v.iter().map(|f| f.expand()).collect();
    let mut data = Vec::with_capacity(DIM * x[0].data().len());
    for t in &x {
        data.extend_from_slice(t.data());
    }
    Tensor::from_vec(x[0].rank() + 1, data).expect("stacked rank")
}

fn asym(m: Mat8) -> Mat8 {
    (m - m.transpose()) * 0.5
}

fn sym(m: Mat8) -> Mat8 {
    (m + m.transpose()) * 0.5
}

fn row(name: &'static str, residual: f64, scale: f64) -> IdentityRow {
    IdentityRow { name, residual, scale }
}

/// `(Φ·M)_{ij} = Φ_{ijpq} M_{pq}`
pub fn phi_dot(m: &Mat8) -> Mat8 {
    let p = phi_dense();
    Mat8::from_fn(|i, j| {
        let mut acc = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                acc += p.get(&[i, j, a, b]) * m[(a, b)];
            }
        }
        acc
    })
}

/// `T_{a;ij} = ¼T_{aij} - ⅛Φ_{ijkl}T_{akl}`, the Λ²₇ part in the last two slots.
pub fn torsion_components(t: &AltForm) -> Tensor {
    let t = t.expand();
    let mut out = t.scale(0.25);
    out.axpy(-0.125, &einsum("ijkl,akl->aij", &[phi_dense(), &t]));
    out
}

/// Inverse of [`torsion_components`]:
/// `T_{aij} = (4/3)T_{a;ij} + 4T_{[a;ij]} + T_{[a;kl]}Φ_{ijkl} + (2/9)T_{k;lm}Φ_{klm[i}g_{j]a}`.
pub fn torsion_from_components(ts: &Tensor) -> Tensor {
    let p = phi_dense();
    let a3 = ts.alt();
    let v = einsum("klm,klmi->i", &[ts, p]);
    let last = Tensor::from_fn(3, |x| {
        let (a, i, j) = (x[0], x[1], x[2]);
        let d = |u: usize, w: usize| if u == w { 1.0 } else { 0.0 };
        0.5 * (v.data()[i] * d(j, a) - v.data()[j] * d(i, a))
    });
    let mut out = ts.scale(4.0 / 3.0);
    out.axpy(4.0, &a3);
    out.axpy(1.0, &einsum("akl,ijkl->aij", &[&a3, p]));
    out.axpy(2.0 / 9.0, &last);
    out
}

/// `R_{ab}` from torsion:
/// `-½S(Φ_{aijk}∇_bT_{ijk}) + ½S(Φ_{aijk}∇_iT_{bjk}) + T_{apq}T_{bpq} + S(Φ_{aijk}T_{bip}T_{jkp})`.
pub fn ricci_from_torsion(t: &AltForm, nabla_t: &[AltForm; DIM]) -> Mat8 {
    let p = phi_dense();
    let th = t.expand();
    let nt = dense_forms(nabla_t);
    let a = einsum("aijk,bijk->ab", &[p, &nt]).to_mat();
    let b = einsum("aijk,ibjk->ab", &[p, &nt]).to_mat();
    let tt = einsum("apq,bpq->ab", &[&th, &th]).to_mat();
    let ptt = einsum("aijk,bip,jkp->ab", &[p, &th, &th]).to_mat();
    -sym(a) * 0.5 + sym(b) * 0.5 + tt + sym(ptt)
}

/// `R = -Φ·∇T + |T|² + ΦTT`
pub fn scalar_from_torsion(t: &AltForm, nabla_t: &[AltForm; DIM]) -> f64 {
    let p = phi_dense();
    let th = t.expand();
    -p.dot(&dense_forms(nabla_t)) + th.dot(&th) + phi_tt(t)
}

/// `Φ_{abcd} T_{abp} T_{cdp}`
pub fn phi_tt(t: &AltForm) -> f64 {
    let th = t.expand();
    einsum("abcd,abp->cdp", &[phi_dense(), &th]).dot(&th)
}

/// Algebraic checks on a single frame 3-form.
pub fn torsion_algebra_rows(s: &AltForm, t: &AltForm) -> Vec<IdentityRow> {
    let cs = reference();
    let j3 = cs.j_operator(3).expect("degree 3");
    let back = j3.apply(t).scale(0.4);
    let ts = torsion_components(t);
    let inv = torsion_from_components(&ts);
    vec![
        row("star-d-roundtrip", back.sub(s).max_abs(), s.max_abs()),
        row("torsion-components-inverse", inv.sub(&t.expand()).max_abs(), t.max_abs()),
    ]
}

/// Torsion identities at one site: `∇Φ` from Levi-Civita against the torsion
/// reconstruction, its Λ⁴₇ character, and the coordinate skew connection.
pub fn torsion_rows(site: &SiteGeometry) -> Vec<IdentityRow> {
    let cs = reference();
    let p7 = cs.projector(Space::L4_7);
    let nphi = site.nabla_phi();
    let mut res3: f64 = 0.0;
    let mut res7: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, np) in nphi.iter().enumerate() {
        let rec = phi0().derivation(&slot_matrix(&site.t, a));
        res3 = res3.max(np.sub(&rec).max_abs());
        res7 = res7.max(np.sub(&p7.apply(np)).max_abs());
        scale = scale.max(np.max_abs());
    }
    // ∂_aΦ = D_{Γ̃_a} Φ with Γ̃^p_{ai} = Γ^p_{ai} + T_{ai}{}^p, all in coordinates
    let phi = site.phi_coordinates();
    let tc = site.torsion_coordinates();
    let g_inv = site.e_inv.transpose() * site.e_inv;
    let mut skew: f64 = 0.0;
    for a in 0..DIM {
        let n = Mat8::from_fn(|i, p| site.gamma[p][(a, i)]);
        let tm = slot_matrix(&tc, a) * g_inv;
        skew = skew.max(site.dphi[a].sub(&phi.derivation(&(n + tm))).max_abs());
    }
    let mut rows = vec![
        row("torsion-3-form", res3, scale),
        row("nabla-phi-in-lambda4-7", res7, scale),
        row("skew-connection", skew, site.dphi.iter().map(|d| d.max_abs()).fold(0.0, f64::max)),
    ];
    rows.extend(torsion_algebra_rows(&site.s, &site.t));
    rows
}

/// Curvature identities at one site.
pub fn curvature_rows(site: &SiteGeometry) -> Vec<IdentityRow> {
    let p = phi_dense();
    let r = &site.riemann;
    let rscale = r.max_abs();
    let t = &site.t;
    let th = t.expand();
    let nt_forms = site.nabla_t();
    let nt = dense_forms(&nt_forms);
    let tm: Vec<Mat8> = (0..DIM).map(|a| slot_matrix(t, a)).collect();
    let ntm: Vec<Vec<Mat8>> = nt_forms.iter().map(|f| (0..DIM).map(|b| slot_matrix(f, b)).collect()).collect();
    let rm = |a: usize, b: usize| Mat8::from_fn(|i, j| r.get(&[a, b, i, j]));

    let mut rows = Vec::new();
    let sym_res = r.add(&r.permute(&[1, 0, 2, 3])).max_abs()
        .max(r.add(&r.permute(&[0, 1, 3, 2])).max_abs())
        .max(r.sub(&r.permute(&[2, 3, 0, 1])).max_abs())
        .max(r.add(&r.permute(&[0, 2, 3, 1])).add(&r.permute(&[0, 3, 1, 2])).max_abs());
    rows.push(row("riemann-symmetries", sym_res, rscale));

    // 4Φ-derivations: D_{R_ab}Φ = D_{∇_aT_b - ∇_bT_a - [T_a, T_b]}Φ
    let mut two: f64 = 0.0;
    let mut bian: f64 = 0.0;
    let mut bian7: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            let rab = rm(a, b);
            let lhs = phi0().derivation(&rab);
            let m = ntm[a][b] - ntm[b][a] - (tm[a] * tm[b] - tm[b] * tm[a]);
            two = two.max(lhs.sub(&phi0().derivation(&m)).max_abs());

            let lhs = rab - phi_dot(&rab) * 0.5;
            let d = ntm[a][b] - ntm[b][a];
            let rhs = d - phi_dot(&d) * 0.5 - tm[a] * tm[b] + tm[b] * tm[a] + phi_dot(&(tm[a] * tm[b]));
            bian = bian.max((lhs - rhs).amax());
            // the left side is 4π₇(R_ab), so the torsion side must have no Λ²₂₁ part: (3 + J₂)/4
            bian7 = bian7.max(((rhs * 3.0 + phi_dot(&rhs) * 0.5) * 0.25).amax());
        }
    }
    rows.push(row("two-nabla", two, rscale));
    rows.push(row("bianchi", bian, rscale));
    rows.push(row("bianchi-lambda2-7", bian7, rscale));

    let div_t = torsion_divergence(&nt_forms);
    let t1 = asym(einsum("mabc,nabc->mn", &[p, &nt]).to_mat());
    let t2 = asym(einsum("mabc,anbc->mn", &[p, &nt]).to_mat());
    let t3 = asym(einsum("mabc,nap,bcp->mn", &[p, &th, &th]).to_mat());
    let dscale = div_t.amax();
    rows.push(row("divergence-torsion", (div_t - (t1 * 0.5 - t2 * 0.5 - t3)).amax(), dscale));
    let lhs = div_t - phi_dot(&div_t) * 0.5;
    rows.push(row("T-divergence", (lhs - (t1 * 0.5 - t2 * 1.5 - t3 * 2.0)).amax(), dscale));
    let div_ts = component_divergence(t, &nt_forms);
    rows.push(row(
        "T-divergence-identity",
        (div_ts * 4.0 - (t1 * 0.5 - t2 * 1.5 - t3 * 3.0)).amax(),
        dscale,
    ));

    let ric = site.ricci();
    let scalar = ric.trace();
    let from_t = scalar_from_torsion(t, &nt_forms);
    rows.push(row("ricci-scalar", (scalar - from_t).abs(), scalar.abs()));
    let form = ricci_from_torsion(t, &nt_forms);
    rows.push(row("ricci", (ric - form).amax(), ric.amax()));
    rows.push(row("ricci-antisymmetric-defect", ricci_defect(t, &nt_forms), ric.amax()));
    rows
}

/// `∇^a T_{mn}` summed on the first slot: `∇^a T_{amn}`.
pub fn torsion_divergence(nabla_t: &[AltForm; DIM]) -> Mat8 {
    Mat8::from_fn(|m, n| (0..DIM).map(|a| nabla_t[a].get(&[a, m, n])).sum())
}

/// `∇^a T_{a;mn}`, with `∇_aΦ = D_{T_a}Φ` for the derivative of the projector.
pub fn component_divergence(t: &AltForm, nabla_t: &[AltForm; DIM]) -> Mat8 {
    let div_t = torsion_divergence(nabla_t);
    let mut nab_phi_t = Mat8::zeros();
    for a in 0..DIM {
        let ta = slot_matrix(t, a);
        let np = phi0().derivation(&ta).expand();
        nab_phi_t += einsum("mnkl,kl->mn", &[&np, &Tensor::from_mat(&ta)]).to_mat();
    }
    div_t * 0.25 - (nab_phi_t + phi_dot(&div_t)) * 0.125
}

/// Antisymmetric part of the unsymmetrised Ricci expression
/// `-∇_cT_{abc} - ½Φ_{bijk}∇_aT_{ijk} + ½Φ_{bijk}∇_iT_{ajk} + T_{apq}T_{bpq} + Φ_{bijk}T_{aip}T_{jkp}`;
/// vanishes together with the divergence-torsion identity.
pub fn ricci_defect(t: &AltForm, nabla_t: &[AltForm; DIM]) -> f64 {
    let p = phi_dense();
    let th = t.expand();
    let nt = dense_forms(nabla_t);
    let c = Mat8::from_fn(|a, b| (0..DIM).map(|c| nt.get(&[c, a, b, c])).sum());
    let x = einsum("bijk,aijk->ab", &[p, &nt]).to_mat();
    let y = einsum("bijk,iajk->ab", &[p, &nt]).to_mat();
    let z = einsum("bijk,aip,jkp->ab", &[p, &th, &th]).to_mat();
    let nons = -c - x * 0.5 + y * 0.5 + z;
    asym(nons).amax()
}

fn merge(into: &mut Vec<IdentityRow>, rows: Vec<IdentityRow>) {
    for r in rows {
        match into.iter_mut().find(|x| x.name == r.name) {
            Some(x) => {
                x.residual = x.residual.max(r.residual);
                x.scale = x.scale.max(r.scale);
            }
            None => into.push(r),
        }
    }
}

/// Worst residual per identity over all sites.
pub fn lattice_report(geo: &Geometry, curvature: bool) -> IdentityReport {
    let per_site: Vec<Vec<IdentityRow>> = crate::map_sites(geo.sites.len(), |k| {
        let s = &geo.sites[k];
        let mut rows = torsion_rows(s);
        if curvature {
            rows.extend(curvature_rows(s));
        }
        rows
    });
    let mut rows = Vec::new();
    for r in per_site {
        merge(&mut rows, r);
    }
    IdentityReport { rows }
}

/// Closed-form coordinate Ricci tensor of `g = e^{2f} δ` with `f = ε sin x⁰`:
/// `-6(∂∂f - df⊗df) - (Δf + 6|df|²) δ`.
pub fn conformal_ricci(eps: f64, x: &[f64; DIM]) -> Mat8 {
    let f1 = eps * x[0].cos();
    let f2 = -eps * x[0].sin();
    let mut r = Mat8::zeros();
    r[(0, 0)] = -6.0 * (f2 - f1 * f1);
    r - Mat8::identity() * (f2 + 6.0 * f1 * f1)
}

/// Max over sites of the difference between two site quantities.
pub fn max_site_difference(a: &Geometry, b: &Geometry, f: impl Fn(&SiteGeometry) -> Vec<f64>) -> f64 {
    a.sites
        .iter()
        .zip(&b.sites)
        .map(|(x, y)| f(x).iter().zip(f(y)).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub points: usize,
    pub error: f64,
    /// `log₂` of the error ratio to the previous row.
    pub order: Option<f64>,
}

/// Errors of finite differences against the closed-form route on a sequence
/// of lattices, each twice as fine as the last.
pub fn convergence(
    family: &FrameFamily,
    coarse: &LatticeSpec,
    refinements: usize,
    quantity: impl Fn(&SiteGeometry) -> Vec<f64>,
) -> Result<Vec<ConvergenceRow>, FieldError> {
    let mut out: Vec<ConvergenceRow> = Vec::new();
    let mut spec = *coarse;
    for _ in 0..=refinements {
        let exact = Geometry::analytic(family, &spec)?;
        let fd = Geometry::finite_difference(&family.sample(&spec)?, &spec)?;
        let error = max_site_difference(&exact, &fd, &quantity);
        let order = out.last().map(|prev| (prev.error / error).log2());
        out.push(ConvergenceRow { points: spec.points(), error, order });
        spec = spec.refined();
    }
    Ok(out)
}

/// Frame torsion components, for [`convergence`].
pub fn torsion_quantity(s: &SiteGeometry) -> Vec<f64> {
    s.t.comp().to_vec()
}

/// Frame Ricci components, for [`convergence`].
pub fn ricci_quantity(s: &SiteGeometry) -> Vec<f64> {
    s.ricci().as_slice().to_vec()
}

/// Ricci from torsion minus brute-force Ricci.
pub fn ricci_gap(s: &SiteGeometry) -> Mat8 {
    ricci_from_torsion(&s.t, &s.nabla_t()) - s.ricci()
}
