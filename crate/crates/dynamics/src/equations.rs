//! Rewritings of the field equations, each checked against the direct
//! variation on a single site jet.
//!
//! Rows come back as [`IdentityRow`]s. A row whose name starts with
//! `finding-` compares against a hand-derived formula that the variation
//! does not reproduce; those are expected to be large.

use crate::action::{full_dot, mixed_form, FieldEqResidual};
use crate::params::ActionParams;
use spin7_core::spin7::IdentityRow;
use spin7_core::{einsum, AltForm, Mat8, Space, Tensor, DIM};
use spin7_fields::geometry::{phi0, reference};
use spin7_fields::verify::{component_divergence, dense_forms, phi_tt, torsion_divergence};
use spin7_fields::SiteGeometry;

fn phi_dense() -> &'static Tensor {
    reference().phi_lower()
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

fn mat_row(name: &'static str, a: Mat8, b: Mat8) -> IdentityRow {
    row(name, (a - b).amax(), a.amax().max(b.amax()))
}

/// `C`, `∂C` and `∇C` at a site, with `C = c(T)`.
#[derive(Clone, Debug)]
pub struct SiteFields {
    pub c: AltForm,
    pub dc: [AltForm; DIM],
    pub nc: [AltForm; DIM],
}

impl SiteFields {
    pub fn new(site: &SiteGeometry, params: &ActionParams) -> Self {
        let c = params.c_from_torsion(&site.t);
        let dcoord: [AltForm; DIM] = std::array::from_fn(|a| params.c_from_torsion(&site.dt[a]));
        SiteFields { dc: site.frame_derivative(&c, &dcoord), nc: site.covariant(&c, &dcoord), c }
    }

    pub fn residual(&self, params: &ActionParams) -> FieldEqResidual {
        FieldEqResidual::new(&self.c, &self.dc, params)
    }
}

/// `Φ·∇C - ¾ΦCC + 2λ + ½κ|C|²`, the trace of the equations written by hand.
pub fn trace_by_hand(f: &SiteFields, params: &ActionParams) -> f64 {
    phi_dense().dot(&dense_forms(&f.nc)) - 0.75 * phi_tt(&f.c) + 2.0 * params.lambda + 0.5 * params.kappa * full_dot(&f.c, &f.c)
}

/// Rows valid for every admissible κ.
pub fn generic_rows(site: &SiteGeometry, params: &ActionParams) -> Vec<IdentityRow> {
    let f = SiteFields::new(site, params);
    let res = f.residual(params);
    let by_hand = trace_by_hand(&f, params);
    let div = component_divergence(&site.t, &site.nabla_t());
    let factor = -6.0 * (params.kappa + 2.0) / params.denominator();
    vec![
        row("parts-sum", res.parts.sum().sub(&res.e_prime).max_abs(), res.e_prime.max_abs()),
        row("trace-two-route", (res.trace() - by_hand).abs(), by_hand.abs()),
        row("trace-mixed", (res.mixed.trace() - res.trace()).abs(), by_hand.abs()),
        mat_row("antisymmetric-divergence", asym(res.mixed), div * factor),
        row("c-equation", params.torsion_from_c(&f.c).sub(&site.t).max_abs(), site.t.max_abs()),
    ]
}

/// `Φ_{ijkl}T_{ija}T_{klb}` minus its trace part.
fn tt_tensor(th: &Tensor) -> Mat8 {
    let pt = einsum("ijkl,ija->kla", &[phi_dense(), th]);
    let m = einsum("kla,klb->ab", &[&pt, th]).to_mat();
    m - Mat8::identity() * (m.trace() / 7.0)
}

/// The κ = 0 form
/// `∂_{[a}T_{bcd]} - (3/2)T_{[ab}{}^pT_{cd]p} - ⅛(TT)_{[a|e|}Φ^e{}_{bcd]} + (λ/168)Φ`.
pub fn compact_e_prime(t: &AltForm, dt: &[AltForm; DIM], lambda: f64) -> AltForm {
    let th = t.expand();
    let mut e = AltForm::alt_of(&dense_forms(dt));
    e.axpy(-1.5, &AltForm::alt_of(&einsum("abp,cdp->abcd", &[&th, &th])));
    e.axpy(-1.0 / 32.0, &phi0().derivation(&tt_tensor(&th)));
    e.axpy(lambda / 168.0, phi0());
    e
}

/// The κ = 0 equations as a single 4-form with the Λ⁴₂₇ part projected out.
pub fn projected_four_form(t: &AltForm, nabla_t: &[AltForm; DIM], lambda: f64) -> AltForm {
    let p = phi_dense();
    let th = t.expand();
    let nt = dense_forms(nabla_t);
    let alt = |x: Tensor| AltForm::alt_of(&x);
    let mut f = alt(nt.clone());
    f.axpy(-0.75, &alt(einsum("abpq,cdpq->abcd", &[p, &nt])));
    f.axpy(-0.75, &alt(einsum("abpq,pcdq->abcd", &[p, &nt])));
    f.axpy(-1.5, &alt(einsum("abp,cdp->abcd", &[&th, &th])));
    let ttr = einsum("cdr,pqr->cdpq", &[&th, &th]);
    f.axpy(0.75, &alt(einsum("abpq,cdpq->abcd", &[p, &ttr])));
    let ptt = einsum("ijkl,dij,klp->dp", &[p, &th, &th]);
    f.axpy(-0.125, &alt(einsum("abcp,dp->abcd", &[p, &ptt])));
    let tt2 = einsum("cpr,dqr->cdpq", &[&th, &th]);
    f.axpy(-1.5, &alt(einsum("abpq,cdpq->abcd", &[p, &tt2])));
    f.axpy(phi_tt(t) / 32.0 + lambda / 24.0, phi0());
    f
}

/// The κ = 0 equations in mixed form, `C = T`.
fn feqs_mixed(c: &AltForm, nabla_c: &[AltForm; DIM], params: &ActionParams) -> Mat8 {
    let p = phi_dense();
    let ch = c.expand();
    let nc = dense_forms(nabla_c);
    let a = einsum("bpqr,apqr->ab", &[p, &nc]).to_mat();
    let b = einsum("bpqr,rapq->ab", &[p, &nc]).to_mat();
    let pc = einsum("bpqr,qrs->bps", &[p, &ch]);
    let cc = einsum("bps,aps->ab", &[&pc, &ch]).to_mat();
    let pcc = einsum("pqrs,apq->ars", &[p, &ch]);
    let d = einsum("ars,brs->ab", &[&pcc, &ch]).to_mat();
    let g = params.lambda + 0.75 * phi_tt(c);
    a * 0.25 - b * 0.75 - cc * 1.5 - d * 0.75 + Mat8::identity() * (0.25 * g)
}

/// Terms of the symmetric κ = 0 equation without their `g_{ab}` part.
fn feq_symm_core(t: &AltForm, nabla_t: &[AltForm; DIM]) -> Mat8 {
    let p = phi_dense();
    let th = t.expand();
    let nt = dense_forms(nabla_t);
    let a = einsum("apqr,bpqr->ab", &[p, &nt]).to_mat();
    let b = einsum("apqr,rbpq->ab", &[p, &nt]).to_mat();
    let pt = einsum("apqr,qrs->aps", &[p, &th]);
    let c = einsum("aps,bps->ab", &[&pt, &th]).to_mat();
    let pcc = einsum("pqrs,apq->ars", &[p, &th]);
    let d = einsum("ars,brs->ab", &[&pcc, &th]).to_mat();
    -sym(a) * 0.5 + sym(b) * 1.5 + sym(c) * 3.0 + d * 1.5
}

/// κ = 0 rows. `lambda` is the only coupling left.
pub fn kappa_zero_rows(site: &SiteGeometry, lambda: f64) -> Vec<IdentityRow> {
    let params = ActionParams { kappa: 0.0, lambda };
    let f = SiteFields::new(site, &params);
    let res = f.residual(&params);
    let nt = site.nabla_t();
    let t = &site.t;
    let cs = reference();

    let compact = compact_e_prime(t, &f.dc, lambda);
    let j4 = cs.j_operator(4).expect("degree 4");
    let projected = projected_four_form(t, &nt, lambda);
    let mut target = res.e_prime.clone();
    target.axpy(-0.5, &j4.apply(&res.e_prime));
    let p27 = cs.projector(Space::L4_27).apply(&projected);

    let core = feq_symm_core(t, &nt);
    let ptt = phi_tt(t);
    let lhs = -sym(res.mixed) * 2.0;
    let traceless = |m: Mat8| m - Mat8::identity() * (m.trace() / 8.0);
    let corrected = core + Mat8::identity() * (-0.375 * ptt - 0.5 * lambda);
    let hand = core + Mat8::identity() * (0.375 * ptt + lambda);

    let ric = site.ricci();
    let th = t.expand();
    let pn = einsum("apqr,bpqr->ab", &[phi_dense(), &dense_forms(&nt)]).to_mat();
    let tt = einsum("apq,bpq->ab", &[&th, &th]).to_mat();
    let pcc = einsum("pqrs,apq->ars", &[phi_dense(), &th]);
    let d = einsum("ars,brs->ab", &[&pcc, &th]).to_mat();
    let ricci_form = ric * 3.0 + sym(pn) - tt * 3.0 + d * 1.5;

    let scale = res.e_prime.max_abs();
    vec![
        row("c-equals-t", f.c.sub(t).max_abs(), t.max_abs()),
        row("compact-e-prime", compact.sub(&res.e_prime).max_abs(), scale),
        row("projected-four-form", projected.sub(&target).max_abs(), scale),
        row("projected-four-form-l27", p27.max_abs(), scale),
        mat_row("mixed-form", res.mixed, feqs_mixed(&f.c, &f.nc, &params)),
        mat_row("symmetric-traceless", traceless(lhs), traceless(core)),
        mat_row("symmetric", lhs, corrected),
        mat_row("symmetric-ricci-rewrite", ricci_form, core),
        mat_row("finding-symmetric-hand-trace", lhs, hand),
    ]
}

/// `-¼ A(Φ_{apqr}T_{bps}T_{qrs}) - (1/24)Φ_{pqrs}(T_{abp} - ½Φ_{abcd}T_{cdp})T_{qrs}`,
/// the hand-derived κ = -2 antisymmetric equation.
pub fn reduced_antisymmetric(t: &AltForm) -> Mat8 {
    let p = phi_dense();
    let th = t.expand();
    let pt = einsum("apqr,qrs->aps", &[p, &th]);
    let a = einsum("aps,bps->ab", &[&pt, &th]).to_mat();
    let mut shifted = th.clone();
    shifted.axpy(-0.5, &einsum("abcd,cdp->abp", &[p, &th]));
    let v = einsum("pqrs,qrs->p", &[p, &th]);
    let b = einsum("abp,p->ab", &[&shifted, &v]).to_mat();
    -asym(a) * 0.25 - b / 24.0
}

/// The hand-derived long κ = -2 equation in mixed form.
fn kappa_m2_hand(t: &AltForm, nabla_t: &[AltForm; DIM], lambda: f64) -> Mat8 {
    let p = phi_dense();
    let th = t.expand();
    let nt = dense_forms(nabla_t);
    let m = |spec: &str, ops: &[&Tensor]| einsum(spec, ops).to_mat();
    // ∇^p T_{abp} = ∇^p T_{pab}
    let div = torsion_divergence(nabla_t);
    let t2 = th.dot(&th);
    let ptt = phi_tt(t);
    let pnt = p.dot(&nt);
    let mut l = m("bpqr,apqr->ab", &[p, &nt]) * 0.25 - m("bpqr,rapq->ab", &[p, &nt]) * 0.5 + m("apqr,rbpq->ab", &[p, &nt]) * 0.25;
    l += (div - m("abcd,cd->ab", &[p, &Tensor::from_mat(&div)]) * 0.5) * 0.5;
    let pt_b = einsum("bpqr,qrs->bps", &[p, &th]);
    l += m("bps,aps->ab", &[&pt_b, &th]) * (-23.0 / 24.0);
    l += m("bps,aps->ab", &[&pt_b, &th]).transpose() * (-5.0 / 24.0);
    let pcc = einsum("pqrs,apq->ars", &[p, &th]);
    l += m("ars,brs->ab", &[&pcc, &th]) * -0.25;
    l += m("apq,bpq->ab", &[&th, &th]) / 6.0;
    let v = einsum("pqrs,qrs->p", &[p, &th]);
    l += m("abp,p->ab", &[&th, &v]) * (-1.0 / 24.0);
    let pijkl = einsum("ijkl,jkl->i", &[p, &th]);
    let x = einsum("pqi,i->pq", &[&th, &pijkl]);
    l += m("abpq,pq->ab", &[p, &x]) / 48.0;
    let y = einsum("bijk,rjk->bir", &[p, &th]);
    let z = einsum("apqr,pqi->air", &[p, &th]);
    l += m("air,bir->ab", &[&z, &y]) * (-1.0 / 24.0);
    l + Mat8::identity() * (0.25 * (lambda - 17.0 / 12.0 * t2 + 17.0 / 24.0 * ptt + 0.5 * pnt))
}

/// κ = -2 rows. `v` is the shift used for the invariance check `T → T + Φ·v`.
pub fn kappa_m2_rows(site: &SiteGeometry, lambda: f64, v: &[f64; DIM]) -> Vec<IdentityRow> {
    let params = ActionParams { kappa: -2.0, lambda };
    let f = SiteFields::new(site, &params);
    let res = f.residual(&params);
    let t = &site.t;
    let nt = site.nabla_t();
    let th = t.expand();
    let ric = site.ricci();
    let r = ric.trace();
    let t2 = th.dot(&th);
    let ptt = phi_tt(t);
    let pnt = phi_dense().dot(&dense_forms(&nt));

    let shift = reference().lambda3_8_embed(v);
    let shifted = t.add(&shift.scale(1.0 / shift.max_abs().max(1e-300) * t.max_abs()));
    let fa = reduced_antisymmetric(t);
    let fb = reduced_antisymmetric(&shifted);

    let einstein = ric * -0.5 + Mat8::identity() * (lambda / 4.0 - r / 8.0);
    let x = res.trace();
    let hand_trace = 2.0 * lambda - 2.75 * t2 - 0.125 * ptt + 1.5 * pnt;
    let hand = kappa_m2_hand(t, &nt, lambda);
    let mixed = res.mixed;
    let curv = r.abs().max(ric.amax());
    vec![
        row("antisymmetric-generic", asym(mixed).amax(), mixed.amax()),
        row("antisymmetric-reduced", fa.amax(), t2),
        row("antisymmetric-reduced-shift", (fb - fa).amax(), t2),
        mat_row("einstein", sym(mixed), einstein),
        row("trace-curvature", (x - (2.0 * lambda - 1.5 * r)).abs(), curv),
        row("hand-trace-rewrite", (hand_trace - (2.0 * lambda - 1.25 * t2 + 11.0 / 8.0 * ptt - 1.5 * r)).abs(), curv),
        row("finding-hand-trace", (hand_trace - x).abs(), x.abs()),
        mat_row("hand-antisymmetric", asym(hand), asym(mixed)),
        mat_row("finding-hand-symmetric", sym(hand), sym(mixed)),
    ]
}

/// `Φ_{bpqr}` against the frame Ricci tensor: `E′` at κ = -2 in mixed form
/// should be `-½Ric - (R/8)g + (λ/4)g`.
pub fn kappa_m2_mixed(site: &SiteGeometry, lambda: f64) -> Mat8 {
    let params = ActionParams { kappa: -2.0, lambda };
    mixed_form(&SiteFields::new(site, &params).residual(&params).e_prime)
}
