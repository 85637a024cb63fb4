use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spin7_core::random::{random_form, random_frame, random_matrix, random_symmetric, random_vector};
use spin7_core::{AltForm, CayleyStructure, Mat8, Space};
use spin7_dynamics::action::{density, metric_variation, phi_from_metric_variation};
use spin7_dynamics::equations::{generic_rows, kappa_m2_rows, kappa_zero_rows, reduced_antisymmetric};
use spin7_dynamics::{gateaux_c, ActionParams, CDirection, DynError, FieldEqResidual, LatticeState};
use spin7_fields::{FrameFamily, Geometry, LatticeSpec};

fn cs() -> CayleyStructure {
    CayleyStructure::reference()
}

#[test]
fn c_equation_special_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = random_form(3, &mut rng);
    let p0 = ActionParams::new(0.0, 0.0).unwrap();
    assert!(p0.c_from_torsion(&t).sub(&t).max_abs() < 1e-14);

    let v8 = cs().lambda3_8_embed(&random_vector(&mut rng));
    let p2 = ActionParams::new(-2.0, 0.0).unwrap();
    assert!(p2.c_from_torsion(&v8).sub(&v8.scale(1.5)).max_abs() < 1e-12);

    for k in [0.5, 3.0, -2.0, -7.5] {
        let p = ActionParams::new(k, 0.3).unwrap();
        assert!(p.torsion_from_c(&p.c_from_torsion(&t)).sub(&t).max_abs() < 1e-10);
    }
    for k in [1.0, -6.0] {
        assert!(matches!(ActionParams::new(k, 0.0), Err(DynError::SingularKappa(_))));
    }
}

#[test]
fn metric_variation_inverts_the_frame_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e = random_frame(&mut rng, 0.4);
    let cs = CayleyStructure::from_frame(&e).unwrap();
    for _ in 0..4 {
        let dg = random_symmetric(&mut rng);
        let dphi = phi_from_metric_variation(&dg, &cs);
        assert!((metric_variation(&dphi, &cs) - dg).amax() < 1e-10);
    }
    // trace part: δg·g⁻¹ has trace δΦ·Φ/84
    let dphi = cs.phi().scale(0.3);
    let dg = metric_variation(&dphi, &cs);
    let tr = (cs.metric().g_inv() * dg).trace();
    assert!((tr - dphi.expand().dot(cs.phi_upper()) / 84.0).abs() < 1e-10);
    // Λ⁴₇ does not move the metric
    let r = CayleyStructure::reference();
    let w7 = r.projector(Space::L4_7).apply(&random_form(4, &mut rng));
    assert!(metric_variation(&w7, &r).amax() < 1e-12);
}

#[test]
fn density_without_c_is_the_volume_term() {
    let zero: [AltForm; 8] = std::array::from_fn(|_| AltForm::zeros(3));
    let p = ActionParams::new(0.7, 2.5).unwrap();
    assert_eq!(density(1.3, &AltForm::zeros(3), &zero, &ActionParams::new(0.7, 0.0).unwrap()), 0.0);
    assert!((density(1.3, &AltForm::zeros(3), &zero, &p) - 2.5 / 6.0 * 1.3).abs() < 1e-15);
}

#[test]
fn torsion_free_with_lambda_is_pure_trace() {
    let zero: [AltForm; 8] = std::array::from_fn(|_| AltForm::zeros(3));
    let p = ActionParams::new(0.0, 1.7).unwrap();
    let r = FieldEqResidual::new(&AltForm::zeros(3), &zero, &p);
    let phi = cs().phi().clone();
    assert!(r.e_prime.sub(&phi.scale(1.7 / 168.0)).max_abs() < 1e-15);
    let n = r.norms();
    assert!(n.l7 < 1e-15 && n.l35 < 1e-15 && n.l27 < 1e-15 && n.l1 > 0.0);

    let spec = LatticeSpec::new(1, 8, 2).unwrap();
    let frames = vec![Mat8::identity(); 8];
    let v = LatticeState::new(&spec, &frames, &p).unwrap().velocity(&p);
    let c = v[0][(0, 0)];
    assert!(c != 0.0 && (v[0] - Mat8::identity() * c).amax() < 1e-14);
}

fn smooth_frames(spec: &LatticeSpec, seed: u64, amp: f64) -> Vec<Mat8> {
    FrameFamily::random_smooth(seed, spec.active_dims(), amp).sample(spec).unwrap()
}

#[test]
fn lattice_action_is_exactly_stationary_in_c() {
    let spec = LatticeSpec::new(1, 16, 2).unwrap();
    let frames = smooth_frames(&spec, 3, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in [0.0, -2.0, 0.5, 3.0] {
        let p = ActionParams::new(k, 0.4).unwrap();
        let state = LatticeState::new(&spec, &frames, &p).unwrap();
        let c = state.coordinate_c();
        let dir: Vec<AltForm> = (0..c.len()).map(|_| random_form(3, &mut rng)).collect();
        let eps = 1e-3;
        let shifted = |s: f64| {
            let cc: Vec<AltForm> = c.iter().zip(&dir).map(|(a, b)| a.add(&b.scale(s))).collect();
            LatticeState::with_c(&spec, &frames, &cc).unwrap().action(&p)
        };
        let g = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
        assert!(g.abs() < 1e-11, "κ={k}: {g}");
    }
}

#[test]
fn orbit_gradient_matches_difference_quotients() {
    let spec = LatticeSpec::new(1, 12, 4).unwrap();
    let frames = smooth_frames(&spec, 5, 0.15);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in [0.0, 0.5, -2.0] {
        let p = ActionParams::new(k, 0.3).unwrap();
        let state = LatticeState::new(&spec, &frames, &p).unwrap();
        let grad = state.gradient(&p);
        let y: Vec<Mat8> = (0..frames.len()).map(|_| random_matrix(&mut rng)).collect();
        let predicted = spec.cell_volume() * grad.iter().zip(&y).map(|(g, y)| g.dot(y)).sum::<f64>();

        // fixed C: exact first variation of the density
        let c = state.coordinate_c();
        let moved = |t: f64| -> Vec<Mat8> { frames.iter().zip(&y).map(|(e, y)| e * (Mat8::identity() + y * t)).collect() };
        let s_fixed = |t: f64| LatticeState::with_c(&spec, &moved(t), &c).unwrap().action(&p);
        let h = 1e-5;
        let fixed = (s_fixed(h) - s_fixed(-h)) / (2.0 * h);
        assert!((fixed - predicted).abs() < 1e-7 * (1.0 + predicted.abs()), "κ={k}: {fixed} vs {predicted}");

        // C re-solved at every frame: same derivative
        let s_full = |t: f64| LatticeState::new(&spec, &moved(t), &p).unwrap().action(&p);
        let full = (s_full(h) - s_full(-h)) / (2.0 * h);
        assert!((full - predicted).abs() < 1e-7 * (1.0 + predicted.abs()), "κ={k}: {full} vs {predicted}");
    }
}

#[test]
fn analytic_action_is_stationary_in_c() {
    let spec = LatticeSpec::new(1, 48, 2).unwrap();
    let geo = Geometry::analytic(&FrameFamily::random_bump(7, 0.4), &spec).unwrap();
    let mut worst: f64 = 0.0;
    for k in [0.0, -2.0, 0.5, 3.0] {
        let p = ActionParams::new(k, 0.6).unwrap();
        for seed in 0..10 {
            let dir = CDirection::random(100 + seed, 1);
            worst = worst.max(gateaux_c(&geo, &p, &dir, 1e-3).abs());
        }
    }
    assert!(worst < 1e-9, "{worst}");
}

fn sample_sites() -> Vec<spin7_fields::SiteGeometry> {
    let spec = LatticeSpec::new(2, 8, 2).unwrap();
    let mut out = Vec::new();
    for fam in [FrameFamily::random_bump(8, 0.5), FrameFamily::random_smooth(9, 2, 0.1)] {
        let geo = Geometry::analytic(&fam, &spec).unwrap();
        out.extend(geo.sites.into_iter().step_by(13));
    }
    out
}

fn check_rows(rows: &[spin7_core::spin7::IdentityRow], tol: f64, label: &str) {
    for r in rows.iter().filter(|r| !r.name.starts_with("finding-")) {
        assert!(r.residual < tol * (1.0 + r.scale), "{label} {}: {} (scale {})", r.name, r.residual, r.scale);
    }
}

#[test]
fn generic_rewritings_hold_for_all_kappa() {
    for site in sample_sites() {
        for k in [0.0, -2.0, 0.5, 3.0, -8.0] {
            check_rows(&generic_rows(&site, &ActionParams::new(k, 0.9).unwrap()), 1e-10, &format!("κ={k}"));
        }
    }
}

#[test]
fn kappa_zero_rewritings() {
    for site in sample_sites() {
        let rows = kappa_zero_rows(&site, 0.9);
        check_rows(&rows, 1e-10, "κ=0");
        let hand = rows.iter().find(|r| r.name == "finding-symmetric-hand-trace").unwrap();
        assert!(hand.residual > 1e-3);
    }
}

#[test]
fn kappa_minus_two_is_einstein() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut findings = [0.0f64; 2];
    for site in sample_sites() {
        let v = random_vector(&mut rng);
        let rows = kappa_m2_rows(&site, 0.9, &v);
        check_rows(&rows, 1e-9, "κ=-2");
        for (slot, name) in ["finding-hand-trace", "finding-hand-symmetric"].iter().enumerate() {
            let r = rows.iter().find(|r| r.name == *name).unwrap();
            findings[slot] = findings[slot].max(r.residual);
        }
    }
    // the hand-derived hand formulas do not follow from the action
    assert!(findings.iter().all(|&f| f > 1e-2), "{findings:?}");
}

#[test]
fn reduced_antisymmetric_equation_vanishes_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let t = random_form(3, &mut rng);
        assert!(reduced_antisymmetric(&t).amax() < 1e-13);
    }
}
