use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spin7_core::{CayleyStructure, Mat8, Space};
use spin7_linear::kernel::{diffeo_4form, kernel_completed};
use spin7_linear::torsion::{self, epsilon_contraction, j3_of_u_closed, linearized_torsion_closed, u_from_fields};
use spin7_linear::*;

fn random_perturbation(rng: &mut ChaCha8Rng) -> Perturbation {
    Perturbation::unpack(&DVector::from_fn(PACKED, |_, _| rng.random_range(-1.0..1.0)))
}

fn random_p(rng: &mut ChaCha8Rng) -> Momentum {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}

#[test]
fn packing_roundtrips_and_xi_lies_in_lambda2_7() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let v = DVector::from_fn(PACKED, |_, _| rng.random_range(-1.0..1.0));
        let x = Perturbation::unpack(&v);
        assert!((x.pack() - &v).amax() < 1e-13);
        assert!((spin7_linear::perturbation::pi7(&x.xi) - x.xi).amax() < 1e-12);
        assert!(Perturbation::new(x.h, x.xi).is_ok());
    }
    assert!(Perturbation::new(Mat8::identity(), Mat8::from_fn(|a, b| (a as f64) - (b as f64))).is_err());
}

#[test]
fn fields_roundtrip_through_the_4form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let x = random_perturbation(&mut rng);
        let phi = x.to_4form();
        let back = fields_from_4form(&phi).unwrap();
        assert!((back.h - x.h).amax() < 1e-10 && (back.xi - x.xi).amax() < 1e-10);
        let lhs = phi.dot(&phi) * 24.0 / 96.0;
        assert!((lhs - x.norm_sq()).abs() < 1e-10 * (1.0 + lhs), "{lhs} {}", x.norm_sq());
    }
    let cs = CayleyStructure::reference();
    let trace = fields_from_4form(cs.phi()).unwrap();
    assert!(trace.xi.amax() < 1e-12 && (trace.h - Mat8::identity() * trace.h[(0, 0)]).amax() < 1e-12);
    let bad = cs.projector(Space::L4_27).apply(&spin7_core::random::random_form(4, &mut rng));
    assert!(matches!(fields_from_4form(&bad), Err(LinearError::NotTangent(_))));
}

#[test]
fn gauge_directions_reproduce_the_diffeomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let (p, v) = (random_p(&mut rng), random_p(&mut rng));
        let g = gauge_direction(&p, &v);
        assert!(g.to_4form().sub(&diffeo_4form(&p, &v)).max_abs() < 1e-10);
        // the same change of φ has no torsion at linear order
        assert!(linearized_torsion(&g.to_4form(), &p).max_abs() < 1e-12);
    }
    let p = generic_momentum();
    let g = gauge_direction(&p, &p.map(|x| 2.0 * x));
    assert!(g.xi.amax() < 1e-14);
}

#[test]
fn kernels_are_symmetric_homogeneous_and_linear_in_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = random_p(&mut rng);
    let c = Coeffs { rho: 0.3, alpha: -1.2, beta: 0.7, gamma: 0.4, lambda: 2.0, mu: -0.6 };
    let k = kernel_raw(p, &c);
    assert!((&k.matrix - k.matrix.transpose()).amax() < 1e-14);
    let k2 = kernel_raw(p.map(|x| 2.5 * x), &c);
    assert!(k2.max_diff(&k.scale(6.25)) < 1e-12);
    let (rho, mu) = (0.8, -1.3);
    let mix = kernel_raw(p, &Coeffs::invariant(rho, mu));
    let sum = kernel_gr(p).scale(rho).matrix + kernel_prime(p).scale(mu).matrix;
    assert!((mix.matrix - sum).amax() < 1e-13);
    // ρ alone is p² on h
    let only = kernel_raw(p, &Coeffs { rho: 1.0, alpha: 0.0, beta: 0.0, gamma: 0.0, lambda: 0.0, mu: 0.0 });
    let x = random_perturbation(&mut rng);
    let pp: f64 = p.iter().map(|v| v * v).sum();
    assert!((only.value(&x) - 0.5 * pp * x.h.dot(&x.h)).abs() < 1e-12);
}

#[test]
fn invariant_coefficients_annihilate_gauge_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = random_p(&mut rng);
        let c = Coeffs::invariant(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let k = kernel_raw(p, &c);
        let g = gauge_direction(&p, &random_p(&mut rng));
        assert!(k.apply(&g).amax() < 1e-11 * (1.0 + k.max_abs()));
    }
}

#[test]
fn completed_square_is_the_same_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let p = random_p(&mut rng);
        let c = Coeffs {
            rho: rng.random_range(-2.0..2.0),
            alpha: rng.random_range(-2.0..2.0),
            beta: rng.random_range(-2.0..2.0),
            gamma: rng.random_range(0.3..2.0),
            lambda: rng.random_range(-2.0..2.0),
            mu: rng.random_range(-2.0..2.0),
        };
        assert!(kernel_completed(p, &c).unwrap().max_diff(&kernel_raw(p, &c)) < 1e-11);
    }
    let c = Coeffs { gamma: 0.0, ..Coeffs::gr() };
    assert!(kernel_completed(generic_momentum(), &c).is_err());
}

#[test]
fn ellipticity_reports() {
    let p = generic_momentum();
    let gr = check_ellipticity(p, &Coeffs::gr());
    assert!(gr.gauge_invariant && gr.gauge_null_dim == 8);
    assert!(gr.completed_square_residual.unwrap() < 1e-11);
    // ξ has no kinetic term in pure GR: seven more zero modes, not elliptic on the full 43
    assert_eq!((gr.null_dim, gr.restricted_zero_modes, gr.elliptic), (15, 7, false));
    for (rho, mu) in [(1.0, 2.0 / 3.0), (0.5, 1.0), (1.0, -0.4)] {
        let r = check_ellipticity(p, &Coeffs::invariant(rho, mu));
        assert!(r.elliptic && r.null_dim == 8 && r.restricted.len() == 35, "{r:?}");
        let twice = check_ellipticity(p.map(|v| 2.0 * v), &Coeffs::invariant(rho, mu));
        let drift = r.restricted.iter().zip(&twice.restricted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-10);
    }
    let bad = check_ellipticity(p, &Coeffs { beta: 0.5, ..Coeffs::gr() });
    assert!(!bad.gauge_invariant && bad.gauge_residual > 1e-3 && !bad.elliptic);
    let flat = check_ellipticity(p, &Coeffs { gamma: 0.0, ..Coeffs::gr() });
    assert!(flat.completed_square_residual.is_none());
}

#[test]
fn torsion_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let j3 = CayleyStructure::reference().j_operator(3).unwrap().clone();
    for _ in 0..10 {
        let x = random_perturbation(&mut rng);
        let p = random_p(&mut rng);
        let phi = x.to_4form();
        let u = epsilon_contraction(&phi, &p);
        let t = linearized_torsion(&phi, &p);
        assert!(j3.apply(&t).sub(&u).max_abs() < 1e-12);
        assert!(linearized_torsion_closed(&phi, &p).sub(&t).max_abs() < 1e-10);
        assert!(j3_of_u_closed(&phi, &p).sub(&j3.apply(&u)).max_abs() < 1e-10);
        assert!(u_from_fields(&x, &p).sub(&u).max_abs() < 1e-10);
        let (va, vb) = (torsion::torsion_vector_closed(&phi, &p), torsion::torsion_vector(&t));
        assert!(va.iter().zip(vb).all(|(a, b)| (a - b).abs() < 1e-10));
    }
    let x = random_perturbation(&mut rng);
    assert!(linearized_torsion(&x.to_4form(), &[0.0; 8]).max_abs() == 0.0);
    // pure trace: only the ½Φ_{bcd}{}^i p_i h and the w = h pieces survive
    let p = generic_momentum();
    let tr = Perturbation { h: Mat8::identity() * 0.3, xi: Mat8::zeros() };
    let u = epsilon_contraction(&tr.to_4form(), &p);
    let expect = CayleyStructure::reference().lambda3_8_embed(&p).scale(-0.3 * (4.0 - 0.5 - 1.5));
    assert!(u.sub(&expect).max_abs() < 1e-12, "{}", u.sub(&expect).max_abs());
}

#[test]
fn action_kernel_matches_the_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let kappa = loop {
            let k: f64 = rng.random_range(-8.0..4.0);
            if torsion::denominator(k).abs() > 0.1 {
                break k;
            }
        };
        for _ in 0..10 {
            let p = random_p(&mut rng);
            let la = linearized_action_kernel(kappa, p).unwrap();
            let fam = kernel_raw(p, &la.coeffs());
            assert!(la.normalized().max_diff(&fam) < 1e-10 * (1.0 + fam.max_abs()), "κ = {kappa}");
            let g = gauge_direction(&p, &random_p(&mut rng));
            assert!(la.kernel.apply(&g).amax() < 1e-11 * (1.0 + la.kernel.max_abs()));
        }
    }
    assert_eq!(rho_mu(0.0), (1.0, 2.0 / 3.0));
    assert!(matches!(linearized_action_kernel(1.0, generic_momentum()), Err(LinearError::SingularKappa(_))));
    assert!(linearized_action_kernel(-6.0, generic_momentum()).is_err());
}

#[test]
fn kappa_minus_two_is_linearized_gr() {
    let p = generic_momentum();
    let la = linearized_action_kernel(-2.0, p).unwrap();
    assert!((la.rho - 2.0 / 3.0).abs() < 1e-15 && la.mu == 0.0);
    assert!(la.normalized().max_diff(&kernel_gr(p).scale(2.0 / 3.0)) < 1e-11);
    // ξ decouples: its rows vanish
    for i in 36..PACKED {
        assert!(la.kernel.matrix.row(i).amax() < 1e-13);
    }
}

#[test]
fn conformal_mode_has_the_wrong_sign_below_one() {
    let p = generic_momentum();
    for kappa in [-12.0, -7.0, -4.0, -2.0, 0.0, 0.5, 2.0, 3.0] {
        let la = linearized_action_kernel(kappa, p).unwrap();
        let tr = Perturbation { h: Mat8::identity() * (1.0 / 8f64.sqrt()), xi: Mat8::zeros() };
        assert!((la.kernel.value(&tr) - 7.0 / 12.0 * (kappa - 1.0) * la.scale).abs() < 1e-12, "κ {kappa}");
        let r = check_ellipticity(p, &la.coeffs());
        let conformal = 2.0 / 3.0 * (kappa - 1.0);
        assert!(r.restricted.iter().any(|v| (v - conformal).abs() < 1e-10), "κ {kappa}: {:?}", r.restricted);
        let negative = r.restricted.iter().filter(|v| **v < -1e-10).count();
        // one conformal mode below κ = 1; past κ = -2 the ξ block flips as well,
        // and past κ = -6 (ρ < 0) everything does
        let expected = match kappa {
            k if k < -6.0 => 35,
            k if k < -2.0 => 8,
            k if k < 1.0 => 1,
            _ => 0,
        };
        assert_eq!(negative, expected, "κ {kappa}");
        // the action kernel itself is definite off the gauge directions exactly when D < 0
        if la.scale < 0.0 {
            assert!(negative == 0 || negative == r.restricted.len(), "κ {kappa}");
        }
    }
}
