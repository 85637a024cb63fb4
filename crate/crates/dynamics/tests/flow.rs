use spin7_core::{AltForm, CayleyStructure, Mat8, Space};
use spin7_dynamics::flow::split_velocity;
use spin7_dynamics::{flow_step, ActionParams, DynError, Flow, FlowConfig, LatticeState, Scheme};
use spin7_fields::{FrameFamily, LatticeSpec};

fn k0() -> ActionParams {
    ActionParams::new(0.0, 0.0).unwrap()
}

/// `x⁰ ↦ x⁰ + 0.3 sin x⁰` pulled back: flat, but not constant in these coordinates.
fn reparametrised(spec: &LatticeSpec) -> Vec<Mat8> {
    (0..spec.num_sites())
        .map(|s| {
            let mut e = Mat8::identity();
            e[(0, 0)] = 1.0 + 0.3 * spec.coordinates(s)[0].cos();
            e
        })
        .collect()
}

#[test]
fn torsion_free_fields_do_not_move() {
    let spec = LatticeSpec::new(1, 16, 2).unwrap();
    let rot = CayleyStructure::reference().projector(Space::L2_21).apply(&AltForm::basis(2, 3)).expand().to_mat().exp();
    for frames in [vec![rot; 16], reparametrised(&spec)] {
        for k in [0.0, -2.0, 0.5] {
            let p = ActionParams::new(k, 0.0).unwrap();
            let state = LatticeState::new(&spec, &frames, &p).unwrap();
            assert!(state.max_torsion() < 1e-12);
            let v = state.velocity(&p);
            assert!(v.iter().all(|v| v.amax() < 1e-10));
        }
        let mut flow = Flow::new(spec, frames.clone(), FlowConfig::new(k0(), Scheme::Rk2, 5)).unwrap();
        let rec = flow.run(|_| {}).unwrap();
        assert!(rec.iter().all(|r| (r.action - rec[0].action).abs() < 1e-14));
        assert!(flow.frames().iter().zip(&frames).all(|(a, b)| (a - b).amax() < 1e-12));
    }
}

#[test]
fn velocity_splits_into_metric_and_lambda2_7_parts() {
    let spec = LatticeSpec::new(1, 16, 2).unwrap();
    let frames = FrameFamily::near_flat(4, 1, 0.1).sample(&spec).unwrap();
    let state = LatticeState::new(&spec, &frames, &k0()).unwrap();
    let cs = CayleyStructure::reference();
    let p21 = cs.projector(Space::L2_21);
    for v in state.velocity(&k0()) {
        let (h, xi) = split_velocity(&v);
        assert!((h + xi * 0.25 - v).amax() < 1e-15);
        let xi_form = AltForm::compress(&spin7_core::Tensor::from_mat(&xi));
        assert!(p21.apply(&xi_form).max_abs() < 1e-12 * (1.0 + xi.amax()));
    }
}

#[test]
fn one_step_lowers_the_action_and_rk2_is_second_order() {
    let spec = LatticeSpec::new(1, 16, 2).unwrap();
    let frames = FrameFamily::near_flat(2, 1, 0.05).sample(&spec).unwrap();
    let p = k0();
    let s0 = LatticeState::new(&spec, &frames, &p).unwrap().action(&p);
    let dt = 0.1 * spec.spacing().powi(2);
    let e1 = flow_step(&spec, &frames, &p, dt, Scheme::Euler, 1.0).unwrap();
    assert!(LatticeState::new(&spec, &e1, &p).unwrap().action(&p) < s0);

    let gap = |dt: f64| {
        let a = flow_step(&spec, &frames, &p, dt, Scheme::Euler, 1.0).unwrap();
        let b = flow_step(&spec, &frames, &p, dt, Scheme::Rk2, 1.0).unwrap();
        a.iter().zip(&b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
    };
    let ratio = gap(dt) / gap(dt / 2.0);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}

#[test]
fn bad_configurations_are_rejected() {
    let spec = LatticeSpec::new(1, 16, 2).unwrap();
    let frames = FrameFamily::near_flat(2, 1, 0.05).sample(&spec).unwrap();
    let mut cfg = FlowConfig::new(k0(), Scheme::Euler, 3);
    cfg.dt = Some(spec.spacing().powi(2));
    assert!(matches!(Flow::new(spec, frames.clone(), cfg), Err(DynError::Params(_))));

    let mut cfg = FlowConfig::new(k0(), Scheme::Euler, 3);
    cfg.det_threshold = 0.999_999;
    cfg.sign_check = false;
    let mut flow = Flow::new(spec, frames.clone(), cfg).unwrap();
    assert!(matches!(flow.run(|_| {}), Err(DynError::Degenerate { .. })));

    assert!(serde_json::from_str::<FlowConfig>(r#"{"params":{"kappa":0},"scheme":"euler","steps":2,"typo":1}"#).is_err());
    let cfg: FlowConfig = serde_json::from_str(r#"{"params":{"kappa":0},"scheme":"rk2","steps":2}"#).unwrap();
    assert_eq!(cfg.cfl, 0.1);
}

#[test]
fn short_flow_descends() {
    let spec = LatticeSpec::new(1, 16, 2).unwrap();
    let frames = FrameFamily::near_flat(1, 1, 0.05).sample(&spec).unwrap();
    let mut flow = Flow::new(spec, frames, FlowConfig::new(k0(), Scheme::Euler, 10)).unwrap();
    let mut lines = Vec::new();
    let rec = flow.run(|r| lines.push(r.csv_row())).unwrap();
    assert_eq!(flow.sign(), 1.0);
    assert_eq!(lines.len(), 11);
    for w in rec.windows(2) {
        assert!(w[1].action <= w[0].action + 1e-12);
    }
    assert!(rec[10].max_torsion < rec[0].max_torsion);
}
