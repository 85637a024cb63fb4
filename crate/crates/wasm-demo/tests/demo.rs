use serde_json::Value;
use spin7_wasm::{decompose_json, flow_json, format_terms, kappa_scan_json, parse_terms, random_terms, reference_terms};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn terms_roundtrip_and_antisymmetrize() {
    let w = parse_terms(&random_terms(3)).unwrap();
    let back = parse_terms(&format_terms(&w)).unwrap();
    assert!(back.sub(&w).max_abs() < 1e-6);

    let a = parse_terms("1023: 2").unwrap();
    let b = parse_terms("0123: -2  # one swap").unwrap();
    assert_eq!(a, b);
    assert!(parse_terms("0113: 1").is_err());
    assert!(parse_terms("0128: 1").is_err());
    assert!(parse_terms("012: 1").is_err());
}

#[test]
fn reference_form_is_pure_singlet() {
    let out = parse(decompose_json(&reference_terms()).unwrap());
    let pieces = out["pieces"].as_array().unwrap();
    let singlet = pieces.iter().find(|p| p["dim"] == 1).unwrap();
    assert!((singlet["fraction"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(out["reconstruction"].as_f64().unwrap() < 1e-12);
    let spectrum: Vec<(f64, u64)> =
        out["spectrum"].as_array().unwrap().iter().map(|e| (e[0].as_f64().unwrap(), e[1].as_u64().unwrap())).collect();
    assert_eq!(spectrum, vec![(-12.0, 1), (-6.0, 7), (0.0, 35), (2.0, 27)]);
}

#[test]
fn random_form_splits_cleanly() {
    let out = parse(decompose_json(&random_terms(7)).unwrap());
    let total: f64 = out["pieces"].as_array().unwrap().iter().map(|p| p["fraction"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
    assert!(out["pieces"].as_array().unwrap().iter().all(|p| p["residual"].as_f64().unwrap() < 1e-10));
}

#[test]
fn kappa_scan_counts_negative_modes() {
    let pts = parse(kappa_scan_json(-5.0, 3.0, 9).unwrap());
    for p in pts.as_array().unwrap() {
        let k = p["kappa"].as_f64().unwrap();
        let neg = p["negative"].as_u64().unwrap();
        let expect = if k > 1.0 { 0 } else if k > -2.0 { 1 } else if k < -2.0 { 8 } else { continue };
        assert_eq!(neg, expect, "κ = {k}");
    }
    assert!(kappa_scan_json(1.0, 0.0, 5).is_err());
}

#[test]
fn short_flow_lowers_the_action() {
    let out = parse(flow_json(1, 0.05, 0.0, 16, 10).unwrap());
    let s: Vec<f64> = out["action"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(s.len(), 11);
    assert!(s.windows(2).all(|w| w[1] <= w[0]));
    assert!(flow_json(1, 0.05, 0.0, 4, 10).is_err());
}

#[test]
fn action_kernel_signature_follows_the_sign_of_d() {
    let pts = parse(kappa_scan_json(2.0, 3.0, 2).unwrap());
    for p in pts.as_array().unwrap() {
        // D < 0 here: the family kernel is positive on the complement, the action kernel negative
        assert!(p["scale"].as_f64().unwrap() < 0.0);
        assert_eq!(p["negative"], 0);
        assert_eq!(p["action_negative"], 35);
    }
}
