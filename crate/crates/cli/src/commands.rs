//! The subcommands. Each returns a [`RunReport`]; writing it is the caller's job.

use crate::report::{Row, RunReport};
use crate::scenario::Scenario;
use crate::suite::{self, flow_rows, identity_anchor};
use crate::CliError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spin7_core::spin7::IdentityRow;
use spin7_core::CayleyStructure;
use spin7_dynamics::equations::{generic_rows, kappa_m2_rows, kappa_zero_rows, SiteFields};
use spin7_dynamics::{Flow, FlowRecord, LatticeState, PartNorms};
use spin7_fields::verify::{convergence, lattice_report, ricci_quantity, torsion_quantity};
use spin7_fields::{FrameFamily, Geometry, Snapshot};
use spin7_linear::kernel::{generic_momentum, kernel_gr, kernel_raw, Coeffs, Momentum};
use spin7_linear::torsion::{signature, spectrum};
use spin7_linear::{check_ellipticity, linearized_action_kernel};
use std::io::Write;
use std::path::Path;

fn scenario_json(sc: &Scenario) -> Option<serde_json::Value> {
    serde_json::to_value(sc).ok()
}

/// Merge identity rows by name, keeping the worst relative residual.
fn merged(rows: impl IntoIterator<Item = IdentityRow>) -> Vec<(String, f64, f64)> {
    let mut out: Vec<(String, f64, f64)> = Vec::new();
    for r in rows {
        let rel = r.residual / (1.0 + r.scale);
        match out.iter_mut().find(|(n, _, _)| n == r.name) {
            Some(x) => {
                x.1 = x.1.max(rel);
                x.2 = x.2.max(r.residual);
            }
            None => out.push((r.name.to_string(), rel, r.residual)),
        }
    }
    out
}

pub fn verify(sc: &Scenario) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("verify", scenario_json(sc));
    let tol = sc.tolerances;
    let family = sc.family();

    rep.timed("algebra", |rep| -> Result<(), CliError> {
        let e = family.frame(&[0.0; 8]);
        let mut cs = CayleyStructure::from_frame(&e).map_err(|e| CliError::Numerical(e.to_string()))?;
        if let Some(c) = sc.corrupt_phi {
            cs = cs.with_corrupted_component(c.component, c.delta);
        }
        for r in cs.identity_report().rows {
            rep.push(Row::check(format!("algebra/{}", r.name), identity_anchor(r.name), r.residual, tol.algebra));
        }
        Ok(())
    })?;

    rep.timed("algebra-spectra", |rep| -> Result<(), CliError> {
        let c = suite::spectra()?;
        rep.extend(c.rows.into_iter().map(|mut r| {
            r.check = format!("spectra/{}", r.check);
            r
        }));
        Ok(())
    })?;

    rep.timed("lattice", |rep| -> Result<(), CliError> {
        let geo = Geometry::analytic(&family, &sc.lattice)?;
        rep.push(Row::measurement("lattice/max-torsion", "max |T| over sites", geo.max_torsion()));
        for r in lattice_report(&geo, true).rows {
            let rel = r.residual / (1.0 + r.scale);
            rep.push(Row::check(format!("lattice/{}", r.name), "exact derivatives, relative", rel, tol.lattice));
        }
        Ok(())
    })?;

    if !matches!(family, FrameFamily::Constant(_)) && sc.refinements > 0 {
        rep.timed("convergence", |rep| -> Result<(), CliError> {
            let order = sc.lattice.fd_order() as f64;
            for (label, q) in [("torsion", torsion_quantity as fn(&_) -> _), ("ricci", ricci_quantity)] {
                let conv = convergence(&family, &sc.lattice, sc.refinements, q)?;
                for r in &conv {
                    rep.push(Row::measurement(format!("convergence/{label}-error-{}", r.points), "FD against exact derivatives", r.error));
                }
                if conv[0].error < 1e-13 {
                    continue;
                }
                for r in conv.iter().skip(1) {
                    let p = r.order.unwrap_or(f64::NAN);
                    rep.push(Row::check(
                        format!("convergence/{label}-order-{}", r.points),
                        format!("measured order {p:.3} against fd_order {order}"),
                        (p - order).abs(),
                        tol.order,
                    ));
                }
            }
            Ok(())
        })?;
    }
    Ok(rep)
}

pub fn residual(sc: &Scenario, seed: u64) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("residual", scenario_json(sc));
    let params = sc.params;
    let kappa = params.kappa;
    let geo = rep.timed("geometry", |_| Geometry::analytic(&sc.family(), &sc.lattice))?;
    rep.timed("equations", |rep| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all = Vec::new();
        let mut norms = PartNorms::default();
        for site in &geo.sites {
            all.extend(generic_rows(site, &params));
            if kappa == 0.0 {
                all.extend(kappa_zero_rows(site, params.lambda));
            }
            if kappa == -2.0 {
                let v = spin7_core::random::random_vector(&mut rng);
                all.extend(kappa_m2_rows(site, params.lambda, &v));
            }
            let n = SiteFields::new(site, &params).residual(&params).norms();
            norms = norms.max(&n);
        }
        for (name, rel, abs) in merged(all) {
            if name.starts_with("finding-") {
                rep.push(Row::finding(format!("equations/{name}"), "hand-derived formula against the variation, absolute", abs));
            } else {
                rep.push(Row::check(format!("equations/{name}"), "rewriting of the field equations, relative", rel, sc.tolerances.equations));
            }
        }
        for (part, v) in [("l1", norms.l1), ("l7", norms.l7), ("l35", norms.l35), ("l27", norms.l27)] {
            rep.push(Row::measurement(format!("residual/{part}"), "max over sites of the field-equation residual in this part", v));
        }
    });
    rep.timed("lattice-route", |rep| -> Result<(), CliError> {
        let state = LatticeState::new(&sc.lattice, &sc.frames()?, &params)?;
        let n = state.residual_norms(&params);
        rep.push(Row::measurement("lattice/action", "lattice action with C = c(T)", state.action(&params)));
        rep.push(Row::measurement("lattice/residual-constrained", "largest constrained part of the FD field-equation residual", n.constrained()));
        Ok(())
    })?;
    Ok(rep)
}

/// Runs the flow, streaming CSV lines to `csv`.
pub fn flow(sc: &Scenario, out: &Path, csv: &mut dyn Write) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("flow", scenario_json(sc));
    let config = sc.flow.config(sc.params);
    let mut f = Flow::new(sc.lattice, sc.frames()?, config)?;
    writeln!(csv, "{}", FlowRecord::CSV_HEADER)?;
    let mut io_err = None;
    let mut bad = None;
    let records = rep.timed("flow", |_| {
        f.run(|r| {
            if !r.action.is_finite() && bad.is_none() {
                bad = Some(r.step);
            }
            if let Err(e) = writeln!(csv, "{}", r.csv_row()) {
                io_err.get_or_insert(e);
            }
        })
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    if let Some(step) = bad {
        return Err(CliError::Numerical(format!("action became non-finite at step {step}")));
    }
    rep.push(Row::measurement("dt", "time step", f.dt()));
    rep.push(Row::measurement("descent-sign", "+1 unless the trial step flipped the direction", f.sign()));
    rep.extend(flow_rows(&records));
    if sc.flow.snapshot {
        let snap = Snapshot::new(sc.lattice, f.generation() as u64, f.time(), f.frames().to_vec())?;
        snap.write(&out.join(&sc.outputs.snapshot))?;
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearView {
    Eigenvalues,
    Nullspace,
    Match,
    All,
}

#[derive(Clone, Debug)]
pub struct LinearArgs {
    pub kappa: Option<f64>,
    pub rho: Option<f64>,
    pub mu: Option<f64>,
    pub p: Option<Momentum>,
    pub view: LinearView,
}

#[derive(Serialize)]
struct LinearSummary {
    kappa: Option<f64>,
    rho: f64,
    mu: f64,
    coeffs: Coeffs,
    p: Momentum,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    restricted_eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    null_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gauge_null_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    signature: Option<spin7_linear::torsion::Signature>,
}

pub fn linear(args: &LinearArgs) -> Result<RunReport, CliError> {
    let p = args.p.unwrap_or_else(generic_momentum);
    if p.iter().all(|v| *v == 0.0) {
        return Err(CliError::Config("momentum must be nonzero".into()));
    }
    let (rho, mu) = match (args.kappa, args.rho, args.mu) {
        (Some(k), None, None) => spin7_linear::rho_mu(k),
        (None, Some(r), Some(m)) => (r, m),
        (None, None, None) => spin7_linear::rho_mu(0.0),
        _ => return Err(CliError::Config("give either --kappa or both --rho and --mu".into())),
    };
    let coeffs = Coeffs::invariant(rho, mu);
    let mut rep = RunReport::new("linear", None);
    let view = args.view;
    let want = |v: LinearView| view == v || view == LinearView::All;
    let kernel = kernel_raw(p, &coeffs);
    let ell = check_ellipticity(p, &coeffs);
    let mut summary = LinearSummary {
        kappa: args.kappa,
        rho,
        mu,
        coeffs,
        p,
        eigenvalues: None,
        restricted_eigenvalues: None,
        null_dim: None,
        gauge_null_dim: None,
        signature: None,
    };
    rep.push(Row::check("gauge-annihilated", "kernel kills the 8 gauge directions, relative", ell.gauge_residual, 1e-11));
    if want(LinearView::Eigenvalues) {
        let ev = spectrum(&kernel);
        summary.signature = Some(signature(&ell.restricted, 1e-9));
        summary.eigenvalues = Some(ev);
        summary.restricted_eigenvalues = Some(ell.restricted.clone());
    }
    if want(LinearView::Nullspace) {
        summary.null_dim = Some(ell.null_dim);
        summary.gauge_null_dim = Some(ell.gauge_null_dim);
        rep.push(Row::measurement("null-dim", "dimension of the kernel's null space", ell.null_dim as f64));
        rep.push(Row::measurement("restricted-zero-modes", "zero modes off the gauge directions", ell.restricted_zero_modes as f64));
        if let Some(cs) = ell.completed_square_residual {
            rep.push(Row::check("completed-square", "completed-square form is the same kernel, relative", cs, 1e-11));
        }
    }
    if want(LinearView::Match) {
        if let Some(k) = args.kappa {
            let la = linearized_action_kernel(k, p)?;
            let rel = la.normalized().max_diff(&kernel) / (1.0 + kernel.max_abs());
            rep.push(Row::check("kappa-rho-mu-match", "linearized action = (6/D) × family kernel, relative", rel, 1e-10));
            rep.push(Row::measurement("scale", "6/(6 - 5κ - κ²)", la.scale));
            if mu == 0.0 {
                let gr = la.normalized().max_diff(&kernel_gr(p).scale(rho));
                rep.push(Row::check("gr-proportional", "normalized kernel = ρ × GR kernel", gr, 1e-11));
            }
        }
    }
    rep.extra = serde_json::to_value(summary).ok();
    Ok(rep)
}

/// The full acceptance suite, one row block per criterion.
pub fn acceptance(only: Option<u8>) -> Result<(RunReport, Vec<suite::Criterion>), CliError> {
    let mut rep = RunReport::new("report", None);
    let ids: Vec<u8> = match only {
        Some(i) => vec![i],
        None => suite::CRITERIA.to_vec(),
    };
    let mut crits = Vec::new();
    for id in ids {
        let c = suite::criterion(id)?;
        rep.timings.push(crate::report::Timing { name: format!("criterion-{id}"), seconds: c.seconds });
        for r in &c.rows {
            let mut r = r.clone();
            r.check = format!("c{id}/{}", r.check);
            rep.push(r);
        }
        if let Some(t) = c.time_limit {
            rep.push(Row::check(format!("c{id}/runtime"), "wall time in seconds", c.seconds, t));
        }
        crits.push(c);
    }
    Ok((rep, crits))
}
