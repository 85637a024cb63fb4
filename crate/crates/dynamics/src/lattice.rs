//! The action on a lattice.
//!
//! Two versions. [`LatticeState`] takes `T` from central differences of the
//! sampled coordinate `Φ` and `∂C` from central differences of the
//! coordinate `C`; because the stencil is skew-adjoint, `C = c(T)` then
//! makes the discrete action exactly stationary in `C`, and the orbit
//! gradient at fixed `C` is the full gradient. [`analytic_action`] uses the
//! closed-form jets instead and is what the continuum statements are
//! checked against.

use crate::action::{density, euler_lagrange, orbit_gradient, FieldEqResidual, PartNorms};
use crate::params::ActionParams;
use crate::DynError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spin7_core::{AltForm, Mat8, Metric, DIM};
use spin7_fields::geometry::{phi0, torsion_from_star};
use spin7_fields::{check_frames, exterior_derivative, map_sites, Geometry, LatticeSpec};

#[derive(Clone, Debug)]
pub struct StateSite {
    pub e: Mat8,
    pub e_inv: Mat8,
    pub sqrt_g: f64,
    /// frame components
    pub t: AltForm,
    pub c: AltForm,
    pub dc: [AltForm; DIM],
}

#[derive(Clone, Debug)]
pub struct LatticeState {
    pub spec: LatticeSpec,
    pub sites: Vec<StateSite>,
}

fn to_frame(w: &AltForm, e_inv: &Mat8) -> AltForm {
    w.act_unchecked(e_inv)
}

/// Coordinate-direction derivatives of a coordinate form, all slots to frame.
fn derivative_to_frame(d: &[AltForm; DIM], e_inv: &Mat8) -> [AltForm; DIM] {
    let per: Vec<AltForm> = d.iter().map(|w| to_frame(w, e_inv)).collect();
    std::array::from_fn(|al| {
        let mut out = AltForm::zeros(per[0].degree());
        for (a, w) in per.iter().enumerate() {
            let s = e_inv[(al, a)];
            if s != 0.0 {
                out.axpy(s, w);
            }
        }
        out
    })
}

/// Frame torsion of sampled frames, from `dΦ` only.
pub fn lattice_torsion(spec: &LatticeSpec, frames: &[Mat8], inv: &[Mat8]) -> Vec<AltForm> {
    let phi: Vec<AltForm> = frames.iter().map(|e| phi0().act_unchecked(e)).collect();
    let d_phi = exterior_derivative(spec, &phi);
    map_sites(frames.len(), |k| {
        let s = to_frame(&d_phi[k], &inv[k]).hodge_star(&Metric::euclidean(), 1.0).scale(0.2);
        torsion_from_star(&s)
    })
}

impl LatticeState {
    /// State with `C = c(T)`.
    pub fn new(spec: &LatticeSpec, frames: &[Mat8], params: &ActionParams) -> Result<Self, DynError> {
        params.validate()?;
        let inv = Self::check(spec, frames)?;
        let t = lattice_torsion(spec, frames, &inv);
        let c_coord: Vec<AltForm> = (0..frames.len()).map(|k| params.c_from_torsion(&t[k]).act_unchecked(&frames[k])).collect();
        Ok(Self::build(spec, frames, &inv, t, &c_coord))
    }

    /// State with a prescribed coordinate `C` field.
    pub fn with_c(spec: &LatticeSpec, frames: &[Mat8], c_coord: &[AltForm]) -> Result<Self, DynError> {
        let inv = Self::check(spec, frames)?;
        if c_coord.len() != frames.len() {
            return Err(DynError::Params("C field does not match the lattice".into()));
        }
        let t = lattice_torsion(spec, frames, &inv);
        Ok(Self::build(spec, frames, &inv, t, c_coord))
    }

    fn check(spec: &LatticeSpec, frames: &[Mat8]) -> Result<Vec<Mat8>, DynError> {
        if frames.len() != spec.num_sites() {
            return Err(DynError::Params(format!("{} frames for {} sites", frames.len(), spec.num_sites())));
        }
        check_frames(frames)?;
        Ok(frames.iter().map(|e| e.try_inverse().expect("checked frame")).collect())
    }

    fn build(spec: &LatticeSpec, frames: &[Mat8], inv: &[Mat8], t: Vec<AltForm>, c_coord: &[AltForm]) -> Self {
        let dc = spec.gradient(c_coord);
        let sites = map_sites(frames.len(), |k| StateSite {
            e: frames[k],
            e_inv: inv[k],
            sqrt_g: frames[k].determinant(),
            t: t[k].clone(),
            c: to_frame(&c_coord[k], &inv[k]),
            dc: derivative_to_frame(&dc[k], &inv[k]),
        });
        LatticeState { spec: *spec, sites }
    }

    pub fn frames(&self) -> Vec<Mat8> {
        self.sites.iter().map(|s| s.e).collect()
    }

    pub fn coordinate_c(&self) -> Vec<AltForm> {
        self.sites.iter().map(|s| s.c.act_unchecked(&s.e)).collect()
    }

    pub fn action(&self, params: &ActionParams) -> f64 {
        let per: Vec<f64> = map_sites(self.sites.len(), |k| {
            let s = &self.sites[k];
            density(s.sqrt_g, &s.c, &s.dc, params)
        });
        self.spec.cell_volume() * per.iter().sum::<f64>()
    }

    /// Per-site `G` with `dS = h^d Σ tr(Gᵀ Y)` under `E → E(I + Y)`.
    pub fn gradient(&self, params: &ActionParams) -> Vec<Mat8> {
        map_sites(self.sites.len(), |k| {
            let s = &self.sites[k];
            orbit_gradient(s.sqrt_g, &euler_lagrange(&s.c, &s.dc, params))
        })
    }

    /// Steepest descent for the metric `h^d Σ √g |Y|²`: `V = -G/√g`.
    pub fn velocity(&self, params: &ActionParams) -> Vec<Mat8> {
        let g = self.gradient(params);
        g.iter().zip(&self.sites).map(|(g, s)| -g / s.sqrt_g).collect()
    }

    pub fn residual_norms(&self, params: &ActionParams) -> PartNorms {
        let per: Vec<PartNorms> = map_sites(self.sites.len(), |k| {
            let s = &self.sites[k];
            FieldEqResidual::new(&s.c, &s.dc, params).norms()
        });
        per.iter().fold(PartNorms::default(), |a, b| a.max(b))
    }

    pub fn max_torsion(&self) -> f64 {
        self.sites.iter().map(|s| s.t.max_abs()).fold(0.0, f64::max)
    }

    pub fn min_det(&self) -> f64 {
        self.sites.iter().map(|s| s.sqrt_g.abs()).fold(f64::INFINITY, f64::min)
    }
}

/// A smooth periodic 3-form field in frame components with closed-form
/// derivatives; used as a direction for `C`.
#[derive(Clone, Debug)]
pub struct CDirection {
    modes: Vec<([i32; 3], AltForm, AltForm)>,
}

impl CDirection {
    pub fn random(seed: u64, active_dims: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::new();
        for _ in 0..3 {
            let mut k = [0i32; 3];
            for kd in k.iter_mut().take(active_dims) {
                *kd = rng.random_range(-2..=2);
            }
            let a = spin7_core::random::random_form(3, &mut rng);
            let b = spin7_core::random::random_form(3, &mut rng);
            modes.push((k, a, b));
        }
        let mut dir = CDirection { modes };
        // unit max-abs over a coarse sample
        let spec = LatticeSpec::new(active_dims, 16, 2).expect("valid");
        let m = (0..spec.num_sites()).map(|s| dir.at(&spec.coordinates(s)).0.max_abs()).fold(0.0, f64::max);
        for (_, a, b) in dir.modes.iter_mut() {
            *a = a.scale(1.0 / m);
            *b = b.scale(1.0 / m);
        }
        dir
    }

    /// Value and coordinate derivatives at `x`.
    pub fn at(&self, x: &[f64; DIM]) -> (AltForm, [AltForm; DIM]) {
        let mut v = AltForm::zeros(3);
        let mut d: [AltForm; DIM] = std::array::from_fn(|_| AltForm::zeros(3));
        for (k, a, b) in &self.modes {
            let phase: f64 = (0..3).map(|i| k[i] as f64 * x[i]).sum();
            let (s, c) = phase.sin_cos();
            v.axpy(c, a);
            v.axpy(s, b);
            for i in 0..3 {
                if k[i] != 0 {
                    let kf = k[i] as f64;
                    d[i].axpy(-kf * s, a);
                    d[i].axpy(kf * c, b);
                }
            }
        }
        (v, d)
    }
}

/// Trapezoid action from analytic jets with `C = c(T) + eps·δC`.
pub fn analytic_action(geo: &Geometry, params: &ActionParams, shift: Option<(&CDirection, f64)>) -> f64 {
    let per: Vec<f64> = map_sites(geo.sites.len(), |k| {
        let site = &geo.sites[k];
        let mut c = params.c_from_torsion(&site.t);
        let mut dcoord: [AltForm; DIM] = std::array::from_fn(|a| params.c_from_torsion(&site.dt[a]));
        if let Some((dir, eps)) = shift {
            let (v, dv) = dir.at(&site.x);
            c.axpy(eps, &v);
            for a in 0..DIM {
                dcoord[a].axpy(eps, &dv[a]);
            }
        }
        density(site.sqrt_g, &c, &site.frame_derivative(&c, &dcoord), params)
    });
    geo.spec.cell_volume() * per.iter().sum::<f64>()
}

/// Central-difference Gateaux derivative of [`analytic_action`] in `C`.
pub fn gateaux_c(geo: &Geometry, params: &ActionParams, dir: &CDirection, eps: f64) -> f64 {
    (analytic_action(geo, params, Some((dir, eps))) - analytic_action(geo, params, Some((dir, -eps)))) / (2.0 * eps)
}
