//! Frame fields `x ↦ E(x)` with closed-form first and second derivatives.

use crate::lattice::LatticeSpec;
use crate::FieldError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spin7_core::{Mat8, DIM};

/// Frames with `det E` at or below this are rejected.
pub const MIN_DET: f64 = 1e-6;

/// One Fourier term `S sin(k·x) + C cos(k·x)`, wave vector on the first three coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMode {
    pub wave: [i32; 3],
    pub sin: Mat8,
    pub cos: Mat8,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameFamily {
    Constant(Mat8),
    /// `exp(A sin x⁰)`
    SingleMode(Mat8),
    /// `E₀ + Σ modes`
    Trig { base: Mat8, modes: Vec<TrigMode> },
    /// `E(x) R` for a constant `R`; with `R ∈ Spin(7)` this is a gauge rotation.
    Rotated { inner: Box<FrameFamily>, rotation: Mat8 },
}

/// `E`, `∂_a E`, `∂_a ∂_b E` at one point.
#[derive(Clone, Debug)]
pub struct FrameJet {
    pub e: Mat8,
    pub de: [Mat8; DIM],
    pub dde: [[Mat8; DIM]; DIM],
}

impl FrameJet {
    fn constant(e: Mat8) -> Self {
        FrameJet { e, de: [Mat8::zeros(); DIM], dde: [[Mat8::zeros(); DIM]; DIM] }
    }
}

fn small_random(rng: &mut ChaCha8Rng, norm: f64) -> Mat8 {
    let m = Mat8::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    m * (norm / m.norm())
}

impl FrameFamily {
    /// `E₀ + A sin x⁰ + B cos x¹ + C sin(x⁰ + 2x¹)`
    pub fn two_mode(base: Mat8, a: Mat8, b: Mat8, c: Mat8) -> Self {
        let z = Mat8::zeros();
        FrameFamily::Trig {
            base,
            modes: vec![
                TrigMode { wave: [1, 0, 0], sin: a, cos: z },
                TrigMode { wave: [0, 1, 0], sin: z, cos: b },
                TrigMode { wave: [1, 2, 0], sin: c, cos: z },
            ],
        }
    }

    /// Conformally flat `g = e^{2ε sin x⁰} δ`.
    pub fn conformal(eps: f64) -> Self {
        FrameFamily::SingleMode(Mat8::identity() * eps)
    }

    /// Random base frame plus a few low modes on the active dimensions.
    /// `amplitude` bounds the Frobenius norm of each mode coefficient.
    pub fn random_smooth(seed: u64, active_dims: usize, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = spin7_core::random::random_frame(&mut rng, 0.3);
        Self::with_random_modes(&mut rng, base, active_dims, amplitude)
    }

    /// The identity frame plus low random modes: a perturbation of flat space.
    pub fn near_flat(seed: u64, active_dims: usize, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::with_random_modes(&mut rng, Mat8::identity(), active_dims, amplitude)
    }

    fn with_random_modes(rng: &mut ChaCha8Rng, base: Mat8, active_dims: usize, amplitude: f64) -> Self {
        let mut modes = Vec::new();
        for _ in 0..3 {
            let mut wave = [0i32; 3];
            while wave.iter().all(|&k| k == 0) {
                for k in wave.iter_mut().take(active_dims.min(3)) {
                    *k = rng.random_range(-2..=2);
                }
            }
            let (ns, nc) = (rng.random_range(0.5..1.0), rng.random_range(0.5..1.0));
            let sin = small_random(rng, amplitude * ns);
            let cos = small_random(rng, amplitude * nc);
            modes.push(TrigMode { wave, sin, cos });
        }
        FrameFamily::Trig { base, modes }
    }

    /// `exp(ε A sin x⁰)` with a random unit-norm `A`: a small single-mode bump on flat space.
    pub fn random_bump(seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FrameFamily::SingleMode(small_random(&mut rng, amplitude))
    }

    pub fn rotated(self, rotation: Mat8) -> Self {
        FrameFamily::Rotated { inner: Box::new(self), rotation }
    }

    /// Largest coordinate index the family depends on, plus one.
    pub fn dims_used(&self) -> usize {
        match self {
            FrameFamily::Constant(_) => 0,
            FrameFamily::SingleMode(_) => 1,
            FrameFamily::Trig { modes, .. } => modes
                .iter()
                .map(|m| m.wave.iter().rposition(|&k| k != 0).map_or(0, |p| p + 1))
                .max()
                .unwrap_or(0),
            FrameFamily::Rotated { inner, .. } => inner.dims_used(),
        }
    }

    /// The family must be periodic on the lattice and only vary along active directions.
    pub fn check_against(&self, spec: &LatticeSpec) -> Result<(), FieldError> {
        let used = self.dims_used();
        if used > spec.active_dims() {
            return Err(FieldError::Spec(format!(
                "frame family varies along {used} dimensions but the lattice has {} active",
                spec.active_dims()
            )));
        }
        Ok(())
    }

    pub fn jet(&self, x: &[f64; DIM]) -> FrameJet {
        match self {
            FrameFamily::Constant(e) => FrameJet::constant(*e),
            FrameFamily::SingleMode(a) => {
                let (s, c) = x[0].sin_cos();
                let e = (a * s).exp();
                let mut j = FrameJet::constant(e);
                j.de[0] = a * e * c;
                j.dde[0][0] = (a * a * (c * c) - a * s) * e;
                j
            }
            FrameFamily::Trig { base, modes } => {
                let mut j = FrameJet::constant(*base);
                for m in modes {
                    let k: [f64; DIM] = std::array::from_fn(|a| if a < 3 { m.wave[a] as f64 } else { 0.0 });
                    let phase: f64 = (0..3).map(|a| k[a] * x[a]).sum();
                    let (s, c) = phase.sin_cos();
                    let val = m.sin * s + m.cos * c;
                    let first = m.sin * c - m.cos * s;
                    j.e += val;
                    for a in 0..3 {
                        if k[a] == 0.0 {
                            continue;
                        }
                        j.de[a] += first * k[a];
                        for b in 0..3 {
                            j.dde[a][b] -= val * (k[a] * k[b]);
                        }
                    }
                }
                j
            }
            FrameFamily::Rotated { inner, rotation } => {
                let mut j = inner.jet(x);
                j.e *= rotation;
                for a in 0..DIM {
                    j.de[a] *= rotation;
                    for b in 0..DIM {
                        j.dde[a][b] *= rotation;
                    }
                }
                j
            }
        }
    }

    pub fn frame(&self, x: &[f64; DIM]) -> Mat8 {
        self.jet(x).e
    }

    pub fn sample(&self, spec: &LatticeSpec) -> Result<Vec<Mat8>, FieldError> {
        self.check_against(spec)?;
        let frames: Vec<Mat8> = (0..spec.num_sites()).map(|s| self.frame(&spec.coordinates(s))).collect();
        check_frames(&frames)?;
        Ok(frames)
    }
}

/// Every frame finite with `det E > MIN_DET`.
pub fn check_frames(frames: &[Mat8]) -> Result<(), FieldError> {
    for (site, e) in frames.iter().enumerate() {
        let det = e.determinant();
        if !det.is_finite() || e.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { site });
        }
        if det <= MIN_DET {
            return Err(FieldError::Degenerate { site, det });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: &FrameFamily, x: [f64; DIM]) -> f64 {
        let h = 1e-5;
        let j = f.jet(&x);
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (jp, jm) = (f.jet(&xp), f.jet(&xm));
            worst = worst.max(((jp.e - jm.e) / (2.0 * h) - j.de[a]).amax());
            for b in 0..3 {
                worst = worst.max(((jp.de[b] - jm.de[b]) / (2.0 * h) - j.dde[a][b]).amax());
            }
        }
        worst
    }

    #[test]
    fn jets_match_difference_quotients() {
        let x = [0.4, -1.1, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let fams = [
            FrameFamily::random_bump(3, 0.4),
            FrameFamily::random_smooth(4, 3, 0.1),
            FrameFamily::random_smooth(5, 2, 0.1).rotated(spin7_core::random::random_frame(&mut ChaCha8Rng::seed_from_u64(1), 0.3)),
        ];
        for f in &fams {
            assert!(fd_check(f, x) < 1e-8, "{f:?}");
        }
    }

    #[test]
    fn degenerate_frames_are_rejected() {
        let spec = LatticeSpec::new(1, 8, 2).unwrap();
        let f = FrameFamily::Constant(Mat8::identity() * 0.1);
        assert!(matches!(f.sample(&spec), Err(FieldError::Degenerate { .. })));
        let z = Mat8::zeros();
        let f = FrameFamily::two_mode(Mat8::identity(), z, z, z);
        assert!(matches!(f.sample(&spec), Err(FieldError::Spec(_))));
    }
}
