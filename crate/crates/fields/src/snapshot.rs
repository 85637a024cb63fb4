//! Lattice snapshots: a little-endian binary file plus a JSON sidecar.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! magic     8 bytes   "SPIN7SNP"
//! version   u32       1
//! active    u32
//! points    u32
//! fd_order  u32
//! generation u64
//! time      f64
//! then per site, in site order:
//!   frame   64 × f64  E[a][p], row-major
//!   phi     70 × f64  Φ components on increasing quadruples
//! ```
//!
//! The sidecar `<file>.json` repeats the header fields and the layout.

use crate::geometry::phi0;
use crate::lattice::LatticeSpec;
use crate::FieldError;
use serde::{Deserialize, Serialize};
use spin7_core::{AltForm, Mat8};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"SPIN7SNP";
const VERSION: u32 = 1;
const PER_SITE: usize = 64 + 70;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub spec: LatticeSpec,
    pub generation: u64,
    pub time: f64,
    pub frames: Vec<Mat8>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    format: String,
    version: u32,
    spec: LatticeSpec,
    generation: u64,
    time: f64,
    sites: usize,
    endianness: String,
    blocks: Vec<Block>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
struct Block {
    name: String,
    values: usize,
    layout: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl Snapshot {
    pub fn new(spec: LatticeSpec, generation: u64, time: f64, frames: Vec<Mat8>) -> Result<Self, FieldError> {
        if frames.len() != spec.num_sites() {
            return Err(FieldError::Spec(format!("{} frames for {} sites", frames.len(), spec.num_sites())));
        }
        Ok(Snapshot { spec, generation, time, frames })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + self.frames.len() * PER_SITE * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for v in [self.spec.active_dims(), self.spec.points(), self.spec.fd_order()] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.generation.to_le_bytes());
        out.extend_from_slice(&self.time.to_le_bytes());
        for e in &self.frames {
            for a in 0..8 {
                for p in 0..8 {
                    out.extend_from_slice(&e[(a, p)].to_le_bytes());
                }
            }
            for v in phi0().act_unchecked(e).comp() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FieldError> {
        let bad = |m: &str| FieldError::Snapshot(m.to_string());
        if bytes.len() < 40 || &bytes[..8] != MAGIC {
            return Err(bad("missing magic header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        if u32_at(8) != VERSION {
            return Err(bad("unsupported version"));
        }
        let spec = LatticeSpec::new(u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize)?;
        let generation = u64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
        let time = f64::from_le_bytes(bytes[32..40].try_into().expect("8 bytes"));
        let body = &bytes[40..];
        let n = spec.num_sites();
        if body.len() != n * PER_SITE * 8 {
            return Err(FieldError::Snapshot(format!("expected {} body bytes, found {}", n * PER_SITE * 8, body.len())));
        }
        let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8 bytes"));
        let mut frames = Vec::with_capacity(n);
        for site in 0..n {
            let base = site * PER_SITE;
            let e = Mat8::from_fn(|a, p| f(base + 8 * a + p));
            let stored = AltForm::new(4, (0..70).map(|k| f(base + 64 + k)).collect()).expect("70 components");
            let phi = phi0().act_unchecked(&e);
            if stored.sub(&phi).max_abs() > 1e-12 * (1.0 + phi.max_abs()) {
                return Err(FieldError::Snapshot(format!("site {site}: stored Φ does not match its frame")));
            }
            frames.push(e);
        }
        Snapshot::new(spec, generation, time, frames)
    }

    fn sidecar(&self) -> Sidecar {
        Sidecar {
            format: "spin7-snapshot".into(),
            version: VERSION,
            spec: self.spec,
            generation: self.generation,
            time: self.time,
            sites: self.frames.len(),
            endianness: "little".into(),
            blocks: vec![
                Block { name: "frame".into(), values: 64, layout: "row-major E[a][p]".into() },
                Block { name: "phi".into(), values: 70, layout: "increasing quadruples, lexicographic".into() },
            ],
        }
    }

    /// Writes `path` and `path.json`.
    pub fn write(&self, path: &Path) -> Result<(), FieldError> {
        std::fs::write(path, self.to_bytes())?;
        let json = serde_json::to_string_pretty(&self.sidecar()).map_err(|e| FieldError::Snapshot(e.to_string()))?;
        std::fs::write(sidecar_path(path), json)?;
        Ok(())
    }

    /// Reads `path`; if the sidecar exists it must agree with the header.
    pub fn read(path: &Path) -> Result<Self, FieldError> {
        let snap = Snapshot::from_bytes(&std::fs::read(path)?)?;
        let side = sidecar_path(path);
        if side.exists() {
            let text = std::fs::read_to_string(side)?;
            let meta: Sidecar = serde_json::from_str(&text).map_err(|e| FieldError::Snapshot(e.to_string()))?;
            if meta != snap.sidecar() {
                return Err(FieldError::Snapshot("sidecar disagrees with the binary header".into()));
            }
        }
        Ok(snap)
    }
}
