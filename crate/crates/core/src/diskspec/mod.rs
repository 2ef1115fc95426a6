//! Branched disks, singularity configurations and their classification.
//!
//! Disks are given in the normal chart where the lowest-order part of the map is
//! `(z^N, 0)`: `w1` starts with a positive multiple of `z^N` and `w2` has no terms
//! of total degree `<= N`. A disk may carry a rigid rotation of R^4 (its `frame`)
//! applied to its image; this is how two disks with different tangent planes at the
//! singular point are entered.

mod parser;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::geom::{Mat4, Vec4};
use crate::zpoly::ZPolynomial;

pub use parser::parse_config_named;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("{line}:{col}: duplicate disk label `{label}`")]
    DuplicateLabel { label: String, line: usize, col: usize },
    #[error("configuration contains no disks")]
    EmptyConfig,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiskError {
    #[error("disk `{label}` is not in normal form: {reason}")]
    NotNormalForm { label: String, reason: String },
    #[error("disk `{label}` does not pass through the origin")]
    NotThroughOrigin { label: String },
    #[error("disks `{0}` and `{1}` are identical")]
    DuplicateDisk(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("disk `{label}` is not of Micallef-White type: {reason}")]
pub struct NotMw {
    pub label: String,
    pub reason: String,
}

/// Rotation by `degrees` in the coordinate plane `(i, j)`, axes numbered 1..4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneRotation {
    pub i: usize,
    pub j: usize,
    pub degrees: f64,
}

impl PlaneRotation {
    pub fn matrix(&self) -> Mat4 {
        Mat4::givens(self.i - 1, self.j - 1, self.degrees.to_radians())
    }
}

/// Product of plane rotations applied to a disk's image, leftmost factor last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub rotations: Vec<PlaneRotation>,
}

impl Frame {
    pub fn identity() -> Self {
        Frame::default()
    }

    pub fn new(rotations: Vec<PlaneRotation>) -> Self {
        Frame { rotations }
    }

    pub fn is_identity(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn matrix(&self) -> Mat4 {
        self.rotations.iter().fold(Mat4::identity(), |acc, r| acc.mul(&r.matrix()))
    }
}

/// One disk `f = (w1, w2): D -> C^2 = R^4`, optionally rotated by `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchedDisk {
    pub label: String,
    pub w1: ZPolynomial,
    pub w2: ZPolynomial,
    pub frame: Frame,
}

impl BranchedDisk {
    pub fn new(label: &str, w1: ZPolynomial, w2: ZPolynomial) -> Self {
        BranchedDisk { label: label.to_string(), w1, w2, frame: Frame::identity() }
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    /// Reflection `x4 -> -x4` of the image.
    pub fn mirrored(&self) -> Self {
        let refl = Mat4([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0]]);
        // R' = S R S: conjugating each factor keeps the frame a product of plane rotations.
        let rotations: Vec<PlaneRotation> = self
            .frame
            .rotations
            .iter()
            .map(|r| {
                let flip = (r.i == 4) != (r.j == 4);
                PlaneRotation { degrees: if flip { -r.degrees } else { r.degrees }, ..*r }
            })
            .collect();
        debug_assert!({
            let m = Frame::new(rotations.clone()).matrix();
            let expect = refl.mul(&self.frame.matrix()).mul(&refl);
            m.0.iter().flatten().zip(expect.0.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-12)
        });
        BranchedDisk {
            label: self.label.clone(),
            w1: self.w1.clone(),
            w2: self.w2.conj_poly(),
            frame: Frame::new(rotations),
        }
    }

    /// Unrotated image point in R^4.
    pub fn chart_point(&self, z: Complex64) -> Vec4 {
        crate::geom::from_pair(self.w1.evaluate(z), self.w2.evaluate(z))
    }
}

/// Finite set of disks through the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityConfig {
    pub name: String,
    pub disks: Vec<BranchedDisk>,
}

impl SingularityConfig {
    pub fn mirrored(&self) -> Self {
        SingularityConfig { name: self.name.clone(), disks: self.disks.iter().map(|d| d.mirrored()).collect() }
    }
}

impl fmt::Display for SingularityConfig {
    /// `.sing` source; parsing the output reproduces the configuration.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.disks {
            writeln!(f, "disk {} {{", d.label)?;
            writeln!(f, "  w1 = {};", d.w1)?;
            writeln!(f, "  w2 = {};", d.w2)?;
            if !d.frame.is_identity() {
                let rots: Vec<String> =
                    d.frame.rotations.iter().map(|r| format!("rot({},{},{})", r.i, r.j, r.degrees)).collect();
                writeln!(f, "  frame = {};", rots.join(" * "))?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

/// Parses `.sing` text; the configuration name is left empty.
pub fn parse_config(src: &str) -> Result<SingularityConfig, ParseError> {
    parse_config_named(src, "")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskClassification {
    /// Exponent of the leading `z^N` term.
    pub n: u32,
    /// `N - 1`.
    pub branching_order: u32,
}

pub fn validate_disk(d: &BranchedDisk) -> Result<DiskClassification, DiskError> {
    let bad = |reason: String| DiskError::NotNormalForm { label: d.label.clone(), reason };
    if d.w1.coeff(0, 0) != Complex64::new(0.0, 0.0) || d.w2.coeff(0, 0) != Complex64::new(0.0, 0.0) {
        return Err(DiskError::NotThroughOrigin { label: d.label.clone() });
    }
    let (n, lead) = d.w1.lowest_order().map_err(|_| bad("w1 is identically zero".to_string()))?;
    let c = lead.coeff(n, 0);
    if lead.len() != 1 || c.im != 0.0 || c.re <= 0.0 {
        return Err(bad(format!("lowest-order part of w1 is `{lead}`, not a positive multiple of z^{n}")));
    }
    if let Ok((m, low)) = d.w2.lowest_order() {
        if m <= n {
            return Err(bad(format!("w2 has terms of total degree {m} <= N = {n}: `{low}`")));
        }
    }
    Ok(DiskClassification { n, branching_order: n - 1 })
}

/// Validates every disk and the pairwise-distinctness requirement. Returns the
/// per-disk classifications and warnings (disks sharing their tangent plane).
pub fn validate_config(cfg: &SingularityConfig) -> Result<(Vec<DiskClassification>, Vec<String>), DiskError> {
    let classes = cfg.disks.iter().map(validate_disk).collect::<Result<Vec<_>, _>>()?;
    let mut warnings = Vec::new();
    for (a, da) in cfg.disks.iter().enumerate() {
        for db in &cfg.disks[a + 1..] {
            let (ma, mb) = (da.frame.matrix(), db.frame.matrix());
            if da.w1 == db.w1 && da.w2 == db.w2 && ma == mb {
                return Err(DiskError::DuplicateDisk(da.label.clone(), db.label.clone()));
            }
            // Tangent plane at 0 is the image of span(e1, e2).
            let same_plane = (0..2).all(|k| {
                let v = ma.column(k);
                let p0 = mb.column(0);
                let p1 = mb.column(1);
                let proj = crate::geom::dot4(&v, &p0).powi(2) + crate::geom::dot4(&v, &p1).powi(2);
                (proj - 1.0).abs() < 1e-12
            });
            if same_plane {
                warnings.push(format!(
                    "disks `{}` and `{}` share their tangent plane at the origin; isolatedness is assumed",
                    da.label, db.label
                ));
            }
        }
    }
    Ok((classes, warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Holo,
    Antiholo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwStage {
    pub mu: u32,
    pub coeff: Complex64,
    pub kind: StageKind,
}

/// `(z^N, sum_j a_j z^mu_j + b_j zbar^mu_j)` with `a_j b_j = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MwForm {
    pub n: u32,
    pub stages: Vec<MwStage>,
}

impl MwForm {
    /// The disk `(z^N, P)` described by this form.
    pub fn to_disk(&self, label: &str) -> BranchedDisk {
        let mut w2 = ZPolynomial::zero();
        for s in &self.stages {
            match s.kind {
                StageKind::Holo => w2.add_term(s.mu, 0, s.coeff),
                StageKind::Antiholo => w2.add_term(0, s.mu, s.coeff),
            }
        }
        BranchedDisk::new(label, ZPolynomial::z_pow(self.n), w2)
    }
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn mw_classify(d: &BranchedDisk) -> Result<MwForm, NotMw> {
    let bad = |reason: &str| NotMw { label: d.label.clone(), reason: reason.to_string() };
    if !d.frame.is_identity() {
        return Err(bad("disk carries a frame rotation"));
    }
    let w1_terms = d.w1.terms();
    let n = match w1_terms.as_slice() {
        [((n, 0), c)] if *n >= 1 && *c == Complex64::new(1.0, 0.0) => *n,
        _ => return Err(bad("w1 is not exactly z^N")),
    };
    let mut stages: Vec<MwStage> = Vec::new();
    for ((j, k), c) in d.w2.terms() {
        let stage = match (j, k) {
            (mu, 0) => MwStage { mu, coeff: c, kind: StageKind::Holo },
            (0, mu) => MwStage { mu, coeff: c, kind: StageKind::Antiholo },
            _ => return Err(bad("w2 has a mixed z^j zbar^k term")),
        };
        if stage.mu <= n {
            return Err(bad("stage exponent not greater than N"));
        }
        if stages.iter().any(|s| s.mu == stage.mu) {
            return Err(bad("both z^mu and zbar^mu present at one frequency (a_j b_j != 0)"));
        }
        stages.push(stage);
    }
    stages.sort_by_key(|s| s.mu);
    let g = stages.iter().fold(n, |g, s| gcd(g, s.mu));
    if g != 1 {
        return Err(bad("gcd(N, mu_0, ..., mu_s) != 1"));
    }
    Ok(MwForm { n, stages })
}
