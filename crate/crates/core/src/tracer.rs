//! Tracing the link `f(D) ∩ S_eps` of a single disk.
//!
//! For each angle `t` the radius `r(t)` with `|f(r e^{it})| = eps` is found by a
//! one-dimensional Newton solve, warm-started from the previous angle. Tangents
//! come from the Wirtinger derivatives and implicit differentiation of
//! `|f(r e^{it})|^2 = eps^2`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::diskspec::BranchedDisk;
use crate::geom::{add4, dot4, from_pair, j0, norm4, scale4, sub4, Mat4, Vec4};
use crate::zpoly::{Wirtinger, ZPolynomial};

/// Relative residual `| |f|^2 - eps^2 | / eps^2` accepted by the radial Newton solve.
pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 50;
/// Accepted `| |point| - eps | / eps`.
pub const SPHERE_TOL: f64 = 1e-10;
pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("no radius in (0, {search_max}] on which |f| is radially increasing and f is immersed")]
    NoRegularRadius { search_max: f64 },
    #[error("radial Newton solve failed at t = {t}")]
    NewtonDivergence { t: f64 },
    #[error("traced curve does not close: r(0) = {r0}, r(2pi) = {r_end}")]
    LoopNotClosed { r0: f64, r_end: f64 },
    #[error("sample off the sphere by relative {residual:e}")]
    SphereToleranceExceeded { residual: f64 },
    #[error("sphere-crossing radius {radius} exceeds the certified regular radius {regular}")]
    EpsilonTooLarge { radius: f64, regular: f64 },
    #[error("at least 256 samples are required, got {0}")]
    TooFewSamples(usize),
}

/// Disk map with cached derivatives; evaluates the rotated image in R^4.
#[derive(Debug, Clone)]
pub struct DiskMap {
    w1: ZPolynomial,
    w2: ZPolynomial,
    d1: (ZPolynomial, ZPolynomial),
    d2: (ZPolynomial, ZPolynomial),
    frame: Mat4,
    rotated: bool,
    /// `N` and the leading coefficient of `w1`, used for radius seeds.
    lead: Option<(u32, f64)>,
}

impl DiskMap {
    pub fn new(d: &BranchedDisk) -> Self {
        Self::from_parts(&d.w1, &d.w2, d.frame.matrix())
    }

    pub fn from_parts(w1: &ZPolynomial, w2: &ZPolynomial, frame: Mat4) -> Self {
        let lead = w1.lowest_order().ok().map(|(n, p)| (n, p.coeff(n, 0).norm())).filter(|&(_, c)| c > 0.0);
        DiskMap {
            w1: w1.clone(),
            w2: w2.clone(),
            d1: (w1.wirtinger(Wirtinger::Dz), w1.wirtinger(Wirtinger::Dzbar)),
            d2: (w2.wirtinger(Wirtinger::Dz), w2.wirtinger(Wirtinger::Dzbar)),
            rotated: !frame.is_identity(),
            frame,
            lead,
        }
    }

    fn rot(&self, v: Vec4) -> Vec4 {
        if self.rotated {
            self.frame.apply(&v)
        } else {
            v
        }
    }

    pub fn frame(&self) -> &Mat4 {
        &self.frame
    }

    pub fn point(&self, z: Complex64) -> Vec4 {
        self.rot(from_pair(self.w1.evaluate(z), self.w2.evaluate(z)))
    }

    /// `(f, df/dx, df/dy)` at `z = x + iy`.
    pub fn partials(&self, z: Complex64) -> (Vec4, Vec4, Vec4) {
        let (a, ax, ay) = self.w1.eval_with_partials(z, &self.d1.0, &self.d1.1);
        let (b, bx, by) = self.w2.eval_with_partials(z, &self.d2.0, &self.d2.1);
        (self.rot(from_pair(a, b)), self.rot(from_pair(ax, bx)), self.rot(from_pair(ay, by)))
    }

    /// Seed radius for the sphere of radius `eps`, from the leading term `c z^N`.
    pub fn seed_radius(&self, eps: f64) -> f64 {
        match self.lead {
            Some((n, c)) => (eps / c).powf(1.0 / n as f64),
            None => eps,
        }
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.lead.map(|(n, _)| n)
    }
}

/// One point of a traced loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub t: f64,
    pub r: f64,
    pub point: Vec4,
    /// Derivative of `t -> f(r(t) e^{it})`.
    pub tangent: Vec4,
}

/// Closed curve on the sphere of radius `epsilon`, sampled on a uniform `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLoop {
    pub epsilon: f64,
    pub samples: Vec<LoopSample>,
    pub disk_label: String,
    /// `+1` when traversal follows the boundary orientation induced from the disk.
    pub orientation: i8,
}

impl SampledLoop {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Parameter step between consecutive samples.
    pub fn step(&self) -> f64 {
        TAU / self.samples.len() as f64
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec4> {
        self.samples.iter().map(|s| &s.point)
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let n = self.samples.len();
        let samples = (0..n)
            .map(|k| {
                let s = self.samples[(n - k) % n];
                LoopSample { t: TAU * k as f64 / n as f64, r: s.r, point: s.point, tangent: scale4(&s.tangent, -1.0) }
            })
            .collect();
        SampledLoop { samples, orientation: -self.orientation, ..self.clone() }
    }

    /// Doubles the sampling density by cubic Hermite interpolation, projecting the
    /// new points back onto the sphere.
    pub fn refined(&self) -> Self {
        let n = self.samples.len();
        let h = self.step();
        let mut samples = Vec::with_capacity(2 * n);
        for k in 0..n {
            let a = self.samples[k];
            let b = self.samples[(k + 1) % n];
            let mid = add4(&scale4(&add4(&a.point, &b.point), 0.5), &scale4(&sub4(&a.tangent, &b.tangent), h / 8.0));
            let mid = scale4(&mid, self.epsilon / norm4(&mid));
            let dmid = sub4(&scale4(&sub4(&b.point, &a.point), 1.5 / h), &scale4(&add4(&a.tangent, &b.tangent), 0.25));
            samples.push(LoopSample { t: TAU * (2 * k) as f64 / (2 * n) as f64, ..a });
            samples.push(LoopSample {
                t: TAU * (2 * k + 1) as f64 / (2 * n) as f64,
                r: 0.5 * (a.r + b.r),
                point: mid,
                tangent: dmid,
            });
        }
        SampledLoop { samples, ..self.clone() }
    }
}

/// Radial derivative of `|f|^2` at `z = r e^{it}` and the sample itself.
fn radial_solve_terms(map: &DiskMap, r: f64, t: f64) -> (f64, f64, Vec4, Vec4, Vec4) {
    let (s, c) = t.sin_cos();
    let z = Complex64::new(r * c, r * s);
    let (f, fx, fy) = map.partials(z);
    let fr = add4(&scale4(&fx, c), &scale4(&fy, s));
    let ft = add4(&scale4(&fx, -r * s), &scale4(&fy, r * c));
    (dot4(&f, &f), 2.0 * dot4(&f, &fr), f, fr, ft)
}

/// Certifies radial regularity on a test grid and returns the largest radius
/// below the first failure.
pub fn radial_regularity_radius(d: &BranchedDisk, search_max: f64) -> Result<f64, TraceError> {
    let map = DiskMap::new(d);
    regularity_radius_of(&map, search_max)
}

pub fn regularity_radius_of(map: &DiskMap, search_max: f64) -> Result<f64, TraceError> {
    const RADII_LINEAR: usize = 200;
    const RADII_LOG: usize = 40;
    const ANGLES: usize = 256;
    let mut radii: Vec<f64> = (0..RADII_LOG)
        .map(|k| search_max * 10f64.powf(-6.0 + 4.0 * k as f64 / RADII_LOG as f64))
        .chain((1..=RADII_LINEAR).map(|k| search_max * k as f64 / RADII_LINEAR as f64))
        .collect();
    radii.sort_by(f64::total_cmp);
    let ok_at = |r: f64| -> bool {
        (0..ANGLES).all(|a| {
            let t = TAU * a as f64 / ANGLES as f64;
            let (_, dnorm, _, fr, ft) = radial_solve_terms(map, r, t);
            // Rank 2 of the Jacobian: Gram determinant relative to its trace squared.
            let g11 = dot4(&fr, &fr);
            let g22 = dot4(&ft, &ft) / (r * r);
            let g12 = dot4(&fr, &ft) / r;
            let gram = g11 * g22 - g12 * g12;
            dnorm > 0.0 && gram > 1e-12 * (g11 + g22).powi(2)
        })
    };
    let mut last_good = None;
    for &r in &radii {
        if ok_at(r) {
            last_good = Some(r);
        } else {
            break;
        }
    }
    last_good.ok_or(TraceError::NoRegularRadius { search_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Sequential in `t`, each solve warm-started from the previous angle.
    Continuation,
    /// Independent solves per angle from the leading-order seed; parallel.
    MultiSeed,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    pub n_samples: usize,
    /// Relative tolerance on loop closure `|r(2pi) - r(0)| / r(0)`.
    pub tol: f64,
    pub mode: TraceMode,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { n_samples: DEFAULT_SAMPLES, tol: 1e-10, mode: TraceMode::Continuation }
    }
}

/// Solves `|f(r e^{it})| = eps` for `r` near `guess`.
fn solve_radius(map: &DiskMap, eps: f64, t: f64, guess: f64) -> Result<f64, TraceError> {
    let target = eps * eps;
    let g = |r: f64| {
        let (n2, dn2, ..) = radial_solve_terms(map, r, t);
        (n2 - target, dn2)
    };
    let mut r = guess;
    for _ in 0..NEWTON_MAX_ITER {
        let (val, der) = g(r);
        if val.abs() <= NEWTON_TOL * target {
            return Ok(r);
        }
        if !(der > 0.0) {
            break;
        }
        let next = r - val / der;
        if !(next > 0.0) || !next.is_finite() {
            break;
        }
        r = next;
    }
    // Bisection fallback on [guess/2, 2 guess].
    let (mut lo, mut hi) = (guess / 2.0, guess * 2.0);
    if !(g(lo).0 < 0.0 && g(hi).0 > 0.0) {
        return Err(TraceError::NewtonDivergence { t });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (val, _) = g(mid);
        if val.abs() <= NEWTON_TOL * target {
            return Ok(mid);
        }
        if val < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if g(mid).0.abs() <= NEWTON_TOL * target * 16.0 {
        Ok(mid)
    } else {
        Err(TraceError::NewtonDivergence { t })
    }
}

/// Multi-seed solve: Newton from the leading-order seed, widening the bisection
/// bracket geometrically if needed.
fn solve_radius_cold(map: &DiskMap, eps: f64, t: f64) -> Result<f64, TraceError> {
    let seed = map.seed_radius(eps);
    if let Ok(r) = solve_radius(map, eps, t, seed) {
        return Ok(r);
    }
    let mut guess = seed;
    for _ in 0..20 {
        guess *= 1.5;
        if let Ok(r) = solve_radius(map, eps, t, guess) {
            return Ok(r);
        }
    }
    Err(TraceError::NewtonDivergence { t })
}

fn sample_at(map: &DiskMap, r: f64, t: f64) -> LoopSample {
    let (_, _, f, fr, ft) = radial_solve_terms(map, r, t);
    let drdt = -dot4(&f, &ft) / dot4(&f, &fr);
    LoopSample { t, r, point: f, tangent: add4(&ft, &scale4(&fr, drdt)) }
}

pub fn trace_link(d: &BranchedDisk, eps: f64, opts: &TraceOptions) -> Result<SampledLoop, TraceError> {
    trace_map(&DiskMap::new(d), &d.label, eps, opts)
}

pub fn trace_map(map: &DiskMap, label: &str, eps: f64, opts: &TraceOptions) -> Result<SampledLoop, TraceError> {
    let n = opts.n_samples;
    if n < 256 {
        return Err(TraceError::TooFewSamples(n));
    }
    let ts: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let (radii, r_end) = match opts.mode {
        TraceMode::Continuation => {
            let mut radii = Vec::with_capacity(n);
            let mut r = solve_radius_cold(map, eps, 0.0)?;
            for &t in &ts {
                r = solve_radius(map, eps, t, r)?;
                radii.push(r);
            }
            let r_end = solve_radius(map, eps, TAU, r)?;
            (radii, r_end)
        }
        TraceMode::MultiSeed => {
            let radii = ts.par_iter().map(|&t| solve_radius_cold(map, eps, t)).collect::<Result<Vec<_>, _>>()?;
            let r_end = solve_radius(map, eps, TAU, radii[n - 1])?;
            (radii, r_end)
        }
    };
    let r0 = radii[0];
    if (r_end - r0).abs() > opts.tol * r0.max(f64::MIN_POSITIVE) {
        return Err(TraceError::LoopNotClosed { r0, r_end });
    }
    let samples: Vec<LoopSample> = ts.iter().zip(&radii).map(|(&t, &r)| sample_at(map, r, t)).collect();
    let residual = samples.iter().map(|s| (norm4(&s.point) - eps).abs() / eps).fold(0.0, f64::max);
    if residual > SPHERE_TOL {
        return Err(TraceError::SphereToleranceExceeded { residual });
    }
    if samples.iter().any(|s| !(s.r > 0.0) || norm4(&s.tangent) == 0.0) {
        return Err(TraceError::NewtonDivergence { t: f64::NAN });
    }
    Ok(SampledLoop { epsilon: eps, samples, disk_label: label.to_string(), orientation: 1 })
}

/// Largest relative sphere residual over the samples.
pub fn sphere_residual(lp: &SampledLoop) -> f64 {
    lp.samples.iter().map(|s| (norm4(&s.point) - lp.epsilon).abs() / lp.epsilon).fold(0.0, f64::max)
}

/// `min |<T, J0 p>| / (|T| |p|)`: positive iff the loop is transverse to the
/// standard contact structure of the sphere.
pub fn transversality_margin(lp: &SampledLoop) -> f64 {
    lp.samples
        .iter()
        .map(|s| dot4(&s.tangent, &j0(&s.point)).abs() / (norm4(&s.tangent) * norm4(&s.point)))
        .fold(f64::INFINITY, f64::min)
}
