//! Closed-braid diagrams of traced links.
//!
//! An axis is an oriented 2-plane `A` in R^4; its great circle on the sphere is the
//! braid axis. A loop is a closed braid about it when its projection to `A^perp`
//! never vanishes and winds monotonically. The diagram is the projection of the
//! stereographic image (pole on the axis circle, so the axis becomes a straight
//! line) onto the plane orthogonal to that line; the height along the line decides
//! which strand is on top.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{dot4, norm4, scale4, Mat4, Stereographic, Vec3, Vec4};
use crate::tracer::SampledLoop;

/// Diagram-plane tolerance for refined crossing positions.
pub const TOL_CROSS: f64 = 1e-10;
/// Minimum height separation of the two strands at a crossing.
pub const TOL_DEPTH: f64 = 1e-9;
/// Smallest braid-condition margin accepted for an axis.
pub const MIN_AXIS_MARGIN: f64 = 1e-6;
/// Maximum distance from an integer for a winding number.
pub const WINDING_RESIDUAL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BraidError {
    #[error("projection of loop `{label}` to the axis complement vanishes at t = {t}")]
    ProjectionVanishes { label: String, t: f64 },
    #[error("no candidate axis makes every component a closed braid")]
    NoCommonAxis,
    #[error("a loop does not wind monotonically around the axis")]
    NotClosedBraid,
    #[error("no loops given")]
    EmptyInput,
    #[error("winding number {value} is not close to an integer")]
    NonIntegerWinding { value: f64 },
    #[error("crossing at theta = {theta} has strand separation {separation:e} below tolerance")]
    UnresolvedCrossing { theta: f64, separation: f64 },
    #[error("three strands meet near theta = {theta}")]
    TriplePoint { theta: f64 },
    #[error("strand count {found} differs from total winding {expected}")]
    StrandCount { expected: usize, found: usize },
}

/// Oriented axis plane with an oriented complement; `(c1, c2, b1, b2)` is a
/// positive orthonormal basis of R^4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPlane {
    pub basis: [Vec4; 2],
    pub complement_basis: [Vec4; 2],
    pub margin: f64,
    /// How the candidate was generated.
    #[serde(skip)]
    pub kind: AxisKind,
}

/// Provenance of an axis candidate; coordinate indices are 0-based, angles are `pi/k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Canonical,
    Givens { plane: (usize, usize), k: u32 },
    Paired { planes: [(usize, usize); 2], k: u32 },
}

impl fmt::Display for AxisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisKind::Canonical => write!(f, "canonical"),
            AxisKind::Givens { plane: (i, j), k } => write!(f, "rot({},{}; pi/{k})", i + 1, j + 1),
            AxisKind::Paired { planes: [(i, j), (p, q)], k } => {
                write!(f, "rot({},{}; pi/{k}) rot({},{}; pi/{k})", i + 1, j + 1, p + 1, q + 1)
            }
        }
    }
}

impl AxisPlane {
    /// `A = span(e3, e4)`, complement `span(e1, e2)`.
    pub fn canonical() -> Self {
        Self::from_rotation(&Mat4::identity(), AxisKind::Canonical)
    }

    /// Image of the canonical axis under a rotation.
    pub fn from_rotation(rot: &Mat4, kind: AxisKind) -> Self {
        AxisPlane {
            basis: [rot.column(2), rot.column(3)],
            complement_basis: [rot.column(0), rot.column(1)],
            margin: 0.0,
            kind,
        }
    }

    /// Reverses the orientation of both `A` and `A^perp`, keeping the whole basis positive.
    pub fn flipped(&self) -> Self {
        AxisPlane {
            basis: [self.basis[0], scale4(&self.basis[1], -1.0)],
            complement_basis: [self.complement_basis[0], scale4(&self.complement_basis[1], -1.0)],
            ..*self
        }
    }

    /// Rotates the basis of `A` within `A`, which changes the height coordinate and
    /// the stereographic pole but not the oriented planes.
    pub fn rotated_within(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let [b1, b2] = self.basis;
        let nb1 = crate::geom::add4(&scale4(&b1, c), &scale4(&b2, s));
        let nb2 = crate::geom::add4(&scale4(&b1, -s), &scale4(&b2, c));
        AxisPlane { basis: [nb1, nb2], ..*self }
    }

    fn project_complement(&self, v: &Vec4) -> [f64; 2] {
        [dot4(v, &self.complement_basis[0]), dot4(v, &self.complement_basis[1])]
    }

    /// Stereographic chart from the axis point `eps * b2`, with the axis mapped to the
    /// third coordinate line.
    pub fn chart(&self, eps: f64) -> Stereographic {
        Stereographic::new(self.basis[1], [self.complement_basis[0], self.complement_basis[1], self.basis[0]], eps)
    }

    pub fn is_positive(&self) -> bool {
        let d = crate::geom::det4(&[self.complement_basis[0], self.complement_basis[1], self.basis[0], self.basis[1]]);
        (d - 1.0).abs() < 1e-9
    }
}

/// Signed braid-condition margin of `lp` about `axis`.
///
/// The angular speed of the complement projection, `(x1 x2' - x2 x1') / (x1^2 + x2^2)`,
/// is scaled by `|p| / |p'|` to be dimensionless. When it has constant sign the
/// result is that sign times the smallest magnitude; otherwise `0`.
pub fn braid_condition_margin(lp: &SampledLoop, axis: &AxisPlane) -> Result<f64, BraidError> {
    let eps2 = lp.epsilon * lp.epsilon;
    let mut min_pos = f64::INFINITY;
    let mut min_neg = f64::INFINITY;
    for s in &lp.samples {
        let [x1, x2] = axis.project_complement(&s.point);
        let [d1, d2] = axis.project_complement(&s.tangent);
        let rho2 = x1 * x1 + x2 * x2;
        if rho2 < 1e-10 * eps2 {
            return Err(BraidError::ProjectionVanishes { label: lp.disk_label.clone(), t: s.t });
        }
        let omega = (x1 * d2 - x2 * d1) / rho2 * norm4(&s.point) / norm4(&s.tangent);
        if omega > 0.0 {
            min_pos = min_pos.min(omega);
        } else {
            min_neg = min_neg.min(-omega);
        }
    }
    Ok(match (min_pos.is_finite(), min_neg.is_finite()) {
        (true, false) => min_pos,
        (false, true) => -min_neg,
        _ => 0.0,
    })
}

/// Winding number of the complement projection about the origin.
pub fn winding_number(lp: &SampledLoop, axis: &AxisPlane) -> Result<i32, BraidError> {
    let angles: Vec<f64> = lp
        .samples
        .iter()
        .map(|s| {
            let [x1, x2] = axis.project_complement(&s.point);
            x2.atan2(x1)
        })
        .collect();
    let n = angles.len();
    let total: f64 = (0..n).map(|k| wrap_angle(angles[(k + 1) % n] - angles[k])).sum();
    let value = total / TAU;
    let rounded = value.round();
    if (value - rounded).abs() >= WINDING_RESIDUAL {
        return Err(BraidError::NonIntegerWinding { value });
    }
    Ok(rounded as i32)
}

/// Maps an angle difference into `(-pi, pi]`.
fn wrap_angle(a: f64) -> f64 {
    let mut x = a % TAU;
    if x > PI {
        x -= TAU;
    } else if x <= -PI {
        x += TAU;
    }
    x
}

/// The deterministic candidate list: the canonical axis, single Givens rotations
/// of it by `pi/k` (k = 3..8) in the six coordinate planes, and simultaneous
/// rotations by the same angle in complementary plane pairs.
pub fn axis_candidates() -> Vec<AxisPlane> {
    const PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    const PAIRS: [((usize, usize), (usize, usize)); 3] = [((0, 2), (1, 3)), ((0, 3), (1, 2)), ((0, 1), (2, 3))];
    let mut out = vec![AxisPlane::canonical()];
    for k in 3..=8u32 {
        let angle = PI / k as f64;
        for &(i, j) in &PLANES {
            out.push(AxisPlane::from_rotation(&Mat4::givens(i, j, angle), AxisKind::Givens { plane: (i, j), k }));
        }
    }
    for k in 3..=8u32 {
        let angle = PI / k as f64;
        for &((i, j), (p, q)) in &PAIRS {
            let rot = Mat4::givens(i, j, angle).mul(&Mat4::givens(p, q, angle));
            out.push(AxisPlane::from_rotation(&rot, AxisKind::Paired { planes: [(i, j), (p, q)], k }));
        }
    }
    out
}

/// Candidate axes about which every loop is a closed braid, best margin first,
/// each oriented so that the first loop winds positively.
pub fn accepted_axes(loops: &[SampledLoop]) -> Result<Vec<AxisPlane>, BraidError> {
    if loops.is_empty() {
        return Err(BraidError::EmptyInput);
    }
    let mut scored: Vec<(usize, AxisPlane)> = axis_candidates()
        .into_iter()
        .enumerate()
        .filter_map(|(idx, cand)| {
            let margins: Vec<f64> = loops.iter().map(|lp| braid_condition_margin(lp, &cand).unwrap_or(0.0)).collect();
            let score = margins.iter().map(|m| m.abs()).fold(f64::INFINITY, f64::min);
            if score < MIN_AXIS_MARGIN {
                return None;
            }
            let axis = if margins[0] < 0.0 { cand.flipped() } else { cand };
            Some((idx, AxisPlane { margin: score, ..axis }))
        })
        .collect();
    if scored.is_empty() {
        return Err(BraidError::NoCommonAxis);
    }
    scored.sort_by(|a, b| b.1.margin.total_cmp(&a.1.margin).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(_, a)| a).collect())
}

/// The accepted axis with the largest minimum margin.
pub fn choose_common_axis(loops: &[SampledLoop]) -> Result<AxisPlane, BraidError> {
    Ok(accepted_axes(loops)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub loop_over: usize,
    pub loop_under: usize,
    pub t_over: f64,
    pub t_under: f64,
    pub sign: i8,
    /// Position in the diagram plane.
    pub position: [f64; 2],
    pub theta: f64,
    /// Height difference of the two strands.
    pub separation: f64,
    /// Strands of the whole link closer to the axis than the crossing.
    pub slot: usize,
    /// Same, counting only strands of the crossing's own component.
    pub slot_component: usize,
}

/// A braid word: generator `i > 0` is `sigma_i`, `-i` its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BraidWord {
    pub strands: usize,
    pub letters: Vec<i32>,
}

impl BraidWord {
    pub fn exponent_sum(&self) -> i32 {
        self.letters.iter().map(|l| l.signum()).sum()
    }
}

impl std::fmt::Display for BraidWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.letters.iter().map(|&l| if l > 0 { format!("s{l}") } else { format!("s{}^-1", -l) }).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Projected loop in diagram coordinates.
#[derive(Debug, Clone)]
pub struct ProjectedLoop {
    pub points: Vec<Vec3>,
    /// Derivatives with respect to the loop parameter `t`.
    pub tangents: Vec<Vec3>,
    pub step: f64,
}

impl ProjectedLoop {
    fn hermite(&self, k: usize, s: f64) -> (Vec3, Vec3) {
        let n = self.points.len();
        let (p0, p1) = (self.points[k % n], self.points[(k + 1) % n]);
        let (m0, m1) = (self.tangents[k % n], self.tangents[(k + 1) % n]);
        let h = self.step;
        let s2 = s * s;
        let s3 = s2 * s;
        let (h00, h10, h01, h11) = (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2);
        let (d00, d10, d01, d11) =
            (6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s);
        let mut p = [0.0; 3];
        let mut d = [0.0; 3];
        for i in 0..3 {
            p[i] = h00 * p0[i] + h10 * h * m0[i] + h01 * p1[i] + h11 * h * m1[i];
            d[i] = (d00 * p0[i] + d10 * h * m0[i] + d01 * p1[i] + d11 * h * m1[i]) / h;
        }
        (p, d)
    }

    /// Point and derivative at parameter position `k + s` (`s` may leave `[0, 1)`).
    fn eval(&self, pos: f64) -> (Vec3, Vec3) {
        let n = self.points.len() as f64;
        let pos = pos.rem_euclid(n);
        let k = pos.floor();
        self.hermite(k as usize, pos - k)
    }
}

pub fn project_loop(lp: &SampledLoop, chart: &Stereographic) -> ProjectedLoop {
    ProjectedLoop {
        points: lp.samples.iter().map(|s| chart.project(&s.point)).collect(),
        tangents: lp.samples.iter().map(|s| chart.push_tangent(&s.point, &s.tangent)).collect(),
        step: lp.step(),
    }
}

#[derive(Debug, Clone)]
pub struct BraidDiagram {
    pub axis: AxisPlane,
    pub labels: Vec<String>,
    /// Signed winding number of each component about the axis.
    pub windings: Vec<i32>,
    pub strand_count: usize,
    /// Sorted by `(theta, t_over, t_under)`.
    pub crossings: Vec<Crossing>,
    /// Word of the whole link, in canonical cyclic rotation.
    pub word: BraidWord,
    pub component_words: Vec<BraidWord>,
    pub projected: Vec<ProjectedLoop>,
    /// Smallest strand height separation among crossings (infinite if none).
    pub min_separation: f64,
}

impl BraidDiagram {
    /// Braid index of component `c`.
    pub fn braid_index(&self, c: usize) -> u32 {
        self.windings[c].unsigned_abs()
    }
}

/// Signed self-crossing count of component `c`.
pub fn algebraic_crossing_number(diagram: &BraidDiagram, component: usize) -> i32 {
    diagram
        .crossings
        .iter()
        .filter(|x| x.loop_over == component && x.loop_under == component)
        .map(|x| x.sign as i32)
        .sum()
}

/// Signed count of every crossing in the diagram.
pub fn link_crossing_number(diagram: &BraidDiagram) -> i32 {
    diagram.crossings.iter().map(|x| x.sign as i32).sum()
}

/// Signed count of crossings between components `i` and `j` (`i != j`); half of it
/// is their linking number.
pub fn mixed_crossing_sum(diagram: &BraidDiagram, i: usize, j: usize) -> i32 {
    diagram
        .crossings
        .iter()
        .filter(|x| (x.loop_over == i && x.loop_under == j) || (x.loop_over == j && x.loop_under == i))
        .map(|x| x.sign as i32)
        .sum()
}

/// A loop as a multivalued graph over the angle `theta` of the diagram plane.
struct Sheet {
    /// Unwrapped angle at each sample; strictly monotone for a closed braid.
    theta: Vec<f64>,
    /// `+1` or `-1`: direction of `theta` along the loop.
    dir: f64,
    /// Grid points `m * delta` met by the loop, in increasing `m`: `(m, position)`.
    hits: Vec<(i64, f64)>,
}

fn polar(p: &Vec3) -> (f64, f64) {
    (p[1].atan2(p[0]), p[0].hypot(p[1]))
}

/// Unwrapped angle of the Hermite interpolant at parameter position `pos`.
fn theta_at(pl: &ProjectedLoop, sheet_theta: &[f64], pos: f64) -> f64 {
    let n = pl.points.len();
    let k = (pos.floor() as i64).rem_euclid(n as i64) as usize;
    let (p, _) = pl.eval(pos);
    let base = sheet_theta[k];
    base + wrap_angle(polar(&p).0 - base)
}

/// Parameter position in `[k, k + 1]` where the unwrapped angle equals `target`.
fn invert_theta(pl: &ProjectedLoop, sheet_theta: &[f64], k: usize, target: f64, total: f64) -> f64 {
    let n = pl.points.len();
    // Unwrapped angles of the interval ends, with the closing wrap of the loop.
    let t0 = sheet_theta[k];
    let t1 = if k + 1 < n { sheet_theta[k + 1] } else { sheet_theta[0] + total };
    let (mut lo, mut hi) = (k as f64, k as f64 + 1.0);
    let increasing = t1 > t0;
    let f = |pos: f64| {
        let wraps = if pos >= n as f64 { total } else { 0.0 };
        theta_at(pl, sheet_theta, pos) + wraps - target
    };
    let mut pos = k as f64 + ((target - t0) / (t1 - t0)).clamp(0.0, 1.0);
    for _ in 0..60 {
        let v = f(pos);
        if v == 0.0 {
            break;
        }
        if (v > 0.0) == increasing {
            hi = pos;
        } else {
            lo = pos;
        }
        let next = 0.5 * (lo + hi);
        if (hi - lo) < 1e-15 * (1.0 + k as f64) {
            pos = next;
            break;
        }
        pos = next;
    }
    pos
}

fn build_sheet(pl: &ProjectedLoop, winding: i32, delta: f64) -> Result<Sheet, BraidError> {
    let n = pl.points.len();
    let mut theta = Vec::with_capacity(n);
    let mut acc = polar(&pl.points[0]).0;
    theta.push(acc);
    for k in 1..n {
        acc += wrap_angle(polar(&pl.points[k]).0 - polar(&pl.points[k - 1]).0);
        theta.push(acc);
    }
    let total = TAU * winding as f64;
    let dir = (winding as f64).signum();
    let closing = theta[0] + total - theta[n - 1];
    if (0..n - 1).any(|k| (theta[k + 1] - theta[k]) * dir <= 0.0) || closing * dir <= 0.0 {
        return Err(BraidError::NotClosedBraid);
    }
    // First grid index at or above each sample; the closing value is offset by
    // an exact number of grid periods so the hit count is exactly |winding| * grid.
    let grid = (TAU / delta).round() as i64;
    let mut first: Vec<i64> = theta.iter().map(|t| (t / delta).ceil() as i64).collect();
    first.push(first[0] + winding as i64 * grid);
    let mut hits = Vec::new();
    for k in 0..n {
        let (m0, m1) = (first[k].min(first[k + 1]), first[k].max(first[k + 1]));
        for m in m0..m1 {
            let pos = invert_theta(pl, &theta, k, m as f64 * delta, total);
            hits.push((m, pos));
        }
    }
    hits.sort_by_key(|h| h.0);
    Ok(Sheet { theta, dir, hits })
}

fn canonical_rotation(letters: &[i32]) -> Vec<i32> {
    (0..letters.len().max(1))
        .map(|r| {
            let mut w = letters.to_vec();
            w.rotate_left(r.min(letters.len()));
            w
        })
        .min()
        .unwrap_or_default()
}

/// One strand sample on the angular grid.
#[derive(Debug, Clone, Copy)]
struct GridPoint {
    lp: usize,
    /// Index into the loop's `hits`.
    h: usize,
    rho: f64,
}

/// Reduces to `[0, 2pi)`, sending values within rounding of `2pi` to zero.
fn unit_turn(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if TAU - y < 1e-12 {
        0.0
    } else {
        y
    }
}

/// Builds the closed-braid diagram of `loops` about `axis`.
///
/// Each loop is a multivalued graph `rho(theta)` over the diagram plane. The
/// strands are resampled on a common angular grid; a crossing is a sign change of
/// `rho_a - rho_b` between neighbouring grid angles, located by bisection on the
/// Hermite interpolants.
pub fn build_diagram(loops: &[SampledLoop], axis: &AxisPlane) -> Result<BraidDiagram, BraidError> {
    if loops.is_empty() {
        return Err(BraidError::EmptyInput);
    }
    let eps = loops[0].epsilon;
    let windings = loops.iter().map(|lp| winding_number(lp, axis)).collect::<Result<Vec<_>, _>>()?;
    if windings.contains(&0) {
        return Err(BraidError::NotClosedBraid);
    }
    let chart = axis.chart(eps);
    let projected: Vec<ProjectedLoop> = loops.iter().map(|lp| project_loop(lp, &chart)).collect();
    let grid = loops.iter().map(|l| l.len()).max().unwrap_or(256);
    let delta = TAU / grid as f64;
    let sheets =
        projected.iter().zip(&windings).map(|(pl, &w)| build_sheet(pl, w, delta)).collect::<Result<Vec<_>, _>>()?;

    let strand_count: usize = windings.iter().map(|w| w.unsigned_abs() as usize).sum();
    // columns[g] = strands at angle g * delta
    let mut columns: Vec<Vec<GridPoint>> = vec![Vec::with_capacity(strand_count); grid];
    for (li, sh) in sheets.iter().enumerate() {
        for (h, &(m, pos)) in sh.hits.iter().enumerate() {
            let (p, _) = projected[li].eval(pos);
            columns[m.rem_euclid(grid as i64) as usize].push(GridPoint { lp: li, h, rho: p[0].hypot(p[1]) });
        }
    }
    if let Some(bad) = columns.iter().find(|c| c.len() != strand_count) {
        return Err(BraidError::StrandCount { expected: strand_count, found: bad.len() });
    }
    // The same strand one grid step further in theta.
    let next_hit = |lp: usize, h: usize| -> usize {
        let len = sheets[lp].hits.len();
        (h + 1) % len
    };

    let eval_rho = |lp: usize, h: usize, target: f64| -> (f64, Vec3, Vec3) {
        let sh = &sheets[lp];
        let pl = &projected[lp];
        let n = pl.points.len();
        let total = TAU * windings[lp] as f64;
        let (m0, p0) = sh.hits[h];
        let (_, p1) = sh.hits[next_hit(lp, h)];
        // Bracket in parameter position between two consecutive grid hits.
        let (mut a, mut b) = if sh.dir > 0.0 {
            (p0, if p1 < p0 { p1 + n as f64 } else { p1 })
        } else {
            (p1, if p0 < p1 { p0 + n as f64 } else { p0 })
        };
        let th = |pos: f64| {
            let wraps = (pos / n as f64).floor();
            theta_at(pl, &sh.theta, pos) + wraps * total
        };
        let lift = m0 as f64 * delta;
        let goal = lift + wrap_angle(target - lift);
        let increasing = th(b) > th(a);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if (th(mid) < goal) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        let pos = 0.5 * (a + b);
        let (p, d) = pl.eval(pos);
        (pos.rem_euclid(n as f64), p, d)
    };

    let mut crossings: Vec<Crossing> = Vec::new();
    for g in 0..grid {
        let col = &columns[g];
        let next_col = &columns[(g + 1) % grid];
        let rho_next = |gp: &GridPoint| -> f64 {
            let h = next_hit(gp.lp, gp.h);
            next_col.iter().find(|q| q.lp == gp.lp && q.h == h).map(|q| q.rho).unwrap_or(f64::NAN)
        };
        for (x, a) in col.iter().enumerate() {
            for b in &col[x + 1..] {
                let d0 = a.rho - b.rho;
                let d1 = rho_next(a) - rho_next(b);
                if !(d0.is_finite() && d1.is_finite()) {
                    return Err(BraidError::StrandCount { expected: strand_count, found: col.len() });
                }
                // A crossing exactly on a grid column belongs to the interval ending there.
                if d0 == 0.0 || (d1 != 0.0 && (d0 > 0.0) == (d1 > 0.0)) {
                    continue;
                }
                // Bisection in theta on rho_a - rho_b.
                let (mut lo, mut hi) = (g as f64 * delta, (g + 1) as f64 * delta);
                let sign0 = d0 > 0.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let (_, pa, _) = eval_rho(a.lp, a.h, mid);
                    let (_, pb, _) = eval_rho(b.lp, b.h, mid);
                    if ((pa[0].hypot(pa[1]) - pb[0].hypot(pb[1])) > 0.0) == sign0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let theta = 0.5 * (lo + hi);
                let (ta, xa, da) = eval_rho(a.lp, a.h, theta);
                let (tb, xb, db) = eval_rho(b.lp, b.h, theta);
                let a_on_top = xa[2] > xb[2];
                let (sa, sb) = (projected[a.lp].step, projected[b.lp].step);
                let (over, under, t_over, t_under, d_over, d_under) = if a_on_top {
                    (a.lp, b.lp, ta * sa, tb * sb, da, db)
                } else {
                    (b.lp, a.lp, tb * sb, ta * sa, db, da)
                };
                let det = d_over[0] * d_under[1] - d_over[1] * d_under[0];
                let position = [0.5 * (xa[0] + xb[0]), 0.5 * (xa[1] + xb[1])];
                let rho_c = position[0].hypot(position[1]);
                // Slot: strands strictly inside the crossing pair at this angle.
                let w = (theta - g as f64 * delta) / delta;
                let below = |filter: &dyn Fn(usize) -> bool| {
                    col.iter()
                        .filter(|q| !((q.lp == a.lp && q.h == a.h) || (q.lp == b.lp && q.h == b.h)))
                        .filter(|q| filter(q.lp))
                        .filter(|q| (1.0 - w) * q.rho + w * rho_next(q) < rho_c)
                        .count()
                };
                let slot_link = below(&|_| true);
                let slot_own = below(&|l| l == a.lp);
                crossings.push(Crossing {
                    loop_over: over,
                    loop_under: under,
                    t_over: unit_turn(t_over),
                    t_under: unit_turn(t_under),
                    sign: if det > 0.0 { 1 } else { -1 },
                    position,
                    theta: unit_turn(theta),
                    separation: (xa[2] - xb[2]).abs(),
                    slot: slot_link,
                    slot_component: slot_own,
                });
            }
        }
    }
    crossings.sort_by(|a, b| {
        a.theta.total_cmp(&b.theta).then(a.t_over.total_cmp(&b.t_over)).then(a.t_under.total_cmp(&b.t_under))
    });

    for c in &crossings {
        if c.separation < TOL_DEPTH {
            return Err(BraidError::UnresolvedCrossing { theta: c.theta, separation: c.separation });
        }
    }
    for w in crossings.windows(2) {
        let d = (w[0].position[0] - w[1].position[0]).hypot(w[0].position[1] - w[1].position[1]);
        if (w[1].theta - w[0].theta).abs() < 1e-12 && d < 1e3 * TOL_CROSS {
            return Err(BraidError::TriplePoint { theta: w[0].theta });
        }
    }

    let link_letters: Vec<i32> = crossings.iter().map(|c| c.sign as i32 * (c.slot as i32 + 1)).collect();
    let word = BraidWord { strands: strand_count, letters: canonical_rotation(&link_letters) };
    let component_words = (0..loops.len())
        .map(|ci| {
            let letters: Vec<i32> = crossings
                .iter()
                .filter(|c| c.loop_over == ci && c.loop_under == ci)
                .map(|c| c.sign as i32 * (c.slot_component as i32 + 1))
                .collect();
            BraidWord { strands: windings[ci].unsigned_abs() as usize, letters: canonical_rotation(&letters) }
        })
        .collect();

    let min_separation = crossings.iter().map(|c| c.separation).fold(f64::INFINITY, f64::min);
    Ok(BraidDiagram {
        axis: *axis,
        labels: loops.iter().map(|l| l.disk_label.clone()).collect(),
        windings,
        strand_count,
        crossings,
        word,
        component_words,
        projected,
        min_separation,
    })
}

/// Builds the diagram, retrying once with the axis basis rotated by `pi/7`
/// within the axis plane if a crossing cannot be resolved.
pub fn build_diagram_with_retry(loops: &[SampledLoop], axis: &AxisPlane) -> Result<BraidDiagram, BraidError> {
    match build_diagram(loops, axis) {
        Err(BraidError::UnresolvedCrossing { .. }) | Err(BraidError::TriplePoint { .. }) => {
            build_diagram(loops, &axis.rotated_within(PI / 7.0))
        }
        other => other,
    }
}

/// Static SVG of the annular diagram with crossings marked by sign.
pub fn diagram_svg(diagram: &BraidDiagram) -> String {
    const SIZE: f64 = 640.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let extent = diagram
        .projected
        .iter()
        .flat_map(|p| p.points.iter())
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max)
        .max(1e-12)
        * 1.1;
    let map = |x: f64, y: f64| (SIZE / 2.0 + x / extent * SIZE / 2.0, SIZE / 2.0 - y / extent * SIZE / 2.0);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    out.push_str(&format!("<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"));
    let (cx, cy) = map(0.0, 0.0);
    out.push_str(&format!(
        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\" fill=\"black\"><title>axis</title></circle>\n"
    ));
    for (i, pl) in diagram.projected.iter().enumerate() {
        let pts: Vec<String> = pl
            .points
            .iter()
            .map(|p| {
                let (x, y) = map(p[0], p[1]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        out.push_str(&format!(
            "<polygon points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"><title>{}</title></polygon>\n",
            pts.join(" "),
            COLORS[i % COLORS.len()],
            diagram.labels[i]
        ));
    }
    for c in &diagram.crossings {
        let (x, y) = map(c.position[0], c.position[1]);
        let color = if c.sign > 0 { "#2ca02c" } else { "#d62728" };
        out.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{color}\"><title>{:+}</title></circle>\n",
            c.sign
        ));
    }
    out.push_str("</svg>\n");
    out
}
