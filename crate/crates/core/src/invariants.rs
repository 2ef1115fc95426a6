//! Linking numbers, push-off framings and the degree formulas.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::{add4, cross3, dot3, dot4, norm3, norm4, scale4, sub3, sub4, unit, Stereographic, Vec3, Vec4};
use crate::tracer::{DiskMap, SampledLoop};

/// Maximum distance of a Gauss integral from an integer.
pub const LINKING_RESIDUAL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("every candidate pole lies within {distance:e} of the link")]
    PoleTooClose { distance: f64 },
    #[error("linking integral {value} is not close to an integer")]
    NonIntegerLinking { value: f64 },
    #[error("push-off direction is nearly tangent to the surface at t = {t}")]
    FramingDegenerate { t: f64 },
    #[error("push-off linking changed from {full} to {half} when halving the offset")]
    FramingUnstable { full: i32, half: i32 },
    #[error("loops have different sample counts or radii")]
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkingMethod {
    Midpoint,
    MidpointRefined,
    Polygon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Linking {
    pub value: i32,
    /// Distance of the raw integral from `value`.
    pub residual: f64,
    pub method: LinkingMethod,
}

/// Candidate poles on the unit sphere: `±e_i`, `(±e_i ± e_j)/√2`, `(±1, ±1, ±1, ±1)/2`.
fn pole_candidates() -> Vec<Vec4> {
    let mut out = Vec::new();
    for i in 0..4 {
        for s in [1.0, -1.0] {
            out.push(scale4(&unit(i), s));
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..4 {
        for j in i + 1..4 {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                out.push(add4(&scale4(&unit(i), si * r), &scale4(&unit(j), sj * r)));
            }
        }
    }
    for mask in 0..16u32 {
        let v = std::array::from_fn(|i| if mask >> i & 1 == 1 { -0.5 } else { 0.5 });
        out.push(v);
    }
    out
}

/// Pole maximizing the distance to every curve (in units of the radius).
fn choose_pole(curves: &[&[Vec4]], eps: f64) -> (Vec4, f64) {
    pole_candidates()
        .into_iter()
        .map(|p| {
            let q = scale4(&p, eps);
            let d = curves.iter().flat_map(|c| c.iter()).map(|x| norm4(&sub4(x, &q))).fold(f64::INFINITY, f64::min);
            (p, d / eps)
        })
        .fold((unit(0), -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

fn project_all(chart: &Stereographic, c: &[Vec4]) -> Vec<Vec3> {
    c.iter().map(|q| chart.project(q)).collect()
}

/// Central-difference chords `(x_{i+1} - x_{i-1}) / 2` of a closed polygon.
fn chords(x: &[Vec3]) -> Vec<Vec3> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let d = sub3(&x[(i + 1) % n], &x[(i + n - 1) % n]);
            [0.5 * d[0], 0.5 * d[1], 0.5 * d[2]]
        })
        .collect()
}

fn gauss_midpoint(a: &[Vec3], b: &[Vec3]) -> f64 {
    let da = chords(a);
    let db = chords(b);
    let rows: Vec<f64> = a
        .par_iter()
        .zip(da.par_iter())
        .map(|(x, dx)| {
            b.iter()
                .zip(&db)
                .map(|(y, dy)| {
                    let r = sub3(x, y);
                    let d = norm3(&r);
                    dot3(&r, &cross3(dx, dy)) / (d * d * d)
                })
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() / (4.0 * PI)
}

/// Signed solid angle subtended by a pair of segments, as a fraction of the sphere.
fn segment_pair_linking(p1: &Vec3, p2: &Vec3, p3: &Vec3, p4: &Vec3) -> f64 {
    let r13 = sub3(p3, p1);
    let r14 = sub3(p4, p1);
    let r23 = sub3(p3, p2);
    let r24 = sub3(p4, p2);
    let unit3 = |v: Vec3| {
        let n = norm3(&v);
        if n == 0.0 {
            v
        } else {
            [v[0] / n, v[1] / n, v[2] / n]
        }
    };
    let n1 = unit3(cross3(&r13, &r14));
    let n2 = unit3(cross3(&r14, &r24));
    let n3 = unit3(cross3(&r24, &r23));
    let n4 = unit3(cross3(&r23, &r13));
    let a = |u: &Vec3, v: &Vec3| dot3(u, v).clamp(-1.0, 1.0).asin();
    let omega = a(&n1, &n2) + a(&n2, &n3) + a(&n3, &n4) + a(&n4, &n1);
    let r12 = sub3(p2, p1);
    let r34 = sub3(p4, p3);
    let s = dot3(&cross3(&r34, &r12), &r13);
    if s == 0.0 {
        0.0
    } else {
        omega * s.signum() / (4.0 * PI)
    }
}

/// Linking number of two closed polygons in R^3.
///
/// Nearby segment pairs contribute their exact solid angle, so the result stays
/// accurate however close the polygons come; the error from the far field is of
/// order `(h/d)^4`.
pub fn polygon_linking(a: &[Vec3], b: &[Vec3]) -> f64 {
    // Segment pairs within NEAR chord lengths get the exact solid angle, pairs
    // beyond FAR the midpoint integrand, the rest a 2x2 Gauss rule.
    const NEAR: f64 = 12.0;
    const FAR: f64 = 64.0;
    let g = 0.5 / 3f64.sqrt();
    let segs = |x: &[Vec3]| -> Vec<(Vec3, Vec3, f64)> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let (p, q) = (&x[i], &x[(i + 1) % n]);
                let d = sub3(q, p);
                ([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])], d, norm3(&d))
            })
            .collect()
    };
    let kernel = |r: &Vec3, c: &Vec3| {
        let d2 = dot3(r, r);
        dot3(r, c) / (d2 * d2.sqrt())
    };
    let (sa, sb) = (segs(a), segs(b));
    let (na, nb) = (a.len(), b.len());
    let rows: Vec<f64> = (0..na)
        .into_par_iter()
        .map(|i| {
            let (ma, da, ha) = &sa[i];
            let mut smooth = 0.0;
            let mut exact = 0.0;
            for (j, (mb, db, hb)) in sb.iter().enumerate() {
                let r = sub3(ma, mb);
                let d2 = dot3(&r, &r);
                let h = ha.max(*hb);
                let c = cross3(da, db);
                if d2 > (FAR * h).powi(2) {
                    smooth += kernel(&r, &c);
                } else if d2 > (NEAR * h).powi(2) {
                    for sa in [-g, g] {
                        for sb in [-g, g] {
                            let q: Vec3 = std::array::from_fn(|k| r[k] + sa * da[k] - sb * db[k]);
                            smooth += 0.25 * kernel(&q, &c);
                        }
                    }
                } else {
                    exact += segment_pair_linking(&a[i], &a[(i + 1) % na], &b[j], &b[(j + 1) % nb]);
                }
            }
            smooth / (4.0 * PI) + exact
        })
        .collect();
    rows.iter().sum()
}

fn max_chord(x: &[Vec3]) -> f64 {
    let n = x.len();
    (0..n).map(|i| norm3(&sub3(&x[(i + 1) % n], &x[i]))).fold(0.0, f64::max)
}

fn min_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.par_iter()
        .map(|x| b.iter().map(|y| norm3(&sub3(x, y))).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Midpoint rule on the projections; succeeds when it is well resolved and close to an integer.
fn try_midpoint(a: &[Vec4], b: &[Vec4], chart: &Stereographic) -> Option<(f64, f64)> {
    let pa = project_all(chart, a);
    let pb = project_all(chart, b);
    let h = max_chord(&pa).max(max_chord(&pb));
    if h >= 0.5 * min_distance(&pa, &pb) {
        return None;
    }
    let v = gauss_midpoint(&pa, &pb);
    let res = (v - v.round()).abs();
    (res < LINKING_RESIDUAL).then_some((v, res))
}

/// Linking number of two disjoint closed curves on the sphere of radius `eps`,
/// given as closed polygons in R^4.
///
/// The curves are moved to R^3 by an orientation-preserving stereographic chart
/// from a pole far from both. The Gauss integral is evaluated by the midpoint rule
/// when the sampling resolves the gap between the curves; `refine` supplies
/// denser samplings for a second attempt. Otherwise [`polygon_linking`] is used.
pub fn gauss_linking_with(
    a: &[Vec4],
    b: &[Vec4],
    eps: f64,
    refine: Option<(&[Vec4], &[Vec4])>,
) -> Result<Linking, InvariantError> {
    let (pole, dist) = choose_pole(&[a, b], eps);
    if dist < 1e-3 {
        return Err(InvariantError::PoleTooClose { distance: dist * eps });
    }
    let chart = Stereographic::from_pole(pole, eps);
    if let Some((v, residual)) = try_midpoint(a, b, &chart) {
        return Ok(Linking { value: v.round() as i32, residual, method: LinkingMethod::Midpoint });
    }
    if let Some((ra, rb)) = refine {
        if let Some((v, residual)) = try_midpoint(ra, rb, &chart) {
            return Ok(Linking { value: v.round() as i32, residual, method: LinkingMethod::MidpointRefined });
        }
    }
    let v = polygon_linking(&project_all(&chart, a), &project_all(&chart, b));
    let residual = (v - v.round()).abs();
    if residual >= LINKING_RESIDUAL {
        return Err(InvariantError::NonIntegerLinking { value: v });
    }
    Ok(Linking { value: v.round() as i32, residual, method: LinkingMethod::Polygon })
}

/// Linking number of two traced link components.
pub fn gauss_linking(k1: &SampledLoop, k2: &SampledLoop) -> Result<Linking, InvariantError> {
    if (k1.epsilon - k2.epsilon).abs() > 1e-12 * k1.epsilon {
        return Err(InvariantError::Mismatch);
    }
    let a: Vec<Vec4> = k1.points().copied().collect();
    let b: Vec<Vec4> = k2.points().copied().collect();
    let (r1, r2) = (k1.refined(), k2.refined());
    let ra: Vec<Vec4> = r1.points().copied().collect();
    let rb: Vec<Vec4> = r2.points().copied().collect();
    gauss_linking_with(&a, &b, k1.epsilon, Some((&ra, &rb)))
}

/// Smallest distance between samples of `lp` that are at least `min_dt` apart in
/// parameter, i.e. between distinct strands.
pub fn strand_separation(lp: &SampledLoop, min_dt: f64) -> f64 {
    let n = lp.len();
    let w = ((min_dt / lp.step()).ceil() as usize).max(1);
    let p = |i: usize| &lp.samples[i % n].point;
    // Point-to-chord distances: the chords can be far longer than the gap
    // between two nearly parallel strands.
    (0..n)
        .into_par_iter()
        .map(|i| {
            (i + w..i + n - w)
                .map(|j| {
                    let (x, y) = (p(j), p(j + 1));
                    let d = sub4(y, x);
                    let s = (dot4(&sub4(p(i), x), &d) / dot4(&d, &d)).clamp(0.0, 1.0);
                    norm4(&sub4(p(i), &add4(x, &scale4(&d, s))))
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushoffResult {
    pub value: i32,
    pub delta: f64,
    pub linking: Linking,
}

/// Push-off of `lp` by `delta` along the normal part of the constant field
/// `frame * e3`, re-normalized onto the sphere.
pub fn pushoff_curve(map: &DiskMap, lp: &SampledLoop, delta: f64) -> Result<Vec<Vec4>, InvariantError> {
    let x = map.frame().column(2);
    lp.samples
        .iter()
        .map(|s| {
            let z = Complex64::from_polar(s.r, s.t);
            let (_, fx, fy) = map.partials(z);
            let u1 = scale4(&fx, 1.0 / norm4(&fx));
            let v = sub4(&fy, &scale4(&u1, dot4(&fy, &u1)));
            let u2 = scale4(&v, 1.0 / norm4(&v));
            let xn = sub4(&sub4(&x, &scale4(&u1, dot4(&x, &u1))), &scale4(&u2, dot4(&x, &u2)));
            let m = norm4(&xn);
            if !(m > 1e-3) {
                return Err(InvariantError::FramingDegenerate { t: s.t });
            }
            let q = add4(&s.point, &scale4(&xn, delta / m));
            Ok(scale4(&q, lp.epsilon / norm4(&q)))
        })
        .collect()
}

/// Self-linking of `lp` with its push-off along the constant normal field.
///
/// The offset is `min(eps/100, separation/4)`, where the separation is the
/// smallest distance between distinct strands; the result must not change when
/// the offset is halved.
pub fn pushoff_crossing_number(map: &DiskMap, lp: &SampledLoop) -> Result<PushoffResult, InvariantError> {
    let eps = lp.epsilon;
    let sep = strand_separation(lp, 0.5);
    let delta = (eps / 100.0).min(0.25 * sep);
    let base: Vec<Vec4> = lp.points().copied().collect();
    let run = |delta: f64| -> Result<Linking, InvariantError> {
        let off = pushoff_curve(map, lp, delta)?;
        gauss_linking_with(&base, &off, eps, None)
    };
    let full = run(delta)?;
    let half = run(0.5 * delta)?;
    if full.value != half.value {
        return Err(InvariantError::FramingUnstable { full: full.value, half: half.value });
    }
    Ok(PushoffResult { value: full.value, delta, linking: full })
}

/// `E = sum_i e_i + 2 sum_{i<j} lk_ij`.
pub fn singularity_e(e: &[i32], lk: &[Vec<i32>]) -> i32 {
    let pairs: i32 = lk.iter().enumerate().map(|(i, row)| row.iter().skip(i + 1).sum::<i32>()).sum();
    e.iter().sum::<i32>() + 2 * pairs
}

/// Degree of the tangent bundle: `chi + sum m_i`, with `m_i = N_i - 1` the branching orders.
pub fn tangent_degree(chi: i64, orders: &[i64]) -> i64 {
    chi + orders.iter().sum::<i64>()
}

/// Normal degree of an immersed surface with `dbl` signed transverse double points.
pub fn normal_degree_immersed(selfint: i64, dbl: i64) -> i64 {
    selfint - 2 * dbl
}

/// Normal degree of a branched surface with singularity invariants `e_sing`.
pub fn normal_degree_thm1(selfint: i64, e_sing: &[i64]) -> i64 {
    selfint - e_sing.iter().sum::<i64>()
}

/// Self-linking in the `n - e` convention.
pub fn sl_paper(n: i32, e: i32) -> i32 {
    n - e
}

/// Self-linking in the usual transverse-knot convention `e - n`.
pub fn sl_std(n: i32, e: i32) -> i32 {
    e - n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diskspec::parse_config;
    use crate::tracer::{trace_link, TraceOptions};
    use proptest::prelude::*;

    fn trace(src: &str, eps: f64) -> Vec<(DiskMap, SampledLoop)> {
        parse_config(src)
            .unwrap()
            .disks
            .iter()
            .map(|d| (DiskMap::new(d), trace_link(d, eps, &TraceOptions::default()).unwrap()))
            .collect()
    }

    fn circle(n: usize, f: impl Fn(f64) -> Vec3) -> Vec<Vec3> {
        (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).collect()
    }

    #[test]
    fn hopf_in_r3_both_methods() {
        let a = circle(400, |t| [t.cos(), t.sin(), 0.0]);
        let b = circle(400, |t| [1.0 + t.cos(), 0.0, t.sin()]);
        let m = gauss_midpoint(&a, &b);
        let p = polygon_linking(&a, &b);
        assert!((m.abs() - 1.0).abs() < 1e-3);
        assert!((p - m).abs() < 1e-3);
        let far = circle(400, |t| [5.0 + t.cos(), t.sin(), 0.0]);
        assert!(polygon_linking(&a, &far).abs() < 1e-9);
    }

    #[test]
    fn complex_lines_link_positively() {
        let h = trace("disk a { w1 = z; w2 = 0; } disk b { w1 = z; w2 = 0; frame = rot(1,3,90)*rot(2,4,90); }", 0.1);
        let lk = gauss_linking(&h[0].1, &h[1].1).unwrap();
        assert_eq!(lk.value, 1);
        assert!(lk.residual < 1e-6);
        let rev = gauss_linking(&h[0].1.reversed(), &h[1].1).unwrap();
        assert_eq!(rev.value, -1);
    }

    #[test]
    fn pushoff_examples() {
        let c = trace("disk a { w1 = z; w2 = 0; }", 0.1);
        assert_eq!(pushoff_crossing_number(&c[0].0, &c[0].1).unwrap().value, 0);
        let t = trace("disk t { w1 = z^2; w2 = z^3; }", 0.01);
        assert_eq!(pushoff_crossing_number(&t[0].0, &t[0].1).unwrap().value, 3);
        let m = trace("disk m { w1 = z^2; w2 = zbar^3; }", 0.01);
        assert_eq!(pushoff_crossing_number(&m[0].0, &m[0].1).unwrap().value, -3);
    }

    #[test]
    fn formulas() {
        assert_eq!(tangent_degree(2, &[1, 2]), 5);
        assert_eq!(normal_degree_immersed(4, 1), 2);
        assert_eq!(normal_degree_thm1(4, &[3, 2]), -1);
        assert_eq!(singularity_e(&[0, 0], &[vec![0, 1], vec![1, 0]]), 2);
        assert_eq!(singularity_e(&[3], &[vec![0]]), 3);
        assert_eq!(sl_paper(2, 3), -1);
        assert_eq!(sl_std(2, 3), 1);
    }

    #[test]
    fn pole_candidates_are_unit() {
        let c = pole_candidates();
        assert_eq!(c.len(), 8 + 24 + 16);
        assert!(c.iter().all(|p| (norm4(p) - 1.0).abs() < 1e-15));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn torus_knot_linking_with_axis(p in 1i32..5, q in 1i32..5, flip in any::<bool>()) {
            // A (p, q) curve on a torus links the core q times and a circle through the hole p times.
            let s = if flip { -1.0 } else { 1.0 };
            let k = circle(600, |t| {
                let (pt, qt) = (p as f64 * t, q as f64 * t * s);
                let r = 2.0 + 0.5 * qt.cos();
                [r * pt.cos(), r * pt.sin(), 0.5 * qt.sin()]
            });
            let core = circle(600, |t| [2.0 * t.cos(), 2.0 * t.sin(), 0.0]);
            let axis = circle(600, |t| [0.0, 3.0 * t.cos() - 3.0, 3.0 * t.sin()]);
            let lk_core = polygon_linking(&k, &core);
            let lk_axis = polygon_linking(&k, &axis);
            prop_assert!((lk_core.abs() - q as f64).abs() < 1e-4);
            prop_assert!((lk_axis.abs() - p as f64).abs() < 1e-4);
            prop_assert!((gauss_midpoint(&k, &core) - lk_core).abs() < 0.05);
        }

        #[test]
        fn linking_is_symmetric(a in -1.0f64..1.0) {
            let k1 = circle(300, |t| [t.cos(), t.sin(), a * 0.1]);
            let k2 = circle(300, |t| [1.0 + t.cos(), 0.0, t.sin()]);
            prop_assert!((polygon_linking(&k1, &k2) - polygon_linking(&k2, &k1)).abs() < 1e-9);
        }
    }
}
