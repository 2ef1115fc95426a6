//! Double points of perturbed Micallef–White disks.
//!
//! For a disk `(z^N, P(z))` the perturbation `(z^N, P(z) + λz)` has a double point
//! `f(z) = f(νz)` for each `N`-th root of unity `ν ≠ 1` and each zero of
//! `S_ν(z) = P(z) - P(νz) + λ(1 - ν)z`. The signed count of those double points is
//! compared with a closed form driven by the gcd cascade of the exponents.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diskspec::{gcd, MwForm, StageKind};
use crate::geom::{det4, from_pair, norm4, Vec4};
use crate::zpoly::{Wirtinger, ZPolynomial};

/// Roots closer than this are the same root.
pub const DEDUP_TOL: f64 = 1e-9;
/// Smallest normalized intersection determinant that still has a sign.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CensusError {
    #[error("root count for nu = {nu:?} changed from {coarse} to {fine} when doubling the seeds")]
    RootCountUnstable { nu: [f64; 2], coarse: usize, fine: usize },
    #[error("double point at z = {z:?} has a degenerate intersection (|det| = {det:e})")]
    SignDegenerate { z: [f64; 2], det: f64 },
    #[error("S_nu may vanish in the annulus r/2 < |z| < 2r/3 (nu = {nu:?})")]
    AnnulusNotRootFree { nu: [f64; 2] },
    #[error("root z = {z:?} of D_nu has no partner in D_(1/nu)")]
    PairingFailed { z: [f64; 2] },
    #[error("invalid parameters: {0}")]
    BadParameters(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cascade {
    #[serde(rename = "Q")]
    pub q: Vec<u32>,
    pub tau: Vec<i64>,
    pub sl_prop6: i64,
}

/// `Q_0 = N`, `Q_{j+1} = gcd(Q_j, mu_j)`; `tau_j = mu_j - 1` (holomorphic stage) or
/// `-(mu_j + 1)` (antiholomorphic); `sl_prop6 = sum (Q_j - Q_{j+1}) tau_j`.
pub fn gcd_cascade(m: &MwForm) -> Cascade {
    let mut q = vec![m.n];
    let mut tau = Vec::with_capacity(m.stages.len());
    for s in &m.stages {
        q.push(gcd(*q.last().unwrap(), s.mu));
        tau.push(match s.kind {
            StageKind::Holo => s.mu as i64 - 1,
            StageKind::Antiholo => -(s.mu as i64 + 1),
        });
    }
    let sl_prop6 = tau.iter().enumerate().map(|(j, t)| (q[j] as i64 - q[j + 1] as i64) * t).sum();
    Cascade { q, tau, sl_prop6 }
}

/// A nontrivial `N`-th root of unity `exp(2 pi i k / N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOfUnity {
    pub k: u32,
    pub n: u32,
}

impl RootOfUnity {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.k as f64 / self.n as f64)
    }

    /// `nu^q == 1`, decided exactly.
    pub fn pow_is_one(&self, q: u32) -> bool {
        (self.k as u64 * q as u64).is_multiple_of(self.n as u64)
    }

    pub fn inverse(&self) -> Self {
        RootOfUnity { k: (self.n - self.k) % self.n, n: self.n }
    }
}

/// Partition of the nontrivial `N`-th roots of unity into `R_0, ..., R_s` with
/// `R_j = {nu : nu^{Q_j} = 1, nu^{Q_{j+1}} != 1}`.
pub fn root_classes(m: &MwForm) -> Vec<Vec<RootOfUnity>> {
    let q = gcd_cascade(m).q;
    (0..m.stages.len())
        .map(|j| {
            (1..m.n)
                .map(|k| RootOfUnity { k, n: m.n })
                .filter(|nu| nu.pow_is_one(q[j]) && !nu.pow_is_one(q[j + 1]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootRecord {
    pub z: [f64; 2],
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuRecord {
    pub nu: [f64; 2],
    pub class_index: usize,
    pub roots: Vec<RootRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublePointCensus {
    pub lambda: f64,
    pub r: f64,
    /// Sorted by the argument of `nu`.
    pub records: Vec<NuRecord>,
    pub total_signed: i64,
    /// Signed number of double points, `total_signed / 2`.
    pub pair_count: i64,
    /// Largest relative distance between `nu z` and its partner root in `D_(1/nu)`.
    pub pairing_residual: f64,
}

/// `S_nu` as a polynomial in `z, zbar`.
pub fn s_nu(p: &ZPolynomial, nu: Complex64, lambda: f64) -> ZPolynomial {
    let mut s = p - &p.compose_scale(nu);
    s.add_term(1, 0, (Complex64::new(1.0, 0.0) - nu) * lambda);
    s
}

/// Default perturbation size for radius `r`: `min(1e-3, (r/2)^(mu_0 - 1) / 10)`,
/// further reduced until every leading-order root scale is below `r/4`.
pub fn default_lambda(m: &MwForm, r: f64) -> f64 {
    let mu0 = m.stages.first().map_or(2, |s| s.mu);
    let mut lambda = 1e-3f64.min((0.5 * r).powi(mu0 as i32 - 1) / 10.0);
    for nu in (1..m.n).map(|k| RootOfUnity { k, n: m.n }) {
        if let Some((mu, c)) = leading_stage(m, nu) {
            // |z|^(mu-1) = lambda |1 - nu| / |c'|
            let bound = (0.25 * r).powi(mu as i32 - 1) * c / (Complex64::new(1.0, 0.0) - nu.value()).norm();
            lambda = lambda.min(bound);
        }
    }
    lambda
}

/// Radius, at most `r_max`, inside which every `P(z) - P(nu z)` is dominated by
/// its lowest surviving stage: on `|z| = r` that term is at least twice the sum of
/// the later ones. Shrinks `r_max` geometrically until this holds.
pub fn dominant_radius(m: &MwForm, r_max: f64) -> f64 {
    let dominated = |r: f64| {
        (1..m.n).map(|k| RootOfUnity { k, n: m.n }).all(|nu| {
            let Some((mu0, c0)) = leading_stage(m, nu) else { return true };
            let rest: f64 = m
                .stages
                .iter()
                .filter(|s| s.mu > mu0)
                .map(|s| (s.coeff * (Complex64::new(1.0, 0.0) - nu_pow(nu, s.mu))).norm() * r.powi(s.mu as i32))
                .sum();
            c0 * r.powi(mu0 as i32) >= 2.0 * rest
        })
    };
    let mut r = r_max;
    while !dominated(r) && r > 1e-6 * r_max {
        r *= 0.8;
    }
    r
}

/// `nu^mu`, with the exponent reduced exactly.
fn nu_pow(nu: RootOfUnity, mu: u32) -> Complex64 {
    Complex64::from_polar(1.0, TAU * ((nu.k as u64 * mu as u64) % nu.n as u64) as f64 / nu.n as f64)
}

/// Lowest stage surviving in `P(z) - P(nu z)`, with `|c (1 - nu^mu)|`.
fn leading_stage(m: &MwForm, nu: RootOfUnity) -> Option<(u32, f64)> {
    m.stages
        .iter()
        .find(|s| !nu.pow_is_one(s.mu))
        .map(|s| (s.mu, (s.coeff * (Complex64::new(1.0, 0.0) - nu_pow(nu, s.mu))).norm()))
}

/// Nonzero roots of the leading-order truncation of `S_nu`.
fn analytic_seeds(m: &MwForm, nu: RootOfUnity, lambda: f64) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let nv = nu.value();
    let lam = (one - nv) * lambda;
    let mut out = Vec::new();
    for s in &m.stages {
        if nu.pow_is_one(s.mu) {
            continue;
        }
        let mu = s.mu as i32;
        match s.kind {
            StageKind::Holo => {
                // c' z^{mu-1} = -lam
                let c = s.coeff * (one - nv.powi(mu));
                let rhs = -lam / c;
                let (rho, phi) = (rhs.norm().powf(1.0 / (mu - 1) as f64), rhs.arg());
                for k in 0..(mu - 1) {
                    out.push(Complex64::from_polar(rho, (phi + TAU * k as f64) / (mu - 1) as f64));
                }
            }
            StageKind::Antiholo => {
                // c' zbar^mu + lam z = 0, c' = b (1 - conj(nu)^mu)
                let c = s.coeff * (one - nv.conj().powi(mu));
                let rho = (lam.norm() / c.norm()).powf(1.0 / (mu - 1) as f64);
                // e^{-i (mu+1) phi} = -lam / (c rho^{mu-1})
                let w = -lam / c;
                for k in 0..(mu + 1) {
                    out.push(Complex64::from_polar(rho, -(w.arg() + TAU * k as f64) / (mu + 1) as f64));
                }
            }
        }
    }
    out
}

struct SMap {
    s: ZPolynomial,
    dz: ZPolynomial,
    dzb: ZPolynomial,
}

impl SMap {
    fn new(s: ZPolynomial) -> Self {
        SMap { dz: s.wirtinger(Wirtinger::Dz), dzb: s.wirtinger(Wirtinger::Dzbar), s }
    }

    fn newton(&self, mut z: Complex64, rmax: f64) -> Option<Complex64> {
        for _ in 0..80 {
            let (v, fx, fy) = self.s.eval_with_partials(z, &self.dz, &self.dzb);
            let det = fx.re * fy.im - fy.re * fx.im;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dx = (v.re * fy.im - fy.re * v.im) / det;
            let dy = (fx.re * v.im - v.re * fx.im) / det;
            z -= Complex64::new(dx, dy);
            if !z.norm().is_finite() || z.norm() > 4.0 * rmax {
                return None;
            }
            if dx.hypot(dy) < 1e-15 * z.norm().max(1e-300) {
                return Some(z);
            }
        }
        let v = self.s.evaluate(z);
        (v.norm() < 1e-13 * z.norm().max(1e-300)).then_some(z)
    }
}

/// Roots in `0 < |z| < r/2` from the given number of angles per seed circle.
fn search(sm: &SMap, seeds_extra: &[Complex64], r: f64, angles: usize) -> Vec<Complex64> {
    let mut seeds: Vec<Complex64> = seeds_extra.to_vec();
    for radius in [r / 8.0, r / 4.0, 3.0 * r / 8.0] {
        for a in 0..angles {
            seeds.push(Complex64::from_polar(radius, TAU * (a as f64 + 0.5) / angles as f64));
        }
    }
    let mut roots: Vec<Complex64> = Vec::new();
    for seed in seeds {
        if let Some(z) = sm.newton(seed, r) {
            if z.norm() < 1e-9 * r || z.norm() >= 0.5 * r {
                continue;
            }
            if roots.iter().all(|w| (w - z).norm() > DEDUP_TOL) {
                roots.push(z);
            }
        }
    }
    roots.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
    roots
}

/// Grid check that `S_nu` has no zero with `r/2 <= |z| <= 2r/3`: at every node
/// `|S|` must exceed twice the local gradient times the cell radius.
fn annulus_root_free(sm: &SMap, r: f64) -> bool {
    let (nr, na) = (48usize, 1024usize);
    let (r0, r1) = (0.5 * r, 2.0 * r / 3.0);
    let dr = (r1 - r0) / nr as f64;
    let da = TAU / na as f64;
    let cell = 0.5 * dr.hypot(r1 * da);
    (0..=nr).all(|i| {
        let rho = r0 + dr * i as f64;
        (0..na).all(|a| {
            let z = Complex64::from_polar(rho, da * a as f64);
            let (v, fx, fy) = sm.s.eval_with_partials(z, &sm.dz, &sm.dzb);
            v.norm() > 2.0 * (fx.norm() + fy.norm()) * cell
        })
    })
}

/// Perturbed map `(z^N, P(z) + lambda z)` and its partials at `z`.
fn perturbed_frame(
    p: &ZPolynomial,
    dp: &(ZPolynomial, ZPolynomial),
    n: u32,
    lambda: f64,
    z: Complex64,
) -> (Vec4, Vec4) {
    let (_, px, py) = p.eval_with_partials(z, &dp.0, &dp.1);
    let dzn = z.powu(n - 1) * n as f64;
    let fx = from_pair(dzn, px + lambda);
    let fy = from_pair(dzn * Complex64::i(), py + Complex64::new(0.0, lambda));
    (fx, fy)
}

/// Signed census of double points of the perturbed disk `(z^N, P(z) + lambda z)`
/// inside `|z| < r/2`.
pub fn numeric_census(m: &MwForm, lambda: f64, r: f64) -> Result<DoublePointCensus, CensusError> {
    if !(lambda > 0.0 && r > 0.0) {
        return Err(CensusError::BadParameters(format!("lambda = {lambda}, r = {r}")));
    }
    let p = m.to_disk("census").w2;
    let dp = (p.wirtinger(Wirtinger::Dz), p.wirtinger(Wirtinger::Dzbar));
    let mu_s = m.stages.last().map_or(2, |s| s.mu) as usize;
    let classes = root_classes(m);
    let class_of = |nu: &RootOfUnity| classes.iter().position(|c| c.contains(nu)).unwrap_or(usize::MAX);

    let nus: Vec<RootOfUnity> = (1..m.n).map(|k| RootOfUnity { k, n: m.n }).collect();
    let per_nu: Vec<Result<(RootOfUnity, Vec<Complex64>), CensusError>> = nus
        .par_iter()
        .map(|&nu| {
            let sm = SMap::new(s_nu(&p, nu.value(), lambda));
            let nv = nu.value();
            let seeds = analytic_seeds(m, nu, lambda);
            let coarse = search(&sm, &seeds, r, 4 * mu_s);
            let fine = search(&sm, &seeds, r, 8 * mu_s);
            if coarse.len() != fine.len() {
                return Err(CensusError::RootCountUnstable {
                    nu: [nv.re, nv.im],
                    coarse: coarse.len(),
                    fine: fine.len(),
                });
            }
            if !annulus_root_free(&sm, r) {
                return Err(CensusError::AnnulusNotRootFree { nu: [nv.re, nv.im] });
            }
            Ok((nu, fine))
        })
        .collect();
    let per_nu = per_nu.into_iter().collect::<Result<Vec<_>, _>>()?;

    // z in D_nu  <=>  nu z in D_{1/nu}
    let mut pairing_residual = 0.0f64;
    for (nu, roots) in &per_nu {
        let partner = &per_nu.iter().find(|(w, _)| *w == nu.inverse()).expect("inverse root present").1;
        for z in roots {
            let image = nu.value() * z;
            let gap = partner.iter().map(|w| (w - image).norm()).fold(f64::INFINITY, f64::min) / z.norm().max(1.0);
            if !(gap < 1e-8) {
                return Err(CensusError::PairingFailed { z: [z.re, z.im] });
            }
            pairing_residual = pairing_residual.max(gap);
        }
    }

    let mut records = Vec::with_capacity(per_nu.len());
    let mut total = 0i64;
    for (nu, roots) in &per_nu {
        let mut rec = NuRecord { nu: [nu.value().re, nu.value().im], class_index: class_of(nu), roots: Vec::new() };
        for &z in roots {
            let (ax, ay) = perturbed_frame(&p, &dp, m.n, lambda, z);
            let (bx, by) = perturbed_frame(&p, &dp, m.n, lambda, nu.value() * z);
            let det = det4(&[ax, ay, bx, by]) / (norm4(&ax) * norm4(&ay) * norm4(&bx) * norm4(&by));
            if det.abs() < SIGN_TOL {
                return Err(CensusError::SignDegenerate { z: [z.re, z.im], det });
            }
            let sign = if det > 0.0 { 1 } else { -1 };
            total += sign as i64;
            rec.roots.push(RootRecord { z: [z.re, z.im], sign });
        }
        records.push(rec);
    }
    Ok(DoublePointCensus { lambda, r, records, total_signed: total, pair_count: total / 2, pairing_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Which self-linking convention, if any, the cascade value coincides with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlMatch {
    None,
    Paper,
    Std,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Crosscheck {
    pub e_diagram: i64,
    pub e_census: i64,
    pub e_prop6: i64,
    pub sl_paper: i64,
    pub sl_std: i64,
    pub sl_prop6: i64,
    pub sl_prop6_matches: SlMatch,
    pub verdict: Verdict,
}

/// Compares `e` from the diagram with `(N - 1) + total_signed` and `(N - 1) + sl_prop6`.
pub fn crosscheck(n: u32, e_diagram: i64, census: &DoublePointCensus, cascade: &Cascade) -> Crosscheck {
    let base = n as i64 - 1;
    let e_census = base + census.total_signed;
    let e_prop6 = base + cascade.sl_prop6;
    let sl_paper = n as i64 - e_diagram;
    let sl_std = e_diagram - n as i64;
    let sl_prop6_matches = match (cascade.sl_prop6 == sl_paper, cascade.sl_prop6 == sl_std) {
        (true, true) => SlMatch::Both,
        (true, false) => SlMatch::Paper,
        (false, true) => SlMatch::Std,
        (false, false) => SlMatch::None,
    };
    let verdict = if e_diagram == e_census && e_census == e_prop6 { Verdict::Pass } else { Verdict::Fail };
    Crosscheck { e_diagram, e_census, e_prop6, sl_paper, sl_std, sl_prop6: cascade.sl_prop6, sl_prop6_matches, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diskspec::{mw_classify, parse_config, MwStage};
    use proptest::prelude::*;

    fn mw(src: &str) -> MwForm {
        mw_classify(&parse_config(src).unwrap().disks[0]).unwrap()
    }

    fn form(n: u32, stages: &[(u32, StageKind)]) -> MwForm {
        MwForm {
            n,
            stages: stages.iter().map(|&(mu, kind)| MwStage { mu, coeff: Complex64::new(1.0, 0.0), kind }).collect(),
        }
    }

    #[test]
    fn cascade_examples() {
        let c = gcd_cascade(&form(2, &[(3, StageKind::Holo)]));
        assert_eq!((c.q, c.tau, c.sl_prop6), (vec![2, 1], vec![2], 2));
        let c = gcd_cascade(&form(4, &[(6, StageKind::Holo), (7, StageKind::Holo)]));
        assert_eq!((c.q, c.tau, c.sl_prop6), (vec![4, 2, 1], vec![5, 6], 16));
        let c = gcd_cascade(&form(2, &[(3, StageKind::Antiholo)]));
        assert_eq!((c.tau, c.sl_prop6), (vec![-4], -4));
    }

    #[test]
    fn root_class_examples() {
        let r = root_classes(&form(2, &[(3, StageKind::Holo)]));
        assert_eq!(r, vec![vec![RootOfUnity { k: 1, n: 2 }]]);
        let r = root_classes(&form(4, &[(6, StageKind::Holo), (7, StageKind::Holo)]));
        assert_eq!(r[0], vec![RootOfUnity { k: 1, n: 4 }, RootOfUnity { k: 3, n: 4 }]);
        assert_eq!(r[1], vec![RootOfUnity { k: 2, n: 4 }]);
        let r = root_classes(&form(3, &[(5, StageKind::Holo)]));
        assert_eq!(r[0].len(), 2);
    }

    #[test]
    fn census_trefoil() {
        let c = numeric_census(&mw("disk t { w1 = z^2; w2 = z^3; }"), 1e-3, 0.5).unwrap();
        assert_eq!(c.records.len(), 1);
        assert_eq!(c.records[0].roots.len(), 2);
        assert!(c.records[0].roots.iter().all(|r| r.sign == 1));
        assert_eq!((c.total_signed, c.pair_count), (2, 1));
    }

    #[test]
    fn census_mirror_trefoil() {
        let c = numeric_census(&mw("disk m { w1 = z^2; w2 = zbar^3; }"), 1e-3, 0.5).unwrap();
        assert_eq!(c.records[0].roots.len(), 4);
        assert!(c.records[0].roots.iter().all(|r| r.sign == -1));
        assert_eq!(c.total_signed, -4);
    }

    #[test]
    fn census_iterated() {
        let m = mw("disk it { w1 = z^4; w2 = z^6 + z^7; }");
        let c = numeric_census(&m, 1e-4, 1.0).unwrap();
        let counts: Vec<usize> = c.records.iter().map(|r| r.roots.len()).collect();
        assert_eq!(counts, vec![5, 6, 5]);
        assert_eq!(c.total_signed, 16);
        let x = crosscheck(4, 19, &c, &gcd_cascade(&m));
        assert_eq!(x.verdict, Verdict::Pass);
        assert_eq!(x.sl_prop6_matches, SlMatch::None);
    }

    #[test]
    fn crosscheck_trefoil_reports_conventions() {
        let m = mw("disk t { w1 = z^2; w2 = z^3; }");
        let c = numeric_census(&m, 1e-3, 0.5).unwrap();
        let x = crosscheck(2, 3, &c, &gcd_cascade(&m));
        assert_eq!((x.e_diagram, x.e_census, x.e_prop6), (3, 3, 3));
        assert_eq!((x.sl_paper, x.sl_std, x.sl_prop6), (-1, 1, 2));
        assert_eq!(x.verdict, Verdict::Pass);
        assert_eq!(crosscheck(2, 5, &c, &gcd_cascade(&m)).verdict, Verdict::Fail);
    }

    #[test]
    fn default_lambda_keeps_roots_inside() {
        let m = mw("disk it { w1 = z^4; w2 = z^6 + z^7; }");
        let l = default_lambda(&m, 1.0);
        assert!(l <= 1e-3);
        let c = numeric_census(&m, l, 1.0).unwrap();
        assert_eq!(c.total_signed, 16);
    }

    #[test]
    fn root_counts_stable_over_two_decades() {
        let m = mw("disk t { w1 = z^3; w2 = z^4 + 0.5*zbar^5; }");
        for lambda in [1e-3, 1e-4, 1e-5] {
            let c = numeric_census(&m, lambda, 0.5).unwrap();
            let counts: Vec<usize> = c.records.iter().map(|r| r.roots.len()).collect();
            assert_eq!(counts, vec![3, 3]);
            assert_eq!(c.total_signed, gcd_cascade(&m).sl_prop6);
        }
    }

    fn arb_form() -> impl Strategy<Value = MwForm> {
        (2u32..=12, proptest::collection::vec((1u32..=18, any::<bool>()), 1..4)).prop_filter_map(
            "coprime",
            |(n, raw)| {
                let mut mus: Vec<(u32, bool)> = raw.into_iter().map(|(d, h)| (n + d, h)).collect();
                mus.sort();
                mus.dedup_by_key(|x| x.0);
                let g = mus.iter().fold(n, |g, &(m, _)| gcd(g, m));
                (g == 1).then(|| MwForm {
                    n,
                    stages: mus
                        .into_iter()
                        .map(|(mu, h)| MwStage {
                            mu,
                            coeff: Complex64::new(1.0, 0.0),
                            kind: if h { StageKind::Holo } else { StageKind::Antiholo },
                        })
                        .collect(),
                })
            },
        )
    }

    proptest! {
        #[test]
        fn classes_partition_roots(m in arb_form()) {
            let cas = gcd_cascade(&m);
            let classes = root_classes(&m);
            prop_assert_eq!(*cas.q.last().unwrap(), 1);
            let mut all: Vec<u32> = Vec::new();
            for (j, c) in classes.iter().enumerate() {
                prop_assert_eq!(c.len() as u32, cas.q[j] - cas.q[j + 1]);
                all.extend(c.iter().map(|nu| nu.k));
            }
            all.sort();
            prop_assert_eq!(all, (1..m.n).collect::<Vec<_>>());
        }

        #[test]
        fn sl_prop6_is_sum_of_expected_root_counts(m in arb_form()) {
            // For nu in R_j the leading stage is mu_j, contributing +(mu_j - 1) or -(mu_j + 1).
            let expected: i64 = (1..m.n)
                .map(|k| {
                    let nu = RootOfUnity { k, n: m.n };
                    let s = m.stages.iter().find(|s| !nu.pow_is_one(s.mu)).unwrap();
                    match s.kind { StageKind::Holo => s.mu as i64 - 1, StageKind::Antiholo => -(s.mu as i64 + 1) }
                })
                .sum();
            prop_assert_eq!(gcd_cascade(&m).sl_prop6, expected);
        }
    }
}
