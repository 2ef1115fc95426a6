//! End-to-end pipelines and their serializable reports.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::braid::{
    algebraic_crossing_number, build_diagram_with_retry, choose_common_axis, mixed_crossing_sum, BraidDiagram,
    BraidError,
};
use crate::census::{
    crosscheck, default_lambda, dominant_radius, gcd_cascade, numeric_census, root_classes, Cascade, CensusError,
    Crosscheck, DoublePointCensus, Verdict,
};
use crate::diskspec::{
    mw_classify, validate_config, BranchedDisk, DiskError, MwForm, NotMw, ParseError, SingularityConfig, StageKind,
};
use crate::invariants::{
    gauss_linking, pushoff_crossing_number, singularity_e, sl_paper, sl_std, InvariantError, Linking,
};
use crate::tracer::{
    regularity_radius_of, sphere_residual, trace_map, transversality_margin, DiskMap, SampledLoop, TraceError,
    TraceOptions,
};

pub const SCHEMA: &str = "singlink/1";
/// Number of times the sample count is doubled after a resolution failure.
pub const MAX_DOUBLINGS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Disk(#[from] DiskError),
    #[error(transparent)]
    NotMw(#[from] NotMw),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("epsilon = {epsilon} is too large for disk `{label}`: the region known to be free of critical and double points only reaches |f| = {limit:e}")]
    EpsilonTooLarge { label: String, epsilon: f64, limit: f64 },
    #[error("tracing disk `{label}`: {source}")]
    Trace { label: String, source: TraceError },
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Census(#[from] CensusError),
}

impl AnalysisError {
    /// 1 for bad input (including an out-of-range epsilon), 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AnalysisError::Parse(_)
            | AnalysisError::Disk(_)
            | AnalysisError::NotMw(_)
            | AnalysisError::Config(_)
            | AnalysisError::EpsilonTooLarge { .. } => 1,
            _ => 2,
        }
    }

    fn retryable(&self) -> bool {
        matches!(
            self,
            AnalysisError::Braid(
                BraidError::UnresolvedCrossing { .. }
                    | BraidError::TriplePoint { .. }
                    | BraidError::StrandCount { .. }
                    | BraidError::NonIntegerWinding { .. }
            ) | AnalysisError::Invariant(
                InvariantError::NonIntegerLinking { .. } | InvariantError::FramingUnstable { .. }
            ) | AnalysisError::Trace { source: TraceError::LoopNotClosed { .. }, .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub samples: usize,
    /// Relative loop-closure tolerance.
    pub tol: f64,
    /// Census perturbation size; chosen from `r` when absent.
    pub lambda: Option<f64>,
    /// Census radius; defaults to the regularity radius capped at 1, shrunk until the lowest stage dominates.
    pub r: Option<f64>,
    /// Largest radius searched when certifying regularity.
    pub search_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { epsilon: 1e-2, samples: 4096, tol: 1e-10, lambda: None, r: None, search_max: 1.0 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(AnalysisError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.samples < 256 || !self.samples.is_power_of_two() {
            return Err(AnalysisError::Config(format!("samples must be a power of two >= 256, got {}", self.samples)));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return Err(AnalysisError::Config(format!("lambda must be positive, got {l}")));
            }
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return Err(AnalysisError::Config(format!("r must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub label: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub braid_index: u32,
    pub winding_sign: i32,
    pub e: i32,
    pub sl_paper: i32,
    pub sl_std: i32,
    pub braid_word: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusSummary {
    #[serde(rename = "Q")]
    pub q: Vec<u32>,
    pub tau: Vec<i64>,
    pub sl_prop6: i64,
    pub total_signed: i64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margins {
    pub axis: f64,
    pub braid: Vec<f64>,
    pub transversality: Vec<f64>,
    pub crossing_separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub sphere: Vec<f64>,
    pub linking: Vec<Vec<f64>>,
    pub pushoff: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checks {
    /// Diagram crossing count equals push-off linking, per component.
    pub e_pushoff: Vec<i32>,
    /// Half the mixed crossing sum, per pair.
    pub lk_diagram: Vec<Vec<i32>>,
    /// Braid index equals the branching exponent N, per component.
    pub braid_index_matches_n: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub samples: usize,
    pub axis: String,
    pub margins: Margins,
    pub residuals: Residuals,
    pub checks: Checks,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub name: String,
    pub epsilon: f64,
    pub components: Vec<ComponentReport>,
    pub lk: Vec<Vec<i32>>,
    #[serde(rename = "E")]
    pub e_total: i32,
    pub census: Option<CensusSummary>,
    pub diagnostics: Diagnostics,
    pub verdict: Verdict,
}

/// Everything computed by [`analyze`], including the non-serialized diagram.
pub struct Analysis {
    pub report: AnalysisReport,
    pub loops: Vec<SampledLoop>,
    pub diagram: BraidDiagram,
}

impl Analysis {
    pub fn svg(&self) -> String {
        crate::braid::diagram_svg(&self.diagram)
    }
}

/// Largest sphere radius for which the link of `disk` is known to be the local
/// link: `min |f|` over the circle inside which `|f|` increases along rays and,
/// for a Micallef-White disk, `f(z) = f(nu z)` has no solution with `z != 0`.
pub fn epsilon_limit(disk: &BranchedDisk, search_max: f64) -> Result<f64, AnalysisError> {
    let map = DiskMap::new(disk);
    let mut radius = regularity_radius_of(&map, search_max)
        .map_err(|source| AnalysisError::Trace { label: disk.label.clone(), source })?;
    // While the lowest stage dominates P(z) - P(nu z), the disk cannot cross itself.
    if let Ok(m) = mw_classify(disk) {
        radius = dominant_radius(&m, radius);
    }
    Ok((0..256)
        .map(|a| {
            let z = num_complex::Complex64::from_polar(radius, std::f64::consts::TAU * a as f64 / 256.0);
            crate::geom::norm4(&map.point(z))
        })
        .fold(f64::INFINITY, f64::min))
}

fn check_epsilon(disk: &BranchedDisk, eps: f64, search_max: f64) -> Result<(), AnalysisError> {
    let limit = epsilon_limit(disk, search_max)?;
    if eps >= limit {
        return Err(AnalysisError::EpsilonTooLarge { label: disk.label.clone(), epsilon: eps, limit });
    }
    Ok(())
}

fn trace_all(
    maps: &[DiskMap],
    cfg: &SingularityConfig,
    eps: f64,
    opts: &TraceOptions,
) -> Result<Vec<SampledLoop>, AnalysisError> {
    maps.par_iter()
        .zip(cfg.disks.par_iter())
        .map(|(m, d)| {
            trace_map(m, &d.label, eps, opts).map_err(|source| AnalysisError::Trace { label: d.label.clone(), source })
        })
        .collect()
}

struct Attempt {
    loops: Vec<SampledLoop>,
    diagram: BraidDiagram,
    e: Vec<i32>,
    e_pushoff: Vec<i32>,
    pushoff_residuals: Vec<f64>,
    lk: Vec<Vec<Linking>>,
    lk_diagram: Vec<Vec<i32>>,
}

impl Attempt {
    fn consistent(&self) -> bool {
        self.e == self.e_pushoff
            && (0..self.lk.len())
                .all(|i| (0..self.lk.len()).all(|j| i == j || self.lk[i][j].value == self.lk_diagram[i][j]))
    }
}

fn attempt(maps: &[DiskMap], cfg: &SingularityConfig, eps: f64, opts: &TraceOptions) -> Result<Attempt, AnalysisError> {
    let loops = trace_all(maps, cfg, eps, opts)?;
    let axis = choose_common_axis(&loops)?;
    let diagram = build_diagram_with_retry(&loops, &axis)?;
    let k = loops.len();
    let e: Vec<i32> = (0..k).map(|c| algebraic_crossing_number(&diagram, c)).collect();
    let pushoffs = maps
        .par_iter()
        .zip(loops.par_iter())
        .map(|(m, lp)| pushoff_crossing_number(m, lp))
        .collect::<Result<Vec<_>, _>>()?;
    let none = Linking { value: 0, residual: 0.0, method: crate::invariants::LinkingMethod::Midpoint };
    let mut lk = vec![vec![none; k]; k];
    let mut lk_diagram = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let l = gauss_linking(&loops[i], &loops[j])?;
            lk[i][j] = l;
            lk[j][i] = l;
            let d = mixed_crossing_sum(&diagram, i, j) / 2;
            lk_diagram[i][j] = d;
            lk_diagram[j][i] = d;
        }
    }
    Ok(Attempt {
        e_pushoff: pushoffs.iter().map(|p| p.value).collect(),
        pushoff_residuals: pushoffs.iter().map(|p| p.linking.residual).collect(),
        loops,
        diagram,
        e,
        lk,
        lk_diagram,
    })
}

/// Traces every disk and builds the closed-braid diagram, without the push-off
/// and Gauss-integral cross-checks of [`analyze`].
///
/// Resolution failures are retried with doubled samples as in [`analyze`].
pub fn trace_diagram(
    cfg: &SingularityConfig,
    run: &RunConfig,
) -> Result<(Vec<SampledLoop>, BraidDiagram), AnalysisError> {
    run.validate()?;
    validate_config(cfg)?;
    let maps: Vec<DiskMap> = cfg.disks.iter().map(DiskMap::new).collect();
    for d in &cfg.disks {
        check_epsilon(d, run.epsilon, run.search_max)?;
    }
    let mut samples = run.samples;
    for round in 0..=MAX_DOUBLINGS {
        let opts = TraceOptions { n_samples: samples, tol: run.tol, ..TraceOptions::default() };
        let res = trace_all(&maps, cfg, run.epsilon, &opts).and_then(|loops| {
            let axis = choose_common_axis(&loops)?;
            let d = build_diagram_with_retry(&loops, &axis)?;
            Ok((loops, d))
        });
        match res {
            Err(e) if e.retryable() && round < MAX_DOUBLINGS => samples *= 2,
            other => return other,
        }
    }
    unreachable!("the last round returns")
}

fn census_summary(
    m: &MwForm,
    e_diagram: i64,
    lambda: f64,
    r: f64,
) -> Result<(Cascade, DoublePointCensus, Crosscheck), CensusError> {
    let cascade = gcd_cascade(m);
    let census = numeric_census(m, lambda, r)?;
    let check = crosscheck(m.n, e_diagram, &census, &cascade);
    Ok((cascade, census, check))
}

/// Census radius: the given `r`, or the regularity radius capped at 1 and shrunk
/// until the lowest stage dominates every `P(z) - P(nu z)`.
fn census_radius(map: &DiskMap, m: &MwForm, run: &RunConfig) -> Result<f64, AnalysisError> {
    match run.r {
        Some(r) => Ok(r),
        None => {
            let reg = regularity_radius_of(map, run.search_max)
                .map_err(|source| AnalysisError::Trace { label: String::new(), source })?;
            Ok(dominant_radius(m, reg.min(1.0)))
        }
    }
}

/// Full invariant analysis of a configuration.
///
/// Loops that fail to resolve (unresolved crossings, non-integer windings or
/// linking numbers, or disagreement between the independent routes) are re-traced
/// with twice the samples, up to [`MAX_DOUBLINGS`] times.
pub fn analyze(cfg: &SingularityConfig, run: &RunConfig) -> Result<Analysis, AnalysisError> {
    run.validate()?;
    let (classes, warnings) = validate_config(cfg)?;
    let maps: Vec<DiskMap> = cfg.disks.iter().map(DiskMap::new).collect();
    for d in &cfg.disks {
        check_epsilon(d, run.epsilon, run.search_max)?;
    }

    let mut samples = run.samples;
    let mut result = None;
    for round in 0..=MAX_DOUBLINGS {
        let opts = TraceOptions { n_samples: samples, tol: run.tol, ..TraceOptions::default() };
        match attempt(&maps, cfg, run.epsilon, &opts) {
            Ok(a) if a.consistent() || round == MAX_DOUBLINGS => {
                result = Some(a);
                break;
            }
            Ok(a) => result = Some(a),
            Err(e) if e.retryable() && round < MAX_DOUBLINGS => {}
            Err(e) => return Err(e),
        }
        samples *= 2;
    }
    let a = result.expect("at least one attempt ran");
    let samples = a.loops[0].len();

    let k = a.loops.len();
    let d = &a.diagram;
    let components: Vec<ComponentReport> = (0..k)
        .map(|c| {
            let n = d.braid_index(c) as i32;
            ComponentReport {
                label: cfg.disks[c].label.clone(),
                n: classes[c].n,
                braid_index: d.braid_index(c),
                winding_sign: d.windings[c].signum(),
                e: a.e[c],
                sl_paper: sl_paper(n, a.e[c]),
                sl_std: sl_std(n, a.e[c]),
                braid_word: d.component_words[c].letters.clone(),
            }
        })
        .collect();
    let lk: Vec<Vec<i32>> = a.lk.iter().map(|row| row.iter().map(|l| l.value).collect()).collect();
    let e_total = singularity_e(&a.e, &lk);

    let census = if k == 1 {
        match mw_classify(&cfg.disks[0]) {
            Ok(m) => {
                let r = census_radius(&maps[0], &m, run)?;
                let lambda = run.lambda.unwrap_or_else(|| default_lambda(&m, r));
                let (cascade, census, check) = census_summary(&m, a.e[0] as i64, lambda, r)?;
                Some(CensusSummary {
                    q: cascade.q,
                    tau: cascade.tau,
                    sl_prop6: cascade.sl_prop6,
                    total_signed: census.total_signed,
                    verdict: check.verdict,
                })
            }
            Err(_) => None,
        }
    } else {
        None
    };

    let braid_index_matches_n = components.iter().all(|c| c.braid_index == c.n);
    let checks_ok = a.consistent() && braid_index_matches_n;
    let verdict = if checks_ok && census.as_ref().is_none_or(|c| c.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let diagnostics = Diagnostics {
        samples,
        axis: d.axis.kind.to_string(),
        margins: Margins {
            axis: d.axis.margin,
            braid: a.loops.iter().map(|lp| crate::braid::braid_condition_margin(lp, &d.axis).unwrap_or(0.0)).collect(),
            transversality: a.loops.iter().map(transversality_margin).collect(),
            crossing_separation: if d.min_separation.is_finite() { d.min_separation } else { 0.0 },
        },
        residuals: Residuals {
            sphere: a.loops.iter().map(sphere_residual).collect(),
            linking: a.lk.iter().map(|row| row.iter().map(|l| l.residual).collect()).collect(),
            pushoff: a.pushoff_residuals.clone(),
        },
        checks: Checks {
            e_pushoff: a.e_pushoff.clone(),
            lk_diagram: a.lk_diagram.clone(),
            braid_index_matches_n,
            verdict: if checks_ok { Verdict::Pass } else { Verdict::Fail },
        },
        warnings,
        notes: if k > 1 {
            vec!["flagged: lk holds Gauss linking numbers, so a transverse pair of complex lines has lk = 1; \
                  the value ±2 sometimes quoted for such a pair is its contribution 2 lk to E"
                .to_string()]
        } else {
            Vec::new()
        },
    };
    let report = AnalysisReport {
        schema: SCHEMA,
        name: cfg.name.clone(),
        epsilon: run.epsilon,
        components,
        lk,
        e_total,
        census,
        diagnostics,
        verdict,
    };
    Ok(Analysis { report, loops: a.loops, diagram: a.diagram })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub mu: u32,
    pub coeff: [f64; 2],
    pub kind: StageKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskCensusReport {
    pub label: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub stages: Vec<StageReport>,
    pub cascade: Cascade,
    /// `R_j` as lists of `[re, im]`.
    pub classes: Vec<Vec<[f64; 2]>>,
    pub census: DoublePointCensus,
    pub crosscheck: Crosscheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DiskCensusEntry {
    Ok(Box<DiskCensusReport>),
    NotMw { label: String, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub schema: &'static str,
    pub name: String,
    pub disks: Vec<DiskCensusEntry>,
    pub verdict: Verdict,
}

impl CensusReport {
    pub fn all_mw(&self) -> bool {
        self.disks.iter().all(|d| matches!(d, DiskCensusEntry::Ok(_)))
    }
}

fn census_disk(d: &BranchedDisk, m: &MwForm, run: &RunConfig) -> Result<DiskCensusReport, AnalysisError> {
    let single = SingularityConfig { name: String::new(), disks: vec![d.clone()] };
    let e_diagram = analyze(&single, &RunConfig { lambda: None, r: None, ..*run })?.report.components[0].e;
    let map = DiskMap::new(d);
    let r = census_radius(&map, m, run)?;
    let lambda = run.lambda.unwrap_or_else(|| default_lambda(m, r));
    let (cascade, census, crosscheck) = census_summary(m, e_diagram as i64, lambda, r)?;
    Ok(DiskCensusReport {
        label: d.label.clone(),
        n: m.n,
        stages: m
            .stages
            .iter()
            .map(|s| StageReport { mu: s.mu, coeff: [s.coeff.re, s.coeff.im], kind: s.kind })
            .collect(),
        cascade,
        classes: root_classes(m).iter().map(|c| c.iter().map(|nu| [nu.value().re, nu.value().im]).collect()).collect(),
        census,
        crosscheck,
    })
}

/// Cascade, root classes, numeric census and crosscheck for every disk; disks that
/// are not of Micallef–White type are reported as such.
pub fn census_config(cfg: &SingularityConfig, run: &RunConfig) -> Result<CensusReport, AnalysisError> {
    run.validate()?;
    validate_config(cfg)?;
    let mut disks = Vec::with_capacity(cfg.disks.len());
    let mut verdict = Verdict::Pass;
    for d in &cfg.disks {
        match mw_classify(d) {
            Ok(m) => {
                let rep = census_disk(d, &m, run)?;
                if rep.crosscheck.verdict == Verdict::Fail {
                    verdict = Verdict::Fail;
                }
                disks.push(DiskCensusEntry::Ok(Box::new(rep)));
            }
            Err(e) => disks.push(DiskCensusEntry::NotMw { label: d.label.clone(), error: e.to_string() }),
        }
    }
    Ok(CensusReport { schema: SCHEMA, name: cfg.name.clone(), disks, verdict })
}

/// Pretty JSON with a trailing newline; deterministic for identical input.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
