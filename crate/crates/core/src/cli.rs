//! The `singlink` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{analyze, census_config, to_json, AnalysisReport, CensusReport, DiskCensusEntry, RunConfig};
use crate::census::Verdict;
use crate::diskspec::{parse_config_named, SingularityConfig};
use crate::invariants::{normal_degree_immersed, normal_degree_thm1, tangent_degree};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_CROSSCHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "singlink",
    version,
    about = "Links, braids and double-point censuses of branch points of surfaces in R^4"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the link of every disk and report its invariants.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write an SVG of the braid diagram here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Gcd cascade, root classes and numeric double-point census per disk.
    Census {
        file: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Perturbation size.
        #[arg(long)]
        lambda: Option<f64>,
        /// Census radius in the disk parameter.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate the degree formulas.
    #[command(subcommand)]
    Formulas(Formula),
}

#[derive(Debug, Args)]
struct NumericArgs {
    /// Radius of the small sphere.
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    /// Samples per loop (power of two, at least 256).
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    /// Relative loop-closure tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Subcommand)]
enum Formula {
    /// chi + sum of branching orders.
    Tangent {
        #[arg(long, allow_hyphen_values = true)]
        chi: i64,
        #[arg(long, value_delimiter = ',', num_args = 0.., allow_hyphen_values = true)]
        orders: Vec<i64>,
    },
    /// Self-intersection minus twice the signed double points.
    NormalImmersed {
        #[arg(long, allow_hyphen_values = true)]
        selfint: i64,
        #[arg(long, allow_hyphen_values = true)]
        dbl: i64,
    },
    /// Self-intersection minus the singularity invariants.
    #[command(name = "normal-thm1")]
    NormalThm1 {
        #[arg(long, allow_hyphen_values = true)]
        selfint: i64,
        #[arg(long = "E", value_delimiter = ',', num_args = 0.., allow_hyphen_values = true)]
        e: Vec<i64>,
    },
}

fn read_config(path: &Path) -> Result<SingularityConfig, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_config_named(&src, &name).map_err(|e| format!("{}:{e}", path.display()))
}

fn write_output(path: &Path, content: &str, out: &mut dyn Write) -> std::io::Result<()> {
    if path.as_os_str() == "-" {
        out.write_all(content.as_bytes())
    } else {
        std::fs::write(path, content)
    }
}

fn word_string(letters: &[i32]) -> String {
    if letters.is_empty() {
        return "1".into();
    }
    letters.iter().map(|&l| if l > 0 { format!("s{l}") } else { format!("s{}^-1", -l) }).collect::<Vec<_>>().join(" ")
}

fn print_analysis(r: &AnalysisReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{} (epsilon = {:e}, {} samples, axis: {})",
        r.name, r.epsilon, r.diagnostics.samples, r.diagnostics.axis
    )?;
    writeln!(
        out,
        "{:<12} {:>3} {:>5} {:>5} {:>5} {:>8} {:>6}  word",
        "component", "N", "index", "sign", "e", "sl(n-e)", "sl(e-n)"
    )?;
    for c in &r.components {
        writeln!(
            out,
            "{:<12} {:>3} {:>5} {:>5} {:>5} {:>8} {:>6}  {}",
            c.label,
            c.n,
            c.braid_index,
            c.winding_sign,
            c.e,
            c.sl_paper,
            c.sl_std,
            word_string(&c.braid_word)
        )?;
    }
    if r.components.len() > 1 {
        writeln!(out, "linking numbers:")?;
        for row in &r.lk {
            writeln!(out, "  {}", row.iter().map(|v| format!("{v:>3}")).collect::<String>())?;
        }
    }
    writeln!(out, "E = {}", r.e_total)?;
    if let Some(c) = &r.census {
        writeln!(
            out,
            "census: Q = {:?}, tau = {:?}, sl_prop6 = {}, signed double-point roots = {} [{}]",
            c.q, c.tau, c.sl_prop6, c.total_signed, c.verdict
        )?;
    }
    for w in &r.diagnostics.warnings {
        writeln!(out, "warning: {w}")?;
    }
    writeln!(out, "crosscheck: {}", r.verdict)
}

fn print_census(r: &CensusReport, out: &mut dyn Write) -> std::io::Result<()> {
    for d in &r.disks {
        match d {
            DiskCensusEntry::Ok(d) => {
                writeln!(out, "disk {} (N = {})", d.label, d.n)?;
                writeln!(out, "  Q = {:?}, tau = {:?}, sl_prop6 = {}", d.cascade.q, d.cascade.tau, d.cascade.sl_prop6)?;
                for (j, c) in d.classes.iter().enumerate() {
                    let vals: Vec<String> = c.iter().map(|v| format!("{:.4}{:+.4}i", v[0], v[1])).collect();
                    writeln!(out, "  R_{j} = {{{}}}", vals.join(", "))?;
                }
                writeln!(out, "  lambda = {:e}, r = {}", d.census.lambda, d.census.r)?;
                for rec in &d.census.records {
                    let signs: i64 = rec.roots.iter().map(|x| x.sign as i64).sum();
                    writeln!(
                        out,
                        "  nu = {:.4}{:+.4}i (class {}): {} roots, signed {}",
                        rec.nu[0],
                        rec.nu[1],
                        rec.class_index,
                        rec.roots.len(),
                        signs
                    )?;
                }
                let x = &d.crosscheck;
                writeln!(
                    out,
                    "  e: diagram {}, (N-1)+census {}, (N-1)+sl_prop6 {} [{}]",
                    x.e_diagram, x.e_census, x.e_prop6, x.verdict
                )?;
                writeln!(
                    out,
                    "  sl: n-e = {}, e-n = {}, sl_prop6 = {} (matches: {:?})",
                    x.sl_paper, x.sl_std, x.sl_prop6, x.sl_prop6_matches
                )?;
            }
            DiskCensusEntry::NotMw { label, error } => writeln!(out, "disk {label}: {error}")?,
        }
    }
    writeln!(out, "crosscheck: {}", r.verdict)
}

fn run_config(n: &NumericArgs, lambda: Option<f64>, r: Option<f64>) -> RunConfig {
    RunConfig { epsilon: n.epsilon, samples: n.samples, tol: n.tol, lambda, r, ..RunConfig::default() }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze { file, numeric, json, svg } => (|| {
            let cfg = read_config(&file).map_err(|e| (EXIT_INPUT, e))?;
            let a = analyze(&cfg, &run_config(&numeric, None, None))
                .map_err(|e| (e.exit_code(), format!("{}: {e}", file.display())))?;
            let io = |e: std::io::Error| (EXIT_INPUT, e.to_string());
            if json.as_deref().is_none_or(|p| p.as_os_str() != "-") {
                print_analysis(&a.report, out).map_err(io)?;
            }
            if let Some(p) = &json {
                write_output(p, &to_json(&a.report), out).map_err(io)?;
            }
            if let Some(p) = &svg {
                write_output(p, &a.svg(), out).map_err(io)?;
            }
            Ok(if a.report.verdict == Verdict::Pass { EXIT_OK } else { EXIT_CROSSCHECK })
        })(),
        Command::Census { file, numeric, lambda, r, json } => (|| {
            let cfg = read_config(&file).map_err(|e| (EXIT_INPUT, e))?;
            let rep = census_config(&cfg, &run_config(&numeric, lambda, r))
                .map_err(|e| (e.exit_code(), format!("{}: {e}", file.display())))?;
            let io = |e: std::io::Error| (EXIT_INPUT, e.to_string());
            if json.as_deref().is_none_or(|p| p.as_os_str() != "-") {
                print_census(&rep, out).map_err(io)?;
            }
            if let Some(p) = &json {
                write_output(p, &to_json(&rep), out).map_err(io)?;
            }
            Ok(if !rep.all_mw() {
                EXIT_INPUT
            } else if rep.verdict == Verdict::Pass {
                EXIT_OK
            } else {
                EXIT_CROSSCHECK
            })
        })(),
        Command::Formulas(f) => {
            let v = match f {
                Formula::Tangent { chi, orders } => tangent_degree(chi, &orders),
                Formula::NormalImmersed { selfint, dbl } => normal_degree_immersed(selfint, dbl),
                Formula::NormalThm1 { selfint, e } => normal_degree_thm1(selfint, &e),
            };
            writeln!(out, "{v}").map(|_| EXIT_OK).map_err(|e| (EXIT_INPUT, e.to_string()))
        }
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
