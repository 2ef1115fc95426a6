// Random Micallef–White disks: the diagram count of `e` against the signed
// double-point census and the gcd-cascade closed form.

use std::error::Error;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singlink::analysis::{analyze, RunConfig};
use singlink::census::{crosscheck, default_lambda, dominant_radius, gcd_cascade, numeric_census, Verdict};
use singlink::diskspec::{gcd, MwForm, MwStage, SingularityConfig, StageKind};

/// `N` in 2..=4, one to three stages with exponents up to 9, unit-ish coefficients.
pub fn random_mw_form(rng: &mut ChaCha8Rng) -> MwForm {
    loop {
        let n = rng.gen_range(2..=4u32);
        let mut mus: Vec<u32> = (n + 1..=9).filter(|_| rng.gen_bool(0.35)).take(3).collect();
        if mus.is_empty() {
            mus.push(rng.gen_range(n + 1..=9));
        }
        if mus.iter().fold(n, |g, &m| gcd(g, m)) != 1 {
            continue;
        }
        let stages = mus
            .into_iter()
            .map(|mu| MwStage {
                mu,
                coeff: Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU)),
                kind: if rng.gen_bool(0.5) { StageKind::Holo } else { StageKind::Antiholo },
            })
            .collect();
        return MwForm { n, stages };
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let run = RunConfig { epsilon: 1e-3, ..RunConfig::default() };
    for i in 0..4 {
        let m = random_mw_form(&mut rng);
        let disk = m.to_disk(&format!("r{i}"));
        let cfg = SingularityConfig { name: format!("random{i}"), disks: vec![disk.clone()] };
        let a = analyze(&cfg, &run)?;
        let e = a.report.components[0].e as i64;

        let r = dominant_radius(&m, 0.5);
        let census = numeric_census(&m, default_lambda(&m, r), r)?;
        let x = crosscheck(m.n, e, &census, &gcd_cascade(&m));
        println!(
            "{:<40} e = {:>3}  (N-1)+census = {:>3}  (N-1)+sl_prop6 = {:>3}  {}",
            disk.w2.to_string(),
            e,
            x.e_census,
            x.e_prop6,
            x.verdict
        );
        if x.verdict != Verdict::Pass {
            return Err(format!("crosscheck failed for {}", disk.w2).into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
