// Perturb a Micallef-White disk (z^N, P(z)) to (z^N, P(z) + λz) and count its
// double points, root of unity by root of unity.

use std::error::Error;

use singlink::census::{crosscheck, default_lambda, dominant_radius, gcd_cascade, numeric_census, root_classes};
use singlink::diskspec::{mw_classify, parse_config};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config(
        "disk it { w1 = z^4; w2 = z^6 + z^7; }
         disk m  { w1 = z^2; w2 = zbar^3; }
         disk k  { w1 = z^3; w2 = z^4 + 0.5*zbar^5; }",
    )?;
    // e of each link, as read from its braid diagram (see the braid_diagram example).
    let e_diagram = [19, -3, 8];
    for (d, e) in cfg.disks.iter().zip(e_diagram) {
        let m = mw_classify(d)?;
        let cascade = gcd_cascade(&m);
        println!(
            "disk {}: (z^{}, {})  Q = {:?}  tau = {:?}  sl_prop6 = {}",
            d.label, m.n, d.w2, cascade.q, cascade.tau, cascade.sl_prop6
        );
        for (j, class) in root_classes(&m).iter().enumerate() {
            let ks: Vec<String> = class.iter().map(|nu| format!("e^(2pi i {}/{})", nu.k, nu.n)).collect();
            println!("  R_{j} = {{{}}}", ks.join(", "));
        }

        let r = dominant_radius(&m, 0.5);
        let lambda = default_lambda(&m, r);
        let census = numeric_census(&m, lambda, r)?;
        println!("  lambda = {lambda:.2e}, |z| < {r:.3}, pairing residual {:.1e}", census.pairing_residual);
        for rec in &census.records {
            let signs: String = rec.roots.iter().map(|x| if x.sign > 0 { '+' } else { '-' }).collect();
            println!(
                "    nu = {:+.3}{:+.3}i  class {}  {:>2} roots  {signs}",
                rec.nu[0],
                rec.nu[1],
                rec.class_index,
                rec.roots.len()
            );
        }
        let x = crosscheck(m.n, e, &census, &cascade);
        println!(
            "  {} signed double points; e = {} vs (N-1) + census = {} vs (N-1) + sl_prop6 = {}: {}",
            census.pair_count, x.e_diagram, x.e_census, x.e_prop6, x.verdict
        );
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
