// Linking numbers two ways: the Gauss integral between components, and the
// self-linking of each component with a push-off along a constant normal field.

use std::error::Error;

use singlink::diskspec::parse_config;
use singlink::invariants::{gauss_linking, pushoff_crossing_number, singularity_e};
use singlink::tracer::{trace_link, DiskMap, TraceOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Two transverse complex lines: the Hopf link.
    let hopf =
        parse_config("disk a { w1 = z; w2 = 0; } disk b { w1 = z; w2 = 0; frame = rot(1,3,90) * rot(2,4,90); }")?;
    let loops =
        hopf.disks.iter().map(|d| trace_link(d, 0.1, &TraceOptions::default())).collect::<Result<Vec<_>, _>>()?;
    let lk = gauss_linking(&loops[0], &loops[1])?;
    println!(
        "Hopf: lk = {} (residual {:.1e}, {:?}); reversing one component gives {}",
        lk.value,
        lk.residual,
        lk.method,
        gauss_linking(&loops[0].reversed(), &loops[1])?.value
    );
    let e = singularity_e(&[0, 0], &[vec![0, lk.value], vec![lk.value, 0]]);
    println!("      E = e_a + e_b + 2 lk = {e}");

    // Self-linking with a push-off equals the algebraic crossing number of the braid.
    let knots = parse_config(
        "disk t { w1 = z^2; w2 = z^3; }
         disk m { w1 = z^2; w2 = zbar^3; }
         disk c { w1 = z^3; w2 = z^4; }
         disk k { w1 = z^3; w2 = z^4 + 0.5*zbar^5; }",
    )?;
    for d in &knots.disks {
        let lp = trace_link(d, 1e-2, &TraceOptions::default())?;
        let p = pushoff_crossing_number(&DiskMap::new(d), &lp)?;
        println!(
            "disk {} ({}, {}): push-off linking {:>3}   offset {:.1e}, residual {:.1e}, {:?}",
            d.label, d.w1, d.w2, p.value, p.delta, p.linking.residual, p.linking.method
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
