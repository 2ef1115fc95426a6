// The crossing count does not depend on the braid axis, nor on the radius of
// the sphere, as long as the link is a closed braid about the axis.

use std::error::Error;

use singlink::braid::{accepted_axes, algebraic_crossing_number, build_diagram_with_retry};
use singlink::diskspec::parse_config;
use singlink::tracer::{trace_link, TraceOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config(
        "disk t  { w1 = z^2; w2 = z^3; }
         disk it { w1 = z^4; w2 = z^6 + z^7; }
         disk k  { w1 = z^3; w2 = z^4 + 0.5*zbar^5; }",
    )?;
    for d in &cfg.disks {
        for eps in [1e-2, 5e-3] {
            let lp = trace_link(d, eps, &TraceOptions::default())?;
            let loops = std::slice::from_ref(&lp);
            let axes = accepted_axes(loops)?;
            let mut counts = Vec::new();
            for axis in &axes {
                let diagram = build_diagram_with_retry(loops, axis)?;
                counts.push((axis, algebraic_crossing_number(&diagram, 0), diagram.word.letters.len()));
            }
            println!("disk {} at eps = {eps:e}: {} accepted axes", d.label, axes.len());
            // Best, median and worst margins.
            for i in [0, counts.len() / 2, counts.len() - 1] {
                let (axis, e, len) = &counts[i];
                println!("  {:<30} margin {:.3}  e = {e:>3}  ({len} crossings)", axis.kind.to_string(), axis.margin);
            }
            if counts.windows(2).any(|w| w[0].1 != w[1].1) {
                return Err(format!("e depends on the axis for disk {}", d.label).into());
            }
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
