// Trace the link of a branch point: the curve f(D) ∩ S_ε, sampled on a uniform
// angle grid. Both tracing modes should agree.

use std::error::Error;

use singlink::diskspec::parse_config;
use singlink::tracer::{
    radial_regularity_radius, sphere_residual, trace_link, transversality_margin, TraceMode, TraceOptions,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config("disk t { w1 = z^2; w2 = z^3; } disk it { w1 = z^4; w2 = z^6 + z^7; }")?;
    for d in &cfg.disks {
        let rho = radial_regularity_radius(d, 1.0)?;
        println!("disk {}: |f| increases radially up to |z| = {rho:.3}", d.label);
        for eps in [1e-2, 1e-3] {
            let cont = trace_link(d, eps, &TraceOptions::default())?;
            let multi = trace_link(d, eps, &TraceOptions { mode: TraceMode::MultiSeed, ..Default::default() })?;
            let gap = cont.samples.iter().zip(&multi.samples).map(|(a, b)| (a.r - b.r).abs() / a.r).fold(0.0, f64::max);
            let (rmin, rmax) =
                cont.samples.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.r), hi.max(s.r)));
            println!(
                "  eps = {eps:e}: {} samples, r in [{rmin:.5}, {rmax:.5}], |q| - eps <= {:.1e}, transversality {:.3}, modes differ by {gap:.1e}",
                cont.len(),
                sphere_residual(&cont),
                transversality_margin(&cont),
            );
            if gap > 1e-9 {
                return Err("continuation and multi-seed traces disagree".into());
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
