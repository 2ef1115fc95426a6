// Closed-braid diagrams: choose an axis, read off crossings and the braid word,
// and draw the diagram as SVG.

use std::error::Error;

use singlink::braid::{algebraic_crossing_number, build_diagram_with_retry, choose_common_axis, diagram_svg};
use singlink::diskspec::parse_config;
use singlink::tracer::{trace_link, SampledLoop, TraceOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let out_dir = std::env::temp_dir().join("singlink-examples");
    std::fs::create_dir_all(&out_dir)?;
    let cases = [
        ("trefoil", "disk t { w1 = z^2; w2 = z^3; }"),
        ("mirror", "disk m { w1 = z^2; w2 = zbar^3; }"),
        ("cinquefoil", "disk c { w1 = z^2; w2 = z^5; }"),
        ("hopf", "disk a { w1 = z; w2 = 0; } disk b { w1 = z; w2 = 0; frame = rot(1,3,90) * rot(2,4,90); }"),
    ];
    for (name, src) in cases {
        let cfg = parse_config(src)?;
        let loops = cfg
            .disks
            .iter()
            .map(|d| trace_link(d, 1e-2, &TraceOptions::default()))
            .collect::<Result<Vec<SampledLoop>, _>>()?;
        let axis = choose_common_axis(&loops)?;
        let diagram = build_diagram_with_retry(&loops, &axis)?;
        println!(
            "{name}: axis {} (margin {:.3}), {} strands, word {}",
            axis.kind, axis.margin, diagram.strand_count, diagram.word
        );
        for (c, label) in diagram.labels.iter().enumerate() {
            println!(
                "  {label}: braid index {}, algebraic crossing number {}",
                diagram.braid_index(c),
                algebraic_crossing_number(&diagram, c)
            );
        }
        for x in &diagram.crossings {
            println!(
                "    theta = {:.4}  {} over {}  sign {:+}  slot {}",
                x.theta, diagram.labels[x.loop_over], diagram.labels[x.loop_under], x.sign, x.slot
            );
        }
        let path = out_dir.join(format!("{name}.svg"));
        std::fs::write(&path, diagram_svg(&diagram))?;
        println!("  wrote {}", path.display());
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
