// Parse a configuration, classify each disk, and show how bad input is reported.

use std::error::Error;

use singlink::diskspec::{mw_classify, parse_config, validate_config, StageKind};

const SOURCE: &str = "
# a simple branch point and a two-stage cascade
disk t  { w1 = z^2; w2 = z^3; }
disk it { w1 = z^4; w2 = z^6 + z^7; }
disk k  { w1 = z^3; w2 = z^4 + 0.5*zbar^5; frame = rot(1,2,30); }
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config(SOURCE)?;
    let (classes, warnings) = validate_config(&cfg)?;
    for (d, c) in cfg.disks.iter().zip(&classes) {
        print!("disk {:<3} w1 = {:<6} w2 = {:<24} N = {}", d.label, d.w1.to_string(), d.w2.to_string(), c.n);
        match mw_classify(d) {
            Ok(m) => {
                let stages: Vec<String> = m
                    .stages
                    .iter()
                    .map(|s| format!("{}{}", s.mu, if s.kind == StageKind::Holo { "" } else { "*" }))
                    .collect();
                println!("  MW stages [{}]", stages.join(", "));
            }
            Err(e) => println!("  not MW: {e}"),
        }
    }
    for w in warnings {
        println!("warning: {w}");
    }

    // Errors carry a line and column.
    for bad in ["disk x { w1 = z^2 }", "disk y { w1 = z^2; w2 = z^2 + q; }", "disk z { w1 = 0; w2 = z^3; }"] {
        match parse_config(bad).map_err(|e| e.to_string()).and_then(|c| validate_config(&c).map_err(|e| e.to_string()))
        {
            Ok(_) => return Err(format!("{bad:?} should have been rejected").into()),
            Err(e) => println!("{bad:<36} -> {e}"),
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
