// The full pipeline on a configuration file, with the versioned JSON report.

use std::error::Error;

use singlink::analysis::{analyze, to_json, RunConfig};
use singlink::diskspec::parse_config_named;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/iterated.sing");
    let cfg = parse_config_named(&std::fs::read_to_string(path)?, "iterated")?;
    let a = analyze(&cfg, &RunConfig::default())?;
    let json = to_json(&a.report);
    println!("{json}");

    // The report is deterministic: a second run serializes to the same bytes.
    let again = to_json(&analyze(&cfg, &RunConfig::default())?.report);
    if again != json {
        return Err("JSON report changed between runs".into());
    }

    let v: serde_json::Value = serde_json::from_str(&json)?;
    println!("schema {}, e = {}, E = {}, verdict {}", v["schema"], v["components"][0]["e"], v["E"], v["verdict"]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
