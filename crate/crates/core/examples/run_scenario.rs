//! Run a scenario file or built-in demo and write its outputs.
//!
//! cargo run --example run_scenario -- ghost-diffraction /tmp/ghost

use std::path::PathBuf;

use twophoton::scenarios::{self, RunOptions};

fn main() -> twophoton::Result<()> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "ghost-diffraction".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("out/{which}")));
    let scenario = match std::fs::read_to_string(&which) {
        Ok(text) => scenarios::parse_scenario(&text)?,
        Err(_) => scenarios::demo(&which)?,
    };
    let summary = scenarios::run_scenario(&scenario, &out, &RunOptions::default())?;
    for (k, v) in &summary.metrics {
        println!("{k:<48} {v:.6e}");
    }
    println!("wrote {} items to {} in {:.2?}", summary.files.len(), out.display(), summary.duration);
    Ok(())
}
