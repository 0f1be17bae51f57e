//! Writes a configuration file and runs the `soliton` and `verify`
//! subcommands through the library entry point.

use airy_flow::cli::{run_from, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("airyflow-example");
    std::fs::create_dir_all(&dir)?;
    let cfg = RunConfig { samples: 512, t_final: 0.2, output_dir: dir.join("out"), ..RunConfig::default() };
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg)?)?;
    for cmd in ["soliton", "verify"] {
        let code = run_from(["airyflow", cmd, "--config", path.to_str().unwrap()]);
        println!("{cmd}: exit {code}");
    }
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(())
}
