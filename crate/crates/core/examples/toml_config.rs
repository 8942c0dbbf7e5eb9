//! Driving a run from a TOML document, the same path the `fhn-ap` binary
//! takes.
//!
//! ```text
//! cargo run --release --example toml_config
//! ```

use fhn_ap::cli::{execute, RunConfig};

const CONFIG: &str = r#"
experiment = "accuracy-sweep"

[grid]
n_x = 64

[model]
reaction = "linear"
alpha = 0.001

[scheme]
name = "hsdirk2"
t_end = 2.0

[sweep]
dt = [0.04, 0.02, 0.01]
"#;

fn main() -> fhn_ap::Result<()> {
    let dir = std::env::temp_dir().join("fhn-ap-toml-example");
    let plan = RunConfig::parse(CONFIG)?.resolve()?.with_output(Some(dir.clone()));
    execute(&plan, false, &mut std::io::stdout())?;
    println!("report written to {}", dir.join("report.csv").display());
    Ok(())
}
