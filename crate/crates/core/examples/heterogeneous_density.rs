//! A planar wave meeting a hole in the neuron density, in 2D. Writes `V`
//! snapshots as binary files and prints the `max |V|` history.
//!
//! ```text
//! cargo run --release --example heterogeneous_density -- [eps] [t_end] [out_dir]
//! ```

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

use std::path::PathBuf;

use fhn_ap::experiments::{run_field_experiment, FieldOptions, RunSetup};
use fhn_ap::io::{snapshot_file_name, write_snapshot};

fn main() -> fhn_ap::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(1.0, |s| s.parse().expect("eps must be a number"));
    let t_end: f64 = args.next().map_or(60.0, |s| s.parse().expect("t_end must be a number"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "hetero-output".into()));

    let mut setup = RunSetup::heterogeneous(eps)?;
    setup.t_end = t_end;
    let options = FieldOptions {
        snapshot_times: (0..=4).map(|i| t_end * i as f64 / 4.0).collect(),
        sample_every: t_end / 20.0,
        progress_every: 500,
        ..Default::default()
    };
    let run = run_field_experiment(&setup, &options, None, |p| {
        eprintln!("t = {:>7.2}  max|V| = {:.3}  ({:.1?})", p.time, p.max_abs_v, p.wall)
    })?;
    std::fs::create_dir_all(&out)?;
    for (t, v) in &run.snapshots {
        write_snapshot(&out.join(snapshot_file_name("v", *t)), v, *t)?;
    }
    for (t, m) in &run.max_abs {
        println!("{t:>8.2} {m:.4}");
    }
    println!("snapshots in {}", out.display());
    Ok(())
}
