//! A broken front in a disk, probed at one point to count the passing waves.
//!
//! ```text
//! cargo run --release --example spiral_wave -- [eps] [t_end] [particles]
//! ```

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

use fhn_ap::experiments::{count_oscillations, run_field_experiment, FieldOptions, RunSetup};

fn main() -> fhn_ap::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(0.5, |s| s.parse().expect("eps must be a number"));
    let t_end: f64 = args.next().map_or(100.0, |s| s.parse().expect("t_end must be a number"));
    let mut setup = RunSetup::spiral(eps)?;
    setup.t_end = t_end;
    if let Some(m) = args.next() {
        setup.m = m.parse().expect("particles must be an integer");
    }
    let options = FieldOptions {
        probes: vec![vec![-6.0, 3.0]],
        sample_every: 1.0,
        progress_every: 1000,
        ..Default::default()
    };
    let run = run_field_experiment(&setup, &options, None, |p| {
        eprintln!("t = {:>7.2}  max|V| = {:.3}  ({:.1?})", p.time, p.max_abs_v, p.wall)
    })?;
    let samples = &run.probes[0].samples;
    for (t, v) in samples.iter().step_by(10) {
        println!("{t:>8.1} {v:>8.4}");
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    println!("probe range [{lo:.3}, {hi:.3}], {} oscillations", count_oscillations(samples));
    Ok(())
}
