//! A box of excited tissue in 1D splits into two pulses moving apart at
//! `eps = 1`; a wider kernel lets the same data decay.
//!
//! ```text
//! cargo run --release --example excitable_pulses -- [eps]
//! ```

use fhn_ap::diagnostics::front_position;
use fhn_ap::experiments::{run_field_experiment, FieldOptions, RunSetup, FRONT_LEVEL};
use fhn_ap::spectral::Field;
use fhn_ap::timestepping::SchemeKind;

fn sparkline(v: &Field) -> String {
    const LEVELS: &[u8] = b" .:-=+*#%@";
    v.values()
        .iter()
        .step_by(8)
        .map(|&x| {
            let i = ((x + 0.4) / 1.4 * (LEVELS.len() - 1) as f64).round();
            LEVELS[i.clamp(0.0, (LEVELS.len() - 1) as f64) as usize] as char
        })
        .collect()
}

fn main() -> fhn_ap::Result<()> {
    let eps = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse()).expect("eps must be a number");
    let mut setup = RunSetup::excitable_1d(SchemeKind::Rk1, eps)?;
    setup.t_end = 200.0;
    let options = FieldOptions {
        snapshot_times: vec![0.0, 25.0, 50.0, 100.0, 150.0, 200.0],
        ..Default::default()
    };
    let run = run_field_experiment(&setup, &options, None, |_| {})?;
    for (t, v) in &run.snapshots {
        let front = front_position(v, FRONT_LEVEL).map_or("-".to_string(), |x| format!("{x:.2}"));
        println!("t={t:>5} |{}| front {front}", sparkline(v));
    }
    println!("final max|V| = {:.3e} in {:.1?}", run.max_abs.last().unwrap().1, run.elapsed);
    Ok(())
}
