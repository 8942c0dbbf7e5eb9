//! Distance between kinetic runs and the limit run as `eps` shrinks, with the
//! pulse speed of each run.
//!
//! ```text
//! cargo run --release --example entropy_sweep -- [t_end]
//! ```

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

use fhn_ap::experiments::{run_entropy_sweep, RunSetup};
use fhn_ap::timestepping::SchemeKind;

fn main() -> fhn_ap::Result<()> {
    let t_end = std::env::args().nth(1).map_or(Ok(50.0), |s| s.parse()).expect("t_end must be a number");
    let mut setup = RunSetup::excitable_1d(SchemeKind::Rk1, 1.0)?;
    setup.t_end = t_end;
    let report = run_entropy_sweep(&setup, &[0.1, 0.05, 0.02, 0.01], None)?;
    println!("{report}");
    println!("fitted slope in eps: {:.3}", report.fitted_slope()?);
    Ok(())
}
