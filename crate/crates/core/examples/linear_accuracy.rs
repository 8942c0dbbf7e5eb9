//! Time-step convergence of both kinetic schemes on the linear test, measured
//! against the per-mode exact solution.
//!
//! ```text
//! cargo run --release --example linear_accuracy
//! ```

use fhn_ap::experiments::{run_accuracy_sweep, RunSetup};
use fhn_ap::timestepping::SchemeKind;

fn main() -> fhn_ap::Result<()> {
    let dts = [2e-2, 1e-2, 5e-3, 2e-3, 1e-3];
    for scheme in [SchemeKind::Rk1, SchemeKind::Hsdirk2] {
        let setup = RunSetup::linear_accuracy(scheme)?;
        let report = run_accuracy_sweep(&setup, &dts, None)?;
        println!("{report}");
        println!("fitted slope: {:.3}\n", report.fitted_slope()?);
    }
    Ok(())
}
