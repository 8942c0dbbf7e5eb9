//! The kinetic scheme at small `eps` next to the limit scheme, showing the
//! uniform step size and the convergence of the macroscopic fields.
//!
//! ```text
//! cargo run --release --example ap_limit
//! ```

use fhn_ap::diagnostics::l2_error;
use fhn_ap::experiments::RunSetup;
use fhn_ap::timestepping::SchemeKind;

fn main() -> fhn_ap::Result<()> {
    let t_end = 20.0;
    let limit = {
        let mut setup = RunSetup::excitable_1d(SchemeKind::LimitRk2, 1.0)?;
        setup.t_end = t_end;
        let mut it = setup.integrator(None)?;
        it.advance_to(t_end)?;
        it.into_state().macro_fields()
    };
    println!("{:>8} {:>12} {:>12}", "eps", "|V - V0|", "|W - W0|");
    for eps in [0.5, 0.1, 0.02, 0.004] {
        let mut setup = RunSetup::excitable_1d(SchemeKind::Hsdirk2, eps)?;
        setup.t_end = t_end;
        let mut it = setup.integrator(None)?;
        it.advance_to(t_end)?;
        let (v, w) = it.into_state().macro_fields();
        println!("{eps:>8} {:>12.3e} {:>12.3e}", l2_error(&v, &limit.0)?, l2_error(&w, &limit.1)?);
    }
    Ok(())
}
