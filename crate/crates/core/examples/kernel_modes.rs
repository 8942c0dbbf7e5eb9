//! Fourier modes of the connectivity kernel against their small-`eps` expansion.
//!
//! ```text
//! cargo run --release --example kernel_modes
//! ```

use fhn_ap::kernel::{compute_modes, ConnectivityKernel};
use fhn_ap::spectral::Grid;

fn main() -> fhn_ap::Result<()> {
    let grid = Grid::with_domain(1, 64, -15.0, 15.0)?;
    for kernel in [
        ConnectivityKernel::gaussian(0.005, 1)?,
        ConnectivityKernel::compact_indicator(0.5, 1)?,
    ] {
        let moments = kernel.moments()?;
        println!("{}: psi_bar = {:.6}, sigma_bar = {:.3e}", kernel.label(), moments.psi_bar, moments.sigma_bar);
        for eps in [1.0, 0.1] {
            let modes = compute_modes(&kernel, &grid, eps)?;
            let et = modes.eps_torus();
            println!("  eps = {eps}");
            println!("  {:>4} {:>14} {:>14} {:>10}", "k", "mode", "expansion", "diff");
            for idx in [0usize, 1, 2, 4, 8, 16] {
                let k = grid.axis_wavenumber(idx) as f64;
                let exact = modes.multipliers()[idx];
                let expansion = moments.psi_bar - et * et * moments.sigma_bar * k * k;
                println!("  {k:>4} {exact:>14.8} {expansion:>14.8} {:>10.2e}", exact - expansion);
            }
        }
    }
    Ok(())
}
