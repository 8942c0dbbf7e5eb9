//! Radial connectivity kernels, their moments, and the Fourier modes of the
//! scaled kernel `Psi_eps(y) = Psi(|y| / eps) / eps^d` on a periodic grid.
//!
//! Modes are computed from the radial formula
//!
//! ```text
//! (2 pi)^d Psi_hat_eps(k) = int_0^{pi/eps} Psi(s) s^(d-1) I(|k|, eps s) ds
//! ```
//!
//! with `I = 2 cos`, `2 pi J0` or `4 pi sinc` for `d = 1, 2, 3`. Here `eps` is
//! measured in torus units; `compute_modes` takes the physical `eps` and
//! rescales it with the grid.

mod bessel;

pub use bessel::bessel_j0;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{composite, GL_ORDER};
use crate::spectral::Grid;

/// Absolute tolerance on each mode integral.
pub const MODE_TOLERANCE: f64 = 1e-13;

/// Panels of the coarsest composite rule for a mode integral.
pub const MIN_PANELS: usize = 64;

// Refinement doublings tried before giving up on a mode.
const MAX_DOUBLINGS: u32 = 6;

// exp(-115) is below 1e-49: the Gaussian tail past this many widths is dropped.
const GAUSSIAN_TAIL_EXPONENT: f64 = 115.0;

/// Area of the unit sphere `S^(d-1)`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Volume of the unit ball in dimension `dim`.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

/// `sin(z) / z`, with a Taylor expansion near zero.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Angular integral of `exp(i z e . omega)` over the unit sphere.
pub fn angular_weight(dim: usize, z: f64) -> f64 {
    match dim {
        1 => 2.0 * z.cos(),
        2 => 2.0 * PI * bessel_j0(z.abs()),
        3 => 4.0 * PI * sinc(z),
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// A user-supplied radial profile `r -> Psi(r)`.
///
/// The profile is treated as zero beyond `support`; a finite support is
/// what guarantees a finite fourth moment for custom kernels.
#[derive(Clone)]
pub struct CustomProfile {
    label: String,
    support: f64,
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomProfile {
    pub fn new<F>(label: impl Into<String>, support: f64, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if !(support.is_finite() && support > 0.0) {
            return Err(invalid(format!("custom kernel support must be finite and > 0, got {support}")));
        }
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(invalid(format!("custom kernel label must be a non-empty [A-Za-z0-9_-] word, got {label:?}")));
        }
        Ok(Self {
            label,
            support,
            profile: Arc::new(profile),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> f64 {
        self.support
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum KernelProfile {
    /// `(2 pi sigma0)^(-d/2) exp(-r^2 / (2 sigma0))`, unit mass in every dimension.
    Gaussian { sigma0: f64 },
    /// Indicator of the ball of the given radius, scaled to unit mass.
    CompactIndicator { radius: f64 },
    Custom(CustomProfile),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    /// `int Psi(|y|) dy`.
    pub psi_bar: f64,
    /// `1/2 int Psi(|y|) y_1^2 dy`, the coefficient of `-eps^2 |k|^2` in the
    /// expansion of the modes. Equals `1/(2d) int Psi(|y|) |y|^2 dy`.
    pub sigma_bar: f64,
}

#[derive(Debug, Clone)]
pub struct ConnectivityKernel {
    profile: KernelProfile,
    dim: usize,
}

impl ConnectivityKernel {
    pub fn new(profile: KernelProfile, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("kernel dimension must be 1, 2 or 3, got {dim}")));
        }
        match &profile {
            KernelProfile::Gaussian { sigma0 } if !(sigma0.is_finite() && *sigma0 > 0.0) => {
                return Err(invalid(format!("sigma0 must be > 0, got {sigma0}")));
            }
            KernelProfile::CompactIndicator { radius } if !(radius.is_finite() && *radius > 0.0) => {
                return Err(invalid(format!("indicator radius must be > 0, got {radius}")));
            }
            _ => {}
        }
        let kernel = Self { profile, dim };
        if let KernelProfile::Custom(_) = kernel.profile {
            // surfaces negative or non-integrable profiles early
            kernel.moments()?;
        }
        Ok(kernel)
    }

    pub fn gaussian(sigma0: f64, dim: usize) -> Result<Self> {
        Self::new(KernelProfile::Gaussian { sigma0 }, dim)
    }

    pub fn compact_indicator(radius: f64, dim: usize) -> Result<Self> {
        Self::new(KernelProfile::CompactIndicator { radius }, dim)
    }

    pub fn profile(&self) -> &KernelProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Psi(r)` for `r >= 0`.
    pub fn eval(&self, r: f64) -> f64 {
        match &self.profile {
            KernelProfile::Gaussian { sigma0 } => {
                (2.0 * PI * sigma0).powf(-(self.dim as f64) / 2.0) * (-r * r / (2.0 * sigma0)).exp()
            }
            KernelProfile::CompactIndicator { radius } => {
                if r <= *radius {
                    1.0 / (ball_volume(self.dim) * radius.powi(self.dim as i32))
                } else {
                    0.0
                }
            }
            KernelProfile::Custom(c) => {
                if r <= c.support {
                    (c.profile)(r)
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius past which the profile is zero (or negligible for the Gaussian).
    pub fn support_radius(&self) -> f64 {
        match &self.profile {
            KernelProfile::Gaussian { sigma0 } => (2.0 * GAUSSIAN_TAIL_EXPONENT * sigma0).sqrt(),
            KernelProfile::CompactIndicator { radius } => *radius,
            KernelProfile::Custom(c) => c.support,
        }
    }

    /// Stable identifier used to key cached modes.
    pub fn cache_key(&self) -> String {
        match &self.profile {
            KernelProfile::Gaussian { sigma0 } => format!("gauss-{:016x}", sigma0.to_bits()),
            KernelProfile::CompactIndicator { radius } => format!("ball-{:016x}", radius.to_bits()),
            KernelProfile::Custom(c) => format!("custom-{}-{:016x}", c.label, c.support.to_bits()),
        }
    }

    /// Readable description for reports.
    pub fn label(&self) -> String {
        match &self.profile {
            KernelProfile::Gaussian { sigma0 } => format!("gaussian sigma0={sigma0}"),
            KernelProfile::CompactIndicator { radius } => format!("indicator radius={radius}"),
            KernelProfile::Custom(c) => format!("{} support={}", c.label, c.support),
        }
    }

    pub fn moments(&self) -> Result<KernelMoments> {
        let d = self.dim as f64;
        match &self.profile {
            KernelProfile::Gaussian { sigma0 } => Ok(KernelMoments {
                psi_bar: 1.0,
                sigma_bar: sigma0 / 2.0,
            }),
            KernelProfile::CompactIndicator { radius } => Ok(KernelMoments {
                psi_bar: 1.0,
                sigma_bar: 0.5 / (d + 2.0) * radius * radius,
            }),
            KernelProfile::Custom(c) => self.custom_moments(c),
        }
    }

    fn custom_moments(&self, c: &CustomProfile) -> Result<KernelMoments> {
        let d = self.dim as i32;
        let area = sphere_area(self.dim);
        let probe = composite(|r| (c.profile)(r), 0.0, c.support, 256);
        if !probe.is_finite() {
            return Err(Error::Integration(format!("profile {:?} is not integrable", c.label)));
        }
        for i in 0..=1000 {
            let r = c.support * i as f64 / 1000.0;
            let v = (c.profile)(r);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Integration(format!(
                    "profile {:?} takes the value {v} at r = {r}; kernels must be finite and nonnegative",
                    c.label
                )));
            }
        }
        let radial = |power: i32, panels: usize| {
            area * composite(|r| (c.profile)(r) * r.powi(power), 0.0, c.support, panels)
        };
        let mass = radial(d - 1, 512);
        let per_axis = 0.5 / self.dim as f64;
        let second = per_axis * radial(d + 1, 512);
        let mass_check = radial(d - 1, 1024);
        let second_check = per_axis * radial(d + 1, 1024);
        if !(mass.is_finite() && second.is_finite()) {
            return Err(Error::Integration(format!("profile {:?} has non-finite moments", c.label)));
        }
        let drift = (mass - mass_check).abs().max((second - second_check).abs());
        if drift > 1e-8 * mass.abs().max(second.abs()).max(1e-300) {
            return Err(Error::Integration(format!(
                "moments of profile {:?} did not converge (refinement drift {drift:e})",
                c.label
            )));
        }
        if !(mass > 0.0 && second > 0.0) {
            return Err(Error::Integration(format!(
                "profile {:?} must have positive mass and second moment, got {mass} and {second}",
                c.label
            )));
        }
        Ok(KernelMoments {
            psi_bar: mass,
            sigma_bar: second,
        })
    }

    /// `(2 pi)^d Psi_hat_eps(k)` for a torus wavenumber norm and torus `eps`.
    pub fn mode_multiplier(&self, k_norm: f64, eps: f64) -> Result<f64> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(invalid(format!("eps must be > 0, got {eps}")));
        }
        let upper = (PI / eps).min(self.support_radius());
        let dim = self.dim;
        let integrand = |s: f64| self.eval(s) * s.powi(dim as i32 - 1) * angular_weight(dim, k_norm * eps * s);
        let periods = eps * upper * k_norm / (2.0 * PI);
        let mut panels = MIN_PANELS.max((8.0 * periods).ceil() as usize);
        let mut coarse = composite(integrand, 0.0, upper, panels);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_DOUBLINGS {
            panels *= 2;
            let fine = composite(integrand, 0.0, upper, panels);
            residual = (fine - coarse).abs();
            if residual <= MODE_TOLERANCE {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(Error::Quadrature { k_norm, residual })
    }
}

/// `(2 pi)^d Psi_hat_eps(k)` for every mode of a grid, stored in FFT layout.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModes {
    dim: usize,
    n: usize,
    length: f64,
    eps: f64,
    eps_torus: f64,
    multipliers: Vec<f64>,
}

impl KernelModes {
    pub(crate) fn from_multipliers(grid: &Grid, eps: f64, multipliers: Vec<f64>) -> Result<Self> {
        if multipliers.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} mode values for a grid of {} modes",
                multipliers.len(),
                grid.len()
            )));
        }
        Ok(Self {
            dim: grid.dim(),
            n: grid.n(),
            length: grid.length(),
            eps,
            eps_torus: eps * grid.scale(),
            multipliers,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Physical interaction scale.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Interaction scale measured on the `[-pi, pi)` torus.
    pub fn eps_torus(&self) -> f64 {
        self.eps_torus
    }

    /// `(2 pi)^d Psi_hat_eps(k)` per FFT-ordered mode index.
    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    /// `Psi_hat_eps(k)` per FFT-ordered mode index.
    pub fn values(&self) -> Vec<f64> {
        let norm = (2.0 * PI).powi(self.dim as i32);
        self.multipliers.iter().map(|m| m / norm).collect()
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() == self.dim && grid.n() == self.n && grid.length() == self.length {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "modes built for d={}, n_x={}, length={} used on {:?}",
                self.dim, self.n, self.length, grid
            )))
        }
    }
}

/// Evaluates the mode integral once per distinct `|k|^2` and spreads the
/// values over the grid.
pub fn compute_modes(kernel: &ConnectivityKernel, grid: &Grid, eps: f64) -> Result<KernelModes> {
    if kernel.dim() != grid.dim() {
        return Err(invalid(format!(
            "kernel dimension {} does not match grid dimension {}",
            kernel.dim(),
            grid.dim()
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid(format!("eps must be > 0, got {eps}")));
    }
    let eps_torus = eps * grid.scale();
    let mut norms: Vec<i64> = (0..grid.len()).map(|i| grid.k_norm_sq(i)).collect();
    let by_index = norms.clone();
    norms.sort_unstable();
    norms.dedup();
    let values = norms
        .par_iter()
        .map(|&k2| kernel.mode_multiplier((k2 as f64).sqrt(), eps_torus))
        .collect::<Vec<Result<f64>>>();
    let mut table = Vec::with_capacity(values.len());
    let mut worst: Option<(f64, f64)> = None;
    for v in values {
        match v {
            Ok(x) => table.push(x),
            Err(Error::Quadrature { k_norm, residual }) => {
                if worst.is_none_or(|(_, r)| residual > r) {
                    worst = Some((k_norm, residual));
                }
                table.push(f64::NAN);
            }
            Err(e) => return Err(e),
        }
    }
    if let Some((k_norm, residual)) = worst {
        return Err(Error::Quadrature { k_norm, residual });
    }
    let multipliers = by_index
        .iter()
        .map(|k2| table[norms.binary_search(k2).expect("norm present")])
        .collect();
    KernelModes::from_multipliers(grid, eps, multipliers)
}

/// Points of the quadrature rule used for one coarse mode integral.
pub fn coarse_rule_points(kernel: &ConnectivityKernel, k_norm: f64, eps_torus: f64) -> usize {
    let upper = (PI / eps_torus).min(kernel.support_radius());
    let periods = eps_torus * upper * k_norm / (2.0 * PI);
    MIN_PANELS.max((8.0 * periods).ceil() as usize) * GL_ORDER
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::loglog_slope;

    #[test]
    fn gaussian_moments() {
        for d in 1..=3 {
            let k = ConnectivityKernel::gaussian(0.005, d).unwrap();
            let m = k.moments().unwrap();
            assert_eq!(m.psi_bar, 1.0);
            assert_eq!(m.sigma_bar, 0.0025);
        }
    }

    #[test]
    fn builtin_moments_match_quadrature() {
        for d in 1..=3 {
            for kernel in [
                ConnectivityKernel::gaussian(0.02, d).unwrap(),
                ConnectivityKernel::compact_indicator(0.7, d).unwrap(),
            ] {
                let m = kernel.moments().unwrap();
                let area = sphere_area(d);
                let r = kernel.support_radius();
                let mass = area * composite(|s| kernel.eval(s) * s.powi(d as i32 - 1), 0.0, r, 400);
                let second = 0.5 / d as f64 * area * composite(|s| kernel.eval(s) * s.powi(d as i32 + 1), 0.0, r, 400);
                assert!((mass - m.psi_bar).abs() < 1e-12, "d={d} mass {mass}");
                assert!((second - m.sigma_bar).abs() < 1e-12, "d={d} second {second}");
            }
        }
    }

    #[test]
    fn custom_kernel_moments() {
        // 1D tent of unit mass: Psi(r) = 1 - r on [0, 1]
        let tent = CustomProfile::new("tent", 1.0, |r| 1.0 - r).unwrap();
        let k = ConnectivityKernel::new(KernelProfile::Custom(tent), 1).unwrap();
        let m = k.moments().unwrap();
        assert!((m.psi_bar - 1.0).abs() < 1e-13);
        assert!((m.sigma_bar - 1.0 / 12.0).abs() < 1e-13);

        let negative = CustomProfile::new("neg", 1.0, |r| r - 0.5).unwrap();
        assert!(matches!(
            ConnectivityKernel::new(KernelProfile::Custom(negative), 1),
            Err(Error::Integration(_))
        ));
        let singular = CustomProfile::new("sing", 1.0, |r| 1.0 / r).unwrap();
        assert!(matches!(
            ConnectivityKernel::new(KernelProfile::Custom(singular), 1),
            Err(Error::Integration(_))
        ));
    }

    #[test]
    fn angular_weight_values() {
        assert!((angular_weight(3, 0.0) - 4.0 * PI).abs() < 1e-15);
        assert!((angular_weight(1, PI) + 2.0).abs() < 1e-15);
        assert!((angular_weight(2, 1.0) - 2.0 * PI * 0.765197686557967).abs() < 1e-13);
        // Taylor branch joins the direct formula
        let z = 0.99e-4;
        assert!((sinc(z) - z.sin() / z).abs() < 4e-16);
    }

    #[test]
    fn zero_mode_is_kernel_mass() {
        for d in 1..=3 {
            let k = ConnectivityKernel::gaussian(0.005, d).unwrap();
            let m0 = k.mode_multiplier(0.0, 0.1).unwrap();
            assert!((m0 - 1.0).abs() < 1e-13, "d={d}: {m0}");
        }
    }

    #[test]
    fn mode_matches_brute_force_trapezoid() {
        let k = ConnectivityKernel::gaussian(0.005, 1).unwrap();
        let eps = 0.1;
        let m = k.mode_multiplier(1.0, eps).unwrap();
        let b = PI / eps;
        let n = 1_000_000;
        let h = b / n as f64;
        let f = |s: f64| k.eval(s) * 2.0 * (eps * s).cos();
        let mut sum = 0.5 * (f(0.0) + f(b));
        for i in 1..n {
            sum += f(i as f64 * h);
        }
        assert!((m - sum * h).abs() < 1e-10, "{m} vs {}", sum * h);
    }

    #[test]
    fn residual_decays_like_eps_to_the_fourth() {
        let eps = [0.2, 0.1, 0.05, 0.025];
        for d in 1..=3 {
            let k = ConnectivityKernel::gaussian(0.005, d).unwrap();
            let m = k.moments().unwrap();
            for kn in [1.0f64, 4.0] {
                let res: Vec<f64> = eps
                    .iter()
                    .map(|&e| {
                        (k.mode_multiplier(kn, e).unwrap() - m.psi_bar + m.sigma_bar * e * e * kn * kn).abs()
                    })
                    .collect();
                let slope = loglog_slope(&eps, &res).unwrap();
                assert!((slope - 4.0).abs() < 0.3, "d={d} |k|={kn}: slope {slope}, {res:?}");
            }
        }
    }

    #[test]
    fn modes_are_radially_symmetric() {
        let grid = Grid::new(2, 16).unwrap();
        let k = ConnectivityKernel::gaussian(0.005, 2).unwrap();
        let modes = compute_modes(&k, &grid, 0.3).unwrap();
        let m = modes.multipliers();
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                if grid.k_norm_sq(i) == grid.k_norm_sq(j) {
                    assert_eq!(m[i], m[j]);
                }
            }
        }
        // (3, 4) and (5, 0) share |k| = 5
        let a = grid.linear_index(&[3, 4]);
        let b = grid.linear_index(&[5, 0]);
        assert_eq!(m[a], m[b]);
    }

    #[test]
    fn refinement_changes_modes_below_tolerance() {
        let k = ConnectivityKernel::gaussian(0.005, 2).unwrap();
        for kn in [1.0, 7.0, 30.0] {
            let eps = 0.2;
            let upper = (PI / eps).min(k.support_radius());
            let f = |s: f64| k.eval(s) * s * angular_weight(2, kn * eps * s);
            let panels = coarse_rule_points(&k, kn, eps) / GL_ORDER;
            let a = composite(f, 0.0, upper, panels);
            let b = composite(f, 0.0, upper, 4 * panels);
            assert!((a - b).abs() < MODE_TOLERANCE);
            assert!((k.mode_multiplier(kn, eps).unwrap() - b).abs() < MODE_TOLERANCE);
        }
    }

    #[test]
    fn indicator_modes_match_closed_form() {
        // 1D: int_{-R}^{R} e^{i k eps y} dy / (2R) = sinc(k eps R)
        let r = 0.5;
        let k = ConnectivityKernel::compact_indicator(r, 1).unwrap();
        for kn in [0.0, 1.0, 3.0, 10.0] {
            let m = k.mode_multiplier(kn, 0.3).unwrap();
            assert!((m - sinc(kn * 0.3 * r)).abs() < 1e-13);
        }
    }

    #[test]
    fn physical_rescaling() {
        // on a box of length 2 pi * 5 the torus eps is eps / 5
        let grid = Grid::with_domain(1, 32, -5.0 * PI, 5.0 * PI).unwrap();
        let k = ConnectivityKernel::gaussian(0.005, 1).unwrap();
        let modes = compute_modes(&k, &grid, 1.0).unwrap();
        assert!((modes.eps_torus() - 0.2).abs() < 1e-15);
        let direct = k.mode_multiplier(3.0, 0.2).unwrap();
        assert_eq!(modes.multipliers()[3], direct);
        assert!(compute_modes(&k, &Grid::new(2, 8).unwrap(), 1.0).is_err());
    }
}
