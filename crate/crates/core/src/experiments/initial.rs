//! Initial data: the profiles `(V_0, W_0, rho0)` and the particle spread.

use std::sync::Arc;

use serde::Deserialize;

use crate::error::{invalid, Result};
use crate::particles::{Density, ParticleSpread};
use crate::spectral::{Field, Grid};

/// Default smoothing length of the tanh density edges, physical units.
pub const DEFAULT_EDGE_WIDTH: f64 = 0.25;

/// Box widths of the `(v, w)` spread used by the 2D experiments.
pub const DEFAULT_V_WIDTH: f64 = 10.0;
pub const DEFAULT_W_WIDTH: f64 = 100.0;

/// Closed-form scalar profile on physical coordinates.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `amplitude exp(-rate |x - center|^2)`.
    Gaussian {
        amplitude: f64,
        rate: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `value` on the box `lower < x < upper`, zero elsewhere. `closed[a]`
    /// includes both bounds of axis `a` (missing entries are open).
    /// Infinite bounds are allowed.
    Box {
        value: f64,
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        closed: Vec<bool>,
    },
    /// `1/2 (1 - tanh((|x - center| - radius) / width))`, or its complement
    /// when `outside` is set.
    SmoothBall {
        radius: f64,
        #[serde(default = "default_edge")]
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default)]
        outside: bool,
    },
    Sum {
        terms: Vec<Profile>,
    },
}

fn default_edge() -> f64 {
    DEFAULT_EDGE_WIDTH
}

fn coord(v: &[f64], a: usize) -> f64 {
    v.get(a).copied().unwrap_or(0.0)
}

impl Profile {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Profile::Constant { value } if !value.is_finite() => Err(invalid("constant profile must be finite")),
            Profile::Gaussian { rate, center, .. } => {
                if !(*rate >= 0.0) {
                    return Err(invalid(format!("gaussian rate must be >= 0, got {rate}")));
                }
                check_len("center", center, dim, true)
            }
            Profile::Box { lower, upper, closed, .. } => {
                if closed.len() > dim {
                    return Err(invalid(format!("closed has {} entries, expected at most {dim}", closed.len())));
                }
                check_len("lower", lower, dim, false)?;
                check_len("upper", upper, dim, false)
            }
            Profile::SmoothBall { radius, width, center, .. } => {
                if !(*radius >= 0.0 && *width > 0.0) {
                    return Err(invalid(format!(
                        "smooth ball needs radius >= 0 and width > 0, got ({radius}, {width})"
                    )));
                }
                check_len("center", center, dim, true)
            }
            Profile::Sum { terms } => terms.iter().try_for_each(|t| t.validate(dim)),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Gaussian { amplitude, rate, center } => {
                let r2: f64 = x.iter().enumerate().map(|(a, xa)| (xa - coord(center, a)).powi(2)).sum();
                amplitude * (-rate * r2).exp()
            }
            Profile::Box { value, lower, upper, closed } => {
                let inside = x.iter().enumerate().all(|(a, &xa)| {
                    if closed.get(a).copied().unwrap_or(false) {
                        xa >= lower[a] && xa <= upper[a]
                    } else {
                        xa > lower[a] && xa < upper[a]
                    }
                });
                if inside {
                    *value
                } else {
                    0.0
                }
            }
            Profile::SmoothBall { radius, width, center, outside } => {
                let r = x
                    .iter()
                    .enumerate()
                    .map(|(a, xa)| (xa - coord(center, a)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let t = ((r - radius) / width).tanh();
                if *outside {
                    0.5 * (1.0 + t)
                } else {
                    0.5 * (1.0 - t)
                }
            }
            Profile::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Field {
        Field::from_fn(grid.clone(), |x| self.eval(x))
    }
}

fn check_len(name: &str, v: &[f64], dim: usize, allow_empty: bool) -> Result<()> {
    if (allow_empty && v.is_empty()) || v.len() == dim {
        Ok(())
    } else {
        Err(invalid(format!("{name} has {} coordinates, expected {dim}", v.len())))
    }
}

/// Particle spread as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpreadSpec {
    Dirac,
    Box {
        #[serde(default = "default_v_width")]
        v_width: f64,
        #[serde(default = "default_w_width")]
        w_width: f64,
    },
}

fn default_v_width() -> f64 {
    DEFAULT_V_WIDTH
}

fn default_w_width() -> f64 {
    DEFAULT_W_WIDTH
}

impl From<SpreadSpec> for ParticleSpread {
    fn from(s: SpreadSpec) -> Self {
        match s {
            SpreadSpec::Dirac => ParticleSpread::Dirac,
            SpreadSpec::Box { v_width, w_width } => ParticleSpread::Box { v_width, w_width },
        }
    }
}

/// Named initial data sets plus a free-form variant.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    /// `V_0 = exp(-100 |x|^2)`, `W_0 = 0`, `rho0 = 1`, all particles on `V_0`.
    LinearGaussianBump,
    /// `V_0 = 1` on `[-1, 1]`, `W_0 = 0`, `rho0 = 1`, all particles on `V_0`.
    Box1D,
    /// Planar wave from the left edge into a density with a hole of radius 6.
    Hetero2D { edge_width: f64, spread: ParticleSpread },
    /// Broken front in a disk of radius 12 that curls into a spiral.
    Spiral2D { edge_width: f64, spread: ParticleSpread },
    Custom {
        v0: Profile,
        w0: Profile,
        rho0: Profile,
        spread: ParticleSpread,
    },
}

/// Profiles sampled on a grid.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub density: Density,
    pub v0: Field,
    pub w0: Field,
    pub spread: ParticleSpread,
}

impl InitialDataSpec {
    pub fn hetero_2d() -> Self {
        InitialDataSpec::Hetero2D {
            edge_width: DEFAULT_EDGE_WIDTH,
            spread: ParticleSpread::Box {
                v_width: DEFAULT_V_WIDTH,
                w_width: DEFAULT_W_WIDTH,
            },
        }
    }

    pub fn spiral_2d() -> Self {
        InitialDataSpec::Spiral2D {
            edge_width: DEFAULT_EDGE_WIDTH,
            spread: ParticleSpread::Box {
                v_width: DEFAULT_V_WIDTH,
                w_width: DEFAULT_W_WIDTH,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialDataSpec::LinearGaussianBump => "linear-gaussian-bump",
            InitialDataSpec::Box1D => "box-1d",
            InitialDataSpec::Hetero2D { .. } => "hetero-2d",
            InitialDataSpec::Spiral2D { .. } => "spiral-2d",
            InitialDataSpec::Custom { .. } => "custom",
        }
    }

    /// Physical box the data set is meant for.
    pub fn default_domain(&self) -> (f64, f64) {
        match self {
            InitialDataSpec::LinearGaussianBump => (-1.0, 1.0),
            _ => (-15.0, 15.0),
        }
    }

    pub fn required_dim(&self) -> Option<usize> {
        match self {
            InitialDataSpec::Box1D => Some(1),
            InitialDataSpec::Hetero2D { .. } | InitialDataSpec::Spiral2D { .. } => Some(2),
            _ => None,
        }
    }

    /// The three profiles and the spread, as closed-form descriptors.
    pub fn profiles(&self, dim: usize) -> (Profile, Profile, Profile, ParticleSpread) {
        let inf = f64::INFINITY;
        let zero = Profile::Constant { value: 0.0 };
        let one = Profile::Constant { value: 1.0 };
        match self {
            InitialDataSpec::LinearGaussianBump => (
                Profile::Gaussian {
                    amplitude: 1.0,
                    rate: 100.0,
                    center: vec![],
                },
                zero,
                one,
                ParticleSpread::Dirac,
            ),
            InitialDataSpec::Box1D => (
                Profile::Box {
                    value: 1.0,
                    lower: vec![-1.0],
                    upper: vec![1.0],
                    closed: vec![true],
                },
                zero,
                one,
                ParticleSpread::Dirac,
            ),
            InitialDataSpec::Hetero2D { edge_width, spread } => (
                Profile::Box {
                    value: 1.0,
                    lower: vec![-14.0, -inf],
                    upper: vec![-13.0, inf],
                    closed: vec![],
                },
                Profile::Box {
                    value: 0.1,
                    lower: vec![-inf, -inf],
                    upper: vec![inf, -14.0],
                    closed: vec![true, true],
                },
                Profile::SmoothBall {
                    radius: 6.0,
                    width: *edge_width,
                    center: vec![],
                    outside: true,
                },
                *spread,
            ),
            InitialDataSpec::Spiral2D { edge_width, spread } => (
                // x1 <= -6 and 0 < x2 < 3
                Profile::Box {
                    value: 1.0,
                    lower: vec![-inf, 0.0],
                    upper: vec![-6.0, 3.0],
                    closed: vec![true, false],
                },
                Profile::Box {
                    value: 0.1,
                    lower: vec![-inf, 3.0],
                    upper: vec![inf, inf],
                    closed: vec![true, true],
                },
                Profile::SmoothBall {
                    radius: 12.0,
                    width: *edge_width,
                    center: vec![],
                    outside: false,
                },
                *spread,
            ),
            InitialDataSpec::Custom { v0, w0, rho0, spread } => {
                let _ = dim;
                (v0.clone(), w0.clone(), rho0.clone(), *spread)
            }
        }
    }

    pub fn build(&self, grid: &Arc<Grid>) -> Result<InitialData> {
        if let Some(d) = self.required_dim() {
            if grid.dim() != d {
                return Err(invalid(format!(
                    "initial data {} needs a {d}-dimensional grid, got {}",
                    self.name(),
                    grid.dim()
                )));
            }
        }
        let (v0, w0, rho0, spread) = self.profiles(grid.dim());
        for p in [&v0, &w0, &rho0] {
            p.validate(grid.dim())?;
        }
        Ok(InitialData {
            density: Density::new(rho0.sample(grid))?,
            v0: v0.sample(grid),
            w0: w0.sample(grid),
            spread,
        })
    }
}
