//! Periodic tensor grids, discrete Fourier transforms and the spectral
//! operators used by the schemes.
//!
//! The computational cell is the torus `[-pi, pi)^d` with `n` equispaced
//! nodes per axis. A physical box `[lower, upper)^d` is mapped onto it by an
//! affine change of variable; `Grid::scale` is the factor `2 pi / (upper - lower)`
//! that converts physical lengths into torus lengths. Wavenumbers are the
//! integer indices `k` of the torus, physical wavenumbers are `scale * k`.
//!
//! Spectral arrays are stored in FFT order along each axis (`0, 1, ..,
//! n/2 - 1, -n/2, .., -1`) and flattened row-major, last axis fastest,
//! matching the node layout.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelModes;

/// Largest dimension a grid can be built for. Full simulations use d <= 2.
pub const MAX_DIM: usize = 3;

/// Relative threshold on the imaginary part left after an inverse transform.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

pub struct Grid {
    dim: usize,
    n: usize,
    lower: f64,
    upper: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && self.lower == other.lower
            && self.upper == other.upper
    }
}

impl Grid {
    /// Grid on the torus `[-pi, pi)^dim`.
    pub fn new(dim: usize, n: usize) -> Result<Arc<Self>> {
        Self::with_domain(dim, n, -PI, PI)
    }

    /// Grid on the physical box `[lower, upper)^dim`.
    pub fn with_domain(dim: usize, n: usize, lower: f64, upper: f64) -> Result<Arc<Self>> {
        let mut problems = Vec::new();
        if !(1..=MAX_DIM).contains(&dim) {
            problems.push(format!("dimension must be 1, 2 or 3, got {dim}"));
        }
        if n == 0 || !n.is_multiple_of(2) {
            problems.push(format!("n_x must be even, got {n}"));
        }
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            problems.push(format!("domain bounds must satisfy lower < upper, got ({lower}, {upper})"));
        }
        if !problems.is_empty() {
            return Err(invalid(problems.join("; ")));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            dim,
            n,
            lower,
            upper,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Physical side length of the box.
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Torus length per physical length, `2 pi / length`.
    pub fn scale(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// Physical node spacing.
    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Physical volume attached to one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn axis_coordinate(&self, i: usize) -> f64 {
        self.lower + i as f64 * self.spacing()
    }

    /// Per-axis indices of a linear node (or mode) index.
    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            out[a] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical coordinates of a node; unused axes are zero.
    pub fn node_point(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = self.axis_coordinate(m[a]);
        }
        p
    }

    /// Signed wavenumber for an FFT-ordered axis index.
    pub fn axis_wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, idx: usize) -> [i64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut k = [0; MAX_DIM];
        for a in 0..self.dim {
            k[a] = self.axis_wavenumber(m[a]);
        }
        k
    }

    /// Squared torus wavenumber norm `|k|^2` as an exact integer.
    pub fn k_norm_sq(&self, idx: usize) -> i64 {
        self.wavenumber(idx).iter().map(|k| k * k).sum()
    }

    /// Node nearest to a physical point, with periodic wrap-around.
    pub fn nearest_node(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim {
            return Err(invalid(format!(
                "point has {} coordinates, grid is {}-dimensional",
                point.len(),
                self.dim
            )));
        }
        let h = self.spacing();
        let mut multi = [0usize; MAX_DIM];
        for (a, &x) in point.iter().enumerate() {
            if !x.is_finite() {
                return Err(invalid(format!("non-finite probe coordinate {x}")));
            }
            let i = ((x - self.lower) / h).round() as i64;
            multi[a] = i.rem_euclid(self.n as i64) as usize;
        }
        Ok(self.linear_index(&multi))
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || self == other
    }

    /// In-place unnormalised transform along every axis.
    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.n;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex64::default(); n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, c) in line.iter_mut().enumerate() {
                        *c = data[base + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, c) in line.iter().enumerate() {
                        data[base + i * stride] = *c;
                    }
                }
            }
        }
    }

    /// `(-1)^(k_1 + .. + k_d)`: the torus nodes start at `-pi`, so the DFT
    /// against `exp(-i k x_j)` differs from the FFT by this sign.
    fn node_phase(&self, idx: usize) -> f64 {
        let s: i64 = self.wavenumber(idx).iter().sum();
        if s.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Real scalar function sampled at the nodes of a grid.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    // FFT of the values divided by n^d, without the node phase.
    spectrum: OnceLock<Arc<[Complex64]>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.values == other.values
    }
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self::from_parts(grid, values))
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let len = grid.len();
        Self::from_parts(grid, vec![c; len])
    }

    /// Samples `f` at the physical node coordinates.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Arc<Grid>, f: F) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| f(&grid.node_point(i)[..dim]))
            .collect();
        Self::from_parts(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nodewise map.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field::from_parts(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field::from_parts(self.grid.clone(), values))
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn scaled(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// Periodic shift by `by` nodes along `axis`: `out(i) = self(i - by)`.
    pub fn shifted(&self, axis: usize, by: i64) -> Field {
        let n = self.grid.n as i64;
        let mut out = vec![0.0; self.values.len()];
        for (idx, &v) in self.values.iter().enumerate() {
            let mut m = self.grid.multi_index(idx);
            m[axis] = (m[axis] as i64 + by).rem_euclid(n) as usize;
            out[self.grid.linear_index(&m)] = v;
        }
        Field::from_parts(self.grid.clone(), out)
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    fn normalized_spectrum(&self) -> &Arc<[Complex64]> {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> =
                self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.grid.transform(&mut data, false);
            let inv = 1.0 / self.grid.len() as f64;
            data.iter_mut().for_each(|c| *c *= inv);
            data.into()
        })
    }

    /// Fourier coefficients `u_hat(k) = n^-d sum_j u(x_j) exp(-i k . x_j)`,
    /// FFT-ordered. Computed once and cached.
    pub fn coefficients(&self) -> Vec<Complex64> {
        forward(self)
    }
}

/// Discrete Fourier transform with the `1 / n^d` normalisation.
pub fn forward(field: &Field) -> Vec<Complex64> {
    let grid = &field.grid;
    field
        .normalized_spectrum()
        .iter()
        .enumerate()
        .map(|(i, c)| c * grid.node_phase(i))
        .collect()
}

/// Evaluates `sum_k u_hat(k) exp(i k . x_j)` at the nodes. The imaginary
/// part must vanish up to `IMAGINARY_RESIDUE_TOL`.
pub fn inverse(grid: &Arc<Grid>, coefficients: &[Complex64]) -> Result<Field> {
    if coefficients.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} coefficients for a grid of {} modes",
            coefficients.len(),
            grid.len()
        )));
    }
    let data: Vec<Complex64> = coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| c * grid.node_phase(i))
        .collect();
    unnormalized_inverse(grid, data)
}

fn unnormalized_inverse(grid: &Arc<Grid>, mut data: Vec<Complex64>) -> Result<Field> {
    grid.transform(&mut data, true);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for c in &data {
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
    }
    let tolerance = IMAGINARY_RESIDUE_TOL * max_re.max(1.0);
    if max_im > tolerance {
        return Err(Error::ImaginaryResidue {
            residue: max_im,
            tolerance,
        });
    }
    Ok(Field::from_parts(grid.clone(), data.into_iter().map(|c| c.re).collect()))
}

/// Applies a real Fourier multiplier given per FFT-ordered mode index.
pub fn apply_multiplier<M: Fn(usize) -> f64>(u: &Field, multiplier: M) -> Result<Field> {
    let data: Vec<Complex64> = u
        .normalized_spectrum()
        .iter()
        .enumerate()
        .map(|(i, c)| c * multiplier(i))
        .collect();
    unnormalized_inverse(&u.grid, data)
}

/// Collocation of a pointwise map: the trigonometric interpolant of `f(u)`
/// is identified with its nodal values.
pub fn interpolate_nonlinear<F: Fn(f64) -> f64>(f: F, field: &Field) -> Field {
    field.map(f)
}

/// Two-thirds rule: zeroes every mode with some `|k_a| > n / 3`.
pub fn dealias(field: &Field) -> Result<Field> {
    let grid = field.grid.clone();
    let cutoff = grid.n() as i64 / 3;
    apply_multiplier(field, |i| {
        if grid.wavenumber(i).iter().all(|k| k.abs() <= cutoff) {
            1.0
        } else {
            0.0
        }
    })
}

/// Discrete nonlocal operator: multiplies `u_hat(k)` by `(2 pi)^d Psi_hat_eps(k)`.
pub fn apply_l(modes: &KernelModes, u: &Field) -> Result<Field> {
    modes.check_grid(&u.grid)?;
    let m = modes.multipliers();
    apply_multiplier(u, |i| m[i])
}

/// Spectral Laplacian in physical units: multiplies by `-(scale |k|)^2`.
pub fn laplacian(u: &Field) -> Result<Field> {
    let grid = u.grid.clone();
    let s2 = grid.scale() * grid.scale();
    apply_multiplier(u, |i| -s2 * grid.k_norm_sq(i) as f64)
}
