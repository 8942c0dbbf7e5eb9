//! Particle ensembles over the grid: each node carries `M` particles with
//! membrane potential `V_p` and adaptation `W_p`, weighted by the neuron
//! density `rho0`. Particles never move in space.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::experiments::InitialDataSpec;
use crate::kernel::KernelModes;
use crate::spectral::{apply_l, Field, Grid};

/// Nonnegative, time-independent neuron density.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(Field);

impl Density {
    pub fn new(rho0: Field) -> Result<Self> {
        if let Some((j, r)) = rho0.values().iter().enumerate().find(|(_, r)| !(**r >= 0.0 && r.is_finite())) {
            return Err(invalid(format!("density must be finite and >= 0, got {r} at node {j}")));
        }
        Ok(Self(rho0))
    }

    pub fn uniform(grid: Arc<Grid>) -> Self {
        Self(Field::constant(grid, 1.0))
    }

    pub fn field(&self) -> &Field {
        &self.0
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.0.grid()
    }
}

/// How the initial `(v, w)` distribution around `(V_0, W_0)` is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParticleSpread {
    /// Every particle starts on `(V_0, W_0)`.
    Dirac,
    /// Uniform on `V_0 + v_width (-1/2, 1/2)` times `W_0 + w_width (-1/2, 1/2)`.
    Box { v_width: f64, w_width: f64 },
}

/// Van der Corput radical inverse in base 2.
fn van_der_corput(mut i: u64) -> f64 {
    let mut r = 0.0;
    let mut f = 0.5;
    while i > 0 {
        r += f * (i & 1) as f64;
        i >>= 1;
        f *= 0.5;
    }
    r
}

/// Deterministic offsets `(u_p, s_p)` in `(-1/2, 1/2)^2`.
///
/// `u_p` are the stratum midpoints `(p - 1/2)/M - 1/2`. The `s_p` are the same
/// midpoints, assigned to particle `p` by the rank of the van der Corput
/// point of `p - 1`, which decorrelates the two axes.
pub fn box_offsets(m: usize) -> Vec<(f64, f64)> {
    let mid = |i: usize| (i as f64 + 0.5) / m as f64 - 0.5;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| van_der_corput(a as u64).total_cmp(&van_der_corput(b as u64)));
    let mut rank = vec![0; m];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    (0..m).map(|p| (mid(p), mid(rank[p]))).collect()
}

/// Nodewise mean over particles, independent of particle order.
pub(crate) fn particle_mean(fields: &[&[f64]], len: usize) -> Vec<f64> {
    let m = fields.len();
    let inv = 1.0 / m as f64;
    (0..len)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(m),
            |buf, j| {
                buf.clear();
                buf.extend(fields.iter().map(|f| f[j]));
                if m > 2 {
                    // a sorted sum is invariant under relabelling of particles
                    buf.sort_by(f64::total_cmp);
                }
                buf.iter().sum::<f64>() * inv
            },
        )
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    density: Density,
    v: Vec<Field>,
    w: Vec<Field>,
}

impl ParticleEnsemble {
    pub fn new(density: Density, v: Vec<Field>, w: Vec<Field>) -> Result<Self> {
        if v.is_empty() || v.len() != w.len() {
            return Err(invalid(format!(
                "need M >= 1 matching V and W particles, got {} and {}",
                v.len(),
                w.len()
            )));
        }
        for f in v.iter().chain(&w) {
            density.field().check_same_grid(f)?;
        }
        Ok(Self { density, v, w })
    }

    /// `M` particles per node spread around the profiles `(V_0, W_0)`.
    pub fn from_profiles(density: Density, v0: &Field, w0: &Field, spread: ParticleSpread, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("particle count M must be >= 1"));
        }
        density.field().check_same_grid(v0)?;
        density.field().check_same_grid(w0)?;
        let (v, w) = match spread {
            ParticleSpread::Dirac => (vec![v0.clone(); m], vec![w0.clone(); m]),
            ParticleSpread::Box { v_width, w_width } => {
                if !(v_width >= 0.0 && w_width >= 0.0 && v_width.is_finite() && w_width.is_finite()) {
                    return Err(invalid(format!(
                        "box widths must be finite and >= 0, got ({v_width}, {w_width})"
                    )));
                }
                box_offsets(m)
                    .into_iter()
                    .map(|(u, s)| (v0.map(|x| x + v_width * u), w0.map(|x| x + w_width * s)))
                    .unzip()
            }
        };
        Self::new(density, v, w)
    }

    pub fn m(&self) -> usize {
        self.v.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.density.grid()
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn v(&self) -> &[Field] {
        &self.v
    }

    pub fn w(&self) -> &[Field] {
        &self.w
    }

    /// Nodewise particle means `(V_mean, W_mean)`, without density weighting.
    pub fn moments(&self) -> (Field, Field) {
        (mean_of(&self.v), mean_of(&self.w))
    }
}

pub(crate) fn mean_of(fields: &[Field]) -> Field {
    let grid = fields[0].grid().clone();
    let slices: Vec<&[f64]> = fields.iter().map(|f| f.values()).collect();
    Field::from_parts(grid.clone(), particle_mean(&slices, grid.len()))
}

/// Macroscopic pair. `V_M` is an unknown of the schemes; `W_M` is always the
/// particle mean of `W_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub v_m: Field,
    pub w_m: Field,
}

impl MacroState {
    /// `V_M` and `W_M` taken from the particle means.
    pub fn from_ensemble(ensemble: &ParticleEnsemble) -> Self {
        let (v_m, w_m) = ensemble.moments();
        Self { v_m, w_m }
    }
}

/// The two nonlocal fields needed to evaluate the coupling on every particle
/// during one stage: `L[rho0 V_M]` and `L[rho0]`, both divided by `eps^2`.
#[derive(Debug, Clone)]
pub struct CouplingFields {
    pub l_rho_v: Field,
    pub l_rho: Field,
}

impl CouplingFields {
    pub fn new(modes: &KernelModes, density: &Density, v_m: &Field) -> Result<Self> {
        Ok(Self {
            l_rho_v: stiff_field(modes, density, v_m)?,
            l_rho: l_rho(modes, density)?,
        })
    }

    /// `(L[rho0 V_M](x_j) - v L[rho0](x_j)) / eps^2`.
    pub fn at(&self, node: usize, v: f64) -> f64 {
        self.l_rho_v.values()[node] - v * self.l_rho.values()[node]
    }
}

/// `L[rho0 V] / eps^2`.
pub(crate) fn stiff_field(modes: &KernelModes, density: &Density, v: &Field) -> Result<Field> {
    let prod = density.field().zip_map(v, |r, x| r * x)?;
    let inv = 1.0 / (modes.eps() * modes.eps());
    Ok(apply_l(modes, &prod)?.scaled(inv))
}

/// `L[rho0] / eps^2`.
pub(crate) fn l_rho(modes: &KernelModes, density: &Density) -> Result<Field> {
    let inv = 1.0 / (modes.eps() * modes.eps());
    Ok(apply_l(modes, density.field())?.scaled(inv))
}

/// Coupling `K[f](x_j, v)` for a single node and velocity.
pub fn coupling(modes: &KernelModes, density: &Density, v_m: &Field, v: f64, node: usize) -> Result<f64> {
    if node >= density.grid().len() {
        return Err(Error::GridMismatch(format!("node {node} out of range")));
    }
    Ok(CouplingFields::new(modes, density, v_m)?.at(node, v))
}

/// Builds the ensemble described by an initial-data specification.
pub fn init_ensemble(spec: &InitialDataSpec, grid: &Arc<Grid>, m: usize) -> Result<ParticleEnsemble> {
    let data = spec.build(grid)?;
    ParticleEnsemble::from_profiles(data.density, &data.v0, &data.w0, data.spread, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{compute_modes, ConnectivityKernel};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn offsets_single_particle_is_midpoint() {
        assert_eq!(box_offsets(1), vec![(0.0, 0.0)]);
    }

    #[test]
    fn offsets_are_stratified() {
        let m = 1000;
        let off = box_offsets(m);
        let mean_u = off.iter().map(|o| o.0).sum::<f64>() / m as f64;
        let mean_s = off.iter().map(|o| o.1).sum::<f64>() / m as f64;
        let var_u = off.iter().map(|o| o.0 * o.0).sum::<f64>() / m as f64;
        let var_s = off.iter().map(|o| o.1 * o.1).sum::<f64>() / m as f64;
        assert!(mean_u.abs() < 1e-14 && mean_s.abs() < 1e-14);
        // midpoint rule: 1/12 - 1/(12 M^2)
        assert!((var_u - 1.0 / 12.0).abs() < 1e-6);
        assert!((var_s - 1.0 / 12.0).abs() < 1e-6);
        // each axis hits every stratum once
        let mut s: Vec<f64> = off.iter().map(|o| o.1).collect();
        s.sort_by(f64::total_cmp);
        for (i, v) in s.iter().enumerate() {
            assert!((v - ((i as f64 + 0.5) / m as f64 - 0.5)).abs() < 1e-15);
        }
        // axes are not paired monotonically
        let corr = off.iter().map(|o| o.0 * o.1).sum::<f64>() / m as f64;
        assert!(corr.abs() < 0.01, "{corr}");
    }

    #[test]
    fn moments_basic() {
        let g = Grid::new(1, 8).unwrap();
        let d = Density::uniform(g.clone());
        let zero = Field::zeros(g.clone());
        let one = Field::constant(g.clone(), 1.0);
        let e = ParticleEnsemble::new(d.clone(), vec![zero.clone(), one.clone()], vec![one.clone(), one.clone()]).unwrap();
        let (vm, wm) = e.moments();
        assert!(vm.values().iter().all(|&x| x == 0.5));
        assert!(wm.values().iter().all(|&x| x == 1.0));
        let single = ParticleEnsemble::new(d, vec![one.clone()], vec![zero.clone()]).unwrap();
        assert_eq!(single.moments(), (one, zero));
    }

    #[test]
    fn density_must_be_nonnegative() {
        let g = Grid::new(1, 8).unwrap();
        assert!(Density::new(Field::constant(g.clone(), -1e-3)).is_err());
        assert!(Density::new(Field::constant(g, 0.0)).is_ok());
    }

    #[test]
    fn dirac_and_box_profiles() {
        let g = Grid::new(1, 16).unwrap();
        let d = Density::uniform(g.clone());
        let v0 = Field::from_fn(g.clone(), |x| x[0].cos());
        let w0 = Field::zeros(g.clone());
        let dirac = ParticleEnsemble::from_profiles(d.clone(), &v0, &w0, ParticleSpread::Dirac, 5).unwrap();
        assert!(dirac.v().iter().all(|f| *f == v0));
        let boxed = ParticleEnsemble::from_profiles(
            d,
            &v0,
            &w0,
            ParticleSpread::Box { v_width: 10.0, w_width: 100.0 },
            4,
        )
        .unwrap();
        let (vm, wm) = boxed.moments();
        for (a, b) in vm.values().iter().zip(v0.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(wm.max_abs() < 1e-13);
        // node 0 sits at -pi, so V_0 = -1 there; particle 0 has u = -3/8
        assert!((boxed.v()[0].values()[0] - (-1.0 - 3.75)).abs() < 1e-14);
    }

    #[test]
    fn coupling_vanishes_when_synchronized_or_empty() {
        let g = Grid::new(1, 16).unwrap();
        let k = ConnectivityKernel::gaussian(0.005, 1).unwrap();
        let modes = compute_modes(&k, &g, 0.5).unwrap();
        let c = 0.37;
        let vm = Field::constant(g.clone(), c);
        let c1 = coupling(&modes, &Density::uniform(g.clone()), &vm, c, 3).unwrap();
        assert!(c1.abs() < 1e-13);
        let empty = Density::new(Field::zeros(g.clone())).unwrap();
        let rough = Field::from_fn(g.clone(), |x| (3.0 * x[0]).sin());
        assert_eq!(coupling(&modes, &empty, &rough, 2.0, 5).unwrap(), 0.0);
    }

    // Direct periodic sum of the nonlocal operator: for a trigonometric
    // polynomial u on n nodes, L[u](x_j) = sum_k m(k) u_hat(k) e^{i k x_j}
    // with u_hat from the O(n^2) DFT.
    fn direct_l(modes: &KernelModes, grid: &Grid, u: &[f64]) -> Vec<f64> {
        let n = grid.n();
        let m = modes.multipliers();
        (0..n)
            .map(|j| {
                let xj = -PI + 2.0 * PI * j as f64 / n as f64;
                let mut acc = 0.0;
                for i in 0..n {
                    let k = grid.axis_wavenumber(i) as f64;
                    let (mut re, mut im) = (0.0, 0.0);
                    for (l, ul) in u.iter().enumerate() {
                        let xl = -PI + 2.0 * PI * l as f64 / n as f64;
                        re += ul * (k * xl).cos();
                        im -= ul * (k * xl).sin();
                    }
                    re /= n as f64;
                    im /= n as f64;
                    acc += m[i] * (re * (k * xj).cos() - im * (k * xj).sin());
                }
                acc
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn coupling_matches_direct_sum(
            rho in prop::collection::vec(0.0f64..2.0, 16),
            vm in prop::collection::vec(-1.0f64..1.0, 16),
            v in -1.0f64..1.0,
            node in 0usize..16,
        ) {
            let g = Grid::new(1, 16).unwrap();
            let k = ConnectivityKernel::gaussian(0.005, 1).unwrap();
            let eps = 0.7;
            let modes = compute_modes(&k, &g, eps).unwrap();
            let density = Density::new(Field::new(g.clone(), rho.clone()).unwrap()).unwrap();
            let vmf = Field::new(g.clone(), vm.clone()).unwrap();
            let got = coupling(&modes, &density, &vmf, v, node).unwrap();
            let prod: Vec<f64> = rho.iter().zip(&vm).map(|(a, b)| a * b).collect();
            let l1 = direct_l(&modes, &g, &prod);
            let l0 = direct_l(&modes, &g, &rho);
            let want = (l1[node] - v * l0[node]) / (eps * eps);
            prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{} vs {}", got, want);
        }

        #[test]
        fn means_are_exchangeable(
            vals in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 8), 1..7),
            seed in any::<u64>(),
        ) {
            let g = Grid::new(1, 8).unwrap();
            let fields: Vec<Field> = vals.iter().map(|v| Field::new(g.clone(), v.clone()).unwrap()).collect();
            let mut perm = fields.clone();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(mean_of(&fields), mean_of(&perm));
        }
    }
}
