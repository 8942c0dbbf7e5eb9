//! Reproducible experiment definitions: the linear accuracy test, the
//! `eps`-sweep against the limit system, and 2D field runs with snapshots
//! and probes.

mod initial;

pub use initial::*;

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::diagnostics::{front_position, l2_error, loglog_slope, observed_order, relative_entropy, wave_speed};
use crate::error::{invalid, Result};
use crate::io::load_or_compute_modes;
use crate::kernel::{ConnectivityKernel, KernelModes};
use crate::model::{ModelParams, Reaction};
use crate::particles::ParticleEnsemble;
use crate::spectral::{apply_multiplier, Field, Grid};
use crate::timestepping::{steps_to, Integrator, KineticState, LimitState, SchemeConfig, SchemeKind, State};

/// Level tracked by the front diagnostic.
pub const FRONT_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub parameter: f64,
    pub error: f64,
    /// Observed order against the previous row; `None` on the first row.
    pub order: Option<f64>,
    /// Front speed of the run, when tracked.
    pub wave_speed: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub title: String,
    pub parameter_name: String,
    pub rows: Vec<ReportRow>,
    pub metadata: Vec<(String, String)>,
    pub elapsed: Duration,
}

impl ExperimentReport {
    fn from_errors(title: String, parameter_name: &str, errors: &[(f64, f64)], speeds: Option<&[Option<f64>]>) -> Result<Self> {
        let orders = observed_order(errors)?;
        let rows = errors
            .iter()
            .enumerate()
            .map(|(i, &(parameter, error))| ReportRow {
                parameter,
                error,
                order: if i == 0 { None } else { Some(orders[i - 1]) },
                wave_speed: speeds.and_then(|s| s[i]),
            })
            .collect();
        Ok(Self {
            title,
            parameter_name: parameter_name.into(),
            rows,
            metadata: Vec::new(),
            elapsed: Duration::ZERO,
        })
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    /// Least-squares log-log slope of error against parameter over all rows.
    pub fn fitted_slope(&self) -> Result<f64> {
        let p: Vec<f64> = self.rows.iter().map(|r| r.parameter).collect();
        let e: Vec<f64> = self.rows.iter().map(|r| r.error).collect();
        loglog_slope(&p, &e)
    }

    pub fn error_at(&self, parameter: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.parameter - parameter).abs() <= 1e-12 * parameter.abs())
            .map(|r| r.error)
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for (k, v) in &self.metadata {
            writeln!(f, "  {k}: {v}")?;
        }
        let speeds = self.rows.iter().any(|r| r.wave_speed.is_some());
        write!(f, "{:>12} {:>12} {:>8}", self.parameter_name, "error", "order")?;
        if speeds {
            write!(f, " {:>12}", "wave speed")?;
        }
        writeln!(f)?;
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
            write!(f, "{:>12.3e} {:>12.3e} {:>8}", r.parameter, r.error, order)?;
            if speeds {
                let s = r.wave_speed.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into());
                write!(f, " {s:>12}")?;
            }
            writeln!(f)?;
        }
        write!(f, "  wall time: {:.2} s", self.elapsed.as_secs_f64())
    }
}

/// Everything needed to start one run.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub dim: usize,
    pub n_x: usize,
    pub domain: (f64, f64),
    pub kernel: ConnectivityKernel,
    pub model: ModelParams,
    pub scheme: SchemeKind,
    pub dt: f64,
    pub eps: f64,
    pub t_end: f64,
    /// Particles per node.
    pub m: usize,
    pub dealias: bool,
    pub initial: InitialDataSpec,
}

/// Gaussian profile width used throughout the experiments.
pub const DEFAULT_SIGMA0: f64 = 0.005;

impl RunSetup {
    /// Linear test: `alpha = 0.001`, `eps = 1`, domain `(-1, 1)`, `T = 10`.
    pub fn linear_accuracy(scheme: SchemeKind) -> Result<Self> {
        Ok(Self {
            dim: 1,
            n_x: 128,
            domain: (-1.0, 1.0),
            kernel: ConnectivityKernel::gaussian(DEFAULT_SIGMA0, 1)?,
            model: ModelParams::linear(0.001, 0.0, ModelParams::DEFAULT_GAMMA)?,
            scheme,
            dt: 5e-3,
            eps: 1.0,
            t_end: 10.0,
            m: 1,
            dealias: false,
            initial: InitialDataSpec::LinearGaussianBump,
        })
    }

    /// Box data on `(-15, 15)` with the cubic model, `n_x = 512`,
    /// `dt = 0.01`, `t = 250`.
    pub fn excitable_1d(scheme: SchemeKind, eps: f64) -> Result<Self> {
        Ok(Self {
            dim: 1,
            n_x: 512,
            domain: InitialDataSpec::Box1D.default_domain(),
            kernel: ConnectivityKernel::gaussian(DEFAULT_SIGMA0, 1)?,
            model: ModelParams::default(),
            scheme,
            dt: 0.01,
            eps,
            t_end: 250.0,
            m: 1,
            dealias: false,
            initial: InitialDataSpec::Box1D,
        })
    }

    /// Planar wave meeting a hole in the density; desk-scale grid.
    pub fn heterogeneous(eps: f64) -> Result<Self> {
        Self::planar_2d(InitialDataSpec::hetero_2d(), SchemeKind::Rk1, eps, 700.0)
    }

    /// Broken front in a disk, advanced with the second-order scheme;
    /// desk-scale grid.
    pub fn spiral(eps: f64) -> Result<Self> {
        Self::planar_2d(InitialDataSpec::spiral_2d(), SchemeKind::Hsdirk2, eps, 800.0)
    }

    fn planar_2d(initial: InitialDataSpec, scheme: SchemeKind, eps: f64, t_end: f64) -> Result<Self> {
        Ok(Self {
            dim: 2,
            n_x: 128,
            domain: initial.default_domain(),
            kernel: ConnectivityKernel::gaussian(DEFAULT_SIGMA0, 2)?,
            model: ModelParams::default(),
            scheme,
            dt: 0.02,
            eps,
            t_end,
            m: 10,
            dealias: false,
            initial,
        })
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Grid::with_domain(self.dim, self.n_x, self.domain.0, self.domain.1)
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let mut cfg = SchemeConfig::new(self.scheme, self.dt, self.eps, self.t_end, self.model)?;
        cfg.dealias = self.dealias;
        Ok(cfg)
    }

    /// Initial state of the kind the scheme expects. Limit runs start from
    /// the particle means.
    pub fn initial_state(&self, grid: &Arc<Grid>) -> Result<State> {
        let data = self.initial.build(grid)?;
        let ensemble = ParticleEnsemble::from_profiles(data.density, &data.v0, &data.w0, data.spread, self.m)?;
        let kinetic = KineticState::new(ensemble);
        Ok(if self.scheme.is_limit() {
            State::Limit(LimitState::from_kinetic(&kinetic))
        } else {
            State::Kinetic(kinetic)
        })
    }

    /// Kernel modes for kinetic schemes, `None` for limit schemes.
    pub fn modes(&self, grid: &Grid, cache: Option<&Path>) -> Result<Option<Arc<KernelModes>>> {
        if self.scheme.is_limit() {
            Ok(None)
        } else {
            load_or_compute_modes(&self.kernel, grid, self.eps, cache).map(Some)
        }
    }

    pub fn integrator(&self, cache: Option<&Path>) -> Result<Integrator> {
        let grid = self.grid()?;
        let modes = self.modes(&grid, cache)?;
        Integrator::new(self.scheme_config()?, &self.kernel, modes, self.initial_state(&grid)?)
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        vec![
            ("initial data".into(), self.initial.name().into()),
            (
                "grid".into(),
                format!("d={} n_x={} on ({}, {})", self.dim, self.n_x, self.domain.0, self.domain.1),
            ),
            ("scheme".into(), self.scheme.name().into()),
            ("kernel".into(), self.kernel.label()),
            ("dt".into(), self.dt.to_string()),
            ("eps".into(), self.eps.to_string()),
            ("t_end".into(), self.t_end.to_string()),
            ("particles per node".into(), self.m.to_string()),
        ]
    }
}

/// Exact solution of the linear kinetic model with `rho0 = 1` and `W = 0`:
/// each mode of `v0` grows by `exp([-alpha + (m(k) - psi_bar) / eps^2] t)`.
pub fn exact_linear_solution(modes: &KernelModes, psi_bar: f64, alpha: f64, v0: &Field, t: f64) -> Result<Field> {
    modes.check_grid(v0.grid())?;
    let eps2 = modes.eps() * modes.eps();
    let mult = modes.multipliers();
    apply_multiplier(v0, |i| ((-alpha + (mult[i] - psi_bar) / eps2) * t).exp())
}

/// Runs the template at every `dt` in `dt_values` and reports the L2 error
/// of `V_M` against the exact linear solution at `t_end`.
pub fn run_accuracy_sweep(template: &RunSetup, dt_values: &[f64], cache: Option<&Path>) -> Result<ExperimentReport> {
    let alpha = match template.model.reaction() {
        Reaction::Linear { alpha } => alpha,
        Reaction::Cubic => return Err(invalid("the accuracy sweep needs the linear reaction")),
    };
    if template.model.tau() != 0.0 {
        return Err(invalid("the accuracy sweep needs tau = 0 so that W stays at zero"));
    }
    if template.scheme.is_limit() {
        return Err(invalid("the accuracy sweep compares kinetic schemes to the exact solution"));
    }
    let start = Instant::now();
    let grid = template.grid()?;
    let modes = load_or_compute_modes(&template.kernel, &grid, template.eps, cache)?;
    let psi_bar = template.kernel.moments()?.psi_bar;
    let data = template.initial.build(&grid)?;
    let exact = exact_linear_solution(&modes, psi_bar, alpha, &data.v0, template.t_end)?;
    let errors = dt_values
        .par_iter()
        .map(|&dt| {
            let setup = RunSetup { dt, ..template.clone() };
            let mut run = Integrator::new(setup.scheme_config()?, &setup.kernel, Some(modes.clone()), setup.initial_state(&grid)?)?;
            run.advance_to(setup.t_end)?;
            let (v, _) = run.state().macro_fields();
            Ok((dt, l2_error(&v, &exact)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let title = format!("accuracy sweep, {} on the linear test", template.scheme.name());
    let mut report = ExperimentReport::from_errors(title, "dt", &errors, None)?;
    report.metadata = template.describe();
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Macroscopic pair at `t_end` plus the front positions sampled in
/// `[0.2 t_end, 0.8 t_end]`.
fn run_tracking_front(setup: &RunSetup, grid: &Arc<Grid>, cache: Option<&Path>) -> Result<(Field, Field, Option<f64>)> {
    let modes = setup.modes(grid, cache)?;
    let mut run = Integrator::new(setup.scheme_config()?, &setup.kernel, modes, setup.initial_state(grid)?)?;
    let stride = steps_to(1.0, setup.dt).max(1);
    let (lo, hi) = (0.2 * setup.t_end, 0.8 * setup.t_end);
    let (mut times, mut fronts) = (Vec::new(), Vec::new());
    run.run(|it| {
        let t = it.time();
        if it.step_index() % stride == 0 && t >= lo && t <= hi && grid.dim() == 1 {
            let (v, _) = it.state().macro_fields();
            if let Some(x) = front_position(&v, FRONT_LEVEL) {
                times.push(t);
                fronts.push(x);
            }
        }
        Ok(())
    })?;
    let (v, w) = run.state().macro_fields();
    let speed = if times.len() >= 2 { wave_speed(&times, &fronts) } else { None };
    Ok((v, w, speed))
}

/// Runs the template's kinetic scheme at every `eps` and the matching limit
/// scheme once, reporting `D_eps(t_end)` and the front speed of each run.
pub fn run_entropy_sweep(template: &RunSetup, eps_values: &[f64], cache: Option<&Path>) -> Result<ExperimentReport> {
    if template.scheme.is_limit() {
        return Err(invalid("the entropy sweep needs a kinetic scheme in the template"));
    }
    let start = Instant::now();
    let grid = template.grid()?;
    let limit = RunSetup {
        scheme: template.scheme.limit(),
        ..template.clone()
    };
    let (v_lim, w_lim, limit_speed) = run_tracking_front(&limit, &grid, cache)?;
    let rho0 = limit.initial.build(&grid)?.density;
    let rows = eps_values
        .par_iter()
        .map(|&eps| {
            let setup = RunSetup { eps, ..template.clone() };
            let (v, w, speed) = run_tracking_front(&setup, &grid, cache)?;
            let d = relative_entropy(&v, &w, &v_lim, &w_lim, rho0.field())?;
            Ok((eps, d, speed))
        })
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let speeds: Vec<Option<f64>> = rows.iter().map(|r| r.2).collect();
    let title = format!(
        "entropy sweep, {} against {} at t = {}",
        template.scheme.name(),
        limit.scheme.name(),
        template.t_end
    );
    let mut report = ExperimentReport::from_errors(title, "eps", &errors, Some(&speeds))?;
    report.metadata = template.describe();
    report.metadata.retain(|(k, _)| k != "eps");
    if let Some(s) = limit_speed {
        report.metadata.push(("limit wave speed".into(), format!("{s:.4}")));
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// What a field run records besides the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOptions {
    /// Times at which `V_M` is stored; `0` stores the initial data.
    pub snapshot_times: Vec<f64>,
    /// Physical points sampled at the nearest node.
    pub probes: Vec<Vec<f64>>,
    /// Time between probe and `max |V|` samples.
    pub sample_every: f64,
    /// Steps between progress callbacks; `0` disables them.
    pub progress_every: u64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            snapshot_times: Vec::new(),
            probes: Vec::new(),
            sample_every: 1.0,
            progress_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub point: Vec<f64>,
    pub node: usize,
    /// `(t, V_M)` samples.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct FieldRun {
    pub snapshots: Vec<(f64, Field)>,
    pub probes: Vec<ProbeSeries>,
    /// `(t, max |V_M|)` samples.
    pub max_abs: Vec<(f64, f64)>,
    pub final_state: State,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub step: u64,
    pub time: f64,
    pub max_abs_v: f64,
    pub wall: Duration,
}

/// Runs one setup to `t_end`, storing snapshots, probe series and the
/// `max |V_M|` series.
pub fn run_field_experiment<P: FnMut(&Progress)>(
    setup: &RunSetup,
    options: &FieldOptions,
    cache: Option<&Path>,
    mut progress: P,
) -> Result<FieldRun> {
    if !(options.sample_every > 0.0 && options.sample_every.is_finite()) {
        return Err(invalid(format!("sample_every must be > 0, got {}", options.sample_every)));
    }
    for &t in &options.snapshot_times {
        if !(t >= 0.0 && t <= setup.t_end + 1e-9 * setup.dt) {
            return Err(invalid(format!("snapshot time {t} is outside [0, {}]", setup.t_end)));
        }
    }
    let start = Instant::now();
    let grid = setup.grid()?;
    let mut run = setup.integrator(cache)?;
    let nodes = options
        .probes
        .iter()
        .map(|p| grid.nearest_node(p))
        .collect::<Result<Vec<_>>>()?;
    let mut probes: Vec<ProbeSeries> = options
        .probes
        .iter()
        .zip(&nodes)
        .map(|(p, &node)| ProbeSeries {
            point: p.clone(),
            node,
            samples: Vec::new(),
        })
        .collect();
    let mut snap_steps: Vec<(u64, usize)> = options
        .snapshot_times
        .iter()
        .enumerate()
        .map(|(i, &t)| (steps_to(t, setup.dt), i))
        .collect();
    snap_steps.sort_unstable();
    let mut snapshots: Vec<Option<(f64, Field)>> = vec![None; options.snapshot_times.len()];
    let stride = steps_to(options.sample_every, setup.dt).max(1);
    let mut max_abs = Vec::new();

    let mut observe = |it: &Integrator| -> Result<()> {
        let step = it.step_index();
        let sample = step.is_multiple_of(stride);
        let report = options.progress_every > 0 && step.is_multiple_of(options.progress_every);
        let wants_snap = snap_steps.iter().any(|&(s, _)| s == step);
        if !(sample || report || wants_snap) {
            return Ok(());
        }
        let (v, _) = it.state().macro_fields();
        let t = it.time();
        if sample {
            for p in probes.iter_mut() {
                p.samples.push((t, v.values()[p.node]));
            }
            max_abs.push((t, v.max_abs()));
        }
        for &(s, i) in &snap_steps {
            if s == step {
                snapshots[i] = Some((t, v.clone()));
            }
        }
        if report {
            progress(&Progress {
                step,
                time: t,
                max_abs_v: v.max_abs(),
                wall: start.elapsed(),
            });
        }
        Ok(())
    };
    observe(&run)?;
    run.run(&mut observe)?;
    let snapshots = snapshots.into_iter().map(|s| s.expect("every snapshot step is reached")).collect();
    Ok(FieldRun {
        snapshots,
        probes,
        max_abs,
        final_state: run.into_state(),
        elapsed: start.elapsed(),
    })
}

/// Number of down-crossings of the series mean, a proxy for oscillations.
pub fn count_oscillations(samples: &[(f64, f64)]) -> usize {
    if samples.is_empty() {
        return 0;
    }
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    samples.windows(2).filter(|w| w[0].1 >= mean && w[1].1 < mean).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::forward;
    use num_complex::Complex64;

    #[test]
    fn exact_solution_at_zero_is_initial_data() {
        let setup = RunSetup::linear_accuracy(SchemeKind::Rk1).unwrap();
        let grid = setup.grid().unwrap();
        let modes = setup.modes(&grid, None).unwrap().unwrap();
        let v0 = setup.initial.build(&grid).unwrap().v0;
        let u = exact_linear_solution(&modes, 1.0, 0.001, &v0, 0.0).unwrap();
        for (a, b) in u.values().iter().zip(v0.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_solution_matches_rk4_per_mode() {
        let setup = RunSetup::linear_accuracy(SchemeKind::Rk1).unwrap();
        let grid = setup.grid().unwrap();
        let modes = setup.modes(&grid, None).unwrap().unwrap();
        let psi_bar = setup.kernel.moments().unwrap().psi_bar;
        let v0 = setup.initial.build(&grid).unwrap().v0;
        let t = 10.0;
        let exact = exact_linear_solution(&modes, psi_bar, 0.001, &v0, t).unwrap();
        // RK4 on each mode's ODE
        let steps = 10_000;
        let h = t / steps as f64;
        let c: Vec<Complex64> = forward(&v0)
            .iter()
            .zip(modes.multipliers())
            .map(|(c0, m)| {
                let rate = -0.001 + (m - psi_bar);
                let f = |y: Complex64| y * rate;
                let mut y = *c0;
                for _ in 0..steps {
                    let k1 = f(y);
                    let k2 = f(y + k1 * (h / 2.0));
                    let k3 = f(y + k2 * (h / 2.0));
                    let k4 = f(y + k3 * h);
                    y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
                y
            })
            .collect();
        let rk4 = crate::spectral::inverse(&grid, &c).unwrap();
        assert!(l2_error(&rk4, &exact).unwrap() < 1e-10);
    }

    #[test]
    fn accuracy_sweep_rk1_is_first_order() {
        let setup = RunSetup::linear_accuracy(SchemeKind::Rk1).unwrap();
        let report = run_accuracy_sweep(&setup, &[2e-2, 1e-2, 5e-3], None).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows[0].order.is_none());
        for o in report.orders() {
            assert!((o - 1.0).abs() < 0.15, "order {o}");
        }
    }

    #[test]
    fn accuracy_sweep_rejects_cubic_model() {
        let mut setup = RunSetup::linear_accuracy(SchemeKind::Rk1).unwrap();
        setup.model = ModelParams::default();
        assert!(run_accuracy_sweep(&setup, &[1e-2], None).is_err());
    }

    #[test]
    fn orders_recompute_from_error_column() {
        let errors = [(0.1, 4e-3), (0.05, 1.1e-3), (0.02, 1.7e-4)];
        let r = ExperimentReport::from_errors("t".into(), "eps", &errors, None).unwrap();
        let again = observed_order(&errors).unwrap();
        assert_eq!(r.orders(), again);
    }

    #[test]
    fn zero_data_stays_zero() {
        let zero = Profile::Constant { value: 0.0 };
        let mut setup = RunSetup::excitable_1d(SchemeKind::Rk1, 0.5).unwrap();
        setup.n_x = 64;
        setup.t_end = 1.0;
        setup.initial = InitialDataSpec::Custom {
            v0: zero.clone(),
            w0: zero,
            rho0: Profile::Constant { value: 1.0 },
            spread: crate::particles::ParticleSpread::Dirac,
        };
        let opts = FieldOptions {
            snapshot_times: vec![0.0, 0.5, 1.0],
            ..FieldOptions::default()
        };
        let run = run_field_experiment(&setup, &opts, None, |_| {}).unwrap();
        assert_eq!(run.snapshots.len(), 3);
        for (_, f) in &run.snapshots {
            assert!(f.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn box_data_stays_even() {
        let mut setup = RunSetup::excitable_1d(SchemeKind::Hsdirk2, 0.5).unwrap();
        setup.n_x = 256;
        setup.t_end = 20.0;
        let run = run_field_experiment(&setup, &FieldOptions::default(), None, |_| {}).unwrap();
        let (v, _) = run.final_state.macro_fields();
        let n = setup.n_x;
        let vals = v.values();
        for i in 1..n {
            assert!((vals[i] - vals[n - i]).abs() <= 1e-9, "node {i}");
        }
    }

    #[test]
    fn field_run_records_probes_and_snapshots() {
        let mut setup = RunSetup::excitable_1d(SchemeKind::Rk1, 1.0).unwrap();
        setup.n_x = 128;
        setup.t_end = 2.0;
        let opts = FieldOptions {
            snapshot_times: vec![1.0],
            probes: vec![vec![0.0], vec![5.0]],
            sample_every: 0.5,
            progress_every: 50,
        };
        let mut calls = 0;
        let run = run_field_experiment(&setup, &opts, None, |_| calls += 1).unwrap();
        // steps 0, 50, 100, 150 and 200
        assert_eq!(calls, 5);
        assert_eq!(run.probes[0].samples.len(), 5);
        assert_eq!(run.max_abs.len(), 5);
        assert!((run.snapshots[0].0 - 1.0).abs() < 1e-12);
        assert!(run.probes[0].samples[0].1 == 1.0);
        assert!(run.probes[1].samples[0].1 == 0.0);
    }

    #[test]
    fn oscillation_count() {
        let s: Vec<(f64, f64)> = (0..400).map(|i| (i as f64, (i as f64 * 0.1).sin())).collect();
        assert_eq!(count_oscillations(&s), 6);
    }
}
