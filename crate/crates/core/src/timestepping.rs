//! Time integrators.
//!
//! The kinetic schemes advance the particles `(V_p, W_p)` together with the
//! auxiliary macroscopic potential `V_M`. The stiff relaxation
//! `-V_p L[rho0] / eps^2` is implicit and pointwise diagonal, so each node is
//! solved in closed form; the reaction, the adaptation and the nonlocal drive
//! `L[rho0 V_M] / eps^2` are explicit.
//!
//! The limit schemes advance the macroscopic pair of the reaction-diffusion
//! system obtained as `eps -> 0`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernel::{ConnectivityKernel, KernelModes, KernelMoments};
use crate::model::ModelParams;
use crate::particles::{l_rho, mean_of, stiff_field, Density, ParticleEnsemble};
use crate::spectral::{dealias, interpolate_nonlinear, laplacian, Field};

/// Largest `|V|` accepted before a run is declared unstable.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Rk1,
    Hsdirk2,
    LimitRk1,
    LimitRk2,
}

impl SchemeKind {
    pub fn is_limit(self) -> bool {
        matches!(self, SchemeKind::LimitRk1 | SchemeKind::LimitRk2)
    }

    /// The limit scheme matching a kinetic scheme, or itself.
    pub fn limit(self) -> SchemeKind {
        match self {
            SchemeKind::Rk1 | SchemeKind::LimitRk1 => SchemeKind::LimitRk1,
            SchemeKind::Hsdirk2 | SchemeKind::LimitRk2 => SchemeKind::LimitRk2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Rk1 => "rk1",
            SchemeKind::Hsdirk2 => "hsdirk2",
            SchemeKind::LimitRk1 => "limit-rk1",
            SchemeKind::LimitRk2 => "limit-rk2",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rk1" => Ok(SchemeKind::Rk1),
            "hsdirk2" | "h-sdirk2" => Ok(SchemeKind::Hsdirk2),
            "limit-rk1" => Ok(SchemeKind::LimitRk1),
            "limit-rk2" => Ok(SchemeKind::LimitRk2),
            other => Err(invalid(format!(
                "unknown scheme {other:?} (expected rk1, hsdirk2, limit-rk1 or limit-rk2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub dt: f64,
    /// Physical interaction scale; ignored by the limit schemes.
    pub eps: f64,
    pub scheme: SchemeKind,
    pub model: ModelParams,
    pub t_end: f64,
    /// Two-thirds filter on the reaction term.
    pub dealias: bool,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, dt: f64, eps: f64, t_end: f64, model: ModelParams) -> Result<Self> {
        let cfg = Self {
            dt,
            eps,
            scheme,
            model,
            t_end,
            dealias: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) && !self.scheme.is_limit() {
            problems.push(format!("eps must be > 0, got {}", self.eps));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            problems.push(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(invalid(problems.join("; ")))
        }
    }

    /// Steps needed to reach `t_end`; a final time within `1e-9 dt` of a
    /// step boundary counts as that boundary.
    pub fn n_steps(&self) -> u64 {
        steps_to(self.t_end, self.dt)
    }
}

pub(crate) fn steps_to(t: f64, dt: f64) -> u64 {
    (t / dt - 1e-9).ceil().max(0.0) as u64
}

/// Particles plus the auxiliary macroscopic potential.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub ensemble: ParticleEnsemble,
    pub v_m: Field,
}

impl KineticState {
    /// `V_M` starts as the particle mean.
    pub fn new(ensemble: ParticleEnsemble) -> Self {
        let (v_m, _) = ensemble.moments();
        Self { ensemble, v_m }
    }

    /// `(V_M, W_M)` with `W_M` the particle mean of `W_p`.
    pub fn macro_fields(&self) -> (Field, Field) {
        (self.v_m.clone(), mean_of(self.ensemble.w()))
    }
}

/// Macroscopic pair of the limit system.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub density: Density,
    pub v: Field,
    pub w: Field,
}

impl LimitState {
    /// Limit data from a kinetic state: `(V_M, W_M)`.
    pub fn from_kinetic(state: &KineticState) -> Self {
        let (v, w) = state.macro_fields();
        Self {
            density: state.ensemble.density().clone(),
            v,
            w,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Kinetic(KineticState),
    Limit(LimitState),
}

impl State {
    pub fn macro_fields(&self) -> (Field, Field) {
        match self {
            State::Kinetic(k) => k.macro_fields(),
            State::Limit(l) => (l.v.clone(), l.w.clone()),
        }
    }

    pub fn density(&self) -> &Density {
        match self {
            State::Kinetic(k) => k.ensemble.density(),
            State::Limit(l) => &l.density,
        }
    }

    fn max_abs_v(&self) -> f64 {
        let nan_max = |f: &Field| f.values().iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        match self {
            State::Kinetic(k) => k.ensemble.v().iter().map(nan_max).fold(nan_max(&k.v_m), f64::max),
            State::Limit(l) => nan_max(&l.v).max(nan_max(&l.w)),
        }
    }
}

/// Precomputed pieces of the stiff nonlocal term for one `(modes, rho0)`.
#[derive(Debug, Clone)]
pub struct StiffOperator {
    modes: Arc<KernelModes>,
    density: Density,
    l_rho: Field,
    min_l_rho: f64,
}

impl StiffOperator {
    pub fn new(modes: Arc<KernelModes>, density: Density) -> Result<Self> {
        let l_rho = l_rho(&modes, &density)?;
        let eps2 = modes.eps() * modes.eps();
        let min_l_rho = l_rho.values().iter().fold(f64::INFINITY, |m, v| m.min(*v)) * eps2;
        Ok(Self {
            modes,
            density,
            l_rho,
            min_l_rho,
        })
    }

    pub fn modes(&self) -> &Arc<KernelModes> {
        &self.modes
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// Smallest nodal value of `L[rho0]` (not divided by `eps^2`).
    pub fn min_l_rho(&self) -> f64 {
        self.min_l_rho
    }

    /// `L[rho0] / eps^2`.
    pub fn l_rho(&self) -> &Field {
        &self.l_rho
    }

    /// `L[rho0 v] / eps^2`.
    pub fn drive(&self, v: &Field) -> Result<Field> {
        stiff_field(&self.modes, &self.density, v)
    }

    fn check_divisor(&self, h: f64) -> Result<()> {
        let eps2 = self.modes.eps() * self.modes.eps();
        if 1.0 + h * self.min_l_rho / eps2 <= 0.0 {
            return Err(invalid(format!(
                "implicit divisor 1 + dt L[rho0]/eps^2 is not positive (min L[rho0] = {:e})",
                self.min_l_rho
            )));
        }
        Ok(())
    }
}

/// `sigma_bar (Lap(rho0 V) - V Lap(rho0))` for the limit schemes.
#[derive(Debug, Clone)]
pub struct LimitOperator {
    density: Density,
    lap_rho: Field,
    sigma_bar: f64,
}

impl LimitOperator {
    pub fn new(density: Density, moments: KernelMoments) -> Result<Self> {
        let lap_rho = laplacian(density.field())?;
        Ok(Self {
            density,
            lap_rho,
            sigma_bar: moments.sigma_bar,
        })
    }

    pub fn apply(&self, v: &Field) -> Result<Field> {
        let lap = laplacian(&self.density.field().zip_map(v, |r, x| r * x)?)?;
        let sb = self.sigma_bar;
        let vals = lap
            .values()
            .iter()
            .zip(v.values())
            .zip(self.lap_rho.values())
            .map(|((l, x), lr)| sb * (l - x * lr))
            .collect();
        Ok(Field::from_parts(v.grid().clone(), vals))
    }
}

fn reaction(model: &ModelParams, v: &Field, filter: bool) -> Result<Field> {
    let n = interpolate_nonlinear(|x| model.nonlinearity(x), v);
    if filter {
        dealias(&n)
    } else {
        Ok(n)
    }
}

/// Pointwise-implicit particle stage:
/// `V' = (V + h (N(V_e) + lv - W_e)) / (1 + h lr)`, `W' = W + h A(V', W_e)`.
#[allow(clippy::too_many_arguments)]
fn particle_stage(
    model: &ModelParams,
    filter: bool,
    h: f64,
    v: &Field,
    w: &Field,
    v_explicit: &Field,
    w_explicit: &Field,
    lv: &Field,
    lr: &Field,
) -> Result<(Field, Field)> {
    let n = reaction(model, v_explicit, filter)?;
    let len = v.len();
    let mut v_new = Vec::with_capacity(len);
    let mut w_new = Vec::with_capacity(len);
    let (vv, wv, we, nv, lvv, lrv) = (v.values(), w.values(), w_explicit.values(), n.values(), lv.values(), lr.values());
    for j in 0..len {
        let vn = (vv[j] + h * (nv[j] + lvv[j] - we[j])) / (1.0 + h * lrv[j]);
        v_new.push(vn);
        w_new.push(wv[j] + h * model.adaptation(vn, we[j]));
    }
    let grid = v.grid().clone();
    Ok((Field::from_parts(grid.clone(), v_new), Field::from_parts(grid, w_new)))
}

struct StageOutput {
    v: Vec<Field>,
    w: Vec<Field>,
    v_m: Field,
}

/// One semi-implicit stage for every particle and for `V_M`.
#[allow(clippy::too_many_arguments)]
fn kinetic_stage(
    op: &StiffOperator,
    model: &ModelParams,
    filter: bool,
    h: f64,
    base: &KineticState,
    v_explicit: &[Field],
    w_explicit: &[Field],
    v_m_explicit: &Field,
    w_m_explicit: &Field,
) -> Result<StageOutput> {
    let lv = op.drive(v_m_explicit)?;
    let lr = op.l_rho();
    let ens = &base.ensemble;
    let updated: Vec<(Field, Field)> = (0..ens.m())
        .into_par_iter()
        .map(|p| particle_stage(model, filter, h, &ens.v()[p], &ens.w()[p], &v_explicit[p], &w_explicit[p], &lv, lr))
        .collect::<Result<_>>()?;
    let (v, w): (Vec<Field>, Vec<Field>) = updated.into_iter().unzip();
    let reactions: Vec<Field> = v.par_iter().map(|vp| reaction(model, vp, filter)).collect::<Result<_>>()?;
    let mean_n = mean_of(&reactions);
    let vals = (0..base.v_m.len())
        .map(|j| {
            let vm = v_m_explicit.values()[j];
            base.v_m.values()[j]
                + h * (mean_n.values()[j] + lv.values()[j] - vm * lr.values()[j] - w_m_explicit.values()[j])
        })
        .collect();
    Ok(StageOutput {
        v,
        w,
        v_m: Field::from_parts(base.v_m.grid().clone(), vals),
    })
}

fn rebuild(state: &KineticState, v: Vec<Field>, w: Vec<Field>, v_m: Field) -> Result<KineticState> {
    Ok(KineticState {
        ensemble: ParticleEnsemble::new(state.ensemble.density().clone(), v, w)?,
        v_m,
    })
}

/// First-order semi-implicit step.
pub fn step_rk1(state: &KineticState, op: &StiffOperator, cfg: &SchemeConfig) -> Result<KineticState> {
    op.check_divisor(cfg.dt)?;
    let w_m = mean_of(state.ensemble.w());
    let out = kinetic_stage(
        op,
        &cfg.model,
        cfg.dealias,
        cfg.dt,
        state,
        state.ensemble.v(),
        state.ensemble.w(),
        &state.v_m,
        &w_m,
    )?;
    rebuild(state, out.v, out.w, out.v_m)
}

fn extrapolate(stage: &Field, base: &Field) -> Field {
    stage.lincomb(2.0, base, -1.0).expect("same grid")
}

fn combine(a: &Field, b: &Field, base: &Field) -> Field {
    let vals = a
        .values()
        .iter()
        .zip(b.values())
        .zip(base.values())
        .map(|((x, y), z)| x + y - z)
        .collect();
    Field::from_parts(base.grid().clone(), vals)
}

/// Second-order H-SDIRK2(2,2,2) step: Heun for the explicit part, a
/// two-stage diagonally implicit rule for the stiff part.
pub fn step_hsdirk2(state: &KineticState, op: &StiffOperator, cfg: &SchemeConfig) -> Result<KineticState> {
    let h = 0.5 * cfg.dt;
    op.check_divisor(h)?;
    let ens = &state.ensemble;
    let w_m = mean_of(ens.w());
    let s1 = kinetic_stage(op, &cfg.model, cfg.dealias, h, state, ens.v(), ens.w(), &state.v_m, &w_m)?;

    let v_hat: Vec<Field> = s1.v.iter().zip(ens.v()).map(|(a, b)| extrapolate(a, b)).collect();
    let w_hat: Vec<Field> = s1.w.iter().zip(ens.w()).map(|(a, b)| extrapolate(a, b)).collect();
    let v_m_hat = extrapolate(&s1.v_m, &state.v_m);
    let w_m_hat = extrapolate(&mean_of(&s1.w), &w_m);
    let s2 = kinetic_stage(op, &cfg.model, cfg.dealias, h, state, &v_hat, &w_hat, &v_m_hat, &w_m_hat)?;

    let v = (0..ens.m()).map(|p| combine(&s1.v[p], &s2.v[p], &ens.v()[p])).collect();
    let w = (0..ens.m()).map(|p| combine(&s1.w[p], &s2.w[p], &ens.w()[p])).collect();
    let v_m = combine(&s1.v_m, &s2.v_m, &state.v_m);
    rebuild(state, v, w, v_m)
}

/// Explicit limit stage: `V' = V + h [N(V_e) - W_e + D(V_e)]`, `W' = W + h A(V_e, W_e)`.
fn limit_stage(
    op: &LimitOperator,
    model: &ModelParams,
    filter: bool,
    h: f64,
    base: &LimitState,
    v_e: &Field,
    w_e: &Field,
) -> Result<(Field, Field)> {
    let n = reaction(model, v_e, filter)?;
    let diff = op.apply(v_e)?;
    let len = v_e.len();
    let mut v = Vec::with_capacity(len);
    let mut w = Vec::with_capacity(len);
    for j in 0..len {
        let (ve, we) = (v_e.values()[j], w_e.values()[j]);
        v.push(base.v.values()[j] + h * (n.values()[j] - we + diff.values()[j]));
        w.push(base.w.values()[j] + h * model.adaptation(ve, we));
    }
    let grid = v_e.grid().clone();
    Ok((Field::from_parts(grid.clone(), v), Field::from_parts(grid, w)))
}

/// Explicit Euler on the limit reaction-diffusion system.
pub fn step_limit_rk1(state: &LimitState, op: &LimitOperator, cfg: &SchemeConfig) -> Result<LimitState> {
    let (v, w) = limit_stage(op, &cfg.model, cfg.dealias, cfg.dt, state, &state.v, &state.w)?;
    Ok(LimitState {
        density: state.density.clone(),
        v,
        w,
    })
}

/// Heun-type two-stage step on the limit system.
pub fn step_limit_rk2(state: &LimitState, op: &LimitOperator, cfg: &SchemeConfig) -> Result<LimitState> {
    let h = 0.5 * cfg.dt;
    let (v1, w1) = limit_stage(op, &cfg.model, cfg.dealias, h, state, &state.v, &state.w)?;
    let v_hat = extrapolate(&v1, &state.v);
    let w_hat = extrapolate(&w1, &state.w);
    let (v2, w2) = limit_stage(op, &cfg.model, cfg.dealias, h, state, &v_hat, &w_hat)?;
    Ok(LimitState {
        density: state.density.clone(),
        v: combine(&v1, &v2, &state.v),
        w: combine(&w1, &w2, &state.w),
    })
}

enum Operator {
    Stiff(StiffOperator),
    Limit(LimitOperator),
}

/// Drives one scheme from an initial state, tracking step count and time.
pub struct Integrator {
    cfg: SchemeConfig,
    operator: Operator,
    state: State,
    step: u64,
}

impl Integrator {
    /// Kinetic schemes need `modes` computed for `cfg.eps`; limit schemes
    /// need only the kernel moments.
    pub fn new(cfg: SchemeConfig, kernel: &ConnectivityKernel, modes: Option<Arc<KernelModes>>, state: State) -> Result<Self> {
        cfg.validate()?;
        let operator = match (&state, cfg.scheme.is_limit()) {
            (State::Kinetic(k), false) => {
                let modes = modes.ok_or_else(|| invalid("kinetic schemes need kernel modes"))?;
                if (modes.eps() - cfg.eps).abs() > 1e-12 * cfg.eps {
                    return Err(invalid(format!(
                        "kernel modes were computed for eps = {}, scheme uses eps = {}",
                        modes.eps(),
                        cfg.eps
                    )));
                }
                Operator::Stiff(StiffOperator::new(modes, k.ensemble.density().clone())?)
            }
            (State::Limit(l), true) => Operator::Limit(LimitOperator::new(l.density.clone(), kernel.moments()?)?),
            _ => {
                return Err(invalid(format!(
                    "scheme {} does not match the state kind",
                    cfg.scheme.name()
                )))
            }
        };
        Ok(Self {
            cfg,
            operator,
            state,
            step: 0,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn stiff_operator(&self) -> Option<&StiffOperator> {
        match &self.operator {
            Operator::Stiff(s) => Some(s),
            Operator::Limit(_) => None,
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let next = match (&self.state, &self.operator) {
            (State::Kinetic(k), Operator::Stiff(op)) => State::Kinetic(match self.cfg.scheme {
                SchemeKind::Rk1 => step_rk1(k, op, &self.cfg)?,
                _ => step_hsdirk2(k, op, &self.cfg)?,
            }),
            (State::Limit(l), Operator::Limit(op)) => State::Limit(match self.cfg.scheme {
                SchemeKind::LimitRk1 => step_limit_rk1(l, op, &self.cfg)?,
                _ => step_limit_rk2(l, op, &self.cfg)?,
            }),
            _ => unreachable!("operator matches state by construction"),
        };
        self.step += 1;
        let max = next.max_abs_v();
        if !(max <= BLOW_UP_THRESHOLD) {
            return Err(Error::BlowUp {
                step: self.step,
                time: self.time(),
                reason: if max.is_finite() {
                    format!("|V| reached {max:e}")
                } else {
                    "non-finite value".into()
                },
            });
        }
        self.state = next;
        Ok(())
    }

    /// Steps until `time() >= t` (up to the `steps_to` rounding).
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let target = steps_to(t, self.cfg.dt);
        while self.step < target {
            self.step()?;
        }
        Ok(())
    }

    /// Runs to `cfg.t_end`, calling `observe` after every step.
    pub fn run<F: FnMut(&Integrator) -> Result<()>>(&mut self, mut observe: F) -> Result<()> {
        let target = self.cfg.n_steps();
        while self.step < target {
            self.step()?;
            observe(self)?;
        }
        Ok(())
    }
}
