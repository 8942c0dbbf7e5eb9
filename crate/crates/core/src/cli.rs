//! Command-line front end: configuration files, subcommands and outputs.
//!
//! A run is described by a TOML file. Every block is optional; missing
//! values come from the preset named in `[initial]`. Unknown keys are
//! rejected.
//!
//! ```toml
//! experiment = "entropy-sweep"
//!
//! [initial]
//! preset = "box-1d"
//!
//! [scheme]
//! name = "hsdirk2"
//! dt = 0.02
//!
//! [grid]
//! n_x = 256
//!
//! [sweep]
//! eps = [0.1, 0.05, 0.02, 0.01]
//! ```

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{invalid, Error, Result};
use crate::experiments::{
    run_accuracy_sweep, run_entropy_sweep, run_field_experiment, FieldOptions, FieldRun, InitialDataSpec, Profile,
    Progress, RunSetup, SpreadSpec, DEFAULT_EDGE_WIDTH, DEFAULT_SIGMA0,
};
use crate::io::{load_or_compute_modes, snapshot_file_name, write_field_csv, write_report_csv, write_series_csv, write_snapshot};
use crate::kernel::ConnectivityKernel;
use crate::model::ModelParams;
use crate::particles::ParticleSpread;
use crate::timestepping::SchemeKind;

/// Environment variable that sets the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "FHN_AP_THREADS";

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// One run with snapshots and probes.
    #[default]
    Field,
    /// Error against the exact linear solution over `dt` values.
    AccuracySweep,
    /// Distance to the limit system over `eps` values.
    EntropySweep,
}

impl ExperimentKind {
    pub fn is_sweep(self) -> bool {
        self != ExperimentKind::Field
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    LinearGaussianBump,
    #[default]
    #[serde(rename = "box-1d")]
    Box1d,
    #[serde(rename = "hetero-2d")]
    Hetero2d,
    #[serde(rename = "spiral-2d")]
    Spiral2d,
    Custom,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: Option<usize>,
    pub n_x: Option<usize>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReactionKind {
    Cubic,
    Linear,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub reaction: Option<ReactionKind>,
    pub theta: Option<f64>,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Gaussian,
    Indicator,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: Option<KernelKind>,
    pub sigma0: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeBlock {
    pub name: Option<String>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub t_end: Option<f64>,
    /// Particles per node.
    pub particles: Option<usize>,
    pub dealias: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub preset: Option<Preset>,
    pub edge_width: Option<f64>,
    pub spread: Option<SpreadSpec>,
    pub v0: Option<Profile>,
    pub w0: Option<Profile>,
    pub rho0: Option<Profile>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub dt: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub snapshot_times: Option<Vec<f64>>,
    pub probes: Option<Vec<Vec<f64>>>,
    pub sample_every: Option<f64>,
    pub progress_every: Option<u64>,
    /// Store kernel modes on disk and reuse them across runs.
    pub cache: Option<bool>,
    pub cache_dir: Option<PathBuf>,
}

/// Configuration file as written by the user.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<ExperimentKind>,
    /// Runs are always reproducible bit for bit; `false` is rejected so a
    /// config never suggests otherwise.
    pub deterministic: Option<bool>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub scheme: SchemeBlock,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct Plan {
    pub experiment: ExperimentKind,
    pub setup: RunSetup,
    /// `dt` values of an accuracy sweep or `eps` values of an entropy sweep.
    pub sweep_values: Vec<f64>,
    pub output_dir: PathBuf,
    pub field: FieldOptions,
    pub cache_dir: Option<PathBuf>,
}

pub const DEFAULT_ACCURACY_DTS: [f64; 4] = [2e-2, 1e-2, 5e-3, 2e-3];
pub const DEFAULT_ENTROPY_EPS: [f64; 4] = [1e-1, 5e-2, 2e-2, 1e-2];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message().trim())).with_span(text, e.span()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Validates every field and fills in the preset defaults. All problems
    /// are reported together.
    pub fn resolve(&self) -> Result<Plan> {
        let mut p = Problems::default();
        let experiment = self.experiment.unwrap_or_default();
        let preset = self.initial.preset.unwrap_or(match experiment {
            ExperimentKind::AccuracySweep => Preset::LinearGaussianBump,
            _ => Preset::Box1d,
        });
        p.check(self.deterministic != Some(false), "deterministic = false is not supported".into());

        let fixed_dim = match preset {
            Preset::LinearGaussianBump | Preset::Box1d => Some(1),
            Preset::Hetero2d | Preset::Spiral2d => Some(2),
            Preset::Custom => None,
        };
        let dim = self.grid.dim.or(fixed_dim).unwrap_or(1);
        p.check((1..=3).contains(&dim), format!("grid.dim must be 1, 2 or 3, got {dim}"));
        if let (Some(f), Some(d)) = (fixed_dim, self.grid.dim) {
            p.check(f == d, format!("preset {preset:?} needs grid.dim = {f}, got {d}"));
        }
        let dim = dim.clamp(1, 3);

        let n_x = self.grid.n_x.unwrap_or(match (preset, dim) {
            (Preset::LinearGaussianBump, _) => 128,
            (_, 1) => 512,
            (_, 2) => 128,
            _ => 64,
        });
        p.check(n_x >= 2, format!("n_x must be at least 2, got {n_x}"));
        p.check(n_x.is_multiple_of(2), format!("n_x must be even, got {n_x}"));
        let (dlo, dhi) = match preset {
            Preset::LinearGaussianBump => (-1.0, 1.0),
            _ => (-15.0, 15.0),
        };
        let lower = self.grid.lower.unwrap_or(dlo);
        let upper = self.grid.upper.unwrap_or(dhi);
        p.check(
            lower.is_finite() && upper.is_finite() && lower < upper,
            format!("grid bounds must satisfy lower < upper, got ({lower}, {upper})"),
        );

        let linear_default = preset == Preset::LinearGaussianBump;
        let reaction = self.model.reaction.unwrap_or(if linear_default {
            ReactionKind::Linear
        } else {
            ReactionKind::Cubic
        });
        let theta = self.model.theta.unwrap_or(ModelParams::DEFAULT_THETA);
        // the linear test has no adaptation, so W stays at zero
        let tau = self.model.tau.unwrap_or(match reaction {
            ReactionKind::Linear => 0.0,
            ReactionKind::Cubic => ModelParams::DEFAULT_TAU,
        });
        let gamma = self.model.gamma.unwrap_or(ModelParams::DEFAULT_GAMMA);
        let alpha = self.model.alpha.unwrap_or(0.001);
        p.check(
            !(reaction == ReactionKind::Cubic && self.model.alpha.is_some()),
            "model.alpha only applies to the linear reaction".into(),
        );
        let model = match reaction {
            ReactionKind::Cubic => ModelParams::new(theta, tau, gamma),
            ReactionKind::Linear => ModelParams::linear(alpha, tau, gamma).and_then(|m| {
                ModelParams::new(theta, tau, gamma).map(|_| m)
            }),
        };
        let model = model.map_err(|e| p.check(false, format!("model: {}", strip(&e)))).ok();

        let kernel = match self.kernel.kind.unwrap_or(KernelKind::Gaussian) {
            KernelKind::Gaussian => {
                p.check(self.kernel.radius.is_none(), "kernel.radius only applies to the indicator kernel".into());
                ConnectivityKernel::gaussian(self.kernel.sigma0.unwrap_or(DEFAULT_SIGMA0), dim)
            }
            KernelKind::Indicator => {
                p.check(self.kernel.sigma0.is_none(), "kernel.sigma0 only applies to the gaussian kernel".into());
                ConnectivityKernel::compact_indicator(self.kernel.radius.unwrap_or(1.0), dim)
            }
        };
        let kernel = kernel.map_err(|e| p.check(false, format!("kernel: {}", strip(&e)))).ok();

        let default_scheme = match preset {
            Preset::Spiral2d => "hsdirk2",
            _ => "rk1",
        };
        let scheme: Option<SchemeKind> = self
            .scheme
            .name
            .as_deref()
            .unwrap_or(default_scheme)
            .parse()
            .map_err(|e: Error| p.check(false, format!("scheme.name: {}", strip(&e))))
            .ok();
        let dt = self.scheme.dt.unwrap_or(match (preset, dim) {
            (Preset::LinearGaussianBump, _) => 5e-3,
            (_, 1) => 0.01,
            _ => 0.02,
        });
        p.check(dt > 0.0 && dt.is_finite(), format!("scheme.dt must be > 0, got {dt}"));
        let eps = self.scheme.eps.unwrap_or(match preset {
            Preset::Spiral2d => 0.5,
            _ => 1.0,
        });
        p.check(eps > 0.0 && eps.is_finite(), format!("scheme.eps must be > 0, got {eps}"));
        let t_end = self.scheme.t_end.unwrap_or(match preset {
            Preset::LinearGaussianBump => 10.0,
            Preset::Box1d | Preset::Custom => 250.0,
            Preset::Hetero2d => 700.0,
            Preset::Spiral2d => 800.0,
        });
        p.check(t_end >= 0.0 && t_end.is_finite(), format!("scheme.t_end must be >= 0, got {t_end}"));
        let m = self.scheme.particles.unwrap_or(if dim >= 2 && preset != Preset::Custom { 10 } else { 1 });
        p.check(m >= 1, "scheme.particles must be at least 1".into());

        let edge_width = self.initial.edge_width.unwrap_or(DEFAULT_EDGE_WIDTH);
        p.check(edge_width > 0.0 && edge_width.is_finite(), format!("initial.edge_width must be > 0, got {edge_width}"));
        let spread = self.initial.spread.map(ParticleSpread::from);
        if let Some(ParticleSpread::Box { v_width, w_width }) = spread {
            p.check(
                v_width >= 0.0 && w_width >= 0.0 && v_width.is_finite() && w_width.is_finite(),
                format!("initial.spread widths must be >= 0, got ({v_width}, {w_width})"),
            );
        }
        let profiles = [&self.initial.v0, &self.initial.w0, &self.initial.rho0];
        let initial = match preset {
            Preset::Custom => {
                let get = |prof: &Option<Profile>, name: &str, fallback: f64, problems: &mut Vec<String>| match prof {
                    Some(prof) => {
                        if let Err(e) = prof.validate(dim) {
                            problems.push(format!("initial.{name}: {}", strip(&e)));
                        }
                        prof.clone()
                    }
                    None => Profile::Constant { value: fallback },
                };
                if self.initial.v0.is_none() {
                    p.check(false, "initial.v0 is required for the custom preset".into());
                }
                let v0 = get(&self.initial.v0, "v0", 0.0, &mut p.0);
                let w0 = get(&self.initial.w0, "w0", 0.0, &mut p.0);
                let rho0 = get(&self.initial.rho0, "rho0", 1.0, &mut p.0);
                InitialDataSpec::Custom {
                    v0,
                    w0,
                    rho0,
                    spread: spread.unwrap_or(ParticleSpread::Dirac),
                }
            }
            other => {
                if profiles.iter().any(|q| q.is_some()) {
                    p.0.push("initial.v0, w0 and rho0 only apply to the custom preset".into());
                }
                match other {
                    Preset::LinearGaussianBump | Preset::Box1d => {
                        if spread.is_some() || self.initial.edge_width.is_some() {
                            p.0.push("the 1D presets use Dirac data without edges".into());
                        }
                        if other == Preset::Box1d {
                            InitialDataSpec::Box1D
                        } else {
                            InitialDataSpec::LinearGaussianBump
                        }
                    }
                    Preset::Hetero2d | Preset::Spiral2d => {
                        let default = InitialDataSpec::hetero_2d().profiles(2).3;
                        let spread = spread.unwrap_or(default);
                        if other == Preset::Hetero2d {
                            InitialDataSpec::Hetero2D { edge_width, spread }
                        } else {
                            InitialDataSpec::Spiral2D { edge_width, spread }
                        }
                    }
                    Preset::Custom => unreachable!(),
                }
            }
        };

        let sweep_values = match experiment {
            ExperimentKind::Field => {
                if self.sweep.dt.is_some() || self.sweep.eps.is_some() {
                    p.0.push("[sweep] only applies to sweep experiments".into());
                }
                Vec::new()
            }
            ExperimentKind::AccuracySweep => {
                if self.sweep.eps.is_some() {
                    p.0.push("sweep.eps does not apply to the accuracy sweep".into());
                }
                self.sweep.dt.clone().unwrap_or(DEFAULT_ACCURACY_DTS.to_vec())
            }
            ExperimentKind::EntropySweep => {
                if self.sweep.dt.is_some() {
                    p.0.push("sweep.dt does not apply to the entropy sweep".into());
                }
                self.sweep.eps.clone().unwrap_or(DEFAULT_ENTROPY_EPS.to_vec())
            }
        };
        if experiment.is_sweep() {
            p.check(!sweep_values.is_empty(), "sweep values must not be empty".into());
            p.check(
                sweep_values.iter().all(|v| *v > 0.0 && v.is_finite()),
                "sweep values must be positive".into(),
            );
            p.check(
                sweep_values.windows(2).all(|w| w[1] < w[0]),
                "sweep values must be strictly decreasing".into(),
            );
        }
        if experiment == ExperimentKind::AccuracySweep {
            p.check(reaction == ReactionKind::Linear, "the accuracy sweep needs model.reaction = \"linear\"".into());
            p.check(tau == 0.0, "the accuracy sweep needs model.tau = 0".into());
        }
        if let Some(s) = scheme {
            p.check(
                !(experiment.is_sweep() && s.is_limit()),
                "sweeps need a kinetic scheme (rk1 or hsdirk2)".into(),
            );
        }

        let out = &self.output;
        let snapshot_times = out.snapshot_times.clone().unwrap_or_default();
        for t in &snapshot_times {
            p.check(
                *t >= 0.0 && *t <= t_end,
                format!("output.snapshot_times: {t} is outside [0, {t_end}]"),
            );
        }
        let probes = out.probes.clone().unwrap_or_default();
        for q in &probes {
            p.check(
                q.len() == dim && q.iter().all(|x| *x >= lower && *x <= upper),
                format!("output.probes: {q:?} is not a point of the {dim}-dimensional domain"),
            );
        }
        let sample_every = out.sample_every.unwrap_or(1.0);
        p.check(
            sample_every > 0.0 && sample_every.is_finite(),
            format!("output.sample_every must be > 0, got {sample_every}"),
        );
        p.check(
            !(out.cache_dir.is_some() && out.cache == Some(false)),
            "output.cache_dir is set but output.cache = false".into(),
        );

        if !p.0.is_empty() {
            return Err(invalid(p.0.join("\n")));
        }
        let output_dir = out.directory.clone().unwrap_or_else(|| PathBuf::from("output"));
        let cache_dir = match (out.cache.unwrap_or(out.cache_dir.is_some()), &out.cache_dir) {
            (false, _) => None,
            (true, Some(d)) => Some(d.clone()),
            (true, None) => Some(output_dir.join("modes")),
        };
        Ok(Plan {
            experiment,
            setup: RunSetup {
                dim,
                n_x,
                domain: (lower, upper),
                kernel: kernel.expect("checked"),
                model: model.expect("checked"),
                scheme: scheme.expect("checked"),
                dt,
                eps,
                t_end,
                m,
                dealias: self.scheme.dealias.unwrap_or(false),
                initial,
            },
            sweep_values,
            output_dir,
            field: FieldOptions {
                snapshot_times,
                probes,
                sample_every,
                progress_every: out.progress_every.unwrap_or(1000),
            },
            cache_dir,
        })
    }
}

#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn check(&mut self, ok: bool, msg: String) {
        if !ok {
            self.0.push(msg);
        }
    }
}

trait WithSpan {
    fn with_span(self, text: &str, span: Option<std::ops::Range<usize>>) -> Self;
}

impl WithSpan for Error {
    /// Appends the line number of a parse error.
    fn with_span(self, text: &str, span: Option<std::ops::Range<usize>>) -> Self {
        match (self, span) {
            (Error::InvalidParameter(msg), Some(r)) => {
                let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
                Error::InvalidParameter(format!("{msg} (line {line})"))
            }
            (e, _) => e,
        }
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::InvalidParameter(m) => m.clone(),
        other => other.to_string(),
    }
}

impl Plan {
    /// Redirects the output directory, moving a cache directory that lived inside it.
    pub fn with_output(mut self, dir: Option<PathBuf>) -> Self {
        if let Some(dir) = dir {
            if let Some(cache) = &self.cache_dir {
                if cache.starts_with(&self.output_dir) {
                    self.cache_dir = Some(dir.join(cache.strip_prefix(&self.output_dir).expect("prefix checked")));
                }
            }
            self.output_dir = dir;
        }
        self
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(name = "fhn-ap", version, about = "Particle/spectral FitzHugh-Nagumo transport solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured experiment and write its outputs.
    Run(CommonArgs),
    /// Run an accuracy or entropy sweep and write the report table.
    Sweep(CommonArgs),
    /// Compute the kernel modes and store them in the cache.
    Modes(CommonArgs),
    /// Check the configuration and print the resolved setup.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Output directory, overriding `output.directory`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Print nothing but errors.
    #[arg(long, short)]
    pub quiet: bool,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a) | Command::Sweep(a) | Command::Modes(a) | Command::Validate(a) => a,
        }
    }
}

/// Parses the arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run_command(&cli.command, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one subcommand inside a pool of the requested size.
pub fn run_command(command: &Command, out: &mut (dyn Write + Send)) -> Result<()> {
    let args = command.args();
    let plan = RunConfig::load(&args.config)?.resolve()?.with_output(args.output.clone());
    if let Command::Validate(_) = command {
        if !args.quiet {
            writeln!(out, "config ok: {}", args.config.display())?;
            for (k, v) in plan.setup.describe() {
                writeln!(out, "  {k}: {v}")?;
            }
        }
        return Ok(());
    }
    if let Some(0) = args.threads {
        return Err(invalid("--threads must be at least 1"));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| invalid(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Run(_) => execute(&plan, args.quiet, out),
        Command::Sweep(_) => {
            if !plan.experiment.is_sweep() {
                return Err(invalid("sweep needs experiment = \"accuracy-sweep\" or \"entropy-sweep\""));
            }
            execute(&plan, args.quiet, out)
        }
        Command::Modes(_) => precompute_modes(&plan, args.quiet, out),
        Command::Validate(_) => unreachable!(),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("cannot create {}: {e}", dir.display())))
    })
}

/// Runs the plan and writes its artifacts under the output directory.
pub fn execute(plan: &Plan, quiet: bool, out: &mut (dyn Write + Send)) -> Result<()> {
    create_dir(&plan.output_dir)?;
    let cache = plan.cache_dir.as_deref();
    match plan.experiment {
        ExperimentKind::AccuracySweep | ExperimentKind::EntropySweep => {
            let report = if plan.experiment == ExperimentKind::AccuracySweep {
                run_accuracy_sweep(&plan.setup, &plan.sweep_values, cache)?
            } else {
                run_entropy_sweep(&plan.setup, &plan.sweep_values, cache)?
            };
            let path = plan.output_dir.join("report.csv");
            write_report_csv(&path, &report)?;
            if !quiet {
                writeln!(out, "{report}")?;
                writeln!(out, "  report: {}", path.display())?;
            }
        }
        ExperimentKind::Field => {
            let mut err = std::io::stderr();
            let run = run_field_experiment(&plan.setup, &plan.field, cache, |p: &Progress| {
                if !quiet {
                    let _ = writeln!(
                        err,
                        "step {:>8}  t = {:>10.3}  max|V| = {:.4e}  wall = {:.1} s",
                        p.step,
                        p.time,
                        p.max_abs_v,
                        p.wall.as_secs_f64()
                    );
                }
            })?;
            let written = write_field_outputs(plan, &run)?;
            if !quiet {
                for (k, v) in plan.setup.describe() {
                    writeln!(out, "{k}: {v}")?;
                }
                let (v, _) = run.final_state.macro_fields();
                writeln!(out, "final max|V|: {:.6e}", v.max_abs())?;
                writeln!(out, "files written: {written}")?;
                writeln!(out, "wall time: {:.2} s", run.elapsed.as_secs_f64())?;
            }
        }
    }
    Ok(())
}

/// Snapshots, probe series and the `max |V|` series; returns the file count.
fn write_field_outputs(plan: &Plan, run: &FieldRun) -> Result<usize> {
    let dir = &plan.output_dir;
    let mut count = 0;
    for (t, field) in &run.snapshots {
        write_snapshot(&dir.join(snapshot_file_name("v", *t)), field, *t)?;
        count += 1;
        if field.grid().dim() == 1 {
            let name = snapshot_file_name("v", *t).replace(".bin", ".csv");
            write_field_csv(&dir.join(name), field)?;
            count += 1;
        }
    }
    for (i, probe) in run.probes.iter().enumerate() {
        write_series_csv(&dir.join(format!("probe-{i}.csv")), ["t", "value"], &probe.samples)?;
        count += 1;
    }
    write_series_csv(&dir.join("max-abs.csv"), ["t", "max_abs_v"], &run.max_abs)?;
    Ok(count + 1)
}

fn precompute_modes(plan: &Plan, quiet: bool, out: &mut (dyn Write + Send)) -> Result<()> {
    let dir = plan.cache_dir.clone().unwrap_or_else(|| plan.output_dir.join("modes"));
    let grid = plan.setup.grid()?;
    let eps_values = match plan.experiment {
        ExperimentKind::EntropySweep => plan.sweep_values.clone(),
        _ => vec![plan.setup.eps],
    };
    for eps in eps_values {
        let start = Instant::now();
        load_or_compute_modes(&plan.setup.kernel, &grid, eps, Some(&dir))?;
        if !quiet {
            writeln!(
                out,
                "modes for eps = {eps} on n_x = {} (d = {}): {:.2} s",
                grid.n(),
                grid.dim(),
                start.elapsed().as_secs_f64()
            )?;
        }
    }
    if !quiet {
        writeln!(out, "cache: {}", dir.display())?;
    }
    Ok(())
}
