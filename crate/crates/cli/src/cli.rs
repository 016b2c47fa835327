//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use polling_core::branching::{
    extinction_probs, sample_xi, session_mean_matrix, visit_means, ExtinctionOptions, VisitMeans,
    XiOptions, DEFAULT_DEPTH, DEFAULT_ZETA_POP_CAP,
};
use polling_core::dist::GatingIndex;
use polling_core::fluid::{eval_fluid, fluid_constants, log_grid, scaled_limit, FluidConstants};
use polling_core::lab::{
    busy_period_moments, ratios_from_paths, simulate_to_time, trajectory_distances, xi_from_paths,
    BusyMomentReport, Horizon,
};
use polling_core::model::{validate_config, RejectReason, Verdict};
use polling_core::perron::{perron, Matrix, SpectralData};
use polling_core::sim::{run_trace, SimOptions};
use polling_core::stats::ks_two_sample;
use polling_core::{Executor, Model, RngStream, StreamFamily};

use crate::config::{gate_label, parse_gate_count, ConfigFile};
use crate::error::CliError;
use crate::exec::RayonExecutor;
use crate::output::{numbered, Csv, RunInfo, Sink};

#[derive(Debug, Parser)]
#[command(
    name = "polling",
    version,
    about = "Overloaded cyclic polling systems: simulation and fluid limits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configuration's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for replications (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Omit timestamps so that repeated runs are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
}

/// `t0:T:points`, optionally followed by `:log` or `:lin` (default `lin`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub points: usize,
    pub log: bool,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("grid {s:?} is not t0:T:points[:log]"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let (t0, t1) = (num(parts[0])?, num(parts[1])?);
        let points = parts[2]
            .parse::<usize>()
            .map_err(|e| format!("{:?}: {e}", parts[2]))?;
        let log = match parts.get(3) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(other) => return Err(format!("grid spacing {other:?} is neither log nor lin")),
        };
        if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 >= t0) {
            return Err(format!("grid needs 0 <= t0 <= T, got {t0}:{t1}"));
        }
        if points == 0 {
            return Err("grid needs at least one point".into());
        }
        if log && t0 <= 0.0 {
            return Err("a log grid needs t0 > 0".into());
        }
        Ok(GridSpec {
            t0,
            t1,
            points,
            log,
        })
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.log {
            return log_grid(self.t0, self.t1, self.points);
        }
        if self.points == 1 {
            return vec![self.t0];
        }
        let h = (self.t1 - self.t0) / (self.points - 1) as f64;
        (0..self.points).map(|j| self.t0 + h * j as f64).collect()
    }

    fn label(&self) -> String {
        format!(
            "{}:{}:{}:{}",
            self.t0,
            self.t1,
            self.points,
            if self.log { "log" } else { "lin" }
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the overload assumptions; exit status 0 iff accepted.
    Validate(Common),
    /// Mean matrices, Perron data, extinction probabilities and fluid constants.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Replications per extinction probability.
        #[arg(long, default_value_t = 4000)]
        reps: usize,
        #[arg(long, default_value_t = 200)]
        gen_cap: u32,
        #[arg(long, default_value_t = 10_000)]
        pop_cap: u64,
    },
    /// Event-driven simulation from the empty state; writes the session trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        sessions: u64,
        /// Also sample Q(t) on this grid (requires --trajectory).
        #[arg(long)]
        grid: Option<GridSpec>,
        /// File for the grid-sampled trajectory.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long, default_value_t = 500_000_000)]
        max_events: u64,
    },
    /// Deterministic fluid trajectory on a grid.
    Fluid {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.01:100:500:log")]
        grid: GridSpec,
        /// Evaluate xi * qbar(t / xi) instead of qbar(t).
        #[arg(long)]
        xi: Option<f64>,
    },
    /// Samples of the random scaling factor xi.
    SampleXi {
        #[command(flatten)]
        common: Common,
        /// Number of samples.
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long, default_value_t = DEFAULT_ZETA_POP_CAP)]
        pop_cap: u64,
        /// Summary JSON file; standard error when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Convergence report: switching ratios, xi law, trajectory distances, busy moments.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Simulated paths per scale.
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value = "6,8,10", value_delimiter = ',', num_args = 1..)]
        scales: Vec<i32>,
        /// Generations used by the xi sampler.
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        /// Samples drawn from the xi sampler.
        #[arg(long, default_value_t = 2000)]
        xi_samples: usize,
        /// Grid for the trajectory distance, in units of rho^n.
        #[arg(long, default_value = "0.5:4:50:log")]
        grid: GridSpec,
        #[arg(long, default_value_t = 10_000)]
        busy_reps: usize,
        /// CSV file receiving the simulation-extracted xi samples.
        #[arg(long)]
        xi_out: Option<PathBuf>,
    },
    /// Visit-duration moments of one queue in isolation.
    BusyMoments {
        #[command(flatten)]
        common: Common,
        /// Queue, 1-based.
        #[arg(long, default_value_t = 1)]
        queue: usize,
        /// Indices k (visit of k + 1 gates); "inf" for the full busy period.
        #[arg(long, default_value = "0,1,2,5,inf", value_delimiter = ',', num_args = 1.., value_parser = parse_gate_count)]
        gates: Vec<GatingIndex>,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Loaded {
    file: ConfigFile,
    hash: String,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let mut file = ConfigFile::load(&common.config)?;
    if let Some(seed) = common.seed {
        file.base_seed = seed;
    }
    let hash = file.hash();
    Ok(Loaded { file, hash })
}

impl Loaded {
    fn model(&self) -> Result<Model, CliError> {
        Ok(Model::new(self.file.to_model_config()?)?)
    }

    fn info(&self, command: &'static str, common: &Common, knobs: Value) -> RunInfo {
        let mut params = json!({
            "config": self.file,
            "base_seed": self.file.base_seed,
            "config_path": common.config.display().to_string(),
        });
        if let (Value::Object(p), Value::Object(k)) = (&mut params, knobs) {
            p.extend(k);
        }
        RunInfo::new(command, self.hash.clone(), params, common.deterministic)
    }
}

fn executor(common: &Common) -> Result<RayonExecutor, CliError> {
    RayonExecutor::new(common.threads).map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn out(common: &Common) -> Sink {
    Sink::from_option(common.out.as_deref())
}

fn matrix_json(m: &Matrix) -> Value {
    json!(m.rows())
}

/// Analytic pipeline shared by several commands.
struct Analytic {
    vm: VisitMeans,
    m: Matrix,
    spectral: SpectralData,
    fluid: FluidConstants,
}

fn analytic(model: &Model) -> Result<Analytic, CliError> {
    let vm = visit_means(model)?;
    let m = session_mean_matrix(&vm);
    let spectral = perron(&m)?;
    let fluid = fluid_constants(model, &vm, &spectral)?;
    Ok(Analytic {
        vm,
        m,
        spectral,
        fluid,
    })
}

fn fluid_json(fc: &FluidConstants) -> Value {
    json!({
        "alpha": fc.alpha,
        "b_bar": fc.b_bar,
        "a_bar": fc.a_bar,
        "b": fc.b,
        "a": fc.a,
        "rho": fc.rho,
    })
}

fn reason_json(r: &RejectReason) -> Value {
    let queue = match r {
        RejectReason::QueueOverloaded(i) | RejectReason::InfiniteBLogB(i) => json!(i + 1),
        _ => Value::Null,
    };
    json!({"code": r.code(), "queue": queue})
}

pub fn dispatch(cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::Validate(common) => validate(common),
        Command::Analyze {
            common,
            reps,
            gen_cap,
            pop_cap,
        } => analyze(common, *reps, *gen_cap, *pop_cap),
        Command::Simulate {
            common,
            sessions,
            grid,
            trajectory,
            max_events,
        } => simulate(
            common,
            *sessions,
            grid.as_ref(),
            trajectory.as_deref(),
            *max_events,
        ),
        Command::Fluid { common, grid, xi } => fluid(common, grid, *xi),
        Command::SampleXi {
            common,
            reps,
            depth,
            pop_cap,
            summary,
        } => sample_xi_cmd(common, *reps, *depth, *pop_cap, summary.as_deref()),
        Command::Verify {
            common,
            reps,
            scales,
            depth,
            xi_samples,
            grid,
            busy_reps,
            xi_out,
        } => verify(
            common,
            VerifyKnobs {
                reps: *reps,
                scales,
                depth: *depth,
                xi_samples: *xi_samples,
                grid,
                busy_reps: *busy_reps,
                xi_out: xi_out.as_deref(),
            },
        ),
        Command::BusyMoments {
            common,
            queue,
            gates,
            reps,
        } => busy(common, *queue, gates, *reps),
    }
}

fn validate(common: &Common) -> Result<i32, CliError> {
    let loaded = load(common)?;
    let report = validate_config(&loaded.file.to_model_config()?)?;
    let accepted = report.verdict == Verdict::Accept;
    let body = json!({
        "per_queue_load": report.per_queue_load,
        "total_load": report.total_load,
        "b_log_b_finite": report.b_log_b_finite,
        "verdict": if accepted { "accept" } else { "reject" },
        "reasons": report.reasons.iter().map(reason_json).collect::<Vec<_>>(),
    });
    out(common).write(&loaded.info("validate", common, json!({})).report(body))?;
    Ok(if accepted { 0 } else { 1 })
}

fn analyze(common: &Common, reps: usize, gen_cap: u32, pop_cap: u64) -> Result<i32, CliError> {
    let loaded = load(common)?;
    let model = loaded.model()?;
    let a = analytic(&model)?;
    let exec = executor(common)?;
    let opts = ExtinctionOptions {
        reps,
        gen_cap,
        pop_cap,
    };
    let ext = extinction_probs(
        &model,
        opts,
        &StreamFamily::new(model.base_seed(), "extinction"),
        &exec,
    )?;
    let body = json!({
        "branching": {
            "m_check": matrix_json(&a.vm.m_check),
            "gamma": a.vm.gamma,
            "M": matrix_json(&a.m),
            "rho": a.spectral.rho,
            "u": a.spectral.u,
            "v": a.spectral.v,
            "reducible": a.spectral.reducible,
            "q": ext.q,
            "q_se": ext.q_se,
            "q_G": ext.q_g,
            "q_G_se": ext.q_g_se,
            "ambiguity_fraction": ext.ambiguity_fraction,
            "caps_too_tight": ext.caps_too_tight,
        },
        "fluid": fluid_json(&a.fluid),
    });
    let knobs = json!({"reps": reps, "gen_cap": gen_cap, "pop_cap": pop_cap});
    out(common).write(&loaded.info("analyze", common, knobs).report(body))?;
    Ok(0)
}

fn simulate(
    common: &Common,
    sessions: u64,
    grid: Option<&GridSpec>,
    trajectory: Option<&Path>,
    max_events: u64,
) -> Result<i32, CliError> {
    if grid.is_some() != trajectory.is_some() {
        return Err(CliError::Usage(
            "--grid and --trajectory go together".into(),
        ));
    }
    let loaded = load(common)?;
    let model = loaded.model()?;
    let n = model.len();
    let points = grid.map(GridSpec::points);
    let mut rng = RngStream::new(model.base_seed(), "simulate", 0);
    let opts = SimOptions {
        max_events,
        track_customers: false,
    };
    let trace = run_trace(&model, &mut rng, sessions, opts, points.as_deref())?;
    let knobs = json!({
        "sessions": sessions,
        "max_events": max_events,
        "grid": grid.map(GridSpec::label),
    });
    let info = loaded.info("simulate", common, knobs);

    let mut cols = vec!["session".to_string(), "i".to_string(), "t_i".to_string()];
    cols.extend(numbered("Q", n));
    let mut csv = Csv::new(&info, &cols);
    for s in &trace.sessions {
        for (i, (t, q)) in s.visit_starts.iter().zip(&s.q_at_visits).enumerate() {
            let mut row = vec![s.index.to_string(), (i + 1).to_string(), t.to_string()];
            row.extend(q.iter().map(u64::to_string));
            csv.row(row);
        }
    }
    out(common).write(&csv.finish())?;

    if let (Some(traj), Some(path)) = (trace.trajectory, trajectory) {
        let mut cols = vec!["t".to_string()];
        cols.extend(numbered("Q", n));
        let mut csv = Csv::new(&info, &cols);
        for (t, v) in traj.times.iter().zip(&traj.values) {
            let mut row = vec![t.to_string()];
            match v {
                Some(q) => row.extend(q.iter().map(u64::to_string)),
                None => row.extend(std::iter::repeat_n(String::new(), n)),
            }
            csv.row(row);
        }
        Sink::File(path.to_path_buf()).write(&csv.finish())?;
    }
    Ok(0)
}

fn fluid(common: &Common, grid: &GridSpec, xi: Option<f64>) -> Result<i32, CliError> {
    let loaded = load(common)?;
    let model = loaded.model()?;
    let a = analytic(&model)?;
    let knobs = json!({"grid": grid.label(), "xi": xi});
    let info = loaded.info("fluid", common, knobs);
    let mut cols = vec!["t".to_string()];
    cols.extend(numbered("qbar", model.len()));
    let mut csv = Csv::new(&info, &cols);
    for t in grid.points() {
        let q = match xi {
            Some(x) => scaled_limit(&a.fluid, x, t)?,
            None => eval_fluid(&a.fluid, t)?,
        };
        csv.row(std::iter::once(t).chain(q));
    }
    out(common).write(&csv.finish())?;
    Ok(0)
}

fn sample_xi_cmd(
    common: &Common,
    reps: usize,
    depth: u32,
    pop_cap: u64,
    summary: Option<&Path>,
) -> Result<i32, CliError> {
    let loaded = load(common)?;
    let model = loaded.model()?;
    let a = analytic(&model)?;
    let exec = executor(common)?;
    let opts = XiOptions {
        n_samples: reps,
        depth,
        pop_cap,
    };
    let fam = StreamFamily::new(model.base_seed(), "xi-formula");
    let xs = sample_xi(&model, &a.spectral, a.fluid.alpha, opts, &fam, &exec)?;
    let knobs = json!({"reps": reps, "depth": depth, "pop_cap": pop_cap});
    let info = loaded.info("sample-xi", common, knobs);
    let mut csv = Csv::new(&info, &["xi".to_string()]);
    for x in &xs.values {
        csv.row([x]);
    }
    out(common).write(&csv.finish())?;
    let mean = xs.values.iter().sum::<f64>() / xs.values.len().max(1) as f64;
    let body = json!({
        "samples_path": out(common).label(),
        "n_samples": xs.values.len(),
        "attempts": xs.attempts,
        "rejected": xs.rejected,
        "mean": mean,
        "min": xs.values.iter().copied().fold(f64::INFINITY, f64::min),
        "max": xs.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "rho": a.fluid.rho,
        "alpha": a.fluid.alpha,
    });
    let text = info.report(body);
    match summary {
        Some(p) => Sink::File(p.to_path_buf()).write(&text)?,
        None => eprint!("{text}"),
    }
    Ok(0)
}

struct VerifyKnobs<'a> {
    reps: usize,
    scales: &'a [i32],
    depth: u32,
    xi_samples: usize,
    grid: &'a GridSpec,
    busy_reps: usize,
    xi_out: Option<&'a Path>,
}

fn busy_json(r: &BusyMomentReport) -> Value {
    json!({
        "i": r.queue + 1,
        "k": gate_label(r.k),
        "gates": gate_label(r.gates),
        "mean": r.mean.mean,
        "mean_se": r.mean.se,
        "mean_target": r.mean_target,
        "f_moment": r.f_moment.mean,
        "f_moment_se": r.f_moment.se,
        "bound_c": r.bound_c.mean,
        "bound": r.bound,
        "bound_se": r.bound_se,
    })
}

fn verify(common: &Common, k: VerifyKnobs<'_>) -> Result<i32, CliError> {
    let loaded = load(common)?;
    let model = loaded.model()?;
    let a = analytic(&model)?;
    let exec = executor(common)?;
    let seed = model.base_seed();
    let n_max = *k.scales.iter().max().expect("scales parsed non-empty");
    let horizon = Horizon::default();

    let path_family = StreamFamily::new(seed, "verify-paths");
    let paths = exec
        .map(k.reps, |r| {
            simulate_to_time(
                &model,
                a.fluid.rho.powi(n_max),
                horizon,
                &mut path_family.stream(r as u64),
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let ratios = ratios_from_paths(&a.fluid, k.scales, &paths);
    let extracted = xi_from_paths(&a.fluid, &a.spectral, n_max, &paths)?;

    let xi_opts = XiOptions {
        n_samples: k.xi_samples,
        depth: k.depth,
        pop_cap: DEFAULT_ZETA_POP_CAP,
    };
    let formula = sample_xi(
        &model,
        &a.spectral,
        a.fluid.alpha,
        xi_opts,
        &StreamFamily::new(seed, "xi-formula"),
        &exec,
    )?;
    let ks = if extracted.xi.is_empty() {
        None
    } else {
        Some(ks_two_sample(&extracted.xi, &formula.values))
    };

    let grid = k.grid.points();
    let mut trajectory = Vec::new();
    let mut dropped = ratios.dropped;
    for &n in k.scales {
        let fam = StreamFamily::new(seed, "verify-trajectory").child(&n.to_string());
        let rep =
            trajectory_distances(&model, &a.fluid, &a.spectral, n, &grid, k.reps, &fam, &exec)?;
        dropped.count += rep.dropped.count;
        dropped.total += rep.dropped.total;
        trajectory
            .push(json!({"n": n, "sup_distance": rep.median, "replications": rep.distances.len()}));
    }

    let mut busy = Vec::new();
    for i in 0..model.len() {
        for g in [
            GatingIndex::Finite(0),
            GatingIndex::Finite(1),
            GatingIndex::Infinite,
        ] {
            let fam = StreamFamily::new(seed, "busy").child(&i.to_string());
            busy.push(busy_json(&busy_period_moments(
                &model,
                i,
                g,
                k.busy_reps,
                &fam,
                &exec,
            )?));
        }
    }

    let knobs = json!({
        "reps": k.reps,
        "scales": k.scales,
        "depth": k.depth,
        "xi_samples": k.xi_samples,
        "grid": k.grid.label(),
        "busy_reps": k.busy_reps,
    });
    let info = loaded.info("verify", common, knobs);
    if let Some(p) = k.xi_out {
        let mut csv = Csv::new(&info, &["xi".to_string()]);
        for x in &extracted.xi {
            csv.row([x]);
        }
        Sink::File(p.to_path_buf()).write(&csv.finish())?;
    }
    let body = json!({
        "ratios": ratios.entries.iter().map(|e| json!({
            "kind": e.kind.name(),
            "i": e.i + 1,
            "n": e.n,
            "median": e.median,
            "iqr": e.iqr,
            "target": e.target,
        })).collect::<Vec<_>>(),
        "xi": {
            "samples_path": Sink::from_option(k.xi_out).label(),
            "n_extracted": extracted.xi.len(),
            "n_formula": formula.values.len(),
            "ks": ks.map(|o| o.statistic),
            "critical": ks.map(|o| o.critical_001),
            "eta_constant": extracted.eta_constant,
            "eta_matches_floor": extracted.eta_matches_floor,
        },
        "trajectory": trajectory,
        "busy": busy,
        "dropped": {"count": dropped.count, "total": dropped.total},
    });
    out(common).write(&info.report(body))?;
    Ok(0)
}

fn busy(
    common: &Common,
    queue: usize,
    gates: &[GatingIndex],
    reps: usize,
) -> Result<i32, CliError> {
    let loaded = load(common)?;
    let model = loaded.model()?;
    if queue == 0 || queue > model.len() {
        return Err(CliError::Usage(format!(
            "--queue must be in 1..={}",
            model.len()
        )));
    }
    let exec = executor(common)?;
    let fam = StreamFamily::new(model.base_seed(), "busy").child(&(queue - 1).to_string());
    let reports = gates
        .iter()
        .map(|&g| {
            busy_period_moments(&model, queue - 1, g, reps, &fam, &exec).map(|r| busy_json(&r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let knobs = json!({
        "queue": queue,
        "gates": gates.iter().map(|g| gate_label(*g)).collect::<Vec<_>>(),
        "reps": reps,
    });
    out(common).write(
        &loaded
            .info("busy-moments", common, knobs)
            .report(json!({ "busy": reports })),
    )?;
    Ok(0)
}
