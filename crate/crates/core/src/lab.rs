//! Monte Carlo checks of the scaling limits against the full simulator, and
//! busy-period moments of a queue in isolation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed when std is absent from the build
use num_traits::Float;

use rand::Rng;

use crate::branching::xi_from_zeta;
use crate::dist::{sample_exponential, GatingIndex, ServiceDistribution};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fluid::{scaled_limit, FluidConstants};
use crate::model::Model;
use crate::perron::SpectralData;
use crate::rng::StreamFamily;
use crate::sim::{SessionRecord, SimOptions, Simulator};
use crate::stats::{iqr, median, x_log_x, Accumulator, Estimate};

/// Limits on one simulated path; a replication that hits them is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Horizon {
    pub max_sessions: u64,
    pub max_events: u64,
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon {
            max_sessions: 100_000,
            max_events: 50_000_000,
        }
    }
}

/// One path from the empty state at time zero, run until some session
/// starting at or after `until` has been completed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePath {
    pub sessions: Vec<SessionRecord>,
}

fn project(q: &[u64], u: &[f64]) -> f64 {
    q.iter().zip(u).map(|(&k, &x)| k as f64 * x).sum()
}

impl ScalePath {
    /// `eta = min{k : t^(k) >= threshold}`.
    pub fn eta(&self, threshold: f64) -> Option<usize> {
        self.sessions.iter().position(|s| s.t_session >= threshold)
    }

    /// `Q(t^(m)) . u / rho^m`
    pub fn zeta_at(&self, m: usize, spectral: &SpectralData) -> Option<f64> {
        let s = self.sessions.get(m)?;
        Some(project(&s.q_at_session, &spectral.u) / spectral.rho.powi(m as i32))
    }

    /// `zeta` estimate at the state after the last completed session.
    pub fn zeta_last(&self, spectral: &SpectralData) -> f64 {
        let last = self.sessions.last().expect("non-empty path");
        let m = self.sessions.len();
        project(&last.q_at_visits[last.q_at_visits.len() - 1], &spectral.u)
            / spectral.rho.powi(m as i32)
    }
}

/// Simulates until a session starting at or after `until` is complete.
/// `Ok(None)` means the horizon was exhausted first.
pub fn simulate_to_time<R: Rng + ?Sized>(
    model: &Model,
    until: f64,
    horizon: Horizon,
    rng: &mut R,
) -> Result<Option<ScalePath>> {
    let opts = SimOptions {
        max_events: horizon.max_events,
        track_customers: false,
    };
    let mut sim = Simulator::new(model, opts, rng);
    let mut sessions = Vec::new();
    loop {
        if sessions.len() as u64 >= horizon.max_sessions {
            return Ok(None);
        }
        let rec = match sim.run_session(rng) {
            Ok(r) => r,
            Err(Error::EventBudget { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let done = rec.t_session >= until;
        sessions.push(rec);
        if done {
            return Ok(Some(ScalePath { sessions }));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    /// `t_(i+1) / t_i`, target `bbar_(i+1) / bbar_i`.
    Switch,
    /// `Q_i(t_i) / t_i`, target `abar_ii / bbar_i`.
    Own,
    /// `Q_i(t_(i+1)) / t_(i+1)`, target `abar_(i+1),i / bbar_(i+1)`; zero
    /// exactly when queue `i` is served exhaustively.
    Left,
}

impl RatioKind {
    pub fn name(self) -> &'static str {
        match self {
            RatioKind::Switch => "switch",
            RatioKind::Own => "own",
            RatioKind::Left => "left",
        }
    }

    pub fn target(self, fc: &FluidConstants, i: usize) -> f64 {
        match self {
            RatioKind::Switch => fc.b_bar[i + 1] / fc.b_bar[i],
            RatioKind::Own => fc.a_bar[i][i] / fc.b_bar[i],
            RatioKind::Left => fc.a_bar[i + 1][i] / fc.b_bar[i + 1],
        }
    }

    fn observe(self, s: &SessionRecord, i: usize) -> f64 {
        let t = &s.visit_starts;
        match self {
            RatioKind::Switch => t[i + 1] / t[i],
            RatioKind::Own => s.q_at_visits[i][i] as f64 / t[i],
            RatioKind::Left => s.q_at_visits[i + 1][i] as f64 / t[i + 1],
        }
    }
}

pub const RATIO_KINDS: [RatioKind; 3] = [RatioKind::Switch, RatioKind::Own, RatioKind::Left];

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry {
    pub kind: RatioKind,
    /// Queue index, 0-based.
    pub i: usize,
    pub n: i32,
    pub median: f64,
    pub iqr: f64,
    pub target: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dropped {
    pub count: usize,
    pub total: usize,
}

impl Dropped {
    pub fn fraction(&self) -> f64 {
        self.count as f64 / self.total.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub entries: Vec<RatioEntry>,
    pub dropped: Dropped,
}

impl RatioReport {
    pub fn entry(&self, kind: RatioKind, i: usize, n: i32) -> Option<&RatioEntry> {
        self.entries
            .iter()
            .find(|e| e.kind == kind && e.i == i && e.n == n)
    }
}

fn run_paths<E: Executor>(
    model: &Model,
    rho: f64,
    n_max: i32,
    reps: usize,
    horizon: Horizon,
    family: &StreamFamily,
    exec: &E,
) -> Result<Vec<Option<ScalePath>>> {
    let until = rho.powi(n_max);
    exec.map(reps, |r| {
        simulate_to_time(model, until, horizon, &mut family.stream(r as u64))
    })
    .into_iter()
    .collect()
}

/// Medians of the switching-instant ratios at the sessions `eta_n`.
pub fn switching_ratio_estimates<E: Executor>(
    model: &Model,
    fc: &FluidConstants,
    n_values: &[i32],
    reps: usize,
    horizon: Horizon,
    family: &StreamFamily,
    exec: &E,
) -> Result<RatioReport> {
    let n_max = *n_values
        .iter()
        .max()
        .ok_or_else(|| Error::param("no scale exponents"))?;
    let paths = run_paths(model, fc.rho, n_max, reps, horizon, family, exec)?;
    Ok(ratios_from_paths(fc, n_values, &paths))
}

pub fn ratios_from_paths(
    fc: &FluidConstants,
    n_values: &[i32],
    paths: &[Option<ScalePath>],
) -> RatioReport {
    let kept: Vec<&ScalePath> = paths.iter().flatten().collect();
    let mut entries = Vec::new();
    for &n in n_values {
        let threshold = fc.rho.powi(n);
        let at_eta: Vec<&SessionRecord> = kept
            .iter()
            .filter_map(|p| p.eta(threshold).map(|k| &p.sessions[k]))
            .collect();
        for kind in RATIO_KINDS {
            for i in 0..fc.dim() {
                let samples: Vec<f64> = at_eta.iter().map(|s| kind.observe(s, i)).collect();
                if samples.is_empty() {
                    continue;
                }
                entries.push(RatioEntry {
                    kind,
                    i,
                    n,
                    median: median(&samples),
                    iqr: iqr(&samples),
                    target: kind.target(fc, i),
                    samples,
                });
            }
        }
    }
    RatioReport {
        entries,
        dropped: Dropped {
            count: paths.len() - kept.len(),
            total: paths.len(),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiExtraction {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Index of the last completed session per kept replication.
    pub last_session: Vec<usize>,
    /// Replications where `n - eta_n` is the same at scales `n - 1` and `n`.
    pub eta_constant: usize,
    /// Replications where moreover `n - eta_n = floor(log_rho(alpha zeta))`.
    pub eta_matches_floor: usize,
    pub dropped: Dropped,
}

/// `xi` estimates from full-system paths run up to time `rho^n`.
#[allow(clippy::too_many_arguments)]
pub fn extract_xi_empirical<E: Executor>(
    model: &Model,
    fc: &FluidConstants,
    spectral: &SpectralData,
    n: i32,
    reps: usize,
    horizon: Horizon,
    family: &StreamFamily,
    exec: &E,
) -> Result<XiExtraction> {
    let paths = run_paths(model, fc.rho, n, reps, horizon, family, exec)?;
    xi_from_paths(fc, spectral, n, &paths)
}

pub fn xi_from_paths(
    fc: &FluidConstants,
    spectral: &SpectralData,
    n: i32,
    paths: &[Option<ScalePath>],
) -> Result<XiExtraction> {
    let mut out = XiExtraction {
        xi: Vec::new(),
        zeta: Vec::new(),
        last_session: Vec::new(),
        eta_constant: 0,
        eta_matches_floor: 0,
        dropped: Dropped {
            count: 0,
            total: paths.len(),
        },
    };
    for p in paths {
        let Some(p) = p else {
            out.dropped.count += 1;
            continue;
        };
        let zeta = p.zeta_last(spectral);
        if zeta <= 0.0 {
            out.dropped.count += 1;
            continue;
        }
        let xi = xi_from_zeta(fc.alpha, fc.rho, zeta)?;
        let offset = ((fc.alpha * zeta).ln() / fc.rho.ln()).floor() as i64;
        let lag = |k: i32| p.eta(fc.rho.powi(k)).map(|eta| i64::from(k) - eta as i64);
        if let (Some(a), Some(b)) = (lag(n - 1), lag(n)) {
            out.eta_constant += usize::from(a == b);
            out.eta_matches_floor += usize::from(a == b && b == offset);
        }
        out.xi.push(xi);
        out.zeta.push(zeta);
        out.last_session.push(p.sessions.len());
    }
    Ok(out)
}

/// Queue content on a scaled grid for one path, with its own `xi` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub n: i32,
    pub grid: Vec<f64>,
    /// `Q(rho^n t) / rho^n` at each grid point.
    pub scaled: Vec<Vec<f64>>,
    pub xi_hat: f64,
}

impl TrajectorySample {
    /// `sup_t |Q(rho^n t) / rho^n - xi qbar(t / xi)|`.
    pub fn sup_distance(&self, fc: &FluidConstants, xi: f64) -> Result<f64> {
        let mut d: f64 = 0.0;
        for (t, q) in self.grid.iter().zip(&self.scaled) {
            let f = scaled_limit(fc, xi, *t)?;
            for (a, b) in q.iter().zip(&f) {
                d = d.max((a - b).abs());
            }
        }
        Ok(d)
    }
}

/// One replication; `Ok(None)` when the horizon is exhausted.
pub fn trajectory_sample<R: Rng + ?Sized>(
    model: &Model,
    fc: &FluidConstants,
    spectral: &SpectralData,
    n: i32,
    grid: &[f64],
    horizon: Horizon,
    rng: &mut R,
) -> Result<Option<TrajectorySample>> {
    if grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::param("trajectory grid must be positive"));
    }
    let scale = fc.rho.powi(n);
    let t_max = grid.iter().fold(0.0, |a: f64, &b| a.max(b)) * scale;
    let times: Vec<f64> = grid.iter().map(|t| t * scale).collect();
    let opts = SimOptions {
        max_events: horizon.max_events,
        track_customers: false,
    };
    let mut sim = Simulator::new(model, opts, rng);
    sim.record_grid(&times);
    let mut last_q = vec![0; model.len()];
    let mut m = 0usize;
    while sim.time() <= t_max {
        if m as u64 >= horizon.max_sessions {
            return Ok(None);
        }
        match sim.run_session(rng) {
            Ok(rec) => last_q.clone_from(&rec.q_at_visits[rec.q_at_visits.len() - 1]),
            Err(Error::EventBudget { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
        m += 1;
    }
    let traj = sim.take_trajectory().expect("grid recorder installed");
    let zeta = project(&last_q, &spectral.u) / spectral.rho.powi(m as i32);
    if zeta <= 0.0 {
        return Ok(None);
    }
    let scaled = traj
        .values
        .into_iter()
        .map(|v| {
            v.expect("grid inside the simulated horizon")
                .iter()
                .map(|&k| k as f64 / scale)
                .collect()
        })
        .collect();
    Ok(Some(TrajectorySample {
        n,
        grid: grid.to_vec(),
        scaled,
        xi_hat: xi_from_zeta(fc.alpha, fc.rho, zeta)?,
    }))
}

/// Sup distance between one scaled path and its own random fluid limit.
pub fn scaled_trajectory_distance<R: Rng + ?Sized>(
    model: &Model,
    fc: &FluidConstants,
    spectral: &SpectralData,
    n: i32,
    grid: &[f64],
    rng: &mut R,
) -> Result<f64> {
    let s = trajectory_sample(model, fc, spectral, n, grid, Horizon::default(), rng)?
        .ok_or_else(|| Error::Degenerate(format!("no usable path at scale {n}")))?;
    s.sup_distance(fc, s.xi_hat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryReport {
    pub n: i32,
    pub distances: Vec<f64>,
    pub median: f64,
    pub dropped: Dropped,
}

#[allow(clippy::too_many_arguments)]
pub fn trajectory_distances<E: Executor>(
    model: &Model,
    fc: &FluidConstants,
    spectral: &SpectralData,
    n: i32,
    grid: &[f64],
    reps: usize,
    family: &StreamFamily,
    exec: &E,
) -> Result<TrajectoryReport> {
    let samples = exec.map(reps, |r| {
        let mut rng = family.stream(r as u64);
        trajectory_sample(model, fc, spectral, n, grid, Horizon::default(), &mut rng)
    });
    let mut distances = Vec::new();
    let mut dropped = 0;
    for s in samples {
        match s? {
            Some(s) => distances.push(s.sup_distance(fc, s.xi_hat)?),
            None => dropped += 1,
        }
    }
    let median = if distances.is_empty() {
        f64::NAN
    } else {
        median(&distances)
    };
    Ok(TrajectoryReport {
        n,
        distances,
        median,
        dropped: Dropped {
            count: dropped,
            total: reps,
        },
    })
}

/// Duration of a visit to an isolated M/G/1 queue that starts with one
/// customer and performs at most `gates` gating rounds. Arrivals during
/// each service are counted from exponential inter-arrival gaps.
pub fn sample_gated_visit<R: Rng + ?Sized>(
    arrival_rate: f64,
    service: &ServiceDistribution,
    gates: GatingIndex,
    rng: &mut R,
) -> f64 {
    let mut batch: u64 = 1;
    let mut done = 0;
    let mut time = 0.0;
    while batch > 0 && gates.allows(done) {
        done += 1;
        let mut next = 0;
        for _ in 0..batch {
            let b = service.sample(rng);
            time += b;
            next += poisson_arrivals(arrival_rate, b, rng);
        }
        batch = next;
    }
    time
}

fn poisson_arrivals<R: Rng + ?Sized>(rate: f64, window: f64, rng: &mut R) -> u64 {
    let mut n = 0;
    let mut t = sample_exponential(rate, rng);
    while t < window {
        n += 1;
        t += sample_exponential(rate, rng);
    }
    n
}

/// Gates performed by the visit indexed `k` in the mean-duration formula:
/// `k + 1` for finite `k`, unbounded for `k = inf`.
pub fn gates_for_index(k: GatingIndex) -> GatingIndex {
    match k {
        GatingIndex::Finite(k) => GatingIndex::Finite(k + 1),
        GatingIndex::Infinite => GatingIndex::Infinite,
    }
}

/// `(1 / mu) (1 - r^(k+1)) / (1 - r)` with `r = lambda / mu`; `1 / (mu - lambda)` at `k = inf`.
pub fn visit_mean_target(arrival_rate: f64, service_rate: f64, k: GatingIndex) -> f64 {
    let r = arrival_rate / service_rate;
    match k {
        GatingIndex::Finite(k) => (1.0 - r.powi(k as i32 + 1)) / (1.0 - r) / service_rate,
        GatingIndex::Infinite => 1.0 / (service_rate - arrival_rate),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BusyMomentReport {
    pub queue: usize,
    pub k: GatingIndex,
    pub gates: GatingIndex,
    pub mean: Estimate,
    pub mean_target: f64,
    pub f_moment: Estimate,
    /// `c = E f(2B) / 2 + E f(2N) / (2 (mu - lambda))`, `N` the arrivals
    /// during one service.
    pub bound_c: Estimate,
    pub bound: f64,
    pub bound_se: f64,
}

impl BusyMomentReport {
    pub fn mean_matches(&self, k_se: f64) -> bool {
        self.mean.within(self.mean_target, k_se)
    }

    /// `f_moment - k se <= bound + k se(bound)`.
    pub fn bound_holds(&self, k_se: f64) -> bool {
        self.f_moment.mean - k_se * self.f_moment.se <= self.bound + k_se * self.bound_se
    }
}

/// Visit duration moments for queue `i` in isolation, indexed as in the
/// mean-duration formula (`k = 0` is a single gate).
pub fn busy_period_moments<E: Executor>(
    model: &Model,
    i: usize,
    k: GatingIndex,
    reps: usize,
    family: &StreamFamily,
    exec: &E,
) -> Result<BusyMomentReport> {
    if i >= model.len() {
        return Err(Error::param(format!("queue index {i} out of range")));
    }
    if reps < 2 {
        return Err(Error::param("at least two replications needed"));
    }
    let q = model.queue(i);
    let (lambda, mu) = (model.lambda()[i], model.mu()[i]);
    let gates = gates_for_index(k);
    let visits = exec.map(reps, |r| {
        let mut rng = family.child("visit").stream(r as u64);
        sample_gated_visit(lambda, &q.service, gates, &mut rng)
    });
    let constants = exec.map(reps, |r| {
        let mut rng = family.child("bound").stream(r as u64);
        let b = q.service.sample(&mut rng);
        let n = poisson_arrivals(lambda, b, &mut rng);
        x_log_x(2.0 * b) / 2.0 + x_log_x(2.0 * n as f64) / (2.0 * (mu - lambda))
    });
    let mut mean = Accumulator::default();
    let mut fm = Accumulator::default();
    for &d in &visits {
        mean.push(d);
        fm.push(x_log_x(d));
    }
    let bound_c = Estimate::from_samples(&constants);
    let factor = 1.0 / (1.0 - lambda / mu);
    Ok(BusyMomentReport {
        queue: i,
        k,
        gates,
        mean: mean.estimate(),
        mean_target: visit_mean_target(lambda, mu, k),
        f_moment: fm.estimate(),
        bound: bound_c.mean * factor,
        bound_se: bound_c.se * factor,
        bound_c,
    })
}
