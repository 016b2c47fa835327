//! Event-driven simulation of the cyclic polling system.
//!
//! The state is the vector of queue counts plus one pending arrival clock per
//! queue. A gate snapshots the current count of the queue in service; the
//! snapshot is served in arrival order, then the queue is gated again while
//! the visit's gate budget allows and the queue is non-empty.
//!
//! Ties: a service completion is processed before an arrival carrying the
//! same timestamp, and the server decides (gate, switch, record) only after
//! every event at that instant has been applied.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dist::{sample_exponential, GatingIndex};
use crate::error::{Error, Result};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Upper bound on processed events (arrivals plus service completions).
    pub max_events: u64,
    /// Keep per-customer identities to check FIFO order. Memory heavy.
    pub track_customers: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_events: 500_000_000,
            track_customers: false,
        }
    }
}

impl SimOptions {
    pub fn unlimited() -> Self {
        SimOptions {
            max_events: u64::MAX,
            track_customers: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisitStats {
    pub queue: usize,
    pub start: f64,
    pub duration: f64,
    pub gating_index: GatingIndex,
    pub gates: u64,
    pub served: u64,
}

/// Snapshot of one session `[t^(n), t^(n+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub index: u64,
    pub t_session: f64,
    /// `t_1, ..., t_{I+1}`; the last entry is the next session start.
    pub visit_starts: Vec<f64>,
    pub q_at_session: Vec<u64>,
    /// `Q(t_1), ..., Q(t_{I+1})`.
    pub q_at_visits: Vec<Vec<u64>>,
    pub visits: Vec<VisitStats>,
}

impl SessionRecord {
    pub fn t_end(&self) -> f64 {
        *self.visit_starts.last().expect("I + 1 visit boundaries")
    }

    pub fn started_empty(&self) -> bool {
        self.q_at_session.iter().all(|&q| q == 0)
    }
}

/// Piecewise-constant `Q(t)` sampled on a user grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `None` for grid points beyond the simulated horizon.
    pub values: Vec<Option<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrace {
    pub sessions: Vec<SessionRecord>,
    pub arrivals_count: Vec<u64>,
    pub departures_count: Vec<u64>,
    pub busy_time: Vec<f64>,
    pub idle_time: f64,
    pub final_time: f64,
    pub last_empty_session: Option<u64>,
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone)]
struct GridRecorder {
    /// `(time, position in the caller's grid)` sorted by time.
    order: Vec<(f64, usize)>,
    next: usize,
    values: Vec<Option<Vec<u64>>>,
    times: Vec<f64>,
}

impl GridRecorder {
    fn new(grid: &[f64]) -> Self {
        let mut order: Vec<(f64, usize)> = grid.iter().copied().zip(0..).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        GridRecorder {
            order,
            next: 0,
            values: vec![None; grid.len()],
            times: grid.to_vec(),
        }
    }

    /// Records the current state at every grid point strictly before `t`.
    fn flush_before(&mut self, t: f64, q: &[u64]) {
        while let Some(&(g, pos)) = self.order.get(self.next) {
            if g < t {
                self.values[pos] = Some(q.to_vec());
                self.next += 1;
            } else {
                break;
            }
        }
    }

    fn flush_through(&mut self, t: f64, q: &[u64]) {
        while let Some(&(g, pos)) = self.order.get(self.next) {
            if g <= t {
                self.values[pos] = Some(q.to_vec());
                self.next += 1;
            } else {
                break;
            }
        }
    }

    fn finish(self) -> Trajectory {
        Trajectory {
            times: self.times,
            values: self.values,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct CustomerLog {
    next_id: u64,
    waiting: Vec<VecDeque<(u64, f64)>>,
    /// Arrival times of departed customers, per queue, in departure order.
    departed: Vec<Vec<f64>>,
}

/// Stateful polling-system simulator.
#[derive(Debug, Clone)]
pub struct Simulator<'m> {
    model: &'m Model,
    opts: SimOptions,
    time: f64,
    queue: Vec<u64>,
    next_arrival: Vec<f64>,
    arrivals: Vec<u64>,
    departures: Vec<u64>,
    busy: Vec<f64>,
    idle: f64,
    events: u64,
    sessions: u64,
    grid: Option<GridRecorder>,
    customers: Option<CustomerLog>,
}

impl<'m> Simulator<'m> {
    /// Empty system at time zero.
    pub fn new<R: Rng + ?Sized>(model: &'m Model, opts: SimOptions, rng: &mut R) -> Self {
        Self::with_state(model, &vec![0; model.len()], opts, rng)
    }

    /// System holding `state` customers at time zero, at the start of a
    /// session. Arrival clocks start fresh.
    pub fn with_state<R: Rng + ?Sized>(
        model: &'m Model,
        state: &[u64],
        opts: SimOptions,
        rng: &mut R,
    ) -> Self {
        assert_eq!(state.len(), model.len(), "state dimension");
        let next_arrival = model
            .lambda()
            .iter()
            .map(|&l| sample_exponential(l, rng))
            .collect();
        let customers = opts.track_customers.then(|| {
            let mut log = CustomerLog {
                waiting: vec![VecDeque::new(); model.len()],
                departed: vec![Vec::new(); model.len()],
                next_id: 0,
            };
            for (j, &n) in state.iter().enumerate() {
                for _ in 0..n {
                    log.waiting[j].push_back((log.next_id, 0.0));
                    log.next_id += 1;
                }
            }
            log
        });
        Simulator {
            model,
            opts,
            time: 0.0,
            queue: state.to_vec(),
            next_arrival,
            arrivals: vec![0; model.len()],
            departures: vec![0; model.len()],
            busy: vec![0.0; model.len()],
            idle: 0.0,
            events: 0,
            sessions: 0,
            grid: None,
            customers,
        }
    }

    /// Record `Q(t)` at each grid time (right-continuous).
    pub fn record_grid(&mut self, grid: &[f64]) {
        let mut rec = GridRecorder::new(grid);
        // grid points already in the past see the current state
        rec.flush_through(self.time, &self.queue);
        self.grid = Some(rec);
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn queue(&self) -> &[u64] {
        &self.queue
    }

    pub fn arrivals(&self) -> &[u64] {
        &self.arrivals
    }

    pub fn departures(&self) -> &[u64] {
        &self.departures
    }

    pub fn busy_time(&self) -> &[f64] {
        &self.busy
    }

    pub fn idle_time(&self) -> f64 {
        self.idle
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn sessions_completed(&self) -> u64 {
        self.sessions
    }

    pub fn is_empty(&self) -> bool {
        self.queue.iter().all(|&q| q == 0)
    }

    /// Arrival times of departed customers per queue (customer tracking only).
    pub fn departed_arrival_times(&self) -> Option<&[Vec<f64>]> {
        self.customers.as_ref().map(|c| c.departed.as_slice())
    }

    fn bump_events(&mut self) -> Result<()> {
        if self.events >= self.opts.max_events {
            return Err(Error::EventBudget {
                limit: self.opts.max_events,
            });
        }
        self.events += 1;
        Ok(())
    }

    fn earliest_arrival(&self) -> (usize, f64) {
        let mut best = (0, self.next_arrival[0]);
        for (j, &t) in self.next_arrival.iter().enumerate().skip(1) {
            if t < best.1 {
                best = (j, t);
            }
        }
        best
    }

    fn arrive<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> Result<()> {
        self.bump_events()?;
        let t = self.next_arrival[j];
        if let Some(g) = self.grid.as_mut() {
            g.flush_before(t, &self.queue);
        }
        self.time = t;
        self.queue[j] += 1;
        self.arrivals[j] += 1;
        if let Some(c) = self.customers.as_mut() {
            c.waiting[j].push_back((c.next_id, t));
            c.next_id += 1;
        }
        self.next_arrival[j] = t + sample_exponential(self.model.lambda()[j], rng);
        Ok(())
    }

    /// Applies arrivals before `until` (or at `until` when `inclusive`).
    fn arrivals_until<R: Rng + ?Sized>(
        &mut self,
        until: f64,
        inclusive: bool,
        rng: &mut R,
    ) -> Result<()> {
        loop {
            let (j, t) = self.earliest_arrival();
            if t < until || (inclusive && t == until) {
                self.arrive(j, rng)?;
            } else {
                return Ok(());
            }
        }
    }

    fn serve_one<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) -> Result<()> {
        let b = self.model.queue(i).service.sample(rng);
        let end = self.time + b;
        self.arrivals_until(end, false, rng)?;
        self.bump_events()?;
        if let Some(g) = self.grid.as_mut() {
            g.flush_before(end, &self.queue);
        }
        self.time = end;
        self.queue[i] -= 1;
        self.departures[i] += 1;
        self.busy[i] += b;
        if let Some(c) = self.customers.as_mut() {
            let (_, arrived) = c.waiting[i].pop_front().expect("customer in service");
            c.departed[i].push(arrived);
        }
        self.arrivals_until(end, true, rng)
    }

    /// One visit to queue `i` under the given gate budget.
    pub fn run_visit<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        budget: GatingIndex,
        rng: &mut R,
    ) -> Result<VisitStats> {
        let start = self.time;
        let mut gates = 0u64;
        let mut served = 0u64;
        while budget.allows(gates) {
            let batch = self.queue[i];
            gates += 1;
            if batch == 0 {
                break;
            }
            for _ in 0..batch {
                self.serve_one(i, rng)?;
            }
            served += batch;
        }
        Ok(VisitStats {
            queue: i,
            start,
            duration: self.time - start,
            gating_index: budget,
            gates,
            served,
        })
    }

    /// Runs one full session. An empty system first idles until the next
    /// arrival; visits to empty queues are recorded with zero length.
    pub fn run_session<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<SessionRecord> {
        let t_session = self.time;
        let q_at_session = self.queue.clone();
        if self.is_empty() {
            let (_, t) = self.earliest_arrival();
            self.idle += t - self.time;
            self.arrivals_until(t, true, rng)?;
        }
        let n = self.model.len();
        let mut visit_starts = Vec::with_capacity(n + 1);
        let mut q_at_visits = Vec::with_capacity(n + 1);
        let mut visits = Vec::with_capacity(n);
        for i in 0..n {
            visit_starts.push(self.time);
            q_at_visits.push(self.queue.clone());
            let budget = self.model.queue(i).gating.sample(rng);
            visits.push(self.run_visit(i, budget, rng)?);
        }
        visit_starts.push(self.time);
        q_at_visits.push(self.queue.clone());
        let record = SessionRecord {
            index: self.sessions,
            t_session,
            visit_starts,
            q_at_session,
            q_at_visits,
            visits,
        };
        self.sessions += 1;
        Ok(record)
    }

    /// Flushes the grid recorder up to the current time and returns it.
    pub fn take_trajectory(&mut self) -> Option<Trajectory> {
        let mut g = self.grid.take()?;
        g.flush_through(self.time, &self.queue);
        Some(g.finish())
    }
}

/// Simulates `n_sessions` sessions from the empty state at time zero.
pub fn run_trace<R: Rng + ?Sized>(
    model: &Model,
    rng: &mut R,
    n_sessions: u64,
    opts: SimOptions,
    grid: Option<&[f64]>,
) -> Result<EventTrace> {
    if n_sessions == 0 {
        return Err(Error::param("n_sessions must be >= 1"));
    }
    let mut sim = Simulator::new(model, opts, rng);
    if let Some(g) = grid {
        sim.record_grid(g);
    }
    let mut sessions = Vec::new();
    let mut last_empty = None;
    for _ in 0..n_sessions {
        let rec = sim.run_session(rng)?;
        if rec.started_empty() {
            last_empty = Some(rec.index);
        }
        sessions.push(rec);
    }
    let trajectory = sim.take_trajectory();
    Ok(EventTrace {
        sessions,
        arrivals_count: sim.arrivals.clone(),
        departures_count: sim.departures.clone(),
        busy_time: sim.busy.clone(),
        idle_time: sim.idle,
        final_time: sim.time,
        last_empty_session: last_empty,
        trajectory,
    })
}

/// One draw of the session offspring `L_i`: a session started with a single
/// queue-`i` customer.
pub fn sample_session_offspring<R: Rng + ?Sized>(model: &Model, i: usize, rng: &mut R) -> Vec<u64> {
    let mut state = vec![0; model.len()];
    state[i] = 1;
    session_step(model, &state, rng)
}

/// Next generation of the branching process without immigration: the
/// population at the end of one session started from `state`. The empty
/// state is absorbing.
pub fn session_step<R: Rng + ?Sized>(model: &Model, state: &[u64], rng: &mut R) -> Vec<u64> {
    if state.iter().all(|&z| z == 0) {
        return state.to_vec();
    }
    let mut sim = Simulator::with_state(model, state, SimOptions::unlimited(), rng);
    sim.run_session(rng).expect("unlimited event budget");
    sim.queue
}

/// One draw of `(V_i, visit offspring)`: a visit to queue `i` started with a
/// single customer there.
pub fn sample_visit_offspring<R: Rng + ?Sized>(
    model: &Model,
    i: usize,
    rng: &mut R,
) -> (f64, Vec<u64>) {
    let mut state = vec![0; model.len()];
    state[i] = 1;
    let mut sim = Simulator::with_state(model, &state, SimOptions::unlimited(), rng);
    let budget = model.queue(i).gating.sample(rng);
    let stats = sim
        .run_visit(i, budget, rng)
        .expect("unlimited event budget");
    (stats.duration, sim.queue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{GatingDistribution, ServiceDistribution};
    use crate::model::{symmetric, ModelConfig, QueueSpec};
    use crate::rng::RngStream;

    fn exp3(gating: GatingDistribution) -> Model {
        Model::new(symmetric(
            2.0,
            ServiceDistribution::Exponential { rate: 3.0 },
            gating,
            11,
        ))
        .unwrap()
    }

    fn mean_se(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
        let v: Vec<f64> = xs.collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt(), v.len())
    }

    #[test]
    fn first_session_waits_for_first_arrival() {
        // The idle wait is Exp(sum lambda) = Exp(4): mean 1/4.
        let model = exp3(GatingDistribution::gated());
        let mut waits = Vec::new();
        for r in 0..20_000 {
            let mut s = RngStream::new(5, "first-wait", r);
            let tr = run_trace(&model, &mut s, 1, SimOptions::default(), None).unwrap();
            let rec = &tr.sessions[0];
            assert_eq!(rec.t_session, 0.0);
            assert!(rec.started_empty());
            // visits before the queue that got the first arrival have zero length
            let first = rec.q_at_visits[0].iter().position(|&q| q > 0).unwrap();
            for i in 0..first {
                assert_eq!(rec.visits[i].duration, 0.0);
            }
            waits.push(rec.visit_starts[0]);
        }
        let (m, se, _) = mean_se(waits.into_iter());
        assert!((m - 0.25).abs() < 4.0 * se, "{m}");
    }

    #[test]
    fn zero_gating_never_serves() {
        let cfg = ModelConfig {
            queues: vec![
                QueueSpec::new(
                    2.0,
                    ServiceDistribution::Exponential { rate: 3.0 },
                    GatingDistribution::Deterministic(GatingIndex::Finite(0)),
                ),
                QueueSpec::new(
                    2.0,
                    ServiceDistribution::Exponential { rate: 3.0 },
                    GatingDistribution::gated(),
                ),
            ],
            base_seed: 0,
        };
        let model = Model::new_unchecked_load(cfg).unwrap();
        let mut s = RngStream::new(1, "zero", 0);
        let tr = run_trace(&model, &mut s, 200, SimOptions::default(), None).unwrap();
        assert_eq!(tr.departures_count[0], 0);
        for rec in &tr.sessions {
            assert_eq!(rec.visits[0].duration, 0.0);
            assert_eq!(rec.visits[0].gates, 0);
        }
    }

    #[test]
    fn conservation_and_session_invariants() {
        let cfg = ModelConfig {
            queues: vec![
                QueueSpec::new(
                    1.0,
                    ServiceDistribution::Exponential { rate: 2.5 },
                    GatingDistribution::Geometric { p: 0.4 },
                ),
                QueueSpec::new(
                    0.7,
                    ServiceDistribution::Deterministic { value: 0.6 },
                    GatingDistribution::exhaustive(),
                ),
                QueueSpec::new(
                    0.9,
                    ServiceDistribution::LogNormal {
                        location: -1.2,
                        scale: 0.8,
                    },
                    GatingDistribution::gated(),
                ),
            ],
            base_seed: 3,
        };
        let model = Model::new(cfg).unwrap();
        let mut s = RngStream::new(9, "invariants", 0);
        let tr = run_trace(&model, &mut s, 30, SimOptions::default(), None).unwrap();
        let last = tr.sessions.last().unwrap();
        for j in 0..3 {
            assert_eq!(
                last.q_at_visits[3][j],
                tr.arrivals_count[j] - tr.departures_count[j]
            );
        }
        let busy: f64 = tr.busy_time.iter().sum();
        assert!((busy + tr.idle_time - tr.final_time).abs() < 1e-9 * tr.final_time.max(1.0));
        for rec in &tr.sessions {
            assert!(rec.t_session <= rec.visit_starts[0]);
            if rec.t_session < rec.visit_starts[0] {
                assert!(rec.started_empty());
            }
            for w in rec.visit_starts.windows(2) {
                assert!(w[0] <= w[1]);
            }
            // unvisited queues only grow within the session
            for i in 0..3 {
                for j in i..3 {
                    assert!(rec.q_at_visits[i + 1][j] >= rec.q_at_visits[i][j] || j == i);
                }
            }
            for v in &rec.visits {
                if let GatingIndex::Finite(k) = v.gating_index {
                    assert!(v.gates <= k);
                }
            }
        }
        for w in tr.sessions.windows(2) {
            assert_eq!(w[0].t_end(), w[1].t_session);
            assert_eq!(w[0].q_at_visits[3], w[1].q_at_session);
        }
    }

    #[test]
    fn departures_of_other_queues_frozen_during_visit() {
        let model = exp3(GatingDistribution::Geometric { p: 0.5 });
        let mut s = RngStream::new(2, "frozen", 0);
        let mut sim = Simulator::new(&model, SimOptions::default(), &mut s);
        for _ in 0..10 {
            sim.run_session(&mut s).unwrap();
        }
        for i in 0..2 {
            let before = sim.departures().to_vec();
            sim.run_visit(i, GatingIndex::Infinite, &mut s).unwrap();
            let after = sim.departures();
            for j in 0..2 {
                if j != i {
                    assert_eq!(before[j], after[j]);
                }
            }
            assert_eq!(sim.queue()[i], 0);
        }
    }

    #[test]
    fn fifo_within_queue() {
        let model = exp3(GatingDistribution::Geometric { p: 0.3 });
        let mut s = RngStream::new(4, "fifo", 0);
        let opts = SimOptions {
            track_customers: true,
            ..SimOptions::default()
        };
        let mut sim = Simulator::new(&model, opts, &mut s);
        for _ in 0..25 {
            sim.run_session(&mut s).unwrap();
        }
        for times in sim.departed_arrival_times().unwrap() {
            assert!(!times.is_empty());
            for w in times.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn deterministic_replay() {
        let model = exp3(GatingDistribution::gated());
        let a = run_trace(
            &model,
            &mut RngStream::new(1, "replay", 0),
            15,
            SimOptions::default(),
            None,
        )
        .unwrap();
        let b = run_trace(
            &model,
            &mut RngStream::new(1, "replay", 0),
            15,
            SimOptions::default(),
            None,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn event_budget_is_an_error() {
        let model = exp3(GatingDistribution::gated());
        let opts = SimOptions {
            max_events: 1_000,
            ..SimOptions::default()
        };
        let r = run_trace(
            &model,
            &mut RngStream::new(1, "budget", 0),
            1_000,
            opts,
            None,
        );
        assert_eq!(r, Err(Error::EventBudget { limit: 1_000 }));
    }

    #[test]
    fn grid_recording_matches_session_snapshots() {
        let model = exp3(GatingDistribution::gated());
        let mut s = RngStream::new(1, "grid", 0);
        let probe = run_trace(&model, &mut s.clone(), 12, SimOptions::default(), None).unwrap();
        let grid: Vec<f64> = probe.sessions.iter().map(|r| r.visit_starts[1]).collect();
        let tr = run_trace(&model, &mut s, 12, SimOptions::default(), Some(&grid)).unwrap();
        let traj = tr.trajectory.unwrap();
        for (rec, v) in tr.sessions.iter().zip(&traj.values) {
            assert_eq!(v.as_ref().unwrap(), &rec.q_at_visits[1]);
        }
    }

    #[test]
    fn overload_drift_of_workload() {
        // (work arrived - elapsed) / t -> total load - 1 = 1/3
        let model = exp3(GatingDistribution::exhaustive());
        let mut s = RngStream::new(8, "drift", 0);
        let mut sim = Simulator::new(&model, SimOptions::default(), &mut s);
        while sim.time() < 2e4 {
            sim.run_session(&mut s).unwrap();
        }
        // independent accumulator: work arrived = work done + work still queued,
        // with queued work estimated by count / mu (SLLN)
        let done: f64 = sim.busy_time().iter().sum();
        let queued: f64 = sim.queue().iter().map(|&q| q as f64 / 3.0).sum();
        let arrived_by_count: f64 = sim.arrivals().iter().map(|&a| a as f64 / 3.0).sum();
        let drift = (done + queued - sim.time()) / sim.time();
        let drift_counts = (arrived_by_count - sim.time()) / sim.time();
        assert!((drift - 1.0 / 3.0).abs() < 0.02, "{drift}");
        assert!((drift_counts - 1.0 / 3.0).abs() < 0.02, "{drift_counts}");
    }

    #[test]
    fn zero_gating_offspring_is_identity() {
        let cfg = symmetric(
            2.0,
            ServiceDistribution::Exponential { rate: 3.0 },
            GatingDistribution::Deterministic(GatingIndex::Finite(0)),
            0,
        );
        let model = Model::new_unchecked_load(cfg).unwrap();
        let mut s = RngStream::new(0, "zero-off", 0);
        for i in 0..2 {
            let mut e = vec![0; 2];
            e[i] = 1;
            assert_eq!(sample_session_offspring(&model, i, &mut s), e);
            assert_eq!(sample_visit_offspring(&model, i, &mut s), (0.0, e));
        }
    }

    #[test]
    fn exhaustive_last_queue_empty_after_session() {
        let model = exp3(GatingDistribution::exhaustive());
        let mut s = RngStream::new(0, "exh-off", 0);
        for k in 0..10_000 {
            let l = sample_session_offspring(&model, k % 2, &mut s);
            assert_eq!(l[1], 0);
        }
    }

    #[test]
    fn visit_duration_means() {
        for (gating, target) in [
            (GatingDistribution::exhaustive(), 1.0),
            (GatingDistribution::gated(), 1.0 / 3.0),
        ] {
            let model = exp3(gating);
            let mut s = RngStream::new(0, "visit-mean", 0);
            let (m, se, _) =
                mean_se((0..100_000).map(|_| sample_visit_offspring(&model, 0, &mut s).0));
            assert!((m - target).abs() < 4.0 * se, "{m} vs {target}");
        }
    }
}
