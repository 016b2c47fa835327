//! The multitype branching process embedded at session starts.
//!
//! Analytic side: mean visit offspring, the session mean matrix and its
//! Perron data. Monte Carlo side: immigration draws, extinction
//! probabilities, and samplers for the martingale limit `zeta` and the
//! random scaling factor `xi`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed when std is absent from the build
use num_traits::Float;

use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};

use crate::dist::gating_pgf_at;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::Model;
use crate::perron::{Matrix, SpectralData};
use crate::rng::StreamFamily;
use crate::sim::{sample_session_offspring, sample_visit_offspring, session_step};
use crate::stats::{proportion, Accumulator, Estimate};

/// Means of one visit started with a single customer.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitMeans {
    /// `m_check[(i, j)]`: mean number of queue-`j` customers left at the end
    /// of a queue-`i` visit that started with one queue-`i` customer.
    pub m_check: Matrix,
    /// Mean visit duration `gamma_i`.
    pub gamma: Vec<f64>,
}

pub fn visit_means(model: &Model) -> Result<VisitMeans> {
    let n = model.len();
    let (lambda, mu) = (model.lambda(), model.mu());
    let mut m_check = Matrix::zeros(n);
    let mut gamma = vec![0.0; n];
    for i in 0..n {
        let own = gating_pgf_at(&model.queue(i).gating, lambda[i] / mu[i])?;
        gamma[i] = (1.0 - own) / (mu[i] - lambda[i]);
        for j in 0..n {
            m_check[(i, j)] = if i == j { own } else { lambda[j] * gamma[i] };
        }
    }
    Ok(VisitMeans { m_check, gamma })
}

/// Mean session offspring `M`, filled from the last row upwards.
pub fn session_mean_matrix(vm: &VisitMeans) -> Matrix {
    let n = vm.m_check.dim();
    let mut m = Matrix::zeros(n);
    for i in (0..n).rev() {
        for j in 0..n {
            let mut s = if i >= j { vm.m_check[(i, j)] } else { 0.0 };
            for k in i + 1..n {
                s += vm.m_check[(i, k)] * m[(k, j)];
            }
            m[(i, j)] = s;
        }
    }
    m
}

/// One draw from the immigration law: the population after the session
/// that starts when the first customer arrives to an empty system.
pub fn sample_immigration<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> Vec<u64> {
    let total = model.total_arrival_rate();
    let mut x = rng.random::<f64>() * total;
    let mut pick = model.len() - 1;
    for (i, &l) in model.lambda().iter().enumerate() {
        if x < l {
            pick = i;
            break;
        }
        x -= l;
    }
    sample_session_offspring(model, pick, rng)
}

fn population(state: &[u64]) -> u64 {
    state.iter().sum()
}

/// Uniform subsample of `cap` individuals from `state`, typewise
/// multivariate hypergeometric.
fn subsample<R: Rng + ?Sized>(state: &[u64], cap: u64, rng: &mut R) -> Vec<u64> {
    let mut left_total = population(state);
    let mut left_draws = cap;
    let mut out = vec![0; state.len()];
    for (o, &k) in out.iter_mut().zip(state) {
        if left_draws == 0 {
            break;
        }
        let h = if k == left_total {
            left_draws
        } else {
            Hypergeometric::new(left_total, k, left_draws)
                .expect("valid hypergeometric parameters")
                .sample(rng)
        };
        *o = h;
        left_total -= k;
        left_draws -= h;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    Extinct,
    Survived,
    /// Neither absorbed nor above the population cap within the generation cap.
    Undecided,
}

fn fate<R: Rng + ?Sized>(
    model: &Model,
    start: Vec<u64>,
    gen_cap: u32,
    pop_cap: u64,
    rng: &mut R,
) -> Fate {
    let mut z = start;
    for _ in 0..gen_cap {
        match population(&z) {
            0 => return Fate::Extinct,
            p if p > pop_cap => return Fate::Survived,
            _ => z = session_step(model, &z, rng),
        }
    }
    match population(&z) {
        0 => Fate::Extinct,
        p if p > pop_cap => Fate::Survived,
        _ => Fate::Undecided,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtinctionOptions {
    pub reps: usize,
    pub gen_cap: u32,
    pub pop_cap: u64,
}

impl Default for ExtinctionOptions {
    fn default() -> Self {
        ExtinctionOptions {
            reps: 4000,
            gen_cap: 200,
            pop_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionData {
    /// Extinction probability from one queue-`i` customer.
    pub q: Vec<f64>,
    pub q_se: Vec<f64>,
    /// Probability that the system empties again after an immigration.
    pub q_g: f64,
    pub q_g_se: f64,
    pub replications: usize,
    /// Realizations left undecided by the caps (counted as extinct).
    pub ambiguous: usize,
    pub ambiguity_fraction: f64,
    /// More than 1% of the realizations were undecided.
    pub caps_too_tight: bool,
}

/// Extinction probabilities by simulating the process without immigration.
pub fn extinction_probs<E: Executor>(
    model: &Model,
    opts: ExtinctionOptions,
    family: &StreamFamily,
    exec: &E,
) -> Result<ExtinctionData> {
    if opts.reps == 0 || opts.gen_cap == 0 || opts.pop_cap == 0 {
        return Err(Error::param("reps, gen_cap and pop_cap must be positive"));
    }
    let n = model.len();
    let run = |fam: StreamFamily,
               start: &(dyn Fn(&mut crate::rng::RngStream) -> Vec<u64> + Sync)| {
        exec.map(opts.reps, |r| {
            let mut rng = fam.stream(r as u64);
            let z = start(&mut rng);
            fate(model, z, opts.gen_cap, opts.pop_cap, &mut rng)
        })
    };
    let mut fates = Vec::with_capacity(n + 1);
    for i in 0..n {
        let fam = family.child("type").child(&format!("{i}"));
        fates.push(run(fam, &|_| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        }));
    }
    fates.push(run(family.child("immigration"), &|rng| {
        sample_immigration(model, rng)
    }));

    let mut ambiguous = 0;
    let mut est: Vec<Estimate> = Vec::with_capacity(n + 1);
    for f in &fates {
        let survived = f.iter().filter(|&&x| x == Fate::Survived).count();
        ambiguous += f.iter().filter(|&&x| x == Fate::Undecided).count();
        est.push(proportion(opts.reps - survived, opts.reps));
    }
    let total = opts.reps * (n + 1);
    let ambiguity_fraction = ambiguous as f64 / total as f64;
    let g = est.pop().expect("immigration estimate");
    Ok(ExtinctionData {
        q: est.iter().map(|e| e.mean).collect(),
        q_se: est.iter().map(|e| e.se).collect(),
        q_g: g.mean,
        q_g_se: g.se,
        replications: opts.reps,
        ambiguous,
        ambiguity_fraction,
        caps_too_tight: ambiguity_fraction > 0.01,
    })
}

pub const DEFAULT_DEPTH: u32 = 12;
pub const DEFAULT_ZETA_POP_CAP: u64 = 1_000_000;

/// One draw of `Z^(depth) . u / rho^depth` from the state `start`.
///
/// When the population exceeds `pop_cap` it is replaced by a uniform
/// subsample of size `pop_cap` and the estimate is multiplied by the
/// compounded ratio `population / pop_cap`. The projection is linear, so
/// thinning leaves the mean unchanged and only inflates the variance.
pub fn zeta_from_state<R: Rng + ?Sized>(
    model: &Model,
    start: &[u64],
    depth: u32,
    spectral: &SpectralData,
    pop_cap: u64,
    rng: &mut R,
) -> f64 {
    let mut z = start.to_vec();
    let mut scale = 1.0;
    for _ in 0..depth {
        let p = population(&z);
        if p == 0 {
            return 0.0;
        }
        if p > pop_cap {
            scale *= p as f64 / pop_cap as f64;
            z = subsample(&z, pop_cap, rng);
        }
        z = session_step(model, &z, rng);
    }
    let proj: f64 = z.iter().zip(&spectral.u).map(|(&k, &u)| k as f64 * u).sum();
    scale * proj / spectral.rho.powi(depth as i32)
}

/// Approximate draw of the martingale limit `zeta_i`.
pub fn sample_zeta<R: Rng + ?Sized>(
    model: &Model,
    i: usize,
    depth: u32,
    spectral: &SpectralData,
    pop_cap: u64,
    rng: &mut R,
) -> f64 {
    let mut e = vec![0; model.len()];
    e[i] = 1;
    zeta_from_state(model, &e, depth, spectral, pop_cap, rng)
}

/// `rho^frac(log_rho(alpha * zeta))`, a value in `[1, rho)`.
pub fn xi_from_zeta(alpha: f64, rho: f64, zeta: f64) -> Result<f64> {
    let x = alpha * zeta;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            value: x,
            domain: "(0, inf)",
        });
    }
    let l = x.ln() / rho.ln();
    let xi = rho.powf(l - l.floor());
    // rounding at the wrap point
    Ok(if xi >= rho || xi < 1.0 { 1.0 } else { xi })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiOptions {
    pub n_samples: usize,
    pub depth: u32,
    pub pop_cap: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiSample {
    pub values: Vec<f64>,
    /// Immigration draws discarded because every descendant line died out.
    pub rejected: u64,
    pub attempts: u64,
}

/// Attempts allowed per returned sample before giving up.
const MAX_ATTEMPTS_PER_SAMPLE: u64 = 100_000;

/// Samples the scaling factor `xi` by rejection.
///
/// An immigration vector `k` is drawn and the process is run from `k` for
/// `depth` generations; by the branching property the result is the sum of
/// independent per-individual `zeta` draws, so extinction of every line
/// means rejection, and otherwise `S` is the surviving total.
pub fn sample_xi<E: Executor>(
    model: &Model,
    spectral: &SpectralData,
    alpha: f64,
    opts: XiOptions,
    family: &StreamFamily,
    exec: &E,
) -> Result<XiSample> {
    let draws = exec.map(opts.n_samples, |s| -> Result<(f64, u64)> {
        let mut rng = family.stream(s as u64);
        for attempt in 1..=MAX_ATTEMPTS_PER_SAMPLE {
            let k = sample_immigration(model, &mut rng);
            let zeta = zeta_from_state(model, &k, opts.depth, spectral, opts.pop_cap, &mut rng);
            if zeta > 0.0 {
                return Ok((xi_from_zeta(alpha, spectral.rho, zeta)?, attempt));
            }
        }
        Err(Error::Degenerate(format!(
            "no surviving immigration in {MAX_ATTEMPTS_PER_SAMPLE} attempts"
        )))
    });
    let mut values = Vec::with_capacity(opts.n_samples);
    let mut attempts = 0;
    for d in draws {
        let (x, a) = d?;
        values.push(x);
        attempts += a;
    }
    let rejected = attempts - opts.n_samples as u64;
    if attempts >= 10_000 && rejected as f64 > 0.999 * attempts as f64 {
        return Err(Error::Degenerate(format!(
            "rejection rate {rejected}/{attempts} above 99.9%"
        )));
    }
    Ok(XiSample {
        values,
        rejected,
        attempts,
    })
}

/// Monte Carlo means of the visit duration, visit offspring and session
/// offspring for every starting queue.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringEstimates {
    pub gamma: Vec<Estimate>,
    /// `visit[i][j]` estimates `m_check[(i, j)]`.
    pub visit: Vec<Vec<Estimate>>,
    /// `session[i][j]` estimates `M[(i, j)]`.
    pub session: Vec<Vec<Estimate>>,
}

pub fn offspring_estimates<E: Executor>(
    model: &Model,
    reps: usize,
    family: &StreamFamily,
    exec: &E,
) -> OffspringEstimates {
    let n = model.len();
    let mut gamma = Vec::with_capacity(n);
    let mut visit = Vec::with_capacity(n);
    let mut session = Vec::with_capacity(n);
    for i in 0..n {
        let fam = family.child(&format!("{i}"));
        let visits = exec.map(reps, |r| {
            sample_visit_offspring(model, i, &mut fam.child("visit").stream(r as u64))
        });
        let sessions = exec.map(reps, |r| {
            sample_session_offspring(model, i, &mut fam.child("session").stream(r as u64))
        });
        let mut g = Accumulator::default();
        let mut v = vec![Accumulator::default(); n];
        let mut s = vec![Accumulator::default(); n];
        for (d, off) in &visits {
            g.push(*d);
            off.iter()
                .zip(v.iter_mut())
                .for_each(|(&k, a)| a.push(k as f64));
        }
        for off in &sessions {
            off.iter()
                .zip(s.iter_mut())
                .for_each(|(&k, a)| a.push(k as f64));
        }
        gamma.push(g.estimate());
        visit.push(v.iter().map(Accumulator::estimate).collect());
        session.push(s.iter().map(Accumulator::estimate).collect());
    }
    OffspringEstimates {
        gamma,
        visit,
        session,
    }
}
