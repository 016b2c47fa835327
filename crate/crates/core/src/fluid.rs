//! Deterministic fluid trajectory `qbar` and its constants.
//!
//! `qbar` is continuous, piecewise linear and self-similar:
//! `qbar(rho t) = rho qbar(t)`. Within one scale `[rho^k, rho^(k+1))` the
//! fluid server visits queue `i` on `[rho^k bbar_i, rho^k bbar_(i+1))`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed when std is absent from the build
use num_traits::Float;

use crate::branching::VisitMeans;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::perron::SpectralData;

/// Relative tolerance of the closure and dual-recursion checks.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

/// Scale exponents beyond this are evaluated through self-similarity in the
/// log domain and flagged as reduced accuracy.
pub const MAX_SCALE_EXPONENT: i64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidConstants {
    pub alpha: f64,
    /// `bbar_1 ..= bbar_(I+1)`, with `bbar_1 = 1`.
    pub b_bar: Vec<f64>,
    /// `abar_1 ..= abar_(I+1)`, each of length `I`.
    pub a_bar: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub rho: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Some eigenvector coordinate is zero.
    pub reducible: bool,
}

/// Residuals of the consistency identities, relative to the scale of the
/// quantities involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consistency {
    /// `|bbar_(I+1) - rho|`
    pub b_closure: f64,
    /// `|abar_(I+1) - rho abar_1|`
    pub a_closure: f64,
    /// Largest gap between the two forms of the `abar` recursion.
    pub dual_gap: f64,
}

impl Consistency {
    pub fn holds(&self, tol: f64) -> bool {
        self.b_closure <= tol && self.a_closure <= tol && self.dual_gap <= tol
    }
}

fn sup_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// `abar` through the visit-offspring form
/// `abar_(i+1) = abar_i - abar_ii e_i + abar_ii mcheck_i`.
pub fn a_bar_by_visit_offspring(vm: &VisitMeans, a1: &[f64]) -> Vec<Vec<f64>> {
    let n = a1.len();
    let mut out = vec![a1.to_vec()];
    for i in 0..n {
        let cur = &out[i];
        let aii = cur[i];
        let mut next: Vec<f64> = (0..n).map(|j| cur[j] + aii * vm.m_check[(i, j)]).collect();
        next[i] -= aii;
        out.push(next);
    }
    out
}

pub fn fluid_constants(
    model: &Model,
    vm: &VisitMeans,
    spectral: &SpectralData,
) -> Result<FluidConstants> {
    let n = model.len();
    let (lambda, mu) = (model.lambda(), model.mu());
    let v = &spectral.v;
    let denom = model.total_load() - 1.0;
    let alpha = v.iter().zip(mu).map(|(v, m)| v / m).sum::<f64>() / denom;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Inconsistent(format!(
            "alpha = {alpha} is not positive"
        )));
    }

    let mut b_bar = vec![1.0];
    for i in 0..n {
        let aii = v[i] / alpha + lambda[i] * (b_bar[i] - b_bar[0]);
        b_bar.push(b_bar[i] + aii * vm.gamma[i]);
    }
    if b_bar.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Inconsistent(format!(
            "bbar is not increasing: {b_bar:?}"
        )));
    }

    let mut a_bar = vec![v.iter().map(|x| x / alpha).collect::<Vec<f64>>()];
    for i in 0..n {
        let db = b_bar[i + 1] - b_bar[i];
        let mut next: Vec<f64> = a_bar[i]
            .iter()
            .zip(lambda)
            .map(|(a, l)| a + db * l)
            .collect();
        next[i] -= db * mu[i];
        a_bar.push(next);
    }

    let fc = FluidConstants {
        alpha,
        b: b_bar.iter().map(|x| alpha * x).collect(),
        a: a_bar
            .iter()
            .map(|r| r.iter().map(|x| alpha * x).collect())
            .collect(),
        b_bar,
        a_bar,
        rho: spectral.rho,
        lambda: lambda.to_vec(),
        mu: mu.to_vec(),
        reducible: spectral.reducible,
    };
    let c = fc.consistency(vm);
    if !c.holds(CONSISTENCY_TOLERANCE) {
        return Err(Error::Inconsistent(format!(
            "fluid constants fail closure checks: {c:?}"
        )));
    }
    Ok(fc)
}

impl FluidConstants {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `abar_ii`, the level of queue `i` when its fluid visit starts at `bbar_i`.
    pub fn a_own(&self, i: usize) -> f64 {
        self.a_bar[i][i]
    }

    pub fn consistency(&self, vm: &VisitMeans) -> Consistency {
        let n = self.dim();
        let scale_a = sup(&self.a_bar[0]).max(1.0) * self.rho;
        let target: Vec<f64> = self.a_bar[0].iter().map(|x| self.rho * x).collect();
        let dual = a_bar_by_visit_offspring(vm, &self.a_bar[0]);
        let dual_gap = (0..=n)
            .map(|i| sup_diff(&dual[i], &self.a_bar[i]) / sup(&self.a_bar[i]).max(1.0))
            .fold(0.0, f64::max);
        Consistency {
            b_closure: (self.b_bar[n] - self.rho).abs() / self.rho,
            a_closure: sup_diff(&self.a_bar[n], &target) / scale_a,
            dual_gap,
        }
    }

    fn pow(&self, k: i64) -> f64 {
        self.rho.powi(k as i32)
    }

    /// Coordinate `i` on the reference scale `t in [bbar_i, rho bbar_i)`.
    fn own_reference(&self, i: usize, t: f64) -> f64 {
        let (bi, bnext, aii) = (self.b_bar[i], self.b_bar[i + 1], self.a_own(i));
        if t < bnext {
            aii + (self.lambda[i] - self.mu[i]) * (t - bi)
        } else {
            self.rho * aii - self.lambda[i] * (self.rho * bi - t)
        }
    }

    /// `k` with `rho^k base <= t < rho^(k+1) base`, or `None` when the
    /// powers leave the normal floating range.
    fn scale_index(&self, base: f64, t: f64) -> Option<i64> {
        let mut k = ((t / base).ln() / self.rho.ln()).floor() as i64;
        if k.abs() > MAX_SCALE_EXPONENT {
            return None;
        }
        let ok = |k: i64| {
            let (lo, hi) = (self.pow(k), self.pow(k + 1));
            lo.is_normal() && hi.is_normal() && (hi * base).is_finite()
        };
        if !ok(k - 1) || !ok(k + 1) {
            return None;
        }
        if self.pow(k) * base > t {
            k -= 1;
        } else if self.pow(k + 1) * base <= t {
            k += 1;
        }
        Some(k)
    }

    /// Log-domain reduction `qbar_i(t) = t qbar_i(t') / t'` with `t'` on the
    /// reference scale.
    fn far_coordinate(&self, i: usize, t: f64) -> f64 {
        let base = self.b_bar[i];
        let lr = self.rho.ln();
        let x = (t.ln() - base.ln()) / lr;
        let k = x.floor();
        let tp = (base.ln() + (x - k) * lr)
            .exp()
            .clamp(base, self.rho * base);
        t * self.own_reference(i, tp) / tp
    }

    /// `qbar(t)` with a flag that is `false` when some coordinate needed the
    /// log-domain reduction.
    pub fn eval_checked(&self, t: f64) -> Result<(Vec<f64>, bool)> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain {
                value: t,
                domain: "[0, inf)",
            });
        }
        let n = self.dim();
        if t == 0.0 {
            return Ok((vec![0.0; n], true));
        }
        let mut accurate = true;
        let q = (0..n)
            .map(|i| match self.scale_index(self.b_bar[i], t) {
                Some(k) => {
                    let r = self.pow(k);
                    let (bi, bnext, aii) = (self.b_bar[i], self.b_bar[i + 1], self.a_own(i));
                    if t < r * bnext {
                        r * aii + (self.lambda[i] - self.mu[i]) * (t - r * bi)
                    } else {
                        let r1 = r * self.rho;
                        r1 * aii - self.lambda[i] * (r1 * bi - t)
                    }
                }
                None => {
                    accurate = false;
                    self.far_coordinate(i, t)
                }
            })
            .collect();
        Ok((q, accurate))
    }

    /// Segment index `i` and scale `k` with `rho^k bbar_i <= t < rho^k bbar_(i+1)`.
    fn session_segment(&self, t: f64) -> Option<(usize, i64)> {
        let k = self.scale_index(1.0, t)?;
        let s = t / self.pow(k);
        let n = self.dim();
        let i = (0..n).rev().find(|&i| self.b_bar[i] <= s).unwrap_or(0);
        Some((i, k))
    }
}

/// `qbar(t)`, coordinatewise over own-visit and away segments.
pub fn eval_fluid(fc: &FluidConstants, t: f64) -> Result<Vec<f64>> {
    fc.eval_checked(t).map(|(q, _)| q)
}

/// `qbar(t)` from the session-indexed form: on `[rho^k bbar_i, rho^k bbar_(i+1))`
/// the whole vector moves linearly from `rho^k abar_i` with drift
/// `lambda - mu_i e_i`.
pub fn eval_fluid_alt(fc: &FluidConstants, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            value: t,
            domain: "[0, inf)",
        });
    }
    if t == 0.0 {
        return Ok(vec![0.0; fc.dim()]);
    }
    let Some((i, k)) = fc.session_segment(t) else {
        return eval_fluid(fc, t);
    };
    let r = fc.pow(k);
    let dt = t - r * fc.b_bar[i];
    let mut q: Vec<f64> = fc.a_bar[i]
        .iter()
        .zip(&fc.lambda)
        .map(|(a, l)| r * a + dt * l)
        .collect();
    q[i] -= dt * fc.mu[i];
    Ok(q)
}

/// `xi qbar(t / xi)` for `xi in [1, rho)`.
pub fn scaled_limit(fc: &FluidConstants, xi: f64, t: f64) -> Result<Vec<f64>> {
    if !(xi >= 1.0 && xi < fc.rho) {
        return Err(Error::Domain {
            value: xi,
            domain: "[1, rho)",
        });
    }
    Ok(eval_fluid(fc, t / xi)?
        .into_iter()
        .map(|q| xi * q)
        .collect())
}

/// `n` points spaced evenly in `log t` over `[t0, t1]`.
pub fn log_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let (l0, l1) = (t0.ln(), t1.ln());
            (0..n)
                .map(|j| (l0 + (l1 - l0) * j as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}
