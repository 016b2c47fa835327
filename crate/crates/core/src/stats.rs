//! Small sample statistics used by the Monte Carlo routines.

use alloc::vec::Vec;
#[allow(unused_imports)] // needed when std is absent from the build
use num_traits::Float;

/// Mean with its normal-theory standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let mut acc = Accumulator::default();
        xs.iter().for_each(|&x| acc.push(x));
        acc.estimate()
    }

    /// `|mean - target| <= k * se`, with exact agreement accepted for
    /// zero-variance samples.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + 1e-12 * target.abs().max(1.0)
    }
}

/// Welford running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            se: (var / self.n.max(1) as f64).sqrt(),
            n: self.n,
        }
    }
}

/// Binomial proportion with standard error `sqrt(p (1 - p) / n)`.
pub fn proportion(successes: usize, n: usize) -> Estimate {
    let p = successes as f64 / n as f64;
    Estimate {
        mean: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
        n,
    }
}

/// Linear-interpolation quantile (type 7) of an unsorted sample.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty sample");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

pub fn iqr(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
}

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`; about 1.628 at `alpha = 0.01`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    /// Asymptotic critical value at level 0.01.
    pub critical_001: f64,
}

impl KsOutcome {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical_001
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_x - F_y|`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> KsOutcome {
    assert!(
        !xs.is_empty() && !ys.is_empty(),
        "KS needs non-empty samples"
    );
    let mut a: Vec<f64> = xs.to_vec();
    let mut b: Vec<f64> = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (m, n) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < m && j < n {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < m && a[i] <= t {
            i += 1;
        }
        while j < n && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let (mf, nf) = (m as f64, n as f64);
    KsOutcome {
        statistic: d,
        critical_001: ks_coefficient(0.01) * ((mf + nf) / (mf * nf)).sqrt(),
    }
}

/// `f(x) = x ln x` on `[1, inf)` and zero below.
pub fn x_log_x(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x * x.ln()
    }
}
