//! Service-time and gating-index distribution families.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // needed when std is absent from the build
use num_traits::Float;

use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric, LogNormal, Pareto};

use crate::error::{Error, Result};

/// Law of a single service requirement `B`.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceDistribution {
    Deterministic {
        value: f64,
    },
    Exponential {
        rate: f64,
    },
    /// `exp(N(location, scale^2))`.
    LogNormal {
        location: f64,
        scale: f64,
    },
    /// Density `shape * minimum^shape / x^(shape + 1)` on `[minimum, inf)`.
    Pareto {
        shape: f64,
        minimum: f64,
    },
}

impl ServiceDistribution {
    pub fn check(&self) -> Result<()> {
        let ok = |c: bool, what: &str| {
            if c {
                Ok(())
            } else {
                Err(Error::param(format!("{what} in {self:?}")))
            }
        };
        match *self {
            Self::Deterministic { value } => {
                ok(value.is_finite() && value > 0.0, "value must be > 0")
            }
            Self::Exponential { rate } => ok(rate.is_finite() && rate > 0.0, "rate must be > 0"),
            Self::LogNormal { location, scale } => ok(
                location.is_finite() && scale.is_finite() && scale >= 0.0,
                "location must be finite and scale >= 0",
            ),
            Self::Pareto { shape, minimum } => {
                ok(minimum.is_finite() && minimum > 0.0, "minimum must be > 0")?;
                ok(
                    shape.is_finite() && shape > 1.0,
                    "shape must exceed 1 for a finite mean",
                )
            }
        }
    }

    /// Exact `E B`.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Deterministic { value } => value,
            Self::Exponential { rate } => 1.0 / rate,
            Self::LogNormal { location, scale } => (location + 0.5 * scale * scale).exp(),
            Self::Pareto { shape, minimum } => shape * minimum / (shape - 1.0),
        }
    }

    /// Whether `E B log B` is finite, decided from the family parameters.
    pub fn b_log_b_finite(&self) -> bool {
        match *self {
            Self::Deterministic { .. } | Self::Exponential { .. } | Self::LogNormal { .. } => true,
            Self::Pareto { shape, .. } => shape > 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Deterministic { value } => value,
            Self::Exponential { rate } => sample_exponential(rate, rng),
            Self::LogNormal { location, scale } => LogNormal::new(location, scale)
                .expect("validated lognormal")
                .sample(rng),
            Self::Pareto { shape, minimum } => Pareto::new(minimum, shape)
                .expect("validated pareto")
                .sample(rng),
        }
    }
}

pub fn service_mean(d: &ServiceDistribution) -> f64 {
    d.mean()
}

pub fn sample_service<R: Rng + ?Sized>(d: &ServiceDistribution, rng: &mut R) -> f64 {
    d.sample(rng)
}

pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    Exp::new(rate).expect("positive rate").sample(rng)
}

/// A gating index: a finite number of gates or unbounded (exhaustive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GatingIndex {
    Finite(u64),
    Infinite,
}

impl GatingIndex {
    /// `r^k`, with `r^inf = 0` and `r^0 = 1`.
    pub fn power(self, r: f64) -> f64 {
        match self {
            GatingIndex::Finite(0) => 1.0,
            GatingIndex::Finite(k) => r.powf(k as f64),
            GatingIndex::Infinite => 0.0,
        }
    }

    pub fn allows(self, gates_done: u64) -> bool {
        match self {
            GatingIndex::Finite(k) => gates_done < k,
            GatingIndex::Infinite => true,
        }
    }
}

/// Law of the gating index `X` drawn independently at every visit.
#[derive(Debug, Clone, PartialEq)]
pub enum GatingDistribution {
    Deterministic(GatingIndex),
    /// `P(X = k) = (1 - p)^(k - 1) p` for `k >= 1`.
    Geometric {
        p: f64,
    },
    FinitePmf(Vec<(GatingIndex, f64)>),
}

pub const PMF_TOLERANCE: f64 = 1e-12;

impl GatingDistribution {
    pub fn gated() -> Self {
        GatingDistribution::Deterministic(GatingIndex::Finite(1))
    }

    pub fn exhaustive() -> Self {
        GatingDistribution::Deterministic(GatingIndex::Infinite)
    }

    pub fn check(&self) -> Result<()> {
        match self {
            Self::Deterministic(_) => Ok(()),
            Self::Geometric { p } => {
                if p.is_finite() && *p > 0.0 && *p <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::param(format!("geometric p = {p} not in (0, 1]")))
                }
            }
            Self::FinitePmf(entries) => {
                if entries.is_empty() {
                    return Err(Error::param("empty gating pmf"));
                }
                let mut total = 0.0;
                for (i, &(k, prob)) in entries.iter().enumerate() {
                    if !(prob.is_finite() && prob >= 0.0) {
                        return Err(Error::param(format!("pmf probability {prob} for {k:?}")));
                    }
                    if entries[..i].iter().any(|&(other, _)| other == k) {
                        return Err(Error::param(format!("duplicate pmf key {k:?}")));
                    }
                    total += prob;
                }
                if (total - 1.0).abs() > PMF_TOLERANCE {
                    return Err(Error::param(format!("pmf sums to {total}")));
                }
                Ok(())
            }
        }
    }

    /// Probability that a visit is exhaustive.
    pub fn prob_infinite(&self) -> f64 {
        match self {
            Self::Deterministic(GatingIndex::Infinite) => 1.0,
            Self::Deterministic(_) | Self::Geometric { .. } => 0.0,
            Self::FinitePmf(entries) => entries
                .iter()
                .filter(|(k, _)| *k == GatingIndex::Infinite)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GatingIndex {
        match self {
            Self::Deterministic(k) => *k,
            Self::Geometric { p } => {
                let failures = Geometric::new(*p).expect("validated geometric").sample(rng);
                GatingIndex::Finite(failures.saturating_add(1))
            }
            Self::FinitePmf(entries) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(k, prob) in entries {
                    acc += prob;
                    if u < acc {
                        return k;
                    }
                }
                // rounding slack goes to the last entry with positive mass
                entries
                    .iter()
                    .rev()
                    .find(|(_, p)| *p > 0.0)
                    .map(|(k, _)| *k)
                    .unwrap_or(entries[entries.len() - 1].0)
            }
        }
    }
}

/// `E r^X` for `0 <= r < 1`.
pub fn gating_pgf_at(g: &GatingDistribution, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain {
            value: r,
            domain: "[0, 1)",
        });
    }
    Ok(match g {
        GatingDistribution::Deterministic(k) => k.power(r),
        GatingDistribution::Geometric { p } => p * r / (1.0 - (1.0 - p) * r),
        GatingDistribution::FinitePmf(entries) => entries.iter().map(|(k, p)| p * k.power(r)).sum(),
    })
}

pub fn sample_gating<R: Rng + ?Sized>(g: &GatingDistribution, rng: &mut R) -> GatingIndex {
    g.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use alloc::vec;
    use proptest::prelude::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn closed_form_means() {
        assert_eq!(
            ServiceDistribution::Exponential { rate: 3.0 }.mean(),
            1.0 / 3.0
        );
        assert_eq!(
            ServiceDistribution::Deterministic { value: 0.5 }.mean(),
            0.5
        );
        assert_eq!(
            ServiceDistribution::Pareto {
                shape: 3.0,
                minimum: 1.0
            }
            .mean(),
            1.5
        );
    }

    #[test]
    fn pareto_mean_matches_quadrature() {
        // E B = min + int_min^inf P(B > x) dx with P(B > x) = (min/x)^shape.
        // Substituting x = min / s^(1/shape)... keep it simple: midpoint rule
        // on x = min * exp(y), y in [0, 60].
        let (shape, minimum) = (3.0f64, 1.0f64);
        let n = 600_000;
        let h = 60.0 / n as f64;
        let mut tail = 0.0;
        for i in 0..n {
            let y = (i as f64 + 0.5) * h;
            let x = minimum * y.exp();
            tail += (minimum / x).powf(shape) * x * h;
        }
        let quad = minimum + tail;
        let d = ServiceDistribution::Pareto { shape, minimum };
        assert!((quad - d.mean()).abs() < 1e-6, "{quad}");
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ServiceDistribution::Exponential { rate: 0.0 }
            .check()
            .is_err());
        assert!(ServiceDistribution::Pareto {
            shape: 1.0,
            minimum: 1.0
        }
        .check()
        .is_err());
        assert!(ServiceDistribution::Deterministic { value: -1.0 }
            .check()
            .is_err());
        assert!(GatingDistribution::Geometric { p: 0.0 }.check().is_err());
        assert!(
            GatingDistribution::FinitePmf(vec![(GatingIndex::Finite(1), 0.5)])
                .check()
                .is_err()
        );
        assert!(GatingDistribution::FinitePmf(vec![
            (GatingIndex::Finite(1), 0.5),
            (GatingIndex::Finite(1), 0.5)
        ])
        .check()
        .is_err());
        assert!(GatingDistribution::FinitePmf(vec![
            (GatingIndex::Finite(1), 0.5),
            (GatingIndex::Infinite, 0.5)
        ])
        .check()
        .is_ok());
    }

    #[test]
    fn pgf_examples() {
        let r = 2.0 / 3.0;
        assert_eq!(
            gating_pgf_at(&GatingDistribution::exhaustive(), r).unwrap(),
            0.0
        );
        assert_eq!(gating_pgf_at(&GatingDistribution::gated(), r).unwrap(), r);
        let geo = GatingDistribution::Geometric { p: 0.5 };
        let closed = gating_pgf_at(&geo, 0.5).unwrap();
        assert!((closed - 1.0 / 3.0).abs() < 1e-15);
        // truncated series sum_k (1/2)^k (1/2)^k
        let series: f64 = (1..200).map(|k| 0.25f64.powi(k)).sum();
        assert!((closed - series).abs() < 1e-15);
        assert_eq!(
            gating_pgf_at(
                &GatingDistribution::Deterministic(GatingIndex::Finite(0)),
                0.0
            )
            .unwrap(),
            1.0
        );
    }

    #[test]
    fn pgf_domain_error() {
        assert!(matches!(
            gating_pgf_at(&GatingDistribution::gated(), 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(gating_pgf_at(&GatingDistribution::gated(), -0.1).is_err());
    }

    #[test]
    fn degenerate_samplers() {
        let mut s = RngStream::new(1, "dist", 0);
        for _ in 0..100 {
            assert_eq!(
                GatingDistribution::exhaustive().sample(&mut s),
                GatingIndex::Infinite
            );
            assert_eq!(
                ServiceDistribution::Deterministic { value: 0.5 }.sample(&mut s),
                0.5
            );
        }
    }

    #[test]
    fn exponential_mean_million_draws() {
        let mut s = RngStream::new(2, "dist", 0);
        let n = 1_000_000;
        let m = (0..n).map(|_| sample_exponential(3.0, &mut s)).sum::<f64>() / n as f64;
        assert!((m - 1.0 / 3.0).abs() < 3.0 * (1.0 / 3.0) / 1e3, "{m}");
    }

    #[test]
    fn empirical_means_within_four_se() {
        let families = [
            ServiceDistribution::Deterministic { value: 0.5 },
            ServiceDistribution::Exponential { rate: 3.0 },
            ServiceDistribution::LogNormal {
                location: -1.0,
                scale: 0.5,
            },
            ServiceDistribution::Pareto {
                shape: 3.5,
                minimum: 0.2,
            },
        ];
        for (idx, d) in families.iter().enumerate() {
            let mut s = RngStream::new(3, "dist-mean", idx as u64);
            let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut s)).collect();
            let (m, se) = mean_and_se(&xs);
            let tol = (4.0 * se).max(1e-12);
            assert!((m - d.mean()).abs() <= tol, "{d:?}: {m} vs {}", d.mean());
        }
    }

    #[test]
    fn geometric_and_pmf_sampling() {
        let mut s = RngStream::new(4, "gating", 0);
        let geo = GatingDistribution::Geometric { p: 0.25 };
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            match geo.sample(&mut s) {
                GatingIndex::Finite(k) => {
                    assert!(k >= 1);
                    sum += k as f64;
                }
                GatingIndex::Infinite => panic!("geometric is finite"),
            }
        }
        // mean 1/p = 4, sd sqrt(1-p)/p
        let se = (0.75f64).sqrt() / 0.25 / (n as f64).sqrt();
        assert!((sum / n as f64 - 4.0).abs() < 4.0 * se);

        let pmf = GatingDistribution::FinitePmf(vec![
            (GatingIndex::Finite(2), 0.3),
            (GatingIndex::Infinite, 0.7),
        ]);
        let inf = (0..n)
            .filter(|_| pmf.sample(&mut s) == GatingIndex::Infinite)
            .count();
        let p = inf as f64 / n as f64;
        assert!((p - 0.7).abs() < 4.0 * (0.21f64 / n as f64).sqrt());
        assert_eq!(pmf.prob_infinite(), 0.7);
    }

    proptest! {
        #[test]
        fn pgf_monotone(r1 in 0.0f64..0.999, r2 in 0.0f64..0.999, p in 0.01f64..1.0, w in 0.0f64..1.0, k in 0u64..8) {
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let gs = [
                GatingDistribution::Geometric { p },
                GatingDistribution::Deterministic(GatingIndex::Finite(k)),
                GatingDistribution::FinitePmf(vec![(GatingIndex::Finite(k), w), (GatingIndex::Infinite, 1.0 - w)]),
            ];
            for g in &gs {
                let a = gating_pgf_at(g, lo).unwrap();
                let b = gating_pgf_at(g, hi).unwrap();
                prop_assert!(a <= b + 1e-15);
                prop_assert!((0.0..=1.0).contains(&a));
            }
        }

        #[test]
        fn streams_replay_identically(seed in any::<u64>(), idx in any::<u64>()) {
            let d = ServiceDistribution::LogNormal { location: 0.0, scale: 1.0 };
            let mut a = RngStream::new(seed, "replay", idx);
            let mut b = RngStream::new(seed, "replay", idx);
            for _ in 0..8 {
                prop_assert_eq!(d.sample(&mut a).to_bits(), d.sample(&mut b).to_bits());
            }
        }
    }
}
