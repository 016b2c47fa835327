//! Polling-system description and the overload assumptions.

use alloc::vec::Vec;

use crate::dist::{GatingDistribution, ServiceDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QueueSpec {
    pub arrival_rate: f64,
    pub service: ServiceDistribution,
    pub gating: GatingDistribution,
}

impl QueueSpec {
    pub fn new(
        arrival_rate: f64,
        service: ServiceDistribution,
        gating: GatingDistribution,
    ) -> Self {
        QueueSpec {
            arrival_rate,
            service,
            gating,
        }
    }

    /// Service rate `mu = 1 / E B`.
    pub fn service_rate(&self) -> f64 {
        1.0 / self.service.mean()
    }

    pub fn load(&self) -> f64 {
        self.arrival_rate * self.service.mean()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub queues: Vec<QueueSpec>,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Fewer than two queues.
    TooFewQueues,
    /// Queue `i` (0-based) is unstable in isolation.
    QueueOverloaded(usize),
    /// Total load does not exceed one.
    NotOverloaded,
    /// `E B log B` is infinite at queue `i`.
    InfiniteBLogB(usize),
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::TooFewQueues => "too few queues",
            RejectReason::QueueOverloaded(_) => "queue overloaded in isolation",
            RejectReason::NotOverloaded => "not overloaded",
            RejectReason::InfiniteBLogB(_) => "infinite E B log B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub per_queue_load: Vec<f64>,
    pub total_load: f64,
    pub b_log_b_finite: Vec<bool>,
    pub verdict: Verdict,
    pub reasons: Vec<RejectReason>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Checks structure (parameter ranges) and then the overload assumptions.
///
/// Malformed parameters are an `Err`; a well-formed configuration that
/// violates the assumptions yields `Ok` with a rejecting verdict.
pub fn validate_config(cfg: &ModelConfig) -> Result<ValidationReport> {
    for (i, q) in cfg.queues.iter().enumerate() {
        if !(q.arrival_rate.is_finite() && q.arrival_rate > 0.0) {
            return Err(Error::param(alloc::format!(
                "queue {}: arrival rate {} must be > 0",
                i + 1,
                q.arrival_rate
            )));
        }
        q.service.check()?;
        q.gating.check()?;
    }

    let per_queue_load: Vec<f64> = cfg.queues.iter().map(QueueSpec::load).collect();
    let total_load = per_queue_load.iter().sum();
    let b_log_b_finite: Vec<bool> = cfg
        .queues
        .iter()
        .map(|q| q.service.b_log_b_finite())
        .collect();

    let mut reasons = Vec::new();
    if cfg.queues.len() < 2 {
        reasons.push(RejectReason::TooFewQueues);
    }
    for (i, &load) in per_queue_load.iter().enumerate() {
        if load >= 1.0 {
            reasons.push(RejectReason::QueueOverloaded(i));
        }
    }
    if total_load <= 1.0 {
        reasons.push(RejectReason::NotOverloaded);
    }
    for (i, &fin) in b_log_b_finite.iter().enumerate() {
        if !fin {
            reasons.push(RejectReason::InfiniteBLogB(i));
        }
    }
    let verdict = if reasons.is_empty() {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Ok(ValidationReport {
        per_queue_load,
        total_load,
        b_log_b_finite,
        verdict,
        reasons,
    })
}

/// A configuration that passed [`validate_config`]. Every simulation and
/// analysis entry point takes this type, so rejected configurations cannot
/// reach them.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    cfg: ModelConfig,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    total_rate: f64,
}

impl Model {
    pub fn new(cfg: ModelConfig) -> Result<Model> {
        let report = validate_config(&cfg)?;
        if !report.accepted() {
            return Err(Error::Rejected(report.reasons));
        }
        Ok(Self::from_checked(cfg))
    }

    /// Skips the overload assumptions but still checks parameter ranges.
    /// Used to study degenerate gating (e.g. `X = 0` everywhere) whose
    /// branching process is not supercritical.
    pub fn new_unchecked_load(cfg: ModelConfig) -> Result<Model> {
        validate_config(&cfg)?;
        if cfg.queues.is_empty() {
            return Err(Error::param("no queues"));
        }
        Ok(Self::from_checked(cfg))
    }

    fn from_checked(cfg: ModelConfig) -> Model {
        let lambda: Vec<f64> = cfg.queues.iter().map(|q| q.arrival_rate).collect();
        let mu = cfg.queues.iter().map(QueueSpec::service_rate).collect();
        let total_rate = lambda.iter().sum();
        Model {
            cfg,
            lambda,
            mu,
            total_rate,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn queue(&self, i: usize) -> &QueueSpec {
        &self.cfg.queues[i]
    }

    pub fn len(&self) -> usize {
        self.cfg.queues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cfg.queues.is_empty()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.total_rate
    }

    pub fn total_load(&self) -> f64 {
        self.lambda.iter().zip(&self.mu).map(|(l, m)| l / m).sum()
    }

    pub fn base_seed(&self) -> u64 {
        self.cfg.base_seed
    }
}

/// Two-queue configuration sharing one arrival rate, service law and
/// gating law; handy in tests and examples.
pub fn symmetric(
    arrival_rate: f64,
    service: ServiceDistribution,
    gating: GatingDistribution,
    base_seed: u64,
) -> ModelConfig {
    ModelConfig {
        queues: alloc::vec![
            QueueSpec::new(arrival_rate, service.clone(), gating.clone()),
            QueueSpec::new(arrival_rate, service, gating),
        ],
        base_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn exp3(lambda: [f64; 2], rate: f64) -> ModelConfig {
        ModelConfig {
            queues: lambda
                .iter()
                .map(|&l| {
                    QueueSpec::new(
                        l,
                        ServiceDistribution::Exponential { rate },
                        GatingDistribution::gated(),
                    )
                })
                .collect(),
            base_seed: 1,
        }
    }

    #[test]
    fn accepts_overloaded_symmetric() {
        let r = validate_config(&exp3([2.0, 2.0], 3.0)).unwrap();
        assert!(r.accepted());
        assert!((r.per_queue_load[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.total_load - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.b_log_b_finite, vec![true, true]);
    }

    #[test]
    fn rejects_underloaded() {
        let r = validate_config(&exp3([1.0, 1.0], 3.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
        assert_eq!(r.reasons, vec![RejectReason::NotOverloaded]);
        assert_eq!(r.reasons[0].code(), "not overloaded");
    }

    #[test]
    fn rejects_unstable_queue() {
        let r = validate_config(&exp3([3.0, 1.0], 2.0)).unwrap();
        assert_eq!(r.reasons, vec![RejectReason::QueueOverloaded(0)]);
    }

    #[test]
    fn single_queue_rejected() {
        let cfg = ModelConfig {
            queues: vec![QueueSpec::new(
                2.0,
                ServiceDistribution::Exponential { rate: 3.0 },
                GatingDistribution::gated(),
            )],
            base_seed: 0,
        };
        let r = validate_config(&cfg).unwrap();
        assert!(r.reasons.contains(&RejectReason::TooFewQueues));
        assert!(matches!(Model::new(cfg), Err(Error::Rejected(_))));
    }

    #[test]
    fn structural_errors_are_not_verdicts() {
        let mut cfg = exp3([2.0, 2.0], 3.0);
        cfg.queues[1].service = ServiceDistribution::Exponential { rate: -3.0 };
        assert!(matches!(
            validate_config(&cfg),
            Err(Error::InvalidParameter(_))
        ));
        let mut cfg = exp3([2.0, 2.0], 3.0);
        cfg.queues[0].arrival_rate = 0.0;
        assert!(matches!(
            validate_config(&cfg),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn model_requires_accept() {
        assert!(Model::new(exp3([2.0, 2.0], 3.0)).is_ok());
        assert!(matches!(
            Model::new(exp3([1.0, 1.0], 3.0)),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn validation_is_pure() {
        let cfg = exp3([2.0, 1.5], 3.0);
        assert_eq!(
            validate_config(&cfg).unwrap(),
            validate_config(&cfg).unwrap()
        );
    }
}
