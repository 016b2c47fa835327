use polling_core::branching::{sample_xi, session_mean_matrix, visit_means, XiOptions};
use polling_core::dist::{GatingDistribution, GatingIndex, ServiceDistribution};
use polling_core::fluid::{
    eval_fluid, eval_fluid_alt, fluid_constants, log_grid, CONSISTENCY_TOLERANCE,
};
use polling_core::model::symmetric;
use polling_core::perron::{perron, Matrix};
use polling_core::sim::{run_trace, SimOptions};
use polling_core::{Error, Model, ModelConfig, QueueSpec, RngStream, Sequential, StreamFamily};
use proptest::prelude::*;

fn queue(lambda: f64, mu: f64, gating: GatingDistribution) -> QueueSpec {
    QueueSpec::new(
        lambda,
        ServiceDistribution::Exponential { rate: mu },
        gating,
    )
}

fn gating_strategy() -> impl Strategy<Value = GatingDistribution> {
    prop_oneof![
        Just(GatingDistribution::gated()),
        Just(GatingDistribution::exhaustive()),
        (1u64..4).prop_map(|k| GatingDistribution::Deterministic(GatingIndex::Finite(k))),
        (0.1f64..0.9).prop_map(|p| GatingDistribution::Geometric { p }),
    ]
}

/// Overloaded models with 2 or 3 queues, each individually stable.
fn model_strategy() -> impl Strategy<Value = Model> {
    proptest::collection::vec((0.3f64..0.9, 1.0f64..4.0, gating_strategy()), 2..=3).prop_filter_map(
        "total load must exceed one",
        |qs| {
            let queues: Vec<QueueSpec> = qs
                .into_iter()
                .map(|(load, mu, g)| queue(load * mu, mu, g))
                .collect();
            Model::new(ModelConfig {
                queues,
                base_seed: 1,
            })
            .ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fluid_constants_close_up(model in model_strategy()) {
        let vm = visit_means(&model).unwrap();
        let sp = perron(&session_mean_matrix(&vm)).unwrap();
        let fc = fluid_constants(&model, &vm, &sp).unwrap();
        prop_assert!(fc.consistency(&vm).holds(CONSISTENCY_TOLERANCE));
        prop_assert!(fc.b_bar.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(fc.alpha > 0.0);
        for &t in &log_grid(0.01, 100.0, 200) {
            let q = eval_fluid(&fc, t).unwrap();
            let alt = eval_fluid_alt(&fc, t).unwrap();
            let scaled = eval_fluid(&fc, fc.rho * t).unwrap();
            for c in 0..q.len() {
                prop_assert!(q[c] >= -1e-12);
                prop_assert!((q[c] - alt[c]).abs() <= 1e-9 * t.max(1.0));
                prop_assert!((scaled[c] - fc.rho * q[c]).abs() <= 1e-9 * t.max(1.0));
            }
        }
    }

    #[test]
    fn perron_on_positive_matrices(entries in proptest::collection::vec(0.05f64..3.0, 9)) {
        let rows: Vec<Vec<f64>> = entries.chunks(3).map(<[f64]>::to_vec).collect();
        let m = Matrix::from_rows(&rows);
        match perron(&m) {
            Ok(sp) => {
                prop_assert!(sp.right_residual(&m) < 1e-10 && sp.left_residual(&m) < 1e-10);
                prop_assert!(sp.u.iter().chain(&sp.v).all(|&x| x > 0.0));
                let dot: f64 = sp.u.iter().zip(&sp.v).map(|(a, b)| a * b).sum();
                prop_assert!((dot - 1.0).abs() < 1e-12);
            }
            Err(Error::NotSupercritical { rho }) => prop_assert!(rho <= 1.0 + 1e-12),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn underloaded_model_is_rejected() {
    let cfg = ModelConfig {
        queues: vec![
            queue(1.0, 3.0, GatingDistribution::gated()),
            queue(1.0, 3.0, GatingDistribution::gated()),
        ],
        base_seed: 0,
    };
    assert!(matches!(Model::new(cfg), Err(Error::Rejected(_))));
}

#[test]
fn trace_grows_geometrically_along_the_fluid_direction() {
    let model = Model::new(symmetric(
        2.0,
        ServiceDistribution::Exponential { rate: 3.0 },
        GatingDistribution::gated(),
        5,
    ))
    .unwrap();
    let vm = visit_means(&model).unwrap();
    let sp = perron(&session_mean_matrix(&vm)).unwrap();
    let trace = run_trace(
        &model,
        &mut RngStream::new(5, "pipeline", 0),
        40,
        SimOptions::default(),
        None,
    )
    .unwrap();
    // session start times grow like rho per session once the system stops emptying
    let times: Vec<f64> = trace.sessions.iter().map(|s| s.t_session).collect();
    let ratios: Vec<f64> = times[30..].windows(2).map(|w| w[1] / w[0]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - sp.rho).abs() < 0.1, "{mean} vs {}", sp.rho);
}

#[test]
fn xi_sampler_is_replayable() {
    let model = Model::new(symmetric(
        2.0,
        ServiceDistribution::Exponential { rate: 3.0 },
        GatingDistribution::exhaustive(),
        9,
    ))
    .unwrap();
    let vm = visit_means(&model).unwrap();
    let sp = perron(&session_mean_matrix(&vm)).unwrap();
    let fc = fluid_constants(&model, &vm, &sp).unwrap();
    let opts = XiOptions {
        n_samples: 200,
        depth: 6,
        pop_cap: 100_000,
    };
    let fam = StreamFamily::new(9, "xi");
    let a = sample_xi(&model, &sp, fc.alpha, opts, &fam, &Sequential).unwrap();
    let b = sample_xi(&model, &sp, fc.alpha, opts, &fam, &Sequential).unwrap();
    assert_eq!(a, b);
    assert!(a.values.iter().all(|x| (1.0..fc.rho).contains(x)));
}
