use proptest::prelude::*;
use tcell_delay::model::{
    feedback_peak_location, feedback_peak_value, DcSchedule, HistoryFunction, ModelConfig,
    ModelParams,
};
use tcell_delay::{feedback, find_equilibria, rescale, rhs, simulate, SolverConfig};

#[test]
fn feedback_is_unimodal_on_a_grid() {
    let peak = feedback_peak_location::<f64>();
    let f = |x: f64| feedback(x, 1.0).unwrap();
    for k in 0..20_000 {
        let x = k as f64 * 2e-4;
        let slope = f(x + 1e-5) - f(x);
        if x + 1e-5 < peak {
            assert!(slope > 0.0, "increasing at {x}");
        } else if x > peak {
            assert!(slope < 0.0, "decreasing at {x}");
        }
    }
}

#[test]
fn golden_config_document() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/model_config.json"
    ))
    .unwrap();
    let cfg: ModelConfig<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!((cfg.mu, cfg.r, cfg.tau), (0.25, 0.5, 4.0));
    assert_eq!(cfg.schedule.switch_times(), &[2.0, 30.0]);
    assert!(cfg.schedule.initial_value());
    assert_eq!(serde_json::to_string(&cfg).unwrap(), text);
}

/// The unscaled system at time t and the rescaled one at r t are the same solution.
fn rescaled_gap(r: f64, mu: f64, tau: f64, x0: f64, schedule: DcSchedule<f64>, t_end: f64) -> f64 {
    let raw = ModelConfig {
        mu,
        r,
        tau,
        schedule,
    };
    let (scaled, scaled_schedule) = raw.normalized().unwrap();
    let history = HistoryFunction::constant(x0).unwrap();
    let a = simulate(
        &raw.params().unwrap(),
        &raw.schedule,
        &history,
        &SolverConfig::new(t_end).unwrap(),
    )
    .unwrap();
    let b = simulate(
        &scaled,
        &scaled_schedule,
        &history,
        &SolverConfig::new(t_end * r).unwrap(),
    )
    .unwrap();
    a.times()
        .iter()
        .zip(a.values())
        .filter(|(t, _)| **t >= 0.0)
        .map(|(&t, &x)| (x - b.interpolate((t * r).min(b.end())).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rescale_example_by_simulation() {
    assert_eq!(rescale(0.5, 0.25, 4.0).unwrap(), (0.5, 2.0));
    let gap = rescaled_gap(0.5, 0.25, 4.0, 1.2, DcSchedule::always_on(), 60.0);
    assert!(gap < 1e-6, "gap {gap}");
    let gap = rescaled_gap(
        2.0,
        1.0,
        1.0,
        0.9,
        DcSchedule::pulse(3.0, 12.0).unwrap(),
        30.0,
    );
    assert!(gap < 1e-6, "gap {gap}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feedback_bounded(x in 0.0f64..1e6, r in 0.01f64..10.0) {
        let v = feedback(x, r).unwrap();
        prop_assert!(v >= 0.0 && v <= r * feedback_peak_value::<f64>() * (1.0 + 1e-15));
    }

    #[test]
    fn zero_population_is_a_fixed_point(x_tau in 0.0f64..10.0, a in any::<bool>(), mu in 0.01f64..2.0) {
        let p = ModelParams::scaled(mu, 1.0).unwrap();
        prop_assert_eq!(rhs(0.0, x_tau, a, &p).unwrap(), 0.0);
    }

    #[test]
    fn rescaling_is_a_time_change(r in 0.3f64..3.0, mu_scaled in 0.1f64..0.55, tau_scaled in 0.2f64..4.0, x0 in 0.1f64..2.0) {
        let gap = rescaled_gap(r, mu_scaled * r, tau_scaled / r, x0, DcSchedule::always_on(), 25.0 / r);
        prop_assert!(gap < 1e-6, "gap {}", gap);
    }

    #[test]
    fn trajectories_stay_non_negative(
        mu in 0.05f64..1.0,
        tau in 0.0f64..6.0,
        x0 in 0.0f64..3.0,
        switches in proptest::collection::vec(0.0f64..40.0, 0..4),
        start_on in any::<bool>(),
    ) {
        let mut s = switches;
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        let schedule = DcSchedule::new(s, start_on).unwrap();
        let params = ModelParams::scaled(mu, tau).unwrap();
        let traj = simulate(&params, &schedule, &HistoryFunction::constant(x0).unwrap(), &SolverConfig::new(40.0).unwrap()).unwrap();
        prop_assert!(traj.values().iter().all(|&x| x >= 0.0));
        prop_assert!(traj.times().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn equilibria_residuals(mu in 1e-4f64..0.5698) {
        let eq = find_equilibria(mu);
        for x in [eq.x_minus.unwrap(), eq.x_star.unwrap()] {
            prop_assert!((x / (1.0 + x.powi(4)) - mu).abs() < 1e-12);
        }
    }
}
