//! Integrator checks against independent references: exact solutions and a brute-force Euler
//! scheme with its own history handling.

use proptest::prelude::*;
use tcell_delay::model::{DcSchedule, HistoryFunction, ModelParams};
use tcell_delay::{simulate, SolverConfig};

/// Forward Euler on a uniform grid, delayed values by linear interpolation between grid points.
fn euler_oracle(
    mu: f64,
    tau: f64,
    schedule: &DcSchedule<f64>,
    x0: f64,
    t_end: f64,
    h: f64,
) -> Vec<f64> {
    let n = (t_end / h).round() as usize;
    let mut xs = Vec::with_capacity(n + 1);
    xs.push(x0);
    for k in 0..n {
        let t = k as f64 * h;
        let lag = t - tau;
        let x_tau = if lag <= 0.0 {
            x0
        } else {
            let pos = lag / h;
            let i = pos.floor() as usize;
            let w = pos - i as f64;
            if i + 1 < xs.len() {
                xs[i] * (1.0 - w) + xs[i + 1] * w
            } else {
                xs[i]
            }
        };
        let a = if schedule.evaluate(lag) { 1.0 } else { 0.0 };
        let x = xs[k];
        xs.push(x + h * (a * x_tau / (1.0 + x_tau.powi(4)) * x - mu * x));
    }
    xs
}

fn oracle_at(xs: &[f64], h: f64, t: f64) -> f64 {
    let pos = t / h;
    let i = (pos.floor() as usize).min(xs.len() - 2);
    let w = pos - i as f64;
    xs[i] * (1.0 - w) + xs[i + 1] * w
}

fn decay_error(step: f64, t_end: f64) -> f64 {
    let (mu, x0) = (0.5, 1.3);
    let params = ModelParams::scaled(mu, 1.0).unwrap();
    let cfg = SolverConfig::new(t_end).unwrap().with_step(step).unwrap();
    let traj = simulate(
        &params,
        &DcSchedule::always_off(),
        &HistoryFunction::constant(x0).unwrap(),
        &cfg,
    )
    .unwrap();
    traj.times()
        .iter()
        .zip(traj.values())
        .filter(|(t, _)| **t >= 0.0)
        .map(|(t, x)| (x - x0 * (-mu * t).exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn fourth_order_convergence_on_pure_decay() {
    for (coarse, fine) in [(0.5, 0.25), (0.25, 0.125), (0.125, 0.0625)] {
        let ratio = decay_error(coarse, 10.0) / decay_error(fine, 10.0);
        assert!(
            (ratio - 16.0).abs() <= 0.2 * 16.0,
            "h={coarse}: ratio {ratio}"
        );
    }
    assert!(decay_error(1.0 / 64.0, 10.0) < 1e-8);
}

#[test]
fn hermite_midpoints_are_fourth_order() {
    let mid_error = |step: f64| {
        let params = ModelParams::scaled(0.5, 1.0).unwrap();
        let cfg = SolverConfig::new(8.0).unwrap().with_step(step).unwrap();
        let traj = simulate(
            &params,
            &DcSchedule::always_off(),
            &HistoryFunction::constant(1.0).unwrap(),
            &cfg,
        )
        .unwrap();
        traj.times()
            .windows(2)
            .filter(|w| w[0] >= 0.0)
            .map(|w| {
                let t = 0.5 * (w[0] + w[1]);
                (traj.interpolate(t).unwrap() - (-0.5 * t).exp()).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (mid_error(0.25), mid_error(0.125));
    let c = e1 / 0.25f64.powi(4);
    assert!(c < 1e-2, "constant {c}");
    let ratio = e1 / e2;
    assert!((10.0..24.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn constant_history_interpolates_constant() {
    let params = ModelParams::scaled(0.5, 2.0).unwrap();
    let traj = simulate(
        &params,
        &DcSchedule::always_on(),
        &HistoryFunction::constant(0.8).unwrap(),
        &SolverConfig::new(1.0).unwrap(),
    )
    .unwrap();
    for k in 0..=100 {
        let t = -2.0 + 2.0 * k as f64 / 100.0;
        assert_eq!(traj.interpolate(t).unwrap(), 0.8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn rk4_agrees_with_brute_force_euler(
        tau in 0.5f64..4.0,
        mu in 0.2f64..0.55,
        x0 in 0.2f64..1.6,
        off_at in proptest::option::of(5.0f64..15.0),
    ) {
        let schedule = match off_at {
            Some(s) => DcSchedule::new(vec![s], true).unwrap(),
            None => DcSchedule::always_on(),
        };
        let params = ModelParams::scaled(mu, tau).unwrap();
        let traj = simulate(&params, &schedule, &HistoryFunction::constant(x0).unwrap(), &SolverConfig::new(20.0).unwrap()).unwrap();
        let h = 1e-5;
        let xs = euler_oracle(mu, tau, &schedule, x0, 20.0, h);
        let sup = traj.times().iter().zip(traj.values())
            .filter(|(t, _)| **t >= 0.0)
            .map(|(&t, &x)| (x - oracle_at(&xs, h, t)).abs())
            .fold(0.0, f64::max);
        prop_assert!(sup < 1e-3, "sup-norm gap {sup}");
    }
}

#[test]
fn switch_lag_that_rounds_below_the_switch() {
    let (tau, mu, x0, s) = (
        2.610633506609222,
        0.2,
        0.8851453120174572,
        13.805845975747301,
    );
    assert!((s + tau) - tau < s);
    let schedule = DcSchedule::new(vec![s], true).unwrap();
    let params = ModelParams::scaled(mu, tau).unwrap();
    let traj = simulate(
        &params,
        &schedule,
        &HistoryFunction::constant(x0).unwrap(),
        &SolverConfig::new(20.0).unwrap(),
    )
    .unwrap();
    let h = 1e-5;
    let xs = euler_oracle(mu, tau, &schedule, x0, 20.0, h);
    for t in [16.5, 17.0, 20.0] {
        assert!(
            (traj.interpolate(t).unwrap() - oracle_at(&xs, h, t)).abs() < 1e-4,
            "t={t}"
        );
    }
}
