//! Method-of-steps integration.
//!
//! Fixed-step classical RK4. When `tau > 0` the step divides `tau` exactly, so every stage
//! reads `x(t + c h - tau)` from nodes that are already committed; off-node values come from
//! the cubic Hermite interpolant built from the stored derivatives. Steps are forced to end
//! on every breakpoint: `0`, the multiples of `tau`, and each schedule switch `s` together
//! with `s + tau`, where the delayed indicator `a(t - tau)` jumps.

mod classify;
mod trajectory;

pub use classify::{classify_longterm, summarize_longterm, LongTermClass, LongTermSummary};
pub use trajectory::{NodeFlags, Trajectory};

use crate::model::{rhs_raw, DcSchedule, HistoryFunction, ModelParams};
use crate::{Error, Result, Scalar};

/// Step used when none is given and `tau = 0`.
pub const DEFAULT_ODE_STEP: f64 = 1.0 / 64.0;
/// Steps per delay interval used when none is given.
pub const DEFAULT_STEPS_PER_DELAY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    step: Option<T>,
    t_end: T,
    clamp_negative: bool,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(t_end: T) -> Result<Self> {
        if !(t_end > T::zero() && t_end.is_finite()) {
            return Err(Error::invalid(
                "t_end",
                t_end.as_f64(),
                "must be positive and finite",
            ));
        }
        Ok(Self {
            step: None,
            t_end,
            clamp_negative: true,
        })
    }

    pub fn with_step(mut self, step: T) -> Result<Self> {
        if !(step > T::zero() && step.is_finite()) {
            return Err(Error::invalid(
                "step",
                step.as_f64(),
                "must be positive and finite",
            ));
        }
        self.step = Some(step);
        Ok(self)
    }

    pub fn with_clamp_negative(mut self, clamp: bool) -> Self {
        self.clamp_negative = clamp;
        self
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn clamp_negative(&self) -> bool {
        self.clamp_negative
    }

    pub fn requested_step(&self) -> Option<T> {
        self.step
    }

    /// The step actually used: `tau / ceil(tau / step)` when `tau > 0`, so that it divides
    /// the delay; `tau / 64` or `2^-6` by default.
    pub fn step_for(&self, tau: T) -> T {
        if tau > T::zero() {
            let requested = self
                .step
                .unwrap_or(tau / T::from_usize_lossy(DEFAULT_STEPS_PER_DELAY));
            let per_delay = (tau / requested * (T::one() - T::epsilon() * T::lit(16.0)))
                .ceil()
                .max(T::one());
            tau / per_delay
        } else {
            self.step.unwrap_or(T::lit(DEFAULT_ODE_STEP))
        }
    }
}

/// Integrates the model on `[0, t_end]` from `history` on `[-tau, 0]`.
pub fn simulate<T: Scalar>(
    params: &ModelParams<T>,
    schedule: &DcSchedule<T>,
    history: &HistoryFunction<T>,
    config: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    let (mu, r, tau) = (params.mu(), params.r(), params.tau());
    let t_end = config.t_end();
    let h = config.step_for(tau);
    let delayed = tau > T::zero();
    let f = |x: T, x_tau: T, dc: bool| rhs_raw(x, x_tau, dc, mu, r);

    let estimate = ((t_end + tau) / h)
        .to_usize()
        .unwrap_or(0)
        .saturating_add(16);
    let mut traj = Trajectory::with_capacity(estimate, config.clamp_negative());
    let history_flags = NodeFlags {
        history: true,
        ..NodeFlags::default()
    };

    // History nodes strictly before t = 0, and the derivative arriving at t = 0.
    let (x0, history_slope) = match history {
        HistoryFunction::Constant(c) => {
            if !(*c >= T::zero()) {
                return Err(Error::NegativePopulation(c.as_f64()));
            }
            if delayed {
                let m = (tau / h).round().to_usize().unwrap_or(1).max(1);
                for k in 0..m {
                    let t = -tau + T::from_usize_lossy(k) * h;
                    traj.push(
                        t,
                        *c,
                        T::zero(),
                        T::zero(),
                        schedule.evaluate(t),
                        history_flags,
                    );
                }
            }
            (*c, T::zero())
        }
        HistoryFunction::Sampled(seg) => {
            let slack = T::tol(1e-9, 64.0) * tau.max(T::one());
            let (first, last) = (seg.times[0], *seg.times.last().expect("non-empty"));
            if first > -tau + slack {
                return Err(Error::HistoryUndefined("samples start after -tau"));
            }
            if last.abs() > slack {
                return Err(Error::HistoryUndefined("samples must end at t = 0"));
            }
            let n = seg.times.len();
            if delayed {
                for k in 0..n - 1 {
                    let t = seg.times[k];
                    traj.push(
                        t,
                        seg.values[k],
                        seg.derivatives[k],
                        seg.derivatives[k],
                        schedule.evaluate(t),
                        history_flags,
                    );
                }
            }
            (seg.values[n - 1], seg.derivatives[n - 1])
        }
    };

    let x_tau0 = if delayed {
        traj_value_or(&traj, -tau, x0)
    } else {
        x0
    };
    let slope0 = f(x0, x_tau0, schedule.evaluate(-tau));
    let left0 = if delayed { history_slope } else { slope0 };
    traj.push(
        T::zero(),
        x0,
        left0,
        slope0,
        schedule.evaluate(T::zero()),
        NodeFlags {
            breakpoint: true,
            ..NodeFlags::default()
        },
    );

    let breakpoints = breakpoints(tau, t_end, schedule.switch_times());
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    for pair in breakpoints.windows(2) {
        let (b0, b1) = (pair[0], pair[1]);
        let span = b1 - b0;
        let m = (span / h * (T::one() - T::epsilon() * T::lit(16.0)))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let hh = span / T::from_usize_lossy(m);
        for i in 0..m {
            let last = traj.len() - 1;
            let (t, x) = (traj.times[last], traj.values[last]);
            let t_next = if i + 1 == m {
                b1
            } else {
                b0 + T::from_usize_lossy(i + 1) * hh
            };
            let step = t_next - t;
            let half = step / two;
            // No switch of a(. - tau) lies strictly inside the step.
            let dc = schedule.evaluate(t + half - tau);

            let (xd_mid, xd_end) = if delayed {
                (traj.eval(t + half - tau), traj.eval(t_next - tau))
            } else {
                (T::nan(), T::nan())
            };
            let lag = |state: T, xd: T| if delayed { xd } else { state };

            // The right derivative at the node is the first stage, with this step's a(. - tau).
            let xd_start = if delayed { traj.eval(t - tau) } else { x };
            let k1 = f(x, xd_start, dc);
            traj.derivatives[last] = k1;
            let s2 = x + half * k1;
            let k2 = f(s2, lag(s2, xd_mid), dc);
            let s3 = x + half * k2;
            let k3 = f(s3, lag(s3, xd_mid), dc);
            let s4 = x + step * k3;
            let k4 = f(s4, lag(s4, xd_end), dc);
            let mut x_new = x + step / six * (k1 + two * k2 + two * k3 + k4);

            let mut flags = NodeFlags {
                breakpoint: i + 1 == m && b1 < t_end,
                ..NodeFlags::default()
            };
            if config.clamp_negative() && x_new < T::zero() {
                x_new = T::zero();
                flags.clamped = true;
            }
            let xd = lag(x_new, xd_end);
            let left = f(x_new, xd, dc);
            traj.push(t_next, x_new, left, left, schedule.evaluate(t_next), flags);
        }
    }
    traj.breakpoints = breakpoints[..breakpoints.len() - 1].to_vec();
    Ok(traj)
}

fn traj_value_or<T: Scalar>(traj: &Trajectory<T>, t: T, fallback: T) -> T {
    if traj.is_empty() {
        fallback
    } else {
        traj.eval(t)
    }
}

/// Sorted restart times in `[0, t_end]`, both ends included.
pub fn breakpoints<T: Scalar>(tau: T, t_end: T, switches: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(), t_end];
    if tau > T::zero() {
        let mut k = 1;
        loop {
            let b = T::from_usize_lossy(k) * tau;
            if b >= t_end {
                break;
            }
            out.push(b);
            k += 1;
        }
    }
    for &s in switches {
        out.push(s);
        out.push(s + tau);
    }
    out.retain(|&b| b >= T::zero() && b <= t_end);
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let merge = T::tol(1e-12, 64.0) * t_end.max(T::one());
    let mut merged: Vec<T> = Vec::with_capacity(out.len());
    for b in out {
        match merged.last() {
            Some(&prev) if b - prev <= merge => {
                // keep t_end itself exact
                if b == t_end {
                    *merged.last_mut().expect("non-empty") = b;
                }
            }
            _ => merged.push(b),
        }
    }
    if merged.len() == 1 {
        merged.push(t_end);
    }
    merged
}
