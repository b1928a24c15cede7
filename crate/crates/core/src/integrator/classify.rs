use serde::Serialize;

use super::Trajectory;
use crate::equilibria::EquilibriumSet;
use crate::{Error, Result, Scalar};

pub const EXTINCT_THRESHOLD: f64 = 1e-3;
pub const LOCK_THRESHOLD: f64 = 1e-3;
pub const OSCILLATION_AMPLITUDE: f64 = 1e-2;
/// Allowed relative spread of the spacing between successive maxima.
pub const PERIOD_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LongTermClass {
    Extinct,
    LockedToXStar,
    Oscillating,
    Undetermined,
}

impl LongTermClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LongTermClass::Extinct => "extinct",
            LongTermClass::LockedToXStar => "locked_to_x_star",
            LongTermClass::Oscillating => "oscillating",
            LongTermClass::Undetermined => "undetermined",
        }
    }
}

/// Behaviour over the final window of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongTermSummary<T> {
    pub class: LongTermClass,
    pub final_value: T,
    /// Peak-to-trough over the window.
    pub amplitude: T,
    /// Mean spacing of successive maxima, when at least three were seen.
    pub period: Option<T>,
}

pub fn classify_longterm<T: Scalar>(
    traj: &Trajectory<T>,
    equil: &EquilibriumSet<T>,
    window: T,
) -> Result<LongTermClass> {
    summarize_longterm(traj, equil, window).map(|s| s.class)
}

pub fn summarize_longterm<T: Scalar>(
    traj: &Trajectory<T>,
    equil: &EquilibriumSet<T>,
    window: T,
) -> Result<LongTermSummary<T>> {
    if !(window > T::zero()) {
        return Err(Error::invalid(
            "window",
            window.as_f64(),
            "must be positive",
        ));
    }
    let length = if traj.is_empty() {
        T::zero()
    } else {
        traj.end() - traj.start().max(T::zero())
    };
    if window * T::lit(2.0) > length {
        return Err(Error::WindowTooLong {
            window: window.as_f64(),
            needed: (window * T::lit(2.0)).as_f64(),
            length: length.as_f64(),
        });
    }

    let range = traj.tail_from(traj.end() - window);
    let times = &traj.times()[range.clone()];
    let xs = &traj.values()[range];
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let min = xs.iter().copied().fold(T::infinity(), T::min);
    let amplitude = max - min;
    let final_value = *xs.last().expect("window contains nodes");

    let mut summary = LongTermSummary {
        class: LongTermClass::Undetermined,
        final_value,
        amplitude,
        period: None,
    };
    let peaks = peak_times(times, xs, min + amplitude / T::lit(2.0));
    if peaks.len() >= 3 {
        let gaps: Vec<T> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
        let mean =
            gaps.iter().copied().fold(T::zero(), |a, b| a + b) / T::from_usize_lossy(gaps.len());
        let spread = gaps.iter().copied().fold(T::neg_infinity(), T::max)
            - gaps.iter().copied().fold(T::infinity(), T::min);
        if spread < T::lit(PERIOD_SPREAD) * mean {
            summary.period = Some(mean);
        }
    }

    summary.class = if max < T::lit(EXTINCT_THRESHOLD) {
        LongTermClass::Extinct
    } else if equil
        .x_star
        .is_some_and(|xs_| xs.iter().all(|&x| (x - xs_).abs() < T::lit(LOCK_THRESHOLD)))
    {
        LongTermClass::LockedToXStar
    } else if amplitude > T::lit(OSCILLATION_AMPLITUDE) && summary.period.is_some() {
        LongTermClass::Oscillating
    } else {
        LongTermClass::Undetermined
    };
    Ok(summary)
}

/// Times of local maxima above `floor`, refined by the vertex of the parabola through the
/// neighbouring nodes.
fn peak_times<T: Scalar>(times: &[T], xs: &[T], floor: T) -> Vec<T> {
    let mut out = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        let (a, b, c) = (xs[i - 1], xs[i], xs[i + 1]);
        if !(b > a && b >= c && b > floor) {
            continue;
        }
        let (t0, t1, t2) = (times[i - 1], times[i], times[i + 1]);
        let num = (t1 - t0).powi(2) * (b - c) - (t1 - t2).powi(2) * (b - a);
        let den = (t1 - t0) * (b - c) - (t1 - t2) * (b - a);
        let vertex = if den != T::zero() {
            t1 - num / (T::lit(2.0) * den)
        } else {
            t1
        };
        out.push(if vertex > t0 && vertex < t2 {
            vertex
        } else {
            t1
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::find_equilibria;
    use crate::integrator::NodeFlags;

    fn synthetic(f: impl Fn(f64) -> f64, t_end: f64) -> Trajectory<f64> {
        let mut traj = Trajectory::with_capacity(0, true);
        let n = (t_end * 20.0) as usize;
        for k in 0..=n {
            let t = k as f64 / 20.0;
            traj.push(t, f(t), 0.0, 0.0, true, NodeFlags::default());
        }
        traj
    }

    #[test]
    fn classes_on_synthetic_signals() {
        let eq = find_equilibria(0.5);
        let s = synthetic(|t| 2.0 * (-t).exp(), 100.0);
        assert_eq!(
            classify_longterm(&s, &eq, 20.0).unwrap(),
            LongTermClass::Extinct
        );
        let s = synthetic(|t| 1.0 + (-t).exp(), 100.0);
        assert_eq!(
            classify_longterm(&s, &eq, 20.0).unwrap(),
            LongTermClass::LockedToXStar
        );
        let s = synthetic(|t| 1.0 + 0.3 * (t * 0.5).sin(), 200.0);
        let sum = summarize_longterm(&s, &eq, 60.0).unwrap();
        assert_eq!(sum.class, LongTermClass::Oscillating);
        assert!((sum.period.unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-3);
        assert!((sum.amplitude - 0.6).abs() < 1e-3);
        // drifting, not periodic
        let s = synthetic(|t| 1.0 + 0.01 * t, 100.0);
        assert_eq!(
            classify_longterm(&s, &eq, 20.0).unwrap(),
            LongTermClass::Undetermined
        );
        // sitting at x- is neither
        let s = synthetic(|_| eq.x_minus.unwrap(), 100.0);
        assert_eq!(
            classify_longterm(&s, &eq, 20.0).unwrap(),
            LongTermClass::Undetermined
        );
    }

    #[test]
    fn chirp_is_not_periodic() {
        let eq = find_equilibria(0.5);
        let s = synthetic(|t| 1.0 + 0.3 * (0.02 * t * t).sin(), 200.0);
        assert_eq!(
            classify_longterm(&s, &eq, 80.0).unwrap(),
            LongTermClass::Undetermined
        );
    }

    #[test]
    fn window_checks() {
        let eq = find_equilibria(0.5);
        let s = synthetic(|_| 1.0, 10.0);
        assert!(matches!(
            classify_longterm(&s, &eq, 6.0),
            Err(Error::WindowTooLong { .. })
        ));
        assert!(classify_longterm(&s, &eq, 0.0).is_err());
        assert!(classify_longterm(&s, &eq, 5.0).is_ok());
    }
}
