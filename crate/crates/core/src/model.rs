//! Model constants, the feedback function, the DC schedule and the right-hand side.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Location of the peak of `f(., 1)`: `3^(-1/4)`.
pub fn feedback_peak_location<T: Scalar>() -> T {
    T::lit(3.0).powf(T::lit(-0.25))
}

/// Peak value of `f(., 1)`: `3^(3/4) / 4`. Also the upper end of the existence window for `x-`, `x*`.
pub fn feedback_peak_value<T: Scalar>() -> T {
    T::lit(3.0).powf(T::lit(0.75)) / T::lit(4.0)
}

/// Model constants. `r` is 1 after [`ModelParams::normalized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    mu: T,
    r: T,
    tau: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(mu: T, r: T, tau: T) -> Result<Self> {
        if !(mu > T::zero() && mu.is_finite()) {
            return Err(Error::invalid(
                "mu",
                mu.as_f64(),
                "must be positive and finite",
            ));
        }
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::invalid(
                "r",
                r.as_f64(),
                "must be positive and finite",
            ));
        }
        if !(tau >= T::zero() && tau.is_finite()) {
            return Err(Error::invalid(
                "tau",
                tau.as_f64(),
                "must be non-negative and finite",
            ));
        }
        Ok(Self { mu, r, tau })
    }

    /// Parameters already in the `r = 1` form.
    pub fn scaled(mu: T, tau: T) -> Result<Self> {
        Self::new(mu, T::one(), tau)
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn is_scaled(&self) -> bool {
        self.r == T::one()
    }

    /// The same system in rescaled time `t' = r t`, with `r = 1`.
    pub fn normalized(&self) -> Self {
        let (mu, tau) = rescale_unchecked(self.r, self.mu, self.tau);
        Self {
            mu,
            r: T::one(),
            tau,
        }
    }

    /// Whether `x-` and `x*` exist, judged on the normalized decay rate.
    pub fn has_positive_equilibria(&self) -> bool {
        self.mu / self.r < feedback_peak_value::<T>()
    }
}

/// `f(x_tau) = r x_tau / (1 + x_tau^4)`.
pub fn feedback<T: Scalar>(x_tau: T, r: T) -> Result<T> {
    if x_tau < T::zero() || x_tau.is_nan() {
        return Err(Error::NegativePopulation(x_tau.as_f64()));
    }
    if !(r > T::zero()) {
        return Err(Error::invalid("r", r.as_f64(), "must be positive"));
    }
    Ok(feedback_raw(x_tau, r))
}

#[inline]
pub(crate) fn feedback_raw<T: Scalar>(x_tau: T, r: T) -> T {
    // x^4 overflows long before the quotient loses meaning; the limit is 0.
    let q = x_tau.powi(4);
    if q.is_infinite() {
        return T::zero();
    }
    r * x_tau / (T::one() + q)
}

/// `a(t - tau) f(x(t - tau)) x(t) - mu x(t)`.
pub fn rhs<T: Scalar>(x: T, x_tau: T, dc_present: bool, params: &ModelParams<T>) -> Result<T> {
    if x < T::zero() || x.is_nan() {
        return Err(Error::NegativePopulation(x.as_f64()));
    }
    if x_tau < T::zero() || x_tau.is_nan() {
        return Err(Error::NegativePopulation(x_tau.as_f64()));
    }
    Ok(rhs_raw(x, x_tau, dc_present, params.mu, params.r))
}

#[inline]
pub(crate) fn rhs_raw<T: Scalar>(x: T, x_tau: T, dc_present: bool, mu: T, r: T) -> T {
    let growth = if dc_present {
        feedback_raw(x_tau, r)
    } else {
        T::zero()
    };
    (growth - mu) * x
}

/// Maps `(r, mu, tau)` to the `(mu, tau)` of the `r = 1` system in time `t' = r t`.
pub fn rescale<T: Scalar>(r: T, mu: T, tau: T) -> Result<(T, T)> {
    if !(r > T::zero() && r.is_finite()) {
        return Err(Error::invalid(
            "r",
            r.as_f64(),
            "must be positive and finite",
        ));
    }
    Ok(rescale_unchecked(r, mu, tau))
}

fn rescale_unchecked<T: Scalar>(r: T, mu: T, tau: T) -> (T, T) {
    (mu / r, r * tau)
}

/// Piecewise-constant, right-continuous 0/1 indicator of DC presence.
///
/// `a(t)` equals `initial_value` before the first switch time and flips at every switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawSchedule<T>",
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Scalar + Deserialize<'de>"
    )
)]
pub struct DcSchedule<T> {
    switch_times: Vec<T>,
    #[serde(with = "dc_level")]
    initial_value: bool,
}

#[derive(Deserialize)]
struct RawSchedule<T> {
    #[serde(default)]
    switch_times: Vec<T>,
    #[serde(with = "dc_level")]
    initial_value: bool,
}

impl<T: Scalar> TryFrom<RawSchedule<T>> for DcSchedule<T> {
    type Error = Error;

    fn try_from(raw: RawSchedule<T>) -> Result<Self> {
        Self::new(raw.switch_times, raw.initial_value)
    }
}

impl<T: Scalar> Default for DcSchedule<T> {
    fn default() -> Self {
        Self::always_on()
    }
}

impl<T: Scalar> DcSchedule<T> {
    pub fn new(switch_times: Vec<T>, initial_value: bool) -> Result<Self> {
        let finite = switch_times.iter().all(|s| s.is_finite());
        let increasing = switch_times.windows(2).all(|w| w[0] < w[1]);
        if !finite || !increasing {
            return Err(Error::UnsortedSchedule);
        }
        Ok(Self {
            switch_times,
            initial_value,
        })
    }

    pub fn always_on() -> Self {
        Self {
            switch_times: Vec::new(),
            initial_value: true,
        }
    }

    pub fn always_off() -> Self {
        Self {
            switch_times: Vec::new(),
            initial_value: false,
        }
    }

    /// DCs present on `[start, end)` only.
    pub fn pulse(start: T, end: T) -> Result<Self> {
        Self::new(vec![start, end], false)
    }

    pub fn switch_times(&self) -> &[T] {
        &self.switch_times
    }

    pub fn initial_value(&self) -> bool {
        self.initial_value
    }

    /// `a(t)`, right-continuous.
    pub fn evaluate(&self, t: T) -> bool {
        let flips = self.switch_times.partition_point(|&s| s <= t);
        self.initial_value ^ (flips % 2 == 1)
    }

    /// `a(t-)`, the limit from the left.
    pub fn evaluate_left(&self, t: T) -> bool {
        let flips = self.switch_times.partition_point(|&s| s < t);
        self.initial_value ^ (flips % 2 == 1)
    }

    /// The schedule expressed in time `t' = r t`.
    pub fn rescaled(&self, r: T) -> Self {
        Self {
            switch_times: self.switch_times.iter().map(|&s| s * r).collect(),
            initial_value: self.initial_value,
        }
    }
}

mod dc_level {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("expected 0 or 1, got {other}"))),
        }
    }
}

/// Dense samples of `x` on `[-tau, 0]` with their time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment<T> {
    pub(crate) times: Vec<T>,
    pub(crate) values: Vec<T>,
    pub(crate) derivatives: Vec<T>,
}

impl<T: Scalar> HistorySegment<T> {
    pub fn new(times: Vec<T>, values: Vec<T>, derivatives: Vec<T>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() || times.len() != derivatives.len() {
            return Err(Error::HistoryUndefined(
                "times, values and derivatives must have equal non-zero length",
            ));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::HistoryUndefined(
                "sample times must be strictly increasing",
            ));
        }
        if let Some(&v) = values.iter().find(|v| !(**v >= T::zero())) {
            return Err(Error::NegativePopulation(v.as_f64()));
        }
        Ok(Self {
            times,
            values,
            derivatives,
        })
    }

    /// Samples `value` and `derivative` at `n + 1` equispaced points of `[-tau, 0]`.
    pub fn from_fn(
        tau: T,
        n: usize,
        value: impl Fn(T) -> T,
        derivative: impl Fn(T) -> T,
    ) -> Result<Self> {
        let n = n.max(1);
        let times: Vec<T> = (0..=n)
            .map(|k| -tau + tau * T::from_usize_lossy(k) / T::from_usize_lossy(n))
            .collect();
        let values = times.iter().map(|&t| value(t)).collect();
        let derivatives = times.iter().map(|&t| derivative(t)).collect();
        Self::new(times, values, derivatives)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Initial data `x(t)` for `t` in `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HistoryFunction<T> {
    Constant(T),
    Sampled(HistorySegment<T>),
}

impl<T: Scalar> HistoryFunction<T> {
    pub fn constant(value: T) -> Result<Self> {
        if !(value >= T::zero()) || !value.is_finite() {
            return Err(Error::NegativePopulation(value.as_f64()));
        }
        Ok(HistoryFunction::Constant(value))
    }

    /// `x(0)`.
    pub fn initial_value(&self) -> T {
        match self {
            HistoryFunction::Constant(c) => *c,
            HistoryFunction::Sampled(seg) => *seg.values.last().expect("non-empty segment"),
        }
    }
}

fn one<T: Scalar>() -> T {
    T::one()
}

/// The JSON configuration document for a model: `mu`, `r`, `tau`, `schedule`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ModelConfig<T> {
    pub mu: T,
    #[serde(default = "one")]
    pub r: T,
    #[serde(default)]
    pub tau: T,
    #[serde(default)]
    pub schedule: DcSchedule<T>,
}

impl<T: Scalar> ModelConfig<T> {
    pub fn params(&self) -> Result<ModelParams<T>> {
        ModelParams::new(self.mu, self.r, self.tau)
    }

    /// Validated parameters and schedule, both moved to the `r = 1` time scale.
    pub fn normalized(&self) -> Result<(ModelParams<T>, DcSchedule<T>)> {
        let params = self.params()?;
        Ok((params.normalized(), self.schedule.rescaled(params.r())))
    }
}

impl<T: Scalar> From<(ModelParams<T>, DcSchedule<T>)> for ModelConfig<T> {
    fn from((p, schedule): (ModelParams<T>, DcSchedule<T>)) -> Self {
        Self {
            mu: p.mu,
            r: p.r,
            tau: p.tau,
            schedule,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, tau: f64) -> ModelParams<f64> {
        ModelParams::scaled(mu, tau).unwrap()
    }

    #[test]
    fn feedback_values() {
        assert_eq!(feedback(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(feedback(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(feedback(2.0, 3.0).unwrap(), 6.0 / 17.0);
        assert!(feedback(1e300, 1.0).unwrap() == 0.0);
        assert!(matches!(
            feedback(-0.1, 1.0),
            Err(Error::NegativePopulation(_))
        ));
        assert!(feedback(1.0, 0.0).is_err());
    }

    #[test]
    fn feedback_peak_by_grid_and_bisection() {
        // Grid search over [0, 3] at 1e-6 then bisection on the sign of (1 - 3x^4)/(1 + x^4)^2.
        let n = 3_000_000;
        let mut best = (0.0, 0.0);
        for k in 0..=n {
            let x = 3.0 * k as f64 / n as f64;
            let v = feedback_raw(x, 1.0);
            if v > best.1 {
                best = (x, v);
            }
        }
        let slope = |x: f64| (1.0 - 3.0 * x.powi(4)) / (1.0 + x.powi(4)).powi(2);
        let (mut lo, mut hi) = (best.0 - 1e-6, best.0 + 1e-6);
        assert!(slope(lo) > 0.0 && slope(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let argmax = 0.5 * (lo + hi);
        assert!((argmax - 0.759_835_685_651_593).abs() < 1e-12);
        assert!((argmax - feedback_peak_location::<f64>()).abs() < 1e-12);
        assert!((feedback_raw(argmax, 1.0) - 0.569_876_764_238_694).abs() < 1e-12);
        assert!((feedback_peak_value::<f64>() - 0.569_876_764_238_694).abs() < 1e-14);
    }

    #[test]
    fn rhs_cases() {
        let p = params(0.5, 0.0);
        for x in [0.0, 0.3, 1.0, 7.5] {
            assert_eq!(rhs(x, 2.0, false, &p).unwrap(), -0.5 * x);
            assert_eq!(rhs(0.0, x, true, &p).unwrap(), 0.0);
        }
        assert_eq!(rhs(1.0, 1.0, true, &p).unwrap(), 0.0);
        assert!(rhs(-1.0, 1.0, true, &p).is_err());
        assert!(rhs(1.0, -1.0, true, &p).is_err());
    }

    #[test]
    fn rescale_cases() {
        assert_eq!(rescale(1.0, 0.3, 2.5).unwrap(), (0.3, 2.5));
        assert_eq!(rescale(2.0, 1.0, 1.0).unwrap(), (0.5, 2.0));
        assert_eq!(rescale(0.5, 0.25, 4.0).unwrap(), (0.5, 2.0));
        assert!(rescale(0.0, 1.0, 1.0).is_err());
        let p = ModelParams::new(1.0, 2.0, 1.0).unwrap().normalized();
        assert_eq!((p.mu(), p.r(), p.tau()), (0.5, 1.0, 2.0));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, -1.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, -0.1).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 0.0).is_err());
        match ModelParams::new(0.5, 1.0, -1.0) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "tau"),
            other => panic!("{other:?}"),
        }
        assert!(params(0.5, 0.0).has_positive_equilibria());
        assert!(!params(0.6, 0.0).has_positive_equilibria());
        assert!(ModelParams::new(1.0, 2.0, 0.0)
            .unwrap()
            .has_positive_equilibria());
    }

    #[test]
    fn schedule_right_continuous() {
        let s = DcSchedule::new(vec![1.0, 2.0, 4.0], true).unwrap();
        assert!(s.evaluate(0.5));
        assert!(!s.evaluate(1.0));
        assert!(s.evaluate_left(1.0));
        assert!(s.evaluate(2.0));
        assert!(s.evaluate(3.99));
        assert!(!s.evaluate(4.0));
        assert!(s.evaluate_left(4.0));
        assert!(s.evaluate(4.0 + 1e-12) == s.evaluate(4.0));
        assert!(DcSchedule::<f64>::always_on().evaluate(-100.0));
        assert!(!DcSchedule::<f64>::always_off().evaluate(100.0));
        assert!(DcSchedule::new(vec![1.0, 1.0], true).is_err());
        assert!(DcSchedule::new(vec![2.0, 1.0], true).is_err());
        let p = DcSchedule::pulse(1.0, 3.0).unwrap();
        assert!(!p.evaluate(0.0) && p.evaluate(1.0) && !p.evaluate(3.0));
        assert_eq!(p.rescaled(2.0).switch_times(), &[2.0, 6.0]);
    }

    #[test]
    fn history_validation() {
        assert!(HistoryFunction::constant(-1.0).is_err());
        assert_eq!(HistoryFunction::constant(0.7).unwrap().initial_value(), 0.7);
        assert!(HistorySegment::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(HistorySegment::new(vec![-1.0, 0.0], vec![1.0, -1.0], vec![0.0, 0.0]).is_err());
        let seg = HistorySegment::from_fn(2.0, 4, |t: f64| 3.0 + t, |_| 1.0).unwrap();
        assert_eq!(seg.times(), &[-2.0, -1.5, -1.0, -0.5, 0.0]);
        assert_eq!(HistoryFunction::Sampled(seg).initial_value(), 3.0);
    }

    #[test]
    fn config_json_keys() {
        let doc = r#"{"mu":0.5,"r":2.0,"tau":1.5,"schedule":{"switch_times":[1.0,4.0],"initial_value":0}}"#;
        let cfg: ModelConfig<f64> = serde_json::from_str(doc).unwrap();
        assert_eq!(cfg.schedule.switch_times(), &[1.0, 4.0]);
        assert!(!cfg.schedule.initial_value());
        assert_eq!(serde_json::to_string(&cfg).unwrap(), doc);

        let (p, s) = cfg.normalized().unwrap();
        assert_eq!((p.mu(), p.tau()), (0.25, 3.0));
        assert_eq!(s.switch_times(), &[2.0, 8.0]);

        let minimal: ModelConfig<f64> = serde_json::from_str(r#"{"mu":0.5}"#).unwrap();
        assert_eq!((minimal.r, minimal.tau), (1.0, 0.0));
        assert_eq!(minimal.schedule, DcSchedule::always_on());

        let bad = serde_json::from_str::<ModelConfig<f64>>(
            r#"{"mu":0.5,"schedule":{"switch_times":[3.0,1.0],"initial_value":1}}"#,
        );
        assert!(bad.is_err());
        let bad_level = serde_json::from_str::<ModelConfig<f64>>(
            r#"{"mu":0.5,"schedule":{"switch_times":[],"initial_value":2}}"#,
        );
        assert!(bad_level.is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = ModelParams::<f32>::scaled(0.5, 1.0).unwrap();
        assert_eq!(rhs(1.0_f32, 1.0, true, &p).unwrap(), 0.0);
        assert!((feedback_peak_value::<f32>() - 0.569_876_76).abs() < 1e-6);
    }
}
