//! Fixed points of the scaled system with DCs present.
//!
//! Positive equilibria solve `x / (1 + x^4) = mu`, i.e. `g(x) = x - mu x^4 - mu = 0`. The
//! function `x - mu x^4` peaks at `x_max = (4 mu)^(-1/3)`, so the roots are bracketed by
//! `(0, x_max)` and `(x_max, mu^(-1/3))`; `g(0) = g(mu^(-1/3)) = -mu < 0` and the roots exist
//! exactly when `g(x_max) > 0`, i.e. `mu < 3^(3/4) / 4`.

use serde::Serialize;

use crate::model::feedback_peak_value;
use crate::Scalar;

/// Distance from `3^(3/4)/4` below which the two positive roots are reported as one double root.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ThreeEquilibria,
    TangentDoubleRoot,
    ZeroOnly,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ThreeEquilibria => "three_equilibria",
            Regime::TangentDoubleRoot => "tangent_double_root",
            Regime::ZeroOnly => "zero_only",
        }
    }
}

/// The zero equilibrium (always present) plus the positive roots, when they exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumSet<T> {
    pub mu: T,
    pub x_minus: Option<T>,
    pub x_star: Option<T>,
    pub x_max_location: T,
    pub regime: Regime,
}

impl<T: Scalar> EquilibriumSet<T> {
    /// All non-negative equilibria in increasing order, the double root listed once.
    pub fn roots(&self) -> Vec<T> {
        let mut out = vec![T::zero()];
        match self.regime {
            Regime::ThreeEquilibria => out.extend(self.x_minus.into_iter().chain(self.x_star)),
            Regime::TangentDoubleRoot => out.extend(self.x_star),
            Regime::ZeroOnly => {}
        }
        out
    }
}

/// `(0, 3^(3/4)/4)`: the open interval of `mu` for which `x-` and `x*` exist.
pub fn existence_window<T: Scalar>() -> (T, T) {
    (T::zero(), feedback_peak_value())
}

/// `x / (1 + x^4) - mu`.
pub fn equilibrium_residual<T: Scalar>(x: T, mu: T) -> T {
    x / (T::one() + x.powi(4)) - mu
}

pub fn find_equilibria<T: Scalar>(mu: T) -> EquilibriumSet<T> {
    assert!(
        mu > T::zero() && mu.is_finite(),
        "mu must be positive and finite"
    );

    let four = T::lit(4.0);
    let x_max = (four * mu).powf(T::lit(-1.0 / 3.0));
    let upper = mu.powf(T::lit(-1.0 / 3.0));
    let boundary = existence_window::<T>().1;
    let band = T::tol(BOUNDARY_TOLERANCE, 8.0);

    let empty = EquilibriumSet {
        mu,
        x_minus: None,
        x_star: None,
        x_max_location: x_max,
        regime: Regime::ZeroOnly,
    };

    if (mu - boundary).abs() < band {
        return EquilibriumSet {
            x_minus: Some(x_max),
            x_star: Some(x_max),
            regime: Regime::TangentDoubleRoot,
            ..empty
        };
    }
    let g = |x: T| x - mu * x.powi(4) - mu;
    if mu > boundary || g(x_max) <= T::zero() {
        return empty;
    }

    let x_minus = bisect(g, T::zero(), x_max);
    let x_star = bisect(g, upper, x_max);
    EquilibriumSet {
        x_minus: Some(x_minus),
        x_star: Some(x_star),
        regime: Regime::ThreeEquilibria,
        ..empty
    }
}

/// Bisection to full machine precision. `neg` and `pos` are points where `g` is negative and
/// positive respectively (in either order on the line).
fn bisect<T: Scalar>(g: impl Fn(T) -> T, mut neg: T, mut pos: T) -> T {
    for _ in 0..400 {
        let mid = (neg + pos) / T::lit(2.0);
        if mid == neg || mid == pos {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if gm < T::zero() {
            neg = mid;
        } else {
            pos = mid;
        }
    }
    if g(neg).abs() <= g(pos).abs() {
        neg
    } else {
        pos
    }
}
