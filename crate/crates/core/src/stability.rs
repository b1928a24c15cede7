//! Linear stability of the equilibria.
//!
//! A perturbation `z = x - x_E` obeys `dz/dt = alpha z(t - tau) + beta z(t)` with
//! `alpha = x_E f'(x_E)` and `beta = f(x_E) - mu`, giving the characteristic equation
//! `lambda = alpha exp(-lambda tau) + beta`. At the positive equilibria `f(x_E) = mu`, so
//! `beta = 0` and `alpha = (mu^2 / x_E)(1 - 3 x_E^4)`.

use num_complex::Complex;
use serde::Serialize;

use crate::equilibria::{equilibrium_residual, find_equilibria, EquilibriumSet, Regime};
use crate::model::feedback_peak_location;
use crate::{Error, Result, Scalar};

/// Residual above which `linearize` refuses a point as an equilibrium.
pub const EQUILIBRIUM_CHECK: f64 = 1e-8;
/// Half-width of the band around `Re lambda = 0` reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizationCoefficients<T> {
    pub alpha: T,
    pub beta: T,
    pub equilibrium: T,
}

impl<T: Scalar> LinearizationCoefficients<T> {
    pub fn new(alpha: T, beta: T) -> Self {
        Self {
            alpha,
            beta,
            equilibrium: T::nan(),
        }
    }

    /// `lambda - alpha exp(-lambda tau) - beta`.
    pub fn characteristic(&self, lambda: Complex<T>, tau: T) -> Complex<T> {
        lambda - (-lambda * tau).exp() * self.alpha - self.beta
    }
}

pub fn linearize<T: Scalar>(x_e: T, mu: T) -> Result<LinearizationCoefficients<T>> {
    if !(mu > T::zero()) {
        return Err(Error::invalid("mu", mu.as_f64(), "must be positive"));
    }
    if x_e == T::zero() {
        return Ok(LinearizationCoefficients {
            alpha: T::zero(),
            beta: -mu,
            equilibrium: x_e,
        });
    }
    let residual = equilibrium_residual(x_e, mu).abs();
    if !(x_e > T::zero()) || !(residual <= T::tol(EQUILIBRIUM_CHECK, 100.0)) {
        return Err(Error::NotAnEquilibrium {
            x: x_e.as_f64(),
            mu: mu.as_f64(),
            residual: residual.as_f64(),
        });
    }
    Ok(LinearizationCoefficients {
        alpha: mu * mu / x_e * (T::one() - T::lit(3.0) * x_e.powi(4)),
        beta: T::zero(),
        equilibrium: x_e,
    })
}

/// Stability of `x*` for the undelayed system: `x* > 3^(-1/4)`.
pub fn tau_zero_stable<T: Scalar>(x_star: T) -> bool {
    x_star > feedback_peak_location()
}

/// Candidate delays `tau_n = (2n + 1) pi / (2 |alpha|)`, `n = 0..=n_max`, from the real part
/// of the characteristic equation at `x*` with `lambda = i omega`.
///
/// Only the even-`n` members carry a root on the imaginary axis: with `alpha < 0` the
/// imaginary part also requires `sin(omega tau) = 1`, so the crossings proper are the
/// delays returned by [`SwitchingTimeSequence::crossings`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchingTimeSequence<T> {
    pub mu: T,
    pub x_star: T,
    pub taus: Vec<T>,
    pub omega: T,
}

impl<T: Scalar> SwitchingTimeSequence<T> {
    /// Whether `taus[n]` has `+-i omega` as a characteristic root.
    pub fn is_crossing(n: usize) -> bool {
        n.is_multiple_of(2)
    }

    /// The members of `taus` at which a pair of roots sits on the imaginary axis.
    pub fn crossings(&self) -> Vec<T> {
        self.taus.iter().step_by(2).copied().collect()
    }

    /// Number of switching delays strictly below `tau`.
    pub fn count_below(&self, tau: T) -> usize {
        let gap = T::PI() / self.omega;
        let first = self.taus.first().copied().unwrap_or(gap / T::lit(2.0));
        if tau <= first {
            0
        } else {
            ((tau - first) / gap)
                .ceil()
                .to_usize()
                .unwrap_or(usize::MAX)
        }
    }
}

pub fn switching_times<T: Scalar>(mu: T, n_max: usize) -> Result<SwitchingTimeSequence<T>> {
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(Error::invalid(
            "mu",
            mu.as_f64(),
            "must be positive and finite",
        ));
    }
    let eq = find_equilibria(mu);
    let x_star = match (eq.regime, eq.x_star) {
        (Regime::ThreeEquilibria, Some(x)) => x,
        (Regime::TangentDoubleRoot, _) => {
            return Err(Error::DegenerateEquilibrium { mu: mu.as_f64() })
        }
        _ => return Err(Error::NoPositiveEquilibrium { mu: mu.as_f64() }),
    };
    // x* (1 - 3 x*^4) < 0 on the whole existence window, so |alpha| = -alpha.
    let denom = T::lit(2.0) * mu * mu * (T::one() - T::lit(3.0) * x_star.powi(4)).abs();
    let taus = (0..=n_max)
        .map(|n| T::from_usize_lossy(2 * n + 1) * T::PI() * x_star / denom)
        .collect();
    let omega = linearize(x_star, mu)?.alpha.abs();
    Ok(SwitchingTimeSequence {
        mu,
        x_star,
        taus,
        omega,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicRoot<T> {
    pub real_part: T,
    /// Non-negative; the conjugate is implied.
    pub imag_part: T,
    pub residual: T,
}

impl<T: Scalar> CharacteristicRoot<T> {
    pub fn value(&self) -> Complex<T> {
        Complex::new(self.real_part, self.imag_part)
    }
}

/// Seed grid and tolerances for the Newton search over the characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearch<T> {
    pub re_min: T,
    pub re_max: T,
    /// Imaginary seeds span `[0, (2 n_guess + 1) pi / max(tau, 1)]`.
    pub n_guess: usize,
    pub re_seeds: usize,
    pub im_seeds: usize,
    pub max_iter: usize,
    pub accept_residual: T,
    pub merge_distance: T,
}

impl<T: Scalar> Default for RootSearch<T> {
    fn default() -> Self {
        Self {
            re_min: T::lit(-5.0),
            re_max: T::lit(2.0),
            n_guess: 3,
            re_seeds: 8,
            im_seeds: 12,
            max_iter: 100,
            accept_residual: T::tol(1e-10, 1000.0),
            merge_distance: T::tol(1e-6, 1e4),
        }
    }
}

/// Roots of `lambda = alpha exp(-lambda tau) + beta` reached from the seed grid, rightmost
/// first (ties broken by smaller imaginary part). Only `Im >= 0` representatives are kept.
pub fn characteristic_roots<T: Scalar>(
    coeffs: &LinearizationCoefficients<T>,
    tau: T,
    search: &RootSearch<T>,
) -> Result<Vec<CharacteristicRoot<T>>> {
    if !(tau >= T::zero()) {
        return Err(Error::invalid("tau", tau.as_f64(), "must be non-negative"));
    }
    // Without a delayed term (or without a delay) the equation is linear with a single root.
    if coeffs.alpha == T::zero() || tau == T::zero() {
        let lambda = Complex::new(coeffs.alpha + coeffs.beta, T::zero());
        return Ok(vec![CharacteristicRoot {
            real_part: lambda.re,
            imag_part: T::zero(),
            residual: coeffs.characteristic(lambda, tau).norm(),
        }]);
    }

    let im_max = T::from_usize_lossy(2 * search.n_guess + 1) * T::PI() / tau.max(T::one());
    let mut seeds = vec![Complex::new(coeffs.alpha + coeffs.beta, T::zero())];
    for i in 0..search.re_seeds {
        let re = lerp(search.re_min, search.re_max, i, search.re_seeds);
        for j in 0..search.im_seeds {
            seeds.push(Complex::new(
                re,
                lerp(T::zero(), im_max, j, search.im_seeds),
            ));
        }
    }

    let mut found: Vec<CharacteristicRoot<T>> = Vec::new();
    let mut best_residual = T::infinity();
    for seed in seeds {
        let Some(lambda) = newton(coeffs, tau, seed, search.max_iter) else {
            continue;
        };
        let lambda = snap_to_real(coeffs, tau, lambda, search.max_iter);
        let residual = coeffs.characteristic(lambda, tau).norm();
        best_residual = best_residual.min(residual);
        if !(residual < search.accept_residual) {
            continue;
        }
        let root = CharacteristicRoot {
            real_part: lambda.re,
            imag_part: lambda.im.abs(),
            residual,
        };
        match found
            .iter_mut()
            .find(|r| (r.value() - root.value()).norm() < search.merge_distance)
        {
            Some(existing) if existing.residual > root.residual => *existing = root,
            Some(_) => {}
            None => found.push(root),
        }
    }

    if found.is_empty() {
        return Err(Error::RootNotFound {
            best_residual: best_residual.as_f64(),
        });
    }
    found.sort_by(|a, b| {
        b.real_part
            .partial_cmp(&a.real_part)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.imag_part
                    .partial_cmp(&b.imag_part)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    Ok(found)
}

fn lerp<T: Scalar>(lo: T, hi: T, i: usize, n: usize) -> T {
    if n <= 1 {
        return lo;
    }
    lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
}

fn newton<T: Scalar>(
    coeffs: &LinearizationCoefficients<T>,
    tau: T,
    mut lambda: Complex<T>,
    max_iter: usize,
) -> Option<Complex<T>> {
    let tiny = T::epsilon() * T::lit(4.0);
    for _ in 0..max_iter {
        let e = (-lambda * tau).exp();
        let g = lambda - e * coeffs.alpha - coeffs.beta;
        let dg = Complex::new(T::one(), T::zero()) + e * (coeffs.alpha * tau);
        let step = g / dg;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        lambda = lambda - step;
        if step.norm() <= tiny * lambda.norm().max(T::one()) {
            break;
        }
    }
    (lambda.re.is_finite() && lambda.im.is_finite()).then_some(lambda)
}

/// Newton from a complex seed can land on a real root with a vanishing imaginary part; such
/// points are polished on the real axis and kept there if that is at least as accurate.
fn snap_to_real<T: Scalar>(
    coeffs: &LinearizationCoefficients<T>,
    tau: T,
    lambda: Complex<T>,
    max_iter: usize,
) -> Complex<T> {
    if lambda.im == T::zero() || lambda.im.abs() > T::epsilon().sqrt() * lambda.norm().max(T::one())
    {
        return lambda;
    }
    match newton(coeffs, tau, Complex::new(lambda.re, T::zero()), max_iter) {
        Some(real)
            if coeffs.characteristic(real, tau).norm()
                <= coeffs.characteristic(lambda, tau).norm() =>
        {
            real
        }
        _ => lambda,
    }
}

/// The characteristic root with the largest real part.
pub fn dominant_root<T: Scalar>(
    coeffs: &LinearizationCoefficients<T>,
    tau: T,
) -> Result<CharacteristicRoot<T>> {
    dominant_root_with(coeffs, tau, &RootSearch::default())
}

pub fn dominant_root_with<T: Scalar>(
    coeffs: &LinearizationCoefficients<T>,
    tau: T,
    search: &RootSearch<T>,
) -> Result<CharacteristicRoot<T>> {
    Ok(characteristic_roots(coeffs, tau, search)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Marginal,
    Unstable,
}

impl Verdict {
    pub fn from_real_part<T: Scalar>(re: T) -> Self {
        let band = T::tol(MARGINAL_BAND, 1e4);
        if re.abs() < band {
            Verdict::Marginal
        } else if re < T::zero() {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Marginal => "marginal",
            Verdict::Unstable => "unstable",
        }
    }
}

/// Local stability of `x*` at delay `tau`.
pub fn crossing_check<T: Scalar>(mu: T, tau: T) -> Result<Verdict> {
    Ok(Verdict::from_real_part(
        upper_dominant_root(mu, tau)?.real_part,
    ))
}

/// Dominant characteristic root at `x*`.
pub fn upper_dominant_root<T: Scalar>(mu: T, tau: T) -> Result<CharacteristicRoot<T>> {
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(Error::invalid(
            "mu",
            mu.as_f64(),
            "must be positive and finite",
        ));
    }
    let x_star = find_equilibria(mu)
        .x_star
        .ok_or(Error::NoPositiveEquilibrium { mu: mu.as_f64() })?;
    dominant_root(&linearize(x_star, mu)?, tau)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumStability<T> {
    pub label: &'static str,
    pub x: T,
    pub alpha: T,
    pub beta: T,
    pub dominant_root: CharacteristicRoot<T>,
    pub verdict: Verdict,
}

/// Linearization, dominant root and verdict for every equilibrium at one `(mu, tau)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport<T> {
    pub mu: T,
    pub tau: T,
    pub equilibria: EquilibriumSet<T>,
    pub points: Vec<EquilibriumStability<T>>,
    /// `None` when `x*` does not exist.
    pub tau_zero_stable: Option<bool>,
    /// `None` unless `mu` lies strictly inside the existence window.
    pub switching: Option<SwitchingTimeSequence<T>>,
}

pub fn stability_report<T: Scalar>(mu: T, tau: T, n_max: usize) -> Result<StabilityReport<T>> {
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(Error::invalid(
            "mu",
            mu.as_f64(),
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
    let equilibria = find_equilibria(mu);
    let mut labelled = vec![("zero", T::zero())];
    match equilibria.regime {
        Regime::ThreeEquilibria => {
            labelled.extend(equilibria.x_minus.map(|x| ("x_minus", x)));
            labelled.extend(equilibria.x_star.map(|x| ("x_star", x)));
        }
        Regime::TangentDoubleRoot => labelled.extend(equilibria.x_star.map(|x| ("x_double", x))),
        Regime::ZeroOnly => {}
    }
    let points = labelled
        .into_iter()
        .map(|(label, x)| {
            let coeffs = linearize(x, mu)?;
            let root = dominant_root(&coeffs, tau)?;
            Ok(EquilibriumStability {
                label,
                x,
                alpha: coeffs.alpha,
                beta: coeffs.beta,
                dominant_root: root,
                verdict: Verdict::from_real_part(root.real_part),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        mu,
        tau,
        equilibria,
        points,
        tau_zero_stable: equilibria.x_star.map(tau_zero_stable),
        switching: switching_times(mu, n_max).ok(),
    })
}
