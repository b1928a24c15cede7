//! Single-delay model of dendritic-cell-driven T-cell proliferation.
//!
//! The scaled model reads
//!
//! ```text
//! dx/dt = a(t - tau) * f(x(t - tau)) * x(t) - mu * x(t),    f(y) = r * y / (1 + y^4)
//! ```
//!
//! where `a(t)` is a 0/1 indicator for the presence of dendritic cells.
//! The crate provides
//!
//! - [`model`]: parameters, the feedback function, the DC schedule and the right-hand side,
//! - [`equilibria`]: the fixed points `0`, `x-` and `x*` with existence diagnostics,
//! - [`stability`]: linearization, rightmost characteristic roots and the delays at which
//!   `x*` can switch stability,
//! - [`integrator`]: a method-of-steps RK4 integrator with Hermite dense output.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for `f32` and `f64`);
//! the aliases at the crate root fix the scalar to `f64`, the ones in [`single`] to `f32`.
//!
//! ```
//! use tcell_delay::{find_equilibria, switching_times};
//!
//! let eq = find_equilibria(0.5_f64);
//! assert!((eq.x_star.unwrap() - 1.0).abs() < 1e-12);
//!
//! let seq = switching_times(0.5_f64, 2).unwrap();
//! assert!((seq.taus[0] - std::f64::consts::PI).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod scalar;

pub mod equilibria;
pub mod integrator;
pub mod model;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use equilibria::{existence_window, find_equilibria, Regime};
pub use integrator::{classify_longterm, simulate, summarize_longterm, LongTermClass, NodeFlags};
pub use model::{feedback, rescale, rhs};
pub use stability::{
    crossing_check, dominant_root, linearize, stability_report, switching_times, tau_zero_stable,
    Verdict,
};

pub type ModelParams = model::ModelParams<f64>;
pub type ModelConfig = model::ModelConfig<f64>;
pub type DcSchedule = model::DcSchedule<f64>;
pub type HistoryFunction = model::HistoryFunction<f64>;
pub type HistorySegment = model::HistorySegment<f64>;
pub type EquilibriumSet = equilibria::EquilibriumSet<f64>;
pub type LinearizationCoefficients = stability::LinearizationCoefficients<f64>;
pub type CharacteristicRoot = stability::CharacteristicRoot<f64>;
pub type SwitchingTimeSequence = stability::SwitchingTimeSequence<f64>;
pub type StabilityReport = stability::StabilityReport<f64>;
pub type RootSearch = stability::RootSearch<f64>;
pub type SolverConfig = integrator::SolverConfig<f64>;
pub type Trajectory = integrator::Trajectory<f64>;
pub type LongTermSummary = integrator::LongTermSummary<f64>;

/// `f32` versions of the root aliases.
pub mod single {
    pub type ModelParams = crate::model::ModelParams<f32>;
    pub type DcSchedule = crate::model::DcSchedule<f32>;
    pub type HistoryFunction = crate::model::HistoryFunction<f32>;
    pub type EquilibriumSet = crate::equilibria::EquilibriumSet<f32>;
    pub type LinearizationCoefficients = crate::stability::LinearizationCoefficients<f32>;
    pub type CharacteristicRoot = crate::stability::CharacteristicRoot<f32>;
    pub type SolverConfig = crate::integrator::SolverConfig<f32>;
    pub type Trajectory = crate::integrator::Trajectory<f32>;
}
