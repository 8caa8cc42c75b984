//! Finite-difference pricing of derivatives under bilateral counterparty
//! risk, funding costs and proportional transaction costs.
//!
//! The value `V(tau, x)` in log-price `x = ln S` and time-to-maturity `tau`
//! solves a Black-Scholes equation with a Leland modified variance and a
//! nonlinear source carrying the credit, funding and counterparty-bond cost
//! terms. It is marched with explicit Euler on a sinh-stretched grid.

pub mod analytics;
pub mod error;
pub mod export;
pub mod greeks;
pub mod grid;
pub mod instrument;
pub mod model;
pub mod solver;

pub use analytics::{
    closed_form_call, closed_form_call_delta, compare_models, cva_profile, sweep, CvaReport,
    SweepCurve, SweepParameter, SweepResult,
};
pub use error::{PricingError, Result};
pub use greeks::{
    bump_greek, delta_gamma, hedge_notionals, BumpGreek, GreekSettings, GreeksReport,
    HedgeNotionals,
};
pub use grid::{
    build_space_grid, build_time_grid, stability_bound, DriftScheme, GridSpec, SpaceGrid,
};
pub use instrument::{BoundaryMode, Instrument, InstrumentKind};
pub use model::{ConditionCheck, ConditionReport, ModelParams, ModelVariant};
pub use solver::{
    nonlinear_source, solve, step, step_coefficients, Problem, SolverOptions, StepCoefficients,
    Stepper, Substepping, Surface, Warning,
};
