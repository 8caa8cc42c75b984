//! Payoffs (initial data in time-to-maturity) and Dirichlet boundary data.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::grid::SpaceGrid;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstrumentKind {
    EuropeanCall,
    EuropeanPut,
    /// Arbitrary per-node payoff supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instrument {
    pub kind: InstrumentKind,
    pub strike: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_payoff: Option<Vec<f64>>,
}

impl Instrument {
    pub fn call(strike: f64) -> Self {
        Self {
            kind: InstrumentKind::EuropeanCall,
            strike,
            custom_payoff: None,
        }
    }

    pub fn put(strike: f64) -> Self {
        Self {
            kind: InstrumentKind::EuropeanPut,
            strike,
            custom_payoff: None,
        }
    }

    pub fn custom(strike: f64, values: Vec<f64>) -> Self {
        Self {
            kind: InstrumentKind::Custom,
            strike,
            custom_payoff: Some(values),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(PricingError::InvalidParams {
                field: "strike",
                reason: "must be finite and > 0".into(),
            });
        }
        if self.kind == InstrumentKind::Custom {
            match &self.custom_payoff {
                None => return Err(PricingError::MissingPayoff),
                Some(v) if v.is_empty() => return Err(PricingError::MissingPayoff),
                Some(v) if v.iter().any(|x| !x.is_finite()) => {
                    return Err(PricingError::InvalidParams {
                        field: "custom_payoff",
                        reason: "values must be finite".into(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Payoff at every grid node.
    pub fn payoff(&self, grid: &SpaceGrid) -> Result<Vec<f64>> {
        self.validate()?;
        let k = self.strike;
        match self.kind {
            InstrumentKind::EuropeanCall => Ok(grid
                .nodes()
                .iter()
                .map(|x| (x.exp() - k).max(0.0))
                .collect()),
            InstrumentKind::EuropeanPut => Ok(grid
                .nodes()
                .iter()
                .map(|x| (k - x.exp()).max(0.0))
                .collect()),
            InstrumentKind::Custom => {
                let values = self
                    .custom_payoff
                    .as_ref()
                    .ok_or(PricingError::MissingPayoff)?;
                if values.len() != grid.len() {
                    return Err(PricingError::PayoffLength {
                        expected: grid.len(),
                        got: values.len(),
                    });
                }
                Ok(values.clone())
            }
        }
    }

    /// Values imposed at `(x_0, x_N)` at time-to-maturity `tau`.
    ///
    /// `p` must be the effective (variant-filtered) parameter set.
    pub fn boundary_values(
        &self,
        grid: &SpaceGrid,
        tau: f64,
        p: &ModelParams,
        mode: BoundaryMode,
    ) -> Result<(f64, f64)> {
        self.validate()?;
        let k = self.strike;
        let s_lo = grid.x(0).exp();
        let s_hi = grid.x(grid.intervals()).exp();
        let df = (-p.r * tau).exp();
        let out = match (self.kind, mode) {
            (InstrumentKind::EuropeanCall, BoundaryMode::PaperLiteral) => (0.0, s_hi),
            (InstrumentKind::EuropeanCall, BoundaryMode::DiscountedStrike) => (0.0, s_hi - k * df),
            (InstrumentKind::EuropeanCall, BoundaryMode::Asymptotic | BoundaryMode::Linearity) => {
                let (spot_factor, strike_factor) = linear_call_factors(p, tau);
                (0.0, s_hi * spot_factor - k * strike_factor)
            }
            (InstrumentKind::EuropeanPut, BoundaryMode::PaperLiteral) => (k, 0.0),
            (InstrumentKind::EuropeanPut, BoundaryMode::DiscountedStrike) => (k * df - s_lo, 0.0),
            (InstrumentKind::EuropeanPut, BoundaryMode::Asymptotic | BoundaryMode::Linearity) => {
                let (spot_factor, strike_factor) = linear_put_factors(p, tau);
                (k * strike_factor - s_lo * spot_factor, 0.0)
            }
            (InstrumentKind::Custom, mode) => {
                let values = self
                    .custom_payoff
                    .as_ref()
                    .ok_or(PricingError::MissingPayoff)?;
                if values.len() != grid.len() {
                    return Err(PricingError::PayoffLength {
                        expected: grid.len(),
                        got: values.len(),
                    });
                }
                let (lo, hi) = (values[0], values[values.len() - 1]);
                match mode {
                    BoundaryMode::PaperLiteral => (lo, hi),
                    _ => (lo * df, hi * df),
                }
            }
        };
        Ok(out)
    }
}

/// Which edges `(lower, upper)` are extrapolated instead of imposed.
pub fn extrapolated_edges(kind: InstrumentKind, mode: BoundaryMode) -> (bool, bool) {
    if mode.is_dirichlet() {
        return (false, false);
    }
    match kind {
        InstrumentKind::EuropeanCall => (false, true),
        InstrumentKind::EuropeanPut => (true, false),
        InstrumentKind::Custom => (true, true),
    }
}

/// Treatment of the truncated-domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Call: `0` below, `e^x` above.
    PaperLiteral,
    /// Call: `0` below, `e^x - K e^{-r tau}` above.
    DiscountedStrike,
    /// Exact solution of the pricing equation among values linear in `S`
    /// (`A(tau) S - B(tau)`), with the variant's credit, funding and cost
    /// rates. Reduces to the Black-Scholes asymptote when those are zero.
    Asymptotic,
    /// Far edge (upper for a call, lower for a put, both for a custom
    /// payoff) extrapolated linearly in `S` from the two neighbouring
    /// interior values, i.e. zero Gamma. The other edge uses the
    /// `Asymptotic` value, which is also what `boundary_values` reports.
    #[default]
    Linearity,
}

impl BoundaryMode {
    pub fn is_dirichlet(self) -> bool {
        self != BoundaryMode::Linearity
    }
}

// V = A S - B with V > 0 and dV/dx > 0:
//   A' = (carry - r - kappa - cost) A,  B' = -(r + kappa) B.
fn linear_call_factors(p: &ModelParams, tau: f64) -> (f64, f64) {
    let kappa = p.funding_credit_rate();
    let cost = p.counterparty_cost_rate();
    (
        ((p.carry() - p.r - kappa - cost) * tau).exp(),
        (-(p.r + kappa) * tau).exp(),
    )
}

// V = B - A S with V > 0 and dV/dx < 0:
//   A' = (carry - r - kappa + cost) A,  B' = -(r + kappa) B.
fn linear_put_factors(p: &ModelParams, tau: f64) -> (f64, f64) {
    let kappa = p.funding_credit_rate();
    let cost = p.counterparty_cost_rate();
    (
        ((p.carry() - p.r - kappa + cost) * tau).exp(),
        (-(p.r + kappa) * tau).exp(),
    )
}
