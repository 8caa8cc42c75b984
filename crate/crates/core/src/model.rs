//! Market, credit and cost parameters plus the derived quantities that feed
//! the pricing PDE: the Leland modified variance, the effective discount
//! rates of the positive and negative value regimes, and the three
//! parameter conditions under which a convex solution is known to exist.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// All parameters of the pricing equation.
///
/// Serialized field names follow the conventional symbols (`q_S`, `lambda_B`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Risk-free rate.
    pub r: f64,
    /// Share financing (repo) rate.
    #[serde(rename = "q_S")]
    pub q_s: f64,
    /// Dividend yield.
    #[serde(rename = "gamma_S")]
    pub gamma_s: f64,
    pub sigma: f64,
    /// Funding spread `r_F - r`.
    #[serde(rename = "s_F")]
    pub s_f: f64,
    /// Seller hazard rate.
    #[serde(rename = "lambda_B")]
    pub lambda_b: f64,
    /// Counterparty hazard rate.
    #[serde(rename = "lambda_C")]
    pub lambda_c: f64,
    #[serde(rename = "R_B")]
    pub r_b: f64,
    #[serde(rename = "R_C")]
    pub r_c: f64,
    /// Proportional cost of trading the underlying.
    #[serde(rename = "C_S")]
    pub c_s: f64,
    /// Proportional cost of trading the seller's own bond.
    #[serde(rename = "C_B")]
    pub c_b: f64,
    /// Proportional cost of trading the counterparty bond.
    #[serde(rename = "C_C")]
    pub c_c: f64,
    /// Hedge rebalancing interval in years.
    pub dt: f64,
}

impl Default for ModelParams {
    /// Reference desk scenario: daily rebalancing, 10% volatility, a seller
    /// hazard of 5% and a counterparty hazard of 1%.
    fn default() -> Self {
        Self {
            r: 0.05,
            q_s: 0.05,
            gamma_s: 0.03,
            sigma: 0.1,
            s_f: 0.0,
            lambda_b: 0.05,
            lambda_c: 0.01,
            r_b: 0.4,
            r_c: 0.4,
            c_s: 0.002,
            c_b: 0.001,
            c_c: 0.001,
            dt: 1.0 / 261.0,
        }
    }
}

fn require(ok: bool, field: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(PricingError::InvalidParams {
            field,
            reason: reason.to_owned(),
        })
    }
}

impl ModelParams {
    /// Checks the type invariants (finiteness, signs and ranges).
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("r", self.r),
            ("q_S", self.q_s),
            ("gamma_S", self.gamma_s),
            ("sigma", self.sigma),
            ("s_F", self.s_f),
            ("lambda_B", self.lambda_b),
            ("lambda_C", self.lambda_c),
            ("R_B", self.r_b),
            ("R_C", self.r_c),
            ("C_S", self.c_s),
            ("C_B", self.c_b),
            ("C_C", self.c_c),
            ("dt", self.dt),
        ];
        for (field, value) in all {
            require(value.is_finite(), field, "must be finite")?;
        }
        require(self.sigma > 0.0, "sigma", "must be > 0")?;
        require(self.dt > 0.0, "dt", "must be > 0")?;
        require((0.0..=1.0).contains(&self.r_b), "R_B", "must lie in [0, 1]")?;
        require((0.0..=1.0).contains(&self.r_c), "R_C", "must lie in [0, 1]")?;
        require(self.c_s >= 0.0, "C_S", "must be >= 0")?;
        require(self.c_b >= 0.0, "C_B", "must be >= 0")?;
        require(self.c_c >= 0.0, "C_C", "must be >= 0")?;
        require(self.lambda_b >= 0.0, "lambda_B", "must be >= 0")?;
        require(self.lambda_c >= 0.0, "lambda_C", "must be >= 0")?;
        Ok(())
    }

    /// `sqrt(2 / (pi * dt))`, the expected absolute normal increment per unit
    /// of rebalancing interval.
    pub fn cost_scale(&self) -> f64 {
        (2.0 / (PI * self.dt)).sqrt()
    }

    /// Volatility below which the modified variance stops being positive.
    pub fn condition1_threshold(&self) -> f64 {
        self.cost_scale() * self.c_s
    }

    /// Modified variance for convex solutions, `sigma^2 (1 - sqrt(2/(pi dt)) C_S / sigma)`.
    pub fn modified_variance(&self) -> Result<f64> {
        let variance = self.sigma * self.sigma * (1.0 - self.cost_scale() * self.c_s / self.sigma);
        if !self.check_condition1() || variance <= 0.0 {
            return Err(PricingError::WellPosednessViolation {
                sigma: self.sigma,
                threshold: self.condition1_threshold(),
                variance,
            });
        }
        Ok(variance)
    }

    /// `sigma > sqrt(2/(pi dt)) C_S`.
    pub fn check_condition1(&self) -> bool {
        self.sigma > self.condition1_threshold()
    }

    /// Left-hand side of the fixed-point contraction bound for a given
    /// domain constant `c`.
    pub fn condition2_lhs(&self, c: f64) -> f64 {
        c * (self.funding_credit_rate()
            + 2.0 * self.own_default_rate()
            + self.counterparty_cost_rate())
    }

    pub fn check_condition2(&self, c: f64) -> bool {
        self.condition2_lhs(c) < 1.0
    }

    /// Upper bound `M` on the risk-neutral growth rate `q_S - gamma_S`.
    pub fn condition4_bound(&self, s_max: f64) -> f64 {
        let (r1, r2) = self.effective_rates();
        (r1 + s_max * self.counterparty_cost_rate()).max(r2)
    }

    pub fn check_condition4(&self, s_max: f64) -> bool {
        self.carry() < self.condition4_bound(s_max)
    }

    /// `(r_1, r_2)`: discount rates of the linear equations obtained where the
    /// value is positive and negative respectively.
    pub fn effective_rates(&self) -> (f64, f64) {
        (
            self.r - self.funding_credit_rate(),
            self.r - self.own_default_rate(),
        )
    }

    /// `q_S - gamma_S`.
    pub fn carry(&self) -> f64 {
        self.q_s - self.gamma_s
    }

    /// `s_F + lambda_C (1 - R_C)`, applied to the positive part of the value.
    pub fn funding_credit_rate(&self) -> f64 {
        self.s_f + self.lambda_c * (1.0 - self.r_c)
    }

    /// `(lambda_B - r C_B)(1 - R_B)`, applied to the negative part of the value.
    pub fn own_default_rate(&self) -> f64 {
        (self.lambda_b - self.r * self.c_b) * (1.0 - self.r_b)
    }

    /// `sigma sqrt(2/(pi dt)) C_C (1 - R_C)`, multiplying `|dU/dx|`.
    pub fn counterparty_cost_rate(&self) -> f64 {
        self.sigma * self.cost_scale() * self.c_c * (1.0 - self.r_c)
    }
}

/// Which of the nested models to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVariant {
    /// Plain Black-Scholes with financing rate and dividends.
    RiskFree,
    /// Bilateral default risk and funding, no transaction costs.
    BK,
    /// Bilateral default risk, funding and transaction costs.
    BKTC,
}

impl ModelVariant {
    /// Parameters actually seen by the solver under this variant.
    pub fn apply(self, p: &ModelParams) -> ModelParams {
        let mut out = *p;
        match self {
            ModelVariant::RiskFree => {
                out.s_f = 0.0;
                out.lambda_b = 0.0;
                out.lambda_c = 0.0;
                out.c_s = 0.0;
                out.c_b = 0.0;
                out.c_c = 0.0;
            }
            ModelVariant::BK => {
                out.c_s = 0.0;
                out.c_b = 0.0;
                out.c_c = 0.0;
            }
            ModelVariant::BKTC => {}
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::RiskFree => "RiskFree",
            ModelVariant::BK => "BK",
            ModelVariant::BKTC => "BKTC",
        }
    }
}

/// Outcome of one validity condition with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Quantity being bounded.
    pub value: f64,
    /// Bound it is compared against.
    pub bound: f64,
    pub description: String,
}

/// The three parameter conditions evaluated together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition1: ConditionCheck,
    pub condition2: ConditionCheck,
    pub condition4: ConditionCheck,
}

impl ConditionReport {
    pub fn evaluate(p: &ModelParams, c: f64, s_max: f64) -> Self {
        let threshold = p.condition1_threshold();
        let lhs2 = p.condition2_lhs(c);
        let m = p.condition4_bound(s_max);
        Self {
            condition1: ConditionCheck {
                name: "condition1",
                passed: p.check_condition1(),
                value: p.sigma,
                bound: threshold,
                description: format!("sigma = {} > sqrt(2/(pi dt)) C_S = {}", p.sigma, threshold),
            },
            condition2: ConditionCheck {
                name: "condition2",
                passed: p.check_condition2(c),
                value: lhs2,
                bound: 1.0,
                description: format!("c * (credit + 2 own-default + cost) = {lhs2} < 1 (c = {c})"),
            },
            condition4: ConditionCheck {
                name: "condition4",
                passed: p.check_condition4(s_max),
                value: p.carry(),
                bound: m,
                description: format!(
                    "q_S - gamma_S = {} < M = {} (S_max = {s_max})",
                    p.carry(),
                    m
                ),
            },
        }
    }

    pub fn checks(&self) -> [&ConditionCheck; 3] {
        [&self.condition1, &self.condition2, &self.condition4]
    }
}
