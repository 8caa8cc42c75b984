//! Closed-form reference prices, valuation adjustments, model comparison and
//! parameter sweeps.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{PricingError, Result};
use crate::export::fmt_f64;
use crate::grid::GridSpec;
use crate::instrument::Instrument;
use crate::model::{ModelParams, ModelVariant};
use crate::solver::{solve, Problem, SolverOptions};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn d1_d2(s: f64, k: f64, carry: f64, sigma: f64, tau: f64) -> (f64, f64) {
    let forward = s * (carry * tau).exp();
    let vol = sigma * tau.sqrt();
    let d1 = ((forward / k).ln() + 0.5 * vol * vol) / vol;
    (d1, d1 - vol)
}

/// Black-Scholes call with cost of carry `carry = q_S - gamma_S`:
/// `e^{-r tau} (F N(d1) - K N(d2))`, `F = S e^{carry tau}`.
pub fn closed_form_call(s: f64, k: f64, r: f64, carry: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return (s - k).max(0.0);
    }
    let n = std_normal();
    let (d1, d2) = d1_d2(s, k, carry, sigma, tau);
    (-r * tau).exp() * (s * (carry * tau).exp() * n.cdf(d1) - k * n.cdf(d2))
}

/// `dC/dS = e^{(carry - r) tau} N(d1)`.
pub fn closed_form_call_delta(s: f64, k: f64, r: f64, carry: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return if s > k { 1.0 } else { 0.0 };
    }
    let (d1, _) = d1_d2(s, k, carry, sigma, tau);
    ((carry - r) * tau).exp() * std_normal().cdf(d1)
}

/// Value of `prob` next to its risk-free counterpart on the final row.
#[derive(Debug, Clone, PartialEq)]
pub struct CvaReport {
    pub spot: Vec<f64>,
    pub price: Vec<f64>,
    pub risk_free: Vec<f64>,
    /// `price - risk_free`; negative values are a net cost to the seller.
    pub cva: Vec<f64>,
}

impl CvaReport {
    pub fn compute(prob: &Problem) -> Result<Self> {
        let rf_prob = prob.with_variant(ModelVariant::RiskFree);
        let (adjusted, plain) = rayon::join(|| solve(prob), || solve(&rf_prob));
        let (adjusted, plain) = (adjusted?, plain?);
        let price = adjusted.final_row().to_vec();
        let risk_free = plain.final_row().to_vec();
        let cva = price.iter().zip(&risk_free).map(|(a, b)| a - b).collect();
        Ok(Self {
            spot: adjusted.grid.spots(),
            price,
            risk_free,
            cva,
        })
    }

    /// Columns `S,price,risk_free,cva`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "S,price,risk_free,cva")?;
        for i in 0..self.spot.len() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(self.spot[i]),
                fmt_f64(self.price[i]),
                fmt_f64(self.risk_free[i]),
                fmt_f64(self.cva[i])
            )?;
        }
        Ok(())
    }
}

/// Total valuation adjustment `solve(prob) - solve(risk-free)` at `tau = T`.
pub fn cva_profile(prob: &Problem) -> Result<Vec<f64>> {
    if prob.variant == ModelVariant::RiskFree {
        return Ok(vec![0.0; prob.grid_spec.n_space + 1]);
    }
    Ok(CvaReport::compute(prob)?.cva)
}

/// `BK - BKTC` node-wise at `tau = T`: the price impact of transaction costs.
pub fn compare_models(
    p: &ModelParams,
    grid_spec: &GridSpec,
    instrument: &Instrument,
    options: &SolverOptions,
) -> Result<Vec<f64>> {
    let base = Problem {
        params: *p,
        variant: ModelVariant::BK,
        grid_spec: *grid_spec,
        instrument: instrument.clone(),
        options: *options,
    };
    let with_costs = base.with_variant(ModelVariant::BKTC);
    let (bk, bktc) = rayon::join(|| solve(&base), || solve(&with_costs));
    let (bk, bktc) = (bk?, bktc?);
    Ok(bk
        .final_row()
        .iter()
        .zip(bktc.final_row())
        .map(|(a, b)| a - b)
        .collect())
}

/// A scalar model parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "r")]
    Rate,
    #[serde(rename = "q_S")]
    FinancingRate,
    #[serde(rename = "gamma_S")]
    DividendYield,
    #[serde(rename = "sigma")]
    Volatility,
    #[serde(rename = "s_F")]
    FundingSpread,
    #[serde(rename = "lambda_B")]
    SellerHazard,
    #[serde(rename = "lambda_C")]
    CounterpartyHazard,
    #[serde(rename = "R_B")]
    SellerRecovery,
    #[serde(rename = "R_C")]
    CounterpartyRecovery,
    #[serde(rename = "C_S")]
    ShareCost,
    #[serde(rename = "C_B")]
    OwnBondCost,
    #[serde(rename = "C_C")]
    CounterpartyBondCost,
    #[serde(rename = "dt")]
    HedgeInterval,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 13] = [
        SweepParameter::Rate,
        SweepParameter::FinancingRate,
        SweepParameter::DividendYield,
        SweepParameter::Volatility,
        SweepParameter::FundingSpread,
        SweepParameter::SellerHazard,
        SweepParameter::CounterpartyHazard,
        SweepParameter::SellerRecovery,
        SweepParameter::CounterpartyRecovery,
        SweepParameter::ShareCost,
        SweepParameter::OwnBondCost,
        SweepParameter::CounterpartyBondCost,
        SweepParameter::HedgeInterval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Rate => "r",
            SweepParameter::FinancingRate => "q_S",
            SweepParameter::DividendYield => "gamma_S",
            SweepParameter::Volatility => "sigma",
            SweepParameter::FundingSpread => "s_F",
            SweepParameter::SellerHazard => "lambda_B",
            SweepParameter::CounterpartyHazard => "lambda_C",
            SweepParameter::SellerRecovery => "R_B",
            SweepParameter::CounterpartyRecovery => "R_C",
            SweepParameter::ShareCost => "C_S",
            SweepParameter::OwnBondCost => "C_B",
            SweepParameter::CounterpartyBondCost => "C_C",
            SweepParameter::HedgeInterval => "dt",
        }
    }

    fn slot(self, p: &mut ModelParams) -> &mut f64 {
        match self {
            SweepParameter::Rate => &mut p.r,
            SweepParameter::FinancingRate => &mut p.q_s,
            SweepParameter::DividendYield => &mut p.gamma_s,
            SweepParameter::Volatility => &mut p.sigma,
            SweepParameter::FundingSpread => &mut p.s_f,
            SweepParameter::SellerHazard => &mut p.lambda_b,
            SweepParameter::CounterpartyHazard => &mut p.lambda_c,
            SweepParameter::SellerRecovery => &mut p.r_b,
            SweepParameter::CounterpartyRecovery => &mut p.r_c,
            SweepParameter::ShareCost => &mut p.c_s,
            SweepParameter::OwnBondCost => &mut p.c_b,
            SweepParameter::CounterpartyBondCost => &mut p.c_c,
            SweepParameter::HedgeInterval => &mut p.dt,
        }
    }

    pub fn get(self, p: &ModelParams) -> f64 {
        let mut copy = *p;
        *self.slot(&mut copy)
    }

    pub fn set(self, p: &ModelParams, value: f64) -> ModelParams {
        let mut out = *p;
        *self.slot(&mut out) = value;
        out
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PricingError::InvalidSweep(format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub price: Vec<f64>,
    pub cva: Vec<f64>,
}

/// One solve per swept value, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub variant: ModelVariant,
    pub grid_spec: GridSpec,
    pub spot: Vec<f64>,
    pub values: Vec<f64>,
    /// Same order as `values`; a failed value keeps its error.
    pub outcomes: Vec<std::result::Result<SweepCurve, PricingError>>,
}

impl SweepResult {
    pub fn curve(&self, idx: usize) -> Option<&SweepCurve> {
        self.outcomes.get(idx).and_then(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &PricingError)> {
        self.values
            .iter()
            .zip(&self.outcomes)
            .filter_map(|(v, o)| o.as_ref().err().map(|e| (*v, e)))
    }

    /// Long format: `parameter,value,S,price,cva`. Failed values emit no rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "parameter,value,S,price,cva")?;
        for (value, outcome) in self.values.iter().zip(&self.outcomes) {
            let Ok(curve) = outcome else { continue };
            for (i, s) in self.spot.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.parameter,
                    fmt_f64(*value),
                    fmt_f64(*s),
                    fmt_f64(curve.price[i]),
                    fmt_f64(curve.cva[i])
                )?;
            }
        }
        Ok(())
    }
}

/// Re-solves `base` for each value of `parameter`.
///
/// Values must be strictly increasing. Errors for individual values are
/// recorded and the sweep continues. Members run on the rayon pool; results
/// come back in input order.
pub fn sweep(base: &Problem, parameter: SweepParameter, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(PricingError::InvalidSweep("no values given".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PricingError::InvalidSweep("values must be finite".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PricingError::InvalidSweep(
            "values must be strictly increasing".into(),
        ));
    }
    let grid = crate::grid::build_space_grid(&base.grid_spec)?;
    let outcomes = values
        .par_iter()
        .map(|&value| {
            let prob = base.with_params(parameter.set(&base.params, value));
            CvaReport::compute(&prob).map(|report| SweepCurve {
                price: report.price,
                cva: report.cva,
            })
        })
        .collect();
    Ok(SweepResult {
        parameter,
        variant: base.variant,
        grid_spec: base.grid_spec,
        spot: grid.spots(),
        values: values.to_vec(),
        outcomes,
    })
}
