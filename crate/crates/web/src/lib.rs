//! Browser bindings: JSON in, JSON out.
//!
//! Each exported function takes a scenario such as
//! `{"model": {"sigma": 0.2}, "variant": "BKTC", "strike": 8}` (every key
//! optional) and returns curves over the spot grid for plotting.

use bktc_core::{
    sweep, ConditionReport, CvaReport, GreekSettings, GreeksReport, GridSpec, Instrument,
    ModelParams, ModelVariant, Problem, Stepper, SweepParameter,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub model: ModelParams,
    pub variant: ModelVariant,
    pub strike: f64,
    pub n_space: usize,
    pub n_time: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            variant: ModelVariant::BKTC,
            strike: 8.0,
            n_space: 200,
            n_time: 261,
        }
    }
}

impl Scenario {
    fn problem(&self) -> Problem {
        let grid = GridSpec {
            n_space: self.n_space,
            n_time: self.n_time,
            ..GridSpec::desk(self.strike)
        };
        Problem::new(
            self.model,
            self.variant,
            grid,
            Instrument::call(self.strike),
        )
    }
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    description: String,
}

#[derive(Serialize)]
struct PriceCurves {
    spot: Vec<f64>,
    price: Vec<f64>,
    risk_free: Vec<f64>,
    cva: Vec<f64>,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct GreekCurves {
    spot: Vec<f64>,
    delta: Vec<f64>,
    gamma: Vec<f64>,
    vega: Vec<f64>,
    rho: Vec<f64>,
}

#[derive(Serialize)]
struct SweepCurves {
    parameter: String,
    spot: Vec<f64>,
    values: Vec<f64>,
    /// `null` for a value whose solve failed.
    price: Vec<Option<Vec<f64>>>,
    cva: Vec<Option<Vec<f64>>>,
}

fn parse(input: &str) -> Result<Scenario, String> {
    if input.trim().is_empty() {
        return Ok(Scenario::default());
    }
    serde_json::from_str(input).map_err(|e| format!("bad scenario: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Price, risk-free price and their difference at maturity, plus the
/// parameter checks.
pub fn price_curves_json(input: &str) -> Result<String, String> {
    let prob = parse(input)?.problem();
    let p = prob.effective_params();
    let report = ConditionReport::evaluate(&p, 1.0, prob.grid_spec.x_plus.exp());
    let checks = report
        .checks()
        .into_iter()
        .map(|c| Check {
            name: c.name,
            passed: c.passed,
            description: c.description.clone(),
        })
        .collect();
    let warnings = Stepper::new(&prob)
        .map_err(|e| e.to_string())?
        .warnings()
        .iter()
        .map(ToString::to_string)
        .collect();
    let cva = CvaReport::compute(&prob).map_err(|e| e.to_string())?;
    to_json(&PriceCurves {
        spot: cva.spot,
        price: cva.price,
        risk_free: cva.risk_free,
        cva: cva.cva,
        checks,
        warnings,
    })
}

/// Delta, Gamma, Vega and Rho at maturity.
pub fn greek_curves_json(input: &str) -> Result<String, String> {
    let prob = parse(input)?.problem();
    let g = GreeksReport::compute(&prob, &GreekSettings::default()).map_err(|e| e.to_string())?;
    to_json(&GreekCurves {
        spot: g.spot,
        delta: g.delta,
        gamma: g.gamma,
        vega: g.vega,
        rho: g.rho,
    })
}

/// Price and adjustment curves for each value of one model parameter.
pub fn sweep_curves_json(input: &str, parameter: &str, values: &[f64]) -> Result<String, String> {
    let prob = parse(input)?.problem();
    let parameter: SweepParameter = parameter
        .parse()
        .map_err(|e: bktc_core::PricingError| e.to_string())?;
    let result = sweep(&prob, parameter, values).map_err(|e| e.to_string())?;
    let (price, cva) = result
        .outcomes
        .iter()
        .map(|o| match o {
            Ok(c) => (Some(c.price.clone()), Some(c.cva.clone())),
            Err(_) => (None, None),
        })
        .unzip();
    to_json(&SweepCurves {
        parameter: parameter.to_string(),
        spot: result.spot,
        values: result.values,
        price,
        cva,
    })
}

#[wasm_bindgen]
pub fn price_curves(input: &str) -> Result<String, JsValue> {
    price_curves_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn greek_curves(input: &str) -> Result<String, JsValue> {
    greek_curves_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep_curves(input: &str, parameter: &str, values: &[f64]) -> Result<String, JsValue> {
    sweep_curves_json(input, parameter, values).map_err(|e| JsValue::from_str(&e))
}
