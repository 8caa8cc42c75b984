//! Explicit Euler march for the nonlinear pricing equation
//!
//! `V_tau = 1/2 s^2 V_xx + (q_S - gamma_S - 1/2 s^2) V_x - r V - N(V)`,
//!
//! where `s^2` is the modified variance and
//! `N(V) = V+ [s_F + lambda_C (1 - R_C)] + V- (lambda_B - r C_B)(1 - R_B)
//!        + sigma sqrt(2/(pi dt)) C_C (1 - R_C) |U_x|`, `U = max(V, 0)`.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::export::fmt_f64;
use crate::grid::{
    build_space_grid, build_time_grid, stability_bound_for, DriftScheme, GridSpec, SpaceGrid,
};
use crate::instrument::{extrapolated_edges, BoundaryMode, Instrument};
use crate::model::{ModelParams, ModelVariant};

/// Sub-division of each reporting step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substepping {
    /// `ceil(dtau / stability_bound)` equal pieces.
    #[default]
    Auto,
    /// Exactly one update per reporting step, stable or not.
    Off,
    /// A fixed number of equal pieces.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub boundary_mode: BoundaryMode,
    pub drift_discretization: DriftScheme,
    pub substepping: Substepping,
    /// Domain constant of condition2; only used for the advisory warning.
    pub condition2_constant: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            boundary_mode: BoundaryMode::default(),
            drift_discretization: DriftScheme::default(),
            substepping: Substepping::default(),
            condition2_constant: 1.0,
        }
    }
}

/// Everything needed for one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub params: ModelParams,
    pub variant: ModelVariant,
    pub grid_spec: GridSpec,
    pub instrument: Instrument,
    #[serde(default)]
    pub options: SolverOptions,
}

impl Problem {
    pub fn new(
        params: ModelParams,
        variant: ModelVariant,
        grid_spec: GridSpec,
        instrument: Instrument,
    ) -> Self {
        Self {
            params,
            variant,
            grid_spec,
            instrument,
            options: SolverOptions::default(),
        }
    }

    /// Reference desk problem for a call with strike `K` under `variant`.
    pub fn desk_call(strike: f64, variant: ModelVariant) -> Self {
        Self::new(
            ModelParams::default(),
            variant,
            GridSpec::desk(strike),
            Instrument::call(strike),
        )
    }

    /// Parameters after the variant has switched off what it ignores.
    pub fn effective_params(&self) -> ModelParams {
        self.variant.apply(&self.params)
    }

    pub fn with_variant(&self, variant: ModelVariant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }

    pub fn with_params(&self, params: ModelParams) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    pub fn with_options(&self, options: SolverOptions) -> Self {
        Self {
            options,
            ..self.clone()
        }
    }
}

/// Advisory findings raised before a solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Warning {
    Condition2 {
        lhs: f64,
        c: f64,
    },
    Condition4 {
        carry: f64,
        bound: f64,
    },
    /// `lambda_B < r C_B`: the own-default rate is negative.
    NegativeOwnDefaultRate {
        lambda_b: f64,
        r_c_b: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Condition2 { lhs, c } => {
                write!(f, "condition2 not met: lhs = {lhs} >= 1 with c = {c}")
            }
            Warning::Condition4 { carry, bound } => {
                write!(
                    f,
                    "condition4 not met: q_S - gamma_S = {carry} >= M = {bound}"
                )
            }
            Warning::NegativeOwnDefaultRate { lambda_b, r_c_b } => write!(
                f,
                "lambda_B = {lambda_b} is below r*C_B = {r_c_b}; own-default rate is negative"
            ),
        }
    }
}

/// Coefficients of `V_{i-1}`, `V_i`, `V_{i+1}` in the explicit update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
}

/// Update coefficients for the interior nodes; entry `i - 1` belongs to node `i`.
pub fn step_coefficients(
    grid: &SpaceGrid,
    p: &ModelParams,
    dtau: f64,
    scheme: DriftScheme,
) -> Result<Vec<StepCoefficients>> {
    let variance = p.modified_variance()?;
    Ok(coefficients_for(
        grid,
        variance,
        p.carry(),
        p.r,
        dtau,
        scheme,
    ))
}

fn coefficients_for(
    grid: &SpaceGrid,
    variance: f64,
    carry: f64,
    r: f64,
    dtau: f64,
    scheme: DriftScheme,
) -> Vec<StepCoefficients> {
    let drift = carry - 0.5 * variance;
    let half_var = 0.5 * variance * dtau;
    grid.interior()
        .map(|i| {
            let lower = half_var * grid.h_minus(i);
            let upper = half_var * grid.h_plus(i);
            let diag = 1.0 - half_var * (grid.h_plus(i) + grid.h_minus(i)) - r * dtau;
            match scheme {
                DriftScheme::Upwind if drift < 0.0 => {
                    let adv = dtau * drift / grid.spacing(i);
                    StepCoefficients {
                        lower: lower - adv,
                        diag: diag + adv,
                        upper,
                    }
                }
                _ => {
                    let adv = dtau * drift / grid.spacing(i + 1);
                    StepCoefficients {
                        lower,
                        diag: diag - adv,
                        upper: upper + adv,
                    }
                }
            }
        })
        .collect()
}

/// Discrete `N(V)` at every node; the two boundary entries are zero.
pub fn nonlinear_source(row: &[f64], grid: &SpaceGrid, p: &ModelParams) -> Vec<f64> {
    assert_eq!(row.len(), grid.len(), "row length must match the grid");
    let mut out = vec![0.0; row.len()];
    add_source(&mut out, row, grid, &SourceRates::from(p), 1.0);
    out
}

#[derive(Debug, Clone, Copy)]
struct SourceRates {
    positive: f64,
    negative: f64,
    cost: f64,
}

impl From<&ModelParams> for SourceRates {
    fn from(p: &ModelParams) -> Self {
        Self {
            positive: p.funding_credit_rate(),
            negative: p.own_default_rate(),
            cost: p.counterparty_cost_rate(),
        }
    }
}

// out[i] += scale * N(row)_i for interior i
fn add_source(out: &mut [f64], row: &[f64], grid: &SpaceGrid, rates: &SourceRates, scale: f64) {
    for i in grid.interior() {
        let v = row[i];
        let mut n = v.max(0.0) * rates.positive + v.min(0.0) * rates.negative;
        if rates.cost != 0.0 {
            let slope = (row[i + 1].max(0.0) - v.max(0.0)) / grid.spacing(i + 1);
            n += rates.cost * slope.abs();
        }
        out[i] += scale * n;
    }
}

/// Pre-computed explicit stepper for one problem.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: SpaceGrid,
    times: Vec<f64>,
    params: ModelParams,
    instrument: Instrument,
    boundary_mode: BoundaryMode,
    coefficients: Vec<StepCoefficients>,
    rates: SourceRates,
    substeps: usize,
    sub_dtau: f64,
    warnings: Vec<Warning>,
    spots: Vec<f64>,
    extrapolate: (bool, bool),
}

impl Stepper {
    /// Validates the problem and prepares the update.
    ///
    /// condition1 on the effective parameters is a hard requirement;
    /// conditions 2 and 4 only produce warnings.
    pub fn new(prob: &Problem) -> Result<Self> {
        prob.params.validate()?;
        prob.instrument.validate()?;
        let params = prob.effective_params();
        let variance = params.modified_variance()?;
        let grid = build_space_grid(&prob.grid_spec)?;
        let times = build_time_grid(&prob.grid_spec);

        let mut warnings = Vec::new();
        let c = prob.options.condition2_constant;
        if !params.check_condition2(c) {
            warnings.push(Warning::Condition2 {
                lhs: params.condition2_lhs(c),
                c,
            });
        }
        let s_max = prob.grid_spec.x_plus.exp();
        if !params.check_condition4(s_max) {
            warnings.push(Warning::Condition4 {
                carry: params.carry(),
                bound: params.condition4_bound(s_max),
            });
        }
        if params.lambda_b < params.r * params.c_b {
            warnings.push(Warning::NegativeOwnDefaultRate {
                lambda_b: params.lambda_b,
                r_c_b: params.r * params.c_b,
            });
        }

        let dtau = prob.grid_spec.time_step();
        let scheme = prob.options.drift_discretization;
        let substeps = match prob.options.substepping {
            Substepping::Off => 1,
            Substepping::Fixed(n) => {
                if n == 0 {
                    return Err(PricingError::InvalidParams {
                        field: "substepping",
                        reason: "fixed sub-step count must be >= 1".into(),
                    });
                }
                n
            }
            Substepping::Auto => {
                let bound = stability_bound_for(&grid, variance, params.carry(), params.r, scheme);
                required_substeps(dtau, bound)
            }
        };
        let sub_dtau = dtau / substeps as f64;
        let coefficients =
            coefficients_for(&grid, variance, params.carry(), params.r, sub_dtau, scheme);
        Ok(Self {
            spots: grid.spots(),
            extrapolate: extrapolated_edges(prob.instrument.kind, prob.options.boundary_mode),
            grid,
            times,
            rates: SourceRates::from(&params),
            params,
            instrument: prob.instrument.clone(),
            boundary_mode: prob.options.boundary_mode,
            coefficients,
            substeps,
            sub_dtau,
            warnings,
        })
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn coefficients(&self) -> &[StepCoefficients] {
        &self.coefficients
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Advances `row` from `tau_m` to `tau_{m+1}`.
    pub fn step(&self, row: &[f64], m: usize) -> Result<Vec<f64>> {
        assert_eq!(row.len(), self.grid.len(), "row length must match the grid");
        let n = self.grid.intervals();
        let mut current = row.to_vec();
        let mut next = vec![0.0; row.len()];
        for k in 0..self.substeps {
            for i in self.grid.interior() {
                let c = &self.coefficients[i - 1];
                next[i] = c.lower * current[i - 1] + c.diag * current[i] + c.upper * current[i + 1];
            }
            add_source(&mut next, &current, &self.grid, &self.rates, -self.sub_dtau);
            let tau = self.times[m] + (k + 1) as f64 * self.sub_dtau;
            let tau = if k + 1 == self.substeps {
                self.times[m + 1]
            } else {
                tau
            };
            let (lo, hi) = self.instrument.boundary_values(
                &self.grid,
                tau,
                &self.params,
                self.boundary_mode,
            )?;
            next[0] = lo;
            next[n] = hi;
            if self.extrapolate.0 {
                next[0] = extrapolate(&self.spots, &next, 1, 2, 0);
            }
            if self.extrapolate.1 {
                next[n] = extrapolate(&self.spots, &next, n - 1, n - 2, n);
            }
            if let Some(node) = next.iter().position(|v| !v.is_finite()) {
                return Err(PricingError::NonFiniteValue { step: m + 1, node });
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    pub fn solve(&self) -> Result<Surface> {
        let mut values = Vec::with_capacity(self.times.len());
        values.push(self.instrument.payoff(&self.grid)?);
        for m in 0..self.times.len() - 1 {
            let next = self.step(&values[m], m)?;
            values.push(next);
        }
        Ok(Surface {
            grid: self.grid.clone(),
            times: self.times.clone(),
            values,
            substeps: self.substeps,
            warnings: self.warnings.clone(),
        })
    }
}

// Value at node `at` on the line in S through nodes `a` and `b`.
fn extrapolate(spots: &[f64], v: &[f64], a: usize, b: usize, at: usize) -> f64 {
    let slope = (v[a] - v[b]) / (spots[a] - spots[b]);
    v[a] + slope * (spots[at] - spots[a])
}

/// `ceil(dtau / bound)`, at least one.
pub fn required_substeps(dtau: f64, bound: f64) -> usize {
    if !(bound.is_finite() && bound > 0.0) || dtau <= bound {
        1
    } else {
        (dtau / bound).ceil() as usize
    }
}

/// One reporting step of `prob` starting from `row` at `tau_m`.
pub fn step(row: &[f64], m: usize, prob: &Problem) -> Result<Vec<f64>> {
    Stepper::new(prob)?.step(row, m)
}

/// Full value surface for `prob`.
pub fn solve(prob: &Problem) -> Result<Surface> {
    Stepper::new(prob)?.solve()
}

/// Solved values `V[m][i]` at `tau_m`, `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub grid: SpaceGrid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Sub-steps used per reporting step.
    pub substeps: usize,
    pub warnings: Vec<Warning>,
}

impl Surface {
    pub fn levels(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.values[m]
    }

    /// Row at `tau = T`.
    pub fn final_row(&self) -> &[f64] {
        self.values
            .last()
            .expect("surface has at least the payoff row")
    }

    /// `(node, S, V)` at the node nearest spot `s` on the final row.
    pub fn price_near(&self, s: f64) -> (usize, f64, f64) {
        let i = self.grid.nearest(s.ln());
        (i, self.grid.x(i).exp(), self.final_row()[i])
    }

    /// CSV: a row of `x_i`, a row of `S_i`, then one row per `tau_m`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "x")?;
        for x in self.grid.nodes() {
            write!(out, ",{}", fmt_f64(*x))?;
        }
        writeln!(out)?;
        write!(out, "S")?;
        for x in self.grid.nodes() {
            write!(out, ",{}", fmt_f64(x.exp()))?;
        }
        writeln!(out)?;
        for (tau, row) in self.times.iter().zip(&self.values) {
            write!(out, "{}", fmt_f64(*tau))?;
            for v in row {
                write!(out, ",{}", fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
