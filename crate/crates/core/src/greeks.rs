//! Sensitivities of a solved surface.
//!
//! Delta and Gamma come from differencing the surface directly on the
//! non-uniform spot nodes `S_i = e^{x_i}`; Vega and Rho are central
//! bump-and-revalue differences that share one grid and one sub-step count
//! between the up and down solves.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::export::fmt_f64;
use crate::model::ModelParams;
use crate::solver::{Problem, Stepper, Substepping, Surface};

/// Per-node first and second derivatives in `S` on row `level`.
pub fn delta_gamma(surface: &Surface, level: usize) -> (Vec<f64>, Vec<f64>) {
    let s = surface.grid.spots();
    let v = surface.row(level);
    spot_derivatives(&s, v)
}

/// Three-point derivatives of `v` sampled at increasing abscissae `s`.
///
/// Interior nodes use the centred non-uniform stencils; the end nodes use a
/// one-sided second-order first derivative and repeat the neighbouring
/// second derivative.
pub fn spot_derivatives(s: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = s.len() - 1;
    assert!(n >= 2 && v.len() == s.len());
    let mut first = vec![0.0; n + 1];
    let mut second = vec![0.0; n + 1];
    for i in 1..n {
        let dl = s[i] - s[i - 1];
        let dr = s[i + 1] - s[i];
        first[i] = -dr / (dl * (dl + dr)) * v[i - 1]
            + (dr - dl) / (dl * dr) * v[i]
            + dl / (dr * (dl + dr)) * v[i + 1];
        second[i] = 2.0 * ((v[i + 1] - v[i]) / dr - (v[i] - v[i - 1]) / dl) / (dl + dr);
    }
    let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
    first[0] = -(2.0 * d1 + d2) / (d1 * (d1 + d2)) * v[0] + (d1 + d2) / (d1 * d2) * v[1]
        - d1 / (d2 * (d1 + d2)) * v[2];
    let (e1, e2) = (s[n] - s[n - 1], s[n - 1] - s[n - 2]);
    first[n] = (2.0 * e1 + e2) / (e1 * (e1 + e2)) * v[n] - (e1 + e2) / (e1 * e2) * v[n - 1]
        + e1 / (e2 * (e1 + e2)) * v[n - 2];
    second[0] = second[1];
    second[n] = second[n - 1];
    (first, second)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpGreek {
    /// Bump `sigma`, which moves the modified variance and the cost term.
    Vega,
    /// Bump `r` everywhere it appears, but not `q_S`.
    Rho,
}

/// Central difference `(V(p + eps) - V(p - eps)) / (2 eps)` on row `level`.
pub fn bump_greek(prob: &Problem, which: BumpGreek, eps: f64, level: usize) -> Result<Vec<f64>> {
    let bump = |sign: f64| {
        let mut p = prob.params;
        match which {
            BumpGreek::Vega => p.sigma += sign * eps,
            BumpGreek::Rho => p.r += sign * eps,
        }
        prob.with_params(p)
    };
    let (mut up, mut down) = (bump(1.0), bump(-1.0));
    let (s_up, s_down) = (Stepper::new(&up)?, Stepper::new(&down)?);
    let (s_up, s_down) =
        if prob.options.substepping == Substepping::Auto && s_up.substeps() != s_down.substeps() {
            let n = s_up.substeps().max(s_down.substeps());
            up.options.substepping = Substepping::Fixed(n);
            down.options.substepping = Substepping::Fixed(n);
            (Stepper::new(&up)?, Stepper::new(&down)?)
        } else {
            (s_up, s_down)
        };
    let (hi, lo) = rayon::join(|| s_up.solve(), || s_down.solve());
    let (hi, lo) = (hi?, lo?);
    Ok(hi
        .row(level)
        .iter()
        .zip(lo.row(level))
        .map(|(a, b)| (a - b) / (2.0 * eps))
        .collect())
}

/// Replicating-portfolio positions implied by the value on one row.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeNotionals {
    /// `-dV/dS` shares of the underlying.
    pub delta_shares: Vec<f64>,
    /// `-V + V+ + R_B V-`, value held in the seller's own bond.
    pub own_bond_value: Vec<f64>,
    /// `-V + R_C V+ + V-`, value held in the counterparty bond.
    pub cpty_bond_value: Vec<f64>,
}

pub fn hedge_notionals(surface: &Surface, p: &ModelParams, level: usize) -> HedgeNotionals {
    let (delta, _) = delta_gamma(surface, level);
    hedge_from_values(surface.row(level), &delta, p)
}

pub fn hedge_from_values(values: &[f64], delta: &[f64], p: &ModelParams) -> HedgeNotionals {
    let own = values
        .iter()
        .map(|&v| -v + v.max(0.0) + p.r_b * v.min(0.0))
        .collect();
    let cpty = values
        .iter()
        .map(|&v| -v + p.r_c * v.max(0.0) + v.min(0.0))
        .collect();
    HedgeNotionals {
        delta_shares: delta.iter().map(|d| -d).collect(),
        own_bond_value: own,
        cpty_bond_value: cpty,
    }
}

/// Bump sizes and the row at which Greeks are reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreekSettings {
    pub vega_bump: f64,
    pub rho_bump: f64,
    /// Time level index; `None` means `tau = T`.
    pub level: Option<usize>,
}

impl Default for GreekSettings {
    fn default() -> Self {
        Self {
            vega_bump: 1e-3,
            rho_bump: 1e-4,
            level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreeksReport {
    pub level: usize,
    pub tau: f64,
    pub spot: Vec<f64>,
    pub value: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub vega: Vec<f64>,
    pub rho: Vec<f64>,
    pub hedge: HedgeNotionals,
}

impl GreeksReport {
    pub fn compute(prob: &Problem, settings: &GreekSettings) -> Result<Self> {
        let surface = crate::solver::solve(prob)?;
        let level = settings.level.unwrap_or(surface.levels() - 1);
        if level >= surface.levels() {
            return Err(crate::error::PricingError::InvalidParams {
                field: "level",
                reason: format!(
                    "time level {level} beyond last level {}",
                    surface.levels() - 1
                ),
            });
        }
        let (delta, gamma) = delta_gamma(&surface, level);
        let (vega, rho) = rayon::join(
            || bump_greek(prob, BumpGreek::Vega, settings.vega_bump, level),
            || bump_greek(prob, BumpGreek::Rho, settings.rho_bump, level),
        );
        let hedge = hedge_from_values(surface.row(level), &delta, &prob.effective_params());
        Ok(Self {
            level,
            tau: surface.times[level],
            spot: surface.grid.spots(),
            value: surface.row(level).to_vec(),
            delta,
            gamma,
            vega: vega?,
            rho: rho?,
            hedge,
        })
    }

    /// Columns `S,delta,gamma,vega,rho`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "S,delta,gamma,vega,rho")?;
        for i in 0..self.spot.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(self.spot[i]),
                fmt_f64(self.delta[i]),
                fmt_f64(self.gamma[i]),
                fmt_f64(self.vega[i]),
                fmt_f64(self.rho[i])
            )?;
        }
        Ok(())
    }
}
