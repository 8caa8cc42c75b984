//! JSON scenario files.
//!
//! Every key is optional; missing keys take the desk defaults. The resolved
//! form, with every default written out, is what gets echoed next to the
//! artifacts so a run can be reproduced from its output directory alone.

use std::fs;
use std::path::{Path, PathBuf};

use bktc_core::grid::default_alpha;
use bktc_core::{
    BoundaryMode, DriftScheme, GreekSettings, GridSpec, Instrument, ModelParams, ModelVariant,
    Problem, SolverOptions, Substepping, SweepParameter,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_STRIKE: f64 = 8.0;
pub const DEFAULT_OUTPUT_DIR: &str = "bktc-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_instrument")]
    pub instrument: Instrument,
    #[serde(default = "default_variant")]
    pub variant: ModelVariant,
    #[serde(default)]
    pub boundary_mode: BoundaryMode,
    #[serde(default)]
    pub drift_discretization: DriftScheme,
    #[serde(default)]
    pub substepping: Substepping,
    #[serde(default = "default_condition2_constant")]
    pub condition2_constant: f64,
    #[serde(default)]
    pub greeks: GreekSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Grid keys; unset bounds are derived from the strike (`[K/4, 4K]`,
/// centred on `ln K`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_space: Option<usize>,
    #[serde(default, rename = "horizon_T", skip_serializing_if = "Option::is_none")]
    pub horizon_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_time: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_instrument() -> Instrument {
    Instrument::call(DEFAULT_STRIKE)
}

fn default_variant() -> ModelVariant {
    ModelVariant::BKTC
}

fn default_condition2_constant() -> f64 {
    1.0
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            grid: GridConfig::default(),
            instrument: default_instrument(),
            variant: default_variant(),
            boundary_mode: BoundaryMode::default(),
            drift_discretization: DriftScheme::default(),
            substepping: Substepping::default(),
            condition2_constant: default_condition2_constant(),
            greeks: GreekSettings::default(),
            sweep: None,
            output_dir: None,
        }
    }
}

impl GridConfig {
    pub fn resolve(&self, strike: f64) -> GridSpec {
        let desk = GridSpec::desk(strike);
        let x_minus = self.x_minus.unwrap_or(desk.x_minus);
        let x_plus = self.x_plus.unwrap_or(desk.x_plus);
        GridSpec {
            x_minus,
            x_plus,
            x_star: self.x_star.unwrap_or(desk.x_star),
            alpha: self.alpha.unwrap_or_else(|| default_alpha(x_minus, x_plus)),
            n_space: self.n_space.unwrap_or(desk.n_space),
            horizon_t: self.horizon_t.unwrap_or(desk.horizon_t),
            n_time: self.n_time.unwrap_or(desk.n_time),
        }
    }
}

impl From<GridSpec> for GridConfig {
    fn from(g: GridSpec) -> Self {
        Self {
            x_minus: Some(g.x_minus),
            x_plus: Some(g.x_plus),
            x_star: Some(g.x_star),
            alpha: Some(g.alpha),
            n_space: Some(g.n_space),
            horizon_t: Some(g.horizon_t),
            n_time: Some(g.n_time),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config {
            field: None,
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.resolve(self.instrument.strike)
    }

    pub fn problem(&self) -> Problem {
        Problem {
            params: self.model,
            variant: self.variant,
            grid_spec: self.grid_spec(),
            instrument: self.instrument.clone(),
            options: SolverOptions {
                boundary_mode: self.boundary_mode,
                drift_discretization: self.drift_discretization,
                substepping: self.substepping,
                condition2_constant: self.condition2_constant,
            },
        }
    }

    /// Copy with every default spelled out and the output directory fixed.
    pub fn resolved(&self, output_dir: &Path) -> Self {
        Self {
            grid: self.grid_spec().into(),
            output_dir: Some(output_dir.to_path_buf()),
            ..self.clone()
        }
    }

    /// Range checks owned by the core types, reported as configuration errors.
    pub fn validate(&self) -> Result<(), CliError> {
        let prob = self.problem();
        prob.params.validate()?;
        prob.grid_spec.validate()?;
        let grid = bktc_core::build_space_grid(&prob.grid_spec)?;
        prob.instrument.payoff(&grid)?;
        if !(self.condition2_constant.is_finite() && self.condition2_constant > 0.0) {
            return Err(CliError::Config {
                field: Some("condition2_constant".into()),
                reason: "must be finite and > 0".into(),
            });
        }
        let g = &self.greeks;
        for (field, bump) in [
            ("greeks.vega_bump", g.vega_bump),
            ("greeks.rho_bump", g.rho_bump),
        ] {
            if !(bump.is_finite() && bump > 0.0) {
                return Err(CliError::Config {
                    field: Some(field.into()),
                    reason: "must be finite and > 0".into(),
                });
            }
        }
        Ok(())
    }
}
