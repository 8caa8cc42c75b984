//! Spatial and temporal meshes.
//!
//! The spatial mesh lives in log-price `x = ln S` and uses the hyperbolic-sine
//! stretching `x_i = x* + alpha sinh(c2 i/N + c1 (1 - i/N))`, which maps a
//! uniform index onto `[x-, x+]` with nodes clustered around `x*`.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::model::ModelParams;

/// Shape of the space-time mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Lower log-price bound.
    pub x_minus: f64,
    /// Upper log-price bound.
    pub x_plus: f64,
    /// Log-price around which nodes concentrate.
    pub x_star: f64,
    /// Stretch parameter; smaller values concentrate more strongly.
    pub alpha: f64,
    /// Number of spatial intervals `N`.
    pub n_space: usize,
    /// Maturity in years.
    #[serde(rename = "horizon_T")]
    pub horizon_t: f64,
    /// Number of reporting time steps.
    pub n_time: usize,
}

impl GridSpec {
    /// Mesh over `[s_min, s_max]` centred on `ln(strike)` with the default
    /// stretch `alpha = (x+ - x-) / 10`.
    pub fn around_strike(
        strike: f64,
        s_min: f64,
        s_max: f64,
        n_space: usize,
        horizon_t: f64,
        n_time: usize,
    ) -> Self {
        let x_minus = s_min.ln();
        let x_plus = s_max.ln();
        Self {
            x_minus,
            x_plus,
            x_star: strike.ln(),
            alpha: default_alpha(x_minus, x_plus),
            n_space,
            horizon_t,
            n_time,
        }
    }

    /// Desk-scale mesh: `[K/4, 4K]`, 200 intervals, one year in daily steps.
    pub fn desk(strike: f64) -> Self {
        Self::around_strike(strike, strike / 4.0, strike * 4.0, 200, 1.0, 261)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(PricingError::InvalidSpec {
                field,
                reason: reason.to_owned(),
            })
        };
        if ![
            self.x_minus,
            self.x_plus,
            self.x_star,
            self.alpha,
            self.horizon_t,
        ]
        .iter()
        .all(|v| v.is_finite())
        {
            return bad("grid", "all bounds must be finite");
        }
        if self.x_star <= self.x_minus {
            return bad("x_star", "must lie strictly above x_minus");
        }
        if self.x_star >= self.x_plus {
            return bad("x_star", "must lie strictly below x_plus");
        }
        if self.alpha <= 0.0 {
            return bad("alpha", "must be > 0");
        }
        if self.n_space < 2 {
            return bad("n_space", "need at least 2 intervals");
        }
        if self.horizon_t <= 0.0 {
            return bad("horizon_T", "must be > 0");
        }
        Ok(())
    }

    /// Reporting time step `T / T_x` (zero when there are no steps).
    pub fn time_step(&self) -> f64 {
        if self.n_time == 0 {
            0.0
        } else {
            self.horizon_t / self.n_time as f64
        }
    }
}

pub fn default_alpha(x_minus: f64, x_plus: f64) -> f64 {
    (x_plus - x_minus) / 10.0
}

/// Nodes `x_0..x_N` with the spacing coefficients of the three-point
/// second-difference operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    nodes: Vec<f64>,
    // h[i] = x_i - x_{i-1}; h[0] is unused and set to NaN.
    h: Vec<f64>,
    // Indexed by node; boundary entries are NaN.
    h_plus: Vec<f64>,
    h_minus: Vec<f64>,
}

impl SpaceGrid {
    /// Builds a grid from explicit nodes. Nodes must be finite and strictly
    /// increasing, with at least three of them.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(PricingError::InvalidSpec {
                field: "nodes",
                reason: "need at least 3 nodes".into(),
            });
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PricingError::InvalidSpec {
                field: "nodes",
                reason: "nodes must be finite and strictly increasing".into(),
            });
        }
        let n = nodes.len() - 1;
        let mut h = vec![f64::NAN; n + 1];
        for i in 1..=n {
            h[i] = nodes[i] - nodes[i - 1];
        }
        let mut h_plus = vec![f64::NAN; n + 1];
        let mut h_minus = vec![f64::NAN; n + 1];
        for i in 1..n {
            let sum = h[i + 1] + h[i];
            h_plus[i] = 2.0 / (h[i + 1] * sum);
            h_minus[i] = 2.0 / (h[i] * sum);
        }
        Ok(Self {
            nodes,
            h,
            h_plus,
            h_minus,
        })
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Spot prices `e^{x_i}`.
    pub fn spots(&self) -> Vec<f64> {
        self.nodes.iter().map(|x| x.exp()).collect()
    }

    /// `h_i = x_i - x_{i-1}` for `i` in `1..=N`.
    pub fn spacing(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.intervals());
        self.h[i]
    }

    /// `2 / (h_{i+1} (h_{i+1} + h_i))` for interior `i`.
    pub fn h_plus(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i < self.intervals());
        self.h_plus[i]
    }

    /// `2 / (h_i (h_{i+1} + h_i))` for interior `i`.
    pub fn h_minus(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i < self.intervals());
        self.h_minus[i]
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.intervals()
    }

    /// Index of the node closest to log-price `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if (node - x).abs() < (self.nodes[best] - x).abs() {
                best = i;
            }
        }
        best
    }

    pub fn min_spacing(&self) -> (usize, f64) {
        (1..=self.intervals())
            .map(|i| (i, self.h[i]))
            .fold(
                (0, f64::INFINITY),
                |acc, cur| if cur.1 < acc.1 { cur } else { acc },
            )
    }
}

/// Sinh-stretched nodes for `spec`.
pub fn build_space_grid(spec: &GridSpec) -> Result<SpaceGrid> {
    spec.validate()?;
    let n = spec.n_space;
    let c1 = ((spec.x_minus - spec.x_star) / spec.alpha).asinh();
    let c2 = ((spec.x_plus - spec.x_star) / spec.alpha).asinh();
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            spec.x_star + spec.alpha * (c2 * t + c1 * (1.0 - t)).sinh()
        })
        .collect();
    // Pin the ends against asinh/sinh round-off.
    nodes[0] = spec.x_minus;
    nodes[n] = spec.x_plus;
    SpaceGrid::from_nodes(nodes)
}

/// `tau_m = m T / T_x` for `m = 0..=T_x`.
pub fn build_time_grid(spec: &GridSpec) -> Vec<f64> {
    let steps = spec.n_time;
    if steps == 0 {
        return vec![0.0];
    }
    (0..=steps)
        .map(|m| m as f64 * spec.horizon_t / steps as f64)
        .collect()
}

/// How the first-derivative (drift) term is differenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftScheme {
    /// Forward difference `(V_{i+1} - V_i) / h_{i+1}` regardless of drift sign.
    #[default]
    PaperForward,
    /// Forward difference for non-negative drift, backward otherwise.
    Upwind,
}

/// Largest time step keeping the diagonal coefficient of the explicit update
/// non-negative at every interior node. Returns `f64::INFINITY` when nothing
/// constrains the step.
pub fn stability_bound(grid: &SpaceGrid, p: &ModelParams, scheme: DriftScheme) -> Result<f64> {
    let variance = p.modified_variance()?;
    Ok(stability_bound_for(grid, variance, p.carry(), p.r, scheme))
}

pub(crate) fn stability_bound_for(
    grid: &SpaceGrid,
    variance: f64,
    carry: f64,
    r: f64,
    scheme: DriftScheme,
) -> f64 {
    let drift = carry - 0.5 * variance;
    let mut bound = f64::INFINITY;
    for i in grid.interior() {
        let diffusion = 0.5 * variance * (grid.h_plus(i) + grid.h_minus(i));
        let advection = match scheme {
            DriftScheme::PaperForward => drift.abs() / grid.spacing(i + 1),
            DriftScheme::Upwind if drift >= 0.0 => drift / grid.spacing(i + 1),
            DriftScheme::Upwind => -drift / grid.spacing(i),
        };
        let rate = diffusion + advection + r;
        if rate > 0.0 {
            bound = bound.min(1.0 / rate);
        }
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn desk() -> GridSpec {
        GridSpec::desk(8.0)
    }

    #[test]
    fn endpoints_match_bounds() {
        let spec = desk();
        let g = build_space_grid(&spec).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g.x(0), spec.x_minus);
        assert_eq!(g.x(200), spec.x_plus);
        // The unpinned formula also lands there.
        let c1 = ((spec.x_minus - spec.x_star) / spec.alpha).asinh();
        assert!((spec.x_star + spec.alpha * c1.sinh() - spec.x_minus).abs() < 1e-12);
    }

    #[test]
    fn symmetric_spec_hits_centre() {
        let g = build_space_grid(&desk()).unwrap();
        assert!((g.x(100) - 8f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn finest_interval_touches_strike() {
        let spec = desk();
        let g = build_space_grid(&spec).unwrap();
        // Brute-force scan for the smallest spacing.
        let mut smallest = f64::INFINITY;
        let mut at = 0;
        for i in 1..=g.intervals() {
            let h = g.x(i) - g.x(i - 1);
            if h < smallest - 1e-15 {
                smallest = h;
                at = i;
            }
        }
        let (lo, hi) = (g.x(at - 1), g.x(at));
        assert!(
            lo <= spec.x_star + 1e-12 && spec.x_star <= hi + 1e-12,
            "{lo} {hi}"
        );
    }

    #[test]
    fn uniform_spacing_coefficients() {
        let h = 0.05;
        let g = SpaceGrid::from_nodes((0..11).map(|i| i as f64 * h).collect()).unwrap();
        for i in g.interior() {
            assert_relative_eq!(g.h_plus(i), 1.0 / (h * h), max_relative = 1e-12);
            assert_relative_eq!(g.h_minus(i), 1.0 / (h * h), max_relative = 1e-12);
        }
    }

    #[test]
    fn time_grid_examples() {
        let mut spec = desk();
        spec.horizon_t = 1.0;
        spec.n_time = 1;
        assert_eq!(build_time_grid(&spec), vec![0.0, 1.0]);
        spec.n_time = 261;
        let t = build_time_grid(&spec);
        assert_eq!(t.len(), 262);
        assert_relative_eq!(t[1], 1.0 / 261.0, max_relative = 1e-15);
        assert_eq!(t[261], 1.0);
        spec.horizon_t = 2.0;
        spec.n_time = 4;
        assert_eq!(build_time_grid(&spec), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = desk();
        spec.x_star = spec.x_plus + 1.0;
        assert!(matches!(
            build_space_grid(&spec),
            Err(PricingError::InvalidSpec {
                field: "x_star",
                ..
            })
        ));
        let mut spec = desk();
        spec.alpha = 0.0;
        assert!(build_space_grid(&spec).is_err());
        let mut spec = desk();
        spec.n_space = 1;
        assert!(build_space_grid(&spec).is_err());
    }

    #[test]
    fn stability_bound_uniform_driftless() {
        let h = 0.1;
        let g = SpaceGrid::from_nodes((0..21).map(|i| i as f64 * h).collect()).unwrap();
        let variance = 0.04;
        // carry = variance / 2 removes the drift term
        let b = stability_bound_for(&g, variance, 0.5 * variance, 0.0, DriftScheme::PaperForward);
        assert_relative_eq!(b, h * h / variance, max_relative = 1e-12);
        let none = stability_bound_for(&g, 0.0, 0.0, 0.0, DriftScheme::PaperForward);
        assert!(none.is_infinite());
    }

    #[test]
    fn stability_bound_reference_scenario() {
        let g = build_space_grid(&desk()).unwrap();
        let p = ModelParams::default();
        let bound = stability_bound(&g, &p, DriftScheme::PaperForward).unwrap();
        assert!(bound > 0.0 && bound.is_finite());
        // Diagonal coefficient evaluated by hand at the binding node.
        let v = p.modified_variance().unwrap();
        let drift = p.carry() - 0.5 * v;
        let diag = |dtau: f64, i: usize| {
            1.0 - dtau * 0.5 * v * (g.h_plus(i) + g.h_minus(i))
                - dtau * drift / g.spacing(i + 1)
                - p.r * dtau
        };
        assert!(g.interior().all(|i| diag(bound * 0.999, i) >= 0.0));
        assert!(g.interior().any(|i| diag(bound * 1.01, i) < 0.0));
    }

    proptest! {
        #[test]
        fn nodes_increase_and_pin_endpoints(
            lo in -3.0f64..1.0,
            width in 0.5f64..6.0,
            frac in 0.05f64..0.95,
            alpha in 0.01f64..3.0,
            n in 2usize..400,
        ) {
            let spec = GridSpec {
                x_minus: lo,
                x_plus: lo + width,
                x_star: lo + frac * width,
                alpha,
                n_space: n,
                horizon_t: 1.0,
                n_time: 10,
            };
            let g = build_space_grid(&spec).unwrap();
            prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            let scale = 1e-12 * 1f64.max(spec.x_minus.abs()).max(spec.x_plus.abs());
            prop_assert!((g.x(0) - spec.x_minus).abs() <= scale);
            prop_assert!((g.x(n) - spec.x_plus).abs() <= scale);
            for i in g.interior() {
                prop_assert!(g.h_plus(i) > 0.0 && g.h_minus(i) > 0.0);
            }
        }

        #[test]
        fn smaller_alpha_concentrates(alpha in 0.05f64..2.0, shrink in 0.2f64..0.9) {
            let mut spec = desk();
            spec.alpha = alpha;
            let wide = build_space_grid(&spec).unwrap().min_spacing().1;
            spec.alpha = alpha * shrink;
            let tight = build_space_grid(&spec).unwrap().min_spacing().1;
            prop_assert!(tight < wide);
        }
    }
}
