//! Scenario configuration: the TOML schema, whole-config validation that
//! collects every problem at once, and construction of the core objects a
//! scenario describes.
//!
//! A scenario is a grid, an exponent on it, a function on it, and command
//! parameters. The exponent and function sections are externally tagged:
//!
//! ```toml
//! id = "example"
//!
//! [grid]
//! dim = 1
//! scale = 3
//! origin = [0.0]
//! cells = [24]
//!
//! [exponent.step]
//! base_p = 2.0
//! regions = [{ lower = [0.0], side = 0.25, p = inf }]
//!
//! [function.constant]
//! value = 2.0
//!
//! [params]
//! seed = 7
//! samples = 40
//! ```

use serde::{Deserialize, Serialize};
use varlex::generators::{random_function, rng};
use varlex::{
    Cube, Grid, GridFunction, ModularKind, ReciprocalExponent, DEFAULT_K_LIST, DEFAULT_REL_TOL,
};

/// Largest supported grid refinement exponent (cells have width `2^-scale/3`).
const MAX_SCALE: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Identifier prefixed to every emitted row.
    #[serde(default = "default_id")]
    pub id: String,
    pub grid: GridSpec,
    pub exponent: ExponentSpec,
    pub function: FunctionSpec,
    #[serde(default)]
    pub params: Params,
}

fn default_id() -> String {
    "scenario".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Box dimension, 1 or 2.
    pub dim: usize,
    /// Refinement exponent: cells have width `2^-scale / 3`.
    pub scale: u32,
    /// Lower corner of the box, one coordinate per axis, aligned to the
    /// cell lattice.
    pub origin: Vec<f64>,
    /// Cell counts per axis.
    pub cells: Vec<usize>,
}

/// Exponent family on the grid. Exponent values live in `[1, ∞]`
/// (reciprocals in `[0, 1]`); `inf` is written literally in TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentSpec {
    /// `p ≡ p0` everywhere, including past the box.
    Constant { p: f64 },
    /// A base value overridden on pairwise-disjoint aligned cubes; the tail
    /// keeps the base value.
    Step {
        base_p: f64,
        #[serde(default)]
        regions: Vec<RegionSpec>,
    },
    /// Log-decay family sampled at cell centers:
    /// `1/p(x) = base_reciprocal + amplitude · c_log / ln(e + 1/|x - center|)`,
    /// clamped to `[0, 1]`; `center` defaults to the box center and the tail
    /// reciprocal is the base value.
    LogHoelder {
        base_reciprocal: f64,
        amplitude: f64,
        c_log: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Explicit reciprocal per cell (row-major) plus the tail reciprocal.
    Table { reciprocals: Vec<f64>, tail_reciprocal: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// Lower corner of the cube, aligned to the cell lattice.
    pub lower: Vec<f64>,
    /// Side length, a positive multiple of the cell width.
    pub side: f64,
    /// Exponent value on the cube, in `[1, ∞]`.
    pub p: f64,
}

/// Function on the grid, constant on cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: f64 },
    /// `value` times the indicator of an aligned cube (clipped to the box).
    Indicator {
        lower: Vec<f64>,
        side: f64,
        #[serde(default = "default_one")]
        value: f64,
    },
    /// Zero except at the listed cells.
    Spikes { spikes: Vec<SpikeSpec> },
    /// Seeded random cell values with dyadic magnitudes up to `max_abs`.
    Random {
        seed: u64,
        #[serde(default = "default_max_abs")]
        max_abs: f64,
    },
}

fn default_one() -> f64 {
    1.0
}

fn default_max_abs() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeSpec {
    /// Cell indices, one per axis.
    pub cell: Vec<usize>,
    pub value: f64,
}

/// Command parameters; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Relative tolerance for norm bisections.
    pub tol: f64,
    /// Modular the `norm` and `modular` commands use.
    pub modular: ModularName,
    /// Cube-family cap for the class constants (default: the longer axis).
    pub max_side_cells: Option<usize>,
    /// Approximation indices for the convergence classification.
    pub k_list: Vec<u32>,
    /// Randomized instances per check family in `verify`/`report`.
    pub samples: usize,
    /// Master seed for every randomized suite.
    pub seed: u64,
    /// Stopping-cube threshold ratio for `cz` (default: `3^dim`).
    pub gamma: Option<f64>,
    /// Candidate count for the best-tail-reciprocal scan in `constants`.
    pub tail_scan_points: usize,
    /// Shifted-piece decay parameters; omitted means calibrated on the fly.
    pub decay: Option<DecaySpec>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            tol: DEFAULT_REL_TOL,
            modular: ModularName::Rho,
            max_side_cells: None,
            k_list: DEFAULT_K_LIST.to_vec(),
            samples: 40,
            seed: 0,
            gamma: None,
            tail_scan_points: 33,
            decay: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModularName {
    /// Plain integral modular.
    Rho,
    /// Exponent-weighted modular.
    RhoTilde,
    /// Extended modular: finite part joined with the sup part by a maximum.
    RhoEr,
    /// Summed modular: finite part plus the sup part.
    RhoKr,
}

impl ModularName {
    pub fn kind(self) -> ModularKind {
        match self {
            ModularName::Rho => ModularKind::Rho,
            ModularName::RhoTilde => ModularKind::RhoTilde,
            ModularName::RhoEr => ModularKind::RhoEr,
            ModularName::RhoKr => ModularKind::RhoKr,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModularName::Rho => "rho",
            ModularName::RhoTilde => "rho-tilde",
            ModularName::RhoEr => "rho-er",
            ModularName::RhoKr => "rho-kr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub epsilon: f64,
    pub c0: f64,
}

/// The core objects a validated scenario describes.
pub struct Scenario {
    pub grid: Grid,
    pub exponent: ReciprocalExponent,
    pub function: GridFunction,
}

/// Parses and fully validates a configuration document. Semantic problems
/// are collected exhaustively, each naming the offending field.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<String>> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| vec![e.to_string()])?;
    let errors = cfg.validate();
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Serializes a configuration; parsing the output reproduces the input
/// exactly (floats round-trip through their shortest representation).
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    toml::to_string_pretty(cfg).expect("scenario configs are always serializable")
}

fn valid_p(p: f64) -> bool {
    p >= 1.0 && !p.is_nan()
}

fn valid_reciprocal(u: f64) -> bool {
    (0.0..=1.0).contains(&u) && !u.is_nan()
}

impl ScenarioConfig {
    /// Collects every validation error, each prefixed with the field path.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();

        let g = &self.grid;
        let grid_errs_before = errs.len();
        if g.dim != 1 && g.dim != 2 {
            errs.push(format!("grid.dim: must be 1 or 2, got {}", g.dim));
        }
        if g.dim == 1 || g.dim == 2 {
            if g.origin.len() != g.dim {
                errs.push(format!(
                    "grid.origin: expected {} coordinate(s), got {}",
                    g.dim,
                    g.origin.len()
                ));
            }
            if g.cells.len() != g.dim {
                errs.push(format!(
                    "grid.cells: expected {} count(s), got {}",
                    g.dim,
                    g.cells.len()
                ));
            }
        }
        if g.cells.contains(&0) {
            errs.push("grid.cells: every axis needs at least one cell".to_string());
        }
        if g.scale > MAX_SCALE {
            errs.push(format!("grid.scale: {} exceeds the supported maximum {MAX_SCALE}", g.scale));
        }
        if g.origin.iter().any(|o| !o.is_finite()) {
            errs.push("grid.origin: coordinates must be finite".to_string());
        }
        let grid = if errs.len() == grid_errs_before {
            match Grid::new(g.dim, g.scale, &g.origin, &g.cells) {
                Ok(grid) => Some(grid),
                Err(e) => {
                    errs.push(format!("grid: {e}"));
                    None
                }
            }
        } else {
            None
        };

        self.validate_exponent(grid.as_ref(), &mut errs);
        self.validate_function(grid.as_ref(), &mut errs);
        self.params.validate(&mut errs);
        errs
    }

    fn validate_exponent(&self, grid: Option<&Grid>, errs: &mut Vec<String>) {
        match &self.exponent {
            ExponentSpec::Constant { p } => {
                if !valid_p(*p) {
                    errs.push(format!(
                        "exponent.constant.p: exponent must lie in [1, inf], got {p}"
                    ));
                }
            }
            ExponentSpec::Step { base_p, regions } => {
                if !valid_p(*base_p) {
                    errs.push(format!(
                        "exponent.step.base_p: exponent must lie in [1, inf], got {base_p}"
                    ));
                }
                let mut claimed = grid.map(|g| vec![false; g.cell_count()]);
                for (i, region) in regions.iter().enumerate() {
                    let path = format!("exponent.step.regions[{i}]");
                    if !valid_p(region.p) {
                        errs.push(format!(
                            "{path}.p: exponent must lie in [1, inf], got {}",
                            region.p
                        ));
                    }
                    if region.side <= 0.0 || !region.side.is_finite() {
                        errs.push(format!(
                            "{path}.side: must be a positive finite length, got {}",
                            region.side
                        ));
                    }
                    let Some(grid) = grid else { continue };
                    if region.lower.len() != grid.dim() {
                        errs.push(format!(
                            "{path}.lower: expected {} coordinate(s), got {}",
                            grid.dim(),
                            region.lower.len()
                        ));
                        continue;
                    }
                    if region.side <= 0.0 || !region.side.is_finite() {
                        continue;
                    }
                    match Cube::from_coords(grid, &region.lower, region.side) {
                        Err(e) => errs.push(format!("{path}: {e}")),
                        Ok(cube) => {
                            if let (Some(claimed), Some(rect)) =
                                (claimed.as_mut(), cube.cell_rect(grid))
                            {
                                let indices: Vec<usize> = rect.indices(grid).collect();
                                if indices.iter().any(|&idx| claimed[idx]) {
                                    errs.push(format!("{path}: overlaps an earlier region"));
                                }
                                for idx in indices {
                                    claimed[idx] = true;
                                }
                            }
                        }
                    }
                }
            }
            ExponentSpec::LogHoelder { base_reciprocal, amplitude, c_log, center } => {
                if !valid_reciprocal(*base_reciprocal) {
                    errs.push(format!(
                        "exponent.log_hoelder.base_reciprocal: must lie in [0, 1], got \
                         {base_reciprocal}"
                    ));
                }
                if !amplitude.is_finite() {
                    errs.push(format!(
                        "exponent.log_hoelder.amplitude: must be finite, got {amplitude}"
                    ));
                }
                if !c_log.is_finite() || *c_log < 0.0 {
                    errs.push(format!(
                        "exponent.log_hoelder.c_log: must be finite and nonnegative, got {c_log}"
                    ));
                }
                if let Some(center) = center {
                    if center.iter().any(|c| !c.is_finite()) {
                        errs.push(
                            "exponent.log_hoelder.center: coordinates must be finite".to_string(),
                        );
                    }
                    if let Some(grid) = grid {
                        if center.len() != grid.dim() {
                            errs.push(format!(
                                "exponent.log_hoelder.center: expected {} coordinate(s), got {}",
                                grid.dim(),
                                center.len()
                            ));
                        }
                    }
                }
            }
            ExponentSpec::Table { reciprocals, tail_reciprocal } => {
                for (i, u) in reciprocals.iter().enumerate() {
                    if !valid_reciprocal(*u) {
                        errs.push(format!(
                            "exponent.table.reciprocals[{i}]: must lie in [0, 1], got {u}"
                        ));
                    }
                }
                if !valid_reciprocal(*tail_reciprocal) {
                    errs.push(format!(
                        "exponent.table.tail_reciprocal: must lie in [0, 1], got {tail_reciprocal}"
                    ));
                }
                if let Some(grid) = grid {
                    if reciprocals.len() != grid.cell_count() {
                        errs.push(format!(
                            "exponent.table.reciprocals: expected {} entries (row-major cells), \
                             got {}",
                            grid.cell_count(),
                            reciprocals.len()
                        ));
                    }
                }
            }
        }
    }

    fn validate_function(&self, grid: Option<&Grid>, errs: &mut Vec<String>) {
        match &self.function {
            FunctionSpec::Constant { value } => {
                if !value.is_finite() {
                    errs.push(format!("function.constant.value: must be finite, got {value}"));
                }
            }
            FunctionSpec::Indicator { lower, side, value } => {
                if !value.is_finite() {
                    errs.push(format!("function.indicator.value: must be finite, got {value}"));
                }
                if *side <= 0.0 || !side.is_finite() {
                    errs.push(format!(
                        "function.indicator.side: must be a positive finite length, got {side}"
                    ));
                }
                if let Some(grid) = grid {
                    if lower.len() != grid.dim() {
                        errs.push(format!(
                            "function.indicator.lower: expected {} coordinate(s), got {}",
                            grid.dim(),
                            lower.len()
                        ));
                    } else if side.is_finite() && *side > 0.0 {
                        if let Err(e) = Cube::from_coords(grid, lower, *side) {
                            errs.push(format!("function.indicator: {e}"));
                        }
                    }
                }
            }
            FunctionSpec::Spikes { spikes } => {
                for (i, spike) in spikes.iter().enumerate() {
                    let path = format!("function.spikes[{i}]");
                    if !spike.value.is_finite() {
                        errs.push(format!("{path}.value: must be finite, got {}", spike.value));
                    }
                    let Some(grid) = grid else { continue };
                    if spike.cell.len() != grid.dim() {
                        errs.push(format!(
                            "{path}.cell: expected {} index(es), got {}",
                            grid.dim(),
                            spike.cell.len()
                        ));
                        continue;
                    }
                    let per_axis = grid.cells_per_axis();
                    for (axis, &ix) in spike.cell.iter().enumerate() {
                        if ix >= per_axis[axis] {
                            errs.push(format!(
                                "{path}.cell: index {ix} out of range (axis {axis} has {} cells)",
                                per_axis[axis]
                            ));
                        }
                    }
                }
            }
            FunctionSpec::Random { max_abs, .. } => {
                if *max_abs <= 0.0 || !max_abs.is_finite() {
                    errs.push(format!(
                        "function.random.max_abs: must be a positive finite magnitude, got \
                         {max_abs}"
                    ));
                }
            }
        }
    }

    /// Builds the grid, exponent, and function. Call after a clean
    /// [`ScenarioConfig::validate`]; residual core errors are reported with
    /// their context.
    pub fn build(&self) -> anyhow::Result<Scenario> {
        use anyhow::Context;
        let g = &self.grid;
        let grid = Grid::new(g.dim, g.scale, &g.origin, &g.cells).context("grid")?;

        let exponent = match &self.exponent {
            ExponentSpec::Constant { p } => {
                ReciprocalExponent::constant(grid, *p).context("exponent.constant")?
            }
            ExponentSpec::Step { base_p, regions } => {
                let mut built = Vec::with_capacity(regions.len());
                for (i, region) in regions.iter().enumerate() {
                    let cube = Cube::from_coords(&grid, &region.lower, region.side)
                        .with_context(|| format!("exponent.step.regions[{i}]"))?;
                    built.push((cube, region.p));
                }
                ReciprocalExponent::step(grid, *base_p, &built).context("exponent.step")?
            }
            ExponentSpec::LogHoelder { base_reciprocal, amplitude, c_log, center } => {
                let center = match center {
                    Some(c) => c.clone(),
                    None => box_center(&grid),
                };
                let recip: Vec<f64> = (0..grid.cell_count())
                    .map(|idx| {
                        let x = grid.cell_center(idx);
                        let mut dist2 = 0.0;
                        for axis in 0..grid.dim() {
                            let d = x[axis] - center[axis];
                            dist2 += d * d;
                        }
                        let dist = dist2.sqrt().max(1e-300);
                        let bump = amplitude * c_log / (std::f64::consts::E + 1.0 / dist).ln();
                        (base_reciprocal + bump).clamp(0.0, 1.0)
                    })
                    .collect();
                ReciprocalExponent::from_reciprocals(grid, recip, *base_reciprocal)
                    .context("exponent.log_hoelder")?
            }
            ExponentSpec::Table { reciprocals, tail_reciprocal } => {
                ReciprocalExponent::from_reciprocals(grid, reciprocals.clone(), *tail_reciprocal)
                    .context("exponent.table")?
            }
        };

        let function = match &self.function {
            FunctionSpec::Constant { value } => {
                GridFunction::constant(grid, *value).context("function.constant")?
            }
            FunctionSpec::Indicator { lower, side, value } => {
                let cube =
                    Cube::from_coords(&grid, lower, *side).context("function.indicator")?;
                GridFunction::indicator(grid, &cube)
                    .scaled(*value)
                    .context("function.indicator")?
            }
            FunctionSpec::Spikes { spikes } => {
                let mut f = GridFunction::zeros(grid);
                for spike in spikes {
                    let ix = spike.cell[0];
                    let iy = *spike.cell.get(1).unwrap_or(&0);
                    let idx = grid.cell_index(ix, iy);
                    f.values_mut()[idx] = spike.value;
                }
                f
            }
            FunctionSpec::Random { seed, max_abs } => {
                random_function(&mut rng(*seed), grid, *max_abs)
            }
        };

        Ok(Scenario { grid, exponent, function })
    }
}

impl Params {
    fn validate(&self, errs: &mut Vec<String>) {
        if self.tol.is_nan() || self.tol <= 0.0 || self.tol > 0.1 {
            errs.push(format!("params.tol: must lie in (0, 0.1], got {}", self.tol));
        }
        if self.k_list.is_empty() {
            errs.push("params.k_list: needs at least one index".to_string());
        } else if self.k_list[0] < 1 || self.k_list.windows(2).any(|w| w[0] >= w[1]) {
            errs.push(format!(
                "params.k_list: indices must be strictly increasing and at least 1, got {:?}",
                self.k_list
            ));
        }
        if self.samples == 0 {
            errs.push("params.samples: needs at least one instance".to_string());
        }
        if self.max_side_cells == Some(0) {
            errs.push("params.max_side_cells: needs at least one cell".to_string());
        }
        if let Some(gamma) = self.gamma {
            if !gamma.is_finite() || gamma <= 1.0 {
                errs.push(format!(
                    "params.gamma: must be a finite ratio greater than 1, got {gamma}"
                ));
            }
        }
        if self.tail_scan_points < 2 {
            errs.push(format!(
                "params.tail_scan_points: needs at least 2 candidates, got {}",
                self.tail_scan_points
            ));
        }
        if let Some(decay) = &self.decay {
            if decay.epsilon <= 0.0 || !decay.epsilon.is_finite() {
                errs.push(format!(
                    "params.decay.epsilon: must be positive and finite, got {}",
                    decay.epsilon
                ));
            }
            if decay.c0 <= 0.0 || !decay.c0.is_finite() {
                errs.push(format!(
                    "params.decay.c0: must be positive and finite, got {}",
                    decay.c0
                ));
            }
        }
    }
}

/// Exact box center: the midpoint of the first and last cell centers.
fn box_center(grid: &Grid) -> Vec<f64> {
    let first = grid.cell_center(0);
    let last = grid.cell_center(grid.cell_count() - 1);
    (0..grid.dim()).map(|a| 0.5 * (first[a] + last[a])).collect()
}
