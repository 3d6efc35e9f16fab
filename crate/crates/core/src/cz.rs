//! Stopping-time decompositions of dyadic maximal level sets, and the
//! averaging operators built on them.
//!
//! For a ratio `γ > 1` and a shifted dyadic family, the level set
//! `Ω_k = {M_D |f| > γ^k}` is a disjoint union of maximal family cubes whose
//! averages sit in `(γ^k, 2^n γ^k]`. The decomposition records those cubes
//! per level; the averaging operator `T` pays each cube its `g`-average over
//! the cube's "fresh" part `E = Q ∩ (Ω_k \ Ω_{k+1})`, and `T_l` splits `T`
//! by how many levels deeper than the cube the payment lands.
//!
//! Everything here is arranged so the defining comparisons are exact in
//! floating point on lattice-valued data: sums come from one shared
//! summed-area table, averages from one shared expression, and thresholds
//! from one shared power, so "average > threshold" in the selection equals
//! the same comparison made anywhere else.

use crate::calculus::InequalityReport;
use crate::dyadic::{cubes_at_scale, default_grid_id, visit_cubes, DyadicGridId};
use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, GridFunction, PrefixSums};
use crate::maximal::{dyadic_maximal, family_cube_average, window_denominator};

/// Relative slack for float comparisons between independently rounded exact
/// quantities.
const INTEGRAL_SLACK: f64 = 1e-12;

/// One selected cube: a maximal family cube whose `|f|`-average exceeds the
/// level threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzCube {
    /// The cube, in grid units; may extend past the box.
    pub cube: Cube,
    /// Family scale of the cube (side `2^-scale` in box coordinates).
    pub scale: i32,
    /// Recorded `|f|`-average over the whole cube (outside the box counts 0).
    pub average: f64,
}

/// All selected cubes of one level, with the level set they tile.
#[derive(Debug, Clone)]
pub struct CzLevel {
    /// Level index `k`.
    pub k: i32,
    /// Threshold `γ^k`.
    pub threshold: f64,
    /// Maximal cubes with average above the threshold, coarse scales first,
    /// pairwise disjoint.
    pub cubes: Vec<CzCube>,
    /// Cell mask of `Ω_k ∩ box`; equals the union of the cubes' cells.
    pub omega: Vec<bool>,
}

/// Level-set decomposition of a dyadic maximal function.
#[derive(Debug, Clone)]
pub struct CzDecomposition {
    id: DyadicGridId,
    gamma: f64,
    levels: Vec<CzLevel>,
    maximal: GridFunction,
}

impl CzDecomposition {
    /// The dyadic family actually used; its coarse end may have been
    /// extended past the requested one so that no root cube is ever
    /// selected (selected cubes then always have an in-range parent).
    pub fn id(&self) -> &DyadicGridId {
        &self.id
    }

    /// Level ratio γ.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Stored levels, `k` ascending and contiguous.
    pub fn levels(&self) -> &[CzLevel] {
        &self.levels
    }

    /// The dyadic maximal function `M_D |f|` the levels were cut from.
    pub fn maximal(&self) -> &GridFunction {
        &self.maximal
    }

    pub fn grid(&self) -> &Grid {
        self.maximal.grid()
    }

    /// Threshold `γ^k`, one shared expression for every consumer.
    pub fn threshold(&self, k: i32) -> f64 {
        self.gamma.powi(k)
    }

    /// Cell mask of `Ω_k ∩ box = {M_D |f| > γ^k}`, valid for any `k`.
    pub fn omega_mask(&self, k: i32) -> Vec<bool> {
        let theta = self.threshold(k);
        self.maximal.values().iter().map(|&v| v > theta).collect()
    }

    /// Cell mask of `D_k = Ω_k \ Ω_{k+1}`: cells whose maximal value lies in
    /// `(γ^k, γ^{k+1}]`. Distinct `k` give disjoint masks.
    pub fn d_mask(&self, k: i32) -> Vec<bool> {
        let lo = self.threshold(k);
        let hi = self.threshold(k + 1);
        self.maximal
            .values()
            .iter()
            .map(|&v| v > lo && v <= hi)
            .collect()
    }

    /// Stored level range `(k_lo, k_hi)`, if any level is stored.
    pub fn k_range(&self) -> Option<(i32, i32)> {
        match (self.levels.first(), self.levels.last()) {
            (Some(lo), Some(hi)) => Some((lo.k, hi.k)),
            _ => None,
        }
    }

    /// Largest level shift `l` with `Q_j^k ∩ D_{k+l}` possibly nonempty
    /// among stored levels.
    pub fn max_shift(&self) -> u32 {
        match self.k_range() {
            Some((lo, hi)) => (hi - lo) as u32,
            None => 0,
        }
    }

    /// True when no cube was selected at any stored level.
    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|l| l.cubes.is_empty())
    }
}

/// Largest `k` with `gamma^k < x`; requires `x > 0` finite, `gamma > 1`.
fn largest_k_below(gamma: f64, x: f64) -> i32 {
    let mut k = (x.ln() / gamma.ln()).floor() as i32;
    while gamma.powi(k) >= x {
        k -= 1;
    }
    while gamma.powi(k + 1) < x {
        k += 1;
    }
    k
}

/// Selects the maximal family cubes with average strictly above `theta`
/// (stopping time from the coarse end: stop descending at the first hit).
fn select_level(
    grid: &Grid,
    id: &DyadicGridId,
    ps: &PrefixSums,
    theta: f64,
) -> Result<Vec<CzCube>> {
    let origin = grid.origin_units();
    let mut cubes = Vec::new();
    visit_cubes(grid, id, |cube, m| {
        let average = family_cube_average(ps, grid, &origin, cube);
        if average > theta {
            cubes.push(CzCube {
                cube: *cube,
                scale: m,
                average,
            });
            false
        } else {
            true
        }
    })?;
    Ok(cubes)
}

/// Paints the cells of the given cubes, failing on any overlap.
fn paint_disjoint(grid: &Grid, cubes: &[CzCube], label: &str) -> Result<Vec<bool>> {
    let mut mask = vec![false; grid.cell_count()];
    for cz_cube in cubes {
        let rect = cz_cube
            .cube
            .cell_rect(grid)
            .ok_or_else(|| Error::Internal(format!("{label}: selected cube misses the box")))?;
        for idx in rect.indices(grid) {
            if mask[idx] {
                return Err(Error::Internal(format!(
                    "{label}: selected cubes overlap at cell {idx}"
                )));
            }
            mask[idx] = true;
        }
    }
    Ok(mask)
}

/// Builds the level-set decomposition of `M_D |f|` for ratio `gamma`.
///
/// Levels: `k_range` inclusive when given; otherwise every `k` for which
/// `Ω_k ∩ box` is a proper nonempty subset chain — from the largest `k` with
/// `γ^k` below the least positive maximal value (so the stored levels cover
/// every cell where the maximal function is positive) up to the largest `k`
/// with `γ^k` below its maximum.
///
/// The family's coarse end is extended (within the alignment cap) until no
/// root cube's average exceeds the lowest threshold; every selected cube
/// then has an unselected in-range parent, which is what forces the
/// recorded averages into `(γ^k, 2^n γ^k]`. All invariants are re-verified
/// before returning.
pub fn cz_decompose(
    f: &GridFunction,
    id: &DyadicGridId,
    gamma: f64,
    k_range: Option<(i32, i32)>,
) -> Result<CzDecomposition> {
    let grid = *f.grid();
    id.check_scale(&grid)?;
    if !gamma.is_finite() || gamma <= 1.0 {
        return Err(Error::Domain(format!(
            "level ratio must be finite and > 1, got {gamma}"
        )));
    }
    if let Some((lo, hi)) = k_range {
        if lo > hi {
            return Err(Error::Domain(format!(
                "level range is empty: {lo} > {hi}"
            )));
        }
    }
    let g = f.abs();
    let ps = PrefixSums::new(&g);
    let origin = grid.origin_units();
    let mut id = *id;
    loop {
        let maximal = dyadic_maximal(&g, &id)?;
        let range = match k_range {
            Some(r) => Some(r),
            None => {
                let max = maximal.max_abs();
                let minpos = maximal
                    .values()
                    .iter()
                    .copied()
                    .filter(|&v| v > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if max == 0.0 {
                    None
                } else {
                    Some((largest_k_below(gamma, minpos), largest_k_below(gamma, max)))
                }
            }
        };
        let Some((k_lo, k_hi)) = range else {
            // Zero input: nothing exceeds any threshold.
            return Ok(CzDecomposition {
                id,
                gamma,
                levels: Vec::new(),
                maximal,
            });
        };
        let theta_lo = gamma.powi(k_lo);
        let worst_root = cubes_at_scale(&grid, &id, id.m_min)?
            .iter()
            .map(|c| family_cube_average(&ps, &grid, &origin, c))
            .fold(0.0, f64::max);
        if worst_root > theta_lo {
            // Coarsen until roots dilute below the lowest threshold; the
            // alignment cap turns a runaway here into a scale-range error.
            id = DyadicGridId::new(id.shift_thirds, id.m_min - 1, id.m_max)?;
            id.check_scale(&grid)?;
            continue;
        }
        let mut levels = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        for k in k_lo..=k_hi {
            let threshold = gamma.powi(k);
            let cubes = select_level(&grid, &id, &ps, threshold)?;
            let omega = paint_disjoint(&grid, &cubes, "level-set cover")?;
            for (idx, &painted) in omega.iter().enumerate() {
                if painted != (maximal.values()[idx] > threshold) {
                    return Err(Error::Internal(format!(
                        "level {k}: cube cover disagrees with the maximal level set at cell {idx}"
                    )));
                }
            }
            levels.push(CzLevel {
                k,
                threshold,
                cubes,
                omega,
            });
        }
        let decomposition = CzDecomposition {
            id,
            gamma,
            levels,
            maximal,
        };
        let averages = check_cube_averages(&decomposition);
        if !averages.pass {
            return Err(Error::Internal(format!(
                "cube averages escape their band: {}",
                averages.digest
            )));
        }
        return Ok(decomposition);
    }
}

/// Checks `γ^k < average ≤ 2^n γ^k` for every stored cube. Both comparisons
/// are exact consequences of the stopping time on lattice data, so no slack
/// is applied. The report's `lhs` is the worst `average / (2^n γ^k)`.
pub fn check_cube_averages(cz: &CzDecomposition) -> InequalityReport {
    let two_n = if cz.grid().dim() == 1 { 2.0 } else { 4.0 };
    let mut worst = 0.0f64;
    let mut all_ok = true;
    let mut count = 0usize;
    for level in cz.levels() {
        for cube in &level.cubes {
            count += 1;
            all_ok &= cube.average > level.threshold;
            all_ok &= cube.average <= two_n * level.threshold;
            worst = worst.max(cube.average / (two_n * level.threshold));
        }
    }
    let digest = format!(
        "average band ({{γ^k}}, 2^n·γ^k]: γ={} levels={} cubes={count}",
        cz.gamma(),
        cz.levels().len()
    );
    InequalityReport {
        lhs: worst,
        rhs: 1.0,
        constant: two_n,
        pass: all_ok,
        digest,
    }
}

/// Checks the level-overlap bound `|Q_j^k ∩ Ω_{k+l}| ≤ 2^n γ^{-l} |Q_j^k|`
/// for every stored cube and `0 ≤ l ≤ l_max`, counting cells inside the box
/// only (a lower bound on the full intersection, so the test is honest).
/// For integer γ the comparison `count·γ^l ≤ 2^n·side^n` is done in exact
/// integer arithmetic; otherwise in floats with a relative slack.
pub fn check_level_overlap(cz: &CzDecomposition, l_max: u32) -> InequalityReport {
    let grid = cz.grid();
    let dim = grid.dim() as u32;
    let two_n = 1u128 << dim;
    let integer_gamma = (cz.gamma().fract() == 0.0).then(|| cz.gamma() as u128);
    let mut worst = 0.0f64;
    let mut all_ok = true;
    let mut checked = 0usize;
    for level in cz.levels() {
        for l in 0..=l_max {
            let omega = cz.omega_mask(level.k + l as i32);
            for cube in &level.cubes {
                checked += 1;
                let count = cube
                    .cube
                    .cell_rect(grid)
                    .map(|r| r.indices(grid).filter(|&idx| omega[idx]).count())
                    .unwrap_or(0) as u128;
                let side = cube.cube.side as u128;
                let volume = side.pow(dim);
                let ratio =
                    count as f64 * cz.gamma().powi(l as i32) / (two_n as f64 * volume as f64);
                worst = worst.max(ratio);
                let ok = match integer_gamma {
                    Some(gi) => {
                        match (
                            count.checked_mul(gi.pow(l)),
                            two_n.checked_mul(volume),
                        ) {
                            (Some(lhs), Some(rhs)) => lhs <= rhs,
                            // Overflow means the cube volume dwarfs any
                            // possible cell count; the bound holds.
                            _ => true,
                        }
                    }
                    None => ratio <= 1.0 + INTEGRAL_SLACK,
                };
                all_ok &= ok;
            }
        }
    }
    let digest = format!(
        "level overlap |Q ∩ Ω_(k+l)| ≤ 2^n·γ^(-l)·|Q|: γ={} shifts 0..={l_max} checks={checked}",
        cz.gamma()
    );
    InequalityReport {
        lhs: worst,
        rhs: 1.0,
        constant: two_n as f64,
        pass: all_ok,
        digest,
    }
}

fn require_compatible(g: &GridFunction, cz: &CzDecomposition) -> Result<()> {
    if g.grid() != cz.grid() {
        return Err(Error::GridMismatch(
            "averaging operator input and decomposition",
        ));
    }
    if g.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition(
            "averaging operator needs a nonnegative input".into(),
        ));
    }
    let expected = if cz.grid().dim() == 1 { 3.0 } else { 9.0 };
    if cz.gamma() != expected {
        return Err(Error::Precondition(format!(
            "averaging operator needs level ratio 3^n = {expected}, got {}",
            cz.gamma()
        )));
    }
    Ok(())
}

/// Per-cube coefficient `α = (1/|Q|) ∫_{E} g` with `E = Q ∩ D_k`, as an
/// exact cell sum divided by the cube's cell volume (the cell measure
/// cancels).
fn cube_coefficient(g: &GridFunction, grid: &Grid, cube: &Cube, d_mask: &[bool]) -> f64 {
    let mut sum = 0.0;
    if let Some(rect) = cube.cell_rect(grid) {
        for idx in rect.indices(grid) {
            if d_mask[idx] {
                sum += g.values()[idx];
            }
        }
    }
    sum / window_denominator(grid, cube.side)
}

/// The averaging operator: `Tg = Σ_k Σ_j α_{j,k} · 1_{Q_j^k}` with
/// `α_{j,k} = (1/|Q_j^k|) ∫_{E_j^k} g`. Needs `g ≥ 0` on the same grid and
/// a decomposition with ratio `3^n`.
pub fn operator_t(g: &GridFunction, cz: &CzDecomposition) -> Result<GridFunction> {
    require_compatible(g, cz)?;
    let grid = cz.grid();
    let mut out = vec![0.0f64; grid.cell_count()];
    for level in cz.levels() {
        let d_mask = cz.d_mask(level.k);
        for cube in &level.cubes {
            let alpha = cube_coefficient(g, grid, &cube.cube, &d_mask);
            if let Some(rect) = cube.cube.cell_rect(grid) {
                for idx in rect.indices(grid) {
                    out[idx] += alpha;
                }
            }
        }
    }
    GridFunction::new(*grid, out)
}

/// Which coefficients a level-shifted piece keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlPart {
    /// Only cubes with `α > 1`.
    AboveOne,
    /// Only cubes with `α ≤ 1`.
    AtMostOne,
    /// Every cube.
    All,
}

/// The level-shifted piece of the averaging operator:
/// `T_l g = Σ_k Σ_j α_{j,k} · 1_{Q_j^k ∩ D_{k+l}}`, with the same
/// coefficients as [`operator_t`] but painted only on the part of the cube
/// lying `l` levels deeper. Each cell receives at most one term.
pub fn operator_t_l(
    g: &GridFunction,
    cz: &CzDecomposition,
    l: u32,
    part: TlPart,
) -> Result<GridFunction> {
    require_compatible(g, cz)?;
    let grid = cz.grid();
    let mut out = vec![0.0f64; grid.cell_count()];
    for level in cz.levels() {
        let d_own = cz.d_mask(level.k);
        let d_shifted = cz.d_mask(level.k + l as i32);
        for cube in &level.cubes {
            let alpha = cube_coefficient(g, grid, &cube.cube, &d_own);
            let keep = match part {
                TlPart::AboveOne => alpha > 1.0,
                TlPart::AtMostOne => alpha <= 1.0,
                TlPart::All => true,
            };
            if !keep {
                continue;
            }
            if let Some(rect) = cube.cube.cell_rect(grid) {
                for idx in rect.indices(grid) {
                    if d_shifted[idx] {
                        out[idx] += alpha;
                    }
                }
            }
        }
    }
    GridFunction::new(*grid, out)
}

/// Sums the level-shifted pieces back into the full operator, adding deeper
/// shifts first so each cell accumulates in the same order as
/// [`operator_t`]; the partition identity is then exact bit for bit.
pub fn sum_of_shifts(g: &GridFunction, cz: &CzDecomposition) -> Result<GridFunction> {
    let grid = cz.grid();
    let mut acc = GridFunction::zeros(*grid);
    for l in (0..=cz.max_shift()).rev() {
        acc = acc.add(&operator_t_l(g, cz, l, TlPart::All)?)?;
    }
    Ok(acc)
}

/// The central pairing inequality: `∫ (M_D |f|) g ≤ 3^n ∫ |f| · Tg` for
/// `g ≥ 0`, with the decomposition taken at ratio `3^n` over the unshifted
/// family and an automatic level range (so the stored levels cover every
/// cell where the maximal function is positive).
pub fn duality_check(f: &GridFunction, g: &GridFunction) -> Result<InequalityReport> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("pairing inputs"));
    }
    let grid = *f.grid();
    let gamma = if grid.dim() == 1 { 3.0 } else { 9.0 };
    let id = default_grid_id(&grid, [0, 0])?;
    let cz = cz_decompose(f, &id, gamma, None)?;
    let lhs = cz.maximal().multiply(g)?.integral();
    let tg = operator_t(g, &cz)?;
    let pairing = f.abs().multiply(&tg)?.integral();
    let rhs = gamma * pairing;
    let digest = format!(
        "∫(M_D f)·g ≤ 3^n·∫|f|·Tg: dim={} cells={} levels={}",
        grid.dim(),
        grid.cell_count(),
        cz.levels().len()
    );
    Ok(InequalityReport::with_slack(
        lhs,
        rhs,
        gamma,
        INTEGRAL_SLACK,
        digest,
    ))
}
