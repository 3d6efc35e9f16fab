//! Shifted dyadic cube families.
//!
//! The family with shift `α ∈ {0, 1/3, 2/3}^n` consists of the cubes
//! `2^-m([0,1)^n + j + (-1)^m α)` over scales `m` and integer translates
//! `j`. Alternating the shift sign between consecutive scales makes each
//! family a genuine tree: every cube splits into `2^n` children of half the
//! side, and the three shifts per axis are enough to dominate arbitrary
//! cubes (a cube of side `ℓ` sits inside a family cube of side at most
//! `6ℓ` for one of the shifts). With the grid's cell size `h = 2^-M / 3`,
//! every cube of scale `m ≤ M` has corners on the cell lattice, so
//! membership, nesting and averages reduce to integer arithmetic.

use crate::error::{Error, Result};
use crate::grid::{Cube, Grid};

/// Hard cap on `M - m_min`: keeps cube sides within `i64` and bounds the
/// descent depth.
const MAX_COARSENING: i32 = 50;

/// A shifted dyadic family together with the scale range in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicGridId {
    /// Shift numerator per axis: the shift is `thirds / 3`, `thirds ∈ {0,1,2}`.
    pub shift_thirds: [u8; 2],
    /// Coarsest scale, inclusive; negative values give cubes larger than the
    /// unit cube.
    pub m_min: i32,
    /// Finest scale, inclusive; must not exceed the grid resolution `M`.
    pub m_max: i32,
}

impl DyadicGridId {
    /// Builds an id, validating the shift numerators and scale ordering.
    pub fn new(shift_thirds: [u8; 2], m_min: i32, m_max: i32) -> Result<Self> {
        if shift_thirds[0] > 2 || shift_thirds[1] > 2 {
            return Err(Error::Domain(format!(
                "shift numerators {shift_thirds:?} must lie in {{0, 1, 2}}"
            )));
        }
        if m_min > m_max {
            return Err(Error::Domain(format!(
                "scale range [{m_min}, {m_max}] is empty"
            )));
        }
        Ok(DyadicGridId { shift_thirds, m_min, m_max })
    }

    /// Checks the range against a grid: the finest scale must not exceed the
    /// grid resolution and the coarsest must stay within the depth cap.
    pub fn check_scale(&self, grid: &Grid) -> Result<()> {
        let m_grid = grid.scale() as i32;
        if self.m_max > m_grid || m_grid - self.m_min > MAX_COARSENING {
            return Err(Error::ScaleRange {
                min: self.m_min,
                max: self.m_max,
                grid_scale: grid.scale(),
            });
        }
        Ok(())
    }

    /// The same family with the coarsest scale lowered to `m_min`.
    pub fn coarsened_to(&self, m_min: i32) -> Self {
        DyadicGridId { m_min: m_min.min(self.m_min), ..*self }
    }
}

/// The `3^n` shifts of dimension `dim` in lexicographic order.
pub fn all_shifts(dim: usize) -> Vec<[u8; 2]> {
    let mut out = Vec::new();
    let ty_range = if dim == 2 { 0..3u8 } else { 0..1u8 };
    for ty in ty_range {
        for tx in 0..3u8 {
            out.push([tx, ty]);
        }
    }
    out
}

/// Default scale range for a grid: the finest scale is the grid resolution
/// `M` (cube side `2^-M`, three cells), the coarsest makes the cube side at
/// least four times the box side.
pub fn default_scale_range(grid: &Grid) -> (i32, i32) {
    let m_grid = grid.scale() as i32;
    let max_cells = grid.max_cells_per_axis() as i64;
    // Smallest q >= -M with 3 * 2^(q + M) >= max_cells, i.e. cube side at
    // least the box side.
    let mut q = -m_grid;
    while 3i64 << ((q + m_grid) as u32) < max_cells {
        q += 1;
    }
    (-(q + 2), m_grid)
}

/// The family id covering a grid with the default scale range.
pub fn default_grid_id(grid: &Grid, shift_thirds: [u8; 2]) -> Result<DyadicGridId> {
    let (m_min, m_max) = default_scale_range(grid);
    DyadicGridId::new(shift_thirds, m_min, m_max)
}

/// Cube side at scale `m` in cell units: `3 * 2^(M - m)`.
pub fn side_units(grid: &Grid, m: i32) -> Result<i64> {
    let exp = grid.scale() as i32 - m;
    if !(0..=MAX_COARSENING).contains(&exp) {
        return Err(Error::ScaleRange { min: m, max: m, grid_scale: grid.scale() });
    }
    Ok(3i64 << exp as u32)
}

/// Shift offset at scale `m` along one axis, in cell units:
/// `(-1)^m * thirds * 2^(M - m)` (one third of the cube side, signed).
fn shift_offset_units(grid: &Grid, m: i32, thirds: u8) -> i64 {
    let third = 1i64 << (grid.scale() as i32 - m) as u32;
    let sign = if m.rem_euclid(2) == 0 { 1 } else { -1 };
    sign * i64::from(thirds) * third
}

/// All cubes of the family at scale `m` that intersect the grid box.
pub fn cubes_at_scale(grid: &Grid, id: &DyadicGridId, m: i32) -> Result<Vec<Cube>> {
    id.check_scale(grid)?;
    let side = side_units(grid, m)?;
    let o = grid.origin_units();
    let c = grid.cells_per_axis();
    let mut j_lo = [0i64; 2];
    let mut j_hi = [0i64; 2];
    for axis in 0..2 {
        if axis < grid.dim() {
            let d = shift_offset_units(grid, m, id.shift_thirds[axis]);
            // j*side + d + side > o  and  j*side + d < o + cells
            j_lo[axis] = (o[axis] - d - side).div_euclid(side) + 1;
            j_hi[axis] = (o[axis] + c[axis] as i64 - 1 - d).div_euclid(side);
        }
    }
    let mut cubes = Vec::new();
    for jy in j_lo[1]..=j_hi[1] {
        for jx in j_lo[0]..=j_hi[0] {
            let mut lower = [0i64; 2];
            lower[0] = jx * side + shift_offset_units(grid, m, id.shift_thirds[0]);
            lower[1] = if grid.dim() == 2 {
                jy * side + shift_offset_units(grid, m, id.shift_thirds[1])
            } else {
                o[1]
            };
            cubes.push(Cube { lower, side });
        }
    }
    Ok(cubes)
}

/// The `2^n` children of a family cube (half the side, corners at the
/// parent corner plus `{0, side/2}` per axis). Valid because the sign
/// alternation keeps child corners on the next scale's shifted lattice.
pub fn children(cube: &Cube, dim: usize) -> Vec<Cube> {
    debug_assert!(cube.side % 2 == 0, "family cube sides below scale M are even");
    let half = cube.side / 2;
    let mut out = Vec::with_capacity(1 << dim);
    let y_offsets: &[i64] = if dim == 2 { &[0, 1] } else { &[0] };
    for &oy in y_offsets {
        for ox in 0..2i64 {
            out.push(Cube {
                lower: [cube.lower[0] + ox * half, cube.lower[1] + oy * half],
                side: half,
            });
        }
    }
    out
}

/// Depth-first walk over all family cubes that intersect the box, coarsest
/// scale first. `visit(cube, m)` returns whether to descend into the cube's
/// children; scales run from `id.m_min` to `id.m_max`.
pub fn visit_cubes(
    grid: &Grid,
    id: &DyadicGridId,
    mut visit: impl FnMut(&Cube, i32) -> bool,
) -> Result<()> {
    fn rec(
        grid: &Grid,
        id: &DyadicGridId,
        cube: &Cube,
        m: i32,
        visit: &mut impl FnMut(&Cube, i32) -> bool,
    ) {
        if cube.cell_rect(grid).is_none() {
            return;
        }
        if visit(cube, m) && m < id.m_max {
            for child in children(cube, grid.dim()) {
                rec(grid, id, &child, m + 1, visit);
            }
        }
    }
    for root in cubes_at_scale(grid, id, id.m_min)? {
        rec(grid, id, &root, id.m_min, &mut visit);
    }
    Ok(())
}
