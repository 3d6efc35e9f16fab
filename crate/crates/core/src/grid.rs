//! Discretized boxes in dimension 1 or 2.
//!
//! A grid is an axis-aligned box partitioned into congruent cells of side
//! `h = 2^-M / 3`. The factor 3 makes every third-shifted dyadic cube with
//! scale coarser than `M` land exactly on cell corners, so all geometric
//! predicates (alignment, containment, measures) reduce to integer
//! arithmetic in units of `h`. Functions are piecewise constant on cells and
//! vanish identically outside the box.

use crate::error::{Error, Result};

/// Hard cap on the resolution exponent `M`, chosen so cell-volume
/// denominators `(3 * 2^M)^dim` stay exactly representable in `f64`.
pub const MAX_SCALE: u32 = 24;

/// Hard cap on the total number of cells.
pub const MAX_CELLS: usize = 1 << 26;

/// Relative slack allowed when snapping a real coordinate to the lattice.
const ALIGN_TOL: f64 = 1e-9;

/// A uniform grid: dimension, resolution exponent, box placement.
///
/// All coordinates are stored as integer multiples of the cell size, so the
/// type is small and `Copy`; functions carry their grid by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: usize,
    scale: u32,
    origin: [i64; 2],
    cells: [usize; 2],
}

/// Converts a real coordinate to units of `h = 2^-M / 3`, requiring it to
/// sit on the lattice up to a tiny relative slack.
fn to_units(value: f64, scale: u32) -> Result<i64> {
    let h = cell_size(scale);
    let t = value * 3.0 * (1u64 << scale) as f64;
    let r = t.round();
    if !t.is_finite() || (t - r).abs() > ALIGN_TOL * (1.0 + t.abs()) {
        return Err(Error::Misaligned { value, h });
    }
    Ok(r as i64)
}

/// Cell side length for resolution exponent `M`.
pub fn cell_size(scale: u32) -> f64 {
    1.0 / (3.0 * (1u64 << scale) as f64)
}

impl Grid {
    /// Builds a grid of dimension `dim` (1 or 2) and resolution `M = scale`,
    /// with the given lower corner and cell counts per axis. The corner must
    /// be aligned to the cell lattice.
    pub fn new(dim: usize, scale: u32, origin: &[f64], cells: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if scale > MAX_SCALE {
            return Err(Error::Domain(format!("scale {scale} exceeds maximum {MAX_SCALE}")));
        }
        if origin.len() != dim || cells.len() != dim {
            return Err(Error::Domain(format!(
                "expected {dim} origin coordinates and cell counts, got {} and {}",
                origin.len(),
                cells.len()
            )));
        }
        let mut o = [0i64; 2];
        let mut c = [1usize; 2];
        for axis in 0..dim {
            if cells[axis] == 0 {
                return Err(Error::Domain(format!("axis {axis} has zero cells")));
            }
            o[axis] = to_units(origin[axis], scale)?;
            c[axis] = cells[axis];
        }
        let total = c[0].checked_mul(c[1]).filter(|&t| t <= MAX_CELLS);
        if total.is_none() {
            return Err(Error::Domain(format!("grid of {}x{} cells is too large", c[0], c[1])));
        }
        Ok(Grid { dim, scale, origin: o, cells: c })
    }

    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Resolution exponent `M`; the cell size is `2^-M / 3`.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Cell side length `h`.
    pub fn h(&self) -> f64 {
        cell_size(self.scale)
    }

    /// Lower corner of the box in units of `h`.
    pub fn origin_units(&self) -> [i64; 2] {
        self.origin
    }

    /// Cells per axis (the second entry is 1 in dimension 1).
    pub fn cells_per_axis(&self) -> [usize; 2] {
        self.cells
    }

    /// Total number of cells.
    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Largest cell count over the axes.
    pub fn max_cells_per_axis(&self) -> usize {
        self.cells[0].max(self.cells[1])
    }

    /// `(3 * 2^M)^dim`, the exact denominator turning cell counts into
    /// measures: a region of `k` cells has measure `k / denominator`.
    pub fn volume_denominator(&self) -> f64 {
        let q = (3u64 << self.scale) as f64;
        if self.dim == 1 {
            q
        } else {
            q * q
        }
    }

    /// Measure of the whole box.
    pub fn box_volume(&self) -> f64 {
        (self.cell_count() as f64) / self.volume_denominator()
    }

    /// Linear index of the cell with local coordinates `(ix, iy)`.
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.cells[0] && iy < self.cells[1]);
        iy * self.cells[0] + ix
    }

    /// Local coordinates of a linear cell index.
    pub fn cell_coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells[0], idx / self.cells[0])
    }

    /// Center of a cell in real coordinates.
    pub fn cell_center(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.cell_coords(idx);
        let h = self.h();
        [
            (self.origin[0] + ix as i64) as f64 * h + 0.5 * h,
            (self.origin[1] + iy as i64) as f64 * h + 0.5 * h,
        ]
    }

    /// Lower corner of a cell in units of `h`.
    pub fn cell_corner_units(&self, idx: usize) -> [i64; 2] {
        let (ix, iy) = self.cell_coords(idx);
        [self.origin[0] + ix as i64, self.origin[1] + iy as i64]
    }

    /// The smallest cube anchored at the origin corner that covers the box
    /// (dimension 1: the box itself; non-square 2D boxes: may stick out).
    pub fn box_cube(&self) -> Cube {
        Cube { lower: self.origin, side: self.max_cells_per_axis().max(1) as i64 }
    }

    fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Requires two grids to be identical; used by all binary operations.
pub fn require_same_grid(a: &Grid, b: &Grid, what: &'static str) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(what))
    }
}

/// An axis-aligned cube with corners on the cell lattice. In dimension 1
/// this is an interval; the second coordinate tracks the (single-cell) dummy
/// axis of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    /// Lower corner in units of `h` (absolute, not grid-relative).
    pub lower: [i64; 2],
    /// Side length in units of `h`; positive.
    pub side: i64,
}

/// Local cell-index ranges of a box region; `hi` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl CellRect {
    /// Number of cells in the rectangle.
    pub fn cell_count(&self) -> usize {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    /// Row-major iteration over linear cell indices.
    pub fn indices<'a>(&'a self, grid: &'a Grid) -> impl Iterator<Item = usize> + 'a {
        let nx = grid.cells_per_axis()[0];
        (self.lo[1]..self.hi[1])
            .flat_map(move |iy| (self.lo[0]..self.hi[0]).map(move |ix| iy * nx + ix))
    }
}

impl Cube {
    /// Builds a cube directly from lattice units.
    pub fn from_units(lower: [i64; 2], side: i64) -> Result<Self> {
        if side <= 0 {
            return Err(Error::Domain(format!("cube side {side} must be positive")));
        }
        Ok(Cube { lower, side })
    }

    /// Builds a cube from real coordinates, which must be aligned to the
    /// grid's cell lattice.
    pub fn from_coords(grid: &Grid, lower: &[f64], side: f64) -> Result<Self> {
        if lower.len() != grid.dim() {
            return Err(Error::Domain(format!(
                "expected {} cube coordinates, got {}",
                grid.dim(),
                lower.len()
            )));
        }
        if side <= 0.0 || side.is_nan() {
            return Err(Error::Domain(format!("cube side {side} must be positive")));
        }
        let side_units = to_units(side, grid.scale())?;
        if side_units <= 0 {
            return Err(Error::Domain(format!("cube side {side} is below the cell size")));
        }
        let mut lo = [grid.origin_units()[1], grid.origin_units()[1]];
        lo[0] = to_units(lower[0], grid.scale())?;
        if grid.dim() == 2 {
            lo[1] = to_units(lower[1], grid.scale())?;
        } else {
            lo[1] = grid.origin_units()[1];
        }
        Ok(Cube { lower: lo, side: side_units })
    }

    /// Side length in real units.
    pub fn side_len(&self, grid: &Grid) -> f64 {
        self.side as f64 * grid.h()
    }

    /// Measure `|Q| = (side * h)^dim`, computed as an exact integer ratio.
    pub fn volume(&self, grid: &Grid) -> f64 {
        let s = self.side as f64;
        let sn = if grid.dim() == 1 { s } else { s * s };
        sn / grid.volume_denominator()
    }

    /// `side^dim` as a float (the denominator of cube averages).
    pub fn cell_denominator(&self, grid: &Grid) -> f64 {
        let s = self.side as f64;
        if grid.dim() == 1 {
            s
        } else {
            s * s
        }
    }

    /// Whether the cube lies entirely inside the grid box.
    pub fn is_inside(&self, grid: &Grid) -> bool {
        let o = grid.origin_units();
        let c = grid.cells_per_axis();
        for axis in 0..grid.dim() {
            if self.lower[axis] < o[axis]
                || self.lower[axis] + self.side > o[axis] + c[axis] as i64
            {
                return false;
            }
        }
        true
    }

    /// Local cell ranges of the intersection with the grid box, or `None`
    /// if the cube misses the box entirely.
    pub fn cell_rect(&self, grid: &Grid) -> Option<CellRect> {
        let o = grid.origin_units();
        let c = grid.cells_per_axis();
        let mut lo = [0usize; 2];
        let mut hi = [1usize; 2];
        for axis in 0..2 {
            let (q_lo, q_hi) = if axis < grid.dim() {
                (self.lower[axis], self.lower[axis] + self.side)
            } else {
                // Dummy axis in dimension 1: the cube spans it entirely.
                (o[axis], o[axis] + 1)
            };
            let lo_units = q_lo.max(o[axis]);
            let hi_units = q_hi.min(o[axis] + c[axis] as i64);
            if lo_units >= hi_units {
                return None;
            }
            lo[axis] = (lo_units - o[axis]) as usize;
            hi[axis] = (hi_units - o[axis]) as usize;
        }
        Some(CellRect { lo, hi })
    }
}

/// A function that is constant on every grid cell and zero outside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps per-cell values (row-major); all values must be finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Domain(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(GridFunction { grid, values })
    }

    /// The zero function.
    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.cell_count()] }
    }

    /// The constant function `value` on the box.
    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.cell_count()])
    }

    /// Builds a function by sampling `f` at cell centers.
    pub fn from_cell_centers(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count())
            .map(|idx| f(&grid.cell_center(idx)[..grid.dim()]))
            .collect();
        Self::new(grid, values)
    }

    /// Indicator of `cube ∩ box`.
    pub fn indicator(grid: Grid, cube: &Cube) -> Self {
        let mut out = Self::zeros(grid);
        if let Some(rect) = cube.cell_rect(&grid) {
            for idx in rect.indices(&grid).collect::<Vec<_>>() {
                out.values[idx] = 1.0;
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `∫ f dx` over the box: cell sum divided by the exact volume
    /// denominator (a single final rounding).
    pub fn integral(&self) -> f64 {
        let sum: f64 = self.values.iter().sum();
        sum / self.grid.volume_denominator()
    }

    /// `∫ |f| dx`.
    pub fn abs_integral(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.abs()).sum();
        sum / self.grid.volume_denominator()
    }

    /// Largest absolute cell value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `true` if every cell vanishes.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Pointwise scaling by a finite factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Pointwise product with another function on the same grid.
    pub fn multiply(&self, other: &GridFunction) -> Result<Self> {
        require_same_grid(&self.grid, &other.grid, "pointwise product")?;
        Self::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        )
    }

    /// Pointwise sum with another function on the same grid.
    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        require_same_grid(&self.grid, &other.grid, "pointwise sum")?;
        Self::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    /// Keeps values inside `cube ∩ box`, zeroing the rest.
    pub fn restricted_to(&self, cube: &Cube) -> Self {
        let mut out = Self::zeros(self.grid);
        if let Some(rect) = cube.cell_rect(&self.grid) {
            for idx in rect.indices(&self.grid).collect::<Vec<_>>() {
                out.values[idx] = self.values[idx];
            }
        }
        out
    }

    /// Splits at a threshold: returns (above, at-or-below) parts, where
    /// `above` keeps cells with `|f| > threshold`.
    pub fn split_at(&self, threshold: f64) -> (Self, Self) {
        let mut above = Self::zeros(self.grid);
        let mut below = Self::zeros(self.grid);
        for (idx, &v) in self.values.iter().enumerate() {
            if v.abs() > threshold {
                above.values[idx] = v;
            } else {
                below.values[idx] = v;
            }
        }
        (above, below)
    }

    /// Average of `f` over `cube` (counting the outside of the box as 0):
    /// cell sum over the intersection divided by `side^dim`.
    pub fn cube_average(&self, cube: &Cube) -> f64 {
        let sum = match cube.cell_rect(&self.grid) {
            Some(rect) => rect.indices(&self.grid).map(|idx| self.values[idx]).sum::<f64>(),
            None => 0.0,
        };
        sum / cube.cell_denominator(&self.grid)
    }
}

/// Summed-area table over the box cells: rectangle sums in O(1).
#[derive(Debug, Clone)]
pub(crate) struct PrefixSums {
    nx: usize,
    ny: usize,
    table: Vec<f64>,
}

impl PrefixSums {
    pub(crate) fn new(f: &GridFunction) -> Self {
        let [nx, ny] = f.grid().cells_per_axis();
        let mut table = vec![0.0; (nx + 1) * (ny + 1)];
        for iy in 0..ny {
            let mut row = 0.0;
            for ix in 0..nx {
                row += f.values()[iy * nx + ix];
                table[(iy + 1) * (nx + 1) + ix + 1] = table[iy * (nx + 1) + ix + 1] + row;
            }
        }
        PrefixSums { nx, ny, table }
    }

    /// Sum over local cells `[x0, x1) x [y0, y1)` clamped to the box.
    pub(crate) fn rect_sum(&self, x0: i64, x1: i64, y0: i64, y1: i64) -> f64 {
        let x0 = x0.clamp(0, self.nx as i64) as usize;
        let x1 = x1.clamp(0, self.nx as i64) as usize;
        let y0 = y0.clamp(0, self.ny as i64) as usize;
        let y1 = y1.clamp(0, self.ny as i64) as usize;
        if x0 >= x1 || y0 >= y1 {
            return 0.0;
        }
        let w = self.nx + 1;
        self.table[y1 * w + x1] + self.table[y0 * w + x0]
            - self.table[y0 * w + x1]
            - self.table[y1 * w + x0]
    }
}
