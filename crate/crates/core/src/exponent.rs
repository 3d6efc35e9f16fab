//! Variable exponents stored through their reciprocals.
//!
//! An exponent `p` with values in `[1, ∞]` is kept as `u = 1/p ∈ [0, 1]`
//! per cell (`u = 0` encodes `p = ∞`), plus a single constant reciprocal for
//! the unbounded tail outside the box. The reciprocal scale makes the
//! conjugate map an affine reflection `u ↦ 1 - u` and keeps every pointwise
//! combinator (min, max, convex mixes, deviations) a closed operation on
//! `[0, 1]`.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::grid::{require_same_grid, Cube, Grid, GridFunction};

/// A variable exponent on a grid, represented by reciprocals.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalExponent {
    grid: Grid,
    recip: Vec<f64>,
    tail: f64,
}

fn check_reciprocal(u: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&u) || u.is_nan() {
        return Err(Error::Domain(format!("{what} reciprocal {u} is outside [0, 1]")));
    }
    Ok(())
}

/// Converts an exponent value in `[1, ∞]` to its reciprocal.
pub fn reciprocal_of(p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(0.0);
    }
    if p < 1.0 || !p.is_finite() {
        return Err(Error::Domain(format!("exponent value {p} is outside [1, inf]")));
    }
    Ok(1.0 / p)
}

/// The exponent value `1/u` as an extended real (`u = 0` gives `∞`).
pub fn exponent_of(u: f64) -> ExtReal {
    if u == 0.0 {
        ExtReal::Infinite
    } else {
        ExtReal::finite(1.0 / u)
    }
}

/// Conjugate of an extended exponent value: `1/p + 1/p' = 1`.
pub fn conjugate_exponent(p: ExtReal) -> ExtReal {
    match p {
        ExtReal::Infinite => ExtReal::finite(1.0),
        ExtReal::Finite(1.0) => ExtReal::Infinite,
        ExtReal::Finite(v) => ExtReal::finite(v / (v - 1.0)),
    }
}

impl ReciprocalExponent {
    /// Wraps per-cell reciprocals and a tail reciprocal, all in `[0, 1]`.
    pub fn from_reciprocals(grid: Grid, recip: Vec<f64>, tail: f64) -> Result<Self> {
        if recip.len() != grid.cell_count() {
            return Err(Error::Domain(format!(
                "expected {} reciprocals, got {}",
                grid.cell_count(),
                recip.len()
            )));
        }
        for &u in &recip {
            check_reciprocal(u, "cell")?;
        }
        check_reciprocal(tail, "tail")?;
        Ok(ReciprocalExponent { grid, recip, tail })
    }

    /// Constant exponent `p ∈ [1, ∞]` on box and tail.
    pub fn constant(grid: Grid, p: f64) -> Result<Self> {
        let u = reciprocal_of(p)?;
        Ok(ReciprocalExponent { grid, recip: vec![u; grid.cell_count()], tail: u })
    }

    /// Constant extended exponent on box and tail.
    pub fn constant_ext(grid: Grid, p: ExtReal) -> Result<Self> {
        match p {
            ExtReal::Infinite => Self::constant(grid, f64::INFINITY),
            ExtReal::Finite(v) => Self::constant(grid, v),
        }
    }

    /// Base exponent overridden on pairwise disjoint cubes. The tail keeps
    /// the base value.
    pub fn step(grid: Grid, base_p: f64, regions: &[(Cube, f64)]) -> Result<Self> {
        let base_u = reciprocal_of(base_p)?;
        let mut recip = vec![base_u; grid.cell_count()];
        let mut claimed = vec![false; grid.cell_count()];
        for (cube, p) in regions {
            let u = reciprocal_of(*p)?;
            if let Some(rect) = cube.cell_rect(&grid) {
                for idx in rect.indices(&grid).collect::<Vec<_>>() {
                    if claimed[idx] {
                        return Err(Error::Domain(
                            "step exponent regions overlap".to_string(),
                        ));
                    }
                    claimed[idx] = true;
                    recip[idx] = u;
                }
            }
        }
        Ok(ReciprocalExponent { grid, recip, tail: base_u })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn reciprocals(&self) -> &[f64] {
        &self.recip
    }

    pub fn tail_reciprocal(&self) -> f64 {
        self.tail
    }

    /// Reciprocal at a linear cell index.
    pub fn reciprocal_at(&self, idx: usize) -> f64 {
        self.recip[idx]
    }

    /// Exponent value at a cell, `∞` when the reciprocal vanishes.
    pub fn exponent_at(&self, idx: usize) -> ExtReal {
        exponent_of(self.recip[idx])
    }

    /// Essential bounds `(p⁻, p⁺)` over box and tail.
    pub fn essential_bounds(&self) -> (ExtReal, ExtReal) {
        let mut u_min = self.tail;
        let mut u_max = self.tail;
        for &u in &self.recip {
            u_min = u_min.min(u);
            u_max = u_max.max(u);
        }
        (exponent_of(u_max), exponent_of(u_min))
    }

    /// `true` when no cell (nor the tail) carries exponent `∞`.
    pub fn is_everywhere_finite(&self) -> bool {
        self.tail > 0.0 && self.recip.iter().all(|&u| u > 0.0)
    }

    /// Conjugate exponent: reciprocals map through `u ↦ 1 - u`.
    pub fn dual(&self) -> Self {
        ReciprocalExponent {
            grid: self.grid,
            recip: self.recip.iter().map(|u| 1.0 - u).collect(),
            tail: 1.0 - self.tail,
        }
    }

    /// Deviation exponent: reciprocals `|u - u_inf|`; encodes the local
    /// distance to a constant reference exponent.
    pub fn deviation(&self, u_inf: f64) -> Result<Self> {
        check_reciprocal(u_inf, "reference")?;
        Ok(ReciprocalExponent {
            grid: self.grid,
            recip: self.recip.iter().map(|u| (u - u_inf).abs()).collect(),
            tail: (self.tail - u_inf).abs(),
        })
    }

    /// Pointwise `max(p, p_ref)` against a constant: reciprocal `min(u, u_inf)`.
    pub fn max_with_constant(&self, u_inf: f64) -> Result<Self> {
        check_reciprocal(u_inf, "reference")?;
        Ok(ReciprocalExponent {
            grid: self.grid,
            recip: self.recip.iter().map(|u| u.min(u_inf)).collect(),
            tail: self.tail.min(u_inf),
        })
    }

    /// Pointwise `min(p, p_ref)` against a constant: reciprocal `max(u, u_inf)`.
    pub fn min_with_constant(&self, u_inf: f64) -> Result<Self> {
        check_reciprocal(u_inf, "reference")?;
        Ok(ReciprocalExponent {
            grid: self.grid,
            recip: self.recip.iter().map(|u| u.max(u_inf)).collect(),
            tail: self.tail.max(u_inf),
        })
    }

    /// Exponent scaled by `s ≥ 1`: `p ↦ s p`, i.e. reciprocal `u / s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if s < 1.0 || !s.is_finite() {
            return Err(Error::Domain(format!("power {s} must lie in [1, inf)")));
        }
        Ok(ReciprocalExponent {
            grid: self.grid,
            recip: self.recip.iter().map(|u| u / s).collect(),
            tail: self.tail / s,
        })
    }

    /// Reciprocal-convex interpolation `1/p_θ = (1-θ)/p₀ + θ/p₁`.
    pub fn interpolated(p0: &Self, p1: &Self, theta: f64) -> Result<Self> {
        require_same_grid(&p0.grid, &p1.grid, "exponent interpolation")?;
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta {theta} is outside [0, 1]")));
        }
        // Convex combinations of values in [0, 1] stay in [0, 1] up to a final
        // rounding; clamp guards the upper edge.
        let mix = |a: f64, b: f64| ((1.0 - theta) * a + theta * b).clamp(0.0, 1.0);
        Ok(ReciprocalExponent {
            grid: p0.grid,
            recip: p0.recip.iter().zip(&p1.recip).map(|(&a, &b)| mix(a, b)).collect(),
            tail: mix(p0.tail, p1.tail),
        })
    }

    /// Reciprocal sum for the product Hölder exponent: requires
    /// `1/p + 1/q ≤ 1` everywhere (box and tail).
    pub fn hoelder_sum(p: &Self, q: &Self) -> Result<Self> {
        require_same_grid(&p.grid, &q.grid, "Hoelder exponent sum")?;
        let mut recip = Vec::with_capacity(p.recip.len());
        for (idx, (&a, &b)) in p.recip.iter().zip(&q.recip).enumerate() {
            let s = a + b;
            if s > 1.0 {
                return Err(Error::Precondition(format!(
                    "reciprocal sum {s} > 1 at cell {idx}"
                )));
            }
            recip.push(s);
        }
        let tail = p.tail + q.tail;
        if tail > 1.0 {
            return Err(Error::Precondition(format!("tail reciprocal sum {tail} > 1")));
        }
        Ok(ReciprocalExponent { grid: p.grid, recip, tail })
    }

    /// Applies a reciprocal map cell-wise and to the tail; the image must
    /// stay in `[0, 1]`.
    pub fn map_reciprocals(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let recip: Vec<f64> = self.recip.iter().map(|&u| f(u)).collect();
        Self::from_reciprocals(self.grid, recip, f(self.tail))
    }

    /// `true` when `self ≤ other` as exponents everywhere (reciprocals `≥`),
    /// including the tail.
    pub fn exponent_leq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.tail >= other.tail
            && self.recip.iter().zip(&other.recip).all(|(a, b)| a >= b)
    }

    /// Largest reciprocal over the cells of `cube ∩ box` (ignores the tail);
    /// `None` when the cube misses the box.
    pub fn max_reciprocal_on(&self, cube: &Cube) -> Option<f64> {
        let rect = cube.cell_rect(&self.grid)?;
        Some(rect.indices(&self.grid).fold(0.0f64, |m, idx| m.max(self.recip[idx])))
    }

    /// Smallest reciprocal over the cells of `cube ∩ box` (ignores the tail).
    pub fn min_reciprocal_on(&self, cube: &Cube) -> Option<f64> {
        let rect = cube.cell_rect(&self.grid)?;
        Some(rect.indices(&self.grid).fold(1.0f64, |m, idx| m.min(self.recip[idx])))
    }

    /// Sanity check used by binary operations.
    pub fn check_grid(&self, f: &GridFunction, what: &'static str) -> Result<()> {
        require_same_grid(&self.grid, f.grid(), what)
    }
}
