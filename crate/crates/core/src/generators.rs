//! Seeded random instance generators for test suites.
//!
//! All randomness flows through a `ChaCha8` stream cipher seeded explicitly,
//! so every suite is reproducible from its printed seed. Sampled numbers are
//! drawn from dyadic lattices: function values are multiples of `2⁻¹⁰`,
//! exponent reciprocals multiples of `2⁻²⁰`. On those lattices the conjugate
//! map `u ↦ 1 - u`, doubling, and halving are all exact, which lets equality
//! assertions in the suites stay bitwise.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exponent::ReciprocalExponent;
use crate::grid::{cell_size, Cube, Grid, GridFunction};
use crate::modular::ModularKind;
use crate::norm::luxemburg_norm;

/// The RNG used by every suite.
pub type SeededRng = ChaCha8Rng;

/// Creates the deterministic RNG for a given seed.
pub fn rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Uniform draw from the dyadic lattice `k / 2^pow` restricted to `[lo, hi]`.
pub fn dyadic_in(rng: &mut SeededRng, lo: f64, hi: f64, pow: u32) -> f64 {
    let scale = f64::powi(2.0, pow as i32);
    let k_lo = (lo * scale).ceil() as i64;
    let k_hi = (hi * scale).floor() as i64;
    let k = if k_lo >= k_hi { k_lo } else { rng.gen_range(k_lo..=k_hi) };
    k as f64 / scale
}

/// Random grid: dimension fixed by the caller, random refinement scale up to
/// `max_scale`, random cell counts up to `max_cells_per_axis`, random aligned
/// origin within one unit box of zero.
pub fn random_grid(
    rng: &mut SeededRng,
    dim: usize,
    max_scale: u32,
    max_cells_per_axis: usize,
) -> Grid {
    let scale = rng.gen_range(0..=max_scale);
    let h = cell_size(scale);
    let units = 3i64 << scale;
    let mut origin = [0.0f64; 2];
    let mut cells = [1usize; 2];
    for axis in 0..dim {
        origin[axis] = rng.gen_range(-units..=units) as f64 * h;
        cells[axis] = rng.gen_range(1..=max_cells_per_axis);
    }
    Grid::new(dim, scale, &origin[..dim], &cells[..dim]).expect("generated grid is valid")
}

/// Random function with values on the `2⁻¹⁰` lattice in `[-max_abs, max_abs]`.
pub fn random_function(rng: &mut SeededRng, grid: Grid, max_abs: f64) -> GridFunction {
    let values = (0..grid.cell_count()).map(|_| dyadic_in(rng, -max_abs, max_abs, 10)).collect();
    GridFunction::new(grid, values).expect("dyadic values are finite")
}

/// Random nonnegative function with values on the `2⁻¹⁰` lattice in `[0, max]`.
pub fn random_nonneg_function(rng: &mut SeededRng, grid: Grid, max: f64) -> GridFunction {
    let values = (0..grid.cell_count()).map(|_| dyadic_in(rng, 0.0, max, 10)).collect();
    GridFunction::new(grid, values).expect("dyadic values are finite")
}

/// Random exponent with reciprocals on the `2⁻²⁰` lattice inside
/// `[u_lo, u_hi]`; the tail reciprocal is drawn from the same range.
/// `u_lo = 0` permits `p = ∞` cells.
pub fn random_exponent(
    rng: &mut SeededRng,
    grid: Grid,
    u_lo: f64,
    u_hi: f64,
) -> ReciprocalExponent {
    let recip: Vec<f64> = (0..grid.cell_count()).map(|_| dyadic_in(rng, u_lo, u_hi, 20)).collect();
    let tail = dyadic_in(rng, u_lo, u_hi, 20);
    ReciprocalExponent::from_reciprocals(grid, recip, tail).expect("lattice reciprocals are valid")
}

/// Random exponent that stays finite everywhere: `p ∈ [p_hi⁻¹-lattice ... ]`,
/// i.e. reciprocals in `[1/p_hi, 1]`.
pub fn random_finite_exponent(
    rng: &mut SeededRng,
    grid: Grid,
    p_hi: f64,
) -> ReciprocalExponent {
    random_exponent(rng, grid, 1.0 / p_hi, 1.0)
}

/// Random exponent with tail reciprocal exactly `u_inf` and cell reciprocals
/// scattered around it; suitable for finite-Nekvinda-constant suites.
pub fn random_tail_matched_exponent(
    rng: &mut SeededRng,
    grid: Grid,
    u_inf: f64,
    spread: f64,
) -> ReciprocalExponent {
    let lo = (u_inf - spread).max(0.0);
    let hi = (u_inf + spread).min(1.0);
    let recip: Vec<f64> = (0..grid.cell_count())
        .map(|_| if rng.gen_bool(0.5) { u_inf } else { dyadic_in(rng, lo, hi, 20) })
        .collect();
    ReciprocalExponent::from_reciprocals(grid, recip, u_inf).expect("valid reciprocals")
}

/// Deterministic exponent with a logarithmic modulus of continuity:
/// `u(x) = clamp(u_base + amplitude / ln(e + 1/|x - x₀|))`, evaluated at cell
/// centers, with tail reciprocal `u_base`.
pub fn log_modulus_exponent(
    grid: Grid,
    u_base: f64,
    amplitude: f64,
    x0: &[f64],
) -> Result<ReciprocalExponent> {
    let recip: Vec<f64> = (0..grid.cell_count())
        .map(|idx| {
            let c = grid.cell_center(idx);
            let mut dist2 = 0.0;
            for axis in 0..grid.dim() {
                let d = c[axis] - x0[axis];
                dist2 += d * d;
            }
            let dist = dist2.sqrt();
            let bump = amplitude / (std::f64::consts::E + 1.0 / dist.max(1e-300)).ln();
            (u_base + bump).clamp(0.0, 1.0)
        })
        .collect();
    ReciprocalExponent::from_reciprocals(grid, recip, u_base)
}

/// Random cell-aligned cube inside the box.
pub fn random_cube(rng: &mut SeededRng, grid: &Grid) -> Cube {
    let c = grid.cells_per_axis();
    let max_side = if grid.dim() == 2 { c[0].min(c[1]) } else { c[0] };
    let side = rng.gen_range(1..=max_side.max(1) as i64);
    let o = grid.origin_units();
    let mut lower = [o[1], o[1]];
    for axis in 0..grid.dim() {
        let slack = c[axis] as i64 - side;
        lower[axis] = o[axis] + rng.gen_range(0..=slack.max(0));
    }
    Cube::from_units(lower, side).expect("generated cube is valid")
}

/// Random cell-aligned cube inside `outer` (which must itself be inside the
/// box for the result to be inside the box).
pub fn random_subcube(rng: &mut SeededRng, grid: &Grid, outer: &Cube) -> Cube {
    let side = rng.gen_range(1..=outer.side.max(1));
    let mut lower = [0i64; 2];
    let slack = (outer.side - side).max(0);
    for (l, &base) in lower.iter_mut().zip(&outer.lower).take(grid.dim()) {
        *l = base + rng.gen_range(0..=slack);
    }
    if grid.dim() == 1 {
        lower[1] = 0;
    }
    Cube::from_units(lower, side).expect("generated cube is valid")
}

/// Random subset of the cells of `cube ∩ box` containing at least half of
/// them (by count); returns linear cell indices.
pub fn random_majority_subset(
    rng: &mut SeededRng,
    grid: &Grid,
    cube: &Cube,
) -> Vec<usize> {
    let rect = match cube.cell_rect(grid) {
        Some(r) => r,
        None => return Vec::new(),
    };
    let mut cells: Vec<usize> = rect.indices(grid).collect();
    cells.shuffle(rng);
    let n = cells.len();
    let take = rng.gen_range(n.div_ceil(2)..=n);
    let mut subset = cells[..take].to_vec();
    subset.sort_unstable();
    subset
}

/// Rescales `f` by its own Luxemburg norm so the result lies in the closed
/// unit ball: dividing by the feasible bracket end reproduces exactly the
/// ratios the bisection certified, hence `modular(result) ≤ 1`.
pub fn normalized_to_unit_ball(
    f: &GridFunction,
    p: &ReciprocalExponent,
    kind: ModularKind,
) -> Result<GridFunction> {
    if f.is_zero() {
        return Ok(f.clone());
    }
    let norm = luxemburg_norm(kind, f, p, 1e-10)?.finite();
    let values = f.values().iter().map(|&v| v / norm).collect();
    GridFunction::new(*f.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{modular, ModularKind};

    #[test]
    fn same_seed_reproduces_everything() {
        let draw = |seed: u64| {
            let mut r = rng(seed);
            let g = random_grid(&mut r, 2, 3, 6);
            let f = random_function(&mut r, g, 4.0);
            let p = random_exponent(&mut r, g, 0.0, 1.0);
            let q = random_cube(&mut r, &g);
            (g, f.values().to_vec(), p.reciprocals().to_vec(), q)
        };
        let a = draw(42);
        let b = draw(42);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
        assert_eq!(a.3.lower, b.3.lower);
        let c = draw(43);
        assert!(a.1 != c.1 || a.2 != c.2);
    }

    #[test]
    fn dyadic_draws_stay_on_lattice_and_in_range() {
        let mut r = rng(7);
        for _ in 0..200 {
            let v = dyadic_in(&mut r, -3.0, 5.0, 10);
            assert!((-3.0..=5.0).contains(&v));
            assert_eq!(v * 1024.0, (v * 1024.0).round());
        }
    }

    #[test]
    fn subcubes_stay_inside_outer_cube() {
        let mut r = rng(11);
        for _ in 0..100 {
            let g = random_grid(&mut r, 2, 2, 8);
            let outer = random_cube(&mut r, &g);
            let inner = random_subcube(&mut r, &g, &outer);
            for axis in 0..2 {
                assert!(inner.lower[axis] >= outer.lower[axis]);
                assert!(inner.lower[axis] + inner.side <= outer.lower[axis] + outer.side);
            }
        }
    }

    #[test]
    fn majority_subset_covers_at_least_half() {
        let mut r = rng(13);
        let g = random_grid(&mut r, 1, 2, 12);
        let q = random_cube(&mut r, &g);
        let total = q.cell_rect(&g).unwrap().cell_count();
        for _ in 0..50 {
            let subset = random_majority_subset(&mut r, &g, &q);
            assert!(2 * subset.len() >= total);
        }
    }

    #[test]
    fn normalization_lands_in_the_unit_ball_exactly() {
        let mut r = rng(17);
        for _ in 0..25 {
            let g = random_grid(&mut r, 1, 3, 10);
            let f = random_function(&mut r, g, 8.0);
            let p = random_exponent(&mut r, g, 0.0, 1.0);
            let unit = normalized_to_unit_ball(&f, &p, ModularKind::Rho).unwrap();
            if !unit.is_zero() {
                assert!(modular(ModularKind::Rho, &unit, &p).unwrap().le(1.0));
            }
        }
    }

    #[test]
    fn log_modulus_exponent_stays_valid() {
        let g = Grid::new(1, 4, &[0.0], &[48]).unwrap();
        let p = log_modulus_exponent(g, 0.25, 0.5, &[0.5]).unwrap();
        assert!(p.reciprocals().iter().all(|&u| (0.0..=1.0).contains(&u)));
        assert_eq!(p.tail_reciprocal(), 0.25);
    }
}
