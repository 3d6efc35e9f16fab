//! Maximal operators.
//!
//! The cube maximal function takes, per cell, the best `|f|`-average over
//! every cell-aligned cube containing the cell, with sides up to three box
//! sides (cubes may stick out of the box; outside the box `f` counts as 0).
//! A summed-area table gives each cube average in constant time and a
//! monotone-deque sliding maximum turns "best cube of side `s` covering the
//! cell" into two linear passes, so the whole operator is exhaustive yet
//! fast. The dyadic variant restricts the supremum to one shifted dyadic
//! family; three shifts per axis dominate the full operator up to `6^n`.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::calculus::InequalityReport;
use crate::dyadic::{all_shifts, visit_cubes, DyadicGridId};
use crate::error::{Error, Result};
use crate::exponent::ReciprocalExponent;
use crate::grid::{Grid, GridFunction, PrefixSums};
use crate::modular::ModularKind;
use crate::norm::{luxemburg_norm, DEFAULT_REL_TOL};

/// Relative slack for pointwise float comparisons between independently
/// rounded exact quantities.
const POINTWISE_SLACK: f64 = 1e-12;

/// `side^dim` as the float divisor of window sums; shared by every average
/// in this module so equal cubes produce bit-identical averages.
pub(crate) fn window_denominator(grid: &Grid, side: i64) -> f64 {
    let s = side as f64;
    if grid.dim() == 1 {
        s
    } else {
        s * s
    }
}

/// Average of the prefix-summed function over `cube`, counting the part
/// outside the box as 0. One shared expression so that every consumer
/// (dyadic maximal, level selection, averaging operators) sees bit-identical
/// values for the same cube.
pub(crate) fn family_cube_average(
    ps: &PrefixSums,
    grid: &Grid,
    origin: &[i64; 2],
    cube: &crate::grid::Cube,
) -> f64 {
    let x0 = cube.lower[0] - origin[0];
    let (y0, y1) = if grid.dim() == 2 {
        (cube.lower[1] - origin[1], cube.lower[1] - origin[1] + cube.side)
    } else {
        (0, 1)
    };
    ps.rect_sum(x0, x0 + cube.side, y0, y1) / window_denominator(grid, cube.side)
}

/// `out[c] = max(v[c..c + window])` for `c < out_len`, via monotone deque.
fn sliding_max(v: &[f64], window: usize, out_len: usize) -> Vec<f64> {
    debug_assert_eq!(v.len(), out_len + window - 1);
    let mut out = Vec::with_capacity(out_len);
    let mut dq: VecDeque<usize> = VecDeque::new();
    for i in 0..v.len() {
        while dq.back().is_some_and(|&b| v[b] <= v[i]) {
            dq.pop_back();
        }
        dq.push_back(i);
        if i + 1 >= window {
            let c = i + 1 - window;
            while dq.front().is_some_and(|&f| f < c) {
                dq.pop_front();
            }
            out.push(v[dq[0]]);
        }
    }
    out
}

/// Best window average of side `s` covering each cell. Window corners range
/// over every placement containing at least one box cell; the parts outside
/// the box contribute 0 to the sum but still count in the denominator.
fn best_average_for_side(ps: &PrefixSums, grid: &Grid, s: usize) -> Vec<f64> {
    let [nx, ny] = grid.cells_per_axis();
    let denom = window_denominator(grid, s as i64);
    let wx = nx + s - 1;
    if grid.dim() == 1 {
        let w: Vec<f64> = (0..wx)
            .map(|ix| {
                let px = ix as i64 - (s as i64 - 1);
                ps.rect_sum(px, px + s as i64, 0, 1) / denom
            })
            .collect();
        return sliding_max(&w, s, nx);
    }
    let wy = ny + s - 1;
    // Row pass: best over x-placements for each y-placement.
    let mut rows: Vec<f64> = Vec::with_capacity(wy * nx);
    let mut w = vec![0.0; wx];
    for iy in 0..wy {
        let py = iy as i64 - (s as i64 - 1);
        for (ix, slot) in w.iter_mut().enumerate() {
            let px = ix as i64 - (s as i64 - 1);
            *slot = ps.rect_sum(px, px + s as i64, py, py + s as i64) / denom;
        }
        rows.extend(sliding_max(&w, s, nx));
    }
    // Column pass: best over y-placements.
    let mut out = vec![0.0; nx * ny];
    let mut col = vec![0.0; wy];
    for cx in 0..nx {
        for iy in 0..wy {
            col[iy] = rows[iy * nx + cx];
        }
        for (cy, m) in sliding_max(&col, s, ny).into_iter().enumerate() {
            out[cy * nx + cx] = m;
        }
    }
    out
}

/// Cube maximal function: per cell, the maximum `|f|`-average over all
/// cell-aligned cubes containing the cell, sides `1..=3·(box side)`.
pub fn maximal_function(f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    let g = f.abs();
    let ps = PrefixSums::new(&g);
    let max_side = 3 * grid.max_cells_per_axis();
    let per_side: Vec<Vec<f64>> = (1..=max_side)
        .into_par_iter()
        .map(|s| best_average_for_side(&ps, &grid, s))
        .collect();
    let mut out = vec![0.0f64; grid.cell_count()];
    for side_best in &per_side {
        for (acc, &v) in out.iter_mut().zip(side_best) {
            if v > *acc {
                *acc = v;
            }
        }
    }
    GridFunction::new(grid, out).expect("maxima of finite averages are finite")
}

/// Dyadic maximal function over one shifted family: per cell, the maximum
/// `|f|`-average over the family cubes containing it within the scale range.
pub fn dyadic_maximal(f: &GridFunction, id: &DyadicGridId) -> Result<GridFunction> {
    let grid = *f.grid();
    id.check_scale(&grid)?;
    let g = f.abs();
    let ps = PrefixSums::new(&g);
    let o = grid.origin_units();
    let mut out = vec![0.0f64; grid.cell_count()];
    let mut chain: Vec<f64> = Vec::new();
    visit_cubes(&grid, id, |cube, m| {
        let depth = (m - id.m_min) as usize;
        chain.truncate(depth);
        let avg = family_cube_average(&ps, &grid, &o, cube);
        let run = chain.last().copied().unwrap_or(0.0).max(avg);
        chain.push(run);
        if m == id.m_max {
            // Leaves at the finest scale partition the plane, so each box
            // cell is written exactly once.
            let rect = cube.cell_rect(&grid).expect("visited cubes meet the box");
            for idx in rect.indices(&grid) {
                out[idx] = run;
            }
        }
        true
    })?;
    GridFunction::new(grid, out)
}

/// Scale range wide enough that every cube enumerated by
/// [`maximal_function`] fits inside a family cube of at most `6^n` times its
/// volume: coarsest side at least 12 times the largest enumerated side.
pub fn covering_grid_id(grid: &Grid, shift_thirds: [u8; 2]) -> Result<DyadicGridId> {
    let target = 36 * grid.max_cells_per_axis() as i64;
    let mut exp = 0u32;
    while 3i64 << exp < target {
        exp += 1;
    }
    DyadicGridId::new(shift_thirds, grid.scale() as i32 - exp as i32, grid.scale() as i32)
}

/// Verifies the three-shift domination `Mf ≤ 6^n · Σ_α M_α f` cell-wise,
/// where the sum runs over the `3^n` shifted families with a covering scale
/// range. Reports the worst observed cell ratio against `6^n`.
pub fn three_grid_bound(f: &GridFunction) -> Result<InequalityReport> {
    let grid = *f.grid();
    let mf = maximal_function(f);
    let shifted: Vec<GridFunction> = all_shifts(grid.dim())
        .into_par_iter()
        .map(|shift| dyadic_maximal(f, &covering_grid_id(&grid, shift)?))
        .collect::<Result<_>>()?;
    let six_n = if grid.dim() == 1 { 6.0 } else { 36.0 };
    let mut worst = 0.0f64;
    for idx in 0..grid.cell_count() {
        let lhs = mf.values()[idx];
        if lhs == 0.0 {
            continue;
        }
        let sum: f64 = shifted.iter().map(|d| d.values()[idx]).sum();
        worst = worst.max(lhs / sum);
    }
    let digest = format!(
        "three-shift domination: dim={} cells={} worst-ratio={worst:.6e}",
        grid.dim(),
        grid.cell_count()
    );
    Ok(InequalityReport::with_slack(worst, six_n, six_n, POINTWISE_SLACK, digest))
}

/// Operator norm sample `‖Mf‖_{p(·)} / ‖f‖_{p(·)}`.
pub fn maximal_ratio(f: &GridFunction, p: &ReciprocalExponent) -> Result<f64> {
    p.check_grid(f, "maximal ratio")?;
    if f.is_zero() {
        return Err(Error::DegenerateInput("maximal ratio needs f != 0"));
    }
    let mf = maximal_function(f);
    let nm = luxemburg_norm(ModularKind::Rho, &mf, p, DEFAULT_REL_TOL)?.finite();
    let nf = luxemburg_norm(ModularKind::Rho, f, p, DEFAULT_REL_TOL)?.finite();
    Ok(nm / nf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::grid::Cube;
    use rand::Rng;

    #[test]
    fn box_indicator_is_a_fixed_point() {
        for g in [
            Grid::new(1, 1, &[0.0], &[6]).unwrap(),
            Grid::new(2, 0, &[0.0, 0.0], &[3, 2]).unwrap(),
        ] {
            let f = GridFunction::constant(g, 1.0).unwrap();
            let mf = maximal_function(&f);
            assert!(mf.values().iter().all(|&v| v == 1.0), "{:?}", mf.values());
        }
    }

    #[test]
    fn golden_three_cell_profile() {
        // f = 1 on [0,1/3) over [0,1): averages 1, 1/2, 1/3 cell by cell.
        let g = Grid::new(1, 0, &[0.0], &[3]).unwrap();
        let q = Cube::from_units([0, 0], 1).unwrap();
        let f = GridFunction::indicator(g, &q);
        let mf = maximal_function(&f);
        assert_eq!(mf.values(), &[1.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn dominates_the_function_exactly() {
        let mut r = generators::rng(71);
        for _ in 0..20 {
            let dim = if r.gen_bool(0.5) { 1 } else { 2 };
            let g = generators::random_grid(&mut r, dim, 3, 9);
            let f = generators::random_function(&mut r, g, 4.0);
            let mf = maximal_function(&f);
            for (m, v) in mf.values().iter().zip(f.values()) {
                assert!(*m >= v.abs());
            }
        }
    }

    #[test]
    fn power_of_two_homogeneity_is_bitwise() {
        let mut r = generators::rng(72);
        let g = generators::random_grid(&mut r, 2, 2, 8);
        let f = generators::random_function(&mut r, g, 4.0);
        let lhs = maximal_function(&f.scaled(4.0).unwrap());
        let rhs = maximal_function(&f).scaled(4.0).unwrap();
        assert_eq!(lhs.values(), rhs.values());
    }

    #[test]
    fn sublinear_within_rounding() {
        let mut r = generators::rng(73);
        for _ in 0..10 {
            let g = generators::random_grid(&mut r, 1, 3, 16);
            let f = generators::random_function(&mut r, g, 4.0);
            let h = generators::random_function(&mut r, g, 4.0);
            let m_sum = maximal_function(&f.add(&h).unwrap());
            let mf = maximal_function(&f);
            let mh = maximal_function(&h);
            for idx in 0..g.cell_count() {
                let bound = mf.values()[idx] + mh.values()[idx];
                assert!(m_sum.values()[idx] <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn dyadic_is_dominated_when_scales_fit_the_family() {
        // With sides at most 12 cells <= 3 * box side, every dyadic cube is
        // one of the enumerated cubes, so the dyadic supremum can't exceed
        // the full one.
        let mut r = generators::rng(74);
        for _ in 0..10 {
            let dim = if r.gen_bool(0.5) { 1 } else { 2 };
            let g = generators::random_grid(&mut r, dim, 2, 11);
            if g.max_cells_per_axis() < 4 {
                continue;
            }
            let f = generators::random_function(&mut r, g, 4.0);
            let mf = maximal_function(&f);
            let m_grid = g.scale() as i32;
            for shift in all_shifts(dim) {
                let id = DyadicGridId::new(shift, m_grid - 2, m_grid).unwrap();
                let md = dyadic_maximal(&f, &id).unwrap();
                for idx in 0..g.cell_count() {
                    assert!(md.values()[idx] <= mf.values()[idx]);
                }
            }
        }
    }

    #[test]
    fn dyadic_matches_direct_ancestor_enumeration() {
        // f = 1 on [0,1/3) over [0,1) at grid scale 0, unshifted family,
        // scales {-1, 0}: the only family cubes meeting the box are [0,2)
        // (avg 1/6) and [0,1) (avg 1/3), so every cell reads 1/3.
        let g = Grid::new(1, 0, &[0.0], &[3]).unwrap();
        let q = Cube::from_units([0, 0], 1).unwrap();
        let f = GridFunction::indicator(g, &q);
        let id = DyadicGridId::new([0, 0], -1, 0).unwrap();
        let md = dyadic_maximal(&f, &id).unwrap();
        assert_eq!(md.values(), &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn three_grid_bound_holds_on_random_instances() {
        let mut r = generators::rng(75);
        for _ in 0..10 {
            let dim = if r.gen_bool(0.5) { 1 } else { 2 };
            let g = generators::random_grid(&mut r, dim, 2, 8);
            let f = generators::random_function(&mut r, g, 4.0);
            let report = three_grid_bound(&f).unwrap();
            assert!(report.pass, "{report:?}");
        }
        // Zero function: vacuous ratio 0.
        let g = Grid::new(1, 0, &[0.0], &[3]).unwrap();
        let report = three_grid_bound(&GridFunction::zeros(g)).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, 0.0);
    }

    #[test]
    fn ratio_is_one_for_the_box_indicator() {
        let g = Grid::new(1, 1, &[0.0], &[6]).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let f = GridFunction::constant(g, 1.0).unwrap();
        assert_eq!(maximal_ratio(&f, &p).unwrap(), 1.0);
        let zero = GridFunction::zeros(g);
        assert!(matches!(
            maximal_ratio(&zero, &p),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn spike_ratio_grows_under_refinement_at_exponent_one() {
        // L^1 unboundedness proxy: a one-cell spike's ratio is the harmonic
        // number of the cell count, which grows as the grid refines.
        let mut ratios = Vec::new();
        for scale in 0..=2u32 {
            let g = Grid::new(1, scale, &[0.0], &[3 << scale]).unwrap();
            let p = ReciprocalExponent::constant(g, 1.0).unwrap();
            let spike = GridFunction::indicator(g, &Cube::from_units([0, 0], 1).unwrap());
            ratios.push(maximal_ratio(&spike, &p).unwrap());
        }
        assert!(ratios[1] >= ratios[0] * 1.25, "{ratios:?}");
        assert!(ratios[2] >= ratios[1] * 1.25, "{ratios:?}");
    }

    #[test]
    fn sliding_max_matches_direct_scan() {
        let v = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        for window in 1..=4usize {
            let out_len = v.len() - window + 1;
            let fast = sliding_max(&v, window, out_len);
            for c in 0..out_len {
                let direct = v[c..c + window].iter().cloned().fold(f64::MIN, f64::max);
                assert_eq!(fast[c], direct);
            }
        }
    }
}
