//! Independent reference implementations ("oracles") shared by the
//! integration suites. Each one recomputes a library quantity from first
//! principles — dense λ-scans instead of bisection, direct window
//! enumeration instead of summed-area tables, plain nested loops instead of
//! the library's cube generator — so agreement is evidence, not tautology.
#![allow(dead_code)]

use varlex::{
    luxemburg_norm, modular_quotient, Grid, GridFunction, ModularKind, ReciprocalExponent,
};

/// Luxemburg norm by dense λ-scan: establish an infeasible/feasible bracket
/// by doubling/halving, then shrink it with three rounds of geometric grid
/// scans. The returned point is feasible and within ~4e-10 (relative) of the
/// true norm, independent of the library's bisection.
pub fn lambda_scan_norm(kind: ModularKind, f: &GridFunction, p: &ReciprocalExponent) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    let feasible =
        |lam: f64| modular_quotient(kind, f, p, lam).expect("valid quotient").le(1.0);

    let mut hi = f.max_abs().max(1.0);
    let mut guard = 0;
    while !feasible(hi) {
        hi *= 2.0;
        guard += 1;
        assert!(guard < 4100, "no feasible scale found");
    }
    let mut lo = hi / 2.0;
    guard = 0;
    while feasible(lo) {
        hi = lo;
        lo /= 2.0;
        guard += 1;
        assert!(guard < 4100, "function appears to have zero norm");
        if lo < f64::MIN_POSITIVE {
            return hi;
        }
    }
    // Invariant: lo infeasible, hi feasible.
    const POINTS: usize = 1200;
    for _ in 0..3 {
        let ratio = (hi / lo).powf(1.0 / POINTS as f64);
        let mut cursor = lo;
        for _ in 0..POINTS {
            let next = (cursor * ratio).min(hi);
            if feasible(next) {
                hi = next;
                break;
            }
            cursor = next;
        }
        lo = cursor;
    }
    hi
}

/// Cube maximal function by direct enumeration: for every side `s` up to
/// three box sides and every window placement overlapping the box, sum the
/// covered cells one by one, divide by `s^dim`, and fold the average into
/// every covered cell. No summed-area table, no sliding maximum.
///
/// Bitwise agreement with the fast implementation is meaningful only for
/// functions whose values (and partial sums) are exactly representable —
/// e.g. the dyadic values produced by the library's generators — since then
/// both summation strategies are exact and divide the identical numerator by
/// the identical denominator.
pub fn naive_maximal(f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    let g = f.abs();
    let v = g.values();
    let [nx, ny] = grid.cells_per_axis();
    let dim = grid.dim();
    let max_side = 3 * grid.max_cells_per_axis();
    let mut out = vec![0.0f64; grid.cell_count()];

    for s in 1..=max_side as i64 {
        let denom = if dim == 1 { s as f64 } else { (s * s) as f64 };
        let py_range = if dim == 2 { -(s - 1)..=(ny as i64 - 1) } else { 0..=0 };
        for py in py_range {
            for px in -(s - 1)..=(nx as i64 - 1) {
                let x0 = px.max(0) as usize;
                let x1 = ((px + s).min(nx as i64)).max(0) as usize;
                let (y0, y1) = if dim == 2 {
                    (py.max(0) as usize, ((py + s).min(ny as i64)).max(0) as usize)
                } else {
                    (0, 1)
                };
                if x0 >= x1 || y0 >= y1 {
                    continue;
                }
                let mut sum = 0.0f64;
                for iy in y0..y1 {
                    for ix in x0..x1 {
                        sum += v[grid.cell_index(ix, iy)];
                    }
                }
                let avg = sum / denom;
                for iy in y0..y1 {
                    for ix in x0..x1 {
                        let idx = grid.cell_index(ix, iy);
                        if avg > out[idx] {
                            out[idx] = avg;
                        }
                    }
                }
            }
        }
    }
    GridFunction::new(grid, out).expect("averages of finite values are finite")
}

/// Cube-supremum constant by plain nested loops over every cell-aligned
/// cube inside the box with side at most `max_side_cells`: per cube, the
/// product of the indicator's norm and dual norm over the cube volume. The
/// per-cube expression matches the library's, so the comparison isolates
/// the cube enumeration and supremum logic. Returns the supremum and the
/// number of cubes visited.
pub fn brute_force_muckenhoupt(
    p: &ReciprocalExponent,
    max_side_cells: usize,
) -> (f64, usize) {
    let grid = *p.grid();
    let dual = p.dual();
    let [nx, ny] = grid.cells_per_axis();
    let o = grid.origin_units();
    let dim = grid.dim();
    let side_cap = if dim == 2 { nx.min(ny) } else { nx }.min(max_side_cells) as i64;
    let mut best = 0.0f64;
    let mut count = 0usize;
    for side in 1..=side_cap {
        let y_slots = if dim == 2 { ny as i64 - side } else { 0 };
        for iy in 0..=y_slots {
            for ix in 0..=(nx as i64 - side) {
                let cube = varlex::Cube { lower: [o[0] + ix, o[1] + iy], side };
                let ind = GridFunction::indicator(grid, &cube);
                let n = luxemburg_norm(ModularKind::Rho, &ind, p, 1e-12)
                    .expect("indicator norm exists")
                    .finite();
                let n_dual = luxemburg_norm(ModularKind::Rho, &ind, &dual, 1e-12)
                    .expect("indicator dual norm exists")
                    .finite();
                let ratio = n * n_dual / cube.volume(&grid);
                if ratio > best {
                    best = ratio;
                }
                count += 1;
            }
        }
    }
    (best, count)
}

/// Piecewise-constant refinement: the same function sampled on the grid one
/// scale finer (each cell splits into `2^dim` children with the parent's
/// value).
pub fn refine_function(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let [nx, ny] = grid.cells_per_axis();
    let origin_h = grid.origin_units();
    let origin: Vec<f64> = (0..grid.dim()).map(|a| origin_h[a] as f64 * grid.h()).collect();
    let cells: Vec<usize> = grid.cells_per_axis()[..grid.dim()].iter().map(|&c| 2 * c).collect();
    let fine = Grid::new(grid.dim(), grid.scale() + 1, &origin, &cells)
        .expect("refined grid is valid");
    let [fx, fy] = fine.cells_per_axis();
    let mut values = vec![0.0f64; fine.cell_count()];
    for iy in 0..fy {
        for ix in 0..fx {
            let parent = grid.cell_index((ix / 2).min(nx - 1), (iy / 2).min(ny - 1));
            values[fine.cell_index(ix, iy)] = f.values()[parent];
        }
    }
    GridFunction::new(fine, values).expect("refined function is valid")
}
