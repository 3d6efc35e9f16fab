//! Cube maximal function against direct window enumeration.

mod common;

use common::naive_maximal;
use rand::Rng;
use varlex::generators::{random_function, rng};
use varlex::{maximal_function, Grid, GridFunction};

/// Random cell-aligned grid with bounded cell counts (the naive oracle is
/// quadratic in the window count, so it needs smaller boxes than the
/// library's generator default).
fn small_grid(r: &mut varlex::generators::SeededRng, dim: usize) -> Grid {
    let scale = r.gen_range(0..=3u32);
    let h = 1.0 / 3.0 / f64::from(1u32 << scale);
    let span = 3i64 << scale;
    let mut origin = [0.0f64; 2];
    let mut cells = [1usize; 2];
    for axis in 0..dim {
        origin[axis] = r.gen_range(-span..=span) as f64 * h;
        cells[axis] = if dim == 1 { r.gen_range(1..=48) } else { r.gen_range(1..=10) };
    }
    Grid::new(dim, scale, &origin[..dim], &cells[..dim]).expect("valid grid")
}

/// 200 seeded random grids (1D and 2D): the summed-area + sliding-maximum
/// implementation and the direct enumeration agree bit for bit. The
/// generator produces dyadic cell values, so every window sum is exact in
/// both implementations and the comparison is meaningful at full precision.
#[test]
fn fast_maximal_matches_naive_enumeration_on_200_grids() {
    let mut r = rng(0x4d41584c);
    for t in 0..200usize {
        let dim = 1 + (t % 2);
        let grid = small_grid(&mut r, dim);
        let f = random_function(&mut r, grid, 4.0);
        let fast = maximal_function(&f);
        let naive = naive_maximal(&f);
        for idx in 0..grid.cell_count() {
            assert_eq!(
                fast.values()[idx].to_bits(),
                naive.values()[idx].to_bits(),
                "instance {t} cell {idx}: fast {} vs naive {}",
                fast.values()[idx],
                naive.values()[idx]
            );
        }
    }
}

/// Golden 1D profile: the unit indicator of the first third of [0, 1)
/// produces cell maxima (1, 1/2, 1/3) — the best windows are the cell
/// itself, the first two cells, and the whole box.
#[test]
fn golden_three_cell_profile_matches_oracle() {
    let grid = Grid::new(1, 0, &[0.0], &[3]).unwrap();
    let f = GridFunction::new(grid, vec![1.0, 0.0, 0.0]).unwrap();
    let naive = naive_maximal(&f);
    assert_eq!(naive.values(), &[1.0, 0.5, 1.0 / 3.0]);
    assert_eq!(maximal_function(&f).values(), naive.values());
}
