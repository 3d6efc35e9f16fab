//! Exponent-class constants and the lemma-level checks built on them:
//! the cube-supremum constant `[p]_A`, the tail-deviation constant `[p]_N`,
//! averaging-operator bounds, the `A∞` weight verifier, and the averaged
//! modular inequality.

use rayon::prelude::*;

use crate::calculus::InequalityReport;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::exponent::ReciprocalExponent;
use crate::generators::{random_cube, random_function, random_majority_subset, random_subcube, rng};
use crate::grid::{Cube, Grid, GridFunction};
use crate::modular::{finite_power, modular, ModularKind};
use crate::norm::{conjugate_witness, luxemburg_norm, DEFAULT_REL_TOL, INEQUALITY_SLACK};
use crate::sum::CompensatedSum;

/// Relative tolerance for the per-cube norm bisections inside the cube
/// supremum. Tighter than the library default so that the *product* of two
/// norms still lands within `1e-10` of its true value (each factor
/// overshoots by at most its own tolerance).
const CUBE_NORM_REL_TOL: f64 = 1e-12;

/// Descriptor of the finite cube family a constant was maximized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeFamily {
    pub max_side_cells: usize,
    pub count: usize,
}

/// The class constants of an exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassConstants {
    /// Cube-supremum constant `sup_Q ‖1_Q‖_p ‖1_Q‖_{p'} / |Q|`.
    pub a_const: ExtReal,
    /// Tail-deviation constant `‖1‖_{s(·)}`, `1/s = |1/p - 1/p_∞|`.
    pub n_const: ExtReal,
    /// Reference tail reciprocal used for `n_const`.
    pub p_inf_reciprocal: f64,
    /// Cube family the supremum ranged over.
    pub family: CubeFamily,
}

/// Where the cube supremum was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuckenhouptDetail {
    pub value: f64,
    pub best_cube: Cube,
    pub cubes_checked: usize,
}

fn cubes_inside(grid: &Grid, region: &Cube, max_side_cells: usize) -> Result<Vec<Cube>> {
    let rect = region
        .cell_rect(grid)
        .ok_or(Error::DegenerateInput("cube region misses the grid box"))?;
    let w = (rect.hi[0] - rect.lo[0]) as i64;
    let h = if grid.dim() == 2 { (rect.hi[1] - rect.lo[1]) as i64 } else { 1 };
    let o = grid.origin_units();
    let base = [o[0] + rect.lo[0] as i64, o[1] + rect.lo[1] as i64];
    let side_cap = if grid.dim() == 2 { w.min(h) } else { w };
    let side_cap = side_cap.min(max_side_cells as i64);
    let mut cubes = Vec::new();
    for side in 1..=side_cap {
        for iy in 0..=(if grid.dim() == 2 { h - side } else { 0 }) {
            for ix in 0..=(w - side) {
                cubes.push(Cube { lower: [base[0] + ix, base[1] + iy], side });
            }
        }
    }
    Ok(cubes)
}

/// Cube-supremum constant over all cell-aligned cubes inside `region` with
/// side at most `max_side_cells`, with the attaining cube.
pub fn muckenhoupt_detail(
    p: &ReciprocalExponent,
    region: &Cube,
    max_side_cells: usize,
) -> Result<MuckenhouptDetail> {
    if max_side_cells == 0 {
        return Err(Error::Domain("cube family needs max_side_cells >= 1".into()));
    }
    let grid = *p.grid();
    let dual = p.dual();
    let cubes = cubes_inside(&grid, region, max_side_cells)?;
    let ratios: Vec<f64> = cubes
        .par_iter()
        .map(|cube| -> Result<f64> {
            let ind = GridFunction::indicator(grid, cube);
            let n = luxemburg_norm(ModularKind::Rho, &ind, p, CUBE_NORM_REL_TOL)?.finite();
            let n_dual = luxemburg_norm(ModularKind::Rho, &ind, &dual, CUBE_NORM_REL_TOL)?.finite();
            Ok(n * n_dual / cube.volume(&grid))
        })
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for (idx, &r) in ratios.iter().enumerate() {
        if r > ratios[best] {
            best = idx;
        }
    }
    Ok(MuckenhouptDetail { value: ratios[best], best_cube: cubes[best], cubes_checked: cubes.len() })
}

/// Cube-supremum constant `[p]_A` over the whole box.
pub fn muckenhoupt_constant(p: &ReciprocalExponent, max_side_cells: usize) -> Result<ExtReal> {
    let detail = muckenhoupt_detail(p, &p.grid().box_cube(), max_side_cells)?;
    Ok(ExtReal::finite(detail.value))
}

/// Tail-deviation constant `[p]_N = ‖1‖_{s(·)}` with `1/s = |1/p - u_inf|`:
/// infinite when the tail reciprocal differs from `u_inf` (mismatch on a set
/// of infinite measure), otherwise `max(1, ‖1_box‖_{s(·)})` by bisection.
pub fn nekvinda_constant(
    p: &ReciprocalExponent,
    u_inf: f64,
    rel_tol: f64,
) -> Result<ExtReal> {
    if !(0.0..=1.0).contains(&u_inf) || u_inf.is_nan() {
        return Err(Error::Domain(format!("reference reciprocal {u_inf} is outside [0, 1]")));
    }
    if p.tail_reciprocal() != u_inf {
        return Ok(ExtReal::Infinite);
    }
    let deviation = p.deviation(u_inf)?;
    let ones = GridFunction::constant(*p.grid(), 1.0)?;
    let norm = luxemburg_norm(ModularKind::Rho, &ones, &deviation, rel_tol)?.finite();
    Ok(ExtReal::finite(norm.max(1.0)))
}

/// Scans candidate reciprocals `{0, 1/(g-1), …, 1}` and returns the one
/// minimizing the tail-deviation constant, with that constant.
pub fn best_p_infinity(p: &ReciprocalExponent, grid_points: usize) -> Result<(f64, ExtReal)> {
    if grid_points < 2 {
        return Err(Error::Domain("reciprocal scan needs at least 2 grid points".into()));
    }
    let mut best_u = 0.0;
    let mut best_n = ExtReal::Infinite;
    for k in 0..grid_points {
        let u = k as f64 / (grid_points - 1) as f64;
        let n = nekvinda_constant(p, u, DEFAULT_REL_TOL)?;
        if n < best_n {
            best_n = n;
            best_u = u;
        }
    }
    Ok((best_u, best_n))
}

/// Assembles both class constants: `[p]_A` over cubes up to `max_side_cells`
/// and `[p]_N` minimized over a reciprocal scan with `grid_points` points.
pub fn class_constants(
    p: &ReciprocalExponent,
    max_side_cells: usize,
    grid_points: usize,
) -> Result<ClassConstants> {
    let detail = muckenhoupt_detail(p, &p.grid().box_cube(), max_side_cells)?;
    let (u_best, n_const) = best_p_infinity(p, grid_points)?;
    Ok(ClassConstants {
        a_const: ExtReal::finite(detail.value),
        n_const,
        p_inf_reciprocal: u_best,
        family: CubeFamily { max_side_cells, count: detail.cubes_checked },
    })
}

/// Checks uniform boundedness of the cube-averaging operators
/// `T_Q f = 1_Q · avg_Q(f)`: the sampled operator ratios stay below
/// `2[p]_A`, and a constructed dual witness on the supremum-attaining cube
/// pushes the observed maximum above `[p]_A/2`.
pub fn averaging_operator_check(
    p: &ReciprocalExponent,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    let grid = *p.grid();
    let detail = muckenhoupt_detail(p, &grid.box_cube(), grid.max_cells_per_axis())?;
    let a_const = detail.value;
    let mut generator = rng(seed);

    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        let q = random_cube(&mut generator, &grid);
        let f = random_function(&mut generator, grid, 8.0);
        let nf = luxemburg_norm(ModularKind::Rho, &f, p, DEFAULT_REL_TOL)?.finite();
        if nf == 0.0 {
            continue;
        }
        let avg = f.cube_average(&q);
        let averaged = GridFunction::indicator(grid, &q).scaled(avg)?;
        let nt = luxemburg_norm(ModularKind::Rho, &averaged, p, DEFAULT_REL_TOL)?.finite();
        max_ratio = max_ratio.max(nt / nf);
    }

    // Dual witness on the attaining cube: pairs with 1_Q well enough to
    // certify at least half of the supremum ratio.
    let eps = 1e-6;
    let q_star = detail.best_cube;
    let ind = GridFunction::indicator(grid, &q_star);
    let witness = conjugate_witness(&ind, &p.dual(), eps)?.abs();
    let nw = luxemburg_norm(ModularKind::Rho, &witness, p, DEFAULT_REL_TOL)?.finite();
    if nw > 0.0 {
        let avg = witness.cube_average(&q_star);
        let averaged = GridFunction::indicator(grid, &q_star).scaled(avg)?;
        let nt = luxemburg_norm(ModularKind::Rho, &averaged, p, DEFAULT_REL_TOL)?.finite();
        max_ratio = max_ratio.max(nt / nw);
    }

    let upper_ok = max_ratio <= 2.0 * a_const * (1.0 + INEQUALITY_SLACK);
    let lower_ok = max_ratio >= 0.5 * a_const * (1.0 - 1e-4);
    let digest = format!(
        "averaging operators: samples={samples} seed={seed} a={a_const:.6e} \
         max-ratio={max_ratio:.6e} upper_ok={upper_ok} lower_ok={lower_ok}"
    );
    let mut report = InequalityReport::new(max_ratio, 2.0 * a_const, a_const, digest);
    report.pass = upper_ok && lower_ok;
    Ok(report)
}

/// Weighted sum `Σ t^{q_c}` over a set of cells (no volume factor; ratios of
/// these sums are measure-free).
fn weight_sum(q: &ReciprocalExponent, t: f64, cells: impl Iterator<Item = usize>) -> f64 {
    let recip = q.reciprocals();
    let mut acc = CompensatedSum::new();
    for idx in cells {
        acc.add(finite_power(t, recip[idx]));
    }
    acc.value()
}

/// Verifies the quantitative `A∞` property of the weight `w = t^{q(x)}` on a
/// cube: for random sub-cubes `Q'` and random majority subsets `E ⊆ Q'`,
/// `w(E) ≥ β·w(Q')` with `β = 1 / max{(32[q]_A²)^{q⁺}, 2(8[q]_A)^{q⁺}}`,
/// where `[q]_A` is taken over sub-cubes of `Q`.
pub fn a_infinity_check(
    q: &ReciprocalExponent,
    t: f64,
    cube: &Cube,
    trials: usize,
    seed: u64,
) -> Result<InequalityReport> {
    let grid = *q.grid();
    let rect = cube
        .cell_rect(&grid)
        .ok_or(Error::DegenerateInput("cube region misses the grid box"))?;
    for idx in rect.indices(&grid) {
        let u = q.reciprocal_at(idx);
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Precondition(
                "weight exponent must satisfy 1 < q- <= q+ < inf on the cube".into(),
            ));
        }
    }

    let local = muckenhoupt_detail(q, cube, cube.side as usize)?;
    let a_const = local.value;
    let ind_norm =
        luxemburg_norm(ModularKind::Rho, &GridFunction::indicator(grid, cube), q, DEFAULT_REL_TOL)?
            .finite();
    let t_cap = 2.0 * a_const / ind_norm;
    if !(1.0..=f64::INFINITY).contains(&t) || t > t_cap * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "weight base t={t} must lie in [1, 2[q]_A/|1_Q|_q] = [1, {t_cap}]"
        )));
    }

    let q_plus = 1.0
        / rect
            .indices(&grid)
            .map(|idx| q.reciprocal_at(idx))
            .fold(1.0f64, f64::min);
    let beta = 1.0
        / f64::max(
            (32.0 * a_const * a_const).powf(q_plus),
            2.0 * (8.0 * a_const).powf(q_plus),
        );

    let mut generator = rng(seed);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..trials {
        let sub = random_subcube(&mut generator, &grid, cube);
        let subset = random_majority_subset(&mut generator, &grid, &sub);
        let w_sub = weight_sum(q, t, sub.cell_rect(&grid).unwrap().indices(&grid));
        let w_set = weight_sum(q, t, subset.into_iter());
        min_ratio = min_ratio.min(w_set / w_sub);
    }
    if trials == 0 {
        min_ratio = 1.0;
    }

    let digest = format!(
        "a-infinity: trials={trials} seed={seed} t={t:.6e} beta={beta:.6e} \
         min-ratio={min_ratio:.6e} local-a={a_const:.6e} q+={q_plus:.6e}"
    );
    Ok(InequalityReport::new(beta, min_ratio, beta, digest))
}

/// Verifies the averaged-modular inequality on a cube: with
/// `λ = min(1/2, 1/(2[p]_A))` and `[p]_A` over sub-cubes of `Q`,
/// `∫_Q (λ·avg_Q|f|)^{p(x)} dx ≤ ∫_Q |2f|^{p(x)} dx`, under the
/// preconditions `1 < p⁻ ≤ p⁺ < ∞` on `Q`, `avg_Q|f| ≥ 1`, and
/// `‖f·1_Q‖_{p(·)} ≤ 1/2` (certified exactly by `ρ(2f·1_Q) ≤ 1`).
pub fn avgmodular_check(
    p: &ReciprocalExponent,
    f: &GridFunction,
    cube: &Cube,
) -> Result<InequalityReport> {
    let grid = *p.grid();
    p.check_grid(f, "averaged-modular check")?;
    let rect = cube
        .cell_rect(&grid)
        .ok_or(Error::DegenerateInput("cube region misses the grid box"))?;
    for idx in rect.indices(&grid) {
        let u = p.reciprocal_at(idx);
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Precondition(
                "exponent must satisfy 1 < p- <= p+ < inf on the cube".into(),
            ));
        }
    }

    let restricted = f.restricted_to(cube).abs();
    let avg = restricted.cube_average(cube);
    if avg < 1.0 || avg.is_nan() {
        return Err(Error::Precondition(format!(
            "average of |f| over the cube is {avg}, below the required 1"
        )));
    }
    let doubled = restricted.scaled(2.0)?;
    let rhs = modular(ModularKind::Rho, &doubled, p)?;
    let rhs = match rhs {
        ExtReal::Finite(v) if v <= 1.0 => v,
        other => {
            return Err(Error::Precondition(format!(
                "norm certificate failed: modular of 2f over the cube is {other}, above 1"
            )))
        }
    };

    let local = muckenhoupt_detail(p, cube, cube.side as usize)?;
    let lambda = (0.5f64).min(1.0 / (2.0 * local.value));
    let averaged = GridFunction::indicator(grid, cube).scaled(lambda * avg)?;
    let lhs = modular(ModularKind::Rho, &averaged, p)?
        .as_finite()
        .ok_or_else(|| Error::Internal("finite exponent produced infinite modular".into()))?;

    let digest = format!(
        "avg-modular: lambda={lambda:.6e} avg={avg:.6e} local-a={:.6e} cube-side={}",
        local.value, cube.side
    );
    Ok(InequalityReport::new(lhs, rhs, lambda, digest))
}
