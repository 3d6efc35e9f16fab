//! Luxemburg norms by monotone bracketing and bisection.
//!
//! For every modular kind the map `λ ↦ modular(f/λ)` is non-increasing, so
//! the norm `inf { λ > 0 : modular(f/λ) ≤ 1 }` is found by doubling/halving
//! from `λ₀ = max|f|` until the feasibility boolean flips, then bisecting.
//! The returned value is the *feasible* upper bracket end, so the defining
//! membership `modular(f/value) ≤ 1` always holds for the reported value.
//!
//! Starting at `λ₀ = max|f|` keeps every cell ratio `≤ 1`, so the very first
//! modular evaluation is finite even in the presence of `p = ∞` cells.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::exponent::ReciprocalExponent;
use crate::grid::GridFunction;
use crate::modular::{finite_power, modular, modular_quotient, ModularKind};

/// Default relative tolerance for norm bisections.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Multiplicative slack applied to the weak side of inequality checks, so
/// that two tolerance-accurate norms never produce a false violation.
pub const INEQUALITY_SLACK: f64 = 1e-6;

/// Outcome of a Luxemburg norm computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    /// The norm value; finite for every validated grid function.
    pub value: ExtReal,
    /// Modular the norm was computed against.
    pub kind: ModularKind,
    /// Final bracket `[lo, hi]` with `modular(f/hi) ≤ 1 < modular(f/lo)`
    /// (degenerate `(0, 0)` for the zero function).
    pub bracket: (f64, f64),
    /// Number of modular evaluations spent.
    pub iterations: u32,
    /// `hi/lo - 1` at termination.
    pub rel_tol_achieved: f64,
}

impl NormResult {
    /// The norm as a plain `f64` (norms of grid functions are always finite).
    pub fn finite(&self) -> f64 {
        match self.value {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    fn exact(value: f64, kind: ModularKind) -> Self {
        NormResult {
            value: ExtReal::finite(value),
            kind,
            bracket: (value, value),
            iterations: 0,
            rel_tol_achieved: 0.0,
        }
    }
}

const MAX_BRACKET_STEPS: u32 = 4200;
const MAX_BISECT_STEPS: u32 = 20_000;

/// Luxemburg norm of `f` for the chosen modular, to relative tolerance
/// `rel_tol ∈ (0, 1/2)`.
pub fn luxemburg_norm(
    kind: ModularKind,
    f: &GridFunction,
    p: &ReciprocalExponent,
    rel_tol: f64,
) -> Result<NormResult> {
    p.check_grid(f, "norm computation")?;
    if !(rel_tol > 0.0 && rel_tol < 0.5) {
        return Err(Error::Domain(format!("rel_tol {rel_tol} must lie in (0, 1/2)")));
    }
    if f.is_zero() {
        return Ok(NormResult::exact(0.0, kind));
    }

    let lambda0 = f.max_abs();
    // Pure essential-sup regime: every box cell carries p = ∞, so
    // modular(f/λ) ≤ 1 exactly when λ ≥ max|f|, for all four kinds.
    if p.reciprocals().iter().all(|&u| u == 0.0) {
        return Ok(NormResult::exact(lambda0, kind));
    }

    let feasible = |lambda: f64| -> Result<bool> {
        Ok(modular_quotient(kind, f, p, lambda)?.le(1.0))
    };

    let mut iterations = 0u32;
    let (mut lo, mut hi);
    if feasible(lambda0)? {
        // Search downward for an infeasible λ.
        hi = lambda0;
        loop {
            iterations += 1;
            if iterations > MAX_BRACKET_STEPS {
                return Err(Error::Internal("norm bracketing did not terminate".into()));
            }
            let candidate = hi / 2.0;
            if feasible(candidate)? {
                hi = candidate;
            } else {
                lo = candidate;
                break;
            }
        }
    } else {
        // Search upward for a feasible λ.
        lo = lambda0;
        loop {
            iterations += 1;
            if iterations > MAX_BRACKET_STEPS {
                return Err(Error::Internal("norm bracketing did not terminate".into()));
            }
            let candidate = lo * 2.0;
            if feasible(candidate)? {
                hi = candidate;
                break;
            }
            lo = candidate;
        }
    }

    while hi / lo - 1.0 > rel_tol {
        iterations += 1;
        if iterations > MAX_BISECT_STEPS {
            return Err(Error::Internal("norm bisection did not terminate".into()));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket ends are adjacent floats
        }
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    Ok(NormResult {
        value: ExtReal::finite(hi),
        kind,
        bracket: (lo, hi),
        iterations,
        rel_tol_achieved: hi / lo - 1.0,
    })
}

/// Upper bound for the norm from a modular bound: if `ρ(f) ≤ a·b` with
/// `a ≥ 1`, `b ∈ (0, 1]` and finite `p⁺`, then `‖f‖ ≤ a·b^{1/p⁺}`.
/// Returns `(‖f‖, a·b^{1/p⁺})`.
pub fn norm_trick_bound(
    f: &GridFunction,
    p: &ReciprocalExponent,
    a: f64,
    b: f64,
) -> Result<(f64, f64)> {
    if a < 1.0 || !a.is_finite() {
        return Err(Error::Domain(format!("factor a = {a} must lie in [1, inf)")));
    }
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::Domain(format!("factor b = {b} must lie in (0, 1]")));
    }
    let (_, p_plus) = p.essential_bounds();
    let p_plus = match p_plus {
        ExtReal::Finite(v) => v,
        ExtReal::Infinite => {
            return Err(Error::Precondition(
                "norm bound from a modular bound needs a finite upper exponent".into(),
            ))
        }
    };
    let rho = modular(ModularKind::Rho, f, p)?;
    let budget = a * b;
    if !rho.le(budget) {
        return Err(Error::Precondition(format!(
            "modular {rho} exceeds the budget a*b = {budget}"
        )));
    }
    let lhs = luxemburg_norm(ModularKind::Rho, f, p, DEFAULT_REL_TOL)?.finite();
    let rhs = a * b.powf(1.0 / p_plus);
    Ok((lhs, rhs))
}

/// Builds a dual-unit-ball function `g` certifying the lower half of the
/// conjugate formula: `∫|f||g| ≥ (1-eps)·(1/2)·‖f‖`.
///
/// On finite-exponent cells `g = (|f|/‖f‖)^{p-1}` (zero where `f` is zero);
/// on `p = ∞` cells `g` is the normalized indicator of the cells where `|f|`
/// nearly attains its sup. The result is divided by its own dual norm
/// whenever that norm exceeds 1, which forces the dual modular `≤ 1`.
pub fn conjugate_witness(
    f: &GridFunction,
    p: &ReciprocalExponent,
    eps: f64,
) -> Result<GridFunction> {
    p.check_grid(f, "conjugate witness")?;
    if f.is_zero() {
        return Err(Error::DegenerateInput("conjugate witness needs f != 0"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} must lie in (0, 1)")));
    }

    let norm = luxemburg_norm(ModularKind::Rho, f, p, DEFAULT_REL_TOL)?.finite();
    let recip = p.reciprocals();
    let grid = *f.grid();

    // Sup of |f| over ∞-cells and the measure of its near-attainment set.
    let mut sup_inf = 0.0f64;
    for (idx, &v) in f.values().iter().enumerate() {
        if recip[idx] == 0.0 {
            sup_inf = sup_inf.max(v.abs());
        }
    }
    let cutoff = (1.0 - eps) * sup_inf;
    let near_count = f
        .values()
        .iter()
        .enumerate()
        .filter(|(idx, v)| recip[*idx] == 0.0 && sup_inf > 0.0 && v.abs() >= cutoff)
        .count();
    let near_measure = near_count as f64 / grid.volume_denominator();

    let mut values = Vec::with_capacity(f.values().len());
    for (idx, &v) in f.values().iter().enumerate() {
        let u = recip[idx];
        let a = v.abs();
        let g = if u == 0.0 {
            if sup_inf > 0.0 && a >= cutoff {
                1.0 / near_measure
            } else {
                0.0
            }
        } else if a == 0.0 {
            0.0
        } else {
            // (|f|/‖f‖)^(p-1) with the exponent given through its reciprocal
            // u/(1-u); p = 1 cells get the flat value 1.
            let t = a / norm;
            if u == 1.0 {
                1.0
            } else {
                finite_power(t, u / (1.0 - u))
            }
        };
        values.push(g);
    }
    let candidate = GridFunction::new(grid, values)?;

    let dual = p.dual();
    let dual_norm = luxemburg_norm(ModularKind::Rho, &candidate, &dual, DEFAULT_REL_TOL)?.finite();
    if dual_norm <= 1.0 {
        Ok(candidate)
    } else {
        // Dividing by the feasible bracket end reproduces exactly the ratios
        // the norm bisection tested, so the rescaled dual modular is ≤ 1.
        let scaled: Vec<f64> = candidate.values().iter().map(|&g| g / dual_norm).collect();
        GridFunction::new(grid, scaled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cube, Grid};

    fn unit_grid(scale: u32) -> Grid {
        Grid::new(1, scale, &[0.0], &[3 << scale]).unwrap()
    }

    #[test]
    fn indicator_norm_is_exactly_one_for_square_exponent() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let r = luxemburg_norm(ModularKind::Rho, &f, &p, 1e-10).unwrap();
        assert_eq!(r.value, ExtReal::Finite(1.0));
        assert_eq!(r.bracket.1, 1.0);
    }

    #[test]
    fn sup_norm_is_exact_for_pure_infinity_exponent() {
        let g = unit_grid(1);
        let f = GridFunction::constant(g, 2.75).unwrap();
        let p = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        for kind in ModularKind::ALL {
            let r = luxemburg_norm(kind, &f, &p, 1e-10).unwrap();
            assert_eq!(r.value, ExtReal::Finite(2.75));
            assert_eq!(r.iterations, 0);
        }
    }

    #[test]
    fn two_valued_exponent_unit_function_has_exact_unit_norm() {
        // p = 1 on [0,1/3), p = 3 on [1/3,1), f ≡ 1: the feasibility boundary
        // sits exactly at λ = 1 because (1/3)·1 + (2/3)·1 = 1.
        let g = unit_grid(3);
        let left = Cube::from_coords(&g, &[0.0], 1.0 / 3.0).unwrap();
        let p = ReciprocalExponent::step(g, 3.0, &[(left, 1.0)]).unwrap();
        let f = GridFunction::constant(g, 1.0).unwrap();
        let r = luxemburg_norm(ModularKind::Rho, &f, &p, 1e-12).unwrap();
        assert_eq!(r.value, ExtReal::Finite(1.0));
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let g = unit_grid(0);
        let f = GridFunction::zeros(g);
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let r = luxemburg_norm(ModularKind::RhoKr, &f, &p, 1e-10).unwrap();
        assert_eq!(r.value, ExtReal::Finite(0.0));
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn tolerance_outside_range_rejected() {
        let g = unit_grid(0);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        assert!(luxemburg_norm(ModularKind::Rho, &f, &p, 0.0).is_err());
        assert!(luxemburg_norm(ModularKind::Rho, &f, &p, 0.5).is_err());
    }

    #[test]
    fn homogeneity_within_tolerance() {
        let g = unit_grid(2);
        let f = GridFunction::from_cell_centers(g, |x| 0.3 + x[0] * x[0]).unwrap();
        let p = ReciprocalExponent::constant(g, 2.5).unwrap();
        let n1 = luxemburg_norm(ModularKind::Rho, &f, &p, 1e-12).unwrap().finite();
        let n3 = luxemburg_norm(ModularKind::Rho, &f.scaled(3.0).unwrap(), &p, 1e-12)
            .unwrap()
            .finite();
        assert!((n3 - 3.0 * n1).abs() <= 1e-10 * n1);
    }

    #[test]
    fn trick_bound_attains_equality_for_constant_exponent() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 0.5).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let (lhs, rhs) = norm_trick_bound(&f, &p, 1.0, 0.25).unwrap();
        assert_eq!(lhs, 0.5);
        assert_eq!(rhs, 0.5);
    }

    #[test]
    fn trick_bound_rejects_budget_violation_and_infinite_upper_exponent() {
        let g = unit_grid(1);
        let f = GridFunction::constant(g, 2.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        assert!(matches!(norm_trick_bound(&f, &p, 1.0, 0.5), Err(Error::Precondition(_))));
        let p_inf = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        let small = GridFunction::constant(g, 0.5).unwrap();
        assert!(matches!(norm_trick_bound(&small, &p_inf, 1.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn witness_for_self_dual_indicator_is_the_indicator() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let w = conjugate_witness(&f, &p, 0.1).unwrap();
        assert!(w.values().iter().all(|&v| v == 1.0));
        let pairing = f.multiply(&w).unwrap().abs_integral();
        assert_eq!(pairing, 1.0);
    }

    #[test]
    fn witness_for_sup_norm_indicator_pairs_fully() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        let w = conjugate_witness(&f, &p, 0.1).unwrap();
        let dual_norm = luxemburg_norm(ModularKind::Rho, &w, &p.dual(), 1e-10).unwrap().finite();
        assert!(dual_norm <= 1.0);
        let pairing = f.multiply(&w).unwrap().abs_integral();
        assert!((pairing - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn witness_certifies_half_norm_for_mixed_exponent() {
        let g = unit_grid(1);
        let right = Cube::from_coords(&g, &[0.5], 0.5).unwrap();
        let p = ReciprocalExponent::step(g, 2.0, &[(right, f64::INFINITY)]).unwrap();
        let f = GridFunction::from_cell_centers(g, |x| 0.5 + x[0]).unwrap();
        let eps = 1e-6;
        let w = conjugate_witness(&f, &p, eps).unwrap();
        let dual_modular = modular(ModularKind::Rho, &w, &p.dual()).unwrap();
        assert!(dual_modular.le(1.0));
        let norm = luxemburg_norm(ModularKind::Rho, &f, &p, 1e-10).unwrap().finite();
        let pairing = f.multiply(&w).unwrap().abs_integral();
        assert!(pairing >= (1.0 - eps) * 0.5 * norm * (1.0 - 1e-8));
        assert!(pairing <= 2.0 * norm * (1.0 + 1e-9));
    }

    #[test]
    fn witness_rejects_zero_function() {
        let g = unit_grid(0);
        let f = GridFunction::zeros(g);
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        assert!(matches!(conjugate_witness(&f, &p, 0.1), Err(Error::DegenerateInput(_))));
    }
}
