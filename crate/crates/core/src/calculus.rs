//! Norm-calculus inequality verifiers: Hölder, the power identity,
//! interpolation, sum-space splits, two-sided embeddings, and the
//! minimax embeddings controlled by the Nekvinda constant.
//!
//! Each verifier evaluates both sides of its inequality with Luxemburg norms
//! and reports the comparison; a small multiplicative slack on the weak side
//! keeps two tolerance-accurate norms from producing false violations.

use crate::classes::nekvinda_constant;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::exponent::ReciprocalExponent;
use crate::grid::GridFunction;
use crate::modular::ModularKind;
use crate::norm::{luxemburg_norm, DEFAULT_REL_TOL, INEQUALITY_SLACK};

/// Relative tolerance for checks that are equalities, not just inequalities.
pub const EQUALITY_REL_TOL: f64 = 1e-8;

/// Outcome of a two-sided comparison `lhs ≤ rhs·(1+slack)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// The constant featured on the right-hand side (or the tolerance for
    /// equality-style checks).
    pub constant: f64,
    pub pass: bool,
    /// Human-readable instance description.
    pub digest: String,
}

impl InequalityReport {
    /// Comparison with an explicit slack factor.
    pub fn with_slack(lhs: f64, rhs: f64, constant: f64, slack: f64, digest: String) -> Self {
        let pass = lhs <= rhs * (1.0 + slack);
        InequalityReport { lhs, rhs, constant, pass, digest }
    }

    /// Comparison with the library-wide default slack.
    pub fn new(lhs: f64, rhs: f64, constant: f64, digest: String) -> Self {
        Self::with_slack(lhs, rhs, constant, INEQUALITY_SLACK, digest)
    }
}

fn norm(f: &GridFunction, p: &ReciprocalExponent) -> Result<f64> {
    Ok(luxemburg_norm(ModularKind::Rho, f, p, DEFAULT_REL_TOL)?.finite())
}

/// `|v|^s` with an exact fast path for integral `s`.
fn abs_power(v: f64, s: f64) -> f64 {
    let a = v.abs();
    if s == 1.0 {
        a
    } else if s.fract() == 0.0 && s <= 512.0 {
        a.powi(s as i32)
    } else {
        a.powf(s)
    }
}

/// Hölder: `‖fg‖_{s(·)} ≤ 2 ‖f‖_{p(·)} ‖g‖_{q(·)}` with `1/s = 1/p + 1/q`.
pub fn check_hoelder(
    f: &GridFunction,
    g: &GridFunction,
    p: &ReciprocalExponent,
    q: &ReciprocalExponent,
) -> Result<InequalityReport> {
    let s = ReciprocalExponent::hoelder_sum(p, q)?;
    let product = f.multiply(g)?;
    let lhs = norm(&product, &s)?;
    let rhs = 2.0 * norm(f, p)? * norm(g, q)?;
    let digest = format!(
        "hoelder: dim={} cells={} product-norm vs 2*split-norms",
        f.grid().dim(),
        f.grid().cell_count()
    );
    Ok(InequalityReport::new(lhs, rhs, 2.0, digest))
}

/// Power identity: `‖|f|^s‖_{p(·)} = ‖f‖_{sp(·)}^s` for `s ≥ 1`, verified as
/// an equality within [`EQUALITY_REL_TOL`].
pub fn check_power_identity(
    f: &GridFunction,
    p: &ReciprocalExponent,
    s: f64,
) -> Result<InequalityReport> {
    let p_scaled = p.scaled(s)?;
    let powered = GridFunction::new(
        *f.grid(),
        f.values().iter().map(|&v| abs_power(v, s)).collect(),
    )?;
    let a = norm(&powered, p)?;
    let b = norm(f, &p_scaled)?.powf(s);
    let magnitude = a.max(b);
    let digest = format!("power identity: s={s} lhs={a:.17e} rhs={b:.17e}");
    Ok(InequalityReport::new(
        (a - b).abs(),
        EQUALITY_REL_TOL * magnitude,
        EQUALITY_REL_TOL,
        digest,
    ))
}

/// Interpolation: `‖f‖_{p_θ} ≤ 2 ‖f‖_{p₀}^{1-θ} ‖f‖_{p₁}^{θ}` with the
/// reciprocal-convex intermediate exponent.
pub fn check_interpolation(
    f: &GridFunction,
    p0: &ReciprocalExponent,
    p1: &ReciprocalExponent,
    theta: f64,
) -> Result<InequalityReport> {
    let p_theta = ReciprocalExponent::interpolated(p0, p1, theta)?;
    let lhs = norm(f, &p_theta)?;
    let n0 = norm(f, p0)?;
    let n1 = norm(f, p1)?;
    let rhs = 2.0 * n0.powf(1.0 - theta) * n1.powf(theta);
    let digest = format!("interpolation: theta={theta} n0={n0:.6e} n1={n1:.6e}");
    Ok(InequalityReport::new(lhs, rhs, 2.0, digest))
}

/// Upper bound for the sum-space norm of `L^{r(·)} + L^{s(·)}` via the
/// canonical threshold split: the large part measured in `r`, the small part
/// in `s`. Requires `r ≤ s` cell-wise (including tails).
pub fn sum_norm_upper(
    f: &GridFunction,
    r: &ReciprocalExponent,
    s: &ReciprocalExponent,
    threshold: f64,
) -> Result<f64> {
    if !r.exponent_leq(s) {
        return Err(Error::Precondition(
            "sum-space split needs r <= s cell-wise on a shared grid".into(),
        ));
    }
    if threshold <= 0.0 || !threshold.is_finite() {
        return Err(Error::Domain(format!("threshold {threshold} must be finite and > 0")));
    }
    let (above, below) = f.split_at(threshold);
    Ok(norm(&above, r)? + norm(&below, s)?)
}

/// Two-sided embedding for `r ≤ p ≤ s` cell-wise:
/// (a) `‖f‖_{p(·)} ≤ 2 max(‖f‖_{r(·)}, ‖f‖_{s(·)})`, and
/// (b) the canonical split at `‖f‖_{p(·)}` realizes the sum-space embedding:
///     `sum_norm_upper(f, r, s, ‖f‖_p) ≤ 2 ‖f‖_{p(·)}`.
pub fn check_embedding(
    f: &GridFunction,
    p: &ReciprocalExponent,
    r: &ReciprocalExponent,
    s: &ReciprocalExponent,
) -> Result<(InequalityReport, InequalityReport)> {
    if !r.exponent_leq(p) || !p.exponent_leq(s) {
        return Err(Error::Precondition(
            "embedding needs r <= p <= s cell-wise on a shared grid".into(),
        ));
    }
    let np = norm(f, p)?;
    let nr = norm(f, r)?;
    let ns = norm(f, s)?;
    let intersection = InequalityReport::new(
        np,
        2.0 * nr.max(ns),
        2.0,
        format!("embedding (intersection side): np={np:.6e} nr={nr:.6e} ns={ns:.6e}"),
    );
    let sum_side = if f.is_zero() {
        InequalityReport::new(0.0, 0.0, 2.0, "embedding (sum side): zero function".into())
    } else {
        let split_value = sum_norm_upper(f, r, s, np)?;
        InequalityReport::new(
            split_value,
            2.0 * np,
            2.0,
            format!("embedding (sum side): split={split_value:.6e} np={np:.6e}"),
        )
    };
    Ok((intersection, sum_side))
}

/// Minimax embeddings controlled by the Nekvinda constant `N`:
/// `‖f‖_p ≤ 2N ‖f‖_{max(p,p∞)}`, `‖f‖_{min(p,p∞)} ≤ 2N ‖f‖_p`, and the
/// two-sided equivalence of `‖·‖_{max(p,p∞)}` with `max(‖·‖_p, ‖·‖_{p∞})`
/// with constant `4N`.
pub fn check_nekvinda_minimax(
    f: &GridFunction,
    p: &ReciprocalExponent,
    p_inf_reciprocal: f64,
) -> Result<Vec<InequalityReport>> {
    let n_const = match nekvinda_constant(p, p_inf_reciprocal, DEFAULT_REL_TOL)? {
        ExtReal::Finite(v) => v,
        ExtReal::Infinite => {
            return Err(Error::Precondition(format!(
                "exponent has an infinite Nekvinda constant for reference reciprocal {p_inf_reciprocal}"
            )))
        }
    };
    let p_max = p.max_with_constant(p_inf_reciprocal)?;
    let p_min = p.min_with_constant(p_inf_reciprocal)?;
    let p_const = ReciprocalExponent::from_reciprocals(
        *p.grid(),
        vec![p_inf_reciprocal; p.grid().cell_count()],
        p_inf_reciprocal,
    )?;

    let nf = norm(f, p)?;
    let nf_max = norm(f, &p_max)?;
    let nf_min = norm(f, &p_min)?;
    let nf_const = norm(f, &p_const)?;

    let two_n = 2.0 * n_const;
    let four_n = 4.0 * n_const;
    Ok(vec![
        InequalityReport::new(
            nf,
            two_n * nf_max,
            two_n,
            format!("minimax: |f|_p <= 2N |f|_max, N={n_const:.6e}"),
        ),
        InequalityReport::new(
            nf_min,
            two_n * nf,
            two_n,
            format!("minimax: |f|_min <= 2N |f|_p, N={n_const:.6e}"),
        ),
        InequalityReport::new(
            nf_max,
            four_n * nf.max(nf_const),
            four_n,
            format!("minimax: |f|_max <= 4N max(|f|_p, |f|_pinf), N={n_const:.6e}"),
        ),
        InequalityReport::new(
            nf.max(nf_const),
            four_n * nf_max,
            four_n,
            format!("minimax: max(|f|_p, |f|_pinf) <= 4N |f|_max, N={n_const:.6e}"),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cube, Grid};

    fn unit_grid(scale: u32) -> Grid {
        Grid::new(1, scale, &[0.0], &[3 << scale]).unwrap()
    }

    #[test]
    fn hoelder_on_self_dual_indicators() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let report = check_hoelder(&f, &f, &p, &p).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, 1.0);
        assert_eq!(report.rhs, 2.0);
    }

    #[test]
    fn hoelder_rejects_crowded_exponents() {
        let g = unit_grid(0);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 1.5).unwrap();
        assert!(check_hoelder(&f, &f, &p, &p).is_err());
    }

    #[test]
    fn hoelder_with_zero_factor_passes() {
        let g = unit_grid(1);
        let f = GridFunction::constant(g, 3.0).unwrap();
        let z = GridFunction::zeros(g);
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let report = check_hoelder(&f, &z, &p, &p).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, 0.0);
    }

    #[test]
    fn power_identity_is_exact_for_s_one() {
        let g = unit_grid(2);
        let f = GridFunction::from_cell_centers(g, |x| 0.25 + x[0]).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let report = check_power_identity(&f, &p, 1.0).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, 0.0);
    }

    #[test]
    fn power_identity_indicator_square() {
        // f = 1 on the unit box, s = 2, p ≡ 1: both sides equal |Q| = 1.
        let g = unit_grid(1);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 1.0).unwrap();
        let report = check_power_identity(&f, &p, 2.0).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn interpolation_endpoints_and_constant_case() {
        let g = unit_grid(2);
        let f = GridFunction::from_cell_centers(g, |x| 1.0 + x[0]).unwrap();
        let p0 = ReciprocalExponent::constant(g, 1.0).unwrap();
        let p1 = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        for theta in [0.0, 0.5, 1.0] {
            let report = check_interpolation(&f, &p0, &p1, theta).unwrap();
            assert!(report.pass, "theta={theta}: {report:?}");
        }
        let same = check_interpolation(&f, &p0, &p0, 0.3).unwrap();
        assert!(same.pass);
        assert!(same.lhs <= 0.5 * same.rhs * (1.0 + 1e-9));
    }

    #[test]
    fn sum_norm_collapses_at_extreme_thresholds() {
        let g = unit_grid(1);
        let f = GridFunction::from_cell_centers(g, |x| 1.0 + x[0]).unwrap();
        let r = ReciprocalExponent::constant(g, 1.0).unwrap();
        let s = ReciprocalExponent::constant(g, 3.0).unwrap();
        let ns = norm(&f, &s).unwrap();
        let nr = norm(&f, &r).unwrap();
        // Threshold above max|f|: everything lands in the s-part.
        let high = sum_norm_upper(&f, &r, &s, 10.0).unwrap();
        assert!((high - ns).abs() <= 1e-9 * ns);
        // Threshold below min|f|: everything lands in the r-part.
        let low = sum_norm_upper(&f, &r, &s, 1e-6).unwrap();
        assert!((low - nr).abs() <= 1e-9 * nr);
        // Ordering requirement.
        assert!(sum_norm_upper(&f, &s, &r, 1.0).is_err());
    }

    #[test]
    fn embedding_on_sandwiched_constant_exponents() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let r = ReciprocalExponent::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let s = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        let (a, b) = check_embedding(&f, &p, &r, &s).unwrap();
        assert!(a.pass, "{a:?}");
        assert!(b.pass, "{b:?}");
        assert!(check_embedding(&f, &r, &p, &s).is_err());
    }

    #[test]
    fn embedding_degenerate_chain_passes() {
        let g = unit_grid(1);
        let f = GridFunction::from_cell_centers(g, |x| x[0] - 0.5).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let (a, b) = check_embedding(&f, &p, &p, &p).unwrap();
        assert!(a.pass);
        assert!(b.pass);
    }

    #[test]
    fn minimax_reduces_to_constant_case() {
        let g = unit_grid(2);
        let f = GridFunction::from_cell_centers(g, |x| 1.0 - x[0] / 2.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let reports = check_nekvinda_minimax(&f, &p, 0.5).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn minimax_two_valued_exponent() {
        let g = unit_grid(3);
        let left = Cube::from_coords(&g, &[0.0], 1.0 / 3.0).unwrap();
        let p = ReciprocalExponent::step(g, 3.0, &[(left, 2.0)]).unwrap();
        let f = GridFunction::constant(g, 1.0).unwrap();
        let reports = check_nekvinda_minimax(&f, &p, 1.0 / 3.0).unwrap();
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn minimax_rejects_infinite_constant() {
        let g = unit_grid(0);
        let f = GridFunction::constant(g, 1.0).unwrap();
        // Tail reciprocal 1/3 but reference 1/2: infinite-measure mismatch.
        let p = ReciprocalExponent::constant(g, 3.0).unwrap();
        assert!(matches!(
            check_nekvinda_minimax(&f, &p, 0.5),
            Err(Error::Precondition(_))
        ));
    }
}
