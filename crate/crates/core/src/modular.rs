//! The four (semi)modulars on grid functions.
//!
//! For a grid function `f` and exponent `p` the finite-exponent cells
//! contribute an integral sum, while `p = ∞` cells follow the convention
//! `t^∞ = 0` for `t ≤ 1` and `∞` for `t > 1`, implemented branch-wise so no
//! floating `0·∞` ever forms:
//!
//! - `Rho`:      Σ h^n |f|^p over finite cells, plus the jump from ∞-cells.
//! - `RhoTilde`: Σ h^n (1/p)|f|^p over finite cells, plus the same jump.
//! - `RhoEr`:    max(finite-cell sum, sup of |f| over ∞-cells).
//! - `RhoKr`:    finite-cell sum + sup of |f| over ∞-cells.
//!
//! Cell sums are accumulated as exact numerators and divided once by the
//! grid's volume denominator, so integer-valued test cases evaluate exactly.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::exponent::ReciprocalExponent;
use crate::grid::GridFunction;
use crate::sum::CompensatedSum;

/// Which of the four modulars to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModularKind {
    /// Plain integral sum plus the ∞-cell jump.
    Rho,
    /// Integrand weighted by `1/p(x)`, same jump.
    RhoTilde,
    /// Maximum of the finite-cell sum and the ∞-cell sup.
    RhoEr,
    /// Sum of the finite-cell sum and the ∞-cell sup.
    RhoKr,
}

impl ModularKind {
    pub const ALL: [ModularKind; 4] =
        [ModularKind::Rho, ModularKind::RhoTilde, ModularKind::RhoEr, ModularKind::RhoKr];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModularKind::Rho => "rho",
            ModularKind::RhoTilde => "rho_tilde",
            ModularKind::RhoEr => "rho_er",
            ModularKind::RhoKr => "rho_kr",
        }
    }
}

impl fmt::Display for ModularKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModularKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho" => Ok(ModularKind::Rho),
            "rho_tilde" | "tilde" => Ok(ModularKind::RhoTilde),
            "rho_er" | "er" => Ok(ModularKind::RhoEr),
            "rho_kr" | "kr" => Ok(ModularKind::RhoKr),
            other => Err(Error::Domain(format!(
                "unknown modular kind {other:?}; expected rho, rho_tilde, rho_er or rho_kr"
            ))),
        }
    }
}

/// `t^p` for `t ≥ 0` and finite `p ≥ 1` given as reciprocal `u = 1/p`.
/// Integral exponents go through `powi`, which is exact whenever every
/// intermediate product is representable.
#[inline]
pub(crate) fn finite_power(t: f64, u: f64) -> f64 {
    debug_assert!(u > 0.0);
    if u == 1.0 {
        return t;
    }
    let p = 1.0 / u;
    if p.fract() == 0.0 && p <= 512.0 {
        t.powi(p as i32)
    } else {
        t.powf(p)
    }
}

#[inline]
fn modular_core(
    kind: ModularKind,
    f: &GridFunction,
    p: &ReciprocalExponent,
    ratio: impl Fn(f64) -> f64,
) -> ExtReal {
    let recip = p.reciprocals();
    let jump_kind = matches!(kind, ModularKind::Rho | ModularKind::RhoTilde);

    let mut fin = CompensatedSum::new();
    let mut sup_inf = 0.0f64;
    for (idx, &v) in f.values().iter().enumerate() {
        let t = ratio(v.abs());
        let u = recip[idx];
        if u == 0.0 {
            if t > 1.0 && jump_kind {
                return ExtReal::Infinite;
            }
            sup_inf = sup_inf.max(t);
        } else if t != 0.0 {
            let term = finite_power(t, u);
            fin.add(if kind == ModularKind::RhoTilde { u * term } else { term });
        }
    }

    let fin_value = fin.value() / f.grid().volume_denominator();
    let out = match kind {
        ModularKind::Rho | ModularKind::RhoTilde => fin_value,
        ModularKind::RhoEr => fin_value.max(sup_inf),
        ModularKind::RhoKr => fin_value + sup_inf,
    };
    ExtReal::from_f64(out)
}

/// Evaluates the chosen modular of `λ·f` without materializing the scaled
/// function. `lambda` must be a finite nonnegative scale.
pub fn modular_scaled(
    kind: ModularKind,
    f: &GridFunction,
    p: &ReciprocalExponent,
    lambda: f64,
) -> Result<ExtReal> {
    p.check_grid(f, "modular evaluation")?;
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!("scale {lambda} must be finite and >= 0")));
    }
    Ok(modular_core(kind, f, p, |a| lambda * a))
}

/// Evaluates the chosen modular of `f / λ` for `λ > 0`. Cell ratios are
/// formed by IEEE division, so feasibility thresholds like `|v|/λ ≤ 1 ⟺
/// |v| ≤ λ` are decided exactly; the Luxemburg bisection relies on this.
pub fn modular_quotient(
    kind: ModularKind,
    f: &GridFunction,
    p: &ReciprocalExponent,
    lambda: f64,
) -> Result<ExtReal> {
    p.check_grid(f, "modular evaluation")?;
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!("divisor {lambda} must be finite and > 0")));
    }
    Ok(modular_core(kind, f, p, |a| a / lambda))
}

/// Evaluates the chosen modular of `f`.
pub fn modular(kind: ModularKind, f: &GridFunction, p: &ReciprocalExponent) -> Result<ExtReal> {
    modular_scaled(kind, f, p, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cube, Grid};

    fn unit_grid(scale: u32) -> Grid {
        Grid::new(1, scale, &[0.0], &[3 << scale]).unwrap()
    }

    /// Constant integer exponent, indicator data: value 1 for every k.
    #[test]
    fn indicator_has_unit_modular_for_every_constant_exponent() {
        let g = unit_grid(3);
        let f = GridFunction::constant(g, 1.0).unwrap();
        for k in 1..=10 {
            let p = ReciprocalExponent::constant(g, k as f64).unwrap();
            assert_eq!(modular(ModularKind::Rho, &f, &p).unwrap(), ExtReal::Finite(1.0));
        }
        let p_inf = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        assert_eq!(modular(ModularKind::Rho, &f, &p_inf).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn doubled_indicator_powers_exactly() {
        let g = unit_grid(4);
        let f = GridFunction::constant(g, 2.0).unwrap();
        for k in 1..=10 {
            let p = ReciprocalExponent::constant(g, k as f64).unwrap();
            let expected = ExtReal::Finite(f64::powi(2.0, k));
            assert_eq!(modular(ModularKind::RhoEr, &f, &p).unwrap(), expected);
            assert_eq!(modular(ModularKind::RhoKr, &f, &p).unwrap(), expected);
        }
        let p_inf = ReciprocalExponent::constant(g, f64::INFINITY).unwrap();
        assert_eq!(modular(ModularKind::RhoEr, &f, &p_inf).unwrap(), ExtReal::Finite(2.0));
        assert_eq!(modular(ModularKind::RhoKr, &f, &p_inf).unwrap(), ExtReal::Finite(2.0));
        assert_eq!(modular(ModularKind::Rho, &f, &p_inf).unwrap(), ExtReal::Infinite);
    }

    /// Weighted modular with an ∞-exponent band where the data exceeds 1:
    /// the jump fires for the banded exponent but not for the limit one.
    #[test]
    fn weighted_modular_jump_on_infinity_band() {
        let g = unit_grid(5);
        let f = GridFunction::constant(g, 2.0).unwrap();
        let band = Cube::from_coords(&g, &[0.25], 0.0625).unwrap();
        let banded = ReciprocalExponent::step(g, 1.0, &[(band, f64::INFINITY)]).unwrap();
        assert_eq!(modular(ModularKind::RhoTilde, &f, &banded).unwrap(), ExtReal::Infinite);
        let flat = ReciprocalExponent::constant(g, 1.0).unwrap();
        assert_eq!(modular(ModularKind::RhoTilde, &f, &flat).unwrap(), ExtReal::Finite(2.0));
    }

    #[test]
    fn squared_constant_on_unit_box() {
        let g = unit_grid(2);
        let f = GridFunction::constant(g, 2.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        assert_eq!(modular(ModularKind::Rho, &f, &p).unwrap(), ExtReal::Finite(4.0));
    }

    #[test]
    fn all_kinds_coincide_without_infinity_cells() {
        let g = unit_grid(2);
        let mut f = GridFunction::constant(g, 0.75).unwrap();
        f.values_mut()[3] = 1.5;
        let p = ReciprocalExponent::from_reciprocals(
            g,
            (0..g.cell_count()).map(|i| 0.25 + 0.5 * ((i % 3) as f64) / 2.0).collect(),
            0.5,
        )
        .unwrap();
        let base = modular(ModularKind::Rho, &f, &p).unwrap();
        assert_eq!(modular(ModularKind::RhoEr, &f, &p).unwrap(), base);
        assert_eq!(modular(ModularKind::RhoKr, &f, &p).unwrap(), base);
    }

    #[test]
    fn er_below_kr_and_tilde_below_rho() {
        let g = unit_grid(3);
        let band = Cube::from_coords(&g, &[0.5], 0.25).unwrap();
        let p = ReciprocalExponent::step(g, 3.0, &[(band, f64::INFINITY)]).unwrap();
        let mut f = GridFunction::constant(g, 0.5).unwrap();
        // Keep ∞-cells at 0.75 so no jump fires.
        let rect = band.cell_rect(&g).unwrap();
        for idx in rect.indices(&g) {
            f.values_mut()[idx] = 0.75;
        }
        let rho = modular(ModularKind::Rho, &f, &p).unwrap();
        let tilde = modular(ModularKind::RhoTilde, &f, &p).unwrap();
        let er = modular(ModularKind::RhoEr, &f, &p).unwrap();
        let kr = modular(ModularKind::RhoKr, &f, &p).unwrap();
        assert!(tilde <= rho);
        assert!(rho <= er);
        assert!(er <= kr);
        assert!(er < kr);
    }

    #[test]
    fn scaled_evaluation_matches_materialized_scaling() {
        let g = unit_grid(2);
        let f = GridFunction::from_cell_centers(g, |x| 0.5 + x[0]).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        let direct = modular(ModularKind::Rho, &f.scaled(0.5).unwrap(), &p).unwrap();
        let scaled = modular_scaled(ModularKind::Rho, &f, &p, 0.5).unwrap();
        assert_eq!(direct, scaled);
    }

    #[test]
    fn quotient_by_power_of_two_matches_scaling() {
        let g = unit_grid(3);
        let f = GridFunction::from_cell_centers(g, |x| 1.0 + x[0]).unwrap();
        let p = ReciprocalExponent::constant(g, 3.0).unwrap();
        let by_quotient = modular_quotient(ModularKind::Rho, &f, &p, 2.0).unwrap();
        let by_scale = modular_scaled(ModularKind::Rho, &f, &p, 0.5).unwrap();
        assert_eq!(by_quotient, by_scale);
        assert!(modular_quotient(ModularKind::Rho, &f, &p, 0.0).is_err());
    }

    #[test]
    fn negative_scale_rejected() {
        let g = unit_grid(0);
        let f = GridFunction::constant(g, 1.0).unwrap();
        let p = ReciprocalExponent::constant(g, 2.0).unwrap();
        assert!(modular_scaled(ModularKind::Rho, &f, &p, -1.0).is_err());
        assert!(modular_scaled(ModularKind::Rho, &f, &p, f64::INFINITY).is_err());
    }

    #[test]
    fn kind_parsing_round_trips() {
        for kind in ModularKind::ALL {
            assert_eq!(kind.as_str().parse::<ModularKind>().unwrap(), kind);
        }
        assert!("norm".parse::<ModularKind>().is_err());
    }
}
