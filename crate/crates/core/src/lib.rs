//! Variable-exponent Lebesgue spaces on discretized boxes.
//!
//! The crate models functions on uniform grids over 1D/2D boxes whose
//! coordinates are integer multiples of `h = 2^-M / 3`, exponents through
//! their reciprocals `u = 1/p ∈ [0, 1]`, and provides:
//!
//! - semimodulars and Luxemburg norms ([`modular`], [`norm`]),
//! - norm–modular calculus: Hölder, power, interpolation, embedding and
//!   minimax inequalities ([`calculus`]),
//! - exponent class constants and averaging-operator checks ([`classes`]),
//! - cube-family and shifted-dyadic maximal operators ([`maximal`],
//!   [`dyadic`]),
//! - Calderón–Zygmund decompositions and the associated operators
//!   ([`cz`]),
//! - exponent approximation sequences and convergence suites
//!   ([`approximation`]),
//! - seeded random instance generators ([`generators`]) and batch
//!   verification suites ([`verify`]).

pub mod error;
pub mod ext;
pub mod grid;
pub mod sum;

pub mod exponent;
pub mod modular;
pub mod norm;

pub mod approximation;
pub mod calculus;
pub mod classes;
pub mod cz;
pub mod dyadic;
pub mod generators;
pub mod maximal;
pub mod verify;

pub use approximation::{
    approximate_exponent, check_pk_constants, convergence_suite, counterexample_one,
    counterexample_two, fatou_suite, ConvergenceClass, ConvergenceReport, CounterexampleOne,
    CounterexampleTwo, LadderReport, LadderRow, DEFAULT_K_LIST,
};
pub use cz::{
    check_cube_averages, check_level_overlap, cz_decompose, duality_check, operator_t,
    operator_t_l, sum_of_shifts, CzCube, CzDecomposition, CzLevel, TlPart,
};
pub use dyadic::{all_shifts, cubes_at_scale, default_grid_id, visit_cubes, DyadicGridId};
pub use error::{Error, Result};
pub use maximal::{
    covering_grid_id, dyadic_maximal, maximal_function, maximal_ratio, three_grid_bound,
};
pub use ext::ExtReal;
pub use grid::{Cube, Grid, GridFunction};

pub use exponent::{conjugate_exponent, exponent_of, reciprocal_of, ReciprocalExponent};
pub use modular::{modular, modular_quotient, modular_scaled, ModularKind};
pub use norm::{conjugate_witness, luxemburg_norm, norm_trick_bound, NormResult, DEFAULT_REL_TOL};

pub use calculus::{
    check_embedding, check_hoelder, check_interpolation, check_nekvinda_minimax,
    check_power_identity, sum_norm_upper, InequalityReport,
};
pub use classes::{
    a_infinity_check, averaging_operator_check, avgmodular_check, best_p_infinity,
    class_constants, muckenhoupt_constant, muckenhoupt_detail, nekvinda_constant, ClassConstants,
    CubeFamily, MuckenhouptDetail,
};
pub use verify::{
    calibrate_decay, run_verify, run_verify_with, suite_approximation, suite_calculus,
    suite_classes, suite_luxemburg, suite_maximal, suite_modulars, tl_decay_report, CheckRow,
    DecayParams, SuiteReport, VerifyCounts, VerifyRun,
};
