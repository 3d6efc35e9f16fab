//! Command implementations: point computations, the verification runner,
//! and CSV emission.
//!
//! Every CSV uses the same schema — `scenario_id, quantity, value,
//! lower_bound, upper_bound, pass` — with floats printed to 17 significant
//! digits, rows sorted by `scenario_id`, so identical `(config, seed)`
//! pairs produce byte-identical files.

use std::fs;
use std::path::Path;

use anyhow::Context;
use varlex::{
    best_p_infinity, check_cube_averages, check_level_overlap, convergence_suite, cz_decompose,
    default_grid_id, exponent_of, luxemburg_norm, maximal_function, maximal_ratio, modular,
    muckenhoupt_detail, nekvinda_constant, run_verify_with, CheckRow, ConvergenceClass,
    DecayParams, ExtReal, VerifyCounts, VerifyRun,
};

use crate::config::{Scenario, ScenarioConfig};

/// Whether a command found violations (exit 1) or ran clean (exit 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Violations(usize),
}

fn outcome(violations: usize) -> Outcome {
    if violations == 0 {
        Outcome::Clean
    } else {
        Outcome::Violations(violations)
    }
}

/// 17 significant digits; `inf` / `-inf` for non-finite values. Used for
/// CSV so emission is byte-stable.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Shortest representation that round-trips, for console summaries.
fn disp(v: f64) -> String {
    format!("{v:?}")
}

fn disp_ext(v: ExtReal) -> String {
    disp(v.to_f64())
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(mut rows: Vec<CheckRow>) -> String {
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let mut text = String::from("scenario_id,quantity,value,lower_bound,upper_bound,pass\n");
    for row in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&row.id),
            csv_field(&row.quantity),
            fmt(row.value),
            fmt(row.lower),
            fmt(row.upper),
            row.pass
        ));
    }
    text
}

fn write_csv(dir: &Path, name: &str, rows: Vec<CheckRow>) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, render_csv(rows)).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn value_row(id: String, quantity: &str, value: f64) -> CheckRow {
    CheckRow {
        id,
        quantity: quantity.to_string(),
        value,
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        pass: true,
    }
}

fn check_row(id: String, quantity: &str, value: f64, lower: f64, upper: f64, pass: bool) -> CheckRow {
    CheckRow { id, quantity: quantity.to_string(), value, lower, upper, pass }
}

// ---------------------------------------------------------------------------
// Point commands
// ---------------------------------------------------------------------------

pub fn norm(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let rows = norm_rows(cfg, &s, true)?;
    if let Some(dir) = out {
        write_csv(dir, "norm.csv", rows)?;
    }
    Ok(Outcome::Clean)
}

fn norm_rows(cfg: &ScenarioConfig, s: &Scenario, print: bool) -> anyhow::Result<Vec<CheckRow>> {
    let kind = cfg.params.modular.kind();
    let result = luxemburg_norm(kind, &s.function, &s.exponent, cfg.params.tol)?;
    let value = result.finite();
    if print {
        println!("norm ({}) = {}", cfg.params.modular.label(), disp(value));
    }
    Ok(vec![value_row(
        format!("{}/norm/{}", cfg.id, cfg.params.modular.label()),
        "Luxemburg norm of the scenario function",
        value,
    )])
}

pub fn modular_value(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let rows = modular_rows(cfg, &s, true)?;
    if let Some(dir) = out {
        write_csv(dir, "modular.csv", rows)?;
    }
    Ok(Outcome::Clean)
}

fn modular_rows(cfg: &ScenarioConfig, s: &Scenario, print: bool) -> anyhow::Result<Vec<CheckRow>> {
    let kind = cfg.params.modular.kind();
    let value = modular(kind, &s.function, &s.exponent)?;
    if print {
        println!("modular ({}) = {}", cfg.params.modular.label(), disp_ext(value));
    }
    Ok(vec![value_row(
        format!("{}/modular/{}", cfg.id, cfg.params.modular.label()),
        "modular of the scenario function",
        value.to_f64(),
    )])
}

pub fn constants(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let rows = constants_rows(cfg, &s, true)?;
    if let Some(dir) = out {
        write_csv(dir, "constants.csv", rows)?;
    }
    Ok(Outcome::Clean)
}

fn constants_rows(cfg: &ScenarioConfig, s: &Scenario, print: bool) -> anyhow::Result<Vec<CheckRow>> {
    let max_side = cfg.params.max_side_cells.unwrap_or_else(|| s.grid.max_cells_per_axis());
    let detail = muckenhoupt_detail(&s.exponent, &s.grid.box_cube(), max_side)?;
    let tail_u = s.exponent.tail_reciprocal();
    let n_const = nekvinda_constant(&s.exponent, tail_u, cfg.params.tol)?;
    let (u_best, n_best) = best_p_infinity(&s.exponent, cfg.params.tail_scan_points)?;
    if print {
        println!(
            "[p]_A = {} (supremum over {} cubes up to {max_side} cells per side)",
            disp(detail.value),
            detail.cubes_checked
        );
        println!("[p]_N = {} (at the tail exponent p = {})", disp_ext(n_const), exponent_of(tail_u));
        println!(
            "best p_inf = {} (tail constant {} over a {}-point scan)",
            exponent_of(u_best),
            disp_ext(n_best),
            cfg.params.tail_scan_points
        );
    }
    Ok(vec![
        value_row(
            format!("{}/constants/cube", cfg.id),
            "cube supremum constant of the scenario exponent",
            detail.value,
        ),
        value_row(
            format!("{}/constants/tail", cfg.id),
            "tail-deviation constant at the scenario tail exponent",
            n_const.to_f64(),
        ),
        value_row(
            format!("{}/constants/best-tail-reciprocal", cfg.id),
            "reciprocal minimizing the tail-deviation constant",
            u_best,
        ),
        value_row(
            format!("{}/constants/best-tail-constant", cfg.id),
            "tail-deviation constant at the minimizing reciprocal",
            n_best.to_f64(),
        ),
    ])
}

pub fn maximal(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let (ratio_rows, cell_rows) = maximal_rows(cfg, &s, true)?;
    if let Some(dir) = out {
        let mut rows = ratio_rows;
        rows.extend(cell_rows);
        write_csv(dir, "maximal.csv", rows)?;
    }
    Ok(Outcome::Clean)
}

/// Ratio summary plus per-cell values of `Mf`, each bounded below by `|f|`.
fn maximal_rows(
    cfg: &ScenarioConfig,
    s: &Scenario,
    print: bool,
) -> anyhow::Result<(Vec<CheckRow>, Vec<CheckRow>)> {
    let mf = maximal_function(&s.function);
    let (p_minus, _) = s.exponent.essential_bounds();
    let unbounded = p_minus.to_f64() == 1.0;
    let note = if unbounded { " — unbounded family (p^- = 1)" } else { "" };

    let mut ratio_rows = Vec::new();
    if s.function.is_zero() {
        if print {
            println!("maximal ratio undefined: the scenario function is zero{note}");
        }
    } else {
        let ratio = maximal_ratio(&s.function, &s.exponent)?;
        if print {
            println!("maximal ratio |Mf| / |f| = {}{note}", disp(ratio));
        }
        ratio_rows.push(check_row(
            format!("{}/maximal/ratio", cfg.id),
            if unbounded {
                "norm ratio of the maximal function — unbounded family (p^- = 1)"
            } else {
                "norm ratio of the maximal function"
            },
            ratio,
            1.0,
            f64::INFINITY,
            ratio >= 1.0 - 1e-6,
        ));
    }

    let abs = s.function.abs();
    let cell_rows = mf
        .values()
        .iter()
        .zip(abs.values())
        .enumerate()
        .map(|(idx, (&m, &a))| {
            check_row(
                format!("{}/maximal/cell-{idx:06}", cfg.id),
                "maximal function value, bounded below by the input magnitude",
                m,
                a,
                f64::INFINITY,
                m >= a,
            )
        })
        .collect();
    Ok((ratio_rows, cell_rows))
}

pub fn cz(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let dim = s.grid.dim();
    let gamma = cfg.params.gamma.unwrap_or_else(|| 3f64.powi(dim as i32));
    let id = default_grid_id(&s.grid, [0, 0])?;
    let magnitude = s.function.abs();
    let dec = cz_decompose(&magnitude, &id, gamma, None)?;

    let total_cubes: usize = dec.levels().iter().map(|l| l.cubes.len()).sum();
    println!(
        "stopping-cube decomposition of |f| at ratio {gamma}: {} levels, {total_cubes} cubes, \
         max useful shift {}",
        dec.levels().len(),
        dec.max_shift()
    );
    let mut rows = Vec::new();
    for level in dec.levels() {
        let omega_cells = level.omega.iter().filter(|&&b| b).count();
        println!(
            "  level k = {}: threshold {}, {} cubes, {} cells above it",
            level.k,
            disp(level.threshold),
            level.cubes.len(),
            omega_cells
        );
        rows.push(value_row(
            format!("{}/cz/level-{:+04}/cubes", cfg.id, level.k),
            "selected stopping cubes at this level",
            level.cubes.len() as f64,
        ));
        rows.push(value_row(
            format!("{}/cz/level-{:+04}/threshold", cfg.id, level.k),
            "maximal-function threshold at this level",
            level.threshold,
        ));
    }

    let band = check_cube_averages(&dec);
    let overlap = check_level_overlap(&dec, 4);
    let mut violations = 0usize;
    for (name, rep) in [("average-band", &band), ("level-overlap", &overlap)] {
        println!(
            "  check {name}: {} ({} vs bound {})",
            if rep.pass { "pass" } else { "FAIL" },
            disp(rep.lhs),
            disp(rep.rhs)
        );
        rows.push(check_row(
            format!("{}/cz/check-{name}", cfg.id),
            &rep.digest,
            rep.lhs,
            f64::NEG_INFINITY,
            rep.rhs,
            rep.pass,
        ));
        if !rep.pass {
            violations += 1;
        }
    }

    if let Some(dir) = out {
        write_csv(dir, "cz.csv", rows)?;
    }
    Ok(outcome(violations))
}

// ---------------------------------------------------------------------------
// Verification commands
// ---------------------------------------------------------------------------

/// Scales the quick instance counts linearly in `samples` (40 reproduces
/// them exactly).
fn scaled_counts(samples: usize) -> VerifyCounts {
    let q = VerifyCounts::quick();
    let scale = |base: usize| ((base * samples) / 40).max(1);
    VerifyCounts {
        modular_trials: scale(q.modular_trials),
        luxemburg_trials: scale(q.luxemburg_trials),
        calibration_per_exponent: scale(q.calibration_per_exponent),
        calculus_trials: scale(q.calculus_trials),
        class_exponents: scale(q.class_exponents),
        class_trials_per_exponent: scale(q.class_trials_per_exponent),
        avgmodular_instances: scale(q.avgmodular_instances),
        maximal_trials: scale(q.maximal_trials),
        cz_trials: scale(q.cz_trials),
        approximation_trials: scale(q.approximation_trials),
        pk_exponents: scale(q.pk_exponents),
    }
}

fn class_label(class: ConvergenceClass) -> &'static str {
    match class {
        ConvergenceClass::Converged => "converged",
        ConvergenceClass::ExpectedFailure => "expected-failure",
        ConvergenceClass::Failed => "FAILED",
    }
}

/// Classifies the configured scenario's convergence run and returns its
/// rows plus the number of violations.
fn scenario_convergence_rows(
    cfg: &ScenarioConfig,
    s: &Scenario,
    print: bool,
) -> anyhow::Result<(Vec<CheckRow>, usize)> {
    let report = convergence_suite(&s.exponent, &s.function, &cfg.params.k_list)?;
    let label = class_label(report.class);
    if print {
        println!(
            "scenario convergence classification: {label} (hypothesis {}, modular target {}) — {}",
            if report.hypothesis_satisfied { "satisfied" } else { "violated" },
            disp(report.target_modular),
            if report.pass { "pass" } else { "violation" }
        );
    }
    let mut rows = vec![check_row(
        format!("{}/scenario/convergence-class", cfg.id),
        &format!(
            "convergence classification `{label}` (0 converged, 1 expected-failure, 2 failed)"
        ),
        match report.class {
            ConvergenceClass::Converged => 0.0,
            ConvergenceClass::ExpectedFailure => 1.0,
            ConvergenceClass::Failed => 2.0,
        },
        f64::NEG_INFINITY,
        1.0,
        report.class != ConvergenceClass::Failed,
    )];
    for (i, rep) in report.lower_semicontinuity.iter().enumerate() {
        rows.push(check_row(
            format!("{}/scenario/liminf-{i}", cfg.id),
            &rep.digest,
            rep.lhs,
            f64::NEG_INFINITY,
            rep.rhs,
            rep.pass,
        ));
    }
    let violations = rows.iter().filter(|r| !r.pass).count();
    Ok((rows, violations))
}

fn decay_params(cfg: &ScenarioConfig) -> Option<DecayParams> {
    cfg.params.decay.as_ref().map(|d| DecayParams { epsilon: d.epsilon, c0: d.c0 })
}

/// Runs every invariant suite plus the scenario classification; prints one
/// summary line per suite and a diagnostic line per failing instance.
pub fn verify(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let (mut rows, mut violations) = scenario_convergence_rows(cfg, &s, true)?;

    let run = run_verify_with(cfg.params.seed, &scaled_counts(cfg.params.samples), decay_params(cfg))?;
    print_suites(&run);
    violations += run.failures().len();
    rows.extend(verify_rows(cfg, &run));

    if let Some(dir) = out {
        write_csv(dir, "verify.csv", rows)?;
    }
    Ok(outcome(violations))
}

fn print_suites(run: &VerifyRun) {
    for suite in &run.suites {
        println!("suite {}", suite.summary());
    }
    for (suite, row) in run.failures() {
        println!(
            "  FAIL {suite}/{}: {} = {} outside [{}, {}]",
            row.id,
            row.quantity,
            disp(row.value),
            disp(row.lower),
            disp(row.upper)
        );
    }
}

fn verify_rows(cfg: &ScenarioConfig, run: &VerifyRun) -> Vec<CheckRow> {
    run.suites
        .iter()
        .flat_map(|suite| {
            suite.rows.iter().map(|row| CheckRow {
                id: format!("{}/{}/{}", cfg.id, suite.name, row.id),
                quantity: row.quantity.clone(),
                value: row.value,
                lower: row.lower,
                upper: row.upper,
                pass: row.pass,
            })
        })
        .collect()
}

/// Emits one CSV aggregating the scenario's point values with every
/// verification row; written to `<out>/report.csv`, or printed when no
/// output directory is given.
pub fn report(cfg: &ScenarioConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let s = cfg.build()?;
    let mut rows = Vec::new();
    rows.extend(norm_rows(cfg, &s, false)?);
    rows.extend(modular_rows(cfg, &s, false)?);
    rows.extend(constants_rows(cfg, &s, false)?);
    let (ratio_rows, _) = maximal_rows(cfg, &s, false)?;
    rows.extend(ratio_rows);

    let (conv_rows, mut violations) = scenario_convergence_rows(cfg, &s, false)?;
    rows.extend(conv_rows);

    let run = run_verify_with(cfg.params.seed, &scaled_counts(cfg.params.samples), decay_params(cfg))?;
    violations += run.failures().len();
    rows.extend(verify_rows(cfg, &run));

    match out {
        Some(dir) => write_csv(dir, "report.csv", rows)?,
        None => print!("{}", render_csv(rows)),
    }
    Ok(outcome(violations))
}
