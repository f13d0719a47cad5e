use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::report::{experiment_rng, ExperimentConfig, ExperimentReport, Params, Table};
use crate::calculus::{
    d_omega_six_term, directional_derivative, integral_of_domega, integrand_chart_derivative,
    random_loop, LoopVectorField, PolynomialField,
};
use crate::connection::{check_metric_compatibility, check_torsion_free};
use crate::error::Result;
use crate::kahler::{model_by_name, omega_eval, KahlerModel};
use crate::loops::{Loop, LoopGrid};

const FIELD_SCALE: f64 = 0.5;
const IDENTITY_RTOL: f64 = 1e-4;
const KAHLER_TOL: f64 = 1e-6;
const INTEGRAND_TOL: f64 = 1e-6;
const NONZERO: f64 = 1e-6;
const LEVI_CIVITA_TOL: f64 = 1e-5;

pub(super) fn resolve_model(name: &str, big_n: usize) -> Result<Arc<dyn KahlerModel>> {
    let dim = match name {
        "pn" | "fubini-study-pn" => big_n,
        _ => 2,
    };
    model_by_name(name, dim)
}

struct Instance {
    g: Loop,
    fields: [PolynomialField; 3],
}

fn draw(rng: &mut impl Rng, n: usize, grid: LoopGrid) -> Result<Instance> {
    let g = random_loop(rng, n, grid, FIELD_SCALE)?;
    let fields = [
        PolynomialField::random(rng, n, &grid, FIELD_SCALE),
        PolynomialField::random(rng, n, &grid, FIELD_SCALE),
        PolynomialField::random(rng, n, &grid, FIELD_SCALE),
    ];
    Ok(Instance { g, fields })
}

/// Largest node-wise gap between the analytic chart derivative of the
/// `ω` integrand and its finite-difference value.
fn integrand_gap(m: &dyn KahlerModel, inst: &Instance) -> Result<f64> {
    let [xi, eta, nu] = &inst.fields;
    let g = &inst.g;
    let nu_g = nu.eval(m, g)?;
    let mut worst = 0.0f64;
    for j in 0..g.len() {
        let analytic = integrand_chart_derivative(m, g, xi, eta, &nu_g, j)?;
        let integrand = |h: &Loop| -> Result<Complex64> {
            let (a, b) = (xi.eval(m, h)?, eta.eval(m, h)?);
            Ok(Complex64::new(
                omega_eval(m, &a.vectors[j], &b.vectors[j])?,
                0.0,
            ))
        };
        let fd = directional_derivative(m, &integrand, g, &nu_g)?;
        worst = worst.max((analytic - fd).norm());
    }
    Ok(worst)
}

/// Six-term `dΩ` against the integrated pointwise `dω` on random instances,
/// plus the node-wise check of the integrand derivative.
pub fn dform_identity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let name = cfg.model.as_deref().unwrap_or("perturbed");
    let model = resolve_model(name, cfg.big_n)?;
    let m = model.as_ref();
    let n = m.dim();
    let nodes = cfg.m.unwrap_or(64);
    let trials = cfg.trials.unwrap_or(10);
    let grid = LoopGrid::new(nodes)?.with_measure(cfg.measure);
    let report_name = format!("dform-identity-{}", m.name());
    let mut rng = experiment_rng(cfg.seed, &report_name);
    let instances = (0..trials)
        .map(|_| draw(&mut rng, n, grid))
        .collect::<Result<Vec<_>>>()?;

    let rows = instances
        .par_iter()
        .map(|inst| {
            let [xi, eta, nu] = &inst.fields;
            let lhs = d_omega_six_term(m, xi, eta, nu, &inst.g)?;
            let rhs = integral_of_domega(m, xi, eta, nu, &inst.g)?;
            Ok([lhs, rhs, (lhs - rhs).abs(), integrand_gap(m, inst)?])
        })
        .collect::<Result<Vec<_>>>()?;

    let params = Params {
        model: Some(m.name().to_string()),
        m: Some(nodes),
        big_n: (n > 2).then_some(n),
        trials: Some(trials),
        seed: cfg.seed,
        measure: cfg.measure,
        ..Params::default()
    };
    let mut report = ExperimentReport::new(report_name, params);
    let mut table = Table::new(
        "trials",
        &["trial", "lhs", "rhs", "abs_err", "integrand_err"],
    );
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![i as f64, r[0], r[1], r[2], r[3]]);
    }
    let max_err = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let max_lhs = rows.iter().map(|r| r[0].abs()).fold(0.0, f64::max);
    let integrand = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let nonzero = rows
        .iter()
        .filter(|r| r[0].abs() > NONZERO && r[1].abs() > NONZERO)
        .count();
    report.scalar("max_err", max_err);
    report.scalar("max_abs_lhs", max_lhs);
    report.scalar("integrand_max_err", integrand);
    report.scalar("nonzero_trials", nonzero as f64);
    report.flag(
        "identity",
        rows.iter()
            .all(|r| r[2] <= IDENTITY_RTOL * (1.0 + r[1].abs())),
    );
    report.flag("integrand_derivative", integrand <= INTEGRAND_TOL);
    if m.is_kahler_expected() {
        report.flag("kahler_vanishing", max_lhs <= KAHLER_TOL);
    } else {
        report.flag("nonzero_sides", 10 * nonzero >= 8 * trials);
    }
    report.per_trial = rows.iter().map(|r| [r[0], r[1], r[2]]).collect();
    report.tables.push(table);
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Metric compatibility and torsion residuals on random `ℙ¹` instances.
pub fn levi_civita(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let model = resolve_model(cfg.model.as_deref().unwrap_or("p1"), cfg.big_n)?;
    let m = model.as_ref();
    let nodes = cfg.m.unwrap_or(64);
    let trials = cfg.trials.unwrap_or(20);
    let grid = LoopGrid::new(nodes)?.with_measure(cfg.measure);
    let mut rng = experiment_rng(cfg.seed, "levi-civita");
    let instances = (0..trials)
        .map(|_| draw(&mut rng, m.dim(), grid))
        .collect::<Result<Vec<_>>>()?;
    let rows = instances
        .par_iter()
        .map(|inst| {
            let [xi, eta, nu] = &inst.fields;
            let compat = check_metric_compatibility(m, &inst.g, xi, eta, nu)?;
            let torsion = check_torsion_free(m, &inst.g, xi, eta)?;
            Ok([compat, torsion])
        })
        .collect::<Result<Vec<_>>>()?;

    let params = Params {
        model: Some(m.name().to_string()),
        m: Some(nodes),
        trials: Some(trials),
        seed: cfg.seed,
        measure: cfg.measure,
        ..Params::default()
    };
    let mut report = ExperimentReport::new("levi-civita", params);
    let mut table = Table::new("trials", &["trial", "metric_residual", "torsion_residual"]);
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![i as f64, r[0], r[1]]);
    }
    let compat = rows.iter().map(|r| r[0]).fold(0.0, f64::max);
    let torsion = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    report.scalar("max_metric_residual", compat);
    report.scalar("max_torsion_residual", torsion);
    report.flag("metric_compatible", compat <= LEVI_CIVITA_TOL);
    report.flag("torsion_free", torsion <= LEVI_CIVITA_TOL);
    report.tables.push(table);
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(report)
}
