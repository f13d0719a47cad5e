use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::report::{experiment_rng, ExperimentReport, Params, Table};
use crate::error::{GeometryError, Result};
use crate::kahler::{
    chart_path_length, fs_distance_homogeneous, gram_schmidt_reduce, pl2_norm_bound_check, CVector,
    ChartPoint, FubiniStudy,
};
use crate::loops::Measure;

/// Truncation dimensions used for `ℙ(l²)`.
pub const PL2_SWEEP: [usize; 4] = [2, 4, 16, 64];

const PAIRS: usize = 100;
const BOUND_SLACK: f64 = 1e-12;
const CHART_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-10;
const SEQUENCE_LEN: i32 = 30;
const NORM_SAMPLES: usize = 100;

fn gaussian_vector(rng: &mut impl Rng, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn basis(len: usize, ones: &[usize]) -> CVector {
    CVector::from_fn(len, |k, _| {
        Complex64::new(if ones.contains(&k) { 1.0 } else { 0.0 }, 0.0)
    })
}

fn check_dim(big_n: usize) -> Result<()> {
    if big_n < 2 {
        return Err(GeometryError::InvalidParameter(format!(
            "pl2 needs N >= 2, got {big_n}"
        )));
    }
    Ok(())
}

/// Random pairs in `ℙᴺ`: boundedness of the distance and agreement with the
/// chart-path integral after Gram–Schmidt reduction.
pub fn pl2_distance_experiment(big_n: usize, seed: u64) -> Result<ExperimentReport> {
    check_dim(big_n)?;
    let start = Instant::now();
    let name = format!("pl2-distance-N{big_n}");
    let mut rng = experiment_rng(seed, &name);
    let model = FubiniStudy::new(big_n);
    let line = FubiniStudy::p1();
    let len = big_n + 1;

    let mut table = Table::new(
        "pairs",
        &["pair", "distance", "chart_integral", "abs_err", "ratio"],
    );
    let (mut diameter, mut chart_err, mut max_chart_vs_homog) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..PAIRS {
        let p = gaussian_vector(&mut rng, len);
        let q = gaussian_vector(&mut rng, len);
        let d = fs_distance_homogeneous(&p, &q)?;
        let red = gram_schmidt_reduce(&p, &q)?;
        let integral = chart_path_length(&line, red.ratio)?;
        let via_charts =
            model.distance(&model.point(p.as_slice())?, &model.point(q.as_slice())?)?;
        diameter = diameter.max(d);
        chart_err = chart_err.max((d - integral).abs());
        max_chart_vs_homog = max_chart_vs_homog.max((d - via_charts).abs());
        table.push(vec![i as f64, d, integral, (d - integral).abs(), red.ratio]);
    }

    let e0 = basis(len, &[0]);
    let quarter = fs_distance_homogeneous(&e0, &basis(len, &[0, 1]))?;
    let orthogonal = fs_distance_homogeneous(&e0, &basis(len, &[1]))?;
    let equal = fs_distance_homogeneous(&e0, &e0)?;

    let mut report = ExperimentReport::new(
        name,
        Params {
            big_n: Some(big_n),
            seed,
            measure: Measure::Normalized,
            ..Params::default()
        },
    );
    report.scalar("diameter_estimate", diameter);
    report.scalar("max_chart_integral_err", chart_err);
    report.scalar("max_chart_vs_homogeneous", max_chart_vs_homog);
    report.scalar("quarter_pi_pair", quarter);
    report.scalar("orthogonal_pair", orthogonal);
    report.scalar("equal_pair", equal);
    report.flag("bounded", diameter <= FRAC_PI_2 + BOUND_SLACK);
    report.flag("chart_integral", chart_err <= CHART_TOL);
    report.flag("chart_consistency", max_chart_vs_homog <= CHART_TOL);
    report.flag("quarter_pi", (quarter - FRAC_PI_4).abs() <= CLOSED_FORM_TOL);
    report.flag(
        "orthogonal_half_pi",
        (orthogonal - FRAC_PI_2).abs() <= CLOSED_FORM_TOL,
    );
    report.flag("equal_zero", equal == 0.0);
    report.tables.push(table);
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// A contracting sequence `w̃_n = w + e₂/2ⁿ` in chart 0 of `ℙᴺ`: the
/// distances vanish with a uniform Lipschitz constant against the chart
/// norm, and the completeness bound holds along the connecting segments.
pub fn pl2_cauchy_experiment(big_n: usize, seed: u64) -> Result<ExperimentReport> {
    check_dim(big_n)?;
    let start = Instant::now();
    let name = format!("pl2-cauchy-N{big_n}");
    let mut rng = experiment_rng(seed, &name);
    let model = FubiniStudy::new(big_n);
    let w = gaussian_vector(&mut rng, big_n) * Complex64::new(0.5, 0.0);
    let at = |v: &CVector| ChartPoint::new(0, v.clone());
    let e2 = basis(big_n, &[1]);

    let constant = model.distance(&at(&w), &at(&w))?;
    let mut seq = Table::new("sequence", &["n", "step_norm", "distance", "ratio"]);
    let mut ratios = Vec::new();
    let mut distances = Vec::new();
    let mut terms = Vec::new();
    for k in 1..=SEQUENCE_LEN {
        let step = &e2 * Complex64::new(0.5f64.powi(k), 0.0);
        let wt = &w + &step;
        let d = model.distance(&at(&wt), &at(&w))?;
        let r = d / step.norm();
        seq.push(vec![k as f64, step.norm(), d, r]);
        ratios.push(r);
        distances.push(d);
        terms.push(wt);
    }
    let c_measured = ratios.iter().copied().fold(0.0, f64::max);
    let decreasing = distances.windows(2).all(|p| p[1] < p[0]);

    let mut samples = Table::new("norm_bound", &["sample", "lhs", "rhs"]);
    let mut holds = 0usize;
    for i in 0..NORM_SAMPLES {
        let k = rng.random_range(0..terms.len());
        let tau: f64 = rng.random();
        let dir = &terms[k] - &w;
        let point = &w + &dir * Complex64::new(tau, 0.0);
        let mut gamma = CVector::zeros(big_n + 1);
        let mut dgamma = CVector::zeros(big_n + 1);
        gamma[0] = Complex64::new(1.0, 0.0);
        for a in 0..big_n {
            gamma[a + 1] = point[a];
            dgamma[a + 1] = dir[a];
        }
        let (lhs, rhs) = pl2_norm_bound_check(&gamma, &dgamma)?;
        holds += usize::from(lhs <= rhs);
        samples.push(vec![i as f64, lhs, rhs]);
    }

    let mut report = ExperimentReport::new(
        name,
        Params {
            big_n: Some(big_n),
            seed,
            measure: Measure::Normalized,
            ..Params::default()
        },
    );
    report.scalar("constant_sequence_distance", constant);
    report.scalar("measured_c", c_measured);
    report.scalar(
        "last_distance",
        *distances.last().expect("non-empty sequence"),
    );
    report.scalar("norm_bound_holds", holds as f64);
    report.flag("constant_sequence_zero", constant == 0.0);
    report.flag("uniform_c", c_measured <= 1.0 + 1e-6);
    report.flag(
        "distances_vanish",
        decreasing && distances[distances.len() - 1] < 1e-8,
    );
    report.flag("norm_bound", holds == NORM_SAMPLES);
    report.tables.push(seq);
    report.tables.push(samples);
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(report)
}
