//! Reproducible experiments over the geometry layers and their reports.

mod geodesic;
mod identity;
mod pl2;
mod report;

pub use geodesic::{
    geodesic_between, geodesic_experiment, lp1_experiment, lp1_grid, lp1_loops, lp1_lower_bound,
    lp1_upper_bound, LP1_MIN_NODES_PER_WINDING,
};
pub use identity::{dform_identity, levi_civita};
pub use pl2::{pl2_cauchy_experiment, pl2_distance_experiment, PL2_SWEEP};
pub use report::{
    experiment_rng, ExperimentConfig, ExperimentReport, Params, Suite, Table, VERSION,
};

use rayon::prelude::*;

use crate::error::Result;

/// Models used by the `dform-identity` sweep in [`run_all`].
pub const DFORM_MODELS: [&str; 4] = ["perturbed", "flat", "p1", "pn"];

type Job<'a> = Box<dyn Fn() -> Result<Vec<ExperimentReport>> + Send + Sync + 'a>;

/// Every experiment with the given configuration. Experiments run
/// concurrently; reports come back in a fixed order, and the first failing
/// experiment ends the suite with the reports gathered before it.
pub fn run_all(cfg: &ExperimentConfig) -> Suite {
    let mut jobs: Vec<(String, Job)> = Vec::new();
    for name in DFORM_MODELS {
        let c = ExperimentConfig {
            model: Some(name.to_string()),
            ..cfg.clone()
        };
        jobs.push((
            format!("dform-identity ({name})"),
            Box::new(move || Ok(vec![dform_identity(&c)?])),
        ));
    }
    jobs.push((
        "levi-civita".into(),
        Box::new(|| Ok(vec![levi_civita(cfg)?])),
    ));
    jobs.push((
        "geodesic".into(),
        Box::new(|| Ok(vec![geodesic_experiment(cfg)?.0])),
    ));
    jobs.push(("lp1".into(), Box::new(|| Ok(vec![lp1_experiment(cfg)?]))));
    jobs.push((
        "pl2-distance".into(),
        Box::new(|| {
            PL2_SWEEP
                .iter()
                .map(|&n| pl2_distance_experiment(n, cfg.seed))
                .collect()
        }),
    ));
    jobs.push((
        "pl2-cauchy".into(),
        Box::new(|| Ok(vec![pl2_cauchy_experiment(cfg.big_n, cfg.seed)?])),
    ));

    let results: Vec<Result<Vec<ExperimentReport>>> =
        jobs.par_iter().map(|(_, job)| job()).collect();
    let mut suite = Suite::new(cfg);
    for ((name, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(reports) => suite.reports.extend(reports),
            Err(e) => {
                suite.error = Some(format!("experiment `{name}` failed: {e}"));
                break;
            }
        }
    }
    suite
}
