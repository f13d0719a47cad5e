use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use loopkahler::connection::PathRecord;
use loopkahler::experiments::{
    dform_identity, geodesic_between, geodesic_experiment, levi_civita, lp1_experiment,
    pl2_cauchy_experiment, pl2_distance_experiment, run_all, ExperimentConfig, ExperimentReport,
    Params, Suite,
};
use loopkahler::kahler::model_by_name;
use loopkahler::loops::io::{read_json, write_json, LoopRecord};
use loopkahler::loops::Measure;

/// Numerical experiments on loop spaces of Kähler manifolds.
#[derive(Parser, Debug)]
#[command(name = "loopkahler", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Model: flat, p1, pn, perturbed (or their full names).
    #[arg(long, global = true)]
    model: Option<String>,
    /// Loop grid nodes.
    #[arg(long = "M", global = true)]
    m: Option<usize>,
    /// Time steps of geodesic paths.
    #[arg(long = "P", global = true)]
    p: Option<usize>,
    /// Winding number of the test loop.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Dimension of the projective space standing in for P(l²).
    #[arg(long = "N", global = true, default_value_t = 16)]
    big_n: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Loop measure: normalized (total mass 1) or raw (total mass 2π).
    #[arg(long, global = true, default_value = "normalized")]
    measure: Measure,
    /// Random instances per experiment.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// dΩ by the six-term formula against the integrated dω.
    DformIdentity,
    /// Metric compatibility and torsion of the loop connection.
    LeviCivita,
    /// Per-leaf geodesic path between two loops.
    Geodesic {
        /// Starting loop file; defaults to the constant loop [1:0].
        #[arg(long)]
        f: Option<PathBuf>,
        /// End loop file; defaults to [cos ns : sin ns].
        #[arg(long)]
        g: Option<PathBuf>,
    },
    /// Lower and upper bounds for the distance between f ≡ [1:0] and g_n.
    Lp1,
    /// Distance and Cauchy-sequence experiments in P^N.
    Pl2,
    /// Every experiment.
    All,
}

impl Common {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model.clone(),
            m: self.m,
            p: self.p,
            n: self.n,
            big_n: self.big_n,
            seed: self.seed,
            measure: self.measure,
            trials: self.trials,
        }
    }
}

fn geodesic_from_files(
    cfg: &ExperimentConfig,
    f: &Path,
    g: &Path,
    out: &Path,
) -> Result<ExperimentReport> {
    let fr: LoopRecord = read_json(f).with_context(|| format!("reading {}", f.display()))?;
    let gr: LoopRecord = read_json(g).with_context(|| format!("reading {}", g.display()))?;
    let name = cfg.model.clone().unwrap_or_else(|| fr.model.clone());
    let dim = fr.coords.first().map_or(1, Vec::len);
    let model = model_by_name(&name, dim)?;
    let (fl, gl) = (fr.to_loop(cfg.measure)?, gr.to_loop(cfg.measure)?);
    let p = cfg.p.unwrap_or(64);
    let params = Params {
        model: Some(model.name().to_string()),
        m: Some(fl.len()),
        p: Some(p),
        seed: cfg.seed,
        measure: cfg.measure,
        ..Params::default()
    };
    let (report, path) = geodesic_between(model.as_ref(), &fl, &gl, p, params)?;
    write_json(
        &out.join("path.json"),
        &PathRecord::from_path(model.name(), &path),
    )?;
    Ok(report)
}

fn run(cli: &Cli) -> Result<Suite> {
    let cfg = cli.common.config();
    let out = &cli.common.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    if let Command::All = cli.command {
        return Ok(run_all(&cfg));
    }
    let mut suite = Suite::new(&cfg);
    let result: Result<Vec<ExperimentReport>> = (|| {
        Ok(match &cli.command {
            Command::DformIdentity => vec![dform_identity(&cfg)?],
            Command::LeviCivita => vec![levi_civita(&cfg)?],
            Command::Geodesic {
                f: Some(f),
                g: Some(g),
            } => vec![geodesic_from_files(&cfg, f, g, out)?],
            Command::Geodesic { f: None, g: None } => {
                let (report, path) = geodesic_experiment(&cfg)?;
                write_json(
                    &out.join("path.json"),
                    &PathRecord::from_path("fubini-study-p1", &path),
                )?;
                vec![report]
            }
            Command::Geodesic { .. } => anyhow::bail!("--f and --g must be given together"),
            Command::Lp1 => vec![lp1_experiment(&cfg)?],
            Command::Pl2 => vec![
                pl2_distance_experiment(cfg.big_n, cfg.seed)?,
                pl2_cauchy_experiment(cfg.big_n, cfg.seed)?,
            ],
            Command::All => unreachable!(),
        })
    })();
    match result {
        Ok(reports) => suite.reports = reports,
        Err(e) => suite.error = Some(format!("{e:#}")),
    }
    Ok(suite)
}

fn summarize(suite: &Suite) {
    for r in &suite.reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!("{status}  {}  ({:.2} s)", r.name, r.runtime_s);
        for (k, v) in &r.scalars {
            println!("      {k} = {v:.12e}");
        }
        for (k, v) in &r.informational {
            println!("      {k} = {v} (informational)");
        }
        for (k, v) in r.flags.iter().filter(|(_, v)| !**v) {
            println!("      flag {k} = {v}");
        }
    }
    if let Some(e) = &suite.error {
        println!("ERROR {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let suite = match run(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let out = &cli.common.out;
    let written = (|| -> Result<()> {
        write_json(&out.join("report.json"), &suite)?;
        for r in &suite.reports {
            r.write_tables(out)?;
        }
        Ok(())
    })();
    summarize(&suite);
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if suite.error.is_some() {
        ExitCode::from(2)
    } else if suite.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
