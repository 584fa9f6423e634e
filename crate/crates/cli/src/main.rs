use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mec_core::{
    emit_results, figure_presets, preset, run_experiment, Error, ExhaustiveCap, ExperimentSpec, Policy,
    ScenarioConfig, SweepVariable,
};

/// Monte Carlo sweeps of the offloading policies.
///
/// Either run one of the figure presets (`--preset fig2`) or describe a sweep
/// with `--sweep` and `--values` over a base scenario (`--config`, TOML).
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Figure preset to run: fig2, fig3, fig4 or fig5.
    #[arg(long, conflicts_with_all = ["sweep", "config"])]
    preset: Option<String>,

    /// TOML file with the base scenario parameters.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Parameter to sweep: num_users, cell_radius_km or cloudlet_freq_hz.
    #[arg(long, requires = "values")]
    sweep: Option<SweepVariable>,

    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    values: Vec<f64>,

    /// Comma-separated policies (default: all).
    #[arg(long, value_delimiter = ',')]
    policies: Vec<Policy>,

    /// Trials per sweep value.
    #[arg(long)]
    trials: Option<usize>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output file stem for a custom sweep.
    #[arg(long, default_value = "sweep")]
    label: String,

    /// Directory for the CSV files.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    #[arg(long, default_value_t = ExhaustiveCap::default().max_users)]
    max_exhaustive_users: usize,

    #[arg(long, default_value_t = ExhaustiveCap::default().max_subcarriers)]
    max_exhaustive_subcarriers: usize,

    /// Record per-policy wall time (makes output non-reproducible).
    #[arg(long)]
    timing: bool,

    /// List the presets and exit.
    #[arg(long)]
    list_presets: bool,
}

fn build_specs(args: &Args) -> Result<Vec<ExperimentSpec>, Error> {
    let mut specs = if let Some(name) = &args.preset {
        preset(name)
            .ok_or_else(|| Error::config(format!("unknown preset '{name}'")))?
            .specs
    } else {
        let sweep = args
            .sweep
            .ok_or_else(|| Error::config("either --preset or --sweep with --values is required"))?;
        let base_config = match &args.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        vec![ExperimentSpec {
            label: args.label.clone(),
            base_config,
            sweep_variable: sweep,
            sweep_values: args.values.clone(),
            policies: Policy::ALL.to_vec(),
            trials: 200,
            master_seed: 0,
            exhaustive_cap: ExhaustiveCap::default(),
            record_wall_time: false,
        }]
    };
    for spec in &mut specs {
        if !args.policies.is_empty() {
            spec.policies = args.policies.clone();
        }
        if let Some(trials) = args.trials {
            spec.trials = trials;
        }
        if let Some(seed) = args.seed {
            spec.master_seed = seed;
        }
        spec.exhaustive_cap = ExhaustiveCap {
            max_users: args.max_exhaustive_users,
            max_subcarriers: args.max_exhaustive_subcarriers,
        };
        spec.record_wall_time = args.timing;
        spec.validate()?;
    }
    Ok(specs)
}

fn run(args: &Args) -> Result<(), Error> {
    let specs = build_specs(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    for spec in &specs {
        let rows = run_experiment(spec)?;
        let detail = args.out.join(format!("{}.csv", spec.label));
        let summary = emit_results(&rows, &detail)?;
        println!("{} ({} rows)", detail.display(), rows.len());
        println!("{}", summary.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_presets {
        for p in figure_presets() {
            let labels: Vec<&str> = p.specs.iter().map(|s| s.label.as_str()).collect();
            println!("{}: {}", p.name, labels.join(", "));
        }
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ Error::Refused(_)) => {
            eprintln!("refused: {err}");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
