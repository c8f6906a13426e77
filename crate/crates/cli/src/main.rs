use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use spavg::bootstrap::{Anchor, BootstrapConfig};
use spavg::harness::{
    average_pipeline, fit_single, parse_params, run_replication_study, AveragingMode, ExperimentConfig, Family,
    PipelineOptions,
};
use spavg::models::{GermGrainSet, ModelSpec, Realization};
use spavg::rng::StreamSeed;
use spavg::summaries::{PointPattern, Window};
use spavg::{Matrix, MseMatrix};

#[derive(Parser)]
#[command(name = "spavg", version, about = "Estimator averaging for spatial point process models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one realization and write it as CSV.
    Simulate {
        /// poisson1..poisson4, poisson, dpp, dpp1..dpp4, thomas or boolean.
        #[arg(long)]
        model: String,
        /// Parameter overrides, e.g. `kappa=10,mu=10,sigma=0.05`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value = "0,1,0,1")]
        window: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one estimator and print a JSON line.
    Fit {
        #[arg(long)]
        family: String,
        /// k, pcf, palm, area-perim, tangent or kernel:{default,diggle,ppl}.
        #[arg(long)]
        method: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Run the averaging pipeline on one observation.
    Average {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "av,av+,convex")]
        modes: String,
        #[arg(long, default_value_t = 100)]
        boot_n: usize,
        #[arg(long, default_value_t = 0)]
        boot_seed: u64,
        /// Estimator name, `mean`, or comma-separated parameter values.
        #[arg(long)]
        boot_anchor: Option<String>,
        /// Comma-separated subset of the family's estimators.
        #[arg(long)]
        estimators: Option<String>,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the bootstrap MSE matrix as labeled CSV.
        #[arg(long)]
        sigma_out: Option<PathBuf>,
        /// Directory for the initial and combined intensity fields (Poisson only).
        #[arg(long)]
        fields_out: Option<PathBuf>,
    },
    /// Run a replication study from a key-value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's `threads`.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn read_observation(family: Family, path: &Path) -> Result<Realization> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match family {
        Family::Boolean => Realization::Grains(GermGrainSet::from_csv(&text)?),
        _ => Realization::Points(PointPattern::from_csv(&text)?),
    })
}

fn parse_anchor(s: &str) -> Anchor {
    let values: Option<Vec<f64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
    match values {
        Some(v) if !v.is_empty() => Anchor::Values(v),
        _ => Anchor::parse(s),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            model,
            params,
            window,
            seed,
            out,
        } => {
            let spec = ModelSpec::from_name(&model, &parse_params(&params)?)?;
            let window = Window::parse(&window)?;
            let obs = spec.simulate(&window, &mut StreamSeed::new(seed).rng())?;
            fs::write(&out, obs.to_csv()).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Fit {
            family,
            method,
            input,
            grid,
        } => {
            let family = Family::parse(&family)?;
            let obs = read_observation(family, &input)?;
            println!("{}", fit_single(family, &method, &obs, (grid, grid))?.to_json_line());
        }
        Command::Average {
            family,
            modes,
            boot_n,
            boot_seed,
            boot_anchor,
            estimators,
            grid,
            input,
            out,
            sigma_out,
            fields_out,
        } => {
            let family = Family::parse(&family)?;
            let obs = read_observation(family, &input)?;
            let opts = PipelineOptions {
                bootstrap: BootstrapConfig {
                    n_samples: boot_n,
                    seed: boot_seed,
                    anchor: boot_anchor.as_deref().map(parse_anchor),
                },
                modes: AveragingMode::parse_list(&modes)?,
                estimators: estimators.map(|s| s.split(',').map(|t| t.trim().to_string()).collect()),
                grid: (grid, grid),
            };
            let result = average_pipeline(&obs, family, &opts)?;
            fs::write(&out, serde_json::to_string_pretty(&result)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = sigma_out {
                let entries = Matrix::from_rows(&result.mse_matrix).context("malformed MSE matrix")?;
                let sigma = MseMatrix::new(result.labels.clone(), entries)?;
                fs::write(&path, sigma.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(dir) = fields_out {
                let Some(fields) = &result.fields else {
                    bail!("--fields-out applies to the poisson family only");
                };
                fs::create_dir_all(&dir)?;
                for (label, f) in result.labels.iter().zip(&fields.initial) {
                    let name = label.split(':').next().unwrap_or(label);
                    fs::write(dir.join(format!("initial_{name}.csv")), f.to_csv())?;
                }
                for (m, f) in result.modes.iter().zip(&fields.combined) {
                    let name = m.mode.name().to_ascii_lowercase().replace('+', "plus");
                    fs::write(dir.join(format!("combined_{name}.csv")), f.to_csv())?;
                }
            }
        }
        Command::Experiment { config, out, threads } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            let table = run_replication_study(&cfg)?;
            let csv = table.to_csv();
            match out.or(cfg.output.clone()) {
                Some(path) => fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            if !table.failed.is_empty() {
                log::warn!("{} of {} replications failed", table.failed.len(), table.replications);
            }
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
