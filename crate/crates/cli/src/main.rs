use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use noxsim_core::analysis::{normalize_r, MINUS_STATE, PLUS_STATE};
use noxsim_core::mitigation::{mitigate_records, read_records, Observable};
use noxsim_core::outcome::index_of;
use noxsim_core::pipeline::{
    compare_methods, fits_from_rows, format_table, read_series_csv, run_pipeline, write_artifacts, Case,
    ExperimentConfig, Mode,
};
use noxsim_core::{
    build_scattering_circuit, simulate_exact, simulate_trajectories, Circuit, NoiseContext, NoiseModel,
};

#[derive(Parser)]
#[command(name = "noxsim", version, about = "Pauli-noise simulation with RC, RCAL and NOX mitigation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact or shots.
    #[arg(long)]
    mode: Option<Mode>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: build, simulate, mitigate, analyze, write results.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of Trotter steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// One circuit under the configured noise.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Circuit in the text format; defaults to the scattering circuit.
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value = "interacting")]
        case: Case,
        /// Write the distribution here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RC and NOX estimates from a JSONL counts file.
    Mitigate {
        counts: PathBuf,
        /// Bitstring projector; without it the statistic is R₋.
        #[arg(long)]
        observable: Option<String>,
        #[arg(long, default_value_t = 10.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        n_boot: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sigmoid fits and time delays from a series file.
    Analyze { series: PathBuf },
    /// Method comparison table recomputed from a results directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { common, out, steps } => {
            let mut cfg = common.load()?;
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(s) = steps {
                cfg.n_trotter_max = s;
            }
            let art = run_pipeline(&cfg)?;
            let manifest = write_artifacts(&art, &cfg.out_dir)?;
            emit(&format!(
                "{}wrote {} files to {}\n",
                format_table(&art.metrics),
                manifest.files.len() + 1,
                cfg.out_dir.display()
            ))?;
        }
        Command::Simulate { common, circuit, steps, case, out } => {
            let cfg = common.load()?;
            let c = match circuit {
                Some(p) => std::fs::read_to_string(&p)
                    .with_context(|| format!("reading {}", p.display()))?
                    .parse::<Circuit>()?,
                None => build_scattering_circuit(&case.params(&cfg.scattering), steps)?,
            };
            let nm = NoiseModel::from_config(c.num_qubits(), &cfg.noise)?;
            let d = match cfg.mode {
                Mode::Exact => simulate_exact(&c, &nm)?,
                Mode::Shots => simulate_trajectories(&c, &nm, &NoiseContext::default(), cfg.shots, cfg.seed)?,
            };
            let json = serde_json::to_string_pretty(&d)?;
            write_or_print(out.as_deref(), &json)?;
        }
        Command::Mitigate { counts, observable, alpha, n_boot, seed } => {
            let file = File::open(&counts).with_context(|| format!("opening {}", counts.display()))?;
            let records = read_records(BufReader::new(file))?;
            let report = match observable {
                Some(bits) => {
                    let obs = Observable::projector(&bits)?;
                    mitigate_records(&records, alpha, n_boot, seed, |p| obs.expectation(p))?
                }
                None => {
                    let (ip, im) = (index_of(4, PLUS_STATE)?, index_of(4, MINUS_STATE)?);
                    mitigate_records(&records, alpha, n_boot, seed, |p| {
                        if p.len() != 16 {
                            return Err(noxsim_core::Error::DimensionMismatch { expected: 4, got: p.len().trailing_zeros() as usize });
                        }
                        Ok(normalize_r(p[ip], p[im])?.1)
                    })?
                }
            };
            emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))?;
        }
        Command::Analyze { series } => {
            let rows = read_series_csv(&std::fs::read_to_string(&series)?)?;
            let (fits, delays) = fits_from_rows(&rows);
            let fits: BTreeMap<String, _> = fits.into_iter().map(|((c, t), f)| (format!("{c}/{t}"), f)).collect();
            let out = serde_json::json!({ "fits": fits, "time_delays": delays });
            emit(&format!("{}\n", serde_json::to_string_pretty(&out)?))?;
        }
        Command::Report { out } => {
            let path = out.join("series.csv");
            if !path.exists() {
                bail!("{} not found; run the pipeline first", path.display());
            }
            let rows = read_series_csv(&std::fs::read_to_string(&path)?)?;
            emit(&format_table(&compare_methods(&rows)?))?;
        }
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = File::create(p)?;
            writeln!(f, "{text}")?;
        }
        None => emit(&format!("{text}\n"))?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
