use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pauli_core::harness::{execute, load_spec, Experiment, ExperimentSpec, Overrides};
use pauli_core::wigner::Basket;
use pauli_core::Error;

#[derive(Parser)]
#[command(
    name = "pauli",
    version,
    about = "Mixed-state Pauli-Poisson experiments"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment spec; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the experiment named in the config (single run by default).
    Run {
        #[command(flatten)]
        common: Common,
        /// Density snapshot every K steps.
        #[arg(long)]
        snap_stride: Option<usize>,
    },
    /// Pauli-Poisson versus Vlasov over an hbar ladder.
    StudySemiclassical {
        #[command(flatten)]
        common: Common,
    },
    /// N-body marginals versus the Hartree reference.
    StudyMeanfield {
        #[command(flatten)]
        common: Common,
    },
    /// Checks a config and prints its normalized form.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        snap_stride: Option<usize>,
    },
    /// Prints version, formats and limits as JSON.
    Info,
}

fn read_config(path: Option<&Path>) -> pauli_core::Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Validation(vec![format!("cannot read {}: {e}", p.display())])),
        None => Ok(String::new()),
    }
}

fn load(path: Option<&Path>, over: &Overrides) -> pauli_core::Result<ExperimentSpec> {
    load_spec(&read_config(path)?, over)
}

fn launch(common: &Common, over: Overrides) -> pauli_core::Result<i32> {
    let spec = load(common.config.as_deref(), &over)?;
    let manifest = execute(&spec, &common.out)?;
    eprintln!(
        "{}: {} (config {})",
        common.out.display(),
        manifest.status,
        &manifest.config_hash[..12]
    );
    Ok(manifest.exit_code)
}

fn info() -> serde_json::Value {
    let basket = Basket::v1();
    serde_json::json!({
        "name": "pauli",
        "version": env!("CARGO_PKG_VERSION"),
        "schema": pauli_core::harness::config::SCHEMA_VERSION,
        "experiments": ["single_run", "semiclassical_study", "meanfield_study", "poisswell_run"],
        "field_format": { "name": pauli_core::io::FIELD_FORMAT, "version": pauli_core::io::FIELD_VERSION },
        "threads": rayon::current_num_threads(),
        "limits": {
            "grid_points": pauli_core::grid::DEFAULT_POINT_BUDGET,
            "vlasov_points": pauli_core::vlasov::VLASOV_POINT_BUDGET,
            "nbody_amplitudes": pauli_core::nbody::NBODY_AMPLITUDE_BUDGET,
            "memory_bytes": pauli_core::harness::config::MEMORY_BUDGET_BYTES as u64,
        },
        "basket": {
            "version": basket.version,
            "functions": basket.functions.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(),
        },
        "exit_codes": { "ok": 0, "io": 1, "validation": 2, "numerical": 3, "budget": 4 },
    })
}

fn dispatch(cli: Cli) -> pauli_core::Result<i32> {
    match cli.command {
        Command::Run {
            common,
            snap_stride,
        } => launch(
            &common,
            Overrides {
                seed: common.seed,
                snap_stride,
                ..Overrides::default()
            },
        ),
        Command::StudySemiclassical { common } => launch(
            &common,
            Overrides {
                experiment: Some(Experiment::SemiclassicalStudy),
                seed: common.seed,
                snap_stride: None,
            },
        ),
        Command::StudyMeanfield { common } => launch(
            &common,
            Overrides {
                experiment: Some(Experiment::MeanfieldStudy),
                seed: common.seed,
                snap_stride: None,
            },
        ),
        Command::Validate {
            config,
            seed,
            snap_stride,
        } => {
            let spec = load(
                config.as_deref(),
                &Overrides {
                    seed,
                    snap_stride,
                    ..Overrides::default()
                },
            )?;
            print!("{}", spec.to_toml());
            eprintln!("config hash {}", spec.hash());
            Ok(0)
        }
        Command::Info => {
            println!(
                "{}",
                serde_json::to_string_pretty(&info()).expect("info serializes")
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
