use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use magrc_cli::config::{DtChoice, ExperimentConfig, Mode, ReservoirKind, TaskKind};
use magrc_cli::experiments::run_experiment;
use magrc_core::spin::Material;
use magrc_core::tasks::write_synthetic_laser;

/// Magnetic-film reservoir computing experiments.
///
/// Flags override values from --config; the resolved configuration is
/// embedded in every output file and can be fed back via --config to
/// reproduce a run bit for bit.
#[derive(Parser, Debug)]
#[command(name = "magrc", version, about)]
struct Cli {
    /// JSON config file, or any output CSV with an embedded config header.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, value_enum)]
    mode: Option<Mode>,

    /// Material: ni, co or fe.
    #[arg(long, value_parser = parse_material)]
    material: Option<Material>,

    /// Film / network side length; supported sides: 5, 7, 10, 15, 20, 30.
    #[arg(long)]
    grid_side: Option<usize>,

    #[arg(long, value_enum)]
    task: Option<TaskKind>,

    /// Operating temperature (K).
    #[arg(long)]
    temp_k: Option<f64>,

    /// Film thickness (nm).
    #[arg(long)]
    thickness_nm: Option<f64>,

    /// Integrator step: 1fs or 100fs.
    #[arg(long, value_enum)]
    dt: Option<DtChoice>,

    /// Master seed; all run seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,

    /// Independent runs (or batches, for random search).
    #[arg(long)]
    runs: Option<usize>,

    /// Reservoir kind: film, esn-random or esn-lattice.
    #[arg(long, value_enum)]
    reservoir: Option<ReservoirKind>,

    /// Desk-scale protocol (population 20, 200 tournaments). The default.
    #[arg(long)]
    budget: bool,

    /// Full published protocol (population 100, 2000 tournaments, 20 runs).
    #[arg(long)]
    paper_scale: bool,

    /// Laser data file (one integer per line).
    #[arg(long)]
    laser_file: Option<PathBuf>,

    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Worker pool size.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Dump full x/y/z component snapshots instead of m_z only.
    #[arg(long)]
    snapshots: bool,

    /// Pairwise dipole cutoff radius (nm).
    #[arg(long)]
    dipole_cutoff_nm: Option<f64>,

    /// Evolve raw ESN weights on a fixed sparsity pattern.
    #[arg(long)]
    evolve_raw_weights: bool,

    /// Write a synthetic stand-in laser file to the given path and exit.
    #[arg(long)]
    gen_laser: Option<PathBuf>,
}

fn parse_material(s: &str) -> Result<Material, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = cli.mode {
        cfg.mode = v;
    }
    if let Some(v) = cli.material {
        cfg.material = v;
    }
    if let Some(v) = cli.grid_side {
        cfg.grid_side = v;
    }
    if let Some(v) = cli.task {
        cfg.task = v;
    }
    if let Some(v) = cli.temp_k {
        cfg.temperature_k = v;
    }
    if let Some(v) = cli.thickness_nm {
        cfg.thickness_nm = v;
    }
    if let Some(v) = cli.dt {
        cfg.dt = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.runs {
        cfg.runs = v;
    }
    if let Some(v) = cli.reservoir {
        cfg.reservoir = v;
    }
    if cli.budget && cli.paper_scale {
        return Err("--budget and --paper-scale are mutually exclusive".to_string());
    }
    if cli.paper_scale {
        cfg.paper_scale = true;
        if cli.runs.is_none() {
            cfg.runs = 20;
        }
    }
    if cli.budget {
        cfg.paper_scale = false;
    }
    if let Some(v) = &cli.laser_file {
        cfg.laser_path = Some(v.clone());
    }
    if cli.snapshots {
        cfg.snapshots = true;
    }
    if let Some(v) = cli.dipole_cutoff_nm {
        cfg.dipole_cutoff_nm = Some(v);
    }
    if cli.evolve_raw_weights {
        cfg.evolve_raw_weights = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(path) = &cli.gen_laser {
        let seed = cli.seed.unwrap_or(1);
        return match write_synthetic_laser(path, 2500, seed) {
            Ok(()) => {
                println!("wrote synthetic laser series to {}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }

    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&cfg, &cli.out, cli.jobs) {
        Ok(()) => {
            println!("done: outputs in {}", cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
