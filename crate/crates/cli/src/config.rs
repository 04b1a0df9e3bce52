//! Experiment configuration: JSON file plus CLI flag overrides, validated
//! before anything runs. The resolved config (minus output location and
//! worker count) is embedded into every output file so a run can be
//! reproduced from its own artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use magrc_core::spin::Material;

pub const PAPER_GRID_SIDES: [usize; 6] = [5, 7, 10, 15, 20, 30];

/// Default temperature sweep (K): base point plus millikelvin, liquid He,
/// 30 K, liquid N2, 200 K and room temperature.
pub const TEMPERATURE_GRID: [f64; 7] = [0.0, 0.28, 4.2, 30.0, 77.0, 200.0, 300.0];

/// Default thickness sweep (nm).
pub const THICKNESS_GRID: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evolve,
    RandomSearch,
    SweepTemperature,
    SweepScaling,
    Metrics,
    ImpulseDemo,
    TimestepCompare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Laser,
    Narma10,
    Narma30,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Laser => "laser",
            TaskKind::Narma10 => "narma10",
            TaskKind::Narma30 => "narma30",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReservoirKind {
    Film,
    EsnRandom,
    EsnLattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum DtChoice {
    #[serde(rename = "1fs")]
    #[value(name = "1fs")]
    Fs1,
    #[serde(rename = "100fs")]
    #[value(name = "100fs")]
    Fs100,
}

impl DtChoice {
    pub fn seconds(self) -> f64 {
        match self {
            DtChoice::Fs1 => 1e-15,
            DtChoice::Fs100 => 1e-13,
        }
    }
}

/// The reproducible part of a configuration: everything that influences
/// output bytes. Output directory and worker count live outside it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub material: Material,
    pub grid_side: usize,
    pub task: TaskKind,
    pub temperature_k: f64,
    pub thickness_nm: f64,
    pub dt: DtChoice,
    pub seed: u64,
    pub runs: usize,
    pub reservoir: ReservoirKind,
    /// Full published protocol (population 100, 2000 tournaments, 20 runs,
    /// 2000-sample batches); off by default in favour of desk-scale sizes.
    pub paper_scale: bool,
    /// Laser data file; required for the laser task.
    pub laser_path: Option<PathBuf>,
    /// Dump film snapshots while driving.
    pub snapshots: bool,
    /// Pairwise dipole cutoff radius (nm); absent means no cutoff.
    pub dipole_cutoff_nm: Option<f64>,
    /// Evolve raw ESN weights instead of scalings plus topology seed.
    pub evolve_raw_weights: bool,
    /// Desk-scale protocol sizes, used unless `paper_scale` is set.
    pub budget_population: usize,
    pub budget_tournaments: usize,
    pub budget_batch_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Evolve,
            material: Material::Co,
            grid_side: 7,
            task: TaskKind::Narma10,
            temperature_k: 0.0,
            thickness_nm: 0.1,
            dt: DtChoice::Fs100,
            seed: 1,
            runs: 3,
            reservoir: ReservoirKind::Film,
            paper_scale: false,
            laser_path: None,
            snapshots: false,
            dipole_cutoff_nm: None,
            evolve_raw_weights: false,
            budget_population: 20,
            budget_tournaments: 200,
            budget_batch_size: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn n_cells(&self) -> usize {
        self.grid_side * self.grid_side
    }

    pub fn thickness_m(&self) -> f64 {
        self.thickness_nm * 1e-9
    }

    pub fn dipole_cutoff_m(&self) -> Option<f64> {
        self.dipole_cutoff_nm.map(|nm| nm * 1e-9)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !PAPER_GRID_SIDES.contains(&self.grid_side) {
            return Err(format!(
                "grid_side: {} is not one of the supported sides {:?}",
                self.grid_side, PAPER_GRID_SIDES
            ));
        }
        if !(self.temperature_k >= 0.0 && self.temperature_k.is_finite()) {
            return Err(format!(
                "temperature_k: must be a finite non-negative kelvin value, got {}",
                self.temperature_k
            ));
        }
        if !(self.thickness_nm > 0.0 && self.thickness_nm <= 10.0) {
            return Err(format!(
                "thickness_nm: must lie in (0, 10], got {}",
                self.thickness_nm
            ));
        }
        if self.runs == 0 {
            return Err("runs: must be at least 1".to_string());
        }
        if self.budget_population < 2 || self.budget_tournaments == 0 || self.budget_batch_size == 0
        {
            return Err("budget sizes: population ≥ 2, tournaments ≥ 1, batch ≥ 1".to_string());
        }
        if let Some(cut) = self.dipole_cutoff_nm {
            if !(cut >= 0.0) {
                return Err(format!("dipole_cutoff_nm: must be non-negative, got {cut}"));
            }
        }
        if self.task == TaskKind::Laser {
            match &self.laser_path {
                None => {
                    return Err(
                        "laser_path: the laser task needs a data file (try --gen-laser to \
                         produce a synthetic stand-in)"
                            .to_string(),
                    )
                }
                Some(p) if !p.exists() => {
                    return Err(format!("laser_path: {} does not exist", p.display()))
                }
                _ => {}
            }
        }
        if self.evolve_raw_weights && self.reservoir == ReservoirKind::Film {
            return Err("evolve_raw_weights: only applies to ESN reservoirs".to_string());
        }
        Ok(())
    }

    /// Effective protocol sizes.
    pub fn mga_population(&self) -> usize {
        if self.paper_scale {
            100
        } else {
            self.budget_population
        }
    }

    pub fn mga_tournaments(&self) -> usize {
        if self.paper_scale {
            2000
        } else {
            self.budget_tournaments
        }
    }

    pub fn search_batch_size(&self) -> usize {
        if self.paper_scale {
            2000
        } else {
            self.budget_batch_size
        }
    }

    pub fn timestep_configs(&self) -> usize {
        if self.paper_scale {
            30
        } else {
            10
        }
    }

    pub fn scaling_sides(&self) -> &'static [usize] {
        if self.paper_scale {
            &PAPER_GRID_SIDES
        } else {
            // Desk scale keeps the film sweep tractable; the full set is
            // available under --paper-scale.
            &PAPER_GRID_SIDES[..2]
        }
    }

    /// One-line JSON for embedding in output headers.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// Load from a JSON file, or from any output CSV carrying an embedded
    /// `# config: {...}` header line.
    pub fn from_file(path: &Path) -> Result<ExperimentConfig, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let json = match text.lines().find(|l| !l.trim().is_empty()) {
            Some(line) if line.starts_with("# config: ") => {
                line.trim_start_matches("# config: ").to_string()
            }
            _ => text,
        };
        serde_json::from_str(&json).map_err(|e| format!("invalid config: {e}"))
    }
}
