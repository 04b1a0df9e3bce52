//! The seven experiment modes: evolution, random search, the temperature
//! and scaling sweeps, the metrics probe, the impulse demo, and the
//! integrator time-step comparison.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use magrc_core::eval::{EsnKind, EsnSearchConfig, EvalScore, FilmSearchConfig};
use magrc_core::evolve::{genome_id, mga_run, random_search, MgaOutcome, MgaParams, SearchSpace};
use magrc_core::metrics::{kernel_rank, memory_capacity, wilcoxon_ranksum};
use magrc_core::reservoir::{EsnReservoir, Reservoir, ReservoirGenome};
use magrc_core::rng::{derive_seed, stream_rng, streams};
use magrc_core::spin::snapshot::{write_snapshot, Components};
use magrc_core::spin::MaterialParams;
use magrc_core::tasks::{load_laser, narma_generate, TaskData};
use magrc_core::Error as CoreError;

use crate::config::{
    ExperimentConfig, Mode, ReservoirKind, TaskKind, TEMPERATURE_GRID, THICKNESS_GRID,
};
use crate::output::{
    file_header, quartiles, write_atomic, write_results, write_summary, ResultRow,
};

/// Upper bound on kernel-rank probe streams for very large reservoirs.
const KR_MAX_STREAMS: usize = 150;
const MC_EXTRA_LEN: usize = 600;
const ECHO_PREFIX: usize = 200;
/// Input windows dumped when snapshots are requested for a search run.
const SNAPSHOT_WINDOWS: usize = 100;

pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")?;
    pool.install(|| match cfg.mode {
        Mode::Evolve => mode_evolve(cfg, out_dir),
        Mode::RandomSearch => mode_random_search(cfg, out_dir),
        Mode::SweepTemperature => mode_sweep_temperature(cfg, out_dir),
        Mode::SweepScaling => mode_sweep_scaling(cfg, out_dir),
        Mode::Metrics => mode_metrics(cfg, out_dir),
        Mode::ImpulseDemo => mode_impulse_demo(cfg, out_dir),
        Mode::TimestepCompare => mode_timestep_compare(cfg, out_dir),
    })
}

pub fn load_task(cfg: &ExperimentConfig) -> Result<TaskData> {
    let task_seed = derive_seed(cfg.seed, streams::TASK_DATA);
    match cfg.task {
        TaskKind::Narma10 => Ok(narma_generate(10, 5000, task_seed)?.0),
        TaskKind::Narma30 => Ok(narma_generate(30, 5000, task_seed)?.0),
        TaskKind::Laser => {
            let path = cfg
                .laser_path
                .as_ref()
                .ok_or_else(|| anyhow!("laser task without a data file"))?;
            Ok(load_laser(path)?)
        }
    }
}

pub fn run_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.runs)
        .map(|r| derive_seed(cfg.seed, streams::RUN_BASE + r as u64))
        .collect()
}

/// A search target bound to one run: either a film at its operating point
/// or an ESN family.
pub enum SearchTarget {
    Film(FilmSearchConfig),
    Esn(EsnSearchConfig),
}

impl SearchTarget {
    pub fn from_config(cfg: &ExperimentConfig, run_seed: u64) -> SearchTarget {
        SearchTarget::from_config_at(
            cfg,
            run_seed,
            cfg.grid_side,
            cfg.temperature_k,
            cfg.thickness_nm,
        )
    }

    /// Variant used by the sweeps, which move the operating point or size.
    pub fn from_config_at(
        cfg: &ExperimentConfig,
        run_seed: u64,
        grid_side: usize,
        temperature_k: f64,
        thickness_nm: f64,
    ) -> SearchTarget {
        match cfg.reservoir {
            ReservoirKind::Film => SearchTarget::Film(FilmSearchConfig {
                material: MaterialParams::builtin(cfg.material),
                nx: grid_side,
                ny: grid_side,
                thickness: thickness_nm * 1e-9,
                temperature: temperature_k,
                dt: cfg.dt.seconds(),
                thermal_seed: derive_seed(run_seed, streams::THERMAL),
                dipole_cutoff: cfg.dipole_cutoff_m(),
            }),
            ReservoirKind::EsnRandom => SearchTarget::Esn(EsnSearchConfig {
                kind: EsnKind::Random {
                    n_nodes: grid_side * grid_side,
                },
                raw_weights: cfg
                    .evolve_raw_weights
                    .then(|| derive_seed(cfg.seed, streams::GENOME_INIT)),
            }),
            ReservoirKind::EsnLattice => SearchTarget::Esn(EsnSearchConfig {
                kind: EsnKind::Lattice { side: grid_side },
                raw_weights: cfg
                    .evolve_raw_weights
                    .then(|| derive_seed(cfg.seed, streams::GENOME_INIT)),
            }),
        }
    }

    pub fn space(&self) -> SearchSpace {
        match self {
            SearchTarget::Film(f) => f.space(),
            SearchTarget::Esn(e) => e.space(),
        }
    }

    pub fn evaluate(&self, genes: &[f64], task: &TaskData) -> magrc_core::Result<EvalScore> {
        match self {
            SearchTarget::Film(f) => f.evaluate(genes, task),
            SearchTarget::Esn(e) => e.evaluate(genes, task),
        }
    }

    /// Kernel rank and memory capacity of one genotype.
    pub fn measure(&self, genes: &[f64], seed: u64) -> magrc_core::Result<(f64, f64)> {
        let mut reservoir: Box<dyn Reservoir> = match self {
            SearchTarget::Film(f) => Box::new(f.build_reservoir(f.decode(genes)?)?),
            SearchTarget::Esn(e) => Box::new(EsnReservoir::new(e.decode(genes)?)),
        };
        let dim = reservoir.state_dim();
        let kr = kernel_rank(
            reservoir.as_mut(),
            dim.min(KR_MAX_STREAMS),
            magrc_core::metrics::KR_STREAM_LEN,
            derive_seed(seed, streams::METRICS),
        )?;
        let max_delay = (2 * dim).min(100);
        let mc = memory_capacity(
            reservoir.as_mut(),
            max_delay,
            magrc_core::tasks::WASHOUT + max_delay + MC_EXTRA_LEN,
            derive_seed(seed, streams::METRICS + 1),
        )?;
        Ok((kr.normalised, mc.total))
    }

    /// Echo-state washout check for films; ESNs trivially pass.
    pub fn echo_ok(&self, genes: &[f64], task: &TaskData) -> bool {
        match self {
            SearchTarget::Film(f) => match f.decode(genes).and_then(|g| f.build_reservoir(g)) {
                Ok(mut reservoir) => {
                    let prefix = &task.input[..ECHO_PREFIX.min(task.len())];
                    reservoir
                        .echo_state_check(prefix, task.washout, 1e-3)
                        .unwrap_or(false)
                }
                Err(_) => false,
            },
            SearchTarget::Esn(_) => true,
        }
    }

    pub fn describe_genome(&self, genes: &[f64]) -> serde_json::Value {
        match self {
            SearchTarget::Film(f) => match f.decode(genes) {
                Ok(genome) => serde_json::to_value(&genome).unwrap_or(serde_json::Value::Null),
                Err(_) => serde_json::Value::Null,
            },
            SearchTarget::Esn(e) => serde_json::json!({
                "kind": match e.kind {
                    EsnKind::Random { n_nodes } => format!("random-{n_nodes}"),
                    EsnKind::Lattice { side } => format!("lattice-{side}x{side}"),
                },
                "b": genes.first(),
                "c": genes.get(1),
                "leak_a": genes.get(2),
            }),
        }
    }
}

fn mga_params(cfg: &ExperimentConfig) -> MgaParams {
    MgaParams {
        population: cfg.mga_population(),
        tournaments: cfg.mga_tournaments(),
        ..MgaParams::default()
    }
}

struct EvolveRunOutput {
    row: ResultRow,
    outcome: MgaOutcome,
    echo_ok: bool,
    genome_json: serde_json::Value,
}

fn evolve_one_run(
    cfg: &ExperimentConfig,
    task: &TaskData,
    run: usize,
    run_seed: u64,
) -> Result<EvolveRunOutput> {
    let target = SearchTarget::from_config(cfg, run_seed);
    let space = target.space();
    let outcome = mga_run(
        &space,
        |genes| target.evaluate(genes, task),
        &mga_params(cfg),
        derive_seed(run_seed, streams::MGA),
    )?;
    let (kr, mc) = target
        .measure(&outcome.best_genes, run_seed)
        .unwrap_or((f64::NAN, f64::NAN));
    let echo_ok = target.echo_ok(&outcome.best_genes, task);
    let genome_json = target.describe_genome(&outcome.best_genes);
    Ok(EvolveRunOutput {
        row: ResultRow {
            material: cfg.material.name().to_string(),
            task: task.name.clone(),
            grid_side: cfg.grid_side,
            temperature_k: cfg.temperature_k,
            thickness_nm: cfg.thickness_nm,
            run,
            val_nmse: outcome.best_score.val_nmse,
            test_nmse: outcome.best_score.test_nmse,
            kr,
            mc,
        },
        outcome,
        echo_ok,
        genome_json,
    })
}

fn history_csv(cfg: &ExperimentConfig, seeds: &[u64], run: usize, outcome: &MgaOutcome) -> String {
    let mut body = file_header(cfg, seeds);
    body.push_str("run,tournament,best_val_nmse,best_test_nmse,genome_id\n");
    for row in &outcome.history {
        body.push_str(&format!(
            "{run},{},{},{},{:016x}\n",
            row.tournament, row.best_val_nmse, row.best_test_nmse, row.genome_id
        ));
    }
    body
}

fn mode_evolve(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let task = load_task(cfg)?;
    let seeds = run_seeds(cfg);
    let runs: Vec<EvolveRunOutput> = seeds
        .par_iter()
        .enumerate()
        .map(|(run, seed)| evolve_one_run(cfg, &task, run, *seed))
        .collect::<Result<Vec<_>>>()?;

    for (run, output) in runs.iter().enumerate() {
        write_atomic(
            &out_dir.join(format!("run_{run}_history.csv")),
            &history_csv(cfg, &seeds, run, &output.outcome),
        )?;
        let best = serde_json::json!({
            "run": run,
            "genome_id": format!("{:016x}", output.outcome.best_id),
            "genes": output.outcome.best_genes,
            "val_nmse": output.outcome.best_score.val_nmse,
            "test_nmse": output.outcome.best_score.test_nmse,
            "lambda": output.outcome.best_score.lambda,
            "evaluations": output.outcome.evaluations,
            "echo_ok": output.echo_ok,
            "genome": output.genome_json,
        });
        write_atomic(
            &out_dir.join(format!("run_{run}_best.json")),
            &format!("{}\n", serde_json::to_string_pretty(&best)?),
        )?;
        if !output.echo_ok {
            eprintln!(
                "warning: run {run} best genome failed the echo-state washout check; \
                 marked invalid in run_{run}_best.json"
            );
        }
    }

    let rows: Vec<ResultRow> = runs.iter().map(|r| r.row.clone()).collect();
    write_results(out_dir, cfg, &seeds, &rows)?;
    write_summary(out_dir, cfg, &seeds)?;

    // Optional snapshot dump: re-drive the overall best film genome over
    // the opening input windows.
    if cfg.snapshots && cfg.reservoir == ReservoirKind::Film {
        let best_run = rows
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.val_nmse.partial_cmp(&b.1.val_nmse).expect("scores"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let target = SearchTarget::from_config(cfg, seeds[best_run]);
        if let SearchTarget::Film(search) = &target {
            let genome = search.decode(&runs[best_run].outcome.best_genes)?;
            let mut reservoir = search.build_reservoir(genome)?;
            let snap_dir = out_dir.join("snapshots");
            std::fs::create_dir_all(&snap_dir)?;
            let prefix = &task.input[..SNAPSHOT_WINDOWS.min(task.len())];
            let side = cfg.grid_side;
            let mut snapshot_error: Option<std::io::Error> = None;
            reservoir.drive_with_observer(prefix, |step, state| {
                if snapshot_error.is_none() {
                    if let Err(CoreError::Io(e)) = write_snapshot(
                        &snap_dir.join(format!("snap_{step:04}.csv")),
                        state,
                        side,
                        side,
                        Components::Xyz,
                    ) {
                        snapshot_error = Some(e);
                    }
                }
            })?;
            if let Some(e) = snapshot_error {
                return Err(e.into());
            }
        }
    }
    Ok(())
}

fn mode_random_search(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let task = load_task(cfg)?;
    let seeds = run_seeds(cfg);
    // Each batch draws from its own derived seed; batches are the "runs".
    let bests: Vec<(usize, ResultRow)> = (0..cfg.runs)
        .into_par_iter()
        .map(|batch| -> Result<(usize, ResultRow)> {
            let target = SearchTarget::from_config(cfg, seeds[batch]);
            let space = target.space();
            let best = random_search(
                &space,
                |genes| target.evaluate(genes, &task),
                cfg.search_batch_size(),
                1,
                derive_seed(seeds[batch], streams::RANDOM_SEARCH),
            )?
            .pop()
            .expect("one batch");
            let (kr, mc) = target
                .measure(&best.genes, seeds[batch])
                .unwrap_or((f64::NAN, f64::NAN));
            Ok((
                batch,
                ResultRow {
                    material: cfg.material.name().to_string(),
                    task: task.name.clone(),
                    grid_side: cfg.grid_side,
                    temperature_k: cfg.temperature_k,
                    thickness_nm: cfg.thickness_nm,
                    run: batch,
                    val_nmse: best.score.val_nmse,
                    test_nmse: best.score.test_nmse,
                    kr,
                    mc,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<ResultRow> = bests.into_iter().map(|(_, row)| row).collect();
    rows.sort_by_key(|r| r.run);
    write_results(out_dir, cfg, &seeds, &rows)?;
    write_summary(out_dir, cfg, &seeds)?;
    Ok(())
}

fn mode_sweep_temperature(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    if cfg.reservoir != ReservoirKind::Film {
        bail!(CoreError::config(
            "sweep-temperature applies to film reservoirs"
        ));
    }
    let task = load_task(cfg)?;
    let seeds = run_seeds(cfg);

    // Evolve once at the base operating point (0 K unless configured
    // otherwise), then re-evaluate that genome across the grid.
    let base = evolve_one_run(cfg, &task, 0, seeds[0])?;
    write_atomic(
        &out_dir.join("evolved_base.json"),
        &format!("{}\n", serde_json::to_string_pretty(&base.genome_json)?),
    )?;

    let conditions: Vec<(usize, f64, f64)> = TEMPERATURE_GRID
        .iter()
        .flat_map(|t| THICKNESS_GRID.iter().map(move |h| (*t, *h)))
        .enumerate()
        .map(|(i, (t, h))| (i, t, h))
        .collect();

    let rows: Vec<ResultRow> = conditions
        .par_iter()
        .map(|(idx, temp, thick)| {
            let target = SearchTarget::from_config_at(
                cfg,
                derive_seed(seeds[0], 0x5457_0000 + *idx as u64),
                cfg.grid_side,
                *temp,
                *thick,
            );
            let score = target
                .evaluate(&base.outcome.best_genes, &task)
                .unwrap_or(EvalScore {
                    val_nmse: f64::INFINITY,
                    test_nmse: f64::INFINITY,
                    lambda: f64::NAN,
                });
            ResultRow {
                material: cfg.material.name().to_string(),
                task: task.name.clone(),
                grid_side: cfg.grid_side,
                temperature_k: *temp,
                thickness_nm: *thick,
                run: *idx,
                val_nmse: score.val_nmse,
                test_nmse: score.test_nmse,
                kr: f64::NAN,
                mc: f64::NAN,
            }
        })
        .collect();

    write_results(out_dir, cfg, &seeds, &rows)?;
    write_summary(out_dir, cfg, &seeds)?;
    Ok(())
}

fn mode_sweep_scaling(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let task = load_task(cfg)?;
    let seeds = run_seeds(cfg);
    let mut rows = Vec::new();
    for &side in cfg.scaling_sides() {
        let side_cfg = ExperimentConfig {
            grid_side: side,
            ..cfg.clone()
        };
        let side_rows: Vec<ResultRow> = seeds
            .par_iter()
            .enumerate()
            .map(|(run, seed)| {
                evolve_one_run(&side_cfg, &task, run, derive_seed(*seed, side as u64))
                    .map(|o| o.row)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(side_rows);
    }
    write_results(out_dir, cfg, &seeds, &rows)?;
    write_summary(out_dir, cfg, &seeds)?;
    Ok(())
}

fn mode_metrics(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let seeds = run_seeds(cfg);
    let rows: Vec<ResultRow> = seeds
        .par_iter()
        .enumerate()
        .map(|(run, seed)| -> Result<ResultRow> {
            let target = SearchTarget::from_config(cfg, *seed);
            let space = target.space();
            let mut rng = stream_rng(*seed, streams::GENOME_INIT);
            let genes = space.sample(&mut rng);
            // An aggressively sampled film can trip the stability guard
            // under the ±1 probe inputs; report NaN for that run and move
            // on rather than failing the whole experiment.
            let (kr, mc) = match target.measure(&genes, *seed) {
                Ok(values) => values,
                Err(e) => {
                    eprintln!("warning: metrics run {run} failed: {e}");
                    (f64::NAN, f64::NAN)
                }
            };
            Ok(ResultRow {
                material: cfg.material.name().to_string(),
                task: cfg.task.name().to_string(),
                grid_side: cfg.grid_side,
                temperature_k: cfg.temperature_k,
                thickness_nm: cfg.thickness_nm,
                run,
                val_nmse: f64::NAN,
                test_nmse: f64::NAN,
                kr,
                mc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_results(out_dir, cfg, &seeds, &rows)?;
    Ok(())
}

/// Impulse train driven into the film centre: dumps one snapshot per input
/// window and a per-cell first-response table.
fn mode_impulse_demo(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    if cfg.reservoir != ReservoirKind::Film {
        bail!(CoreError::config("impulse-demo applies to film reservoirs"));
    }
    let side = cfg.grid_side;
    let n = side * side;
    let centre = (side / 2) * side + side / 2;
    let mut w_in = vec![[0.0f64; 2]; n];
    w_in[centre] = [1.0, 0.0];
    let genome = ReservoirGenome {
        w_in,
        b: 0.5,
        alpha_damping: 0.05,
        leak_a: 1.0,
        material: MaterialParams::builtin(cfg.material),
        nx: side,
        ny: side,
        thickness: cfg.thickness_m(),
        temperature: cfg.temperature_k,
    };
    let search = FilmSearchConfig {
        material: MaterialParams::builtin(cfg.material),
        nx: side,
        ny: side,
        thickness: cfg.thickness_m(),
        temperature: cfg.temperature_k,
        dt: cfg.dt.seconds(),
        thermal_seed: derive_seed(cfg.seed, streams::THERMAL),
        dipole_cutoff: cfg.dipole_cutoff_m(),
    };
    let mut reservoir = search.build_reservoir(genome)?;
    let relaxed = reservoir.relaxed_state().clone();

    // Impulses at 25-step intervals.
    let steps = 100;
    let input: Vec<f64> = (0..steps)
        .map(|t| if t % 25 == 0 { 1.0 } else { 0.0 })
        .collect();

    let snap_dir = out_dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;
    let components = if cfg.snapshots {
        Components::Xyz
    } else {
        Components::Z
    };
    let mut deviation: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); n];
    let mut snapshot_error: Option<std::io::Error> = None;
    reservoir.drive_with_observer(&input, |step, state| {
        for (i, (m, m0)) in state.m.iter().zip(relaxed.m.iter()).enumerate() {
            deviation[i].push((m.z - m0.z).abs());
        }
        if snapshot_error.is_none() {
            if let Err(CoreError::Io(e)) = write_snapshot(
                &snap_dir.join(format!("snap_{step:04}.csv")),
                state,
                side,
                side,
                components,
            ) {
                snapshot_error = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e.into());
    }

    // A cell has responded once its |Δm_z| reaches a quarter of its own
    // peak response; the instantaneous long-range dipole crosstalk sits
    // well below that, so this tracks the arriving spin-wave front.
    let mut body = file_header(cfg, &[cfg.seed]);
    body.push_str("cell_x,cell_y,first_response_step,peak_dmz\n");
    for iy in 0..side {
        for ix in 0..side {
            let series = &deviation[iy * side + ix];
            let peak = series.iter().cloned().fold(0.0, f64::max);
            let first = if peak > 0.0 {
                series
                    .iter()
                    .position(|d| *d >= 0.25 * peak)
                    .map(|s| s as i64)
                    .unwrap_or(-1)
            } else {
                -1
            };
            body.push_str(&format!("{ix},{iy},{first},{peak}\n"));
        }
    }
    write_atomic(&out_dir.join("impulse_response.csv"), &body)?;
    Ok(())
}

/// First-response steps from an impulse-response CSV, keyed by cell.
pub fn parse_impulse_response(path: &Path) -> Result<Vec<(usize, usize, i64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("cell_x") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(f.len() == 4, "bad impulse row: {line}");
        rows.push((f[0].parse()?, f[1].parse()?, f[2].parse()?));
    }
    Ok(rows)
}

/// Paired NMSE table for the same random configurations integrated at
/// 1 fs and at 100 fs, with a two-sided rank-sum p-value.
fn mode_timestep_compare(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    if cfg.reservoir != ReservoirKind::Film {
        bail!(CoreError::config(
            "timestep-compare applies to film reservoirs"
        ));
    }
    let task = load_task(cfg)?;
    let n_configs = cfg.timestep_configs();
    let seeds = run_seeds(cfg);

    let make_search = |dt: f64| FilmSearchConfig {
        material: MaterialParams::builtin(cfg.material),
        nx: cfg.grid_side,
        ny: cfg.grid_side,
        thickness: cfg.thickness_m(),
        temperature: cfg.temperature_k,
        dt,
        thermal_seed: derive_seed(cfg.seed, streams::THERMAL),
        dipole_cutoff: cfg.dipole_cutoff_m(),
    };
    let space = make_search(1e-13).space();
    let genotypes: Vec<Vec<f64>> = (0..n_configs)
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, streams::GENOME_INIT + i as u64);
            space.sample(&mut rng)
        })
        .collect();

    let failed = || EvalScore {
        val_nmse: f64::INFINITY,
        test_nmse: f64::INFINITY,
        lambda: f64::NAN,
    };
    let pairs: Vec<(EvalScore, EvalScore)> = genotypes
        .par_iter()
        .map(|genes| {
            let fine = make_search(1e-15)
                .evaluate(genes, &task)
                .unwrap_or_else(|_| failed());
            let coarse = make_search(1e-13)
                .evaluate(genes, &task)
                .unwrap_or_else(|_| failed());
            (fine, coarse)
        })
        .collect();

    let mut body = file_header(cfg, &seeds);
    body.push_str("config,genome_id,val_1fs,test_1fs,val_100fs,test_100fs\n");
    for (i, (genes, (fine, coarse))) in genotypes.iter().zip(pairs.iter()).enumerate() {
        body.push_str(&format!(
            "{i},{:016x},{},{},{},{}\n",
            genome_id(genes),
            fine.val_nmse,
            fine.test_nmse,
            coarse.val_nmse,
            coarse.test_nmse
        ));
    }
    write_atomic(&out_dir.join("timestep_pairs.csv"), &body)?;

    let fine_valid: Vec<f64> = pairs
        .iter()
        .filter(|(f, c)| f.test_nmse.is_finite() && c.test_nmse.is_finite())
        .map(|(f, _)| f.test_nmse)
        .collect();
    let coarse_valid: Vec<f64> = pairs
        .iter()
        .filter(|(f, c)| f.test_nmse.is_finite() && c.test_nmse.is_finite())
        .map(|(_, c)| c.test_nmse)
        .collect();
    let p_value = wilcoxon_ranksum(&fine_valid, &coarse_valid)?;

    let (_, med_fine, _) = quartiles(&fine_valid);
    let (_, med_coarse, _) = quartiles(&coarse_valid);
    let mut summary = file_header(cfg, &seeds);
    summary.push_str("task,n_configs,n_valid,median_test_1fs,median_test_100fs,p_value\n");
    summary.push_str(&format!(
        "{},{},{},{},{},{}\n",
        task.name,
        n_configs,
        fine_valid.len(),
        med_fine,
        med_coarse,
        p_value
    ));
    write_atomic(&out_dir.join("timestep_summary.csv"), &summary)?;
    Ok(())
}
