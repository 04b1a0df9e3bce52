//! The drive → filter → train → score pipeline shared by evolution,
//! random search, sweeps and the metrics harness.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::evolve::SearchSpace;
use crate::readout::{nmse, RidgeSolver, LAMBDA_GRID};
use crate::reservoir::{
    leaky_filter, make_lattice_esn, make_random_esn, EsnConfig, EsnReservoir, FilmReservoir,
    Reservoir, ReservoirGenome, StateMatrix,
};
use crate::spin::MaterialParams;
use crate::tasks::TaskData;
use crate::Result;

/// Numerical floor standing in for the open end of (0, x] gene ranges.
pub const SCALAR_GENE_FLOOR: f64 = 1e-3;

/// Validation/test NMSE of one configuration, with the ridge lambda the
/// validation grid search selected.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalScore {
    pub val_nmse: f64,
    pub test_nmse: f64,
    pub lambda: f64,
}

/// Train on the post-washout training rows, pick lambda by validation
/// NMSE, and report validation and test NMSE.
pub fn evaluate_states(states: &StateMatrix, task: &TaskData) -> Result<EvalScore> {
    if states.n_rows() != task.len() {
        return Err(Error::config(format!(
            "state rows {} do not match task length {}",
            states.n_rows(),
            task.len()
        )));
    }
    let w = task.washout;
    let (tr0, tr1) = task.splits.train;
    let (va0, va1) = task.splits.val;
    let (te0, te1) = task.splits.test;
    if tr1 - tr0 <= w || va1 - va0 <= w || te1 - te0 <= w {
        return Err(Error::config("every split must be longer than the washout"));
    }

    let x_train = states.rows_range(tr0 + w, tr1);
    let y_train = DMatrix::<f64>::from_fn(tr1 - tr0 - w, 1, |r, _| task.target[tr0 + w + r]);
    let solver = RidgeSolver::new(&x_train, &y_train)?;

    let x_val = states.rows_range(va0 + w, va1);
    let y_val: Vec<f64> = task.target[va0 + w..va1].to_vec();

    let mut best: Option<(f64, f64)> = None; // (val_nmse, lambda)
    for &lambda in LAMBDA_GRID.iter() {
        let readout = solver.solve(lambda)?;
        let val = nmse(&readout.predict_series(&x_val), &y_val)?;
        let better = match best {
            None => val.is_finite(),
            Some((b, _)) => val.is_finite() && val < b,
        };
        if better {
            best = Some((val, lambda));
        }
    }
    let (val_nmse, lambda) =
        best.ok_or_else(|| Error::config("no ridge lambda produced a finite validation NMSE"))?;

    let readout = solver.solve(lambda)?;
    let x_test = states.rows_range(te0 + w, te1);
    let y_test: Vec<f64> = task.target[te0 + w..te1].to_vec();
    let test_nmse = nmse(&readout.predict_series(&x_test), &y_test)?;

    Ok(EvalScore {
        val_nmse,
        test_nmse,
        lambda,
    })
}

/// Film search: geometry and operating point are fixed; the genotype is
/// `[w_in (2 per cell); b; alpha; leak]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilmSearchConfig {
    pub material: MaterialParams,
    pub nx: usize,
    pub ny: usize,
    /// Film thickness (m).
    pub thickness: f64,
    /// Operating temperature (K).
    pub temperature: f64,
    /// Integrator step (s).
    pub dt: f64,
    pub thermal_seed: u64,
    pub dipole_cutoff: Option<f64>,
}

impl FilmSearchConfig {
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn gene_count(&self) -> usize {
        2 * self.n_cells() + 3
    }

    pub fn space(&self) -> SearchSpace {
        let mut bounds = vec![(-1.0, 1.0); 2 * self.n_cells()];
        bounds.push((SCALAR_GENE_FLOOR, 2.0)); // b
        bounds.push((SCALAR_GENE_FLOOR, 1.0)); // alpha
        bounds.push((SCALAR_GENE_FLOOR, 1.0)); // leak
        SearchSpace::new(bounds)
    }

    pub fn decode(&self, genes: &[f64]) -> Result<ReservoirGenome> {
        if genes.len() != self.gene_count() {
            return Err(Error::config(format!(
                "expected {} genes, got {}",
                self.gene_count(),
                genes.len()
            )));
        }
        let n = self.n_cells();
        let w_in: Vec<[f64; 2]> = (0..n).map(|i| [genes[2 * i], genes[2 * i + 1]]).collect();
        let genome = ReservoirGenome {
            w_in,
            b: genes[2 * n],
            alpha_damping: genes[2 * n + 1],
            leak_a: genes[2 * n + 2],
            material: self.material.clone(),
            nx: self.nx,
            ny: self.ny,
            thickness: self.thickness,
            temperature: self.temperature,
        };
        genome.validate()?;
        Ok(genome)
    }

    /// Encode an existing genome back into a gene vector.
    pub fn encode(&self, genome: &ReservoirGenome) -> Vec<f64> {
        let mut genes = Vec::with_capacity(self.gene_count());
        for w in &genome.w_in {
            genes.push(w[0]);
            genes.push(w[1]);
        }
        genes.push(genome.b);
        genes.push(genome.alpha_damping);
        genes.push(genome.leak_a);
        genes
    }

    pub fn build_reservoir(&self, genome: ReservoirGenome) -> Result<FilmReservoir> {
        FilmReservoir::with_dipole_cutoff(genome, self.dt, self.thermal_seed, self.dipole_cutoff)
    }

    pub fn evaluate(&self, genes: &[f64], task: &TaskData) -> Result<EvalScore> {
        let genome = self.decode(genes)?;
        evaluate_film_genome(self, genome, task)
    }
}

/// Drive the film over the full task input, apply the leak filter, and
/// score. Instability anywhere surfaces as an error (callers treat it as
/// +∞ fitness).
pub fn evaluate_film_genome(
    cfg: &FilmSearchConfig,
    genome: ReservoirGenome,
    task: &TaskData,
) -> Result<EvalScore> {
    let leak_a = genome.leak_a;
    let mut reservoir = cfg.build_reservoir(genome)?;
    let states = reservoir.drive(&task.input)?;
    let filtered = leaky_filter(&states, leak_a)?;
    evaluate_states(&filtered, task)
}

/// ESN search. By default the genotype is `[b; c; leak; topology-seed]`
/// and the weight matrices are regenerated from the seed gene. With
/// `raw_weights = Some(seed)` the sparsity pattern is fixed by that seed
/// and the nonzero weights themselves become genes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum EsnKind {
    Random { n_nodes: usize },
    Lattice { side: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EsnSearchConfig {
    pub kind: EsnKind,
    pub raw_weights: Option<u64>,
}

/// Bound for directly evolved weight genes.
const RAW_WEIGHT_BOUND: f64 = 3.0;

impl EsnSearchConfig {
    pub fn scalings_only(kind: EsnKind) -> EsnSearchConfig {
        EsnSearchConfig {
            kind,
            raw_weights: None,
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self.kind {
            EsnKind::Random { n_nodes } => n_nodes,
            EsnKind::Lattice { side } => side * side,
        }
    }

    fn template(&self, seed: u64) -> EsnConfig {
        match self.kind {
            EsnKind::Random { n_nodes } => make_random_esn(n_nodes, seed),
            EsnKind::Lattice { side } => make_lattice_esn(side, seed),
        }
    }

    pub fn space(&self) -> SearchSpace {
        let mut bounds = vec![
            (SCALAR_GENE_FLOOR, 2.0), // b
            (SCALAR_GENE_FLOOR, 2.0), // c
            (SCALAR_GENE_FLOOR, 1.0), // leak
        ];
        match self.raw_weights {
            None => bounds.push((0.0, u32::MAX as f64)), // topology seed
            Some(seed) => {
                let template = self.template(seed);
                let n_weight_genes = 2 * template.n_nodes + template.w.nnz();
                bounds.extend(std::iter::repeat_n(
                    (-RAW_WEIGHT_BOUND, RAW_WEIGHT_BOUND),
                    n_weight_genes,
                ));
            }
        }
        SearchSpace::new(bounds)
    }

    pub fn decode(&self, genes: &[f64]) -> Result<EsnConfig> {
        let expected = self.space().dim();
        if genes.len() != expected {
            return Err(Error::config(format!(
                "expected {expected} genes, got {}",
                genes.len()
            )));
        }
        let mut cfg = match self.raw_weights {
            None => self.template(genes[3].max(0.0) as u64),
            Some(seed) => {
                let mut cfg = self.template(seed);
                let n = cfg.n_nodes;
                for (i, w) in cfg.w_in.iter_mut().enumerate() {
                    w[0] = genes[3 + 2 * i];
                    w[1] = genes[3 + 2 * i + 1];
                }
                cfg.w.set_values(&genes[3 + 2 * n..]);
                cfg
            }
        };
        cfg.b = genes[0];
        cfg.c = genes[1];
        cfg.leak_a = genes[2];
        Ok(cfg)
    }

    pub fn evaluate(&self, genes: &[f64], task: &TaskData) -> Result<EvalScore> {
        let cfg = self.decode(genes)?;
        evaluate_esn(&cfg, task)
    }
}

/// Drive an ESN over the task input and score. The leak sits inside the
/// update rule, so no external filter is applied.
pub fn evaluate_esn(cfg: &EsnConfig, task: &TaskData) -> Result<EvalScore> {
    let mut reservoir = EsnReservoir::new(cfg.clone());
    let states = reservoir.drive(&task.input)?;
    evaluate_states(&states, task)
}

/// Interchange guard: both reservoir families expose the same state-matrix
/// contract, so any [`Reservoir`] can be scored against any task of the
/// same length.
pub fn evaluate_reservoir<R: Reservoir + ?Sized>(
    reservoir: &mut R,
    task: &TaskData,
) -> Result<EvalScore> {
    let states = reservoir.drive(&task.input)?;
    evaluate_states(&states, task)
}
