//! Microbial genetic algorithm over flat real-vector genotypes, plus the
//! random-search baseline protocol.
//!
//! One tournament: pick an individual, pick a second within the deme
//! (±10% of the population on a ring); the worse of the two receives each
//! winner gene with the recombination probability, then each of its genes
//! mutates with the mutation probability. The winner is never modified, so
//! the best fitness in the population is non-increasing.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::eval::EvalScore;
use crate::rng::derive_seed;
use crate::Result;

/// Per-gene inclusive bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchSpace {
    pub bounds: Vec<(f64, f64)>,
}

impl SearchSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> SearchSpace {
        SearchSpace { bounds }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|(lo, hi)| {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..*hi)
                }
            })
            .collect()
    }

    pub fn contains(&self, genes: &[f64]) -> bool {
        genes.len() == self.dim()
            && genes
                .iter()
                .zip(self.bounds.iter())
                .all(|(g, (lo, hi))| *g >= *lo && *g <= *hi)
    }

    /// Reflect a value into [lo, hi].
    fn reflect(mut value: f64, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            return lo;
        }
        let width = hi - lo;
        while value < lo || value > hi {
            if value < lo {
                value = lo + (lo - value);
            } else {
                value = hi - (value - hi);
            }
            // A pathological jump many widths out still terminates: each
            // bounce strictly reduces the excursion by 2·width.
            if !value.is_finite() {
                return lo + 0.5 * width;
            }
        }
        value
    }
}

/// Microbial GA parameters. Defaults follow the full experimental
/// protocol; desk-scale runs shrink the population and tournament count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MgaParams {
    pub population: usize,
    pub tournaments: usize,
    pub mutation_rate: f64,
    pub recombination_rate: f64,
    /// Deme size as a fraction of the population (ring topology).
    pub deme_fraction: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_sigma_fraction: f64,
}

impl Default for MgaParams {
    fn default() -> Self {
        MgaParams {
            population: 100,
            tournaments: 2000,
            mutation_rate: 0.05,
            recombination_rate: 0.5,
            deme_fraction: 0.1,
            mutation_sigma_fraction: 0.1,
        }
    }
}

impl MgaParams {
    /// Desk-scale protocol: population 20, 200 tournaments.
    pub fn desk_scale() -> Self {
        MgaParams {
            population: 20,
            tournaments: 200,
            ..MgaParams::default()
        }
    }
}

/// One best-so-far history record per tournament.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistoryRow {
    pub tournament: usize,
    pub best_val_nmse: f64,
    pub best_test_nmse: f64,
    pub genome_id: u64,
}

/// Result of one evolutionary run.
#[derive(Clone, Debug)]
pub struct MgaOutcome {
    pub best_genes: Vec<f64>,
    pub best_score: EvalScore,
    pub best_id: u64,
    pub history: Vec<HistoryRow>,
    /// Count of real fitness evaluations (memoisation hits excluded).
    pub evaluations: usize,
}

/// Stable content id for a genotype: FNV-1a over the gene bit patterns.
pub fn genome_id(genes: &[f64]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for g in genes {
        for byte in g.to_bits().to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

fn failed_score() -> EvalScore {
    EvalScore {
        val_nmse: f64::INFINITY,
        test_nmse: f64::INFINITY,
        lambda: f64::NAN,
    }
}

/// Run the microbial GA. `eval_fn` returns the validation/test scores for
/// a genotype; an error marks the genotype's fitness as +∞ and evolution
/// continues. Selection uses validation NMSE only.
pub fn mga_run(
    space: &SearchSpace,
    mut eval_fn: impl FnMut(&[f64]) -> Result<EvalScore>,
    params: &MgaParams,
    seed: u64,
) -> Result<MgaOutcome> {
    if params.population < 2 {
        return Err(Error::config("population must be at least 2"));
    }
    if !(0.0..=1.0).contains(&params.mutation_rate)
        || !(0.0..=1.0).contains(&params.recombination_rate)
    {
        return Err(Error::config("rates must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop_n = params.population;
    let deme = ((params.deme_fraction * pop_n as f64).round() as usize).max(1);

    let mut population: Vec<Vec<f64>> = (0..pop_n).map(|_| space.sample(&mut rng)).collect();
    let mut fitness: Vec<Option<EvalScore>> = vec![None; pop_n];
    let mut evaluations = 0usize;

    let mut best_genes: Option<Vec<f64>> = None;
    let mut best_score = failed_score();
    let mut best_id = 0u64;
    let mut history = Vec::with_capacity(params.tournaments);

    for tournament in 0..params.tournaments {
        let a = rng.gen_range(0..pop_n);
        let magnitude = rng.gen_range(1..=deme);
        let forward: bool = rng.gen_bool(0.5);
        let b = if forward {
            (a + magnitude) % pop_n
        } else {
            (a + pop_n - magnitude % pop_n) % pop_n
        };

        for idx in [a, b] {
            if fitness[idx].is_none() {
                let score = eval_fn(&population[idx]).unwrap_or_else(|_| failed_score());
                evaluations += 1;
                if score.val_nmse < best_score.val_nmse || best_genes.is_none() {
                    best_score = score.clone();
                    best_genes = Some(population[idx].clone());
                    best_id = genome_id(&population[idx]);
                }
                fitness[idx] = Some(score);
            }
        }

        let fa = fitness[a].as_ref().expect("evaluated").val_nmse;
        let fb = fitness[b].as_ref().expect("evaluated").val_nmse;
        let (winner, loser) = if fa <= fb { (a, b) } else { (b, a) };

        // Infection then mutation, gene by gene.
        let (w_genes, l_genes) = if winner < loser {
            let (head, tail) = population.split_at_mut(loser);
            (&head[winner], &mut tail[0])
        } else {
            let (head, tail) = population.split_at_mut(winner);
            (&tail[0], &mut head[loser])
        };
        for g in 0..space.dim() {
            if rng.gen_bool(params.recombination_rate) {
                l_genes[g] = w_genes[g];
            }
        }
        for (g, (lo, hi)) in space.bounds.iter().enumerate() {
            if rng.gen_bool(params.mutation_rate) {
                let sigma = params.mutation_sigma_fraction * (hi - lo);
                let noise: f64 = rng.sample(StandardNormal);
                l_genes[g] = SearchSpace::reflect(l_genes[g] + sigma * noise, *lo, *hi);
            }
        }
        fitness[loser] = None;

        history.push(HistoryRow {
            tournament,
            best_val_nmse: best_score.val_nmse,
            best_test_nmse: best_score.test_nmse,
            genome_id: best_id,
        });
    }

    let best_genes = best_genes.ok_or_else(|| Error::config("no tournament was run"))?;
    Ok(MgaOutcome {
        best_genes,
        best_score,
        best_id,
        history,
        evaluations,
    })
}

/// Best sample of one random-search batch.
#[derive(Clone, Debug)]
pub struct BatchBest {
    pub batch: usize,
    pub genes: Vec<f64>,
    pub score: EvalScore,
    pub genome_id: u64,
}

/// Uniform random search: per batch, sample `batch_size` genotypes within
/// bounds and keep the one with the lowest validation NMSE. Batches use
/// disjoint derived seeds, so the 20-batch protocol yields independent
/// bests.
pub fn random_search(
    space: &SearchSpace,
    mut eval_fn: impl FnMut(&[f64]) -> Result<EvalScore>,
    batch_size: usize,
    batches: usize,
    seed: u64,
) -> Result<Vec<BatchBest>> {
    if batch_size == 0 || batches == 0 {
        return Err(Error::config("batch size and batch count must be positive"));
    }
    let mut out = Vec::with_capacity(batches);
    for batch in 0..batches {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7273_0000 + batch as u64));
        let mut best: Option<BatchBest> = None;
        for _ in 0..batch_size {
            let genes = space.sample(&mut rng);
            let score = eval_fn(&genes).unwrap_or_else(|_| failed_score());
            let better = best
                .as_ref()
                .is_none_or(|b| score.val_nmse < b.score.val_nmse);
            if better {
                best = Some(BatchBest {
                    batch,
                    genome_id: genome_id(&genes),
                    genes,
                    score,
                });
            }
        }
        out.push(best.expect("batch_size >= 1"));
    }
    Ok(out)
}
