use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::reservoir::state_matrix::StateMatrix;
use crate::reservoir::Reservoir;
use crate::Result;

/// Internal connectivity of a digital reservoir.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Random,
    Lattice,
}

/// Sparsity of the randomly generated input and internal weight matrices.
const SPARSITY: f64 = 0.1;

/// Compressed sparse rows; enough structure for the update mat-vec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> SparseMatrix {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            row_ptr[r + 1] += 1;
            col_idx.push(c as u32);
            values.push(v);
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero count in one row.
    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    /// Replace the nonzero values, keeping the sparsity pattern.
    pub fn set_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.values.len());
        self.values.copy_from_slice(values);
    }

    /// y = A x.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *out = acc;
        }
    }
}

/// Echo-state-network configuration: fixed random weights plus the
/// evolvable scalings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EsnConfig {
    pub n_nodes: usize,
    /// Per-node `[w_u, w_bias]` input weights.
    pub w_in: Vec<[f64; 2]>,
    /// Internal weights.
    pub w: SparseMatrix,
    /// Input scaling.
    pub b: f64,
    /// Internal scaling.
    pub c: f64,
    /// Leak rate, in (0, 1].
    pub leak_a: f64,
    pub topology: Topology,
}

/// One state update:
///
///   x(t) = (1 − a) x(t−1) + a tanh(b W_in [u; 1] + c W x(t−1))
pub fn esn_update(cfg: &EsnConfig, x_prev: &[f64], u: f64) -> Vec<f64> {
    let mut next = vec![0.0; cfg.n_nodes];
    esn_update_into(cfg, x_prev, u, &mut next);
    next
}

fn esn_update_into(cfg: &EsnConfig, x_prev: &[f64], u: f64, out: &mut [f64]) {
    debug_assert_eq!(x_prev.len(), cfg.n_nodes);
    cfg.w.mul_into(x_prev, out);
    let retain = 1.0 - cfg.leak_a;
    for (i, o) in out.iter_mut().enumerate() {
        let drive = cfg.b * (cfg.w_in[i][0] * u + cfg.w_in[i][1]) + cfg.c * *o;
        *o = retain * x_prev[i] + cfg.leak_a * drive.tanh();
    }
}

fn random_w_in(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            let mut w = [0.0; 2];
            for entry in w.iter_mut() {
                if rng.gen_bool(SPARSITY) {
                    *entry = rng.sample(StandardNormal);
                }
            }
            w
        })
        .collect()
}

/// Random reservoir: input and internal weights are sparse (density 0.1)
/// with standard-normal nonzeros; generation is seed-deterministic.
/// Scalings default to 1 and are set by the search layer.
pub fn make_random_esn(n: usize, seed: u64) -> EsnConfig {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_in = random_w_in(n, &mut rng);
    let mut triplets = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if rng.gen_bool(SPARSITY) {
                triplets.push((r, c, rng.sample(StandardNormal)));
            }
        }
    }
    EsnConfig {
        n_nodes: n,
        w_in,
        w: SparseMatrix::from_triplets(n, triplets),
        b: 1.0,
        c: 1.0,
        leak_a: 1.0,
        topology: Topology::Random,
    }
}

/// Lattice reservoir: a side×side grid where each node connects to its
/// Moore neighbours and itself, weights standard-normal. A non-perimeter
/// node has exactly 9 internal weights; edges 6; corners 4.
pub fn make_lattice_esn(side: usize, seed: u64) -> EsnConfig {
    assert!(side >= 2);
    let n = side * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_in = random_w_in(n, &mut rng);
    let mut triplets = Vec::new();
    for y in 0..side as isize {
        for x in 0..side as isize {
            let r = (y * side as isize + x) as usize;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= side as isize || ny >= side as isize {
                        continue;
                    }
                    let c = (ny * side as isize + nx) as usize;
                    triplets.push((r, c, rng.sample(StandardNormal)));
                }
            }
        }
    }
    EsnConfig {
        n_nodes: n,
        w_in,
        w: SparseMatrix::from_triplets(n, triplets),
        b: 1.0,
        c: 1.0,
        leak_a: 1.0,
        topology: Topology::Lattice,
    }
}

/// Drives an [`EsnConfig`] from the zero state.
#[derive(Clone, Debug)]
pub struct EsnReservoir {
    cfg: EsnConfig,
}

impl EsnReservoir {
    pub fn new(cfg: EsnConfig) -> EsnReservoir {
        EsnReservoir { cfg }
    }

    pub fn config(&self) -> &EsnConfig {
        &self.cfg
    }
}

impl Reservoir for EsnReservoir {
    fn state_dim(&self) -> usize {
        self.cfg.n_nodes
    }

    fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
        let n = self.cfg.n_nodes;
        let mut x = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(input.len());
        for &u in input {
            esn_update_into(&self.cfg, &x, u, &mut next);
            std::mem::swap(&mut x, &mut next);
            rows.push(x.clone());
        }
        StateMatrix::from_rows(&rows, 0)
    }
}
