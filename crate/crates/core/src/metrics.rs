//! Task-independent dynamics measures — kernel rank and linear memory
//! capacity — plus the two-sided Wilcoxon rank-sum test used for the
//! integrator time-step comparison.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Error;
use crate::reservoir::Reservoir;
use crate::rng::stream_rng;
use crate::tasks::WASHOUT;
use crate::Result;

/// Relative singular-value threshold for the effective rank.
pub const RANK_TAU: f64 = 1e-6;

/// Default probe-stream length for kernel rank (washout 50 included).
pub const KR_STREAM_LEN: usize = 100;

/// Ridge regularisation for the per-delay memory readouts.
const MC_LAMBDA: f64 = 1e-7;

/// Kernel-rank measurement.
#[derive(Clone, Copy, Debug)]
pub struct KernelRank {
    /// rank / state-dimension, in [0, 1].
    pub normalised: f64,
    pub rank: usize,
    pub state_dim: usize,
    /// True when every probe state was zero (rank reported as 0).
    pub degenerate: bool,
}

/// Count of singular values above `tau` relative to the largest.
pub fn effective_rank(matrix: &DMatrix<f64>, tau: f64) -> usize {
    let svd = matrix.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > tau * sigma_max)
        .count()
}

/// Drive the reservoir with `n_streams` independent random input streams
/// (uniform on [−1, 1], length `stream_len`), collect each stream's final
/// state as a matrix column, and return the effective rank normalised by
/// the state dimension.
pub fn kernel_rank<R: Reservoir + ?Sized>(
    reservoir: &mut R,
    n_streams: usize,
    stream_len: usize,
    seed: u64,
) -> Result<KernelRank> {
    if n_streams == 0 || stream_len <= WASHOUT {
        return Err(Error::config(format!(
            "kernel rank needs n_streams ≥ 1 and stream_len > {WASHOUT}"
        )));
    }
    let dim = reservoir.state_dim();
    let mut columns = DMatrix::<f64>::zeros(dim, n_streams);
    for s in 0..n_streams {
        let mut rng = stream_rng(seed, 0x4b52_0000 + s as u64);
        let input: Vec<f64> = (0..stream_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let states = reservoir.drive(&input)?;
        let last = states.row(states.n_rows() - 1);
        for (d, v) in last.iter().enumerate() {
            columns[(d, s)] = *v;
        }
    }
    if columns.iter().all(|v| *v == 0.0) {
        return Ok(KernelRank {
            normalised: 0.0,
            rank: 0,
            state_dim: dim,
            degenerate: true,
        });
    }
    let rank = effective_rank(&columns, RANK_TAU);
    Ok(KernelRank {
        normalised: rank as f64 / dim as f64,
        rank,
        state_dim: dim,
        degenerate: false,
    })
}

/// Memory-capacity measurement: `total = Σ_k r²_k` with the per-delay
/// held-out squared correlations alongside.
#[derive(Clone, Debug)]
pub struct MemoryCapacity {
    pub total: f64,
    pub per_delay: Vec<f64>,
}

fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    (cov * cov) / (va * vb)
}

/// Drive with i.i.d. uniform [−1, 1] input; for each delay k = 1..max_delay
/// train a ridge readout to reconstruct u(t−k) on a training segment and
/// score the squared correlation on a held-out segment.
pub fn memory_capacity<R: Reservoir + ?Sized>(
    reservoir: &mut R,
    max_delay: usize,
    seq_len: usize,
    seed: u64,
) -> Result<MemoryCapacity> {
    let start = WASHOUT + max_delay;
    if max_delay == 0 || seq_len < start + 60 {
        return Err(Error::config(format!(
            "memory capacity needs seq_len ≥ washout + max_delay + 60, got {seq_len}"
        )));
    }
    let mut rng = stream_rng(seed, 0x4d43_0000);
    let input: Vec<f64> = (0..seq_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let states = reservoir.drive(&input)?;
    let dim = states.n_cols();

    let usable = seq_len - start;
    let train_len = usable * 2 / 3;
    let hold_len = usable - train_len;
    let x_train = states.rows_range(start, start + train_len);
    let x_hold = states.rows_range(start + train_len, seq_len);

    // One factorisation serves every delay.
    let mut gram = x_train.tr_mul(&x_train);
    for i in 0..dim {
        gram[(i, i)] += MC_LAMBDA;
    }
    let chol = gram
        .cholesky()
        .ok_or(Error::Singular { lambda: MC_LAMBDA })?;

    let mut per_delay = Vec::with_capacity(max_delay);
    let mut total = 0.0;
    for k in 1..=max_delay {
        let y_train = DVector::<f64>::from_fn(train_len, |r, _| input[start + r - k]);
        let w = chol.solve(&(x_train.tr_mul(&y_train)));
        let pred = &x_hold * &w;
        let pred_vec: Vec<f64> = pred.iter().copied().collect();
        let y_hold: Vec<f64> = (0..hold_len)
            .map(|r| input[start + train_len + r - k])
            .collect();
        let r2 = squared_correlation(&pred_vec, &y_hold);
        per_delay.push(r2);
        total += r2;
    }
    Ok(MemoryCapacity { total, per_delay })
}

/// Complementary error function (fractional error below 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Two-sided Wilcoxon rank-sum p-value by normal approximation with tie
/// and continuity corrections. Identical samples give p = 1.
pub fn wilcoxon_ranksum(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    let (n1, n2) = (sample_a.len(), sample_b.len());
    if n1 < 5 || n2 < 5 {
        return Err(Error::config(
            "rank-sum test needs at least 5 samples per group",
        ));
    }
    let n = n1 + n2;
    let mut pooled: Vec<(f64, bool)> = sample_a
        .iter()
        .map(|v| (*v, true))
        .chain(sample_b.iter().map(|v| (*v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("non-finite sample"));

    // Average ranks over tie groups; accumulate the tie correction Σ(t³−t).
    let mut ranks = vec![0.0f64; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        let avg_rank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1..=j
        for r in ranks.iter_mut().take(j).skip(i) {
            *r = avg_rank;
        }
        tie_term += t * t * t - t;
        i = j;
    }

    let w: f64 = pooled
        .iter()
        .zip(ranks.iter())
        .filter(|((_, is_a), _)| *is_a)
        .map(|(_, r)| *r)
        .sum();
    let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let variance = (n1 as f64 * n2 as f64 / 12.0)
        * ((n as f64 + 1.0) - tie_term / (n as f64 * (n as f64 - 1.0)));
    if variance <= 0.0 {
        return Ok(1.0);
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    Ok(erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

/// Synthetic reservoirs with known dynamics, for calibrating the metrics.
pub mod probes {
    use super::*;
    use crate::reservoir::{leaky_filter, StateMatrix};

    /// Pure delay line: the state after input u(t) is
    /// [u(t−1), …, u(t−n)], zero-initialised.
    #[derive(Clone, Debug)]
    pub struct DelayLine {
        pub delays: usize,
    }

    impl Reservoir for DelayLine {
        fn state_dim(&self) -> usize {
            self.delays
        }

        fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
            let mut buf = vec![0.0f64; self.delays];
            let mut rows = Vec::with_capacity(input.len());
            for &u in input {
                rows.push(buf.clone());
                buf.rotate_right(1);
                buf[0] = u;
            }
            StateMatrix::from_rows(&rows, 0)
        }
    }

    /// The same scalar input copied into every component: rank one by
    /// construction.
    #[derive(Clone, Debug)]
    pub struct RepeatScalar {
        pub dim: usize,
    }

    impl Reservoir for RepeatScalar {
        fn state_dim(&self) -> usize {
            self.dim
        }

        fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
            let rows: Vec<Vec<f64>> = input.iter().map(|u| vec![*u; self.dim]).collect();
            StateMatrix::from_rows(&rows, 0)
        }
    }

    /// State depends on the current input only; no memory at all.
    #[derive(Clone, Debug)]
    pub struct Memoryless;

    impl Reservoir for Memoryless {
        fn state_dim(&self) -> usize {
            3
        }

        fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
            let rows: Vec<Vec<f64>> = input.iter().map(|u| vec![*u, u * u, u.tanh()]).collect();
            StateMatrix::from_rows(&rows, 0)
        }
    }

    /// Wraps a reservoir with the exponential leak filter.
    #[derive(Clone, Debug)]
    pub struct Filtered<R> {
        pub inner: R,
        pub leak_a: f64,
    }

    impl<R: Reservoir> Reservoir for Filtered<R> {
        fn state_dim(&self) -> usize {
            self.inner.state_dim()
        }

        fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
            let states = self.inner.drive(input)?;
            leaky_filter(&states, self.leak_a)
        }
    }

    /// Duplicates every state component; adds no rank.
    #[derive(Clone, Debug)]
    pub struct Duplicated<R> {
        pub inner: R,
    }

    impl<R: Reservoir> Reservoir for Duplicated<R> {
        fn state_dim(&self) -> usize {
            2 * self.inner.state_dim()
        }

        fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
            let states = self.inner.drive(input)?;
            let rows: Vec<Vec<f64>> = (0..states.n_rows())
                .map(|t| {
                    let row = states.row(t);
                    row.iter().chain(row.iter()).copied().collect()
                })
                .collect();
            StateMatrix::from_rows(&rows, 0)
        }
    }
}
