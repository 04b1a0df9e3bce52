//! Benchmark data: NARMA-n sequences and the chaotic-laser next-step
//! prediction task, with the fixed split protocol.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Leading rows discarded from every split before training or scoring.
pub const WASHOUT: usize = 50;

/// NARMA coefficients.
const NARMA_ALPHA: f64 = 0.3;
const NARMA_BETA: f64 = 0.05;
const NARMA_GAMMA: f64 = 0.1;
/// Regenerate when |y| exceeds this.
const NARMA_DIVERGENCE: f64 = 10.0;
const NARMA_MAX_ATTEMPTS: u64 = 100;

/// Contiguous, disjoint index ranges covering a task sequence exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: (usize, usize),
    pub val: (usize, usize),
    pub test: (usize, usize),
}

impl Splits {
    /// 60/20/20 split; 5000 → 3000/1000/1000 and 2000 → 1200/400/400.
    pub fn proportional(len: usize) -> Splits {
        let val_len = len / 5;
        let test_len = len / 5;
        let train_len = len - val_len - test_len;
        Splits {
            train: (0, train_len),
            val: (train_len, train_len + val_len),
            test: (train_len + val_len, len),
        }
    }
}

/// An input/target benchmark sequence with its split protocol.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskData {
    pub name: String,
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    pub splits: Splits,
    pub washout: usize,
}

impl TaskData {
    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }
}

/// What `narma_generate` actually did: divergent draws are regenerated
/// with the next seed rather than clamped, and the substitution is
/// reported.
#[derive(Clone, Debug)]
pub struct NarmaReport {
    pub requested_seed: u64,
    pub used_seed: u64,
    pub regenerations: u64,
}

/// The NARMA recurrence for a given input sequence:
///
///   y(n+1) = α y(n) + β y(n) Σ_{i=0..δ} y(n−i) + 1.5 u(n−δ) u(n) + γ
///
/// started from zero history. Returns y(1..=len) (so `out[t]` is the
/// target for input `u[t]`), or `None` if |y| diverges past 10.
pub fn narma_recurrence(u: &[f64], delta: usize) -> Option<Vec<f64>> {
    let len = u.len();
    let mut y = vec![0.0f64; len + 1];
    for t in 0..len {
        let mut window = 0.0;
        for i in 0..=delta {
            if t >= i {
                window += y[t - i];
            }
        }
        let u_lag = if t >= delta { u[t - delta] } else { 0.0 };
        let next =
            NARMA_ALPHA * y[t] + NARMA_BETA * y[t] * window + 1.5 * u_lag * u[t] + NARMA_GAMMA;
        if !next.is_finite() || next.abs() > NARMA_DIVERGENCE {
            return None;
        }
        y[t + 1] = next;
    }
    Some(y[1..].to_vec())
}

fn narma_input(length: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length).map(|_| rng.gen_range(0.0..0.5)).collect()
}

/// Default lag per order. NARMA-10 uses the conventional `δ = n − 1 = 9`.
/// For order 30 the conventional lag is unusable with these coefficients:
/// the window of 30 terms makes `y(t+1) − y(t)` strictly positive for every
/// input (the fixed-point discriminant is negative even at zero input), so
/// every draw diverges. Order 30 therefore defaults to the stable published
/// parameter δ = 10; [`narma_generate_with_delta`] exposes any explicit lag.
pub fn narma_default_delta(order: usize) -> usize {
    if order == 30 {
        10
    } else {
        order - 1
    }
}

/// Generate a NARMA-n task: inputs uniform on [0, 0.5], targets from the
/// recurrence with the default lag for the order.
pub fn narma_generate(order: usize, length: usize, seed: u64) -> Result<(TaskData, NarmaReport)> {
    narma_generate_with_delta(order, narma_default_delta(order), length, seed)
}

pub fn narma_generate_with_delta(
    order: usize,
    delta: usize,
    length: usize,
    seed: u64,
) -> Result<(TaskData, NarmaReport)> {
    if length <= order + WASHOUT {
        return Err(Error::config(format!(
            "NARMA length {length} must exceed order {order} plus washout {WASHOUT}"
        )));
    }
    for attempt in 0..NARMA_MAX_ATTEMPTS {
        let used_seed = seed.wrapping_add(attempt);
        let input = narma_input(length, used_seed);
        if let Some(target) = narma_recurrence(&input, delta) {
            let data = TaskData {
                name: format!("narma{order}"),
                input,
                target,
                splits: Splits::proportional(length),
                washout: WASHOUT,
            };
            return Ok((
                data,
                NarmaReport {
                    requested_seed: seed,
                    used_seed,
                    regenerations: attempt,
                },
            ));
        }
    }
    Err(Error::config(format!(
        "NARMA-{order} diverged for {NARMA_MAX_ATTEMPTS} consecutive seeds from {seed}"
    )))
}

/// Load the chaotic-laser task from a plain-text file, one integer sample
/// per line. The first 2000 next-step pairs are used (2001 samples), split
/// 1200/400/400 and normalised to [0, 1] by the training-segment min/max.
pub fn load_laser(path: &Path) -> Result<TaskData> {
    let text = fs::read_to_string(path)?;
    let needed = 2001;
    let mut values: Vec<f64> = Vec::with_capacity(needed);
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        let value: i64 = trimmed.parse().map_err(|_| Error::Ingestion {
            line: idx + 1,
            message: format!("expected one integer per line, got '{trimmed}'"),
        })?;
        values.push(value as f64);
        if values.len() == needed {
            break;
        }
    }
    if values.len() < needed {
        return Err(Error::Ingestion {
            line: values.len(),
            message: format!(
                "need {needed} samples to build 2000 next-step pairs, found {}",
                values.len()
            ),
        });
    }

    let len = needed - 1;
    let splits = Splits::proportional(len);
    let (lo, hi) = values[..splits.train.1]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    if hi <= lo {
        return Err(Error::config(
            "laser normalisation degenerate: training segment is constant",
        ));
    }
    let norm = |v: f64| (v - lo) / (hi - lo);

    Ok(TaskData {
        name: "laser".to_string(),
        input: values[..len].iter().map(|v| norm(*v)).collect(),
        target: values[1..=len].iter().map(|v| norm(*v)).collect(),
        splits,
        washout: WASHOUT,
    })
}

/// Deterministic stand-in for the laser file so the pipeline can run
/// offline: a logistic-map burst series quantised to integers, matching
/// the file format (one integer per line).
pub fn synthetic_laser_text(n: usize, seed: u64) -> String {
    let mut x = 0.2 + (seed % 997) as f64 / 1994.0; // in (0.2, 0.7)
    let mut out = String::with_capacity(n * 4);
    for _ in 0..n {
        x = 3.9 * x * (1.0 - x);
        let v = (x * 255.0).round() as i64;
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn write_synthetic_laser(path: &Path, n: usize, seed: u64) -> Result<()> {
    fs::write(path, synthetic_laser_text(n, seed))?;
    Ok(())
}
