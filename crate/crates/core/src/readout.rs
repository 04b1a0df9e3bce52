//! Ridge-regression readout training and NMSE scoring, shared by films
//! and ESNs.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::Result;

/// Regularisation grid searched per reservoir by validation NMSE.
pub const LAMBDA_GRID: [f64; 5] = [1e-9, 1e-7, 1e-5, 1e-3, 1e-1];

/// Trained linear readout: `y(t) = w_out · x(t)`.
#[derive(Clone, Debug)]
pub struct Readout {
    /// (outputs × state-dim) weights.
    pub w_out: DMatrix<f64>,
    pub ridge_lambda: f64,
}

impl Readout {
    /// Apply to a (rows × state-dim) design; returns (rows × outputs).
    pub fn predict(&self, states: &DMatrix<f64>) -> DMatrix<f64> {
        states * self.w_out.transpose()
    }

    /// Scalar-output convenience.
    pub fn predict_series(&self, states: &DMatrix<f64>) -> Vec<f64> {
        self.predict(states).column(0).iter().copied().collect()
    }
}

/// Precomputed normal equations for one design, so a lambda grid costs one
/// Gram matrix and five cheap solves.
pub struct RidgeSolver {
    gram: DMatrix<f64>,
    xty: DMatrix<f64>,
}

impl RidgeSolver {
    /// `states`: (rows × dim), `targets`: (rows × outputs).
    pub fn new(states: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<RidgeSolver> {
        if states.nrows() != targets.nrows() {
            return Err(Error::config(format!(
                "design has {} rows but targets have {}",
                states.nrows(),
                targets.nrows()
            )));
        }
        if states.nrows() == 0 {
            return Err(Error::config("cannot train a readout on an empty design"));
        }
        Ok(RidgeSolver {
            gram: states.tr_mul(states),
            xty: states.tr_mul(targets),
        })
    }

    /// Solve `(XᵀX + λI) Wᵀ = XᵀY` by Cholesky factorisation.
    pub fn solve(&self, lambda: f64) -> Result<Readout> {
        if lambda < 0.0 {
            return Err(Error::config(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        let dim = self.gram.nrows();
        let mut regularised = self.gram.clone();
        for i in 0..dim {
            regularised[(i, i)] += lambda;
        }
        let chol = regularised.cholesky().ok_or(Error::Singular { lambda })?;
        let w = chol.solve(&self.xty); // (dim × outputs)
        Ok(Readout {
            w_out: w.transpose(),
            ridge_lambda: lambda,
        })
    }
}

/// Train a readout on post-washout rows:
/// `w_out = Yᵀ X (XᵀX + λI)⁻¹`, solved by factorisation rather than an
/// explicit inverse.
pub fn train_ridge(states: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> Result<Readout> {
    RidgeSolver::new(states, targets)?.solve(lambda)
}

/// Normalised mean square error:
/// `Σ (pred − target)² / Σ (target − mean(target))²`.
pub fn nmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::config(format!(
            "prediction length {} does not match target length {}",
            pred.len(),
            target.len()
        )));
    }
    if target.len() < 2 {
        return Err(Error::config("NMSE needs at least two samples"));
    }
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let denom: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let num: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(num / denom)
}
