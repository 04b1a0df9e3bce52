use nalgebra::DMatrix;

use crate::error::Error;
use crate::Result;

/// Time-major matrix of observed reservoir states: one row per driven
/// input, one column per state component (3 per film cell, 1 per ESN node).
#[derive(Clone, Debug, PartialEq)]
pub struct StateMatrix {
    data: DMatrix<f64>,
    /// Leading rows to discard before training or scoring.
    washout: usize,
}

impl StateMatrix {
    pub fn from_matrix(data: DMatrix<f64>, washout: usize) -> Result<StateMatrix> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("state matrix contains non-finite entries"));
        }
        Ok(StateMatrix { data, washout })
    }

    pub fn from_rows(rows: &[Vec<f64>], washout: usize) -> Result<StateMatrix> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::config("state rows have inconsistent lengths"));
        }
        let data = DMatrix::from_fn(n_rows, n_cols, |r, c| rows[r][c]);
        StateMatrix::from_matrix(data, washout)
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn washout(&self) -> usize {
        self.washout
    }

    pub fn set_washout(&mut self, washout: usize) {
        self.washout = washout;
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.data.row(t).iter().copied().collect()
    }

    /// Contiguous row block `[start, end)` as an owned matrix.
    pub fn rows_range(&self, start: usize, end: usize) -> DMatrix<f64> {
        self.data.rows(start, end - start).into_owned()
    }
}

/// Exponential one-step filter applied row-wise:
///
///   X_f(t) = (1 − a) X_f(t−1) + a X(t),   X_f(0) = X(0).
///
/// `a = 1` returns the input unchanged; smaller `a` mixes in more history.
pub fn leaky_filter(states: &StateMatrix, leak_a: f64) -> Result<StateMatrix> {
    if !(leak_a > 0.0 && leak_a <= 1.0) {
        return Err(Error::config(format!(
            "leak rate must lie in (0, 1], got {leak_a}"
        )));
    }
    let mut data = states.data.clone();
    let retain = 1.0 - leak_a;
    for t in 1..data.nrows() {
        for c in 0..data.ncols() {
            data[(t, c)] = retain * data[(t - 1, c)] + leak_a * data[(t, c)];
        }
    }
    StateMatrix::from_matrix(data, states.washout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(rows: &[Vec<f64>]) -> StateMatrix {
        StateMatrix::from_rows(rows, 0).unwrap()
    }

    #[test]
    fn filter_with_unit_leak_is_identity() {
        let s = sm(&[vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 9.0]]);
        let f = leaky_filter(&s, 1.0).unwrap();
        assert_eq!(f, s);
    }

    #[test]
    fn filter_hand_evaluated_recurrence() {
        // a = 0.5, rows [0], [1] → [0], [0.5].
        let s = sm(&[vec![0.0], vec![1.0]]);
        let f = leaky_filter(&s, 0.5).unwrap();
        assert_eq!(f.data()[(0, 0)], 0.0);
        assert_eq!(f.data()[(1, 0)], 0.5);
    }

    #[test]
    fn filter_converges_to_constant_input() {
        let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![2.5]).collect();
        let f = leaky_filter(&sm(&rows), 0.3).unwrap();
        assert!((f.data()[(59, 0)] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn filter_is_linear() {
        let x = sm(&[vec![1.0, -2.0], vec![0.3, 4.0], vec![-1.5, 0.0]]);
        let y = sm(&[vec![0.5, 1.0], vec![-2.0, 2.0], vec![3.0, -0.25]]);
        let (alpha, beta) = (1.7, -0.4);

        let combo_rows: Vec<Vec<f64>> = (0..3)
            .map(|t| {
                (0..2)
                    .map(|c| alpha * x.data()[(t, c)] + beta * y.data()[(t, c)])
                    .collect()
            })
            .collect();
        let lhs = leaky_filter(&sm(&combo_rows), 0.6).unwrap();
        let fx = leaky_filter(&x, 0.6).unwrap();
        let fy = leaky_filter(&y, 0.6).unwrap();
        for t in 0..3 {
            for c in 0..2 {
                let rhs = alpha * fx.data()[(t, c)] + beta * fy.data()[(t, c)];
                assert!((lhs.data()[(t, c)] - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn filter_rejects_out_of_range_leak() {
        let s = sm(&[vec![1.0]]);
        assert!(leaky_filter(&s, 0.0).is_err());
        assert!(leaky_filter(&s, 1.2).is_err());
    }

    #[test]
    fn non_finite_rows_are_rejected() {
        let res = StateMatrix::from_rows(&[vec![1.0], vec![f64::NAN]], 0);
        assert!(res.is_err());
    }
}
